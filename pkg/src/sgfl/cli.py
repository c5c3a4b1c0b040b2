"""Command-line front end.

Subcommands:

``run``     execute an experiment preset from a flat key=value config and
            write ``results.csv``, ``summary.txt``, ``meta.txt``
``design``  fit filter coefficients and write a coefficient file
``graph``   generate a random geometric graph and write its edge list

Exit codes: 0 success, 2 configuration error, 3 numerical error.  The
master seed comes from ``--seed``, the config, or the ``SGFL_SEED``
environment variable, in that order of precedence.  Every output file
starts with a comment block carrying the tool version, the resolved
configuration, and the seed; repeated invocations with the same seed are
byte-identical at any ``--threads`` setting.
"""

import argparse
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .design import (
    ResponseTarget,
    design_arma1_tikhonov,
    design_arma_ls,
    design_fir_ls,
    write_coeffs,
)
from .experiments import (
    ConfigError,
    PRESETS,
    config_lines,
    resolve_config,
    run_preset,
)
from .filters import eval_response_arma, eval_response_fir
from .graphs import (
    EigendecompositionError,
    LaplacianKind,
    generate_geometric_graph,
    write_graph,
)
from .moments import NumericalError

_NUMERICAL_ERRORS = (
    NumericalError,
    EigendecompositionError,
    np.linalg.LinAlgError,
    FloatingPointError,
)


def _fmt17(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _csv_line(values) -> str:
    return ",".join(_fmt17(v) for v in values)


def _git_blob_hash(text: str) -> str:
    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def read_config_file(path) -> dict:
    """Parse the flat ``key = value`` format (``#`` comments allowed)."""
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def _comment_block(cfg: dict, seed: int) -> list[str]:
    lines = [f"# sgfl {__version__}", f"# master_seed {seed}"]
    lines += [f"# {line}" for line in config_lines(cfg)]
    return lines


def cmd_run(args) -> int:
    raw = read_config_file(args.config)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    elif "seed" not in raw and os.environ.get("SGFL_SEED"):
        raw["seed"] = os.environ["SGFL_SEED"]
    cfg = resolve_config(raw)
    out_dir = Path(args.out) if args.out else Path(cfg["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    result = run_preset(cfg, n_threads=args.threads)

    resolved = "\n".join(config_lines(cfg)) + "\n"
    comment = _comment_block(cfg, cfg["seed"])
    csv_lines = comment + [",".join(result.header)]
    csv_lines += [_csv_line(row) for row in result.rows]
    (out_dir / "results.csv").write_text("\n".join(csv_lines) + "\n")

    summary_lines = comment + result.summary
    (out_dir / "summary.txt").write_text("\n".join(summary_lines) + "\n")

    meta_lines = comment + [
        f"content_hash {_git_blob_hash(resolved)}",
        "files results.csv summary.txt",
    ]
    (out_dir / "meta.txt").write_text("\n".join(meta_lines) + "\n")
    print(f"wrote {out_dir}/results.csv ({len(result.rows)} rows)")
    return 0


_KIND_CHOICES = [k.value for k in LaplacianKind]


def cmd_design(args) -> int:
    kind = LaplacianKind(args.kind)
    if args.range is not None:
        lo, hi = args.range
    elif kind is LaplacianKind.TRANSLATED_NORMALIZED:
        lo, hi = -1.0, 1.0
    elif kind is LaplacianKind.NORMALIZED:
        lo, hi = 0.0, 2.0
    else:
        raise ConfigError("--range is required for discrete-family kinds")
    if args.target == "tikhonov":
        if args.w is None or args.w <= 0:
            raise ConfigError("tikhonov target needs --w > 0")
        coeffs = design_arma1_tikhonov(args.w, kind)
        grid = np.linspace(lo, hi, args.grid)
        fit = np.max(np.abs(
            eval_response_arma(coeffs, grid) - 1.0 / (1.0 + args.w * (grid - lo))
        ))
        label = f"tikhonov w={args.w}"
    else:
        if args.target == "lowpass":
            cutoff = args.cutoff if args.cutoff is not None else 0.5 * (lo + hi)
            target = ResponseTarget(
                kind="ideal_lowpass", lambda_range=(lo, hi), cutoff=cutoff
            )
        else:  # constant1
            target = ResponseTarget(
                kind="tabulated",
                lambda_range=(lo, hi),
                grid_lambda=np.array([lo, hi]),
                grid_value=np.array([1.0, 1.0]),
            )
        grid = np.linspace(lo, hi, args.grid)
        if args.filter == "fir":
            coeffs = design_fir_ls(target, args.order, grid_size=args.grid)
            fit = np.max(np.abs(eval_response_fir(coeffs, grid) - target.evaluate(grid)))
        else:
            rho = max(abs(lo), abs(hi))
            coeffs = design_arma_ls(
                target, max(args.order, 1), pole_radius=args.pole_factor * rho,
                rho=rho, grid_size=args.grid,
            )
            fit = np.max(np.abs(eval_response_arma(coeffs, grid) - target.evaluate(grid)))
        label = f"{args.target} order={args.order}"
    comments = [
        f"sgfl {__version__}",
        f"design {label} kind={kind.value} range=[{lo:g},{hi:g}]",
        f"max_fit_error {float(np.real(fit)):.17g}",
    ]
    write_coeffs(coeffs, args.out, comments=comments)
    print(f"max fit error on design grid: {float(np.real(fit)):.6g}")
    print(f"wrote {args.out}")
    return 0


def cmd_graph(args) -> int:
    g = generate_geometric_graph(args.n, args.radius, args.seed)
    comments = [
        f"sgfl {__version__}",
        f"geometric graph n={args.n} radius_fraction={args.radius:g} seed={args.seed}",
        f"edges {g.n_edges}",
        f"connected {str(bool(g.connected)).lower()}",
    ]
    write_graph(g, args.out, comments=comments)
    print(f"wrote {args.out} ({g.n_edges} edges, connected={g.connected})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgfl",
        description="Graph filtering under random edge sampling: presets, "
        "filter design, and graph generation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run",
        help="run an experiment preset",
        description="Run a preset described by a key=value config file. "
        f"Presets: {', '.join(PRESETS)}. Writes results.csv (schema in the "
        "header row), summary.txt and meta.txt into the output directory.",
    )
    run_p.add_argument("--config", required=True, help="path to key=value config")
    run_p.add_argument("--out", help="output directory (default: config output_dir)")
    run_p.add_argument("--seed", type=int, help="master seed override")
    run_p.add_argument("--threads", type=int, default=1, help="worker threads")
    run_p.add_argument(
        "--set", action="append", metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    run_p.set_defaults(func=cmd_run)

    design_p = sub.add_parser(
        "design",
        help="design filter coefficients",
        description="Fit coefficients to a target response and write the "
        "coefficient file; prints the maximum fit error on the grid.",
    )
    design_p.add_argument(
        "--target", required=True, choices=["tikhonov", "lowpass", "constant1"]
    )
    design_p.add_argument("--order", type=int, default=1, help="filter order")
    design_p.add_argument("--w", type=float, help="tikhonov weight")
    design_p.add_argument("--cutoff", type=float, help="low-pass cutoff")
    design_p.add_argument(
        "--filter", choices=["fir", "arma"], default="fir",
        help="filter family for lowpass/constant1 targets",
    )
    design_p.add_argument(
        "--kind", choices=_KIND_CHOICES, default="translated_normalized",
        help="Laplacian kind fixing the design band",
    )
    design_p.add_argument(
        "--range", type=float, nargs=2, metavar=("LO", "HI"),
        help="explicit frequency band",
    )
    design_p.add_argument("--grid", type=int, default=201, help="design grid size")
    design_p.add_argument(
        "--pole-factor", type=float, default=1.5, dest="pole_factor",
        help="ARMA pole radius as a multiple of the spectral bound",
    )
    design_p.add_argument("--out", required=True, help="coefficient file path")
    design_p.set_defaults(func=cmd_design)

    graph_p = sub.add_parser(
        "graph",
        help="generate a random geometric graph",
        description="Place nodes uniformly in the unit square and connect "
        "pairs within the radius fraction of the diameter; writes the "
        "edge-list file.",
    )
    graph_p.add_argument("--n", type=int, required=True, help="node count")
    graph_p.add_argument(
        "--radius", type=float, default=0.15,
        help="connection radius as a fraction of the diameter",
    )
    graph_p.add_argument("--seed", type=int, default=0)
    graph_p.add_argument("--out", required=True, help="edge-list file path")
    graph_p.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
