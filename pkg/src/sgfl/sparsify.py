"""Stochastically sparsified filtering of a deterministic signal on a
deterministic graph: each step exchanges messages only over a uniform
random subset of edges, cutting the per-step cost by the factor ``p``.

For discrete-family Laplacians the expected realization matrix is a
scaled version of the full one, so rescaling the coefficients (FIR taps
by ``p^{-k}``, ARMA branch ``psi`` by ``1/p``) makes the expected output
match the unsparsified filter.  The normalized family admits no such
closed form; running it uncorrected introduces a small bias.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .filters import (
    FilterCoeffs,
    _state_dtype,
    arma_coeffs,
    arma_init,
    arma_step,
    fir_coeffs,
    fir_init,
    fir_step_time_varying,
    steady_state_iters,
)
from .graphs import Graph, LaplacianKind, build_laplacian, res_laplacian
from .montecarlo import recursion_reference

__all__ = [
    "SparsifyConfig",
    "rescale_fir",
    "rescale_arma",
    "run_sparsified",
    "sparsify_report",
]


@dataclass(frozen=True)
class SparsifyConfig:
    """How to sparsify: uniform edge probability, whether to rescale the
    coefficients (discrete family only), and the Laplacian kind."""

    p: float
    corrected: bool
    lap_kind: LaplacianKind

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")
        object.__setattr__(self, "lap_kind", LaplacianKind(self.lap_kind))
        if self.corrected and not self.lap_kind.is_discrete_family:
            raise ValueError(
                "coefficient correction requires a discrete-family Laplacian"
            )


def rescale_fir(c: FilterCoeffs, p: float) -> FilterCoeffs:
    """Tap rescaling ``phi_k -> phi_k p^{-k}`` that cancels the expected
    edge thinning of a discrete Laplacian."""
    c._require("fir")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    scale = p ** -np.arange(len(c.fir_phi), dtype=np.float64)
    return fir_coeffs(c.fir_phi * scale)


def rescale_arma(c: FilterCoeffs, p: float) -> FilterCoeffs:
    """Branch rescaling ``psi -> psi / p`` (phi unchanged); the stability
    margin shrinks by the same factor ``1/p``."""
    c._require("arma")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return arma_coeffs(c.arma_psi / p, c.arma_phi)


def run_sparsified(
    c: FilterCoeffs,
    g: Graph,
    x: np.ndarray,
    cfg: SparsifyConfig,
    horizon: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """One sparsified trajectory plus its deterministic reference.

    Draws a fresh uniform-``p`` realization each step and runs the
    (rescaled, when corrected) filter on the constant input ``x``.  The
    reference is the original filter run on the underlying graph for the
    same horizon.  Returns ``(trajectory (T, N), reference (N,))``.
    """
    if rng is None:
        raise ValueError("an explicit random stream is required")
    x = np.asarray(x, dtype=np.float64)
    spec = build_laplacian(g, cfg.lap_kind)
    gp = g.with_uniform_p(cfg.p)
    if horizon is None:
        horizon = c.order if c.variant == "fir" else steady_state_iters(c.order)
        horizon = max(horizon, 1)
    run_coeffs = c
    if cfg.corrected:
        run_coeffs = rescale_fir(c, cfg.p) if c.variant == "fir" else rescale_arma(c, cfg.p)
    if run_coeffs.variant == "arma" and not run_coeffs.is_stable(spec.rho):
        warnings.warn(
            "rescaled ARMA runs outside the bound's stability region "
            f"(|psi/p| * rho = {run_coeffs.stability_margin(spec.rho):.3g})",
            RuntimeWarning,
            stacklevel=2,
        )
    n = g.n_nodes
    traj = np.zeros((horizon, n), dtype=_state_dtype(run_coeffs))
    if c.variant == "fir":
        state = fir_init(run_coeffs, n)
        step = lambda st, lap: fir_step_time_varying(st, run_coeffs, lap, x)
    else:
        state = arma_init(run_coeffs, n)
        step = lambda st, lap: arma_step(st, run_coeffs, lap, x)
    for t in range(horizon):
        mask = rng.random(gp.n_edges) < gp.probs
        lap = res_laplacian(gp, spec, mask)
        state, z = step(state, lap)
        traj[t] = z
    reference = recursion_reference(c, spec.matrix, x, horizon, (horizon,))[0]
    return traj, reference


def sparsify_report(
    final_outputs: np.ndarray, reference: np.ndarray, p: float
) -> tuple[np.ndarray, float, float]:
    """Summarize sparsification runs at steady state.

    Returns the per-node mean error, the node-and-run averaged error
    standard deviation, and the expected fraction of edge messages saved
    (``1 - p``).
    """
    final_outputs = np.asarray(final_outputs)
    if final_outputs.ndim != 2:
        raise ValueError("expected an array of shape (n_runs, n_nodes)")
    e = final_outputs - np.asarray(reference)[None, :]
    mean_error = e.mean(axis=0)
    sigma_e = float(np.sqrt(np.mean(np.abs(e) ** 2)))
    return mean_error, sigma_e, 1.0 - p
