"""Filter design: least-squares FIR fits, pole/residue conversion, the
closed-form first-order Tikhonov smoother, and a fixed-pole least-squares
ARMA fit.

All fits are universal: the target response is matched on a uniform grid
over a frequency interval rather than on the eigenvalues of one
particular graph.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .filters import FilterCoeffs, arma_coeffs, fir_coeffs
from .graphs import LaplacianKind

__all__ = [
    "ResponseTarget",
    "design_fir_ls",
    "design_arma1_tikhonov",
    "arma_from_poles",
    "design_arma_ls",
    "write_coeffs",
    "read_coeffs",
]

DEFAULT_GRID = 201


@dataclass(frozen=True)
class ResponseTarget:
    """A desired frequency response over ``lambda_range``.

    kinds: ``ideal_lowpass`` (1 below ``cutoff``, 0 above),
    ``tikhonov`` (``1 / (1 + weight * lam)``), and ``tabulated``
    (linear interpolation of ``(grid_lambda, grid_value)`` pairs).
    """

    kind: str
    lambda_range: tuple[float, float]
    cutoff: float | None = None
    weight: float | None = None
    grid_lambda: np.ndarray | None = None
    grid_value: np.ndarray | None = None

    def __post_init__(self):
        lo, hi = self.lambda_range
        if not lo < hi:
            raise ValueError("lambda_range must be increasing")
        if self.kind == "ideal_lowpass":
            if self.cutoff is None or not (lo <= self.cutoff <= hi):
                raise ValueError("cutoff must lie within lambda_range")
        elif self.kind == "tikhonov":
            if self.weight is None or self.weight <= 0:
                raise ValueError("tikhonov weight must be positive")
        elif self.kind == "tabulated":
            lam = np.asarray(self.grid_lambda, dtype=np.float64)
            val = np.asarray(self.grid_value, dtype=np.float64)
            if lam.ndim != 1 or lam.shape != val.shape or len(lam) < 2:
                raise ValueError("tabulated target needs matching 1-D grids")
            if np.any(np.diff(lam) <= 0):
                raise ValueError("tabulated grid must be strictly increasing")
            object.__setattr__(self, "grid_lambda", lam)
            object.__setattr__(self, "grid_value", val)
        else:
            raise ValueError(f"unknown target kind {self.kind!r}")

    def evaluate(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        if self.kind == "ideal_lowpass":
            return (lam < self.cutoff).astype(np.float64)
        if self.kind == "tikhonov":
            return 1.0 / (1.0 + self.weight * lam)
        return np.interp(lam, self.grid_lambda, self.grid_value)


def _design_grid(target: ResponseTarget, grid_size: int) -> np.ndarray:
    lo, hi = target.lambda_range
    return np.linspace(lo, hi, grid_size)


def design_fir_ls(
    target: ResponseTarget, order: int, grid_size: int = DEFAULT_GRID
) -> FilterCoeffs:
    """Least-squares polynomial fit of the target on a uniform grid,
    solved through a QR factorization of the Vandermonde matrix."""
    if order < 0:
        raise ValueError("FIR order must be nonnegative")
    if grid_size < order + 1:
        raise ValueError("grid must have at least order + 1 points")
    lam = _design_grid(target, grid_size)
    h = target.evaluate(lam)
    V = np.vander(lam, order + 1, increasing=True)
    Q, R = np.linalg.qr(V)
    diag = np.abs(np.diag(R))
    if np.any(diag < 1e-12 * diag.max()):
        raise np.linalg.LinAlgError("rank-deficient FIR design matrix")
    phi = scipy.linalg.solve_triangular(R, Q.T @ h)
    return fir_coeffs(phi)


def design_arma1_tikhonov(w: float, lap_kind: LaplacianKind) -> FilterCoeffs:
    """First-order smoother realizing ``1 / (1 + w * lam)`` on the
    spectrum of the untranslated Laplacian while running on the translated
    operator, which keeps it stable for every ``w > 0``.

    For a translated operator ``M = a L - s I`` the branch coefficients
    are ``psi = -w / (a + w s)`` and ``phi = a / (a + w s)``.
    """
    if w <= 0:
        raise ValueError("regularization weight must be positive")
    lap_kind = LaplacianKind(lap_kind)
    if lap_kind is LaplacianKind.TRANSLATED_NORMALIZED:
        a, s = 1.0, 1.0
    elif lap_kind is LaplacianKind.SCALED_TRANSLATED_DISCRETE:
        # matrix = L_d / lambda_max - I/2; the regularizer acts on L_d / lambda_max
        a, s = 1.0, 0.5
    else:
        raise ValueError(
            "Tikhonov smoother needs a translated kind with rho <= 1"
        )
    denom = a + w * s
    return arma_coeffs(psi=[-w / denom], phi=[a / denom])


def arma_from_poles(poles, residues, rho: float) -> FilterCoeffs:
    """Convert a pole/residue description into branch coefficients.

    Every pole must lie strictly outside the spectral ball, ``|p| > rho``.
    """
    poles = np.atleast_1d(np.asarray(poles))
    residues = np.atleast_1d(np.asarray(residues))
    if poles.shape != residues.shape:
        raise ValueError("poles and residues must have equal length")
    if np.any(np.abs(poles) <= rho):
        raise ValueError("unstable pole: |p| <= rho")
    psi = 1.0 / poles
    phi = -residues * psi
    if np.all(np.abs(psi.imag) == 0) and np.all(np.abs(phi.imag) == 0):
        psi, phi = psi.real, phi.real
    return arma_coeffs(psi=psi, phi=phi)


def _fixed_poles(order: int, radius: float) -> np.ndarray:
    """K conjugate-closed poles equispaced on the circle of the given
    radius, at odd multiples of pi/K so the real axis point is -radius."""
    angles = np.pi * (2 * np.arange(order) + 1) / order
    return radius * np.exp(1j * angles)


def design_arma_ls(
    target: ResponseTarget,
    order: int,
    pole_radius: float,
    rho: float,
    grid_size: int = DEFAULT_GRID,
) -> FilterCoeffs:
    """Least-squares residue fit with poles fixed on a circle of radius
    ``pole_radius > rho``.  The pole set is conjugate-closed, so with a
    real target the residues come out in conjugate pairs and the realized
    response is real on the real axis."""
    if order < 1:
        raise ValueError("ARMA order must be at least 1")
    if pole_radius <= rho:
        raise ValueError("pole_radius must exceed rho")
    poles = _fixed_poles(order, pole_radius)
    lam = _design_grid(target, grid_size)
    h = target.evaluate(lam)
    A = 1.0 / (lam[:, None] - poles[None, :])
    res, _, rank, _ = np.linalg.lstsq(A, h.astype(np.complex128), rcond=None)
    if rank < order:
        raise np.linalg.LinAlgError("rank-deficient residue system")
    # symmetrize conjugate pairs to remove round-off asymmetry
    conj_index = np.empty(order, dtype=int)
    for k, p in enumerate(poles):
        conj_index[k] = int(np.argmin(np.abs(poles - np.conj(p))))
    res = 0.5 * (res + np.conj(res[conj_index]))
    return arma_from_poles(poles, res, rho)


# ---------------------------------------------------------------------------
# plain-text coefficient serialization
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if np.iscomplexobj(v) and v.imag != 0:
        return f"{v.real:.17g} {v.imag:.17g}"
    return f"{np.real(v):.17g}"


def write_coeffs(c: FilterCoeffs, path, comments: list[str] | None = None) -> None:
    """Write the coefficient file: optional ``#`` comments, a
    ``variant K`` header, then one coefficient per line (``phi k value``
    for FIR; ``psi k value`` / ``phi k value`` pairs for ARMA).  Complex
    values carry a second column for the imaginary part."""
    lines = [f"# {s}" for s in comments or []]
    lines.append(f"{c.variant} {c.order}")
    if c.variant == "fir":
        for k, v in enumerate(c.fir_phi):
            lines.append(f"phi {k} {_fmt(v)}")
    else:
        for k in range(c.order):
            lines.append(f"psi {k + 1} {_fmt(c.arma_psi[k])}")
            lines.append(f"phi {k + 1} {_fmt(c.arma_phi[k])}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_value(parts: list[str]):
    if len(parts) == 1:
        return float(parts[0])
    return complex(float(parts[0]), float(parts[1]))


def read_coeffs(path) -> FilterCoeffs:
    """Read the coefficient file written by :func:`write_coeffs`."""
    variant = None
    order = None
    values: dict[tuple[str, int], complex] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] in ("fir", "arma"):
                variant, order = parts[0], int(parts[1])
            else:
                values[(parts[0], int(parts[1]))] = _parse_value(parts[2:])
    if variant is None:
        raise ValueError("missing 'variant K' header")
    if variant == "fir":
        phi = np.array([values[("phi", k)] for k in range(order + 1)])
        if np.all(np.imag(phi) == 0):
            phi = np.real(phi)
        return fir_coeffs(phi)
    psi = np.array([values[("psi", k)] for k in range(1, order + 1)])
    phi = np.array([values[("phi", k)] for k in range(1, order + 1)])
    if np.all(np.imag(psi) == 0) and np.all(np.imag(phi) == 0):
        psi, phi = np.real(psi), np.real(phi)
    return arma_coeffs(psi, phi)
