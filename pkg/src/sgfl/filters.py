"""FIR and parallel ARMA graph filters on static and time-varying graphs.

An FIR filter of order K weights the last K+1 samples, each propagated
through the ordered product of the Laplacian realizations seen since the
sample arrived.  A parallel ARMA filter runs K independent first-order
recursions ``y <- psi * L y + phi * x`` and sums the bank.

Time alignment: a runner step consumes one Laplacian realization together
with one fresh sample and emits one output.  For the FIR the zeroth tap
weights the fresh sample while the supplied realization multiplies the
previous samples, so a constant graph reproduces the static polynomial
filter exactly.  For the ARMA the output lags the input by one step.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "FilterCoeffs",
    "fir_coeffs",
    "arma_coeffs",
    "FirState",
    "ArmaState",
    "fir_init",
    "arma_init",
    "fir_apply_static",
    "fir_step_time_varying",
    "arma_step",
    "eval_response_fir",
    "eval_response_arma",
    "eval_2d_response",
    "mean_recursion_fir",
    "mean_recursion_arma",
    "steady_state_iters",
]


def steady_state_iters(order: int, factor: int = 20) -> int:
    """Iteration count conventionally treated as ARMA steady state."""
    return factor * max(order, 1)


@dataclass(frozen=True)
class FilterCoeffs:
    """Coefficients of an FIR (polynomial taps ``fir_phi[0..K]``) or a
    parallel ARMA filter (per-branch ``arma_psi``, ``arma_phi``).

    ARMA poles are ``1 / psi`` and residues ``-phi / psi``; stability on a
    spectral ball of radius rho requires ``|psi| * rho < 1`` per branch.
    """

    variant: str
    fir_phi: np.ndarray | None = None
    arma_psi: np.ndarray | None = None
    arma_phi: np.ndarray | None = None

    def __post_init__(self):
        if self.variant == "fir":
            if self.fir_phi is None or len(self.fir_phi) < 1:
                raise ValueError("FIR filter needs taps phi_0..phi_K (K >= 0)")
            object.__setattr__(self, "fir_phi", np.atleast_1d(np.asarray(self.fir_phi)))
        elif self.variant == "arma":
            if self.arma_psi is None or self.arma_phi is None:
                raise ValueError("ARMA filter needs psi and phi arrays")
            psi = np.atleast_1d(np.asarray(self.arma_psi))
            phi = np.atleast_1d(np.asarray(self.arma_phi))
            if len(psi) != len(phi) or len(psi) < 1:
                raise ValueError("ARMA psi/phi must have equal length K >= 1")
            object.__setattr__(self, "arma_psi", psi)
            object.__setattr__(self, "arma_phi", phi)
        else:
            raise ValueError(f"unknown filter variant {self.variant!r}")

    @property
    def order(self) -> int:
        if self.variant == "fir":
            return len(self.fir_phi) - 1
        return len(self.arma_psi)

    @property
    def poles(self) -> np.ndarray:
        self._require("arma")
        if np.any(self.arma_psi == 0):
            raise ZeroDivisionError("branch with psi = 0 has no finite pole")
        return 1.0 / self.arma_psi

    @property
    def residues(self) -> np.ndarray:
        self._require("arma")
        return -self.arma_phi / self.arma_psi

    def stability_margin(self, rho: float) -> float:
        """``max_k |psi_k| * rho``; stable iff this is below 1."""
        self._require("arma")
        return float(np.max(np.abs(self.arma_psi)) * rho)

    def is_stable(self, rho: float) -> bool:
        return self.stability_margin(rho) < 1.0

    def _require(self, variant: str) -> None:
        if self.variant != variant:
            raise ValueError(f"operation requires a {variant} filter")


def fir_coeffs(phi) -> FilterCoeffs:
    return FilterCoeffs(variant="fir", fir_phi=np.asarray(phi))


def arma_coeffs(psi, phi) -> FilterCoeffs:
    return FilterCoeffs(
        variant="arma", arma_psi=np.asarray(psi), arma_phi=np.asarray(phi)
    )


def _state_dtype(c: FilterCoeffs) -> np.dtype:
    if c.variant == "fir":
        return np.result_type(np.float64, c.fir_phi.dtype)
    return np.result_type(np.float64, c.arma_psi.dtype, c.arma_phi.dtype)


@dataclass(frozen=True)
class FirState:
    """Shift-register state: ``regs[k]`` holds the sample from k steps ago
    propagated through the ordered product of the realizations since."""

    regs: np.ndarray
    t: int = 0


@dataclass(frozen=True)
class ArmaState:
    """Parallel-bank memory ``y[k]`` of the K first-order recursions."""

    y: np.ndarray
    t: int = 0


def fir_init(c: FilterCoeffs, n_nodes: int) -> FirState:
    c._require("fir")
    return FirState(regs=np.zeros((c.order + 1, n_nodes)), t=0)


def arma_init(c: FilterCoeffs, n_nodes: int, y0: np.ndarray | None = None) -> ArmaState:
    c._require("arma")
    y = np.zeros((c.order, n_nodes), dtype=_state_dtype(c))
    if y0 is not None:
        y0 = np.asarray(y0)
        if y0.shape != y.shape:
            raise ValueError("initial state must have shape (K, n_nodes)")
        y = y + y0
    return ArmaState(y=y, t=0)


def fir_apply_static(c: FilterCoeffs, lap: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Static polynomial filter: sum of phi_k L^k x, evaluated by repeated
    matrix-vector products (the powers of L are never formed)."""
    c._require("fir")
    lap = np.asarray(lap)
    x = np.asarray(x)
    if lap.shape[0] != lap.shape[1] or lap.shape[1] != x.shape[0]:
        raise ValueError("Laplacian/signal dimensions disagree")
    phi = c.fir_phi
    power = x
    out = phi[0] * x
    for k in range(1, len(phi)):
        power = lap @ power
        out = out + phi[k] * power
    return out


def fir_step_time_varying(
    state: FirState, c: FilterCoeffs, lap_t: np.ndarray, x_t: np.ndarray
) -> tuple[FirState, np.ndarray]:
    """Advance the FIR runner by one step.

    The supplied realization multiplies every stored register and the
    fresh sample enters register zero, so the k-th tap output is the
    sample from k steps ago propagated through the last k realizations in
    order.  After K steps the output matches the definition exactly.
    Per-step cost is K matrix-vector products.
    """
    c._require("fir")
    regs = state.regs
    x_t = np.asarray(x_t)
    if regs.shape[1] != x_t.shape[0]:
        raise ValueError("signal length does not match runner state")
    if regs.shape[0] > 1:
        new = np.concatenate([x_t[None, :], regs[:-1] @ lap_t.T], axis=0)
    else:
        new = x_t[None, :].copy()
    z = np.tensordot(c.fir_phi, new, axes=1)
    return FirState(regs=new, t=state.t + 1), z


def arma_step(
    state: ArmaState, c: FilterCoeffs, lap_t: np.ndarray, x_t: np.ndarray
) -> tuple[ArmaState, np.ndarray]:
    """One parallel-bank step ``y_k <- psi_k L_t y_k + phi_k x_t``; the
    output is the bank sum.  Instability is the caller's concern; design
    helpers and the Monte Carlo harness warn when ``|psi| rho >= 1``."""
    c._require("arma")
    y = state.y
    x_t = np.asarray(x_t)
    if y.shape[1] != x_t.shape[0]:
        raise ValueError("signal length does not match runner state")
    new = c.arma_psi[:, None] * (y @ lap_t.T) + c.arma_phi[:, None] * x_t[None, :]
    return ArmaState(y=new, t=state.t + 1), new.sum(axis=0)


def eval_response_fir(c: FilterCoeffs, lam) -> np.ndarray:
    """Polynomial frequency response at graph frequency ``lam``."""
    c._require("fir")
    return npoly.polyval(np.asarray(lam), c.fir_phi)


def eval_response_arma(c: FilterCoeffs, lam) -> np.ndarray:
    """Rational frequency response: sum of residues over (lam - pole)."""
    c._require("arma")
    lam = np.asarray(lam, dtype=np.complex128)
    poles = c.poles
    diff = lam[..., None] - poles
    if np.any(np.abs(diff) < 1e-14):
        raise ValueError("pole on evaluation point")
    out = (c.residues / diff).sum(axis=-1)
    return out


def eval_2d_response(c: FilterCoeffs, z: complex, lam) -> np.ndarray:
    """Joint graph/temporal frequency response on the unit circle |z| = 1.

    FIR: sum of phi_k (lam / z)^k.  ARMA: sum over branches of
    phi_k z^{-1} / (1 - psi_k lam z^{-1}).
    """
    if abs(abs(z) - 1.0) > 1e-9:
        raise ValueError("temporal frequency must lie on the unit circle")
    lam = np.asarray(lam, dtype=np.complex128)
    if c.variant == "fir":
        return npoly.polyval(lam / z, c.fir_phi)
    if np.max(np.abs(c.arma_psi[..., :] * lam[..., None])) >= 1.0:
        warnings.warn(
            "|psi * lam| >= 1: outside the geometric convergence region",
            RuntimeWarning,
            stacklevel=2,
        )
    denom = 1.0 - c.arma_psi * lam[..., None] / z
    if np.any(np.abs(denom) < 1e-14):
        raise ValueError("vanishing denominator in 2-D response")
    return ((c.arma_phi / z) / denom).sum(axis=-1)


def _mean_fn(mean_seq):
    if callable(mean_seq):
        return mean_seq
    vec = np.asarray(mean_seq, dtype=np.float64)
    return lambda t: vec


def mean_recursion_fir(
    c: FilterCoeffs, lap_bar: np.ndarray, mean_seq, t_end: int
) -> np.ndarray:
    """Deterministic mean trajectory of the time-varying FIR runner on the
    expected graph: row ``t`` (0-based) is the expected output after
    ``t + 1`` steps.  With a constant mean it reaches the static filter
    output after K steps."""
    c._require("fir")
    mean = _mean_fn(mean_seq)
    n = lap_bar.shape[0]
    state = fir_init(c, n)
    out = np.empty((t_end, n), dtype=np.result_type(_state_dtype(c), np.float64))
    for t in range(1, t_end + 1):
        state, z = fir_step_time_varying(state, c, lap_bar, mean(t))
        out[t - 1] = z
    return out


def mean_recursion_arma(
    c: FilterCoeffs, lap_bar: np.ndarray, mean_seq, t_end: int
) -> np.ndarray:
    """Deterministic mean trajectory of the ARMA bank on the expected
    graph.  For a constant mean and a stable filter it converges linearly
    to the rational steady state."""
    c._require("arma")
    norm = float(np.linalg.norm(lap_bar, 2))
    if not c.is_stable(norm):
        warnings.warn(
            f"unstable ARMA recursion: |psi_max| * ||L|| = "
            f"{c.stability_margin(norm):.3g} >= 1",
            RuntimeWarning,
            stacklevel=2,
        )
    mean = _mean_fn(mean_seq)
    n = lap_bar.shape[0]
    state = arma_init(c, n)
    out = np.empty((t_end, n), dtype=_state_dtype(c))
    for t in range(1, t_end + 1):
        state, z = arma_step(state, c, lap_bar, mean(t))
        out[t - 1] = z
    return out
