"""Output-moment analysis: average-variance bounds for FIR and ARMA
filters under edge and signal randomness, the exact recursive mean and
covariance propagation for the stacked ARMA system, and smoothness
(Dirichlet-form) statistics of signals on sampled graphs.

The covariance recursion needs the expectation of the two-sided product
of the zero-mean Laplacian fluctuation with the state second moment.  For
discrete-family Laplacians the fluctuation decomposes over independent
edges, which collapses that expectation to a sum of M rank-adjusted edge
terms instead of an N^2 x N^2 covariance tensor.
"""

from dataclasses import dataclass

import numpy as np

from .filters import FilterCoeffs
from .graphs import (
    Graph,
    LaplacianKind,
    NoClosedFormError,
    build_laplacian,
    expected_laplacian,
)
from .rng import substream

__all__ = [
    "NumericalError",
    "fir_variance_bound",
    "arma_variance_bound",
    "sparsified_variance_bound",
    "StackedArmaSystem",
    "MomentState",
    "mean_step",
    "expected_fluctuation_product",
    "covariance_step",
    "dirichlet_stats",
]

_PSD_TOL = 1e-8


class NumericalError(RuntimeError):
    """A numerical invariant (e.g. positive semidefiniteness) failed."""


def _second_moment_scale(var_bar_x: float, mean_norm_sq_over_N: float) -> float:
    if var_bar_x < 0 or mean_norm_sq_over_N < 0:
        raise ValueError("moment arguments must be nonnegative")
    return var_bar_x + mean_norm_sq_over_N


def fir_variance_bound(
    c: FilterCoeffs, rho: float, var_bar_x: float, mean_norm_sq_over_N: float
) -> float:
    """Upper bound on the limiting node-averaged output variance of an FIR
    filter.  Coefficients enter through their absolute values: the proof
    bounds every tap pair by a nonnegative quantity, and signed taps would
    understate the proven bound."""
    c._require("fir")
    powers = rho ** np.arange(len(c.fir_phi))
    gain = float(np.abs(c.fir_phi) @ powers)
    return gain**2 * _second_moment_scale(var_bar_x, mean_norm_sq_over_N)


def arma_variance_bound(
    c: FilterCoeffs, rho: float, var_bar_x: float, mean_norm_sq_over_N: float
) -> float:
    """Upper bound on the limiting node-averaged output variance of a
    parallel ARMA filter: ``K ||phi||^2 / (1 - rho |psi_max|)^2`` times the
    input second-moment scale.  ``psi_max`` is the branch coefficient of
    largest magnitude."""
    c._require("arma")
    margin = c.stability_margin(rho)
    if margin >= 1.0:
        raise ValueError("bound undefined (unstable): |psi_max| * rho >= 1")
    K = c.order
    num = K * float(np.sum(np.abs(c.arma_phi) ** 2))
    return num / (1.0 - margin) ** 2 * _second_moment_scale(
        var_bar_x, mean_norm_sq_over_N
    )


def sparsified_variance_bound(
    c: FilterCoeffs, rho: float, p: float, x_norm_sq_over_N: float
) -> float | None:
    """Variance bound for filtering a deterministic signal over uniformly
    sparsified realizations with rescaled coefficients.

    FIR: ``(sum_k |phi_k| (rho/p)^k)^2 ||x||^2 / N``.  ARMA:
    ``K ||phi||^2 ||x||^2 / (N (1 - rho |psi_max| / p)^2)``, or ``None``
    when ``rho |psi_max| / p >= 1`` (the bound is vacuous there).
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if x_norm_sq_over_N < 0:
        raise ValueError("signal energy must be nonnegative")
    if c.variant == "fir":
        ratios = (rho / p) ** np.arange(len(c.fir_phi))
        gain = float(np.abs(c.fir_phi) @ ratios)
        return gain**2 * x_norm_sq_over_N
    margin = c.stability_margin(rho) / p
    if margin >= 1.0:
        return None
    K = c.order
    num = K * float(np.sum(np.abs(c.arma_phi) ** 2))
    return num * x_norm_sq_over_N / (1.0 - margin) ** 2


@dataclass(frozen=True)
class StackedArmaSystem:
    """The parallel ARMA bank written as one linear system on the stacked
    state (K blocks of N nodes): block-diagonal transition built from the
    expected Laplacian, input matrix stacking the phi coefficients, and an
    output map summing the blocks.  Per-edge data (effective weight after
    the kind's scaling, activation probability, endpoints) drives the
    closed-form fluctuation expectation."""

    psi: np.ndarray
    phi: np.ndarray
    lbar: np.ndarray
    kind: LaplacianKind
    edge_i: np.ndarray
    edge_j: np.ndarray
    edge_weight: np.ndarray
    edge_prob: np.ndarray

    def __post_init__(self):
        if np.iscomplexobj(self.psi) or np.iscomplexobj(self.phi):
            raise TypeError("moment recursion supports real coefficients only")

    @classmethod
    def build(
        cls,
        c: FilterCoeffs,
        g: Graph,
        kind: LaplacianKind,
        lbar: np.ndarray | None = None,
    ) -> "StackedArmaSystem":
        c._require("arma")
        kind = LaplacianKind(kind)
        spec = build_laplacian(g, kind)
        if lbar is None:
            lbar = expected_laplacian(g, kind, mode="analytic")
        return cls(
            psi=np.asarray(c.arma_psi, dtype=np.float64),
            phi=np.asarray(c.arma_phi, dtype=np.float64),
            lbar=np.asarray(lbar, dtype=np.float64),
            kind=kind,
            edge_i=g.edge_i,
            edge_j=g.edge_j,
            edge_weight=g.weights * spec.edge_scale,
            edge_prob=g.probs,
        )

    @property
    def n_nodes(self) -> int:
        return self.lbar.shape[0]

    @property
    def order(self) -> int:
        return len(self.psi)

    @property
    def a_bar(self) -> np.ndarray:
        """Transition matrix of the stacked system (Kronecker structure)."""
        return np.kron(np.diag(self.psi), self.lbar)

    @property
    def b_mat(self) -> np.ndarray:
        return np.kron(self.phi[:, None], np.eye(self.n_nodes))

    @property
    def c_mat(self) -> np.ndarray:
        return np.kron(np.ones((1, self.order)), np.eye(self.n_nodes))


@dataclass(frozen=True)
class MomentState:
    """First moment (stacked mean) and raw second moment of the stacked
    ARMA state at time ``t``."""

    y_bar: np.ndarray
    r_y: np.ndarray
    t: int = 0

    @classmethod
    def zero(cls, sys: StackedArmaSystem) -> "MomentState":
        nk = sys.order * sys.n_nodes
        return cls(y_bar=np.zeros(nk), r_y=np.zeros((nk, nk)), t=0)


def _bank_mean_step(
    sys: StackedArmaSystem, y_bar: np.ndarray, x_bar_t: np.ndarray
) -> np.ndarray:
    """Per-block mean update; arithmetic identical to the ARMA runner."""
    yb = y_bar.reshape(sys.order, sys.n_nodes)
    return sys.psi[:, None] * (yb @ sys.lbar.T) + sys.phi[:, None] * x_bar_t[None, :]


def mean_step(
    sys: StackedArmaSystem, state: MomentState, x_bar_t: np.ndarray
) -> tuple[MomentState, np.ndarray]:
    """One deterministic mean step; returns the updated state and the
    expected output (block sum of the new stacked mean)."""
    new = _bank_mean_step(sys, state.y_bar, np.asarray(x_bar_t, dtype=np.float64))
    z_bar = new.sum(axis=0)
    return (
        MomentState(y_bar=new.reshape(-1), r_y=state.r_y, t=state.t + 1),
        z_bar,
    )


def expected_fluctuation_product(
    sys: StackedArmaSystem, r: np.ndarray
) -> np.ndarray:
    """Expectation of ``(fluctuation) R (fluctuation)^T`` where the
    fluctuation is the stacked zero-mean Laplacian deviation.

    With independent Bernoulli edges, each discrete-family Laplacian is a
    weighted sum of rank-one edge patterns, so the expectation reduces to
    a per-edge sum weighted by ``p(1-p) w^2``: block ``(k1, k2)`` is
    ``psi_k1 psi_k2 * sum_e c_e (R_ii - R_ij - R_ji + R_jj) E_e`` with
    ``E_e`` the usual two-node edge-Laplacian pattern of edge ``e``.
    """
    if not sys.kind.is_discrete_family:
        raise NoClosedFormError(
            "closed form unavailable for normalized-family Laplacians"
        )
    K, N = sys.order, sys.n_nodes
    r = np.asarray(r)
    if r.shape != (K * N, K * N):
        raise ValueError("second-moment matrix has the wrong shape")
    blocks = r.reshape(K, N, K, N)
    ei, ej = sys.edge_i, sys.edge_j
    ce = sys.edge_prob * (1.0 - sys.edge_prob) * sys.edge_weight**2
    out = np.zeros((K, N, K, N))
    for k1 in range(K):
        for k2 in range(K):
            blk = blocks[k1, :, k2, :]
            quad = blk[ei, ei] - blk[ei, ej] - blk[ej, ei] + blk[ej, ej]
            s = sys.psi[k1] * sys.psi[k2] * ce * quad
            tgt = out[k1, :, k2, :]
            np.add.at(tgt, (ei, ei), s)
            np.add.at(tgt, (ej, ej), s)
            np.add.at(tgt, (ei, ej), -s)
            np.add.at(tgt, (ej, ei), -s)
    return out.reshape(K * N, K * N)


def covariance_step(
    sys: StackedArmaSystem,
    state: MomentState,
    x_bar_t: np.ndarray,
    sigma_x_t: np.ndarray,
) -> tuple[MomentState, np.ndarray]:
    """Advance the exact first/second moments by one step and return the
    output covariance at the new time.

    The raw second moment evolves through the expected transition, the
    input moments, the mean cross terms, and the closed-form fluctuation
    expectation; the output covariance is the block sum of the centered
    state second moment.  Raises :class:`NumericalError` if the centered
    moment loses positive semidefiniteness beyond tolerance.
    """
    K, N = sys.order, sys.n_nodes
    x_bar_t = np.asarray(x_bar_t, dtype=np.float64)
    sigma_x_t = np.asarray(sigma_x_t, dtype=np.float64)
    yb = state.y_bar.reshape(K, N)
    r = state.r_y.reshape(K, N, K, N)

    # expected-transition and fluctuation contributions
    lr = np.einsum("ab,kbjc->kajc", sys.lbar, r)
    lrl = np.einsum("kajc,bc->kajb", lr, sys.lbar)
    new_r = sys.psi[:, None, None, None] * sys.psi[None, None, :, None] * lrl
    new_r += expected_fluctuation_product(sys, state.r_y).reshape(K, N, K, N)

    # input second moment and mean cross terms
    second_x = sigma_x_t + np.outer(x_bar_t, x_bar_t)
    u = sys.psi[:, None] * (yb @ sys.lbar.T)  # expected propagated state per block
    v = sys.phi[:, None] * x_bar_t[None, :]  # expected injected input per block
    new_r += np.einsum("kl,ab->kalb", np.outer(sys.phi, sys.phi), second_x)
    new_r += np.einsum("ka,lb->kalb", u, v)
    new_r += np.einsum("ka,lb->kalb", v, u)

    new_ybar = _bank_mean_step(sys, state.y_bar, x_bar_t)
    new_state = MomentState(
        y_bar=new_ybar.reshape(-1), r_y=new_r.reshape(K * N, K * N), t=state.t + 1
    )

    centered = new_state.r_y - np.outer(new_state.y_bar, new_state.y_bar)
    scale = max(1.0, float(np.trace(centered)) / (K * N))
    min_eig = float(np.linalg.eigvalsh(centered)[0])
    if min_eig < -_PSD_TOL * scale:
        raise NumericalError(
            f"state covariance lost positive semidefiniteness (min eig {min_eig:g})"
        )
    sigma_z = centered.reshape(K, N, K, N).sum(axis=(0, 2))
    return new_state, sigma_z


def dirichlet_stats(
    g: Graph,
    x: np.ndarray,
    mode: str = "analytic_mean",
    n_samples: int = 10000,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean and variance of the quadratic smoothness form of ``x`` over
    discrete-Laplacian realizations of ``g``.

    Analytic mode uses edge independence: the form is a weighted sum of
    squared edge differences with Bernoulli activations, so
    ``mean = sum_e p w d^2`` and ``var = sum_e p(1-p) w^2 d^4``.
    """
    x = np.asarray(x, dtype=np.float64)
    d2 = (x[g.edge_i] - x[g.edge_j]) ** 2
    if mode == "analytic_mean":
        mean = float(np.sum(g.probs * g.weights * d2))
        var = float(np.sum(g.probs * (1.0 - g.probs) * g.weights**2 * d2**2))
        return mean, var
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    rng = substream(seed)
    b = rng.random((n_samples, g.n_edges)) < g.probs
    vals = (b * (g.weights * d2)).sum(axis=1)
    return float(vals.mean()), float(vals.var())
