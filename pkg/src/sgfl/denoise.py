"""Streaming graph-signal denoising under a smoothness prior.

Samples arrive as ``x_t = u + n_t`` with zero-mean noise.  The smoothed
target is the Tikhonov solution ``(I + w L)^{-1} u``, realized by a
first-order recursion on the translated normalized Laplacian so the
iteration is stable for every weight.

Five estimators share the same sample stream:

DAD      running input average, then a fresh inner recursion per sample
JDMIA    one recursion step per sample on the running input average
JDMIOA   as JDMIA, plus a running average of the recursion output
JDMOA    one recursion step per sample on the raw sample, output averaged
LA       plain running average of the raw samples (graph-blind baseline)
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .filters import FilterCoeffs

__all__ = [
    "DenoiseState",
    "denoise_init",
    "tikhonov_closed_form",
    "dad_step",
    "jdmia_step",
    "jdmioa_step",
    "jdmoa_step",
    "la_step",
]


def tikhonov_closed_form(lap: np.ndarray, w: float, x: np.ndarray) -> np.ndarray:
    """Dense solve of ``(I + w L) u = x`` for an untranslated (positive
    semidefinite) Laplacian; the system matrix is always SPD."""
    if w <= 0:
        raise ValueError("regularization weight must be positive")
    lap = np.asarray(lap)
    n = lap.shape[0]
    return scipy.linalg.solve(np.eye(n) + w * lap, np.asarray(x), assume_a="pos")


@dataclass(frozen=True)
class DenoiseState:
    """Running quantities shared by the streaming estimators: sample
    count, running input average, recursion memory, and running output
    average.  Averages follow the exact rational update
    ``avg_t = ((t - 1) avg_{t-1} + value_t) / t``."""

    t: int
    input_mean: np.ndarray
    y: np.ndarray
    output_mean: np.ndarray


def denoise_init(n_nodes: int) -> DenoiseState:
    z = np.zeros(n_nodes)
    return DenoiseState(t=0, input_mean=z, y=z.copy(), output_mean=z.copy())


def _running(avg: np.ndarray, value: np.ndarray, t: int) -> np.ndarray:
    return ((t - 1) * avg + value) / t


def _branch(c: FilterCoeffs) -> tuple[float, float]:
    c._require("arma")
    if c.order != 1:
        raise ValueError("denoising recursion is first order")
    return float(c.arma_psi[0]), float(c.arma_phi[0])


def dad_step(
    state: DenoiseState,
    x_t: np.ndarray,
    lap: np.ndarray,
    c: FilterCoeffs,
    inner_iters: int = 100,
) -> tuple[DenoiseState, np.ndarray]:
    """Disjoint average-and-denoise: update the running input average,
    then run a fresh recursion for ``inner_iters`` iterations on the
    frozen average.  The estimate converges geometrically in the inner
    iteration count."""
    psi, phi = _branch(c)
    t = state.t + 1
    xbar = _running(state.input_mean, np.asarray(x_t), t)
    y = np.zeros_like(xbar)
    for _ in range(inner_iters):
        y = psi * (lap @ y) + phi * xbar
    new = DenoiseState(t=t, input_mean=xbar, y=state.y, output_mean=state.output_mean)
    return new, y


def jdmia_step(
    state: DenoiseState, x_t: np.ndarray, lap: np.ndarray, c: FilterCoeffs
) -> tuple[DenoiseState, np.ndarray]:
    """Joint denoising with input averaging: one recursion step per
    sample, driven by the running input average; the estimate is the raw
    recursion output (online analogue of DAD)."""
    psi, phi = _branch(c)
    t = state.t + 1
    xbar = _running(state.input_mean, np.asarray(x_t), t)
    y = psi * (lap @ state.y) + phi * xbar
    new = DenoiseState(t=t, input_mean=xbar, y=y, output_mean=state.output_mean)
    return new, y


def jdmioa_step(
    state: DenoiseState, x_t: np.ndarray, lap: np.ndarray, c: FilterCoeffs
) -> tuple[DenoiseState, np.ndarray]:
    """Joint denoising with input and output averaging: as JDMIA, but the
    estimate is the running average of the recursion outputs."""
    psi, phi = _branch(c)
    t = state.t + 1
    xbar = _running(state.input_mean, np.asarray(x_t), t)
    y = psi * (lap @ state.y) + phi * xbar
    ustar = _running(state.output_mean, y, t)
    new = DenoiseState(t=t, input_mean=xbar, y=y, output_mean=ustar)
    return new, ustar


def jdmoa_step(
    state: DenoiseState, x_t: np.ndarray, lap: np.ndarray, c: FilterCoeffs
) -> tuple[DenoiseState, np.ndarray]:
    """Joint denoising with output averaging: the recursion consumes the
    raw sample and the estimate is the running average of its outputs."""
    psi, phi = _branch(c)
    t = state.t + 1
    y = psi * (lap @ state.y) + phi * np.asarray(x_t)
    ustar = _running(state.output_mean, y, t)
    new = DenoiseState(
        t=t, input_mean=state.input_mean, y=y, output_mean=ustar
    )
    return new, ustar


def la_step(
    state: DenoiseState, x_t: np.ndarray
) -> tuple[DenoiseState, np.ndarray]:
    """Local averaging baseline: the estimate is the running average of
    the raw samples; the graph is ignored."""
    t = state.t + 1
    xbar = _running(state.input_mean, np.asarray(x_t), t)
    new = DenoiseState(
        t=t, input_mean=xbar, y=state.y, output_mean=state.output_mean
    )
    return new, xbar
