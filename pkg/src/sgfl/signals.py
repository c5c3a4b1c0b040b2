"""Random graph processes: Gaussian signals with prescribed first and
second moments, possibly time-varying, plus the spectral syntheses used to
build smooth test signals.

Mean and covariance may each be a constant or a function of the time
index; realizations at distinct times are independent.
"""

from dataclasses import dataclass

import numpy as np

from .graphs import Spectrum

__all__ = [
    "SignalProcess",
    "sample_signal",
    "synth_lowpass_mean",
    "synth_exp_decay_mean",
]

_PSD_TOL = 1e-10


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Factor C with C C^T = cov, via eigendecomposition so that singular
    covariances (rank-deficient spectral constructions) sample cleanly."""
    cov = np.asarray(cov, dtype=np.float64)
    if np.max(np.abs(cov - cov.T)) > 1e-12:
        raise ValueError("covariance must be symmetric")
    w, V = np.linalg.eigh(cov)
    if w[0] < -_PSD_TOL * max(1.0, float(np.max(np.abs(w)))):
        raise ValueError(f"covariance is not positive semidefinite (min eig {w[0]:g})")
    return V * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class SignalProcess:
    """Generative description of the input process ``x_t``.

    ``mean`` is a vector or a callable ``t -> vector``; ``cov`` is an SPSD
    matrix or a callable ``t -> matrix``.  Only the Gaussian family is
    supported; the stochastic analysis depends on the moments alone.
    """

    mean: object
    cov: object
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.distribution != "gaussian":
            raise ValueError("only the gaussian family is supported")
        if not callable(self.mean):
            object.__setattr__(
                self, "mean", np.asarray(self.mean, dtype=np.float64)
            )
        if not callable(self.cov):
            object.__setattr__(self, "_factor", _psd_factor(self.cov))
        else:
            object.__setattr__(self, "_factor", None)

    def mean_at(self, t: int) -> np.ndarray:
        if callable(self.mean):
            return np.asarray(self.mean(t), dtype=np.float64)
        return self.mean

    def cov_at(self, t: int) -> np.ndarray:
        if callable(self.cov):
            return np.asarray(self.cov(t), dtype=np.float64)
        return np.asarray(self.cov, dtype=np.float64)

    def factor_at(self, t: int) -> np.ndarray:
        if self._factor is not None:
            return self._factor
        return _psd_factor(self.cov(t))


def sample_signal(
    proc: SignalProcess, t: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw one realization ``x_t = mean_t + C_t g`` with ``g`` standard
    normal and ``C_t`` a PSD factor of the covariance at ``t``."""
    if t < 0:
        raise ValueError("time index must be nonnegative")
    mean = proc.mean_at(t)
    C = proc.factor_at(t)
    if C.shape[0] != mean.shape[0]:
        raise ValueError("mean and covariance dimensions disagree")
    return mean + C @ rng.standard_normal(C.shape[1])


def synth_lowpass_mean(spec: Spectrum, cutoff: float = 1.0) -> np.ndarray:
    """Signal whose spectral coefficient is 1 on eigenvalues strictly below
    ``cutoff`` and 0 otherwise (ties at the cutoff are excluded)."""
    coeff = (spec.eigenvalues < cutoff).astype(np.float64)
    return spec.eigenvectors @ coeff


def synth_exp_decay_mean(spec: Spectrum, rate: float) -> np.ndarray:
    """Signal with exponentially decaying spectrum ``exp(-rate * lambda_n)``."""
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    return spec.eigenvectors @ np.exp(-rate * spec.eigenvalues)
