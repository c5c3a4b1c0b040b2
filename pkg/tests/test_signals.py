"""Random graph processes and spectral signal synthesis."""

import numpy as np
import pytest

from sgfl import (
    LaplacianKind,
    SignalProcess,
    build_laplacian,
    gft,
    sample_signal,
    spectral_decompose,
    synth_exp_decay_mean,
    synth_lowpass_mean,
)
from sgfl.rng import substream


class TestSignalProcess:
    def test_rejects_indefinite_covariance(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues -1, 3
        with pytest.raises(ValueError, match="semidefinite"):
            SignalProcess(mean=np.zeros(2), cov=bad)

    def test_rejects_non_gaussian_family(self):
        with pytest.raises(ValueError, match="gaussian"):
            SignalProcess(mean=np.zeros(2), cov=np.eye(2), distribution="laplace")

    def test_singular_covariance_samples_cleanly(self):
        cov = np.outer([1.0, 1.0], [1.0, 1.0])  # rank one
        proc = SignalProcess(mean=np.zeros(2), cov=cov)
        x = sample_signal(proc, 0, substream(1))
        assert np.isclose(x[0], x[1])


class TestSampleSignal:
    def test_zero_covariance_reproduces_mean(self):
        mean = np.array([2.0, -1.0, 0.5])
        proc = SignalProcess(mean=mean, cov=np.zeros((3, 3)))
        for t in range(4):
            np.testing.assert_array_equal(sample_signal(proc, t, substream(2)), mean)

    def test_time_varying_mean(self):
        proc = SignalProcess(
            mean=lambda t: t * np.ones(2), cov=np.zeros((2, 2))
        )
        np.testing.assert_array_equal(sample_signal(proc, 3, substream(3)), [3.0, 3.0])

    def test_negative_time_rejected(self):
        proc = SignalProcess(mean=np.zeros(2), cov=np.eye(2))
        with pytest.raises(ValueError):
            sample_signal(proc, -1, substream(0))

    def test_per_node_variance_chi_square_ci(self):
        sigma2 = 0.7
        proc = SignalProcess(mean=np.zeros(3), cov=sigma2 * np.eye(3))
        rng = substream(5)
        n = 100000
        draws = np.array([sample_signal(proc, t, rng) for t in range(n)])
        est = draws.var(axis=0, ddof=1)
        tol = 4 * sigma2 * np.sqrt(2.0 / n)
        assert np.all(np.abs(est - sigma2) <= tol)

    def test_cross_covariance_matches(self):
        sigma2 = 1.3
        cov = sigma2 * np.array([[1.0, 0.5], [0.5, 1.0]])
        proc = SignalProcess(mean=np.zeros(2), cov=cov)
        rng = substream(6)
        n = 100000
        draws = np.array([sample_signal(proc, t, rng) for t in range(n)])
        est = np.cov(draws.T)
        # sd of a covariance entry is ~ sqrt((s_ii s_jj + s_ij^2)/n)
        tol = 4 * np.sqrt((sigma2**2 + (0.5 * sigma2) ** 2) / n)
        assert np.max(np.abs(est - cov)) <= tol

    def test_empirical_mean_converges_at_clt_rate(self):
        mean = np.array([1.0, -2.0, 0.25])
        proc = SignalProcess(mean=mean, cov=0.5 * np.eye(3))
        rng = substream(7)
        n = 20000
        draws = np.array([sample_signal(proc, t, rng) for t in range(n)])
        tol = 4 * np.sqrt(0.5 / n)
        assert np.max(np.abs(draws.mean(axis=0) - mean)) <= tol


class TestSpectralSynthesis:
    def test_lowpass_all_above_cutoff_gives_zero(self, k3):
        s = spectral_decompose(build_laplacian(k3, LaplacianKind.DISCRETE))
        np.testing.assert_allclose(synth_lowpass_mean(s, cutoff=-1.0), np.zeros(3))

    def test_lowpass_single_mode(self, k3):
        s = spectral_decompose(build_laplacian(k3, LaplacianKind.DISCRETE))
        x = synth_lowpass_mean(s, cutoff=1.0)  # only the zero eigenvalue
        np.testing.assert_allclose(x, s.eigenvectors[:, 0], atol=1e-12)

    def test_lowpass_parseval_counts_modes(self, geo100):
        s = spectral_decompose(build_laplacian(geo100, LaplacianKind.NORMALIZED))
        x = synth_lowpass_mean(s, cutoff=1.0)
        n_below = int(np.sum(s.eigenvalues < 1.0))
        assert abs(float(x @ x) - n_below) <= 1e-9

    def test_exp_decay_k3_coefficients(self, k3):
        s = spectral_decompose(build_laplacian(k3, LaplacianKind.DISCRETE))
        u = synth_exp_decay_mean(s, rate=25.0)
        coeff = gft(s, u)
        np.testing.assert_allclose(
            coeff, [1.0, np.exp(-75.0), np.exp(-75.0)], atol=1e-12
        )

    def test_exp_decay_large_rate_leaves_nullspace(self, geo20):
        s = spectral_decompose(build_laplacian(geo20, LaplacianKind.NORMALIZED))
        u = synth_exp_decay_mean(s, rate=1e4)
        np.testing.assert_allclose(u, s.eigenvectors[:, 0], atol=1e-10)

    def test_exp_decay_parseval(self, geo20):
        s = spectral_decompose(build_laplacian(geo20, LaplacianKind.NORMALIZED))
        rate = 25.0
        u = synth_exp_decay_mean(s, rate)
        expect = float(np.sum(np.exp(-2 * rate * s.eigenvalues)))
        assert abs(float(u @ u) - expect) <= 1e-10

    def test_rate_must_be_positive(self, k3):
        s = spectral_decompose(build_laplacian(k3, LaplacianKind.DISCRETE))
        with pytest.raises(ValueError):
            synth_exp_decay_mean(s, rate=0.0)
