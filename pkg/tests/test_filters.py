"""FIR and ARMA runners, frequency responses, and mean recursions."""

import numpy as np
import pytest

from sgfl import (
    LaplacianKind,
    arma_coeffs,
    arma_init,
    arma_step,
    build_laplacian,
    eval_2d_response,
    eval_response_arma,
    eval_response_fir,
    fir_apply_static,
    fir_coeffs,
    fir_init,
    fir_step_time_varying,
    mean_recursion_arma,
    mean_recursion_fir,
    res_laplacian,
    spectral_decompose,
    steady_state_iters,
)
from sgfl.graphs import res_mask
from sgfl.rng import substream

from oracles import fir_moments_by_enumeration


class TestFilterCoeffs:
    def test_fir_needs_at_least_one_tap(self):
        with pytest.raises(ValueError):
            fir_coeffs([])

    def test_arma_orders_must_match(self):
        with pytest.raises(ValueError):
            arma_coeffs([0.5], [0.1, 0.2])

    def test_poles_and_residues(self):
        c = arma_coeffs([-0.5], [0.5])
        np.testing.assert_allclose(c.poles, [-2.0])
        np.testing.assert_allclose(c.residues, [1.0])

    def test_stability_margin(self):
        c = arma_coeffs([0.25, -0.4], [1.0, 1.0])
        assert c.stability_margin(2.0) == pytest.approx(0.8)
        assert c.is_stable(2.0)
        assert not c.is_stable(3.0)


class TestFirStatic:
    def test_identity_filter(self, k3):
        spec = build_laplacian(k3, LaplacianKind.DISCRETE)
        x = substream(1).standard_normal(3)
        np.testing.assert_array_equal(fir_apply_static(fir_coeffs([1.0]), spec.matrix, x), x)

    def test_single_laplacian_product(self, p2):
        spec = build_laplacian(p2, LaplacianKind.DISCRETE)
        z = fir_apply_static(fir_coeffs([0.0, 1.0]), spec.matrix, np.array([1.0, 0.0]))
        np.testing.assert_allclose(z, [1.0, -1.0])

    def test_matches_spectral_evaluation(self, k3):
        spec = build_laplacian(k3, LaplacianKind.DISCRETE)
        s = spectral_decompose(spec)
        c = fir_coeffs(substream(2).standard_normal(6))
        x = substream(3).standard_normal(3)
        z = fir_apply_static(c, spec.matrix, x)
        gains = np.asarray(eval_response_fir(c, s.eigenvalues))
        z_spec = s.eigenvectors @ (gains * (s.eigenvectors.T @ x))
        assert np.max(np.abs(z - z_spec)) <= 1e-9

    def test_dimension_mismatch(self, k3):
        spec = build_laplacian(k3, LaplacianKind.DISCRETE)
        with pytest.raises(ValueError):
            fir_apply_static(fir_coeffs([1.0]), spec.matrix, np.zeros(5))


class TestFirTimeVarying:
    def test_constant_graph_reduces_to_static(self, geo20):
        spec = build_laplacian(geo20, LaplacianKind.TRANSLATED_NORMALIZED)
        c = fir_coeffs([0.5, -0.25, 0.125, 0.3])
        x = substream(4).standard_normal(20)
        state = fir_init(c, 20)
        for _ in range(c.order + 1):
            state, z = fir_step_time_varying(state, c, spec.matrix, x)
        np.testing.assert_allclose(z, fir_apply_static(c, spec.matrix, x), atol=1e-12)

    def test_first_order_combines_current_and_lagged_sample(self, path4):
        spec = build_laplacian(path4, LaplacianKind.DISCRETE)
        c = fir_coeffs([0.7, -0.2])
        rng = substream(5)
        laps = [res_laplacian(path4, spec, res_mask(path4, rng)) for _ in range(3)]
        xs = [rng.standard_normal(4) for _ in range(3)]
        state = fir_init(c, 4)
        outs = []
        for lap, x in zip(laps, xs):
            state, z = fir_step_time_varying(state, c, lap, x)
            outs.append(z)
        # no products of distinct realizations appear at order one
        np.testing.assert_allclose(outs[1], 0.7 * xs[1] - 0.2 * (laps[1] @ xs[0]))
        np.testing.assert_allclose(outs[2], 0.7 * xs[2] - 0.2 * (laps[2] @ xs[1]))

    def test_ordered_products_of_distinct_realizations(self, path4):
        spec = build_laplacian(path4, LaplacianKind.DISCRETE)
        c = fir_coeffs([0.5, -0.3, 0.2])
        rng = substream(6)
        laps = [res_laplacian(path4, spec, res_mask(path4, rng)) for _ in range(4)]
        xs = [rng.standard_normal(4) for _ in range(4)]
        state = fir_init(c, 4)
        for lap, x in zip(laps, xs):
            state, z = fir_step_time_varying(state, c, lap, x)
        ref = 0.5 * xs[3] - 0.3 * laps[3] @ xs[2] + 0.2 * laps[3] @ laps[2] @ xs[1]
        np.testing.assert_allclose(z, ref, atol=1e-13)

    def test_monte_carlo_mean_matches_enumeration(self, path4):
        # second-order filter over two random steps: the empirical mean of
        # the runner output converges to the enumerated exact expectation
        c = fir_coeffs([0.5, -0.3, 0.2])
        x_mean = np.array([1.0, -0.5, 0.25, 0.75])
        t_end = 2
        exact_mean, exact_cov = fir_moments_by_enumeration(
            4, list(zip(path4.edge_i, path4.edge_j)), path4.weights, path4.probs,
            c.fir_phi, x_mean, np.zeros((4, 4)), t_end,
        )
        spec = build_laplacian(path4, LaplacianKind.DISCRETE)
        rng = substream(7)
        n = 20000
        acc = np.zeros(4)
        for _ in range(n):
            state = fir_init(c, 4)
            for _t in range(t_end):
                lap = res_laplacian(path4, spec, res_mask(path4, rng))
                state, z = fir_step_time_varying(state, c, lap, x_mean)
            acc += z
        emp = acc / n
        sd = np.sqrt(np.maximum(np.diag(exact_cov), 1e-30) / n)
        assert np.all(np.abs(emp - exact_mean) <= 4 * sd + 1e-12)


class TestArmaStep:
    def test_memoryless_when_psi_zero(self, k3):
        spec = build_laplacian(k3, LaplacianKind.DISCRETE)
        c = arma_coeffs([0.0, 0.0], [0.3, 0.5])
        x = substream(8).standard_normal(3)
        state = arma_init(c, 3)
        state, z = arma_step(state, c, spec.matrix, x)
        np.testing.assert_allclose(z, 0.8 * x)

    def test_steady_state_matches_rational_response(self, geo20):
        spec = build_laplacian(geo20, LaplacianKind.TRANSLATED_NORMALIZED)
        s = spectral_decompose(spec)
        c = arma_coeffs([0.4, -0.3], [0.6, 0.2])
        x = substream(9).standard_normal(20)
        state = arma_init(c, 20)
        for _ in range(steady_state_iters(c.order)):
            state, z = arma_step(state, c, spec.matrix, x)
        gains = np.asarray(eval_response_arma(c, s.eigenvalues))
        z_spec = s.eigenvectors @ (gains * (s.eigenvectors.T @ x))
        assert np.max(np.abs(z - np.real(z_spec))) <= 1e-6

    def test_two_trajectories_contract_geometrically(self, geo20):
        g = geo20.with_uniform_p(0.5)
        spec = build_laplacian(g, LaplacianKind.TRANSLATED_NORMALIZED)
        c = arma_coeffs([0.5, -0.25], [0.3, 0.3])
        rate = c.stability_margin(spec.rho)
        rng = substream(10)
        y0 = rng.standard_normal((2, 20))
        sa = arma_init(c, 20, y0=y0)
        sb = arma_init(c, 20)
        d0 = np.linalg.norm(y0)
        x = rng.standard_normal(20)
        for t in range(1, 31):
            lap = res_laplacian(g, spec, res_mask(g, rng))
            sa, _ = arma_step(sa, c, lap, x)
            sb, _ = arma_step(sb, c, lap, x)
            gap = np.linalg.norm(sa.y - sb.y)
            assert gap <= rate**t * d0 + 1e-12


class TestResponses:
    def test_fir_constant(self):
        c = fir_coeffs([1.0])
        assert eval_response_fir(c, 0.37) == pytest.approx(1.0)

    def test_arma_at_zero_frequency(self):
        # single-branch response at lam = 0 equals phi
        c = arma_coeffs([-0.5], [0.25])
        assert complex(eval_response_arma(c, 0.0)) == pytest.approx(0.25)

    def test_arma_pole_hit_rejected(self):
        c = arma_coeffs([0.5], [1.0])
        with pytest.raises(ValueError, match="pole"):
            eval_response_arma(c, 2.0)

    def test_2d_fir_reduces_at_unit_temporal_frequency(self):
        c = fir_coeffs([0.3, -0.2, 0.6])
        lam = np.linspace(-1, 1, 17)
        np.testing.assert_allclose(
            eval_2d_response(c, 1.0, lam), eval_response_fir(c, lam), atol=1e-12
        )

    def test_2d_arma_reduces_at_unit_temporal_frequency(self):
        c = arma_coeffs([0.4, -0.35], [0.5, 0.3])
        lam = np.linspace(-1, 1, 33)
        np.testing.assert_allclose(
            eval_2d_response(c, 1.0, lam), eval_response_arma(c, lam), atol=1e-12
        )

    def test_2d_requires_unit_circle(self):
        with pytest.raises(ValueError, match="unit circle"):
            eval_2d_response(fir_coeffs([1.0]), 1.5, 0.0)

    @pytest.mark.parametrize("variant", ["fir", "arma"])
    def test_sinusoidal_mean_amplitude_matches_2d_response(self, geo20, variant):
        # drive one graph mode with a sinusoid; the steady-state output
        # amplitude equals the joint response magnitude
        spec = build_laplacian(geo20, LaplacianKind.TRANSLATED_NORMALIZED)
        s = spectral_decompose(spec)
        mode = 5
        phi_n, lam_n = s.eigenvectors[:, mode], s.eigenvalues[mode]
        omega = 2 * np.pi / 16
        if variant == "fir":
            c = fir_coeffs([0.4, -0.3, 0.2])
        else:
            c = arma_coeffs([0.45, -0.3], [0.4, 0.25])
        mean_seq = lambda t: np.cos(omega * t) * phi_n
        t_tr = 120
        window = 64
        t_end = t_tr + window
        rec = (
            mean_recursion_fir(c, spec.matrix, mean_seq, t_end)
            if variant == "fir"
            else mean_recursion_arma(c, spec.matrix, mean_seq, t_end)
        )
        coeff = rec[t_tr:] @ phi_n
        ts = np.arange(t_tr + 1, t_end + 1)
        amp = 2.0 * np.abs(np.sum(coeff * np.exp(-1j * omega * ts))) / window
        expected = np.abs(eval_2d_response(c, np.exp(1j * omega), lam_n))
        assert abs(amp - expected) <= 1e-3


class TestMeanRecursions:
    def test_fir_constant_mean_reaches_static_output(self, geo20):
        spec = build_laplacian(geo20, LaplacianKind.TRANSLATED_NORMALIZED)
        c = fir_coeffs([0.5, -0.25, 0.125])
        xbar = substream(11).standard_normal(20)
        traj = mean_recursion_fir(c, spec.matrix, xbar, c.order + 3)
        static = fir_apply_static(c, spec.matrix, xbar)
        np.testing.assert_allclose(traj[-1], static, atol=1e-12)

    def test_fir_zero_mean_stays_zero(self, geo20):
        spec = build_laplacian(geo20, LaplacianKind.DISCRETE)
        traj = mean_recursion_fir(fir_coeffs([1.0, 2.0]), spec.matrix, np.zeros(20), 5)
        assert np.all(traj == 0.0)

    def test_arma_converges_to_dense_solve(self, geo20):
        g = geo20.with_uniform_p(0.5)
        lbar = 0.5 * build_laplacian(g, LaplacianKind.DISCRETE).matrix
        lbar = lbar / np.linalg.norm(lbar, 2)  # normalize spectrum to [0, 1]
        c = arma_coeffs([0.6, -0.5], [0.4, 0.3])
        xbar = substream(12).standard_normal(20)
        traj = mean_recursion_arma(c, lbar, xbar, 400)
        target = np.zeros(20)
        for psi, phi in zip(c.arma_psi, c.arma_phi):
            target += phi * np.linalg.solve(np.eye(20) - psi * lbar, xbar)
        assert np.max(np.abs(traj[-1] - target)) <= 1e-8

    def test_arma_zero_input_zero_state(self, k3):
        spec = build_laplacian(k3, LaplacianKind.DISCRETE)
        c = arma_coeffs([0.1], [0.5])
        traj = mean_recursion_arma(c, spec.matrix, np.zeros(3), 10)
        assert np.all(traj == 0.0)

    def test_arma_linear_convergence_rate(self, geo20):
        spec = build_laplacian(geo20, LaplacianKind.TRANSLATED_NORMALIZED)
        c = arma_coeffs([0.55], [0.5])
        xbar = substream(13).standard_normal(20)
        traj = mean_recursion_arma(c, spec.matrix, xbar, 120)
        target = 0.5 * np.linalg.solve(np.eye(20) - 0.55 * spec.matrix, xbar)
        errs = np.linalg.norm(traj - target, axis=1)
        radius = np.max(np.abs(np.linalg.eigvalsh(spec.matrix)))
        window = (errs > errs[0] * 1e-10) & (errs > 0)
        ts = np.arange(1, 121)[window][5:]
        slope = np.polyfit(ts, np.log(errs[window][5:]), 1)[0]
        assert slope <= np.log(0.55 * radius) + 1e-2

    def test_unstable_recursion_warns(self, geo20):
        spec = build_laplacian(geo20, LaplacianKind.DISCRETE)
        c = arma_coeffs([1.0], [0.5])  # |psi| * ||L|| >> 1
        with pytest.warns(RuntimeWarning, match="unstable"):
            mean_recursion_arma(c, spec.matrix, np.zeros(20), 2)
