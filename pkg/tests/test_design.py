"""Filter design: least-squares fits, Tikhonov closed form, pole/residue
conversion, and coefficient serialization."""

import numpy as np
import pytest

from sgfl import (
    LaplacianKind,
    ResponseTarget,
    arma_from_poles,
    build_laplacian,
    design_arma1_tikhonov,
    design_arma_ls,
    design_fir_ls,
    eval_response_arma,
    eval_response_fir,
    read_coeffs,
    write_coeffs,
)
from sgfl.denoise import tikhonov_closed_form
from sgfl.rng import substream

BAND = (-1.0, 1.0)


def _lowpass(cutoff=0.0, band=BAND):
    return ResponseTarget(kind="ideal_lowpass", lambda_range=band, cutoff=cutoff)


class TestResponseTarget:
    def test_cutoff_outside_band_rejected(self):
        with pytest.raises(ValueError, match="cutoff"):
            ResponseTarget(kind="ideal_lowpass", lambda_range=BAND, cutoff=2.0)

    def test_tabulated_needs_sorted_grid(self):
        with pytest.raises(ValueError):
            ResponseTarget(
                kind="tabulated",
                lambda_range=BAND,
                grid_lambda=np.array([0.5, -0.5]),
                grid_value=np.array([1.0, 0.0]),
            )

    def test_tikhonov_weight_positive(self):
        with pytest.raises(ValueError):
            ResponseTarget(kind="tikhonov", lambda_range=(0, 2), weight=-1.0)


class TestDesignFirLs:
    def test_exact_quadratic_target(self):
        target = ResponseTarget(
            kind="tabulated",
            lambda_range=(0.0, 2.0),
            grid_lambda=np.linspace(0, 2, 64),
            grid_value=np.linspace(0, 2, 64) ** 2,
        )
        c = design_fir_ls(target, order=2)
        np.testing.assert_allclose(c.fir_phi, [0.0, 0.0, 1.0], atol=1e-10)

    def test_constant_target(self):
        target = ResponseTarget(
            kind="tabulated",
            lambda_range=BAND,
            grid_lambda=np.array(BAND),
            grid_value=np.array([1.0, 1.0]),
        )
        for K in (0, 3):
            c = design_fir_ls(target, order=K)
            expect = np.zeros(K + 1)
            expect[0] = 1.0
            np.testing.assert_allclose(c.fir_phi, expect, atol=1e-10)

    def test_residual_matches_pseudoinverse_oracle(self):
        target = _lowpass()
        K, G = 5, 201
        c = design_fir_ls(target, order=K, grid_size=G)
        lam = np.linspace(*BAND, G)
        h = target.evaluate(lam)
        V = np.vander(lam, K + 1, increasing=True)
        phi_pinv = np.linalg.pinv(V) @ h
        res_qr = np.linalg.norm(V @ c.fir_phi - h)
        res_pinv = np.linalg.norm(V @ phi_pinv - h)
        assert abs(res_qr - res_pinv) <= 1e-9

    def test_residual_non_increasing_in_order(self):
        target = _lowpass(cutoff=0.2)
        lam = np.linspace(*BAND, 201)
        h = target.evaluate(lam)
        prev = np.inf
        for K in range(0, 8):
            c = design_fir_ls(target, order=K, grid_size=201)
            res = np.linalg.norm(np.asarray(eval_response_fir(c, lam)) - h)
            assert res <= prev + 1e-12
            prev = res

    def test_grid_too_small_rejected(self):
        with pytest.raises(ValueError):
            design_fir_ls(_lowpass(), order=5, grid_size=3)


class TestTikhonovDesign:
    def test_unit_weight_coefficients(self):
        c = design_arma1_tikhonov(1.0, LaplacianKind.TRANSLATED_NORMALIZED)
        np.testing.assert_allclose(c.arma_psi, [-0.5])
        np.testing.assert_allclose(c.arma_phi, [0.5])

    def test_matches_dense_solve_on_triangle(self, k3):
        w = 1.0
        c = design_arma1_tikhonov(w, LaplacianKind.TRANSLATED_NORMALIZED)
        ln = build_laplacian(k3, LaplacianKind.NORMALIZED)
        lt = build_laplacian(k3, LaplacianKind.TRANSLATED_NORMALIZED)
        x = np.array([1.0, 0.0, 0.0])
        fixed_point = float(c.arma_phi[0]) * np.linalg.solve(
            np.eye(3) - float(c.arma_psi[0]) * lt.matrix, x
        )
        np.testing.assert_allclose(
            fixed_point, tikhonov_closed_form(ln.matrix, w, x), atol=1e-12
        )

    def test_small_weight_approaches_identity(self):
        c = design_arma1_tikhonov(1e-9, LaplacianKind.TRANSLATED_NORMALIZED)
        assert abs(c.arma_psi[0]) <= 1e-9
        assert c.arma_phi[0] == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("w", [0.5, 2.0, 20.0])
    def test_response_identity_on_untranslated_grid(self, w):
        c = design_arma1_tikhonov(w, LaplacianKind.TRANSLATED_NORMALIZED)
        lam = np.linspace(0.0, 2.0, 101)
        resp = eval_response_arma(c, lam - 1.0)
        np.testing.assert_allclose(resp, 1.0 / (1.0 + w * lam), atol=1e-12)

    def test_stable_for_all_weights(self):
        for w in (1e-3, 1.0, 1e3):
            for kind in (
                LaplacianKind.TRANSLATED_NORMALIZED,
                LaplacianKind.SCALED_TRANSLATED_DISCRETE,
            ):
                rho = 1.0 if kind is LaplacianKind.TRANSLATED_NORMALIZED else 0.5
                c = design_arma1_tikhonov(w, kind)
                assert c.stability_margin(rho) < 1.0

    def test_scaled_discrete_response_identity(self):
        # regularizer acts on the unit-spectrum scaled Laplacian
        w = 2.0
        c = design_arma1_tikhonov(w, LaplacianKind.SCALED_TRANSLATED_DISCRETE)
        lam = np.linspace(0.0, 1.0, 51)
        resp = eval_response_arma(c, lam - 0.5)
        np.testing.assert_allclose(resp, 1.0 / (1.0 + w * lam), atol=1e-12)

    def test_rejects_untranslated_kind(self):
        with pytest.raises(ValueError):
            design_arma1_tikhonov(1.0, LaplacianKind.NORMALIZED)

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            design_arma1_tikhonov(0.0, LaplacianKind.TRANSLATED_NORMALIZED)


class TestArmaFromPoles:
    def test_worked_example(self):
        c = arma_from_poles([-2.0], [1.0], rho=1.0)
        np.testing.assert_allclose(c.arma_psi, [-0.5])
        np.testing.assert_allclose(c.arma_phi, [0.5])

    def test_round_trip_random_stable_poles(self):
        rng = substream(20)
        mag = 1.5 + rng.random(4)
        ang = rng.random(4) * 2 * np.pi
        poles = mag * np.exp(1j * ang)
        residues = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        c = arma_from_poles(poles, residues, rho=1.0)
        np.testing.assert_allclose(c.poles, poles, atol=1e-14)
        np.testing.assert_allclose(c.residues, residues, atol=1e-14)

    def test_pole_inside_spectral_ball_rejected(self):
        with pytest.raises(ValueError, match="unstable pole"):
            arma_from_poles([0.5], [1.0], rho=1.0)


class TestDesignArmaLs:
    def test_recovers_known_residues(self):
        # inverse crime: target generated from the same fixed pole set
        radius = 2.0
        K = 3
        angles = np.pi * (2 * np.arange(K) + 1) / K
        poles = radius * np.exp(1j * angles)
        residues = np.array([1.0 + 0.5j, -0.7, 1.0 - 0.5j])
        lam = np.linspace(*BAND, 201)
        h = np.real((residues / (lam[:, None] - poles)).sum(axis=1))
        target = ResponseTarget(
            kind="tabulated", lambda_range=BAND, grid_lambda=lam, grid_value=h
        )
        c = design_arma_ls(target, order=K, pole_radius=radius, rho=1.0)
        np.testing.assert_allclose(np.sort_complex(c.residues),
                                   np.sort_complex(residues), atol=1e-9)

    def test_first_order_matches_tikhonov_pole(self):
        # translated-domain smoother response has its pole at -(1+w)/w;
        # placing the single design pole there reproduces it exactly
        w = 1.0
        radius = (1 + w) / w
        lam = np.linspace(*BAND, 201)
        target = ResponseTarget(
            kind="tabulated", lambda_range=BAND,
            grid_lambda=lam, grid_value=1.0 / (1.0 + w * (lam + 1.0)),
        )
        c = design_arma_ls(target, order=1, pole_radius=radius, rho=1.0)
        resp = eval_response_arma(c, lam)
        assert np.linalg.norm(resp - target.evaluate(lam)) <= 1e-10

    def test_conjugate_residue_pairs(self):
        c = design_arma_ls(_lowpass(), order=4, pole_radius=1.5, rho=1.0)
        poles, residues = c.poles, c.residues
        for k, p in enumerate(poles):
            j = int(np.argmin(np.abs(poles - np.conj(p))))
            assert abs(residues[j] - np.conj(residues[k])) <= 1e-12

    def test_real_response_on_real_grid(self):
        c = design_arma_ls(_lowpass(), order=3, pole_radius=1.5, rho=1.0)
        lam = np.linspace(*BAND, 64)
        assert np.max(np.abs(np.imag(eval_response_arma(c, lam)))) <= 1e-12

    def test_every_design_is_stable(self):
        for K in (1, 2, 5):
            c = design_arma_ls(_lowpass(), order=K, pole_radius=1.5, rho=1.0)
            assert c.is_stable(1.0)

    def test_pole_radius_must_exceed_rho(self):
        with pytest.raises(ValueError):
            design_arma_ls(_lowpass(), order=2, pole_radius=0.9, rho=1.0)


class TestCoeffsSerialization:
    def test_fir_round_trip(self, tmp_path):
        c = design_fir_ls(_lowpass(), order=4)
        path = tmp_path / "fir.coef"
        write_coeffs(c, path, comments=["fir test"])
        d = read_coeffs(path)
        assert d.variant == "fir"
        np.testing.assert_array_equal(d.fir_phi, c.fir_phi)

    def test_complex_arma_round_trip(self, tmp_path):
        c = design_arma_ls(_lowpass(), order=3, pole_radius=1.5, rho=1.0)
        path = tmp_path / "arma.coef"
        write_coeffs(c, path)
        d = read_coeffs(path)
        assert d.variant == "arma"
        np.testing.assert_array_equal(d.arma_psi, c.arma_psi)
        np.testing.assert_array_equal(d.arma_phi, c.arma_phi)

    def test_real_arma_round_trip(self, tmp_path):
        c = design_arma1_tikhonov(0.5, LaplacianKind.TRANSLATED_NORMALIZED)
        path = tmp_path / "tik.coef"
        write_coeffs(c, path)
        d = read_coeffs(path)
        assert not np.iscomplexobj(d.arma_psi)
        np.testing.assert_array_equal(d.arma_psi, c.arma_psi)
        np.testing.assert_array_equal(d.arma_phi, c.arma_phi)
