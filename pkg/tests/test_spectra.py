import io

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from chiralsqueeze.errors import NonIdealChirality, NonPositiveSpectrum, UnstableDrift, UnstableRegime
from chiralsqueeze.model import EffectiveParams
from chiralsqueeze.spectra import (
    CSV_HEADER,
    build_linear_model,
    closed_form_general,
    default_grid,
    lyapunov_residual,
    lyapunov_steady_state,
    noise_reduction_db,
    oracle_spectrum,
    spectrum_closed_form,
    spectrum_ideal,
    spectrum_numeric_oracle,
    squeezed_frame_check,
    stability,
)
from chiralsqueeze.validation import random_stable_params

REFERENCE_PEAK_S = 0.0452321279389  # the 13.45 dB point, frozen from the quadrature route below

stable_params = st.builds(
    EffectiveParams,
    G_a=st.floats(-4, 4),
    G_b=st.floats(-2, 2),
    epsilon=st.floats(0, 0.98),
    theta=st.floats(0, 2 * np.pi),
    kappa_0=st.floats(0.01, 1),
    kappa_ex=st.floats(0.1, 5),
    gamma_m=st.just(1.0),
).filter(lambda e: stability(e).stable)


def quadrature_spectrum(eff, omega, port=0):
    """Independent route: H(w) = C (-i w - A)^-1 B - J in real quadratures, S = |H_X|^2 summed.

    Valid for theta = 0 (homodyne on X) and vacuum inputs.
    """
    model = build_linear_model(eff)
    A, B = model.drift, model.input_matrix
    n_in = B.shape[1]
    C = np.zeros((2, 6))
    C[0, 2 * port] = C[1, 2 * port + 1] = np.sqrt(eff.kappa_ex)
    J = np.zeros((2, n_in))
    ex = 0 if port == 0 else 4  # a_in_ex and b_in_ex quadratures
    J[0, ex] = J[1, ex + 1] = 1.0
    out = []
    for w in np.atleast_1d(omega):
        H = C @ np.linalg.solve(-1j * w * np.eye(6) - A, B) - J
        out.append(np.sum(np.abs(H[0]) ** 2))
    return np.array(out)


class TestLinearModel:
    def test_decoupled_drift(self):
        eff = EffectiveParams(0.0, 0.0, 0.5, kappa_0=0.1, kappa_ex=0.3, gamma_m=2.0)
        np.testing.assert_allclose(build_linear_model(eff).drift, np.diag([-0.2] * 4 + [-1.0] * 2), atol=1e-15)

    def test_beam_splitter_drift(self):
        A = build_linear_model(EffectiveParams(1.5, 0.0, 0.0)).drift
        block_am, block_ma = A[0:2, 4:6], A[4:6, 0:2]
        np.testing.assert_allclose(block_am, -block_ma.T, atol=1e-15)
        np.testing.assert_allclose(block_am, [[0, 1.5], [-1.5, 0]], atol=1e-15)

    def test_reference_diffusion(self, reference):
        np.testing.assert_allclose(build_linear_model(reference).diffusion, np.diag([2.55] * 4 + [1.0] * 2), atol=1e-14)


class TestStability:
    def test_no_squeezing_decoupled(self):
        report = stability(EffectiveParams(0.0, 0.0, 0.0, kappa_0=0.05, kappa_ex=2.5, gamma_m=1.0))
        assert report.stable
        assert report.max_real_eigenvalue == pytest.approx(-0.5, abs=1e-12)

    def test_no_squeezing_strong_coupling(self):
        # hybridized pair decays at the mean rate -(kappa + gamma_m)/4 once G exceeds |kappa - gamma_m|/4
        report = stability(EffectiveParams(3.0, 1.0, 0.0, kappa_0=0.05, kappa_ex=2.5, gamma_m=1.0))
        assert report.stable
        assert report.max_real_eigenvalue == pytest.approx(-(2.55 + 1.0) / 4, abs=1e-12)

    def test_reference(self, reference):
        report = stability(reference)
        assert report.stable and report.consistent
        assert report.max_real_eigenvalue == pytest.approx(-0.8875, abs=1e-4)

    def test_condition_gates(self):
        report = stability(EffectiveParams(0.1, 0.0, 1.5))
        assert not report.epsilon_condition
        assert not report.stable
        with pytest.raises(UnstableRegime, match=r"\|epsilon\| < 1"):
            spectrum_closed_form(EffectiveParams(0.1, 0.0, 1.5))


class TestClosedForm:
    def test_reference_peak(self, reference):
        result = spectrum_closed_form(reference, [0.0])
        assert result.S_a[0] == pytest.approx(REFERENCE_PEAK_S, rel=1e-5)
        assert result.F_a_db[0] == pytest.approx(13.45, abs=0.005)

    def test_reference_peak_independent(self, reference):
        assert spectrum_closed_form(reference, [0.0]).S_a[0] == pytest.approx(quadrature_spectrum(reference, 0.0)[0], rel=1e-12)

    def test_ideal_output_b(self, reference):
        np.testing.assert_allclose(spectrum_closed_form(reference).S_b, 1.0, atol=1e-13)

    def test_ideal_matches_general_peak(self, reference):
        assert spectrum_ideal(reference, [0.0]).F_a_db[0] == pytest.approx(spectrum_closed_form(reference, [0.0]).F_a_db[0], rel=1e-13)

    def test_ideal_requires_chirality(self):
        with pytest.raises(NonIdealChirality):
            spectrum_ideal(EffectiveParams(2.5, 0.25, 0.95))

    def test_empty_cavity_unitarity(self):
        eff = EffectiveParams(0.0, 0.0, 0.9, kappa_0=0.3, kappa_ex=1.7)
        np.testing.assert_allclose(spectrum_ideal(eff).S_a, 1.0, atol=1e-14)

    @pytest.mark.parametrize("G_b", [0.0, 0.25, 1.3])
    def test_general_matches_quadrature_route(self, reference, G_b):
        eff = reference.replace(G_b=G_b)
        omega = np.linspace(-6, 6, 25)
        S_a, S_b = closed_form_general(eff, omega)
        np.testing.assert_allclose(S_a, quadrature_spectrum(eff, omega, 0), rtol=1e-11)
        np.testing.assert_allclose(S_b, quadrature_spectrum(eff, omega, 1), rtol=1e-11)

    def test_thermal_scaling(self, reference):
        hot = spectrum_closed_form(reference.replace(n_th=0.5), [0.0, 1.0])
        cold = spectrum_closed_form(reference, [0.0, 1.0])
        np.testing.assert_allclose(hot.S_a, 2 * cold.S_a, rtol=1e-14)


class TestOracle:
    def test_reference_grid(self, reference):
        closed = spectrum_closed_form(reference)
        oracle = spectrum_numeric_oracle(reference)
        np.testing.assert_allclose(oracle.S_a, closed.S_a, rtol=1e-10)
        np.testing.assert_allclose(oracle.S_b, closed.S_b, rtol=1e-10)

    def test_orthogonal_quadrature_antisqueezed(self, reference):
        assert np.all(oracle_spectrum(reference, default_grid(), reference.theta + np.pi) >= 1.0)

    @pytest.mark.parametrize("theta_lo", [0.0, 0.7, 2.0, np.pi])
    def test_vacuum_any_quadrature(self, theta_lo):
        eff = EffectiveParams(0.0, 0.0, 0.5, theta=1.1)
        np.testing.assert_allclose(oracle_spectrum(eff, default_grid(), theta_lo), 1.0, atol=1e-13)

    def test_thermal_oracle(self):
        eff = EffectiveParams(1.2, 0.4, 0.6, theta=0.9, n_th=0.3)
        omega = np.linspace(-5, 5, 41)
        closed = spectrum_closed_form(eff, omega)
        np.testing.assert_allclose(spectrum_numeric_oracle(eff, omega).S_a, closed.S_a, rtol=1e-10)

    def test_randomized_sets(self):
        omega = np.linspace(-15, 15, 201)
        for eff in random_stable_params(np.random.default_rng(7), 5):
            np.testing.assert_allclose(
                spectrum_numeric_oracle(eff, omega).S_a, spectrum_closed_form(eff, omega).S_a, rtol=1e-10
            )


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(stable_params, st.floats(-15, 15))
    def test_even_in_frequency(self, eff, w):
        S_a, S_b = closed_form_general(eff, np.array([w, -w]))
        assert S_a[0] == pytest.approx(S_a[1], rel=1e-12)
        assert S_b[0] == pytest.approx(S_b[1], rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(stable_params)
    def test_chirality_swap(self, eff):
        omega = np.linspace(-10, 10, 21)
        S_a, S_b = closed_form_general(eff, omega)
        T_a, T_b = closed_form_general(eff.swapped(), omega)
        np.testing.assert_allclose(T_a, S_b, rtol=1e-12)
        np.testing.assert_allclose(T_b, S_a, rtol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(stable_params)
    def test_uncertainty_product(self, eff):
        omega = np.linspace(-15, 15, 61)
        for mode in ("a", "b"):
            s = oracle_spectrum(eff, omega, eff.theta, mode)
            t = oracle_spectrum(eff, omega, eff.theta + np.pi, mode)
            assert np.all(s * t >= 1 - 1e-10)

    @settings(max_examples=25, deadline=None)
    @given(stable_params)
    def test_passive_at_zero_epsilon(self, eff):
        S_a, S_b = closed_form_general(eff.replace(epsilon=0.0), default_grid())
        assert np.max(np.abs(S_a - 1)) < 1e-12
        assert np.max(np.abs(S_b - 1)) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(stable_params)
    def test_squeezed_frame(self, eff):
        assert squeezed_frame_check(eff) <= 1e-12


class TestLyapunov:
    def test_vacuum(self):
        V = lyapunov_steady_state(build_linear_model(EffectiveParams(0.0, 0.0, 0.3)))
        np.testing.assert_allclose(V, np.eye(6), atol=1e-14)

    def test_thermal(self):
        V = lyapunov_steady_state(build_linear_model(EffectiveParams(0.0, 0.0, 0.3, n_th=0.5)))
        np.testing.assert_allclose(V, 2 * np.eye(6), atol=1e-14)

    def test_reference_against_scipy(self, reference):
        model = build_linear_model(reference)
        V = lyapunov_steady_state(model)
        np.testing.assert_allclose(V, scipy.linalg.solve_continuous_lyapunov(model.drift, -model.diffusion), atol=1e-12)
        assert lyapunov_residual(model, V) <= 1e-10 * np.linalg.norm(model.diffusion)

    def test_reference_squeezed_quadrature(self, reference):
        V = lyapunov_steady_state(build_linear_model(reference))
        assert np.linalg.eigvalsh(V[0:2, 0:2]).min() < 1.0

    def test_unstable(self):
        with pytest.raises(UnstableDrift):
            lyapunov_steady_state(build_linear_model(EffectiveParams(3.0, 0.0, 1.5, kappa_ex=0.1)))


class TestSqueezedFrame:
    def test_no_squeezing(self):
        assert squeezed_frame_check(EffectiveParams(1.0, 0.5, 0.0)) == pytest.approx(0.0, abs=1e-15)

    def test_reference(self, reference):
        assert squeezed_frame_check(reference) <= 1e-12

    def test_balanced_chirality(self):
        G = 2.0
        assert squeezed_frame_check(EffectiveParams(G / np.sqrt(2), G / np.sqrt(2), 0.8, theta=0.4)) <= 1e-12


class TestNoiseReduction:
    @pytest.mark.parametrize("S, F", [(1.0, 0.0), (0.1, 10.0), (0.04523, 13.4458)])
    def test_values(self, S, F):
        assert noise_reduction_db(S) == pytest.approx(F, abs=1e-4)

    def test_no_negative_zero(self):
        assert str(noise_reduction_db(1.0)) == "0.0"

    @pytest.mark.parametrize("S", [0.0, -1.0, np.nan])
    def test_non_positive(self, S):
        with pytest.raises(NonPositiveSpectrum):
            noise_reduction_db(S)


def test_csv_format(reference):
    text = spectrum_closed_form(reference, [-1.0, 0.0, 1.0]).to_csv()
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    fields = lines[2].split(",")
    assert fields[0] == "0" and fields[-1] == "closed_form_general"
    assert float(fields[3]) == pytest.approx(13.45, abs=0.005)
    assert np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, usecols=range(5)).shape == (3, 5)
