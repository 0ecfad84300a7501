"""Tests for the undriven eigensystem, drive expansion, Fano fits, and onsets."""

import numpy as np
import pytest

from duffspec.closedform import dw_response
from duffspec.fock import ModelParams, annihilation, expectation
from duffspec.lindblad import build_superoperator, solve_steady_state_adaptive
from duffspec.perturbation import (
    FanoFitError,
    bw_steady_state,
    fano_fit,
    fano_q,
    onset_scan,
    onset_slope,
    response_series,
    s0_eigenpair,
    s0_eigensystem,
    s0_eigenvalue,
    verify_s0_eigenpair,
)

RATE_SETS = (
    ModelParams(delta=-5.2, chi=1.0, epsilon=0.0, gamma=2.0),
    ModelParams(delta=-1.0, chi=1.0, epsilon=0.0, gamma=0.3),
    ModelParams(delta=-1.0, chi=1.0, epsilon=0.0, gamma=0.01),
)


def extrapolate_to_zero(hs, vals):
    """Polynomial extrapolation of vals(h) to h = 0 (Richardson)."""
    hs = np.asarray(hs, dtype=float)
    scale = hs.max()
    coeffs = np.polyfit(hs / scale, vals, len(hs) - 1)
    return coeffs[-1]


def test_eigenvalue_closed_form():
    params = ModelParams(delta=-5.2, chi=1.0, epsilon=0.0, gamma=2.0)
    assert s0_eigenvalue(2, 1, params) == pytest.approx(-4.0 + 4.4j, abs=1e-14)
    # generic sector (upper, lower) = (n+q, q)
    p = RATE_SETS[1]
    for n in range(4):
        for q in range(3):
            k, l = n + q, q
            expected = complex(
                -0.5 * p.gamma * (k + l),
                -(p.delta * (k - l) + p.chi * (k * (k - 1) - l * (l - 1))),
            )
            assert s0_eigenvalue(n, q, p) == pytest.approx(expected, abs=1e-14)


def test_eigen_residuals_all_low_sectors():
    for params in RATE_SETS:
        for n in range(9):
            for q in range((8 - n) // 2 + 1):
                pair = s0_eigenpair(n, q, params, dim=24)
                assert verify_s0_eigenpair(pair, params) < 1e-9


def test_verify_examples_large_truncations():
    assert verify_s0_eigenpair(s0_eigenpair(1, 0, RATE_SETS[0], dim=20), RATE_SETS[0]) < 1e-9
    assert verify_s0_eigenpair(s0_eigenpair(2, 3, RATE_SETS[1], dim=30), RATE_SETS[1]) < 1e-9


def test_left_right_biorthonormality():
    params = RATE_SETS[1]
    pairs = s0_eigensystem(params, dim=16, n_max=3, q_max=3)
    for i, pi in enumerate(pairs):
        assert np.isclose(np.sum(pi.left * pi.right), 1.0, atol=1e-10)
        for j, pj in enumerate(pairs):
            if j != i:
                assert abs(np.sum(pi.left * pj.right)) < 1e-10


def test_conjugate_sector():
    params = RATE_SETS[0]
    pair = s0_eigenpair(3, 1, params, dim=16)
    conj = s0_eigenpair(3, 1, params, dim=16, conjugate=True)
    assert conj.eigenvalue == pair.eigenvalue.conjugate()
    assert np.array_equal(conj.right, pair.right.conj().T)
    assert verify_s0_eigenpair(conj, params) < 1e-9
    with pytest.raises(ValueError):
        s0_eigenpair(0, 2, params, dim=16, conjugate=True)


def test_sector_bounds_checked():
    with pytest.raises(ValueError):
        s0_eigenpair(8, 3, RATE_SETS[1], dim=10)
    with pytest.raises(ValueError):
        s0_eigenpair(1, 0, RATE_SETS[1], dim=128)


def bigmatrix_10(params):
    d, x, e, g = params.delta, params.chi, params.epsilon, params.gamma
    a = complex(2 * d, -g)
    b = complex(2 * x + 2 * d, -g)
    return 2 * e / (-a) + 8 * e**3 * (4 * x + a) / (a * a * b * a.conjugate())


def bigmatrix_21(params):
    d, x, e, g = params.delta, params.chi, params.epsilon, params.gamma
    a = complex(2 * d, -g)
    b = complex(2 * x + 2 * d, -g)
    return -8 * e**3 / (a * b * a.conjugate())


def test_bw_matrix_elements_match_closed_expressions():
    # the closed expressions are the ladder contributions sqrt(k+1) rho[k+1, k]
    # that enter <a>; their sum reproduces the amplitude series exactly
    for params in (
        ModelParams(delta=-1.0, chi=1.0, epsilon=0.01, gamma=0.01),
        ModelParams(delta=-2.3, chi=1.0, epsilon=0.05, gamma=0.4),
        ModelParams(delta=0.7, chi=0.8, epsilon=0.02, gamma=0.15),
    ):
        rho = bw_steady_state(params, order=3, dim=12)
        assert abs(rho[1, 0] - bigmatrix_10(params)) < 1e-10
        assert abs(np.sqrt(2.0) * rho[2, 1] - bigmatrix_21(params)) < 1e-10
        assert abs(
            (bigmatrix_10(params) + bigmatrix_21(params)) - response_series(params)
        ) < 1e-14


def test_bw_structure_and_vacuum_depletion():
    params = ModelParams(delta=-1.0, chi=1.0, epsilon=0.02, gamma=0.1)
    rho = bw_steady_state(params, order=3)
    assert np.isclose(np.trace(rho).real, 1.0, atol=1e-14)
    assert abs(np.trace(rho).imag) < 1e-14
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    # vacuum population leaves 1 quadratically in the drive
    dep1 = 1.0 - bw_steady_state(params, order=2)[0, 0].real
    params2 = ModelParams(params.delta, params.chi, 2 * params.epsilon, params.gamma)
    dep2 = 1.0 - bw_steady_state(params2, order=2)[0, 0].real
    assert np.isclose(dep2 / dep1, 4.0, rtol=0.05)


def test_bw_against_numerical_steady_state():
    # the order-3 remainder on rho[2, 1] is relatively O(eps^2): ~0.5% at
    # eps = 0.005 and 4x that at eps = 0.01
    rels = []
    for eps in (0.005, 0.01):
        params = ModelParams(delta=-1.0, chi=1.0, epsilon=eps, gamma=0.01)
        rho_bw = bw_steady_state(params, order=3, dim=12)
        rho_num, dim, _ = solve_steady_state_adaptive(params)
        k = min(dim, 12)
        assert np.max(np.abs(rho_bw[:k, :k] - rho_num[:k, :k])) < 1e-3
        rels.append(abs(rho_bw[2, 1] - rho_num[2, 1]) / abs(rho_num[2, 1]))
    assert rels[0] < 0.01
    assert rels[1] < 0.03
    assert 2.5 < rels[1] / rels[0] < 6.0


def test_bw_order_and_input_validation():
    params = ModelParams(delta=-1.0, chi=1.0, epsilon=0.01, gamma=0.1)
    with pytest.raises(ValueError):
        bw_steady_state(params, order=4)
    with pytest.raises(ValueError):
        bw_steady_state(params, order=3, dim=5)
    with pytest.raises(ValueError):
        bw_steady_state(ModelParams(-1.0, 1.0, 0.01, 0.0))


def test_bw_warns_outside_convergence_regime():
    with pytest.warns(RuntimeWarning):
        bw_steady_state(ModelParams(delta=-5.2, chi=1.0, epsilon=3.2, gamma=2.0))


def test_response_series_vs_bw_trace():
    params = ModelParams(delta=-0.7, chi=1.0, epsilon=0.01, gamma=0.2)
    rho = bw_steady_state(params, order=3, dim=12)
    a_bw = expectation(annihilation(12), rho)
    assert abs(a_bw - response_series(params)) < 1e-10


def test_response_series_odd_polynomial_and_linear_limit():
    # the series is c1 eps + c3 eps^3 with no even terms: two evaluations
    # determine (c1, c3) and predict any third drive exactly
    def r(eps):
        return response_series(ModelParams(-0.9, 1.0, eps, 0.25))

    e1, e2 = 0.01, 0.02
    c3 = (r(e2) / e2 - r(e1) / e1) / (e2**2 - e1**2)
    c1 = r(e1) / e1 - c3 * e1**2
    e3 = 0.035
    assert abs(r(e3) - (c1 * e3 + c3 * e3**3)) < 1e-15
    # chi = 0 collapses to the Lorentzian at any drive
    lin = ModelParams(delta=-0.9, chi=0.0, epsilon=1.7, gamma=0.25)
    expected = -lin.epsilon / complex(lin.delta, -lin.gamma / 2)
    assert np.isclose(response_series(lin), expected, atol=1e-14)


def test_response_series_matches_closed_form_taylor():
    delta, chi, gamma = -0.8, 1.0, 0.3
    eps_ladder = 0.02 / 2 ** np.arange(4)
    g = np.array(
        [dw_response(ModelParams(delta, chi, e, gamma)) / e for e in eps_ladder]
    )
    c1 = extrapolate_to_zero(eps_ladder**2, g)
    c3 = extrapolate_to_zero(eps_ladder[:3] ** 2, (g[:3] - c1) / eps_ladder[:3] ** 2)
    a = complex(2 * delta, -gamma)
    c1_series = 2.0 / (-a)
    c3_series = 32.0 * chi / (a * a * complex(2 * chi + 2 * delta, -gamma) * a.conjugate())
    assert abs(c1 - c1_series) < 1e-9 * abs(c1_series)
    assert abs(c3 - c3_series) < 1e-9 * abs(c3_series)


def test_fano_q_values():
    assert fano_q(ModelParams(-1.0, 1.0, 0.0, 1.0)) == pytest.approx(-1.0 - np.sqrt(3.0), abs=1e-12)
    assert fano_q(ModelParams(-1.0, 1.0, 0.0, 0.01)) == pytest.approx(-1.4242489172721262, abs=1e-10)
    # narrow-line limit
    assert fano_q(ModelParams(-1.0, 1.0, 0.0, 1e-9)) == pytest.approx(-np.sqrt(2.0), abs=1e-8)
    with pytest.raises(ValueError):
        fano_q(ModelParams(-1.0, 0.0, 0.0, 0.1))


def synthetic_fano(deltas, bg, amp, center, width, q):
    x = (deltas - center) / width
    return bg + amp * (x - q) ** 2 / (x**2 + 1.0)


def test_fano_fit_recovers_synthetic_line():
    rng = np.random.default_rng(3)
    bg, amp, center, width, q = 1.0, 0.03, -1.0, 0.005, 0.97
    deltas = np.linspace(center - 10 * width, center + 10 * width, 201)
    mags = synthetic_fano(deltas, bg, amp, center, width, q)
    mags += rng.normal(0.0, 1e-3 * (mags.max() - mags.min()), mags.shape)
    fit = fano_fit(deltas, mags)
    assert np.isclose(fit.q, q, rtol=0.02)
    assert np.isclose(fit.width, width, rtol=0.02)
    assert np.isclose(fit.amplitude, amp, rtol=0.05)
    assert np.isclose(fit.background, bg, rtol=0.01)
    assert abs(fit.center - center) < 0.1 * width


def test_fano_fit_canonical_representation():
    # amp f(x; q) and (-amp q^2) f(x; -1/q) + amp (1 + q^2) are the same curve;
    # the fit must return the amp > 0 member for either input
    bg, amp, center, width, q = 0.5, 0.02, 0.0, 0.01, 1.4
    deltas = np.linspace(-0.12, 0.12, 241)
    curve_a = synthetic_fano(deltas, bg, amp, center, width, q)
    curve_b = synthetic_fano(
        deltas, bg + amp * (1 + q**2), -amp * q**2, center, width, -1.0 / q
    )
    assert np.allclose(curve_a, curve_b, atol=1e-15)
    fit = fano_fit(deltas, curve_a)
    assert fit.amplitude > 0
    assert np.isclose(fit.q, q, rtol=1e-4)
    assert np.isclose(fit.width, width, rtol=1e-4)


def test_fano_fit_window_and_validation():
    bg, amp, center, width, q = 1.0, 0.05, -2.0, 0.02, -1.2
    deltas = np.linspace(-2.5, -1.5, 801)
    mags = synthetic_fano(deltas, bg, amp, center, width, q)
    fit = fano_fit(deltas, mags, window=(-2.3, -1.7))
    assert np.isclose(fit.q, q, rtol=1e-6)
    with pytest.raises(ValueError):
        fano_fit(deltas[:30], mags[:30])
    with pytest.raises(ValueError):
        fano_fit(deltas, mags[:-1])
    with pytest.raises(FanoFitError):
        fano_fit(deltas, np.ones_like(deltas))


def test_fano_fit_handles_symmetric_lorentzians():
    deltas = np.linspace(-1.0, 1.0, 301)
    # a Lorentzian dip is the q = 0 member of the family and fits cleanly
    dip = 1.0 - 0.4 / (1.0 + (deltas / 0.05) ** 2)
    fit = fano_fit(deltas, dip)
    assert abs(fit.q) < 1e-6
    assert np.isclose(fit.amplitude, 0.4, rtol=1e-6)
    # a Lorentzian peak needs |q| -> inf and is rejected as degenerate
    peak = 1.0 + 0.4 / (1.0 + (deltas / 0.05) ** 2)
    with pytest.raises(FanoFitError):
        fano_fit(deltas, peak)


def test_onset_scaling_exponents():
    pairs1 = onset_scan(1, (0.004, 0.008, 0.016))
    slope1 = onset_slope(pairs1)
    assert abs(slope1 - 1.0) < 0.1
    pairs2 = onset_scan(2, (0.004, 0.008, 0.016))
    slope2 = onset_slope(pairs2)
    assert abs(slope2 - 0.5) < 0.1
    # single-photon onset tracks the linewidth scale itself
    for gamma, eps in pairs1:
        assert 0.1 * gamma < eps < 10.0 * gamma


def test_onset_validation():
    with pytest.raises(ValueError):
        onset_scan(0, (0.01,))
    with pytest.raises(ValueError):
        onset_scan(1, (0.5,))
    with pytest.raises(ValueError):
        onset_slope([(0.01, 0.02)])
