import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, simpson

from heatcone.asymptotics import (LaplaceProblem, a1_coefficient, a2_coefficient,
                                  a_beta, classify, coefficient_a,
                                  coefficient_a_large_theta, erf_eval,
                                  exterior_formula, g_function, gamma1, gamma2,
                                  global_formula_terms, h_function, h_prime0,
                                  interior_formula, laplace_H_asymptotic,
                                  laplace_H_numeric, one_plus_erf, sigma_of_tau,
                                  sigma_prime, coefficient_set)
from heatcone.errors import InvalidParameter, OmegaTooSmall, ThetaTooSmall
from heatcone.evolution import evaluate
from heatcone.spectral import farfield_constant, psi_extended

LAM = 0.5  # generic eigenvalue for the pure-function tests; sqrt(2 lam) = 1


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

def test_classify_examples():
    cc = classify(10.0, [5.0], [0.0], LAM, 0.2)
    assert cc.theta == pytest.approx(0.5) and cc.region == "interior"
    cc = classify(10.0, [10.0], [0.0], LAM, 0.2)
    assert cc.theta == pytest.approx(1.0) and cc.region == "near_cone"
    cc = classify(4.0, [12.0], [0.0], LAM, 0.2)
    assert cc.theta == pytest.approx(3.0) and cc.region == "exterior"
    cc = classify(5.0, [0.0], [0.0], LAM, 0.2)
    assert cc.theta == 0.0 and cc.alpha is None and cc.region == "interior"
    with pytest.raises(InvalidParameter):
        classify(0.0, [1.0], [0.0], LAM, 0.1)


# ---------------------------------------------------------------------------
# phase substitution machinery
# ---------------------------------------------------------------------------

def test_g_function_values():
    assert g_function(1.0, LAM) == pytest.approx(0.0, abs=1e-15)
    assert g_function(2.0, 0.5) == pytest.approx(-0.5)
    assert g_function(0.5, 0.5) == pytest.approx(0.5)
    with pytest.raises(InvalidParameter):
        g_function(0.0, LAM)


def test_sigma_stationary_point():
    assert sigma_of_tau(0.0, LAM) == pytest.approx(1.0 / np.sqrt(2 * LAM), rel=1e-14)


@settings(max_examples=80, deadline=None)
@given(tau=st.floats(-20.0, 20.0), lam=st.floats(0.05, 10.0))
def test_sigma_round_trip(tau, lam):
    sig = sigma_of_tau(tau, lam)
    assert sig > 0
    back = (np.sqrt(2 * lam) * sig - 1.0) / np.sqrt(2.0 * sig)
    assert back == pytest.approx(tau, abs=1e-12, rel=1e-12)


def test_sigma_monotone():
    vals = [sigma_of_tau(t, LAM) for t in (-1.0, 0.0, 1.0)]
    assert vals[0] < vals[1] < vals[2]


def test_sigma_prime_against_finite_differences():
    for tau in (-3.0, -0.5, 0.0, 0.7, 4.0):
        d = 1e-6
        fd = (sigma_of_tau(tau + d, LAM) - sigma_of_tau(tau - d, LAM)) / (2 * d)
        assert sigma_prime(tau, LAM) == pytest.approx(fd, rel=1e-6)


def test_h_at_zero_matches_closed_form():
    # h(0) = sqrt(2) (2 lam)^{(d-3)/4}
    assert h_function(0.0, 0.5, 3) == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert h_function(0.0, 0.5, 1) == pytest.approx(np.sqrt(2.0), rel=1e-14)
    lam = 1.7
    for d in (1, 2, 3):
        assert h_function(0.0, lam, d) == pytest.approx(
            np.sqrt(2.0) * (2 * lam) ** ((d - 3) / 4.0), rel=1e-13)


def test_h_negative_tail_power():
    # h ~ c_- |tau|^{d-3} as tau -> -inf; d=1 gives slope -2 in log-log
    taus = np.linspace(-40.0, -20.0, 20)
    vals = np.array([h_function(t, LAM, 1) for t in taus])
    slope = np.polyfit(np.log(-taus), np.log(vals), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.05)


def test_h_prime0_against_finite_differences():
    for lam, d in ((0.5, 1), (1.47, 1), (0.8, 3)):
        e = 1e-5
        fd = (h_function(e, lam, d) - h_function(-e, lam, d)) / (2 * e)
        assert h_prime0(lam, d) == pytest.approx(fd, rel=1e-5)


# ---------------------------------------------------------------------------
# Laplace lemma
# ---------------------------------------------------------------------------

def test_laplace_numeric_gaussian():
    p = LaplaceProblem(h=lambda t: 1.0, l=10.0, omega=100.0)
    assert laplace_H_numeric(p) == pytest.approx(np.sqrt(np.pi / 100.0), abs=1e-8)


def test_laplace_numeric_half_gaussian():
    p = LaplaceProblem(h=lambda t: 1.0, l=0.0, omega=100.0)
    assert laplace_H_numeric(p) == pytest.approx(0.5 * np.sqrt(np.pi / 100.0),
                                                 rel=1e-10)


def test_laplace_numeric_second_moment():
    om = 100.0
    p = LaplaceProblem(h=lambda t: t * t, l=10.0, omega=om)
    assert laplace_H_numeric(p) == pytest.approx(np.sqrt(np.pi) / (2 * om**1.5),
                                                 abs=1e-6)


def test_laplace_rejects_small_omega():
    with pytest.raises(OmegaTooSmall):
        laplace_H_numeric(LaplaceProblem(h=lambda t: 1.0, l=0.0, omega=1.0))


def test_laplace_asymptotic_constant_h_exact():
    for l in (-1.0, 0.0, 2.0):
        p = LaplaceProblem(h=lambda t: 1.0, l=l, omega=50.0)
        expected = np.sqrt(np.pi) / (2 * np.sqrt(50.0)) \
            * float(one_plus_erf(l * np.sqrt(50.0)))
        assert laplace_H_asymptotic(p) == pytest.approx(expected, rel=1e-12)


def test_laplace_asymptotic_l0_ladder():
    # h(tau) = 1 + tau at l = 0: numeric/asymptotic -> 1 as omega grows
    devs = []
    for om in (1e2, 1e3, 1e4):
        p = LaplaceProblem(h=lambda t: 1.0 + t, l=0.0, omega=om)
        devs.append(abs(laplace_H_numeric(p) / laplace_H_asymptotic(p) - 1.0))
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-4


def test_laplace_uniform_envelope(well_spectral):
    # |num/asym - 1| <= c / sqrt(omega) over an l-grid, fitted over omega
    lam0 = well_spectral.lambda0
    h = lambda ta: h_function(ta, lam0, 1)
    omegas = [50.0, 100.0, 200.0, 400.0]
    worst = []
    for om in omegas:
        ls = np.array([-2.0, -1.0, -0.1, 0.0, 0.1, 1.0, 2.0]) / np.sqrt(om)
        dev = max(abs(laplace_H_numeric(LaplaceProblem(h, l, om))
                      / laplace_H_asymptotic(LaplaceProblem(h, l, om)) - 1.0)
                  for l in ls)
        worst.append(dev)
    cs = np.array(worst) * np.sqrt(omegas)
    assert np.all(cs < 10.0 * max(cs.min(), 1e-6) + 1e-3)


# ---------------------------------------------------------------------------
# erf
# ---------------------------------------------------------------------------

def test_erf_values():
    assert erf_eval(0.0) == 0.0
    assert abs(erf_eval(10.0) - 1.0) < 1e-14
    assert abs(erf_eval(-10.0) + 1.0) < 1e-14


def test_erf_against_defining_integral():
    for u in np.linspace(-2.4, 2.4, 20):
        val, _ = quad(lambda s: 2.0 / np.sqrt(np.pi) * np.exp(-s * s), 0.0, u)
        assert erf_eval(u) == pytest.approx(val, abs=1e-14)


def test_one_plus_erf_deep_tail():
    # 1 + erf(u) ~ e^{-u^2}/(sqrt(pi) |u|) as u -> -inf
    u = -5.0
    approx = np.exp(-u * u) / (np.sqrt(np.pi) * abs(u))
    assert float(one_plus_erf(u)) == pytest.approx(approx, rel=0.05)
    assert float(one_plus_erf(-25.0)) > 0.0  # no underflow to zero


# ---------------------------------------------------------------------------
# coefficient a
# ---------------------------------------------------------------------------

def test_coefficient_a_zero_potential(zero_potential, well_kernel):
    a = coefficient_a(zero_potential, well_kernel, 3.0, [1.0], [0.0],
                      lambda0=1.4697)
    assert a == 1.0


def test_coefficient_a_large_theta_formula(well):
    assert coefficient_a_large_theta(well, 20.0, [1.0], [0.0]) \
        == pytest.approx(1.1, abs=1e-9)
    assert coefficient_a_large_theta(well, 1e6, [1.0], [0.0]) \
        == pytest.approx(1.0, abs=1e-5)


def test_coefficient_a_rejects_small_theta(well, well_kernel, well_spectral):
    with pytest.raises(ThetaTooSmall):
        coefficient_a(well, well_kernel, 1.0, [1.0], [0.0],
                      lambda0=well_spectral.lambda0)


def test_exterior_crosscheck_with_remainder_allowance(well, well_kernel,
                                                      well_spectral):
    # p/(p0 a) agrees within 5% plus the stated O(t/|x-y|^2) allowance
    t, x = 4.0, 12.0
    p = evaluate(well_kernel, t, x)
    f = exterior_formula(well, well_kernel, well_spectral, t, [x], [0.0])
    assert abs(p / f - 1.0) < 0.05 + 3.0 * t / (x * x)


def test_coefficient_a_positive_and_bounded(well, well_kernel, well_spectral):
    sq = well_spectral.sqrt2lam
    for th in (2.5, 3.0, 4.0, 10.0, 30.0):
        for alpha in (1.0, -1.0):
            a = coefficient_a(well, well_kernel, th, [alpha], [0.0], tol=1e-4,
                              lambda0=well_spectral.lambda0)
            assert 0.0 < a < 50.0


def test_large_theta_remainder_second_order(bump1d, bump_kernel, bump_spectral):
    # C-infinity potential: theta |theta (a-1) - int v| stays bounded
    from heatcone.potentials import line_integral

    li = line_integral(bump1d, [0.0], [1.0])
    cs = []
    for th in (10.0, 20.0, 40.0, 80.0):
        a = coefficient_a(bump1d, bump_kernel, th, [1.0], [0.0], tol=1e-8,
                          lambda0=bump_spectral.lambda0)
        cs.append(th * abs(th * (a - 1.0) - li))
    assert max(cs) < 3.0
    assert max(cs) <= 2.5 * min(cs)


# ---------------------------------------------------------------------------
# matched-formula coefficients
# ---------------------------------------------------------------------------

def test_gamma1_reduces_to_half_farfield_constant(well, well_spectral):
    C = farfield_constant(well, well_spectral, [1.0])
    for th in (0.3, 0.9 * well_spectral.sqrt2lam, well_spectral.sqrt2lam):
        g1 = gamma1(well, well_spectral, th, [1.0], [0.0])
        assert g1 == pytest.approx(C / 2.0, rel=1e-6)


def test_gamma1_continuous_at_cone(well, well_spectral):
    sq = well_spectral.sqrt2lam
    below = gamma1(well, well_spectral, sq - 1e-9, [1.0], [0.0])
    above = gamma1(well, well_spectral, sq + 1e-9, [1.0], [0.0])
    assert below == pytest.approx(above, rel=1e-7)


def test_gamma1_quadrature_refinement(well, well_spectral):
    from heatcone import asymptotics as asy

    th = 1.5 * well_spectral.sqrt2lam
    coarse = gamma1(well, well_spectral, th, [1.0], [0.0])
    nodes_orig = asy._support_nodes
    try:
        asy._support_nodes = lambda v, sd, m=2001: nodes_orig(v, sd, 4001)
        fine = gamma1(well, well_spectral, th, [1.0], [0.0])
    finally:
        asy._support_nodes = nodes_orig
    assert coarse == pytest.approx(fine, abs=1e-6 * max(abs(fine), 1.0))


def test_gamma2_zero_for_zero_potential(zero_potential, well_spectral):
    assert gamma2(zero_potential, well_spectral, 2.0, [1.0], [0.0]) == 0.0


def test_q_ratio_continuity_through_cone(well_spectral):
    from heatcone.asymptotics import _difference_quotient

    lam0 = well_spectral.lambda0
    sq = well_spectral.sqrt2lam
    h = lambda ta: h_function(ta, lam0, 1)
    thetas = np.linspace(sq - 0.01, sq + 0.01, 101)
    qs = np.array([0.5 * _difference_quotient(h, g_function(th, lam0))
                   for th in thetas])
    assert np.max(np.abs(np.diff(qs))) < 1e-3
    # removable singularity: q(sq) = -h'(0)/2
    assert 0.5 * _difference_quotient(h, 0.0) == pytest.approx(
        -h_prime0(lam0, 1) / 2.0, rel=1e-5)


def test_a_beta_consistency_identity(well, well_kernel, well_spectral):
    sq = well_spectral.sqrt2lam
    lam0 = well_spectral.lambda0
    for mult in (1.5, 2.0):
        th = mult * sq
        a = coefficient_a(well, well_kernel, th, [1.0], [0.0], tol=1e-8,
                          lambda0=lam0)
        ab = a_beta(well, well_kernel, well_spectral, th, [1.0], [0.0],
                    tol=1e-4)
        zz = np.linspace(-1.0, 1.0, 2001)
        integ = np.exp(th * zz) * well.evaluate(zz) \
            * well_spectral.psi_grid_at(zz)
        mid = psi_extended(well_spectral, 0.0) * (2.0 / (th**2 - 2 * lam0)) \
            * float(simpson(integ, x=zz))
        assert abs((a - 1.0) - (ab + mid)) < 1e-3 * a


def test_a_beta_horizon_stability(well, well_kernel, well_spectral):
    th = 2.0 * well_spectral.sqrt2lam
    full = a_beta(well, well_kernel, well_spectral, th, [1.0], [0.0], tol=1e-4)
    capped = a_beta(well, well_kernel, well_spectral, th, [1.0], [0.0],
                    tol=1e-4, best_effort=True, max_horizon=8.0)
    assert full == pytest.approx(capped, abs=1e-4)


def test_a_beta_rejects_small_theta(well, well_kernel, well_spectral):
    with pytest.raises(ThetaTooSmall):
        a_beta(well, well_kernel, well_spectral, 0.1, [1.0], [0.0])


def test_identity_exponential_integral(well_spectral):
    theta = 2.0 * well_spectral.sqrt2lam
    lam0 = well_spectral.lambda0
    val, _ = quad(lambda s: np.exp((lam0 - theta**2 / 2.0) * s), 0.0, np.inf)
    assert val == pytest.approx(2.0 / (theta**2 - 2 * lam0), abs=1e-8)


def test_a1_branches_and_continuity(well, well_spectral):
    sq = well_spectral.sqrt2lam
    assert a1_coefficient(well, well_spectral, 0.9 * sq, [1.0], [0.0]) == 0.5
    assert a1_coefficient(well, well_spectral, sq, [1.0], [0.0]) == 0.5
    thetas = np.linspace(sq - 0.005, sq + 0.005, 11)
    vals = [a1_coefficient(well, well_spectral, th, [1.0], [0.0])
            for th in thetas]
    assert np.max(np.abs(np.diff(vals))) < 1e-3
    assert a1_coefficient(well, well_spectral, 2.0 * sq, [1.0], [0.0]) > 0.5


def test_a2_composition(well, well_kernel, well_spectral):
    sq = well_spectral.sqrt2lam
    th = 1.5 * sq
    g2 = gamma2(well, well_spectral, th, [1.0], [0.0])
    ab = a_beta(well, well_kernel, well_spectral, th, [1.0], [0.0],
                tol=1e-4, best_effort=True)
    a2 = a2_coefficient(well, well_kernel, well_spectral, th, [1.0], [0.0])
    assert a2 == pytest.approx(1.0 + g2 + ab, rel=1e-10)


def test_coefficient_set_bundle(well, well_kernel, well_spectral):
    cs = coefficient_set(well, well_kernel, well_spectral,
                         1.5 * well_spectral.sqrt2lam, [1.0], [0.0])
    assert cs.a is not None and cs.a > 0
    assert cs.a2 == pytest.approx(1.0 + cs.gamma2 + cs.a_beta, rel=1e-10)
    cs_in = coefficient_set(well, well_kernel, well_spectral, 0.3, [1.0], [0.0])
    assert cs_in.a is None and cs_in.a1 == 0.5


# ---------------------------------------------------------------------------
# global formula
# ---------------------------------------------------------------------------

def test_global_on_cone_structure(well, well_kernel, well_spectral):
    # erf term vanishes on the cone: first term = e psi psi * (1/2)
    sq = well_spectral.sqrt2lam
    t = 6.0
    x = sq * t
    t1, _ = global_formula_terms(well, well_kernel, well_spectral, t, [x], [0.0])
    expected = 0.5 * interior_formula(well_spectral, t, [x], [0.0])
    assert t1 == pytest.approx(expected, rel=1e-12)


def test_global_deep_interior_matches_interior(well, well_kernel, well_spectral):
    t = 10.0
    x = 0.3 * well_spectral.sqrt2lam * t
    t1, t2 = global_formula_terms(well, well_kernel, well_spectral, t, [x], [0.0])
    f = interior_formula(well_spectral, t, [x], [0.0])
    assert abs((t1 + t2) / f - 1.0) < 1e-3
    assert abs(t2 / t1) < np.exp(-1.0)


def test_global_interior_far_matches_farfield_product(well, well_kernel,
                                                      well_spectral):
    # inside the cone at large |x| the prediction collapses to
    # exp(lam0 t - sqrt(2 lam0)|x|) psi(y) C(xhat)
    t = 30.0
    x = 30.0  # theta = 1.0 < sqrt(2 lam0), |x| = 30
    f = interior_formula(well_spectral, t, [x], [0.0])
    C = farfield_constant(well, well_spectral, [1.0])
    pred = np.exp(well_spectral.lambda0 * t - well_spectral.sqrt2lam * x) \
        * psi_extended(well_spectral, 0.0) * C
    assert f == pytest.approx(pred, rel=0.03)


def test_global_theta_window_guard(well, well_kernel, well_spectral):
    with pytest.raises(InvalidParameter):
        global_formula_terms(well, well_kernel, well_spectral, 0.01, [10.0],
                             [0.0], eps0=0.05)


def test_regime_dominance_near_cone(well, well_kernel, well_spectral):
    # sqrt(t)(theta - sq) = 1: the matched first term dominates the Gaussian one
    sq = well_spectral.sqrt2lam
    t = 16.0
    th = sq + 1.0 / np.sqrt(t)
    t1, t2 = global_formula_terms(well, well_kernel, well_spectral, t,
                                  [th * t], [0.0])
    assert abs(t1 / t2) > 1.0
