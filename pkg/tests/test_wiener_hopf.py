import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad as scipy_quad

from halfline_walk.asymptotics import heavy_tail_constants
from halfline_walk.errors import OutOfRange
from halfline_walk.lattice_walk import heavy_tail, moments, simple_walk, solve_heavy_tail, table
from halfline_walk.montecarlo import SimConfig, simulate_geometric, simulate_ladder
from halfline_walk.wiener_hopf import (
    LineTransform,
    ab_closed,
    ab_closed_bd,
    ab_numeric,
    abcd,
    abcd_from_values,
    choose_radius,
    closed_arcsin_argument,
    closed_form_ratio,
    factorization_residual,
    half_plane_integrals,
    i0_bracket,
    i0_series,
    ladder_transform,
    lemma31_constant,
    lemma41_constant,
    line_survival,
    phi_lambda,
    q_functions,
    quartic_factor,
    ratio_curve,
    survival_factors,
)

ASYM = table([(1, 1, "1/3"), (-2, -1, "1/3"), (1, 0, "1/3")])
HEAVY = heavy_tail(1.5)
C15 = heavy_tail_constants(1.5, solve_heavy_tail(1.5)[0])[0]
RATIO_LAMBDAS = [1 - 2.0 ** -k for k in range(6, 15)]


def _g2_oracle(lam, psi):
    val, _ = scipy_quad(lambda t: 1.0 / (1.0 - lam * psi(t)), -math.pi, math.pi, limit=400,
                        epsabs=1e-13, epsrel=1e-13, points=[0.0])
    return val / (2 * math.pi)


def test_phi_lambda_examples():
    assert phi_lambda(simple_walk(), 0.0, 0.0, 0.7) == pytest.approx(0.3 + 0j, abs=1e-15)
    t = 0.4
    assert phi_lambda(simple_walk(), 0.0, t, 0.9) == pytest.approx(0.1 + 0.9 / 4 * t * t + 0j, abs=1e-15)


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.51, 0.999))
def test_phi_lambda_lower_bound_identity(t1, t2, lam):
    d = ASYM
    s = abcd(d, t1, lam) if t1 != 0 else abcd(d, 1e-9, lam)
    m = moments(d).e_x2_sq
    re = phi_lambda(d, s.theta1, t2, lam).real
    rhs = lam / 2 * m * (t2 + s.a_n / 2) ** 2 + lam / 2 * m * (s.b_n - s.a_n ** 2 / 4)
    assert re == pytest.approx(rhs, rel=1e-10, abs=1e-14)


def test_abcd_at_zero():
    for lam in (0.6, 0.99):
        s = abcd(simple_walk(), 0.0, lam)
        assert s.a_n == s.c_n == s.d_n == 0.0
        assert s.b_n == pytest.approx(2 * (1 - lam) / (lam * 0.5), rel=1e-14)
        assert s.k_val == pytest.approx(16 * s.b_n ** 2, rel=1e-14)


def test_abcd_bridge_and_j():
    assert abcd(simple_walk(), 0.3, 0.9).bridge_residual < 1e-10
    s = abcd(HEAVY, 0.1, 0.99)
    assert abs(s.j2) < s.j1


def test_quartic_examples():
    q = quartic_factor(abcd_from_values(0.1, 1.0, 0.0, 0.0))
    assert q.branch == "degenerate"
    assert (q.a_plus, q.a_minus) == pytest.approx((0.1, 0.1), abs=1e-15)
    assert (q.b_plus, q.b_minus) == pytest.approx((1.0, 1.0), abs=1e-15)
    assert factorization_residual(q) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-6, 4), st.booleans())
def test_quartic_factorization(a, c, d, loge, degenerate):
    b = (a * a + c * c + math.exp(loge)) / 4
    if degenerate:
        d = a * c / 2
    q = quartic_factor(abcd_from_values(a, b, c, d))
    assert factorization_residual(q) < 1e-10 * (1 + b * b + d * d)
    assert q.b_plus * q.b_minus == pytest.approx(b * b + d * d, rel=1e-10)
    assert 4 * q.b_plus > q.a_plus ** 2 and 4 * q.b_minus > q.a_minus ** 2


def test_ab_numeric_at_zero():
    a, b = ab_numeric(simple_walk(), np.array([0.0]), 0.99)
    assert b[0] == pytest.approx(0.0, abs=1e-14)
    target = 1 / math.sqrt(2 * 0.99 * 0.5 * 0.01)
    assert target == pytest.approx(10.05, abs=5e-3)
    assert abs(a[0] - target) < 1.0
    at, bt = ab_closed(abcd(simple_walk(), 0.0, 0.99), simple_walk())
    assert at == pytest.approx(target, rel=1e-12) and bt == 0.0


def test_closed_forms_agree():
    s = abcd(HEAVY, 0.1, 0.999)
    a1, b1 = ab_closed(s, HEAVY)
    a2, b2 = ab_closed_bd(HEAVY, 0.1, 0.999)
    assert a1 == pytest.approx(float(a2), rel=1e-9)
    assert b1 == pytest.approx(float(b2), rel=1e-9)


def test_b_numeric_odd():
    th = np.array([0.05, 0.3])
    _, bp = ab_numeric(ASYM, th, 0.95)
    _, bm = ab_numeric(ASYM, -th, 0.95)
    np.testing.assert_allclose(bp, -bm, rtol=1e-10, atol=1e-13)


def test_q_function_examples():
    q, q1, q2 = q_functions(0.0, 0.9, C15, C15)
    assert q == pytest.approx(math.sqrt(2) * 0.1, rel=1e-14)
    assert q1 == pytest.approx(math.sqrt(2) * 0.1, rel=1e-14)
    s = 3.0
    r = math.hypot(C15, C15)
    lim = math.sqrt(C15 ** 2 + C15 ** 2 + C15 * r) * s
    assert q_functions(s, 1 - 1e-12, C15, C15)[0] == pytest.approx(lim, rel=1e-9)


@given(st.floats(0, 10), st.floats(0.01, 0.9999), st.floats(0.01, 3), st.floats(0.01, 3))
def test_q_brackets(s, lam, c1, c2):
    q, q1, q2 = q_functions(s, lam, c1, c2)
    assert q2 <= q * (1 + 1e-12) and q <= q1 * (1 + 1e-12)


def test_arcsin_argument_bound():
    th = np.geomspace(1e-3, 1e-1, 41)
    for d in (simple_walk(), HEAVY, ASYM, heavy_tail(1.2), heavy_tail(1.8)):
        for lam in (0.6, 0.9, 0.999, 1 - 1e-8):
            assert np.max(np.abs(closed_arcsin_argument(d, th, lam))) <= 1 / math.sqrt(2) + 1e-9


def test_factorization_on_accepted_walks():
    rng = np.random.default_rng(3)
    for d in (simple_walk(), HEAVY, ASYM):
        for _ in range(30):
            s = abcd(d, float(rng.uniform(1e-4, 0.5)), float(rng.uniform(0.5, 0.9999)))
            assert s.bridge_residual < 1e-10
            if 4 * s.b_n - s.a_n ** 2 - s.c_n ** 2 > 0:
                q = quartic_factor(s)
                assert factorization_residual(q) < 1e-10 * (1 + s.b_n ** 2 + s.d_n ** 2)


def test_bounded_gap_grows():
    th = np.geomspace(1e-3, 1e-1, 21)
    for lam in (0.9, 0.99, 0.999):
        a, b = ab_numeric(HEAVY, th, lam)
        at, bt = ab_closed_bd(HEAVY, th, lam)
        assert np.max(np.abs(a - at)) < 10 and np.max(np.abs(b - bt)) < 10
    assert ab_closed_bd(simple_walk(), np.array([1e-3]), 1 - 1e-5)[0][0] > 100


def test_line_survival_oracle():
    assert line_survival(simple_walk(), 0.0) == 1.0
    for lam in (0.5, 0.9, 0.99):
        g2 = _g2_oracle(lam, lambda t: (1 + math.cos(t)) / 2)
        assert line_survival(simple_walk(), lam) == pytest.approx(1 / g2, rel=1e-9)
    g2 = _g2_oracle(0.9, math.cos)
    assert line_survival(HEAVY, 0.9) == pytest.approx(1 / g2, rel=1e-9)
    lam = 1 - 1e-4
    assert line_survival(simple_walk(), lam) / math.sqrt(1 - lam) == pytest.approx(1.0, rel=0.05)
    with pytest.raises(OutOfRange):
        line_survival(simple_walk(), 1.0)


def test_line_survival_matches_monte_carlo():
    est = simulate_geometric(simple_walk(), 0.9, SimConfig(n_paths=200_000, horizon=200, seed=4,
                                                           target="U"))
    assert abs(est.p_hat - line_survival(simple_walk(), 0.9)) <= 3 * est.sigma


def test_ladder_mass():
    total = sum(ladder_transform(simple_walk(), 1, l, 0.9) for l in range(-30, 31))
    assert total == pytest.approx(1 - line_survival(simple_walk(), 0.9), abs=1e-6)


def test_ladder_symmetry():
    for l in (1, 2, 3):
        assert ladder_transform(simple_walk(), 1, l, 0.9) == pytest.approx(
            ladder_transform(simple_walk(), 1, -l, 0.9), abs=1e-12)


def test_ladder_matches_monte_carlo():
    smp = simulate_ladder(simple_walk(), SimConfig(n_paths=200_000, horizon=400, seed=9))
    mean, se = smp.weighted_mean(0.9, 0)
    assert abs(mean - ladder_transform(simple_walk(), 1, 0, 0.9)) <= 3 * se


def test_line_transform_conjugate_symmetry():
    g = LineTransform(ASYM, 0.9)(np.array([0.7, -0.7]))
    assert g[1] == pytest.approx(np.conj(g[0]), abs=1e-14)


def test_survival_factors_simple_symmetry():
    f = survival_factors(simple_walk(), 0.9)
    assert f.p_v_minus == pytest.approx(f.p_v_plus, rel=1e-6)
    est = simulate_geometric(simple_walk(), 0.9, SimConfig(n_paths=200_000, horizon=200, seed=5))
    assert abs(est.p_hat - f.p_v_minus) <= 3 * est.sigma


@pytest.mark.parametrize("dist", [simple_walk(), HEAVY, heavy_tail(1.2), ASYM],
                         ids=["simple", "heavy15", "heavy12", "asym"])
def test_truncation_bound_covers_resummed(dist):
    a = survival_factors(dist, 0.9)
    b = survival_factors(dist, 0.9, None, None)
    bound = a.truncation_bound + b.truncation_bound
    for x, y in ((a.c_lam, b.c_lam), (a.f_inf, b.f_inf), (a.f_zero, b.f_zero)):
        assert abs(math.log(x / y)) <= bound


def test_survival_factor_product_identity():
    lam = 0.9
    f = survival_factors(ASYM, lam, None, None)
    n = 400_000
    est = simulate_geometric(ASYM, lam, SimConfig(n_paths=n, horizon=300, seed=17, target="V_plus"))
    adj = 1 - est.origin_fraction
    lhs = f.p_v_minus * f.p_v_plus / adj
    sig = f.p_v_minus * f.p_v_plus * math.sqrt(est.origin_fraction * adj / n) / adj ** 2
    assert abs(lhs - line_survival(ASYM, lam)) <= 4 * sig + 1e-8


def test_i0_series_examples():
    lo, direct, hi = i0_bracket(0.5, 0.99, 1.5, C15, C15)
    assert lo <= direct <= hi
    assert i0_series(0.5, 0.99, 1.5, C15, C15) == pytest.approx(direct, abs=hi - lo + 1e-12)
    assert abs(i0_series(0.5, 0.99, 1.5, C15, 1e-9)) < 1e-7
    vals = [i0_series(0.5, lam, 1.5, C15, C15) for lam in RATIO_LAMBDAS]
    slope = np.polyfit(np.log(1 - np.array(RATIO_LAMBDAS)), vals, 1)[0]
    assert abs(slope + 1 / 6) <= 1 / 60


def test_ratio_curve_simple_walk_zero():
    rc = ratio_curve(simple_walk(), [0.9, 0.99])
    assert max(abs(v) for v in rc.log_ratio) <= 1e-6


def test_ratio_curve_reflection():
    a = ratio_curve(heavy_tail(1.5), [0.9, 0.99])
    b = ratio_curve(heavy_tail(1.5, mirrored=True), [0.9, 0.99])
    np.testing.assert_allclose(a.log_ratio, -np.array(b.log_ratio), rtol=1e-8, atol=1e-10)


def test_ratio_curve_slope():
    rc = ratio_curve(HEAVY, RATIO_LAMBDAS)
    assert abs(rc.slope_vs_log1mlam + 1 / 6) <= 1 / 60
    res = [survival_factors(HEAVY, lam, None, None).log_ratio for lam in RATIO_LAMBDAS[:3]]
    np.testing.assert_allclose(rc.log_ratio[:3], res, rtol=1e-4)


def test_closed_form_ratio_tracks_numeric():
    rc = ratio_curve(HEAVY, [0.99, 0.999])
    cf = [closed_form_ratio(HEAVY, lam, 0.5) for lam in (0.99, 0.999)]
    np.testing.assert_allclose(cf, rc.log_ratio, rtol=0.1)


def test_lemma31_stable():
    c = lemma31_constant(ASYM)
    vals = list(c.values())
    assert max(vals) / min(vals) < 2.0


@pytest.mark.parametrize("alpha", [1.2, 1.5])
def test_lemma41_stable(alpha):
    # exponent alpha delta / 4 with delta = 1/2; C must saturate as lambda -> 1
    d0 = alpha * 0.5 / 4
    cs = [lemma41_constant(heavy_tail(alpha), lam, d0=d0)[0]
          for lam in (0.999, 0.9999, 0.99999, 1 - 1e-7)]
    assert max(cs) <= 1.2 * cs[0]


def test_half_plane_integrals_consistent():
    h = half_plane_integrals(HEAVY, 0.05, 0.99)
    assert h.arcsin_num == pytest.approx(math.asin(h.b_num / math.hypot(h.a_num, h.b_num)), abs=1e-12)
    assert abs(h.arcsin_num - h.arcsin_closed) < 0.1


def test_choose_radius():
    assert 0 < choose_radius(simple_walk()).s0 <= 0.5
    assert 0 < choose_radius(HEAVY).s0 <= 0.5


def test_lambda_one_refused():
    for f in (lambda: line_survival(HEAVY, 1.0), lambda: ratio_curve(HEAVY, [1.0]),
              lambda: ab_numeric(HEAVY, np.array([0.1]), 1.0)):
        with pytest.raises(OutOfRange):
            f()
