import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfline_walk.asymptotics import (
    ThetaProfile,
    bd_profile,
    beta_from_constants,
    default_grid,
    exponent_report,
    fit_tail,
    heavy_tail_constants,
    loglog_fit,
    signed_beta,
)
from halfline_walk.errors import InsufficientData, OutOfRange
from halfline_walk.lattice_walk import heavy_tail, simple_walk, solve_heavy_tail, unit_drift

# c_minus pi / (2 Gamma(5/2) cos(pi/4)) via mpmath; both constants coincide at alpha = 1.5
C_HEAVY_15 = 0.42264632916471767


def test_simple_profile():
    g = default_grid()
    p = bd_profile(simple_walk(), g)
    np.testing.assert_allclose(p.b_prof, np.sin(g / 2) ** 2, rtol=1e-13)
    assert np.all(p.d_prof == 0)
    z = bd_profile(simple_walk(), np.array([0.0]))
    assert z.b_prof[0] == 0 and z.d_prof[0] == 0


def test_heavy_profile_leading_term():
    cm, _ = solve_heavy_tail(1.5)
    c1, c2 = heavy_tail_constants(1.5, cm)
    p = bd_profile(heavy_tail(1.5), np.array([0.05]))
    rel = abs(p.b_prof[0] / (c1 * 0.05 ** 1.5) - 1)
    assert rel <= 0.05 ** 0.5
    rel = abs(p.d_prof[0] / (c2 * 0.05 ** 1.5) - 1)
    assert rel <= 0.05 ** 0.5


def test_heavy_constants():
    cm, _ = solve_heavy_tail(1.5)
    c1, c2 = heavy_tail_constants(1.5, cm)
    assert c1 == pytest.approx(c2, rel=1e-14)
    assert c1 == pytest.approx(C_HEAVY_15, rel=1e-13)
    assert beta_from_constants(1.5, c1, c2) == pytest.approx(1 / 12, abs=1e-12)
    assert heavy_tail_constants(1.0 + 1e-9, cm)[1] > 1e7


def test_beta_examples():
    assert beta_from_constants(2, 0.25, 0) == 0.0
    assert beta_from_constants(1, 0, 1) == pytest.approx(0.25, abs=1e-15)
    assert beta_from_constants(1.5, 0.4226, 0.4226) == pytest.approx(1 / 12, abs=1e-10)
    with pytest.raises(OutOfRange):
        beta_from_constants(2.5, 1, 1)
    with pytest.raises(OutOfRange):
        beta_from_constants(1.5, 0, 0)


def test_fit_synthetic():
    g = default_grid()
    fit = fit_tail(ThetaProfile(g, 0.3 * g ** 1.7, 0.1 * g ** 1.7))
    assert fit.alpha_hat == pytest.approx(1.7, abs=1e-3)
    assert fit.c1_hat == pytest.approx(0.3, abs=1e-3)
    assert fit.c2_hat == pytest.approx(0.1, abs=1e-3)


def test_fit_simple_walk():
    fit = fit_tail(bd_profile(simple_walk()))
    assert fit.alpha_hat == pytest.approx(2, abs=1e-3)
    assert fit.c1_hat == pytest.approx(0.25, abs=1e-3)
    assert fit.c2_hat == 0.0


def test_fit_unit_drift():
    fit = fit_tail(bd_profile(unit_drift()))
    assert fit.c1_hat == 0.0
    assert fit.alpha_hat == pytest.approx(1, abs=1e-3)
    assert fit.c2_hat == pytest.approx(1, abs=1e-3)


@pytest.mark.parametrize("dist,target", [(simple_walk(), 0.25), (heavy_tail(1.5), 1 / 6),
                                         (unit_drift(), 0.0)])
def test_exponent_report(dist, target):
    tol = 5e-3 if dist.kind == "heavy_tail_x1_product" else 1e-3
    assert exponent_report(dist).survival_exponent == pytest.approx(target, abs=tol)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_heavy_beta_consistency(alpha):
    target = (2 - alpha) / (4 * alpha)
    assert exponent_report(heavy_tail(alpha)).beta == pytest.approx(target, abs=5e-3)
    assert exponent_report(heavy_tail(alpha), source="closed_form").beta == pytest.approx(target, abs=1e-12)


def test_mirrored_heavy_exponent():
    rep = exponent_report(heavy_tail(1.5, mirrored=True))
    assert rep.fit.reflected
    assert rep.survival_exponent == pytest.approx(1 / 3, abs=5e-3)
    assert signed_beta(rep.fit) == pytest.approx(-1 / 12, abs=5e-3)


def test_loglog_examples():
    xs = np.geomspace(1, 1e4, 20)
    assert loglog_fit(xs, 3 * xs ** -0.25)[0] == pytest.approx(-0.25, abs=1e-14)
    assert loglog_fit(xs, np.full(20, 2.0))[0] == pytest.approx(0.0, abs=1e-14)
    noise = 1 + 0.01 * np.random.default_rng(0).standard_normal(20)
    assert abs(loglog_fit(xs, xs ** (-1 / 6) * noise)[0] + 1 / 6) < 0.01
    with pytest.raises(InsufficientData):
        loglog_fit(xs[:3], xs[:3])


_const = st.floats(0.0, 5.0)


@given(st.floats(0.05, 2.0), _const, _const)
def test_beta_bound(alpha, c1, c2):
    if c1 + c2 <= 0:
        return
    b = beta_from_constants(alpha, c1, c2)
    assert -1e-15 <= b <= 1 / (4 * alpha) + 1e-15
    if c1 > 1e-8 * c2 and c2 > 0:
        assert b < 1 / (4 * alpha)


@given(st.floats(0.05, 2.0), st.floats(1e-3, 5.0), st.floats(1e-3, 5.0), st.floats(1e-3, 1e3))
def test_beta_scale_invariance(alpha, c1, c2, t):
    assert beta_from_constants(alpha, t * c1, t * c2) == pytest.approx(
        beta_from_constants(alpha, c1, c2), abs=1e-13)


@given(st.floats(1.05, 1.95), st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_reflection_antisymmetry(alpha, c1, c2):
    g = default_grid()
    f1 = fit_tail(ThetaProfile(g, c1 * g ** alpha, c2 * g ** alpha))
    f2 = fit_tail(ThetaProfile(g, c1 * g ** alpha, -c2 * g ** alpha))
    assert f2.reflected and not f1.reflected
    assert f2.c2_hat == pytest.approx(-f1.c2_hat, rel=1e-6)
    assert f2.alpha_hat == pytest.approx(f1.alpha_hat, abs=1e-9)
    assert f2.c1_hat == pytest.approx(f1.c1_hat, rel=1e-9)


def test_reflection_on_heavy_profile():
    p = bd_profile(heavy_tail(1.5))
    f1 = fit_tail(p)
    f2 = fit_tail(ThetaProfile(p.grid, p.b_prof, -p.d_prof))
    assert f2.c2_hat == pytest.approx(-f1.c2_hat, rel=1e-9)
    assert math.isclose(f1.alpha_hat, f2.alpha_hat, abs_tol=1e-9)
