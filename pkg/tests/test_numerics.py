import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad as scipy_quad

from halfline_walk.errors import QuadratureNonConvergent
from halfline_walk.quadrature import QuadratureSpec, integrate, integrate_batch
from halfline_walk.special import hurwitz_tail, zeta


@pytest.mark.parametrize("s", [1.1, 1.5, 2.0, 2.5, 2.95, 3.0])
def test_zeta_vs_mpmath(s):
    mp.mp.dps = 30
    assert zeta(s) == pytest.approx(float(mp.zeta(s)), abs=1e-13)


@given(st.floats(1.05, 3.0), st.integers(1, 5000))
def test_hurwitz_tail_vs_mpmath(s, n0):
    mp.mp.dps = 25
    assert hurwitz_tail(s, n0) == pytest.approx(float(mp.zeta(s, n0)), rel=1e-12)


def test_integrate_vs_scipy():
    f = lambda x: np.exp(-x) * np.cos(5 * x) / (1 + x * x)
    ours, err = integrate(f, 0.0, 10.0)
    ref, _ = scipy_quad(lambda x: math.exp(-x) * math.cos(5 * x) / (1 + x * x), 0, 10,
                        epsabs=1e-13, limit=200)
    assert abs(ours.real - ref) < 1e-10 and err < 1e-9


def test_integrate_batch_items():
    ps = np.array([0.5, 1.0, 2.0])
    edges = np.tile(np.array([0.0, 0.5, 1.0]), (3, 1))
    vals, _ = integrate_batch(lambda item, x: x ** ps[item], edges)
    np.testing.assert_allclose(vals.real, 1 / (ps + 1), rtol=1e-12)


def test_integrate_peak():
    eps = 1e-4
    f = lambda x: eps / (x * x + eps * eps)
    val, _ = integrate(f, -1.0, 1.0, points=[0.0])
    assert val.real == pytest.approx(2 * math.atan(1 / eps), rel=1e-9)


def test_panel_budget():
    with pytest.raises(QuadratureNonConvergent):
        integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0.0, 1.0,
                  QuadratureSpec(tol=1e-15, rtol=0.0, max_panels=50))
