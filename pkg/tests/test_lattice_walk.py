import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfline_walk.errors import DivergentMoment, MalformedDistribution, NotNormalized, OutOfRange
from halfline_walk.lattice_walk import (
    char_fn,
    elementary_divisors,
    heavy_tail,
    heavy_tail_cdf,
    moments,
    product,
    sample_increment,
    sample_increments,
    simple_walk,
    solve_heavy_tail,
    table,
    trig_moments,
    unit_drift,
    validate,
)
from halfline_walk.verify import _orbit_closure

# oracle values computed with mpmath at 30 digits, then frozen
C_MINUS_15 = 0.252917235540400601
C_PLUS_15 = 0.660714751383423805
B_HEAVY_005 = 0.00508936665168108138
D_HEAVY_005 = 0.00471047106131636421


def _mp_heavy_bd(alpha, theta):
    mp.mp.dps = 30
    a = mp.mpf(alpha)
    cm = 1 / (mp.zeta(1 + a) + mp.zeta(a))
    z = mp.exp(-1j * mp.mpf(theta))
    li = z * mp.lerchphi(z, 1 + a, 1)
    b = cm * (mp.zeta(1 + a) - li.real) + cm * mp.zeta(a) * (1 - mp.cos(theta))
    d = cm * mp.zeta(a) * mp.sin(theta) + cm * li.imag
    return float(b), float(d)


def test_validate_simple_walk():
    rep = validate(simple_walk())
    assert rep.ok and rep.normalized and rep.mean_zero_x2 and rep.aperiodic and rep.moments_finite


def test_validate_periodic_support():
    q = "1/4"
    rep = validate(table([(2, 0, q), (-2, 0, q), (0, 2, q), (0, -2, q)]))
    assert not rep.aperiodic
    assert any("condition (a)" in m for m in rep.messages)


def test_not_normalized():
    with pytest.raises(NotNormalized):
        table([(1, 0, 0.3), (-1, 0, 0.3), (0, 1, 0.15), (0, -1, 0.15)])


def test_malformed():
    with pytest.raises(MalformedDistribution):
        table([(1, 0, -0.5), (0, 1, 1.5)])
    with pytest.raises(MalformedDistribution):
        heavy_tail(1.5, head_size=0)


def test_mean_condition_flagged():
    rep = validate(table([(0, 1, "1/2"), (1, 0, "1/2")]))
    assert not rep.mean_zero_x2
    assert any("condition (b)" in m for m in rep.messages)


def test_moments_examples():
    m = moments(simple_walk())
    assert m.e_x2 == 0.0 and m.e_x2_sq == pytest.approx(0.5, abs=1e-15)
    assert moments(unit_drift()).e_x2_sq == pytest.approx(1.0, abs=1e-15)
    assert math.isfinite(moments(heavy_tail(1.5), delta=0.4).e_abs_x1_delta)
    with pytest.raises(DivergentMoment):
        moments(heavy_tail(1.5), delta=1.6)


def test_char_fn_examples():
    d = simple_walk()
    assert char_fn(d, (0.0, 0.0)) == pytest.approx(1.0 + 0j, abs=1e-15)
    assert char_fn(d, (math.pi, math.pi)) == pytest.approx(-1.0 + 0j, abs=1e-15)
    assert char_fn(d, (math.pi / 2, 0.0)) == pytest.approx(0.5 + 0j, abs=1e-15)
    assert char_fn(heavy_tail(1.5), (0.0, 0.0)) == pytest.approx(1.0 + 0j, abs=1e-13)


def test_trig_moments_examples():
    t = trig_moments(simple_walk(), 0.0)
    assert (t.cos1, t.sin1, t.sin_x2, t.cos_x2) == (1.0, 0.0, 0.0, 0.0)
    t = trig_moments(simple_walk(), math.pi / 2)
    assert t.cos1 == pytest.approx(0.5, abs=1e-15)
    assert abs(t.sin1) < 1e-15 and t.sin_x2 == 0.0 and t.cos_x2 == 0.0
    t = trig_moments(heavy_tail(1.5), 0.1)
    assert t.sin_x2 == 0.0 and t.cos_x2 == 0.0


def test_solve_heavy_tail():
    cm, cp = solve_heavy_tail(1.5)
    assert cm == pytest.approx(C_MINUS_15, abs=1e-13)
    assert cp == pytest.approx(C_PLUS_15, abs=1e-13)
    z1, z0 = float(mp.zeta(2.5)), float(mp.zeta(1.5))
    assert abs(cm * z1 + cp - 1.0) < 1e-12
    assert abs(-cm * z0 + cp) < 1e-12
    for bad in (1.0, 2.0, 0.5):
        with pytest.raises(OutOfRange):
            solve_heavy_tail(bad)


@pytest.mark.parametrize("alpha", [1.1, 1.37, 1.5, 1.82, 1.95])
def test_solve_heavy_tail_identities(alpha):
    cm, cp = solve_heavy_tail(alpha)
    mp.mp.dps = 30
    assert abs(cm * float(mp.zeta(1 + alpha)) + cp - 1.0) < 1e-12
    assert abs(cp - cm * float(mp.zeta(alpha))) < 1e-12


@pytest.mark.parametrize("theta", [1e-3, 0.05, 0.7, 2.5])
def test_heavy_transform_vs_mpmath(theta):
    b, d = _mp_heavy_bd(1.5, theta)
    t = trig_moments(heavy_tail(1.5), theta)
    assert t.one_minus_cos1 == pytest.approx(b, rel=1e-11, abs=1e-16)
    assert t.sin1 == pytest.approx(d, rel=1e-11, abs=1e-16)


def test_heavy_frozen_profile():
    t = trig_moments(heavy_tail(1.5), 0.05)
    assert t.one_minus_cos1 == pytest.approx(B_HEAVY_005, rel=1e-12)
    assert t.sin1 == pytest.approx(D_HEAVY_005, rel=1e-12)


def test_mirrored_heavy_tail():
    a = trig_moments(heavy_tail(1.5), 0.2)
    b = trig_moments(heavy_tail(1.5, mirrored=True), 0.2)
    assert b.one_minus_cos1 == a.one_minus_cos1 and b.sin1 == -a.sin1
    ht = heavy_tail(1.5, mirrored=True).heavy_tail
    n = np.arange(-5, 6)
    base = heavy_tail_cdf(heavy_tail(1.5).heavy_tail, -n - 1)
    np.testing.assert_allclose(heavy_tail_cdf(ht, n), 1.0 - base, atol=1e-15)


def test_sampler_determinism():
    d = heavy_tail(1.5)
    r1, r2 = np.random.default_rng(5), np.random.default_rng(5)
    assert sample_increment(d, r1) == sample_increment(d, r2)


def test_simple_frequency():
    x1, x2 = sample_increments(simple_walk(), np.random.default_rng(1), 10 ** 6)
    f = np.mean((x1 == 1) & (x2 == 0))
    assert abs(f - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 10 ** 6)


def test_heavy_mean_zero():
    n = 10 ** 6
    x1, _ = sample_increments(heavy_tail(1.5), np.random.default_rng(2), n)
    # truncated-variance proxy: variance of X1 clipped at n^(1/alpha)
    clip = n ** (1 / 1.5)
    proxy = np.var(np.clip(x1, -clip, clip))
    assert abs(x1.mean()) <= 3 * math.sqrt(proxy / n)


def test_heavy_cdf_limits():
    ht = heavy_tail(1.5).heavy_tail
    assert heavy_tail_cdf(ht, np.array([1]))[0] == 1.0
    assert heavy_tail_cdf(ht, np.array([0]))[0] == pytest.approx(1 - ht.c_plus, abs=1e-15)
    v = heavy_tail_cdf(ht, np.array([-10 ** 6, -10 ** 3, -10, -1]))
    assert np.all(np.diff(v) > 0)


_atom = st.tuples(st.integers(-3, 3), st.integers(-3, 3))


@given(st.lists(_atom, min_size=1, max_size=5, unique=True))
def test_aperiodicity_matches_orbit_closure(points):
    assert (elementary_divisors(points) == (1, 1)) == _orbit_closure(points)


def _random_table(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    pts = {(int(a), int(b)) for a, b in rng.integers(-3, 4, (k, 2))}
    pts = sorted(pts)
    w = rng.uniform(0.1, 1.0, len(pts))
    w /= w.sum()
    # mirror to force E X2 = 0
    atoms = [(a, b, p / 2) for (a, b), p in zip(pts, w)] + [(a, -b, p / 2) for (a, b), p in zip(pts, w)]
    return table(atoms)


@given(st.integers(0, 10 ** 6), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_char_fn_bounds_and_conjugation(seed, t1, t2):
    for d in (_random_table(seed), heavy_tail(1.5)):
        v = char_fn(d, (t1, t2))
        assert abs(v) <= 1 + 1e-12
        assert abs(char_fn(d, (-t1, -t2)) - np.conj(v)) <= 1e-12


@given(st.integers(0, 10 ** 6), st.floats(-math.pi, math.pi))
def test_trig_moment_consistency(seed, t1):
    d = _random_table(seed)
    tm = trig_moments(d, t1)
    assert abs(tm.cos1 + 1j * tm.sin1 - char_fn(d, (t1, 0.0))) <= 1e-12
    x1, x2, p = d.joint_arrays()
    assert abs(tm.cos_x2 - float(np.sum(p * np.cos(t1 * x1) * x2))) <= 1e-12


def test_product_constructor():
    d = product([(-1, "1/2"), (1, "1/2")], [(-1, "1/2"), (1, "1/2")])
    assert moments(d).e_x2_sq == pytest.approx(1.0)
    # (+-1, +-1) generates the index-2 sublattice
    assert not validate(d).aperiodic
