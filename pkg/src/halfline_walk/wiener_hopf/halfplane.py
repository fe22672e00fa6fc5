"""Integrals of ``1 / (1 - lambda phi)`` along the second angle.

``a_lam(t1) + i b_lam(t1) = (1 / 2 pi) int_{-pi}^{pi} dt2 / (1 - lambda phi(t1, t2))``
is computed by adaptive quadrature and compared with the closed forms
obtained from the quadratic approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..asymptotics import TailFit, exponent_report, loglog_fit
from ..errors import NumericFailure, OutOfRange
from ..lattice_walk import IncrementDistribution, char_fn, moments, trig_moments
from ..quadrature import QuadratureSpec, integrate_batch, peak_edges
from .characteristic import LineKernel
from .quartic import AbcdSet, abcd

TWO_PI = 2.0 * math.pi
CLOSED_FORM_RTOL = 1e-9


@dataclass(frozen=True)
class HalfPlaneIntegrals:
    theta1: float
    lam: float
    a_num: float
    b_num: float
    a_tilde: float
    b_tilde: float
    arcsin_num: float
    arcsin_closed: float
    error: float = 0.0


def _check_lambda(lam) -> None:
    lam = np.asarray(lam, dtype=float)
    if np.any(~((lam > 0.0) & (lam < 1.0))):
        raise OutOfRange("lambda must lie in (0, 1)")


def phi_lambda(dist: IncrementDistribution, theta1, theta2, lam: float):
    """The quadratic-in-``theta2`` approximation of ``1 - lambda phi``."""
    _check_lambda(lam)
    m = moments(dist).e_x2_sq
    tm = trig_moments(dist, theta1)
    t2 = np.asarray(theta2, dtype=float)
    re = ((1.0 - lam) + lam * tm.one_minus_cos1 + lam * tm.sin_x2 * t2
          + 0.5 * lam * m * t2 ** 2)
    im = -(lam * tm.sin1 + lam * tm.cos_x2 * t2)
    out = re + 1j * im
    return complex(out) if np.ndim(out) == 0 else out


def _peak_geometry(dist: IncrementDistribution, theta1: np.ndarray, lam: np.ndarray):
    """Centre and width of the ``theta2`` peak of ``1 / (1 - lambda phi)``."""
    m = moments(dist).e_x2_sq
    tm = trig_moments(dist, theta1)
    half = 0.5 * m
    a = tm.sin_x2 / half
    b = ((1.0 - lam) + lam * tm.one_minus_cos1) / (lam * half)
    d = tm.sin1 / half
    width = np.clip(np.sqrt(np.hypot(b, d)), 1e-9, math.pi)
    return np.clip(-0.5 * a, -math.pi, math.pi), width


def inner_integrals(dist: IncrementDistribution, theta1, lam, quad: QuadratureSpec = QuadratureSpec(),
                    kernel: LineKernel | None = None):
    """``(1 / 2 pi) int dt2 / (1 - lambda phi(t1, t2))`` for arrays of ``t1``.

    ``lam`` may be a scalar or an array matching ``theta1``. Returns complex
    values and absolute error estimates.
    """
    th = np.atleast_1d(np.asarray(theta1, dtype=float))
    lam_arr = np.broadcast_to(np.asarray(lam, dtype=float), th.shape).astype(float)
    _check_lambda(lam_arr)
    kern = kernel if kernel is not None else LineKernel(dist)
    h = kern.prepare(th)
    center, width = _peak_geometry(dist, th, lam_arr)
    edges = peak_edges(center, width, -math.pi, math.pi)
    scale = 1.0 / np.maximum(1.0 - lam_arr, 1e-300) ** 0.5

    def f(item, t2):
        return 1.0 / (TWO_PI * kern.denominator(h, item, t2, lam_arr[item]))

    vals, errs = integrate_batch(f, edges, quad, scale=scale)
    return vals, errs


def ab_numeric(dist: IncrementDistribution, theta1, lam: float, quad: QuadratureSpec = QuadratureSpec(),
               return_error: bool = False):
    """``(a_num, b_num)``: real and imaginary parts of the ``theta2`` integral."""
    vals, errs = inner_integrals(dist, theta1, lam, quad)
    scalar = np.ndim(theta1) == 0
    a, b = vals.real, vals.imag
    if scalar:
        a, b, errs = float(a[0]), float(b[0]), float(errs[0])
    return (a, b, errs) if return_error else (a, b)


def ab_closed_from_set(s: AbcdSet) -> tuple[float, float]:
    """Closed forms in the normalized coefficients."""
    pref = math.sqrt(2.0) / (s.lam * s.e_x2_sq * math.sqrt(s.k_val))
    j = s.j_total
    return pref * math.sqrt(j), pref * 2.0 * s.g_val / math.sqrt(j)


def ab_closed_bd(dist: IncrementDistribution, theta1, lam):
    """Closed forms rewritten through ``u = 1 - lambda + lambda B`` and ``v = lambda D``."""
    m = moments(dist).e_x2_sq
    tm = trig_moments(dist, theta1)
    b = tm.one_minus_cos1 - tm.sin_x2 ** 2 / (2.0 * m) + tm.cos_x2 ** 2 / (2.0 * m)
    d = tm.sin1 - tm.sin_x2 * tm.cos_x2 / m
    u = (1.0 - lam) + lam * b
    v = lam * d
    r = np.hypot(u, v)
    pref = 1.0 / (2.0 * np.sqrt(lam * m))
    return pref * np.sqrt(u + r) / r, pref * v / (r * np.sqrt(u + r))


def ab_closed(s: AbcdSet, dist: IncrementDistribution) -> tuple[float, float]:
    """``(a_tilde, b_tilde)``, cross-checked against the ``(u, v)`` form."""
    a1, b1 = ab_closed_from_set(s)
    a2, b2 = ab_closed_bd(dist, s.theta1, s.lam)
    scale = max(abs(a1), abs(b1))
    if abs(a1 - a2) > CLOSED_FORM_RTOL * scale or abs(b1 - b2) > CLOSED_FORM_RTOL * scale:
        raise NumericFailure(f"closed forms disagree: ({a1}, {b1}) vs ({a2}, {b2})")
    return a1, float(b1)


def closed_arcsin_argument(dist: IncrementDistribution, theta1, lam):
    """``b_tilde / sqrt(a_tilde^2 + b_tilde^2)`` through ``(u, v)``."""
    a, b = ab_closed_bd(dist, theta1, lam)
    return b / np.hypot(a, b)


def _q(s, lam, c1, c2):
    u = (1.0 - lam) + lam * c1 * s
    v = lam * c2 * s
    return np.sqrt(u * u + v * v + u * np.hypot(u, v))


def limit_arcsin(theta1, lam, alpha, c1, c2):
    """``arcsin(lambda c2 |t|^alpha sgn t / (sqrt 2 Q_lam(|t|^alpha)))`` for signed ``c2``."""
    t = np.asarray(theta1, dtype=float)
    s = np.abs(t) ** alpha
    q = _q(s, lam, c1, c2)
    arg = lam * c2 * s * np.sign(t) / (math.sqrt(2.0) * q)
    return np.arcsin(np.clip(arg, -1.0, 1.0))


def tail_constants(dist: IncrementDistribution) -> TailFit:
    """Small-angle constants: exact for the heavy-tailed law, fitted otherwise."""
    source = "closed_form" if dist.kind == "heavy_tail_x1_product" else "fitted"
    return exponent_report(dist, source=source).fit


def half_plane_integrals(dist: IncrementDistribution, theta1: float, lam: float,
                         quad: QuadratureSpec = QuadratureSpec(),
                         fit: TailFit | None = None) -> HalfPlaneIntegrals:
    """Numerical and closed-form half-plane integrals at a single ``theta1``."""
    a_num, b_num, err = ab_numeric(dist, float(theta1), lam, quad, return_error=True)
    s = abcd(dist, float(theta1), lam)
    a_t, b_t = ab_closed(s, dist)
    fit = fit if fit is not None else tail_constants(dist)
    closed = float(limit_arcsin(theta1, lam, fit.alpha_hat, fit.c1_hat, fit.c2_hat))
    return HalfPlaneIntegrals(theta1=float(theta1), lam=float(lam), a_num=a_num, b_num=b_num,
                              a_tilde=a_t, b_tilde=b_t,
                              arcsin_num=math.asin(b_num / math.hypot(a_num, b_num)),
                              arcsin_closed=closed, error=err)


# ------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class RadiusChoice:
    r0: float
    s0: float
    c_star: float


def _c_star(dist: IncrementDistribution, n: int = 64) -> float:
    t = np.linspace(-math.pi, math.pi, n + 1)
    t1, t2 = np.meshgrid(t, t)
    rr = t1 ** 2 + t2 ** 2
    ok = rr > 0
    one_minus_re = 1.0 - np.real(char_fn(dist, (t1[ok], t2[ok])))
    # the bound lambda (1 - Re phi) >= c_* |t|^2 / 2 must hold down to lambda = 1/2
    return float(np.min(one_minus_re / rr[ok]))


def choose_radius(dist: IncrementDistribution, lam: float = 0.5, n: int = 41,
                  candidates=None) -> RadiusChoice:
    """Largest radius ``r0 <= 0.5`` with ``Re phi_lam >= (c_* / 4) t2^2`` on a test grid,
    and the largest ``s0 <= r0`` on which the quartic has real factors."""
    c_star = _c_star(dist)
    cands = candidates if candidates is not None else np.linspace(0.5, 0.02, 25)
    r0 = float(cands[-1])
    for r in cands:
        t = np.linspace(-r, r, n)
        t1, t2 = np.meshgrid(t, t)
        inside = t1 ** 2 + t2 ** 2 <= r * r
        good = True
        for lmb in (lam, 0.999):
            re = np.real(phi_lambda(dist, t1[inside], t2[inside], lmb))
            if np.any(re < 0.25 * c_star * t2[inside] ** 2 - 1e-15):
                good = False
                break
        if good:
            r0 = float(r)
            break
    s0 = r0
    for s in np.linspace(r0, 0.01, 50):
        grid = np.linspace(s / 50.0, s, 50)
        ok = True
        for th in grid:
            st = abcd(dist, float(th), 0.999)
            if not (4 * st.b_n - st.a_n ** 2 - st.c_n ** 2 > 0 and
                    math.hypot(th, st.a_n / 2.0) <= r0):
                ok = False
                break
        if ok:
            s0 = float(s)
            break
    return RadiusChoice(r0=r0, s0=min(s0, 0.99), c_star=c_star)


def lemma31_constant(dist: IncrementDistribution, lambdas=(0.6, 0.9, 0.99), n: int = 33,
                     radius: float = math.pi) -> dict:
    """Fitted ``C`` in ``|phi_lam / (1 - lambda phi) - 1| <= C (|t1|^dh + |t2|^d)``."""
    mom = moments(dist)
    t = np.linspace(-radius, radius, n)
    t1, t2 = np.meshgrid(t, t)
    sel = (t1 != 0) | (t2 != 0)
    t1, t2 = t1[sel], t2[sel]
    scale = np.abs(t1) ** mom.delta_hat + np.abs(t2) ** mom.delta
    kern = LineKernel(dist)
    out = {}
    for lmb in lambdas:
        approx = phi_lambda(dist, t1, t2, lmb)
        h = kern.prepare(t1)
        exact = kern.denominator(h, np.arange(t1.size), t2, lmb)
        out[float(lmb)] = float(np.max(np.abs(approx / exact - 1.0) / scale))
    return out


def lemma41_constant(dist: IncrementDistribution, lam: float, grid=None,
                     quad: QuadratureSpec = QuadratureSpec(), fit: TailFit | None = None,
                     d0: float | None = None) -> tuple[float, float]:
    """Fit ``|arcsin_num - arcsin_closed| ~ C |t1|^d0``; returns ``(C, d0)``.

    With ``d0`` given, ``C`` is the smallest constant with
    ``gap <= C |t1|^d0`` on the grid, which is the form to compare across
    ``lambda``.
    """
    th = np.geomspace(1e-3, 1e-1, 16) if grid is None else np.asarray(grid, dtype=float)
    fit = fit if fit is not None else tail_constants(dist)
    a, b = ab_numeric(dist, th, lam, quad)
    num = np.arcsin(b / np.hypot(a, b))
    closed = limit_arcsin(th, lam, fit.alpha_hat, fit.c1_hat, fit.c2_hat)
    gap = np.abs(num - closed)
    if d0 is not None:
        return float(np.max(gap / th ** d0)), float(d0)
    if np.all(gap < 1e-14):
        return 0.0, math.inf
    slope, intercept, _ = loglog_fit(th, np.maximum(gap, 1e-300))
    return math.exp(intercept), slope
