"""The log-ratio ``log P0(T < tau_{V-}) - log P0(T < tau_{V+})`` as ``lambda -> 1``.

In the limit of large ``L`` the ratio's logarithm is

    (1 / 2 pi) int_{-pi}^{pi} cot(t / 2) arcsin(b / sqrt(a^2 + b^2)) dt,

and splits as ``I0 + I1 + I4``: ``I0`` carries the small-angle model
``arcsin(lambda c2 |t|^alpha sgn t / (sqrt 2 Q_lam(|t|^alpha)))`` on
``[-s0, s0]``, ``I1`` the model error there and ``I4`` the rest of the circle.
``I0`` grows like ``-2 beta log(1 - lambda)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..asymptotics import TailFit, loglog_fit
from ..errors import KernelNotConverged, NumericFailure, OutOfRange, SeriesNotConverged
from ..lattice_walk import IncrementDistribution
from ..quadrature import QuadratureSpec, integrate_batch
from .halfplane import choose_radius, closed_arcsin_argument, limit_arcsin, tail_constants
from .ladder import GEOMETRIC_LEVELS, _transform, angle_cutoff

METHODS = ("arcsin_integral", "direct_kernel", "series")
KERNEL_GAP = 0.5
SERIES_RTOL = 1e-10
BRACKET_TOL = 1e-9


@dataclass(frozen=True)
class RatioCurve:
    lambdas: list
    log_ratio: list
    i0_vals: list
    i1_vals: list
    i4_vals: list
    slope_vs_log1mlam: float
    method: str


# ------------------------------------------------------------ Q functions

def _rho(c1, c2):
    return math.hypot(c1, c2)


def bracket_coefficients(lam: float, c1: float, c2: float, which: int) -> tuple[float, float, float]:
    """``(a, b, c)`` with ``Q^(which)(s)^2 = a s^2 + b s + c``."""
    rho = _rho(c1, c2)
    a = lam * lam * (c1 * c1 + c2 * c2 + c1 * rho)
    if which == 1:
        return a, (1.0 - lam) * lam * (3.0 * c1 + rho), 2.0 * (1.0 - lam) ** 2
    if which == 2:
        return (a, (1.0 - lam) * lam * (2.0 * c1 + rho + c1 * c1 / rho),
                (1.0 - lam) ** 2 * (1.0 + c1 / rho))
    raise OutOfRange("which must be 1 or 2")


def q_functions(s, lam: float, c1: float, c2: float):
    """``(Q, Q1, Q2)`` at ``s``; ``Q2 <= Q <= Q1`` is checked pointwise."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise OutOfRange("s must be non-negative")
    if not 0.0 < lam < 1.0:
        raise OutOfRange("lambda must lie in (0, 1)")
    if not (c1 > 0 and c2 > 0):
        raise OutOfRange("c1 and c2 must be positive")
    u = (1.0 - lam) + lam * c1 * s_arr
    v = lam * c2 * s_arr
    q = np.sqrt(u * u + v * v + u * np.hypot(u, v))
    out = [q]
    for which in (1, 2):
        a, b, c = bracket_coefficients(lam, c1, c2, which)
        out.append(np.sqrt(a * s_arr * s_arr + b * s_arr + c))
    q, q1, q2 = out
    scale = 1e-12 * np.maximum(q1, 1e-300)
    if np.any(q2 > q + scale) or np.any(q > q1 + scale):
        raise NumericFailure("bracket Q2 <= Q <= Q1 violated")
    if q.ndim == 0:
        return float(q), float(q1), float(q2)
    return q, q1, q2


# ------------------------------------------------------------- I0 series

def _arcsin_coefficients(n_max: int) -> np.ndarray:
    """``(2n-1)!! / (2n)!! / (2n + 1)`` for ``n = 0..n_max``."""
    n = np.arange(n_max + 1)
    ratio = np.ones(n_max + 1)
    for k in range(1, n_max + 1):
        ratio[k] = ratio[k - 1] * (2 * k - 1) / (2 * k)
    return ratio / (2 * n + 1)


def _geometric_edges(top: float) -> np.ndarray:
    return np.concatenate([[0.0], top * 2.0 ** -np.arange(60, -1, -1)])


def _normalized_moments(a: float, b: float, c: float, top: float, n_max: int,
                        quad: QuadratureSpec) -> np.ndarray:
    """``J_n = a^(n + 1/2) int_0^top s^(2n) / q^(n + 1/2) ds`` by the recursion.

    ``J_0`` is the logarithmic antiderivative and
    ``J_n = J_{n-1} - rho_top^(n - 1/2) / (2n - 1) - (b / 2 sqrt a) N_n``
    with ``rho = a s^2 / q`` and ``N_n = int_0^top rho^n / (s sqrt q) ds``.
    """
    # q > 0 on [0, top] is all the recursion needs; a perfect square is allowed
    if not (a > 0.0 and c > 0.0 and b >= 0.0):
        raise OutOfRange("need a > 0, c > 0 and b >= 0")
    q = lambda s: a * s * s + b * s + c
    ra = math.sqrt(a)
    j = np.empty(n_max + 1)
    j[0] = math.log((2.0 * a * top + b + 2.0 * math.sqrt(a * q(top))) / (b + 2.0 * math.sqrt(a * c)))
    if n_max == 0:
        return j
    ns = np.arange(1, n_max + 1)
    edges = np.tile(_geometric_edges(top), (n_max, 1))

    def f(item, s):
        qs = q(s)
        rho = a * s * s / qs
        return rho ** ns[item] / (np.maximum(s, 1e-300) * np.sqrt(qs))

    nn, _ = integrate_batch(f, edges, QuadratureSpec(tol=1e-14, rtol=1e-13, max_panels=quad.max_panels,
                                                      order=quad.order))
    rho_top = a * top * top / q(top)
    for k in ns:
        j[k] = j[k - 1] - rho_top ** (k - 0.5) / (2 * k - 1) - b / (2.0 * ra) * nn[k - 1].real
    return j


def i0_bracket(s0: float, lam: float, alpha: float, c1: float, c2: float, n_max: int = 64,
               quad: QuadratureSpec = QuadratureSpec()) -> tuple[float, float, float]:
    """``(lower, direct, upper)``: the series with ``Q1`` and ``Q2`` around the direct value."""
    if not 0.0 < s0 < 1.0:
        raise OutOfRange("s0 must lie in (0, 1)")
    if not 0.5 < lam < 1.0:
        raise OutOfRange("lambda must lie in (1/2, 1)")
    if not (c1 > 0 and c2 > 0):
        raise OutOfRange("c1 and c2 must be positive")
    if n_max < 8:
        raise OutOfRange("n_max must be at least 8")
    top = s0 ** alpha
    coefs = _arcsin_coefficients(n_max)
    n = np.arange(n_max + 1)
    sums = []
    for which in (1, 2):
        a, b, c = bracket_coefficients(lam, c1, c2, which)
        t = lam * c2 / (math.sqrt(2.0) * math.sqrt(a))
        terms = coefs * t ** (2 * n + 1) * _normalized_moments(a, b, c, top, n_max, quad)
        total = float(terms.sum())
        if abs(terms[-1]) > SERIES_RTOL * abs(total):
            raise SeriesNotConverged(f"term {n_max} is {terms[-1]:.3g} of a sum {total:.3g}")
        sums.append(2.0 / (alpha * math.pi) * total)
    direct = _i0_direct(top, lam, alpha, c1, c2, quad)
    lower, upper = sums
    tol = BRACKET_TOL * (1.0 + abs(direct))
    if not lower - tol <= direct <= upper + tol:
        raise NumericFailure(f"direct I0 {direct} outside the series bracket [{lower}, {upper}]")
    return lower, direct, upper


def _i0_direct(top, lam, alpha, c1, c2, quad):
    def f(_, s):
        u = (1.0 - lam) + lam * c1 * s
        v = lam * c2 * s
        q = np.sqrt(u * u + v * v + u * np.hypot(u, v))
        arg = np.arcsin(np.clip(lam * c2 * s / (math.sqrt(2.0) * q), -1.0, 1.0))
        small = s < 1e-300
        return np.where(small, lam * c2 / (2.0 * (1.0 - lam)), arg / np.where(small, 1.0, s))

    val, _ = integrate_batch(f, _geometric_edges(top)[None, :], quad)
    return 2.0 / (alpha * math.pi) * float(val[0].real)


def i0_series(s0: float, lam: float, alpha: float, c1: float, c2: float, n_max: int = 64,
              quad: QuadratureSpec = QuadratureSpec()) -> float:
    """``I0(s0, lambda) = (1 / pi) int_{-s0}^{s0} (1 / t) arcsin(...) dt``.

    The direct quadrature is returned after checking that it lies between the
    ``Q1`` and ``Q2`` series evaluations.
    """
    return i0_bracket(s0, lam, alpha, c1, c2, n_max, quad)[1]


# ------------------------------------------------------------ ratio curve

def _cot_half(t):
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, 1.0 / np.tan(0.5 * safe), 0.0)


def _numeric_arcsin(tr, t):
    return np.angle(tr(t))


def _decomposition(tr, s0, fit: TailFit, quad):
    """``(I1, I4)`` for one ``lambda`` with signed ``c2``."""
    lam = tr.lam
    c2 = fit.c2_hat

    def f(item, t):
        num = _numeric_arcsin(tr, t)
        model = limit_arcsin(t, lam, fit.alpha_hat, fit.c1_hat, c2)
        inner = _cot_half(t) * num - 2.0 * model / np.where(t > 0, t, 1.0)
        outer = _cot_half(t) * num
        return np.where(item == 0, inner, outer) / math.pi

    # below the cutoff both terms are O(ANGLE_FLOOR) in total
    low = min(max(angle_cutoff(tr), s0 * 2.0 ** -GEOMETRIC_LEVELS), 1e-3 * s0)
    first = np.geomspace(low, s0, 33)
    second = np.linspace(s0, math.pi, first.size)
    vals, _ = integrate_batch(f, np.vstack([first, second]), quad)
    return float(vals[0].real), float(vals[1].real)


def _direct_kernel(tr, L, quad):
    def f(_, t):
        kern = _cot_half(t) * (1.0 - np.cos(L * t)) + np.sin(L * t)
        return kern * _numeric_arcsin(tr, t) / math.pi

    geo = math.pi * 2.0 ** -np.arange(GEOMETRIC_LEVELS, 0, -1)
    uni = np.linspace(0.0, math.pi, 2 * int(L) + 1)[1:]
    edges = np.unique(np.concatenate([[0.0], geo, uni]))
    val, _ = integrate_batch(f, edges[None, :], quad)
    return float(val[0].real)


def closed_form_ratio(dist: IncrementDistribution, lam: float, s0: float,
                      quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Limit log-ratio with the closed-form arcsin argument on ``(0, s0]`` and
    quadrature beyond."""
    tr = _transform(dist, lam, quad)

    def f(item, t):
        inner = _cot_half(t) * np.arcsin(np.clip(closed_arcsin_argument(dist, t, lam), -1.0, 1.0))
        outer = _cot_half(t) * _numeric_arcsin(tr, t)
        return np.where(item == 0, inner, outer) / math.pi

    geo = s0 * 2.0 ** -np.arange(GEOMETRIC_LEVELS, -1, -1)
    first = np.concatenate([[0.0], geo])
    second = np.linspace(s0, math.pi, first.size)
    vals, _ = integrate_batch(f, np.vstack([first, second]), quad)
    return float(vals.real.sum())


def _slope(lambdas, log_ratio) -> float:
    x = 1.0 - np.asarray(lambdas, dtype=float)
    y = np.asarray(log_ratio, dtype=float)
    if x.size >= 8:
        return loglog_fit(x, np.exp(y))[0]
    if x.size < 2:
        return math.nan
    return float(np.polyfit(np.log(x), y, 1)[0])


def ratio_curve(dist: IncrementDistribution, lambdas, s0: float | None = None, L: int = 1000,
                quad: QuadratureSpec = QuadratureSpec(), method: str = "arcsin_integral",
                fit: TailFit | None = None, n_max: int = 64) -> RatioCurve:
    """Estimate ``lim_L Re C_L(lambda)`` on a grid of ``lambda``.

    ``arcsin_integral`` sums ``I0 + I1 + I4``; ``series`` reports the
    small-angle carrier ``I0`` alone, evaluated through the bracketing series;
    ``direct_kernel`` integrates the finite-``L`` kernel and is checked
    against the arcsin integral.
    """
    if method not in METHODS:
        raise OutOfRange(f"unknown method {method!r}; choose from {METHODS}")
    lams = [float(v) for v in lambdas]
    if any(not 0.5 < v < 1.0 for v in lams):
        raise OutOfRange("every lambda must lie in (1/2, 1)")
    if method == "direct_kernel" and L < 1000:
        raise OutOfRange("the direct kernel needs L >= 1000")
    if s0 is None:
        s0 = choose_radius(dist).s0
    fit = fit if fit is not None else tail_constants(dist)
    c2 = abs(fit.c2_hat)
    sign = -1.0 if fit.reflected else 1.0
    out, i0s, i1s, i4s = [], [], [], []
    for lam in lams:
        tr = _transform(dist, lam, quad)
        if c2 > 0 and fit.c1_hat > 0:
            lower, direct, upper = i0_bracket(s0, lam, fit.alpha_hat, fit.c1_hat, c2, n_max, quad)
        elif c2 > 0:
            direct = _i0_direct(s0 ** fit.alpha_hat, lam, fit.alpha_hat, 0.0, c2, quad)
            lower = upper = direct
        else:
            lower = direct = upper = 0.0
        i0 = sign * direct
        i1, i4 = _decomposition(tr, s0, fit, quad)
        limit = i0 + i1 + i4
        i0s.append(i0)
        i1s.append(i1)
        i4s.append(i4)
        if method == "arcsin_integral":
            out.append(limit)
        elif method == "series":
            out.append(sign * 0.5 * (lower + upper))
        else:
            dk = _direct_kernel(tr, L, quad)
            if abs(dk - limit) > KERNEL_GAP:
                raise KernelNotConverged(f"direct kernel {dk:.4g} vs arcsin integral {limit:.4g} "
                                         f"at lambda = {lam}")
            out.append(dk)
    return RatioCurve(lambdas=lams, log_ratio=out, i0_vals=i0s, i1_vals=i1s, i4_vals=i4s,
                      slope_vs_log1mlam=_slope(lams, out), method=method)
