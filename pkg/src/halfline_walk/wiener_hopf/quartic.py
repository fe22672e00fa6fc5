"""Normalized coefficients of the quadratic approximation and its quartic.

With ``m = E X2^2`` the approximation of ``1 - lambda phi`` near the origin is

    phi_lam(t1, t2) = (lambda m / 2) {t2^2 + A t2 + B - i (C t2 + D)},

and ``|phi_lam|^2`` is, up to the factor, the quartic

    (t2^2 + A t2 + B)^2 + (C t2 + D)^2
        = (t2^2 + a+ t2 + b+)(t2^2 + a- t2 + b-).

Real coefficients exist when ``4B - A^2 - C^2 > 0``. The square roots are
taken in forms that avoid cancellation: with ``P = 4B - A^2 + C^2``,
``g = 2D - AC`` and ``S = sqrt K``,

    H = (S - P) / 2 = 2 g^2 / (S + P),   W = sqrt((S + P) / 2),   W sqrt(H) = |g|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateK, NotPositiveDefinite, OutOfRange
from ..lattice_walk import IncrementDistribution, moments, trig_moments

DEGENERATE_TOL = 1e-12
K_FLOOR = 1e-300


@dataclass(frozen=True)
class AbcdSet:
    """Normalized coefficients at ``(theta1, lambda)``.

    ``bridge_residual`` is the relative mismatch between ``(lambda m / 8)^2 K``
    and ``(1 - lambda + lambda B(theta1))^2 + (lambda D(theta1))^2``.
    """

    theta1: float
    lam: float
    a_n: float
    b_n: float
    c_n: float
    d_n: float
    k_val: float
    h_val: float
    j1: float
    j2: float
    j_total: float
    e_x2_sq: float
    bridge_residual: float = 0.0

    @property
    def p_val(self) -> float:
        return 4.0 * self.b_n - self.a_n ** 2 + self.c_n ** 2

    @property
    def g_val(self) -> float:
        return 2.0 * self.d_n - self.a_n * self.c_n


@dataclass(frozen=True)
class QuarticFactors:
    """``a+-, b+-`` and the partial-fraction triples.

    ``pf_re``, ``pf_im`` and ``pf_sq`` hold ``(F, G, I)`` with

        N(t) / quartic = (F t + G) / (t^2 + a+ t + b+) + (-F t + I) / (t^2 + a- t + b-)

    for ``N = t^2 + A t + B``, ``C t + D`` and ``1``. They are ``None`` when
    the quartic is a perfect square (``H = C = 0``).
    """

    a_plus: float
    a_minus: float
    b_plus: float
    b_minus: float
    branch: str
    pf_re: tuple[float, float, float] | None
    pf_im: tuple[float, float, float] | None
    pf_sq: tuple[float, float, float] | None
    abcd: AbcdSet


def _coeffs(a, b, c, d):
    p = 4.0 * b - a * a + c * c
    g = 2.0 * d - a * c
    k = p * p + 4.0 * g * g
    s = math.sqrt(k)
    if p > 0:
        h = 2.0 * g * g / (s + p)
    else:
        h = 0.5 * (s - p)
    w = math.sqrt(max(0.5 * (s + p), 0.0))
    return p, g, k, s, h, w


def abcd_from_values(a: float, b: float, c: float, d: float, theta1: float = math.nan,
                     lam: float = math.nan, e_x2_sq: float = math.nan) -> AbcdSet:
    """An :class:`AbcdSet` from raw coefficients (no distribution needed)."""
    p, g, k, s, h, w = _coeffs(a, b, c, d)
    if not k >= K_FLOOR:
        raise DegenerateK(f"K = {k:.3g} vanishes")
    j2 = -2.0 * c * math.copysign(1.0, g) * w if g != 0.0 else 0.0
    return AbcdSet(theta1=theta1, lam=lam, a_n=a, b_n=b, c_n=c, d_n=d, k_val=k, h_val=h,
                   j1=0.5 * (p + 2.0 * c * c + s), j2=j2, j_total=p + s, e_x2_sq=e_x2_sq)


def _bd(dist, theta1, m):
    tm = trig_moments(dist, theta1)
    b = tm.one_minus_cos1 - tm.sin_x2 ** 2 / (2.0 * m) + tm.cos_x2 ** 2 / (2.0 * m)
    d = tm.sin1 - tm.sin_x2 * tm.cos_x2 / m
    return tm, b, d


def abcd(dist: IncrementDistribution, theta1: float, lam: float) -> AbcdSet:
    """Normalized ``A, B, C, D``, ``K``, ``H`` and ``J`` at ``(theta1, lambda)``.

    ``lambda = 1`` is accepted here so that the degenerate ``K = 0`` case can
    be reported; every other operation requires ``lambda < 1``.
    """
    if not 0.0 < lam <= 1.0:
        raise OutOfRange("lambda must lie in (0, 1]")
    m = moments(dist).e_x2_sq
    tm, b_th, d_th = _bd(dist, float(theta1), m)
    half = 0.5 * m
    a = tm.sin_x2 / half
    b = ((1.0 - lam) + lam * tm.one_minus_cos1) / (lam * half)
    c = tm.cos_x2 / half
    d = tm.sin1 / half
    base = abcd_from_values(a, b, c, d, float(theta1), float(lam), m)
    lhs = (lam * m / 8.0) ** 2 * base.k_val
    rhs = (1.0 - lam + lam * b_th) ** 2 + (lam * d_th) ** 2
    resid = abs(lhs - rhs) / max(lhs, rhs, K_FLOOR)
    return AbcdSet(**{**base.__dict__, "bridge_residual": resid})


def _pf(ap, am, bp, bm, den, a, b, c, d):
    da = ap - am
    db = bm - bp
    cross = ap * bm - am * bp
    re = ((-cross + a * db + b * da) / den,
          (-bp * db - a * da * bp + b * ap * da + b * db) / den,
          (bm * db + a * da * bm - b * am * da - b * db) / den)
    im = ((c * db + d * da) / den,
          (-c * da * bp + d * ap * da + d * db) / den,
          (c * da * bm - d * am * da - d * db) / den)
    sq = (da / den, (ap * da + db) / den, (-am * da - db) / den)
    return re, im, sq


def quartic_factor(s: AbcdSet) -> QuarticFactors:
    """Factor the quartic into two real quadratics with negative discriminant."""
    a, b, c, d = s.a_n, s.b_n, s.c_n, s.d_n
    if not 4.0 * b - a * a - c * c > 0.0:
        raise NotPositiveDefinite(
            f"4B - A^2 - C^2 = {4.0 * b - a * a - c * c:.3g} is not positive; "
            "theta1 is outside the small-angle regime")
    p, g, k, sk, h, w = _coeffs(a, b, c, d)
    if abs(g) < DEGENERATE_TOL * (1.0 + abs(a) * abs(c)):
        branch = "degenerate"
        h = 0.0
        rp = math.sqrt(p)
        ap = am = a
        bp = 0.5 * (2.0 * b + c * c + rp * abs(c))
        bm = 0.5 * (2.0 * b + c * c - rp * abs(c))
    else:
        branch = "generic"
        rh = math.sqrt(h)
        ap, am = a + rh, a - rh
        shift = 2.0 * (a * rh - c * math.copysign(w, g))
        bp = 0.25 * (a * a + c * c + sk + shift)
        bm = 0.25 * (a * a + c * c + sk - shift)
    # (a+ - a-)(a+ b- - a- b+) + (b- - b+)^2 equals (H + C^2) sqrt K
    den = (h + c * c) * sk
    if den > 1e-14 * (1.0 + b * b + d * d) * sk or den > 0 and branch == "generic":
        re, im, sq = _pf(ap, am, bp, bm, den, a, b, c, d)
    else:
        re = im = sq = None
    return QuarticFactors(ap, am, bp, bm, branch, re, im, sq, s)


def factorization_residual(q: QuarticFactors, points=(-2.0, -1.0, 0.0, 1.0, 2.0)) -> float:
    """Largest mismatch of the factorization on ``points``."""
    s = q.abcd
    t = np.asarray(points, dtype=float)
    lhs = (t * t + s.a_n * t + s.b_n) ** 2 + (s.c_n * t + s.d_n) ** 2
    rhs = (t * t + q.a_plus * t + q.b_plus) * (t * t + q.a_minus * t + q.b_minus)
    return float(np.max(np.abs(lhs - rhs)))


# ------------------------------------------------------- rational integrals

def _quad_term(p, q, a, b, lo, hi):
    """Integral of ``(p t + q) / (t^2 + a t + b)`` over ``[lo, hi]`` (``4b > a^2``)."""
    r = math.sqrt(4.0 * b - a * a)
    coef = (2.0 * q - a * p) / r
    if math.isinf(lo) and math.isinf(hi):
        return coef * math.pi
    log_part = 0.0
    if p != 0.0:
        log_part = 0.5 * p * (math.log(hi * hi + a * hi + b) - math.log(lo * lo + a * lo + b))
    return log_part + coef * (math.atan((2.0 * hi + a) / r) - math.atan((2.0 * lo + a) / r))


def pf_integral(q: QuarticFactors, which: str, lo: float = -math.inf, hi: float = math.inf) -> float:
    """``int N(t) / quartic dt`` over ``[lo, hi]`` for ``which`` in re/im/sq.

    Infinite limits must be used together.
    """
    s = q.abcd
    triple = {"re": q.pf_re, "im": q.pf_im, "sq": q.pf_sq}[which]
    if triple is None:
        # perfect square (t^2 + A t + B)^2 with C = D = 0
        a, b = s.a_n, s.b_n
        if which == "re":
            return _quad_term(0.0, 1.0, a, b, lo, hi)
        if which == "im":
            return 0.0
        return _square_integral(a, b, lo, hi)
    f, g, i = triple
    return (_quad_term(f, g, q.a_plus, q.b_plus, lo, hi)
            + _quad_term(-f, i, q.a_minus, q.b_minus, lo, hi))


def _square_integral(a, b, lo, hi):
    # int dt / (t^2 + a t + b)^2 via u = t + a/2, e = b - a^2/4
    e = b - 0.25 * a * a
    r = math.sqrt(e)

    def prim(t):
        if math.isinf(t):
            return math.copysign(math.pi / (4.0 * e * r), t)
        u = t + 0.5 * a
        return u / (2.0 * e * (u * u + e)) + math.atan(u / r) / (2.0 * e * r)

    return prim(hi) - prim(lo)
