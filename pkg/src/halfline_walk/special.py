"""Zeta-type sums used by the heavy-tailed increment law.

All routines work in double precision. Zeta values come from partial sums
corrected by Euler-Maclaurin terms; the reflection formula handles
arguments below one half.
"""

from __future__ import annotations

import math

import numpy as np

# B_{2j} / (2j)! for j = 1..10
_BERNOULLI_OVER_FACT = (
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
)


def hurwitz_tail(s: float, n0: float, terms: int = 6) -> float:
    """Return ``sum_{n >= n0} n**-s`` for integer ``n0 >= 1`` and ``s > 1``.

    Uses the Euler-Maclaurin expansion anchored at ``n0``; for ``n0`` of a few
    dozen the truncation error is far below double precision.
    """
    n0 = float(n0)
    if n0 < 16:
        k = int(16 - n0)
        head = sum((n0 + i) ** -s for i in range(k))
        return head + hurwitz_tail(s, n0 + k, terms)
    total = n0 ** (1.0 - s) / (s - 1.0) + 0.5 * n0 ** -s
    # f^{(2j-1)}(n0) for f(x) = x^-s is -(s)_{2j-1} n0^{-s-2j+1}
    rising = s
    power = n0 ** (-s - 1.0)
    for j in range(terms):
        total += _BERNOULLI_OVER_FACT[j] * rising * power
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
        power /= n0 * n0
    return total


def zeta(s: float) -> float:
    """Riemann zeta function for real ``s != 1``."""
    if s == 1.0:
        raise ValueError("zeta has a pole at s = 1")
    if s >= 0.5:
        n0 = 32
        head = math.fsum(n ** -s for n in range(1, n0))
        # Euler-Maclaurin remainder continues analytically below s = 1
        rem = n0 ** (1.0 - s) / (s - 1.0) + 0.5 * n0 ** -s
        rising = s
        power = n0 ** (-s - 1.0)
        for j in range(10):
            rem += _BERNOULLI_OVER_FACT[j] * rising * power
            rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
            power /= n0 * n0
        return head + rem
    if s == math.floor(s) and s <= 0:
        k = int(-s)
        if k == 0:
            return -0.5
        if k % 2 == 0:
            return 0.0
    t = 1.0 - s
    # zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1-s) zeta(1-s)
    sign_sin = math.sin(math.pi * s / 2.0)
    log_mag = s * math.log(2.0) + (s - 1.0) * math.log(math.pi) + math.lgamma(t)
    return sign_sin * math.exp(log_mag) * zeta(t)


def polylog_coefficients(s: float, n_terms: int = 64) -> np.ndarray:
    """Coefficients ``zeta(s - k) / k!`` for ``k = 0..n_terms-1``."""
    out = np.empty(n_terms)
    for k in range(n_terms):
        sig = s - k
        if sig >= 0.5:
            out[k] = zeta(sig) / math.factorial(k)
            continue
        t = 1.0 - sig
        sgn = math.sin(math.pi * sig / 2.0)
        if abs(sgn) < 1e-300:
            out[k] = 0.0
            continue
        # divide by k! inside the logarithm to avoid overflow
        log_mag = (sig * math.log(2.0) + (sig - 1.0) * math.log(math.pi)
                   + math.lgamma(t) - math.lgamma(k + 1.0))
        out[k] = sgn * math.exp(log_mag) * zeta(t)
    return out


class UnitCirclePolylog:
    """Evaluate ``Li_s(exp(i*theta))`` for ``theta`` in ``[-pi, pi]``.

    The expansion ``Gamma(1-s)(-i theta)^(s-1) + sum_k zeta(s-k)(i theta)^k/k!``
    converges geometrically for ``|theta| < 2 pi``. The constant ``zeta(s)`` term
    can be dropped with ``drop_constant=True`` so that differences such as
    ``zeta(s) - Li_s`` keep full relative precision near ``theta = 0``.
    """

    def __init__(self, s: float, n_terms: int = 72):
        if s <= 1.0 or s == math.floor(s):
            raise ValueError("order must be a non-integer above one")
        self.s = float(s)
        self.coef = polylog_coefficients(self.s, n_terms)
        self.gamma = math.gamma(1.0 - self.s)

    def __call__(self, theta, drop_constant: bool = False) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        mag = np.abs(th)
        # (-i theta)^(s-1) on the principal branch
        phase = -np.sign(th) * (math.pi / 2.0) * (self.s - 1.0)
        sing = self.gamma * mag ** (self.s - 1.0) * np.exp(1j * phase)
        z = 1j * th
        acc = np.zeros_like(z)
        for c in self.coef[:0:-1]:
            acc = (acc + c) * z
        if not drop_constant:
            acc = acc + self.coef[0]
        return sing + acc
