"""Exact forward recursion for small horizons."""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

from ..errors import OutOfRange, SupportUnbounded
from ..lattice_walk import IncrementDistribution

N_MAX_LIMIT = 24


def _in_target(target: str, x1: np.ndarray) -> np.ndarray:
    if target == "U":
        return np.ones(x1.shape, dtype=bool)
    if target == "V_minus":
        return x1 <= 0
    if target == "V_plus":
        return x1 >= 0
    if target == "V_plus_punctured":
        return x1 >= 1
    raise OutOfRange(f"unknown target {target!r}")


def dp_exact_survival(dist: IncrementDistribution, n_max: int, target: str = "V_minus") -> list[Fraction]:
    """``P0(tau_A > n)`` for ``n = 1..n_max`` as exact fractions.

    Mass is kept as integers over the common denominator ``D^n`` where ``D``
    is the least common denominator of the atom probabilities.
    """
    if dist.kind == "heavy_tail_x1_product":
        raise SupportUnbounded("the heavy-tailed law has infinite support")
    if not 1 <= n_max <= N_MAX_LIMIT:
        raise OutOfRange(f"n_max must lie in [1, {N_MAX_LIMIT}]")
    if dist.exact is not None:
        probs = list(dist.exact)
    else:
        probs = [Fraction(p) for _, p in dist.atoms]
    steps = [(pt.x1, pt.x2, q) for (pt, _), q in zip(dist.atoms, probs) if q > 0]
    den = 1
    for _, _, q in steps:
        den = lcm(den, q.denominator)
    weights = [(a, b, int(q * den)) for a, b, q in steps]
    reach = max(max(abs(a), abs(b)) for a, b, _ in weights)
    r = n_max * reach
    size = 2 * r + 1
    mass = np.zeros((size, size), dtype=object)
    mass[:] = 0
    mass[r, r] = 1
    coords = np.arange(-r, r + 1)
    # rows index x1, columns index x2; only the x2 = 0 column can be absorbed
    absorb = _in_target(target, coords)
    out = []
    total_den = 1
    for _ in range(n_max):
        new = np.zeros((size, size), dtype=object)
        new[:] = 0
        for a, b, wgt in weights:
            src_r = slice(max(0, -a), size - max(0, a))
            dst_r = slice(max(0, a), size - max(0, -a))
            src_c = slice(max(0, -b), size - max(0, b))
            dst_c = slice(max(0, b), size - max(0, -b))
            new[dst_r, dst_c] += wgt * mass[src_r, src_c]
        new[absorb, r] = 0
        mass = new
        total_den *= den
        out.append(Fraction(int(mass.sum()), total_den))
    return out
