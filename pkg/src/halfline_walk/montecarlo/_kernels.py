"""Compiled path simulators.

The walk is simulated through its second coordinate. Steps are classified by
the value of ``X2``; for each class the first-coordinate increments are only
counted, and their sum is drawn when the path returns to the line
``x2 = 0``, the only place where the first coordinate matters. Far from the
line, ``floor((|x2| - 1) / max|X2|)`` steps cannot reach it and are taken at
once with a multinomial draw of the class counts. Every draw is exact, so
the simulated law of the hitting time and hitting place is that of the
step-by-step walk.
"""

from __future__ import annotations

from collections import namedtuple

import numba as nb
import numpy as np

LEAP_MIN = 8
HEAVY_DIRECT_MAX = 24
POSITION_LIMIT = 2 ** 61

# exit codes of a single path
SURVIVED = 0
HIT = 1
KILLED = 2
OVERFLOW = 3

# target codes
T_U = 0
T_V_MINUS = 1
T_V_PLUS = 2
T_V_PLUS_PUNCTURED = 3

WalkArrays = namedtuple(
    "WalkArrays",
    [
        "y_vals", "y_p", "y_cum", "y_seg", "y_max",
        "seg_start", "seg_len", "cx_vals", "cx_p", "cx_cum",
        "heavy", "h_c_plus", "h_s", "h_head_cum", "h_tail_start", "h_tail_mass",
        "h_small_v", "h_small_p", "h_beyond_cum", "h_sign",
    ],
)


@nb.njit(nogil=True, cache=True)
def _in_target(target, x1):
    if target == T_U:
        return True
    if target == T_V_MINUS:
        return x1 <= 0
    if target == T_V_PLUS:
        return x1 >= 0
    return x1 >= 1


@nb.njit(nogil=True, cache=True)
def _draw_index(g, cum, start, length):
    u = g.random()
    for i in range(length - 1):
        if u < cum[start + i]:
            return start + i
    return start + length - 1


@nb.njit(nogil=True, cache=True)
def _binom(g, n, p):
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    return g.binomial(n, p)


@nb.njit(nogil=True, cache=True)
def _sum_table(g, n, start, length, vals, p, cum):
    total = 0
    if length == 1:
        return n * vals[start]
    if n <= 2 * length + 4:
        for _ in range(n):
            total += vals[_draw_index(g, cum, start, length)]
        return total
    rem = n
    prem = 1.0
    for i in range(length - 1):
        if rem == 0:
            break
        q = p[start + i] / prem if prem > 0.0 else 1.0
        k = _binom(g, rem, q)
        total += k * vals[start + i]
        rem -= k
        prem -= p[start + i]
    total += rem * vals[start + length - 1]
    return total


@nb.njit(nogil=True, cache=True)
def _tail_sum(s, n):
    return (n ** (1.0 - s) / (s - 1.0) + 0.5 * n ** -s + s / 12.0 * n ** (-s - 1.0)
            - s * (s + 1.0) * (s + 2.0) / 720.0 * n ** (-s - 3.0))


@nb.njit(nogil=True, cache=True)
def _invert_tail(s, tail_start, tail_mass, u):
    target = u * tail_mass
    lo = tail_start
    guess = ((s - 1.0) * target) ** (-1.0 / (s - 1.0))
    hi = max(2.0 * guess, lo + 1.0)
    while _tail_sum(s, hi) >= target:
        hi *= 2.0
    while hi - lo > 1.0:
        mid = np.floor(0.5 * (lo + hi))
        if _tail_sum(s, mid) >= target:
            lo = mid
        else:
            hi = mid
    if lo > 4.0e18:
        return np.int64(4 * 10 ** 18)
    return np.int64(lo)


# Hot helpers take arrays one by one: passing the whole WalkArrays tuple
# costs a reference-count update per contained array on every call.

@nb.njit(nogil=True, cache=True)
def _neg_magnitude(g, head, hp, v):
    """``|X1|`` given ``X1 < 0``, from a uniform ``v`` on the conditional CDF.

    ``hp`` is ``(c_plus, s, tail_start, tail_mass, beyond_cum)``.
    """
    n = head.size
    # most mass sits on the first few magnitudes
    for i in range(min(8, n)):
        if v < head[i]:
            return np.int64(i + 1)
    if v < head[n - 1]:
        lo = 7
        hi = n - 1
        # head[lo] <= v < head[hi]
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if v < head[mid]:
                hi = mid
            else:
                lo = mid
        return np.int64(hi + 1)
    return _invert_tail(hp[1], hp[2], hp[3], 1.0 - g.random())


@nb.njit(nogil=True, cache=True)
def _heavy_sum(g, n, head, hp, small_v, small_p):
    """Sum of ``n`` independent heavy-tailed ``X1`` draws."""
    total = np.int64(0)
    c_plus = hp[0]
    if n <= HEAVY_DIRECT_MAX:
        for _ in range(n):
            u = g.random()
            if u < c_plus:
                total += 1
                continue
            v = (u - c_plus) / (1.0 - c_plus)
            if v < head[0]:
                total -= 1
            elif v < head[1]:
                total -= 2
            else:
                total -= _neg_magnitude(g, head, hp, v)
        return total
    rem = n
    prem = 1.0
    for i in range(small_v.size):
        if rem == 0:
            break
        k = _binom(g, rem, small_p[i] / prem)
        total += k * small_v[i]
        rem -= k
        prem -= small_p[i]
    lo = hp[4]
    for _ in range(rem):
        total -= _neg_magnitude(g, head, hp, lo + (1.0 - lo) * g.random())
    return total


@nb.njit(nogil=True, cache=True)
def run_path(g, w, target, tmax, pending, kill, leap):
    """Simulate one path from the origin for at most ``tmax`` steps.

    Returns ``(t, x1, code)``. With ``code == HIT`` the path entered the target
    at time ``t`` at first coordinate ``x1``. With ``kill > 0`` the path is
    killed before each step with probability ``kill``; ``t`` is then the number
    of steps completed.
    """
    y_vals = w.y_vals
    y_p = w.y_p
    y_cum = w.y_cum
    y_seg = w.y_seg
    seg_start = w.seg_start
    seg_len = w.seg_len
    cx_vals = w.cx_vals
    cx_p = w.cx_p
    cx_cum = w.cx_cum
    heavy = w.heavy
    head = w.h_head_cum
    hp = (w.h_c_plus, w.h_s, w.h_tail_start, w.h_tail_mass, w.h_beyond_cum)
    small_v = w.h_small_v
    small_p = w.h_small_p
    for s in range(pending.size):
        pending[s] = 0
    t = 0
    x1 = np.int64(0)
    x2 = np.int64(0)
    m = w.y_max
    ny = y_vals.size
    n_seg = pending.size
    while t < tmax:
        d = abs(x2)
        if leap and d > m:
            k = (d - 1) // m
            if k >= LEAP_MIN:
                if k > tmax - t:
                    k = tmax - t
                rem = k
                prem = 1.0
                for j in range(ny - 1):
                    if rem == 0:
                        break
                    c = _binom(g, rem, y_p[j] / prem)
                    x2 += c * y_vals[j]
                    pending[y_seg[j]] += c
                    rem -= c
                    prem -= y_p[j]
                x2 += rem * y_vals[ny - 1]
                pending[y_seg[ny - 1]] += rem
                t += k
                continue
        if kill > 0.0 and g.random() < kill:
            return t, x1, KILLED
        j = _draw_index(g, y_cum, 0, ny)
        x2 += y_vals[j]
        pending[y_seg[j]] += 1
        t += 1
        if x2 == 0:
            for sg in range(n_seg):
                n = pending[sg]
                if n == 0:
                    continue
                pending[sg] = 0
                if heavy and sg == 0:
                    x1 += w.h_sign * _heavy_sum(g, n, head, hp, small_v, small_p)
                elif seg_len[sg] == 1:
                    x1 += n * cx_vals[seg_start[sg]]
                else:
                    x1 += _sum_table(g, n, seg_start[sg], seg_len[sg], cx_vals, cx_p, cx_cum)
            if abs(x1) > POSITION_LIMIT:
                return t, x1, OVERFLOW
            if _in_target(target, x1):
                return t, x1, HIT
    return t, x1, SURVIVED


@nb.njit(nogil=True, cache=True)
def survival_kernel(g, w, target, n_paths, horizon, hist):
    """Add first-hit times to ``hist`` (index ``horizon + 1`` counts survivors)."""
    pending = np.zeros(w.seg_start.size, dtype=np.int64)
    overflow = 0
    for _ in range(n_paths):
        t, x1, code = run_path(g, w, target, horizon, pending, 0.0, True)
        if code == HIT:
            hist[t] += 1
        elif code == OVERFLOW:
            overflow += 1
        else:
            hist[horizon + 1] += 1
    return overflow


@nb.njit(nogil=True, cache=True)
def geometric_kernel(g, w, target, n_paths, horizon, lam, per_step, out):
    """``out`` accumulates [survived, origin_first_hit, censored, overflow]."""
    pending = np.zeros(w.seg_start.size, dtype=np.int64)
    for _ in range(n_paths):
        if per_step:
            t, x1, code = run_path(g, w, target, horizon, pending, 1.0 - lam, False)
            if code == KILLED:
                out[0] += 1
            elif code == SURVIVED:
                out[0] += 1
                out[2] += 1
            elif code == HIT:
                if x1 == 0:
                    out[1] += 1
            else:
                out[3] += 1
            continue
        big_t = g.geometric(1.0 - lam) - 1
        cap = big_t
        if cap > horizon:
            cap = horizon
            out[2] += 1
        t, x1, code = run_path(g, w, target, cap, pending, 0.0, True)
        if code == HIT:
            if x1 == 0:
                out[1] += 1
        elif code == OVERFLOW:
            out[3] += 1
        else:
            out[0] += 1


@nb.njit(nogil=True, cache=True)
def ladder_kernel(g, w, n_samples, horizon, eta, zeta):
    """First return times to the line and the first coordinate there;
    ``eta = horizon + 1`` marks censored samples."""
    pending = np.zeros(w.seg_start.size, dtype=np.int64)
    overflow = 0
    for i in range(n_samples):
        t, x1, code = run_path(g, w, T_U, horizon, pending, 0.0, True)
        if code == HIT:
            eta[i] = t
            zeta[i] = x1
        else:
            if code == OVERFLOW:
                overflow += 1
            eta[i] = horizon + 1
            zeta[i] = 0
    return overflow


@nb.njit(nogil=True, cache=True)
def increments_kernel(g, w, n, x1_out, x2_out):
    """Plain i.i.d. increments through the same samplers (for testing)."""
    hp = (w.h_c_plus, w.h_s, w.h_tail_start, w.h_tail_mass, w.h_beyond_cum)
    for i in range(n):
        j = _draw_index(g, w.y_cum, 0, w.y_vals.size)
        x2_out[i] = w.y_vals[j]
        if w.heavy:
            x1_out[i] = w.h_sign * _heavy_sum(g, 1, w.h_head_cum, hp, w.h_small_v, w.h_small_p)
        else:
            s = w.y_seg[j]
            x1_out[i] = _sum_table(g, 1, w.seg_start[s], w.seg_len[s], w.cx_vals, w.cx_p,
                                   w.cx_cum)
