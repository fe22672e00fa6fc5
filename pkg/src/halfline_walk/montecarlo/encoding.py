"""Translate an ``IncrementDistribution`` into the arrays used by the kernels."""

from __future__ import annotations

import numpy as np

from ..lattice_walk import IncrementDistribution, heavy_tail_sampler
from ._kernels import WalkArrays

SMALL_CATEGORIES = 16


def _cum(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(p)
    return c / c[-1]


def encode(dist: IncrementDistribution) -> WalkArrays:
    """Group steps by ``X2`` value with the conditional law of ``X1`` per group."""
    y_vals, y_p = dist.x2_marginal()
    keep = y_p > 0
    y_vals, y_p = y_vals[keep], y_p[keep]
    heavy = dist.kind == "heavy_tail_x1_product"
    seg_start, seg_len, cx_vals, cx_p = [], [], [], []
    if dist.kind == "table":
        x1, x2, p = dist.joint_arrays()
        y_seg = np.arange(y_vals.size, dtype=np.int64)
        for y, py in zip(y_vals, y_p):
            sel = (x2 == y) & (p > 0)
            seg_start.append(len(cx_vals))
            seg_len.append(int(sel.sum()))
            cx_vals.extend(x1[sel].tolist())
            cx_p.extend((p[sel] / py).tolist())
    else:
        # independent coordinates: one shared group
        y_seg = np.zeros(y_vals.size, dtype=np.int64)
        seg_start.append(0)
        if heavy:
            seg_len.append(1)
            cx_vals.append(0)
            cx_p.append(1.0)
        else:
            vals = [v for v, q in dist.x1_atoms if q > 0]
            probs = [q for _, q in dist.x1_atoms if q > 0]
            seg_len.append(len(vals))
            cx_vals.extend(vals)
            cx_p.extend(probs)
    seg_start = np.array(seg_start, dtype=np.int64)
    seg_len = np.array(seg_len, dtype=np.int64)
    cx_vals = np.array(cx_vals, dtype=np.int64)
    cx_p = np.array(cx_p, dtype=float)
    cx_cum = np.empty_like(cx_p)
    for s, n in zip(seg_start, seg_len):
        cx_cum[s:s + n] = _cum(cx_p[s:s + n])
    if heavy:
        ht = dist.heavy_tail
        smp = heavy_tail_sampler(ht)
        h = min(SMALL_CATEGORIES, ht.head_size)
        n = np.arange(1, h + 1, dtype=float)
        small_v = np.concatenate([[1], -np.arange(1, h + 1)]).astype(np.int64)
        small_p = np.concatenate([[ht.c_plus], ht.c_minus * n ** -smp.s])
        h_args = dict(heavy=True, h_c_plus=ht.c_plus, h_s=smp.s, h_head_cum=smp.head_cum,
                      h_tail_start=float(smp.tail_start), h_tail_mass=smp.tail_mass,
                      h_small_v=small_v, h_small_p=small_p,
                      h_beyond_cum=float(smp.head_cum[h - 1]),
                      h_sign=np.int64(-1 if ht.mirrored else 1))
    else:
        h_args = dict(heavy=False, h_c_plus=0.0, h_s=2.0, h_head_cum=np.ones(1),
                      h_tail_start=1.0, h_tail_mass=1.0,
                      h_small_v=np.zeros(1, dtype=np.int64), h_small_p=np.zeros(1),
                      h_beyond_cum=1.0, h_sign=np.int64(1))
    return WalkArrays(
        y_vals=y_vals.astype(np.int64), y_p=y_p.astype(float), y_cum=_cum(y_p),
        y_seg=y_seg, y_max=int(np.max(np.abs(y_vals))),
        seg_start=seg_start, seg_len=seg_len, cx_vals=cx_vals, cx_p=cx_p, cx_cum=cx_cum,
        **h_args,
    )
