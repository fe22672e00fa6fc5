"""Batched adaptive Gauss-Legendre quadrature.

Many related integrals (one per item, e.g. one per outer node) are refined
together so that every integrand call is a single vectorized evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureNonConvergent


STALL_RATIO = 0.25
STALL_SHARE = 1e-3


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance ``max(tol, rtol * |I|)`` per integral; ``max_panels`` per integral."""

    tol: float = 1e-9
    rtol: float = 1e-12
    max_panels: int = 4000
    order: int = 16


@lru_cache(maxsize=8)
def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _rule(f, owner, a, b, order):
    x, w = _gauss(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    own = np.broadcast_to(owner[:, None], pts.shape)
    vals = f(own.ravel(), pts.ravel()).reshape(pts.shape)
    return (vals @ w) * half


def integrate_batch(f, edges: np.ndarray, spec: QuadratureSpec = QuadratureSpec(),
                    scale: np.ndarray | None = None, return_panels: bool = False):
    """Integrate ``f(item, x)`` over ``[edges[i, 0], edges[i, -1]]`` for every item.

    Parameters
    ----------
    f : callable
        ``f(item_index_array, x_array) -> values``; arrays of equal length.
    edges : ndarray, shape (n_items, n_edges)
        Initial panel boundaries per item (non-decreasing rows).
    spec : QuadratureSpec
    scale : ndarray, optional
        A rough magnitude of each integral, used for the relative tolerance
        before the integral itself is known.

    return_panels : bool
        Also return the accepted panels as ``(owner, a, b)`` arrays.

    Returns
    -------
    values, errors : ndarray
    """
    edges = np.asarray(edges, dtype=float)
    n_items = edges.shape[0]
    a = edges[:, :-1].ravel()
    b = edges[:, 1:].ravel()
    owner = np.repeat(np.arange(n_items), edges.shape[1] - 1)
    keep = b > a
    a, b, owner = a[keep], b[keep], owner[keep]
    length = edges[:, -1] - edges[:, 0]
    total = np.zeros(n_items, dtype=complex)
    err = np.zeros(n_items)
    count = np.bincount(owner, minlength=n_items)
    kept = []
    coarse = _rule(f, owner, a, b, spec.order)
    est = np.zeros(n_items, dtype=complex)
    np.add.at(est, owner, coarse)
    if scale is not None:
        est_mag = np.maximum(np.abs(est), np.asarray(scale, dtype=float))
    else:
        est_mag = np.abs(est)
    parent = np.full(a.size, np.inf)
    stall = np.zeros(a.size, dtype=int)
    while a.size:
        m = 0.5 * (a + b)
        left = _rule(f, owner, a, m, spec.order)
        right = _rule(f, owner, m, b, spec.order)
        fine = left + right
        e = np.abs(fine - coarse)
        whole = np.maximum(spec.tol, spec.rtol * est_mag[owner])
        budget = whole * (b - a) / length[owner]
        # roundoff: the error stopped shrinking under bisection
        stall = np.where(e > STALL_RATIO * parent, stall + 1, 0)
        ok = ((e <= budget) | (b - a <= 1e-15 * np.maximum(1.0, np.abs(m)))
              | ((stall >= 2) & (e <= STALL_SHARE * whole)))
        np.add.at(total, owner[ok], fine[ok])
        np.add.at(err, owner[ok], e[ok])
        if return_panels:
            kept.append((owner[ok], a[ok], b[ok]))
        bad = ~ok
        if not bad.any():
            break
        np.add.at(count, owner[bad], 1)
        if count.max() > spec.max_panels:
            worst = int(np.argmax(count))
            raise QuadratureNonConvergent(
                f"integral {worst} needed more than {spec.max_panels} panels")
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
        parent = np.tile(0.5 * e[bad], 2)
        stall = np.tile(stall[bad], 2)
    if return_panels:
        panels = tuple(np.concatenate([k[i] for k in kept]) for i in range(3))
        return total, err, panels
    return total, err


def peak_edges(center: np.ndarray, width: np.ndarray, lo: float, hi: float,
               n_side: int = 18, first: float = 0.125) -> np.ndarray:
    """Panel edges clustered geometrically around ``center`` on ``[lo, hi]``.

    Each row holds ``2 * n_side + 3`` edges: the interval ends, the centre and
    ``center +- width * first * 2^j`` clipped to the interval.
    """
    center = np.clip(np.asarray(center, dtype=float), lo, hi)
    width = np.asarray(width, dtype=float)
    steps = first * 2.0 ** np.arange(n_side)
    right = center[:, None] + width[:, None] * steps
    left = center[:, None] - width[:, None] * steps[::-1]
    rows = np.concatenate([np.full((center.size, 1), lo), left, center[:, None], right,
                           np.full((center.size, 1), hi)], axis=1)
    return np.sort(np.clip(rows, lo, hi), axis=1)


def integrate(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(),
              points=None) -> tuple[complex, float]:
    """Adaptive integral of a scalar-vectorized ``f(x)`` over ``[a, b]``."""
    edges = [a] + sorted(p for p in (points or []) if a < p < b) + [b]
    vals, errs = integrate_batch(lambda _, x: f(x), np.array([edges]), spec)
    return vals[0], float(errs[0])


def panel_nodes(a: np.ndarray, b: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule on panels ``[a_j, b_j]``."""
    x, w = _gauss(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def split_panels(a: np.ndarray, b: np.ndarray, max_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Split panels wider than ``max_width`` into equal parts."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    parts = np.maximum(np.ceil((b - a) / max_width), 1).astype(int)
    idx = np.repeat(np.arange(a.size), parts)
    offs = np.concatenate([np.arange(p) for p in parts])
    width = ((b - a) / parts)[idx]
    lo = a[idx] + offs * width
    return lo, lo + width
