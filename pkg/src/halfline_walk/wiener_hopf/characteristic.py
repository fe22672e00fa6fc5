"""Cancellation-free evaluation of ``1 - lambda phi`` on many points.

Atoms are grouped by the value ``y`` of ``X2`` so that

    1 - phi(t1, t2) = sum_y h_y(t1) e^{i t2 y} + P_y (1 - e^{i t2 y}),
    h_y(t1) = sum_{x: x2 = y} p (1 - e^{i t1 x1}),

and both pieces are built from ``2 sin^2(u / 2) - i sin u``. Near the peak
at the origin ``1 - lambda phi`` is of size ``1 - lambda`` and keeps full
relative precision.
"""

from __future__ import annotations

import numpy as np

from ..lattice_walk import IncrementDistribution, x1_transform


def _one_minus_exp(u: np.ndarray) -> np.ndarray:
    return 2.0 * np.sin(0.5 * u) ** 2 - 1j * np.sin(u)


class LineKernel:
    """``1 - lambda phi(theta1, theta2)`` for a fixed distribution."""

    def __init__(self, dist: IncrementDistribution):
        self.dist = dist
        y, p_y = dist.x2_marginal()
        self.y = y.astype(float)
        self.p_y = np.asarray(p_y, dtype=float)
        if dist.kind == "table":
            x1, x2, p = dist.joint_arrays()
            self._x1 = x1.astype(float)
            self._rows = [np.flatnonzero(x2 == v) for v in y]
            self._p = np.asarray(p, dtype=float)

    def prepare(self, theta1) -> np.ndarray:
        """``h_y(theta1)``, shape ``(n, n_y)``."""
        th = np.atleast_1d(np.asarray(theta1, dtype=float))
        if self.dist.kind == "table":
            om = _one_minus_exp(th[:, None] * self._x1[None, :]) * self._p
            return np.stack([om[:, r].sum(axis=1) for r in self._rows], axis=1)
        omc, s = x1_transform(self.dist, th)
        return (omc - 1j * s)[:, None] * self.p_y[None, :]

    def one_minus_phi(self, h: np.ndarray, item: np.ndarray, theta2: np.ndarray) -> np.ndarray:
        arg = theta2[:, None] * self.y[None, :]
        e = np.exp(1j * arg)
        return np.sum(h[item] * e + self.p_y * _one_minus_exp(arg), axis=1)

    def denominator(self, h, item, theta2, lam: float) -> np.ndarray:
        return (1.0 - lam) + lam * self.one_minus_phi(h, item, theta2)
