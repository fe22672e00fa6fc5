"""Returns to the line ``x2 = 0`` and the survival factors built from them.

With ``G(t1) = (1 / 2 pi) int dt2 / (1 - lambda phi(t1, t2))`` and
``z = 1 - 1 / G``, the ``k``-th return satisfies

    E0[lambda^eta(k); zeta(k) = l] = (1 / 2 pi) int e^{-i t1 l} z(t1)^k dt1.

The ``k``-sums defining the factors resum to ``Log G``: writing ``ell_l`` for
the Fourier coefficients of ``Log G``,

    log c = -ell_0,
    log f_inf(1) = (ell_0 - log G(0)) / 2 + (1 / 4 pi) int cot(t / 2) Im Log G(t) dt,
    log f_0(1)   = (ell_0 - log G(0)) / 2 - (1 / 4 pi) int cot(t / 2) Im Log G(t) dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import OutOfRange, TruncationNotConverged
from ..lattice_walk import IncrementDistribution
from ..quadrature import QuadratureSpec, integrate_batch, panel_nodes, split_panels
from .characteristic import LineKernel
from .halfplane import inner_integrals

K_TAIL_LIMIT = 1e-4
DEFAULT_K_MAX = 64
DEFAULT_L_MAX = 512
GEOMETRIC_LEVELS = 44
ANGLE_FLOOR = 1e-9


@dataclass(frozen=True)
class SurvivalFactors:
    """``c(lambda)``, ``f_inf(1; lambda)`` and ``f_0(1; lambda)``.

    ``k_max`` and ``l_max`` are ``None`` when the corresponding sum was
    resummed exactly rather than truncated.
    """

    lam: float
    c_lam: float
    f_inf: float
    f_zero: float
    k_max: int | None
    l_max: int | None
    truncation_bound: float

    @property
    def p_v_minus(self) -> float:
        """``P0(T_lambda < tau_{V-}) = c f_inf``."""
        return self.c_lam * self.f_inf

    @property
    def p_v_plus(self) -> float:
        """``P0(T_lambda < tau_{V+}) = c f_0``."""
        return self.c_lam * self.f_zero

    @property
    def log_ratio(self) -> float:
        return math.log(self.f_inf) - math.log(self.f_zero)


class LineTransform:
    """Memoized ``G(t1)`` for one distribution and ``lambda``.

    Uses ``G(-t) = conj G(t)``, so only ``|t1|`` is ever integrated.
    """

    def __init__(self, dist: IncrementDistribution, lam: float, quad: QuadratureSpec = QuadratureSpec()):
        if not 0.0 < lam < 1.0:
            raise OutOfRange("lambda must lie in (0, 1)")
        self.dist = dist
        self.lam = float(lam)
        self.quad = quad
        self.kernel = LineKernel(dist)
        self._memo: dict[float, complex] = {}

    def __call__(self, theta1) -> np.ndarray:
        th = np.asarray(theta1, dtype=float)
        flat = th.ravel()
        mag = np.abs(flat)
        missing = sorted({float(v) for v in mag if float(v) not in self._memo})
        if missing:
            vals, _ = inner_integrals(self.dist, np.array(missing), self.lam, self.quad, self.kernel)
            self._memo.update(zip(missing, vals.tolist()))
        out = np.array([self._memo[float(v)] for v in mag], dtype=complex)
        out = np.where(flat < 0, np.conj(out), out)
        return out.reshape(th.shape)

    def z(self, theta1) -> np.ndarray:
        return 1.0 - 1.0 / self(theta1)

    @property
    def g_zero(self) -> float:
        return float(self(np.array([0.0]))[0].real)


def _half_edges(extra: int = 8) -> np.ndarray:
    geo = math.pi * 2.0 ** -np.arange(GEOMETRIC_LEVELS, 0, -1)
    uni = np.linspace(0.0, math.pi, extra + 1)[1:]
    return np.unique(np.concatenate([[0.0], geo, uni]))


def _symmetric_edges(extra: int) -> np.ndarray:
    half = _half_edges(extra)
    return np.concatenate([-half[::-1], half[1:]])


_TRANSFORMS: dict = {}


def _transform(dist, lam, quad) -> LineTransform:
    key = (id(dist), float(lam), quad)
    cached = _TRANSFORMS.get(key)
    if cached is None or cached.dist is not dist:
        if len(_TRANSFORMS) > 32:
            _TRANSFORMS.clear()
        cached = _TRANSFORMS[key] = LineTransform(dist, lam, quad)
    return cached


def ladder_transform(dist: IncrementDistribution, k: int, l: int, lam: float,
                     quad: QuadratureSpec = QuadratureSpec(), return_residual: bool = False):
    """``E0[lambda^eta(k); zeta(k) = l]`` by nested adaptive quadrature.

    Outer nodes are memoized per ``(dist, lambda, quad)``, so sweeps over
    ``k`` and ``l`` reuse the inner integrals. With ``return_residual`` the
    imaginary part of the outer integral is returned as well.
    """
    if k < 1:
        raise OutOfRange("k must be at least 1")
    tr = _transform(dist, lam, quad)
    edges = _symmetric_edges(max(8, 2 * abs(int(l))))[None, :]

    def f(_, t):
        return np.exp(-1j * t * l) * tr.z(t) ** k / (2.0 * math.pi)

    val, _ = integrate_batch(f, edges, quad)
    out = float(val[0].real)
    return (out, abs(float(val[0].imag))) if return_residual else out


def line_survival(dist: IncrementDistribution, lam: float, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """``P0(T_lambda < tau_U) = 1 / G2(lambda)`` with ``G2`` the ``X2``-marginal Green function."""
    if not 0.0 <= lam < 1.0:
        raise OutOfRange("lambda must lie in [0, 1)")
    if lam == 0.0:
        return 1.0
    vals, _ = inner_integrals(dist, np.array([0.0]), lam, quad)
    return float(1.0 / vals[0].real)


def angle_cutoff(tr: LineTransform) -> float:
    """Largest ``t`` on a dyadic grid below which ``|arg G| <= ANGLE_FLOOR``.

    Under it the numerical angle is dominated by roundoff. Since the angle
    vanishes at least linearly, ``int_0^t cot(u / 2) |arg G| du`` is at most
    ``2 ANGLE_FLOOR``.
    """
    grid = math.pi * 2.0 ** -np.arange(60, 0, -1)
    small = np.abs(np.angle(tr(grid))) <= ANGLE_FLOOR
    if small.all():
        return math.pi
    first_big = int(np.argmin(small))
    return float(grid[first_big - 1]) if first_big > 0 else 0.0


def _resummed(tr: LineTransform, quad: QuadratureSpec):
    """``(ell_0, T, error, panels)`` with ``T = (1 / 2 pi) int cot(t / 2) Im Log G``."""
    full = _half_edges()
    low = angle_cutoff(tr)
    cut = np.concatenate([[low], full[full > low]])
    cut = np.concatenate([np.full(full.size - cut.size, low), cut])
    edges = np.vstack([full, cut])

    def f(item, t):
        lg = np.log(tr(t))
        cot = np.where(t > 0, 1.0 / np.tan(0.5 * np.where(t > 0, t, 1.0)), 0.0)
        return np.where(item == 0, lg.real, cot * lg.imag) / math.pi

    val, err, panels = integrate_batch(f, edges, quad, return_panels=True)
    owner, a, b = panels
    sel = owner == 0
    bound = float(err.sum()) + (2.0 * ANGLE_FLOOR if low < math.pi else 0.0)
    return float(val[0].real), float(val[1].real), bound, (owner[sel], a[sel], b[sel])


def survival_factors(dist: IncrementDistribution, lam: float, k_max: int | None = DEFAULT_K_MAX,
                     l_max: int | None = DEFAULT_L_MAX,
                     quad: QuadratureSpec = QuadratureSpec()) -> SurvivalFactors:
    """The factors of ``P0(T_lambda < tau_{V-})`` and ``P0(T_lambda < tau_{V+})``.

    Finite ``k_max`` and ``l_max`` truncate the defining sums; the bound
    covers the ``k``-tail rigorously (``sum_{k > k_max} r^k / k`` with
    ``r = 1 - 1 / G2``) and the ``l``-tail by extrapolating the last included
    terms (geometric or power law, whichever is larger). Passing ``None`` for both resums the series exactly,
    which is required as ``lambda -> 1``.
    """
    tr = _transform(dist, lam, quad)
    log_g0 = math.log(tr.g_zero)
    ell0, t_int, qerr, panels = _resummed(tr, quad)
    if k_max is None and l_max is None:
        base = 0.5 * (ell0 - log_g0)
        return _pack(lam, -ell0, base + 0.5 * t_int, base - 0.5 * t_int, None, None, qerr)
    if k_max is None or l_max is None:
        raise OutOfRange("k_max and l_max must both be given or both be None")
    if k_max < 1 or l_max < 1:
        raise OutOfRange("k_max and l_max must be positive")
    r = 1.0 - 1.0 / tr.g_zero
    k_tail = r ** (k_max + 1) / ((k_max + 1) * (1.0 - r))
    if k_tail > K_TAIL_LIMIT:
        raise TruncationNotConverged(
            f"k-tail {k_tail:.3g} exceeds {K_TAIL_LIMIT:g}; raise k_max or resum (k_max=None)")
    _, a, b = panels
    a, b = split_panels(a, b, 4.0 * math.pi / max(l_max, 8))
    nodes, weights = panel_nodes(a, b, quad.order)
    z = tr.z(nodes)
    ks = np.arange(1, k_max + 1)
    powers = z[None, :] ** ks[:, None]
    ls = np.arange(-l_max, l_max + 1)
    # E[k, l] = (1 / pi) int_0^pi Re(e^{-i t l} z^k) dt
    phase = np.exp(-1j * ls[:, None] * nodes[None, :]) * weights[None, :]
    moments_kl = (powers @ phase.T).real / math.pi
    m_l = (moments_kl / ks[:, None]).sum(axis=0)
    centre = l_max
    log_c = -m_l[centre]
    log_f_inf = -m_l[:centre].sum()
    log_f_zero = -m_l[centre + 1:].sum()
    l_tail = max(_geometric_tail(m_l[0], m_l[1], l_max), _geometric_tail(m_l[-1], m_l[-2], l_max))
    return _pack(lam, log_c, log_f_inf, log_f_zero, k_max, l_max, k_tail + l_tail + qerr)


def _geometric_tail(last: float, prev: float, l_max: int) -> float:
    """Tail beyond ``l_max`` extrapolated from the last two terms.

    Both a geometric and a power-law continuation are fitted and the larger
    tail is reported; heavy-tailed walks decay like ``|l|^(-1-alpha)``, which
    the geometric model alone underestimates.
    """
    last, prev = abs(last), abs(prev)
    if last == 0.0:
        return 0.0
    q = last / prev if prev > 0 else 1.0
    if not q < 0.999:
        return last * l_max
    geometric = last * q / (1.0 - q)
    # local exponent p from (l_max - 1, prev) and (l_max, last); the sum of
    # last (l_max / l)^p over l > l_max is at most last l_max / (p - 1)
    p = math.log(1.0 / q) / math.log(l_max / (l_max - 1.0))
    power = last * l_max / (p - 1.0) if p > 1.0 + 1e-3 else last * l_max
    return max(geometric, power)


def _pack(lam, log_c, log_f_inf, log_f_zero, k_max, l_max, bound) -> SurvivalFactors:
    return SurvivalFactors(lam=float(lam), c_lam=math.exp(log_c), f_inf=math.exp(log_f_inf),
                           f_zero=math.exp(log_f_zero), k_max=k_max, l_max=l_max,
                           truncation_bound=float(bound))
