"""Small-angle behaviour of the increment law and the survival exponent.

The profile functions

    B(t) = 1 - E cos(t X1) - (E[sin(t X1) X2])^2 / (2 E X2^2)
                           + (E[(cos(t X1) - 1) X2])^2 / (2 E X2^2)
    D(t) = E sin(t X1) - E[sin(t X1) X2] E[(cos(t X1) - 1) X2] / E X2^2

behave like ``c1 t^alpha`` and ``c2 t^alpha`` as ``t -> 0+``. The exponent is

    beta = arcsin(c2 / (sqrt 2 sqrt(c1^2 + c2^2 + c1 sqrt(c1^2 + c2^2)))) / (alpha pi)

and ``P0(tau > n)`` decays like ``n^(beta - 1/4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import FitDegenerate, InsufficientData, OutOfRange
from .lattice_walk import IncrementDistribution, moments, trig_moments

DEFAULT_WINDOW = (1e-3, 1e-1)
DEFAULT_POINTS = 32
VANISHING = 1e-12
REGIME_GAP = 0.2
# corrections are modelled by integer powers at least this far above alpha
CORRECTION_GAP = 0.1
CORRECTION_TERMS = 3


@dataclass(frozen=True)
class ThetaProfile:
    grid: np.ndarray
    b_prof: np.ndarray
    d_prof: np.ndarray


@dataclass(frozen=True)
class TailFit:
    alpha_hat: float
    c1_hat: float
    c2_hat: float
    window: tuple[float, float]
    residual_rms: float
    reflected: bool = False
    regime: str = "shared"


@dataclass(frozen=True)
class ExponentReport:
    beta: float
    survival_exponent: float
    source: str
    fit: TailFit | None


def default_grid(window=DEFAULT_WINDOW, n=DEFAULT_POINTS) -> np.ndarray:
    return np.geomspace(window[0], window[1], n)


def bd_profile(dist: IncrementDistribution, grid=None) -> ThetaProfile:
    """Sample ``B`` and ``D`` on ``grid`` (default: 32 points in [1e-3, 1e-1])."""
    th = default_grid() if grid is None else np.asarray(grid, dtype=float)
    m2 = moments(dist).e_x2_sq
    tm = trig_moments(dist, th)
    b = tm.one_minus_cos1 - tm.sin_x2 ** 2 / (2.0 * m2) + tm.cos_x2 ** 2 / (2.0 * m2)
    d = tm.sin1 - tm.sin_x2 * tm.cos_x2 / m2
    return ThetaProfile(grid=th, b_prof=np.asarray(b, dtype=float), d_prof=np.asarray(d, dtype=float))


def heavy_tail_constants(alpha: float, c_minus: float) -> tuple[float, float]:
    """Leading constants of ``B`` and ``D`` for the heavy-tailed example."""
    if not 1.0 < alpha < 2.0:
        raise OutOfRange(f"alpha must lie in (1, 2), got {alpha!r}")
    base = c_minus * math.pi / (2.0 * math.gamma(alpha + 1.0))
    ang = (alpha - 1.0) * math.pi / 2.0
    return base / math.cos(ang), base / math.sin(ang)


def beta_from_constants(alpha: float, c1: float, c2: float) -> float:
    """The exponent ``beta`` from the (A1) constants."""
    if not (0.0 < alpha <= 2.0):
        raise OutOfRange(f"alpha must lie in (0, 2], got {alpha!r}")
    if c1 < 0 or c2 < 0 or not (c1 + c2 > 0):
        raise OutOfRange("need c1 >= 0, c2 >= 0 and c1 + c2 > 0")
    if c2 == 0.0:
        return 0.0
    if c1 == 0.0:
        return 1.0 / (4.0 * alpha)
    # divide through by c2 so the argument stays well scaled
    r = c1 / c2
    h = math.hypot(r, 1.0)
    arg = 1.0 / (math.sqrt(2.0) * math.sqrt(r * r + 1.0 + r * h))
    return math.asin(min(arg, 1.0)) / (alpha * math.pi)


def loglog_fit(xs, ys, window=None) -> tuple[float, float, float]:
    """Least squares line through ``(log x, log y)``: ``(slope, intercept, stderr)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    sel = np.ones(x.shape, dtype=bool)
    if window is not None:
        sel = (x >= window[0]) & (x <= window[1])
    x, y = x[sel], y[sel]
    if x.size < 8:
        raise InsufficientData(f"need at least 8 points in the window, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InsufficientData("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    a = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    resid = ly - a @ coef
    dof = max(lx.size - 2, 1)
    s2 = float(resid @ resid) / dof
    sxx = float(((lx - lx.mean()) ** 2).sum())
    stderr = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    return float(coef[0]), float(coef[1]), stderr


# ---------------------------------------------------------------- tail fitting

def _basis(theta: np.ndarray, alpha: float) -> np.ndarray:
    first = math.floor(alpha + CORRECTION_GAP) + 1
    if first - alpha < CORRECTION_GAP:
        first += 1
    cols = [theta ** alpha] + [theta ** float(j) for j in range(first, first + CORRECTION_TERMS)]
    return np.vstack(cols).T


def _curve_fit(theta, y, alpha):
    """Relative least squares of ``y`` on ``c t^alpha + corrections``."""
    a = _basis(theta, alpha) / np.abs(y)[:, None]
    rhs = np.sign(y)
    # scale columns for conditioning
    norms = np.linalg.norm(a, axis=0)
    coef, *_ = np.linalg.lstsq(a / norms, rhs, rcond=None)
    coef = coef / norms
    model = _basis(theta, alpha) @ coef
    return coef, model


def _objective(theta, curves, alpha):
    total = 0.0
    for y in curves:
        _, model = _curve_fit(theta, y, alpha)
        ratio = model / y
        if np.any(ratio <= 0):
            return math.inf
        total += float(np.sum(np.log(ratio) ** 2))
    return total


def _fit_alpha(theta, curves) -> float:
    grid = np.arange(0.02, 2.0 + 1e-9, 0.005)
    vals = np.array([_objective(theta, curves, a) for a in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda a: _objective(theta, curves, a), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    best = float(res.x) if res.fun <= vals[i] else float(grid[i])
    return min(best, 2.0)


def _rms(theta, curves, alpha):
    vals = _objective(theta, curves, alpha)
    return math.sqrt(vals / (len(curves) * theta.size))


def fit_tail(profile: ThetaProfile) -> TailFit:
    """Fit ``B ~ c1 t^alpha`` and ``D ~ c2 t^alpha`` on the profile grid.

    Each curve is fitted in relative (log) residuals against ``c t^alpha`` plus
    a few integer-power corrections above ``alpha``, which absorb the analytic
    part of the small-angle expansion.
    """
    theta = np.asarray(profile.grid, dtype=float)
    b = np.asarray(profile.b_prof, dtype=float)
    d = np.asarray(profile.d_prof, dtype=float)
    if theta.size < 16 or np.any(theta <= 0):
        raise InsufficientData("need at least 16 positive grid points")
    if math.log10(theta.max() / theta.min()) < 1.5:
        raise InsufficientData("grid must span at least 1.5 decades")
    window = (float(theta.min()), float(theta.max()))
    b_zero = np.max(np.abs(b)) < VANISHING
    d_zero = np.max(np.abs(d)) < VANISHING
    if b_zero and d_zero:
        raise FitDegenerate("both B and D vanish on the window")

    def single(y):
        if np.any(y == 0) or np.any(np.sign(y) != np.sign(y[0])):
            raise FitDegenerate("profile changes sign or touches zero in the window")
        a = _fit_alpha(theta, [y])
        coef, _ = _curve_fit(theta, y, a)
        return a, float(coef[0])

    if d_zero:
        a, c1 = single(b)
        return TailFit(a, c1, 0.0, window, _rms(theta, [b], a), False, "d_vanishes")
    if b_zero:
        a, c2 = single(d)
        return _signed(TailFit(a, 0.0, c2, window, _rms(theta, [d], a), False, "b_vanishes"))
    a_b, c1_b = single(b)
    a_d, c2_d = single(d)
    if abs(a_b - a_d) > REGIME_GAP:
        if a_b > a_d:
            # B is of higher order than D: the c1 = 0 regime
            return _signed(TailFit(a_d, 0.0, c2_d, window, _rms(theta, [d], a_d), False,
                                   "b_higher_order"))
        return TailFit(a_b, c1_b, 0.0, window, _rms(theta, [b], a_b), False, "d_higher_order")
    a = _fit_alpha(theta, [b, d])
    cb, _ = _curve_fit(theta, b, a)
    cd, _ = _curve_fit(theta, d, a)
    return _signed(TailFit(a, float(cb[0]), float(cd[0]), window, _rms(theta, [b, d], a),
                           False, "shared"))


def _signed(fit: TailFit) -> TailFit:
    if fit.c2_hat < 0:
        # x1 -> -x1 flips D and swaps the two half-lines
        return TailFit(fit.alpha_hat, fit.c1_hat, fit.c2_hat, fit.window, fit.residual_rms,
                       True, fit.regime)
    return fit


def signed_beta(fit: TailFit) -> float:
    """``beta`` of the fitted constants, negated for a reflected fit, so that
    ``1/4 - beta`` is always the exponent for ``V-``."""
    beta = beta_from_constants(fit.alpha_hat, fit.c1_hat, abs(fit.c2_hat))
    return -beta if fit.reflected else beta


def exponent_report(dist: IncrementDistribution, grid=None, source: str = "fitted") -> ExponentReport:
    """``beta`` and the survival exponent ``1/4 - beta`` for ``dist``.

    ``source="closed_form"`` uses the exact constants of the heavy-tailed law
    instead of a fit.
    """
    if source == "closed_form":
        if dist.kind != "heavy_tail_x1_product":
            raise OutOfRange("closed-form constants exist only for the heavy-tailed law")
        ht = dist.heavy_tail
        c1, c2 = heavy_tail_constants(ht.alpha, ht.c_minus)
        if ht.mirrored:
            c2 = -c2
        fit = _signed(TailFit(ht.alpha, c1, c2, (0.0, 0.0), 0.0, False, "closed_form"))
        beta = signed_beta(fit)
        return ExponentReport(beta, 0.25 - beta, "closed_form", fit)
    if source != "fitted":
        raise OutOfRange(f"unknown source {source!r}")
    fit = fit_tail(bd_profile(dist, grid))
    beta = signed_beta(fit)
    return ExponentReport(beta, 0.25 - beta, "fitted", fit)
