"""Increment laws on Z^2: construction, assumption checks, moments and sampling.

Three kinds of law are supported:

``table``
    an explicit finite joint table of atoms ``((x1, x2), p)``;
``product``
    independent finite marginals for ``X1`` and ``X2``;
``heavy_tail_x1_product``
    ``X1`` with ``P(X1 = 1) = c_plus`` and ``P(X1 = n) = c_minus |n|^(-1-alpha)``
    for ``n <= -1``, independent of a finite table for ``X2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DivergentMoment, MalformedDistribution, NotNormalized, OutOfRange
from .special import UnitCirclePolylog, hurwitz_tail, zeta

KINDS = ("table", "product", "heavy_tail_x1_product")
NORMALIZATION_TOL = 1e-9
MEAN_TOL = 1e-10


class LatticePoint(NamedTuple):
    x1: int
    x2: int


@dataclass(frozen=True)
class HeavyTail:
    """Parameters of the heavy-tailed first coordinate.

    With ``mirrored`` the law of ``-X1`` is used (heavy tail on the right).
    """

    alpha: float
    c_minus: float
    c_plus: float
    head_size: int = 4096
    mirrored: bool = False


@dataclass(frozen=True)
class IncrementDistribution:
    """Law of one increment ``X = (X1, X2)``.

    Attributes
    ----------
    kind : str
        One of ``table``, ``product``, ``heavy_tail_x1_product``.
    atoms : tuple
        Joint atoms ``(LatticePoint, p)``. For ``product`` these are the
        product atoms; for the heavy-tail kind they are empty.
    heavy_tail : HeavyTail or None
        Parameters of the heavy-tailed ``X1`` law.
    delta : float
        Exponent used by the moment conditions.
    x1_atoms, x2_atoms : tuple
        Marginal tables ``(value, p)`` for the product kinds.
    exact : tuple of Fraction or None
        Exact probabilities aligned with ``atoms`` when the input was rational.
    """

    kind: str
    atoms: tuple = ()
    heavy_tail: HeavyTail | None = None
    delta: float = 0.5
    x1_atoms: tuple = ()
    x2_atoms: tuple = ()
    exact: tuple | None = field(default=None, compare=False)

    # flat arrays for vectorized sums over the joint table
    def joint_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.kind == "heavy_tail_x1_product":
            raise MalformedDistribution("heavy-tail law has no finite joint table")
        x1 = np.array([a[0].x1 for a in self.atoms], dtype=np.int64)
        x2 = np.array([a[0].x2 for a in self.atoms], dtype=np.int64)
        p = np.array([a[1] for a in self.atoms], dtype=float)
        return x1, x2, p

    def x2_marginal(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct values of ``X2`` and their probabilities."""
        if self.kind == "table":
            acc: dict[int, float] = {}
            for pt, p in self.atoms:
                acc[pt.x2] = acc.get(pt.x2, 0.0) + p
            items = sorted(acc.items())
        else:
            items = sorted(self.x2_atoms)
        return (np.array([v for v, _ in items], dtype=np.int64),
                np.array([p for _, p in items], dtype=float))

    def support_bound_x2(self) -> int:
        vals, probs = self.x2_marginal()
        return int(np.max(np.abs(vals[probs > 0])))


@dataclass(frozen=True)
class MomentSet:
    e_x2: float
    e_x2_sq: float
    e_abs_x1_delta: float
    e_abs_x2_2plus_delta: float
    delta: float
    delta_hat: float


@dataclass(frozen=True)
class TrigMoments:
    """Trigonometric moments of ``X1`` at ``theta1``.

    ``one_minus_cos1`` holds ``1 - E cos(theta1 X1)`` computed without
    cancellation; the remaining fields follow the usual notation. Fields are
    floats for scalar input and arrays for array input.
    """

    theta1: float | np.ndarray
    cos1: float | np.ndarray
    sin1: float | np.ndarray
    sin_x2: float | np.ndarray
    cos_x2: float | np.ndarray
    one_minus_cos1: float | np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    normalized: bool
    mean_zero_x2: bool
    aperiodic: bool
    moments_finite: bool
    elementary_divisors: tuple[int, int] = (0, 0)
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.normalized and self.mean_zero_x2 and self.aperiodic and self.moments_finite


# ---------------------------------------------------------------- construction

def parse_probability(p) -> tuple[float, Fraction | None]:
    """Accept floats, ints, ``Fraction`` or ``"num/den"`` strings."""
    if isinstance(p, Fraction):
        return float(p), p
    if isinstance(p, str):
        try:
            fr = Fraction(p.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedDistribution(f"cannot parse probability {p!r}") from exc
        return float(fr), fr
    if isinstance(p, bool):
        raise MalformedDistribution(f"invalid probability {p!r}")
    if isinstance(p, int):
        return float(p), Fraction(p)
    if isinstance(p, float):
        if not math.isfinite(p):
            raise MalformedDistribution(f"non-finite probability {p!r}")
        return p, None
    raise MalformedDistribution(f"invalid probability {p!r}")


def _merge(pairs):
    """Merge repeated keys, keeping exact sums when every entry is exact."""
    acc: dict = {}
    exact: dict = {}
    all_exact = True
    for key, (pf, pe) in pairs:
        acc[key] = acc.get(key, 0.0) + pf
        if pe is None:
            all_exact = False
        else:
            exact[key] = exact.get(key, Fraction(0)) + pe
    keys = sorted(acc)
    if all_exact:
        return keys, [float(exact[k]) for k in keys], [exact[k] for k in keys]
    return keys, [acc[k] for k in keys], None


def table(atoms: Sequence, delta: float = 0.5) -> IncrementDistribution:
    """Joint table from ``(x1, x2, p)`` triples; ``p`` may be ``"num/den"``."""
    if len(atoms) == 0:
        raise MalformedDistribution("empty support")
    pairs = []
    for item in atoms:
        if len(item) != 3:
            raise MalformedDistribution(f"atom must be (x1, x2, p), got {item!r}")
        x1, x2, p = item
        if int(x1) != x1 or int(x2) != x2:
            raise MalformedDistribution(f"non-integer atom {item!r}")
        pairs.append(((int(x1), int(x2)), parse_probability(p)))
    keys, probs, exact = _merge(pairs)
    dist = IncrementDistribution(
        kind="table",
        atoms=tuple((LatticePoint(*k), p) for k, p in zip(keys, probs)),
        delta=delta,
        exact=tuple(exact) if exact is not None else None,
    )
    _check_structure(dist)
    return dist


def _marginal(items, name):
    if len(items) == 0:
        raise MalformedDistribution(f"empty support for {name}")
    pairs = []
    for item in items:
        if len(item) != 2:
            raise MalformedDistribution(f"{name} atom must be (value, p), got {item!r}")
        v, p = item
        if int(v) != v:
            raise MalformedDistribution(f"non-integer value {v!r} in {name}")
        pairs.append((int(v), parse_probability(p)))
    return _merge(pairs)


def product(x1_atoms: Sequence, x2_atoms: Sequence, delta: float = 0.5) -> IncrementDistribution:
    """Independent coordinates with finite marginal tables."""
    k1, p1, e1 = _marginal(x1_atoms, "x1")
    k2, p2, e2 = _marginal(x2_atoms, "x2")
    atoms = []
    exact = [] if (e1 is not None and e2 is not None) else None
    for i, a in enumerate(k1):
        for j, b in enumerate(k2):
            atoms.append((LatticePoint(a, b), p1[i] * p2[j]))
            if exact is not None:
                exact.append(e1[i] * e2[j])
    dist = IncrementDistribution(
        kind="product",
        atoms=tuple(atoms),
        delta=delta,
        x1_atoms=tuple(zip(k1, p1)),
        x2_atoms=tuple(zip(k2, p2)),
        exact=tuple(exact) if exact is not None else None,
    )
    _check_structure(dist)
    return dist


def heavy_tail(alpha: float, x2_atoms: Sequence | None = None, head_size: int = 4096,
               delta: float = 0.5, mirrored: bool = False) -> IncrementDistribution:
    """Heavy-tailed ``X1`` (mean zero, ``P(X1 = n) ~ |n|^(-1-alpha)`` on the left,
    on the right if ``mirrored``) independent of ``X2``; ``X2`` defaults to
    uniform on ``{-1, +1}``."""
    c_minus, c_plus = solve_heavy_tail(alpha)
    if x2_atoms is None:
        x2_atoms = ((-1, "1/2"), (1, "1/2"))
    k2, p2, _ = _marginal(x2_atoms, "x2")
    if head_size < 1:
        raise MalformedDistribution("head_size must be positive")
    dist = IncrementDistribution(
        kind="heavy_tail_x1_product",
        heavy_tail=HeavyTail(float(alpha), c_minus, c_plus, int(head_size), bool(mirrored)),
        delta=delta,
        x2_atoms=tuple(zip(k2, p2)),
    )
    _check_structure(dist)
    return dist


def simple_walk() -> IncrementDistribution:
    """Nearest-neighbour walk on Z^2."""
    q = "1/4"
    return table([(1, 0, q), (-1, 0, q), (0, 1, q), (0, -1, q)])


def unit_drift(x2_atoms: Sequence | None = None) -> IncrementDistribution:
    """``X1 = 1`` always, independent of ``X2`` (default uniform on ``{-1, +1}``)."""
    if x2_atoms is None:
        x2_atoms = ((-1, "1/2"), (1, "1/2"))
    return product([(1, 1)], x2_atoms)


def _check_structure(dist: IncrementDistribution) -> None:
    if dist.kind not in KINDS:
        raise MalformedDistribution(f"unknown kind {dist.kind!r}")
    if not 0.0 < dist.delta:
        raise MalformedDistribution("delta must be positive")
    groups = [dist.atoms] if dist.kind != "heavy_tail_x1_product" else []
    groups += [dist.x2_atoms] if dist.kind != "table" else []
    for g in groups:
        probs = [a[1] for a in g]
        if not probs:
            raise MalformedDistribution("empty support")
        if any(p < 0 for p in probs):
            raise MalformedDistribution("negative probability")
        if all(p == 0 for p in probs):
            raise MalformedDistribution("empty support")
        total = math.fsum(probs)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(f"probabilities sum to {total!r}")


# ------------------------------------------------------------------ heavy tail

def solve_heavy_tail(alpha: float) -> tuple[float, float]:
    """Return ``(c_minus, c_plus)`` making the heavy-tailed law a mean-zero
    probability distribution."""
    if not (1.0 < alpha < 2.0):
        raise OutOfRange(f"alpha must lie in (1, 2), got {alpha!r}")
    z1 = zeta(1.0 + alpha)
    z0 = zeta(alpha)
    c_minus = 1.0 / (z1 + z0)
    return c_minus, c_minus * z0


@lru_cache(maxsize=32)
def _polylog(order: float) -> UnitCirclePolylog:
    return UnitCirclePolylog(order)


def _heavy_x1_transform(ht: HeavyTail, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(1 - E cos(theta X1), E sin(theta X1))`` for the heavy-tailed law."""
    th = np.asarray(theta, dtype=float)
    # reduce to [-pi, pi]; the law lives on Z
    th = np.where(np.abs(th) > np.pi, np.remainder(th + np.pi, 2.0 * np.pi) - np.pi, th)
    li = _polylog(1.0 + ht.alpha)(-th, drop_constant=True)
    # negative atoms contribute c_minus * Li_s(e^{-i theta}); adding the
    # dropped zeta(s) back cancels against the mass c_minus * zeta(s)
    one_minus_cos = 2.0 * ht.c_plus * np.sin(th / 2.0) ** 2 - ht.c_minus * li.real
    sin1 = ht.c_plus * np.sin(th) + ht.c_minus * li.imag
    return one_minus_cos, -sin1 if ht.mirrored else sin1


def _x1_table(dist: IncrementDistribution) -> tuple[np.ndarray, np.ndarray]:
    return (np.array([v for v, _ in dist.x1_atoms], dtype=float),
            np.array([p for _, p in dist.x1_atoms], dtype=float))


def x1_transform(dist: IncrementDistribution, theta) -> tuple[np.ndarray, np.ndarray]:
    """``(1 - E cos(theta X1), E sin(theta X1))`` for any kind."""
    th = np.asarray(theta, dtype=float)
    if dist.kind == "heavy_tail_x1_product":
        return _heavy_x1_transform(dist.heavy_tail, th)
    if dist.kind == "product":
        v, p = _x1_table(dist)
    else:
        x1, _, p = dist.joint_arrays()
        v = x1.astype(float)
    arg = th[..., None] * v
    return (2.0 * np.sin(arg / 2.0) ** 2) @ p, np.sin(arg) @ p


# -------------------------------------------------------------------- moments

def _x2_moment(dist: IncrementDistribution, fn) -> float:
    vals, probs = dist.x2_marginal()
    return float(np.dot(fn(vals.astype(float)), probs))


def moments(dist: IncrementDistribution, delta: float | None = None) -> MomentSet:
    """Moments entering the standing assumptions."""
    d = dist.delta if delta is None else float(delta)
    e_x2 = _x2_moment(dist, lambda v: v)
    e_x2_sq = _x2_moment(dist, lambda v: v * v)
    e_x2_abs = _x2_moment(dist, lambda v: np.abs(v) ** (2.0 + d))
    if dist.kind == "heavy_tail_x1_product":
        ht = dist.heavy_tail
        if d >= ht.alpha:
            raise DivergentMoment(
                f"E|X1|^{d} diverges: the tail sum converges only for exponent < alpha={ht.alpha}")
        e_x1 = ht.c_plus + ht.c_minus * zeta(1.0 + ht.alpha - d)
    elif dist.kind == "product":
        v, p = _x1_table(dist)
        e_x1 = float(np.dot(np.abs(v) ** d, p))
    else:
        x1, _, p = dist.joint_arrays()
        e_x1 = float(np.dot(np.abs(x1.astype(float)) ** d, p))
    return MomentSet(e_x2=e_x2, e_x2_sq=e_x2_sq, e_abs_x1_delta=e_x1,
                     e_abs_x2_2plus_delta=e_x2_abs, delta=d, delta_hat=d * d / (2.0 + d))


def x2_char(dist: IncrementDistribution, theta2) -> np.ndarray:
    """Characteristic function of the marginal of ``X2``."""
    vals, probs = dist.x2_marginal()
    th = np.asarray(theta2, dtype=float)
    return np.exp(1j * th[..., None] * vals.astype(float)) @ probs


def char_fn(dist: IncrementDistribution, theta) -> complex | np.ndarray:
    """``E exp(i theta . X)``; ``theta`` is a pair (arrays broadcast)."""
    t1 = np.asarray(theta[0], dtype=float)
    t2 = np.asarray(theta[1], dtype=float)
    if dist.kind == "table":
        x1, x2, p = dist.joint_arrays()
        t1b, t2b = np.broadcast_arrays(t1, t2)
        arg = t1b[..., None] * x1 + t2b[..., None] * x2
        out = np.exp(1j * arg) @ p
    else:
        omc, s = x1_transform(dist, t1)
        out = ((1.0 - omc) + 1j * s) * x2_char(dist, t2)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def trig_moments(dist: IncrementDistribution, theta1) -> TrigMoments:
    """Trigonometric moments of ``X1`` and their products with ``X2``."""
    th = np.asarray(theta1, dtype=float)
    if dist.kind == "table":
        x1, x2, p = dist.joint_arrays()
        arg = th[..., None] * x1.astype(float)
        half = 2.0 * np.sin(arg / 2.0) ** 2
        omc = half @ p
        sin1 = np.sin(arg) @ p
        sin_x2 = np.sin(arg) @ (p * x2)
        cos_x2 = -(half @ (p * x2))
    else:
        omc, sin1 = x1_transform(dist, th)
        m1 = _x2_moment(dist, lambda v: v)
        sin_x2 = sin1 * m1
        cos_x2 = -omc * m1
    out = dict(theta1=th, cos1=1.0 - omc, sin1=sin1, sin_x2=sin_x2, cos_x2=cos_x2,
               one_minus_cos1=omc)
    if th.ndim == 0:
        out = {k: float(v) for k, v in out.items()}
    return TrigMoments(**out)


# ----------------------------------------------------------------- validation

def support_vectors(dist: IncrementDistribution, heavy_head: int = 8) -> list[tuple[int, int]]:
    """Support points; for the heavy tail a finite subset that generates the
    same subgroup as the full support."""
    if dist.kind == "heavy_tail_x1_product":
        vals, probs = dist.x2_marginal()
        sign = -1 if dist.heavy_tail.mirrored else 1
        xs = [sign] + [-sign * n for n in range(1, heavy_head + 1)]
        return [(a, int(b)) for a in xs for b, q in zip(vals, probs) if q > 0]
    return [(pt.x1, pt.x2) for pt, p in dist.atoms if p > 0]


def elementary_divisors(vectors: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Elementary divisors ``(d1, d2)`` of the integer matrix with the given
    columns; ``d2 = 0`` when the vectors span a rank-one lattice."""
    vecs = sorted(set((int(a), int(b)) for a, b in vectors))
    d1 = 0
    for a, b in vecs:
        d1 = math.gcd(d1, abs(a), abs(b))
    g = 0
    # gcd of all 2x2 minors is the second determinantal divisor
    for i in range(len(vecs)):
        a, b = vecs[i]
        for j in range(i + 1, len(vecs)):
            c, d = vecs[j]
            g = math.gcd(g, abs(a * d - b * c))
            if g == 1:
                break
        if g == 1:
            break
    if d1 == 0 or g == 0:
        return d1, 0
    return d1, g // d1


def validate(dist: IncrementDistribution) -> ValidationReport:
    """Check normalization, ``E X2 = 0``, aperiodicity and the moment conditions."""
    _check_structure(dist)
    msgs = []
    ms = None
    moments_ok = True
    try:
        ms = moments(dist)
    except DivergentMoment as exc:
        moments_ok = False
        msgs.append(f"condition (c) violated: {exc}")
    e_x2 = ms.e_x2 if ms is not None else _x2_moment(dist, lambda v: v)
    mean_ok = abs(e_x2) <= MEAN_TOL
    if not mean_ok:
        msgs.append(f"condition (b) violated: E[X2] = {e_x2!r}")
    if ms is not None and not ms.e_x2_sq > 0:
        mean_ok = False
        msgs.append("condition (b) violated: X2 is degenerate at 0")
    divs = elementary_divisors(support_vectors(dist))
    aper = divs == (1, 1)
    if not aper:
        msgs.append(f"condition (a) violated: support generates a proper subgroup "
                    f"(elementary divisors {divs})")
    return ValidationReport(normalized=True, mean_zero_x2=mean_ok, aperiodic=aper,
                            moments_finite=moments_ok, elementary_divisors=divs,
                            messages=tuple(msgs))


# -------------------------------------------------------------------- sampling

@dataclass(frozen=True)
class HeavyTailSampler:
    """Tables for exact inversion of the heavy-tailed ``X1`` law."""

    s: float
    c_plus: float
    head_cum: np.ndarray  # P(|X1| <= n | X1 < 0) for n = 1..head_size
    tail_start: int
    tail_mass: float  # sum_{n >= tail_start} n^-s


@lru_cache(maxsize=32)
def heavy_tail_sampler(ht: HeavyTail) -> HeavyTailSampler:
    s = 1.0 + ht.alpha
    n = np.arange(1, ht.head_size + 1, dtype=float)
    z = zeta(s)
    cum = np.cumsum(n ** -s) / z
    return HeavyTailSampler(s=s, c_plus=ht.c_plus, head_cum=cum,
                            tail_start=ht.head_size + 1,
                            tail_mass=hurwitz_tail(s, ht.head_size + 1))


def _tail_sum_array(s: float, n: np.ndarray) -> np.ndarray:
    # Euler-Maclaurin for sum_{m >= n} m^-s, valid for n in the thousands
    return (n ** (1.0 - s) / (s - 1.0) + 0.5 * n ** -s + s / 12.0 * n ** (-s - 1.0)
            - s * (s + 1.0) * (s + 2.0) / 720.0 * n ** (-s - 3.0))


def invert_heavy_tail(smp: HeavyTailSampler, u: np.ndarray) -> np.ndarray:
    """Map ``u`` in ``(0, 1]`` to ``n >= tail_start`` with
    ``P(N >= n | N >= tail_start) >= u > P(N >= n + 1 | N >= tail_start)``."""
    target = np.asarray(u, dtype=float) * smp.tail_mass
    s = smp.s
    guess = ((s - 1.0) * target) ** (-1.0 / (s - 1.0))
    lo = np.full(target.shape, float(smp.tail_start))
    hi = np.maximum(2.0 * guess, lo + 1.0)
    for _ in range(200):
        bad = _tail_sum_array(s, hi) >= target
        if not bad.any():
            break
        hi = np.where(bad, 2.0 * hi, hi)
    # invariant: T(lo) >= target > T(hi)
    while True:
        gap = hi - lo > 1.0
        if not gap.any():
            break
        mid = np.floor((lo + hi) / 2.0)
        ok = _tail_sum_array(s, mid) >= target
        lo = np.where(gap & ok, mid, lo)
        hi = np.where(gap & ~ok, mid, hi)
    return lo.astype(np.int64)


def sample_x1_heavy(ht: HeavyTail, rng: np.random.Generator, size: int) -> np.ndarray:
    smp = heavy_tail_sampler(ht)
    u = rng.random(size)
    out = np.ones(size, dtype=np.int64)
    neg = u >= smp.c_plus
    v = (u[neg] - smp.c_plus) / (1.0 - smp.c_plus)
    idx = np.searchsorted(smp.head_cum, v, side="right")
    mag = (idx + 1).astype(np.int64)
    in_tail = idx >= smp.head_cum.size
    if in_tail.any():
        mag[in_tail] = invert_heavy_tail(smp, 1.0 - rng.random(int(in_tail.sum())))
    out[neg] = -mag
    return -out if ht.mirrored else out


def _sample_table(vals: np.ndarray, probs: np.ndarray, rng, size: int) -> np.ndarray:
    cum = np.cumsum(probs)
    cum /= cum[-1]
    idx = np.searchsorted(cum, rng.random(size), side="right")
    return vals[np.minimum(idx, len(vals) - 1)]


def sample_increments(dist: IncrementDistribution, rng: np.random.Generator,
                      size: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` i.i.d. increments; returns arrays ``(x1, x2)``."""
    if dist.kind == "heavy_tail_x1_product":
        x1 = sample_x1_heavy(dist.heavy_tail, rng, size)
        v2, p2 = dist.x2_marginal()
        return x1, _sample_table(v2, p2, rng, size)
    x1, x2, p = dist.joint_arrays()
    idx = _sample_table(np.arange(len(p)), p, rng, size)
    return x1[idx], x2[idx]


def sample_increment(dist: IncrementDistribution, rng_state: np.random.Generator) -> LatticePoint:
    """Draw one increment, advancing ``rng_state``."""
    x1, x2 = sample_increments(dist, rng_state, 1)
    return LatticePoint(int(x1[0]), int(x2[0]))


def heavy_tail_cdf(ht: HeavyTail, n) -> np.ndarray:
    """``P(X1 <= n)`` for the heavy-tailed law, integer ``n``."""
    n = np.asarray(n, dtype=np.int64)
    if ht.mirrored:
        # P(-Y <= n) = 1 - P(Y <= -n - 1)
        return 1.0 - heavy_tail_cdf(replace(ht, mirrored=False), -n - 1)
    s = 1.0 + ht.alpha
    out = np.empty(n.shape, dtype=float)
    flat_n = n.ravel()
    flat = out.ravel()
    for i, k in enumerate(flat_n):
        if k >= 1:
            flat[i] = 1.0
        elif k >= 0:
            flat[i] = 1.0 - ht.c_plus
        else:
            flat[i] = ht.c_minus * hurwitz_tail(s, float(-k))
    return out
