"""Parallel Monte Carlo estimates of survival and ladder quantities.

Paths are split over a fixed number of streams; stream ``i`` draws from a
Philox generator keyed by ``SeedSequence([seed, i])``. Counts are merged by
integer addition, so results depend only on ``(seed, streams, n_paths, dist)``
and not on how many threads execute the streams.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ..errors import HorizonTooShort, MalformedDistribution, OutOfRange
from ..lattice_walk import IncrementDistribution
from . import _kernels as K
from .encoding import encode

TARGETS = {
    "V_minus": K.T_V_MINUS,
    "V_plus": K.T_V_PLUS,
    "V_plus_punctured": K.T_V_PLUS_PUNCTURED,
    "U": K.T_U,
}
Z99 = 2.5758293035489004
THREADS_ENV = "HALFLINE_WALK_THREADS"


def default_checkpoints(horizon: int) -> tuple[int, ...]:
    """Powers of two up to ``horizon``, plus ``horizon`` itself."""
    pts = []
    n = 1
    while n < horizon:
        pts.append(n)
        n *= 2
    pts.append(int(horizon))
    return tuple(pts)


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run description.

    ``threads`` only controls execution; it never changes results.
    """

    n_paths: int
    horizon: int
    seed: int = 0
    target: str = "V_minus"
    checkpoints: tuple[int, ...] | None = None
    streams: int = 64
    threads: int | None = None

    def __post_init__(self):
        if self.n_paths < 1 or self.horizon < 1 or self.streams < 1:
            raise OutOfRange("n_paths, horizon and streams must be positive")
        if self.target not in TARGETS:
            raise OutOfRange(f"unknown target {self.target!r}; choose from {sorted(TARGETS)}")
        if self.checkpoints is not None:
            cps = tuple(int(c) for c in self.checkpoints)
            if list(cps) != sorted(cps) or cps[0] < 1 or cps[-1] > self.horizon:
                raise OutOfRange("checkpoints must be sorted within [1, horizon]")
            object.__setattr__(self, "checkpoints", cps)

    def resolved_checkpoints(self) -> tuple[int, ...]:
        return self.checkpoints if self.checkpoints is not None else default_checkpoints(self.horizon)


@dataclass(frozen=True)
class SurvivalCurve:
    n_values: list
    survivors: list
    p_hat: list
    ci_half_width: list
    n_paths: int
    target: str = "V_minus"


@dataclass(frozen=True)
class GeometricEstimate:
    lam: float
    p_hat: float
    ci_half_width: float
    n_paths: int
    target: str = "V_minus"
    method: str = "sampled"
    survivors: int = 0
    origin_first_hit: int = 0
    censored: int = 0

    @property
    def sigma(self) -> float:
        return self.ci_half_width / Z99

    @property
    def origin_fraction(self) -> float:
        """Fraction of paths whose first target hit is the origin before killing."""
        return self.origin_first_hit / self.n_paths


@dataclass(frozen=True)
class LadderSample:
    eta1: int | None  # None marks a path censored at the horizon
    zeta1: int


@dataclass(frozen=True)
class LadderSamples:
    """First return to the line ``x2 = 0``: times ``eta`` and places ``zeta``.

    Censored samples have ``eta = horizon + 1``.
    """

    eta: np.ndarray
    zeta: np.ndarray
    horizon: int
    n_censored: int = field(default=0)

    def __len__(self) -> int:
        return int(self.eta.size)

    def __getitem__(self, i: int) -> LadderSample:
        e = int(self.eta[i])
        return LadderSample(None if e > self.horizon else e, int(self.zeta[i]))

    def __iter__(self) -> Iterator[LadderSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def censoring_frequency(self) -> float:
        return self.n_censored / max(len(self), 1)

    def weighted_mean(self, lam: float, l: int | None = None) -> tuple[float, float]:
        """Estimate ``E[lam^eta; zeta = l]`` (all ``l`` if ``None``) and its
        standard error. Censored samples contribute zero; the bias is below
        ``lam**horizon``."""
        ok = self.eta <= self.horizon
        if l is not None:
            ok &= self.zeta == l
        vals = np.where(ok, np.power(lam, self.eta.astype(float)), 0.0)
        n = vals.size
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise OutOfRange(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise OutOfRange("threads must be positive")
    return threads


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, int(stream)])))


def _split(n: int, streams: int) -> list[int]:
    base, extra = divmod(n, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


def _run_streams(fn, counts: Sequence[int], threads: int, merge, seed: int):
    """Run ``fn(generator, count)`` per stream and fold results in stream order."""
    jobs = [(i, c) for i, c in enumerate(counts) if c > 0]
    acc = None
    if threads == 1:
        for i, c in jobs:
            acc = merge(acc, fn(stream_generator(seed, i), c))
        return acc
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # bounded batches keep memory flat for large histograms
        for b in range(0, len(jobs), threads):
            batch = jobs[b:b + threads]
            futures = [pool.submit(fn, stream_generator(seed, i), c) for i, c in batch]
            for f in futures:
                acc = merge(acc, f.result())
    return acc


def _require_finite_x2(dist: IncrementDistribution) -> None:
    if dist.support_bound_x2() < 1:
        raise MalformedDistribution("X2 must take a nonzero value")


def _add(acc, x):
    return x if acc is None else acc + x


def simulate_survival(dist: IncrementDistribution, config: SimConfig) -> SurvivalCurve:
    """Estimate ``P0(tau_A > n)`` at the configured checkpoints."""
    _require_finite_x2(dist)
    w = encode(dist)
    target = TARGETS[config.target]
    horizon = int(config.horizon)

    def work(g, count):
        hist = np.zeros(horizon + 2, dtype=np.int64)
        overflow = K.survival_kernel(g, w, target, count, horizon, hist)
        if overflow:
            raise OverflowError("first coordinate left the 64-bit safe range")
        return hist

    hist = _run_streams(work, _split(config.n_paths, config.streams),
                        resolve_threads(config.threads), _add, config.seed)
    dead = np.cumsum(hist[: horizon + 1])
    cps = config.resolved_checkpoints()
    n = config.n_paths
    survivors = [int(n - dead[c]) for c in cps]
    p_hat = [s / n for s in survivors]
    ci = [Z99 * math.sqrt(p * (1.0 - p) / n) for p in p_hat]
    return SurvivalCurve(n_values=list(cps), survivors=survivors, p_hat=p_hat,
                         ci_half_width=ci, n_paths=n, target=config.target)


def simulate_geometric(dist: IncrementDistribution, lam: float, config: SimConfig,
                       method: str = "sampled") -> GeometricEstimate:
    """Estimate ``P0(T_lam < tau_A)`` with ``P(T_lam = j) = (1 - lam) lam^j``.

    ``method="sampled"`` draws ``T_lam`` up front and simulates up to it;
    ``method="per_step"`` kills the walk with probability ``1 - lam`` before
    each step. Paths still alive at ``config.horizon`` count as survivors.
    """
    if not 0.0 < lam < 1.0:
        raise OutOfRange("lambda must lie in (0, 1)")
    if method not in ("sampled", "per_step"):
        raise OutOfRange(f"unknown method {method!r}")
    _require_finite_x2(dist)
    w = encode(dist)
    target = TARGETS[config.target]
    horizon = int(config.horizon)
    per_step = method == "per_step"

    def work(g, count):
        out = np.zeros(4, dtype=np.int64)
        K.geometric_kernel(g, w, target, count, horizon, float(lam), per_step, out)
        if out[3]:
            raise OverflowError("first coordinate left the 64-bit safe range")
        return out

    out = _run_streams(work, _split(config.n_paths, config.streams),
                       resolve_threads(config.threads), _add, config.seed)
    n = config.n_paths
    p = out[0] / n
    ci = Z99 * math.sqrt(p * (1.0 - p) / n)
    bias = lam ** horizon
    # a degenerate estimate still has resolution 1/n
    if bias >= 0.1 * max(ci, Z99 / n):
        raise HorizonTooShort(f"lambda^horizon = {bias:.3g} is not below a tenth of the "
                              f"confidence half-width {ci:.3g}")
    return GeometricEstimate(lam=float(lam), p_hat=float(p), ci_half_width=ci, n_paths=n,
                             target=config.target, method=method, survivors=int(out[0]),
                             origin_first_hit=int(out[1]), censored=int(out[2]))


def simulate_ladder(dist: IncrementDistribution, config: SimConfig) -> LadderSamples:
    """First return time to ``x2 = 0`` and the first coordinate there."""
    _require_finite_x2(dist)
    w = encode(dist)
    horizon = int(config.horizon)

    def work(g, count):
        eta = np.empty(count, dtype=np.int64)
        zeta = np.empty(count, dtype=np.int64)
        overflow = K.ladder_kernel(g, w, count, horizon, eta, zeta)
        if overflow:
            raise OverflowError("first coordinate left the 64-bit safe range")
        return [(eta, zeta)]

    parts = _run_streams(work, _split(config.n_paths, config.streams),
                         resolve_threads(config.threads), _add, config.seed)
    eta = np.concatenate([p[0] for p in parts])
    zeta = np.concatenate([p[1] for p in parts])
    return LadderSamples(eta=eta, zeta=zeta, horizon=horizon,
                         n_censored=int(np.count_nonzero(eta > horizon)))


def sample_increments_compiled(dist: IncrementDistribution, n: int, seed: int = 0,
                               stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Raw increments drawn by the compiled samplers used inside the kernels."""
    w = encode(dist)
    x1 = np.empty(n, dtype=np.int64)
    x2 = np.empty(n, dtype=np.int64)
    K.increments_kernel(stream_generator(seed, stream), w, n, x1, x2)
    return x1, x2
