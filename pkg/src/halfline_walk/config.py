"""Run configuration: a JSON document validated by pydantic.

Unknown keys are rejected at every level. Probabilities may be written as
rational strings (``"1/4"``) so that the exact oracle stays exact.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError, MalformedDistribution, NotNormalized, OutOfRange
from .lattice_walk import IncrementDistribution, heavy_tail, product, simple_walk, table

SCHEMA_VERSION = 1
Probability = Union[str, float, int]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TableSpec(_Strict):
    type: Literal["table"]
    atoms: list[tuple[int, int, Probability]]
    delta: float = 0.5


class SimpleSpec(_Strict):
    type: Literal["simple"]


class HeavyTailSpec(_Strict):
    type: Literal["heavy_tail"]
    alpha: float
    x2: list[tuple[int, Probability]] | None = None
    head_size: int = 4096
    mirrored: bool = False
    delta: float = 0.5


class ProductSpec(_Strict):
    type: Literal["product"]
    x1: list[tuple[int, Probability]]
    x2: list[tuple[int, Probability]]
    delta: float = 0.5


DistributionSpec = Annotated[Union[TableSpec, SimpleSpec, HeavyTailSpec, ProductSpec],
                             Field(discriminator="type")]


class AnalyzeBlock(_Strict):
    window: tuple[float, float] = (1e-3, 1e-1)
    points: int = 32
    source: Literal["fitted", "closed_form"] = "fitted"


class SimulateBlock(_Strict):
    n_paths: int = 100_000
    horizon: int = 10_000
    target: Literal["V_minus", "V_plus", "V_plus_punctured", "U"] = "V_minus"
    checkpoints: list[int] | None = None
    streams: int = 64
    fit_window: tuple[float, float] | None = None


class GeometricBlock(_Strict):
    lambdas: list[float] = [0.9, 0.99]
    n_paths: int = 100_000
    horizon: int = 10_000
    targets: list[Literal["V_minus", "V_plus", "V_plus_punctured", "U"]] = ["V_minus"]
    method: Literal["sampled", "per_step"] = "sampled"
    streams: int = 64


class WienerHopfBlock(_Strict):
    lambdas: list[float] = Field(default_factory=lambda: [1.0 - 2.0 ** -k for k in range(6, 15)])
    s0: float | None = None
    L: int = 1000
    method: Literal["arcsin_integral", "direct_kernel", "series"] = "arcsin_integral"
    tol: float = 1e-9
    max_panels: int = 4000
    n_max: int = 64
    k_max: int | None = None
    l_max: int | None = None


class LadderBlock(_Strict):
    lam: float = 0.9
    k: int = 1
    l_values: list[int] = [-3, -2, -1, 0, 1, 2, 3]
    mc_samples: int = 0
    horizon: int = 400


class VerifyBlock(_Strict):
    criteria: list[int] = list(range(1, 13))
    paths_scale: float = 1.0

    @field_validator("criteria")
    @classmethod
    def _known(cls, v):
        bad = [c for c in v if not 1 <= c <= 12]
        if bad:
            raise ValueError(f"unknown criteria {bad}")
        return v

    @field_validator("paths_scale")
    @classmethod
    def _scale(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError("paths_scale must lie in (0, 1]")
        return v


class RunConfig(_Strict):
    schema_version: Literal[1]
    distribution: DistributionSpec = SimpleSpec(type="simple")
    output_dir: str = "out"
    seed: int = 0
    threads: int | None = None
    analyze: AnalyzeBlock = AnalyzeBlock()
    simulate: SimulateBlock = SimulateBlock()
    geometric: GeometricBlock = GeometricBlock()
    wiener_hopf: WienerHopfBlock = WienerHopfBlock()
    ladder: LadderBlock = LadderBlock()
    verify: VerifyBlock = VerifyBlock()


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True)


def build_distribution(spec) -> IncrementDistribution:
    """The :class:`IncrementDistribution` described by a distribution block."""
    try:
        if spec.type == "simple":
            return simple_walk()
        if spec.type == "table":
            return table([tuple(a) for a in spec.atoms], delta=spec.delta)
        if spec.type == "product":
            return product([tuple(a) for a in spec.x1], [tuple(a) for a in spec.x2], delta=spec.delta)
        x2 = None if spec.x2 is None else [tuple(a) for a in spec.x2]
        return heavy_tail(spec.alpha, x2, head_size=spec.head_size, delta=spec.delta,
                          mirrored=spec.mirrored)
    except (MalformedDistribution, NotNormalized, OutOfRange) as exc:
        # malformed input is a configuration problem; assumption checks come later
        raise ConfigError(f"distribution: {exc}") from exc
