"""Experiment configuration schema.

Configs are strict JSON documents: unknown keys are rejected and every run
is fully determined by the config contents (plus the package version).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import (BaseModel, ConfigDict, Field, TypeAdapter,
                      ValidationError, field_validator)

CACHING_ORDERS = ("pareto", "coalition", "selfish", "none")


class ConfigError(ValueError):
    """Invalid experiment config; the message names the offending key."""


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CachingConfig(_StrictModel):
    scenario: Literal["caching"]
    n_players: int = Field(ge=1)
    area: tuple[float, float] = (100.0, 100.0)
    radius: float = Field(ge=0.0)
    catalog_size: int = Field(ge=1)
    content_size_mb: float = Field(default=1.0, gt=0.0)
    demand_per_player: int = Field(ge=1)
    zipf_skew: float = Field(default=0.8, ge=0.0)
    c_bs: float = Field(gt=0.0)
    c_share: float = Field(default=0.0, ge=0.0)
    order: Union[str, list[str]] = "pareto"
    dynamics: Literal["merge-split", "switch", "switch+swap"] = "switch"
    seeds: list[int]
    max_iters: int = Field(default=2000, ge=1)
    out: str | None = None

    @field_validator("order")
    @classmethod
    def _check_orders(cls, v):
        names = [v] if isinstance(v, str) else list(v)
        for name in names:
            if name not in CACHING_ORDERS:
                raise ValueError(f"unknown order {name!r}; "
                                 f"expected one of {CACHING_ORDERS}")
        if not names:
            raise ValueError("order list must not be empty")
        return v

    @field_validator("demand_per_player")
    @classmethod
    def _demand_fits(cls, v, info):
        size = info.data.get("catalog_size")
        if size is not None and v > size:
            raise ValueError("demand_per_player exceeds catalog_size")
        return v

    @property
    def orders(self) -> list[str]:
        return [self.order] if isinstance(self.order, str) else list(self.order)


class AuctionConfig(_StrictModel):
    scenario: Literal["auction"]
    n_channels: int = Field(ge=0)
    ask_range: tuple[float, float]
    valuation_range: tuple[float, float]
    demand_max: int = Field(ge=1)
    buyer_counts: list[int]
    interference_radius: float = Field(ge=0.0)
    area: tuple[float, float] = (100.0, 100.0)
    seeds: list[int]
    max_iters: int = Field(default=100, ge=1)
    out: str | None = None

    @field_validator("ask_range", "valuation_range")
    @classmethod
    def _ordered_range(cls, v):
        lo, hi = v
        if lo < 0 or hi < lo:
            raise ValueError("range must satisfy 0 <= lo <= hi")
        return v

    @field_validator("buyer_counts")
    @classmethod
    def _counts_positive(cls, v):
        if any(n < 0 for n in v):
            raise ValueError("buyer counts must be >= 0")
        return v


class LcgConfig(_StrictModel):
    scenario: Literal["lcg"]
    n_players: int = Field(ge=1)
    area: tuple[float, float] = (100.0, 100.0)
    radius: float = Field(ge=0.0)
    channels: int = Field(ge=1)
    seeds: list[int]
    max_iters: int = Field(default=10000, ge=1)
    out: str | None = None


ExperimentConfig = Annotated[Union[CachingConfig, AuctionConfig, LcgConfig],
                             Field(discriminator="scenario")]

_adapter: TypeAdapter = TypeAdapter(ExperimentConfig)


def _describe_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "scenario" not in data:
        raise ConfigError("scenario: missing required key")
    try:
        return _adapter.validate_python(data)
    except ValidationError as exc:
        raise ConfigError(_describe_error(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)
