"""Run configuration for the command-line driver."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, DomainError
from .fields import Bump, Gaussian, ProductField, random_smooth_field
from .quadrature import QuadratureConfig
from .surface import FAMILIES, GridSpec, LipschitzCurve, ProductSurface


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class CurveModel(_Model):
    family: Literal[FAMILIES] = "flat"  # type: ignore[valid-type]
    lam: float = Field(0.0, alias="lambda", ge=0.0, lt=1.0)
    scale: float = Field(1.0, gt=0.0)

    def build(self) -> LipschitzCurve:
        return LipschitzCurve(self.family, self.lam, self.scale)


class SurfaceModel(_Model):
    curve1: CurveModel = CurveModel()
    curve2: CurveModel = CurveModel()

    def build(self) -> ProductSurface:
        return ProductSurface(self.curve1.build(), self.curve2.build())


class GridModel(_Model):
    X: float = Field(8.0, gt=0.0)
    h: float = Field(1 / 64, gt=0.0)

    @model_validator(mode="after")
    def _grid(self):
        try:
            GridSpec(self.X, self.h)
        except DomainError as exc:
            raise ValueError(str(exc)) from exc
        return self

    def build(self) -> GridSpec:
        return GridSpec(self.X, self.h)


class QuadratureModel(_Model):
    h0: float = Field(0.125, gt=0.0)
    order: int = Field(8, ge=2)
    far_order: int = Field(8, ge=1)
    atol: float = Field(1e-10, gt=0.0)
    rtol: float = Field(1e-8, gt=0.0)
    tail: Literal["truncate", "geometric"] = "truncate"

    def build(self, X: float) -> QuadratureConfig:
        return QuadratureConfig(X=X, **self.model_dump())


class FieldModel(_Model):
    kind: Literal["gaussian", "bump", "random"] = "gaussian"
    center: tuple[float, float] = (0.0, 0.0)
    width: tuple[float, float] = (1.0, 1.0)
    coef: tuple[float, float] = (1.0, 0.0)

    def build(self, seed: int) -> ProductField:
        c = complex(*self.coef)
        if self.kind == "random":
            import numpy as np

            return random_smooth_field(np.random.default_rng(seed)).scaled(c)
        P = Gaussian if self.kind == "gaussian" else Bump
        return ProductField.single(P(self.center[0], self.width[0]), P(self.center[1], self.width[1]), c)


class RunConfig(_Model):
    surface: SurfaceModel = SurfaceModel()
    grid: GridModel = GridModel()
    quadrature: QuadratureModel = QuadratureModel()
    field: FieldModel = FieldModel()
    selector: Literal["QQ", "QP", "PQ", "PP"] = "QQ"
    t_schedule: list[float] = Field(default_factory=lambda: [2.0**-k for k in range(2, 9)])
    R_schedule: list[float] = Field(default_factory=lambda: [2.0**k for k in range(-1, 11)])
    scale_range: Optional[tuple[int, int]] = None
    p: float = 2.0
    trials: int = Field(20, ge=1)
    seed: int = 0
    sweep: Literal["t", "tb", "reproducing"] = "t"
    reference: Literal["auto", "log", "field", "fft", "last", "cauchy"] = "auto"
    kmax: int = Field(6, ge=1)
    points: list[tuple[float, float]] = Field(default_factory=lambda: [(0.0, 0.0), (0.5, -0.25)])
    t1_lattice: list[float] = Field(default_factory=lambda: [0.5, 0.1, 0.01])
    t2_lattice: list[float] = Field(default_factory=lambda: [0.5, 0.1, 0.01])

    @field_validator("t_schedule", "R_schedule", "t1_lattice", "t2_lattice")
    @classmethod
    def _nonempty_positive(cls, v):
        if not v:
            raise ValueError("schedule must not be empty")
        if any(not (x > 0) for x in v):
            raise ValueError("schedule entries must be positive")
        return v

    @field_validator("p")
    @classmethod
    def _p(cls, v):
        if not (1 < v < float("inf")):
            raise ValueError("need 1 < p < inf")
        return v

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True,
                          separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def build_grid(self, fast: bool = False) -> GridSpec:
        g = self.grid.build()
        if fast:
            try:
                return GridSpec(g.X / 2, 2 * g.h)
            except DomainError:
                return g
        return g

    def build_quadrature(self, grid: GridSpec) -> QuadratureConfig:
        return self.quadrature.build(grid.X)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Read a JSON config (if given), apply overrides and validate; ConfigError on failure."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def config_schema() -> dict:
    return RunConfig.model_json_schema(by_alias=True)
