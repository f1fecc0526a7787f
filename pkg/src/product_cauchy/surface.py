"""Lipschitz graphs, product surfaces, grids and sampled fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ValidationFailure

FAMILIES = ("flat", "sine", "linear_tilt", "smooth_bump")


@dataclass(frozen=True)
class LipschitzCurve:
    """The graph x -> x + i L(x) for one of the closed-form profile families.

    ``lam`` is the Lipschitz constant of L.  ``scale`` only matters for
    ``smooth_bump``, where L(x) = lam * s * u / (1 + u^2) with u = x / s, so
    that sup |L'| = lam exactly.
    """

    family: str = "flat"
    lam: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown curve family {self.family!r}")
        lam = float(self.lam)
        if not (0.0 <= lam < 1.0) or not math.isfinite(lam):
            raise DomainError(f"Lipschitz constant must lie in [0, 1), got {self.lam}")
        if not (self.scale > 0.0):
            raise DomainError("scale must be positive")
        if self.family == "flat":
            lam = 0.0
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def from_dict(cls, data: dict) -> "LipschitzCurve":
        return cls(
            family=data.get("family", "flat"),
            lam=data.get("lambda", data.get("lam", 0.0)),
            scale=data.get("scale", 1.0),
        )

    def to_dict(self) -> dict:
        out = {"family": self.family, "lambda": self.lam}
        if self.family == "smooth_bump":
            out["scale"] = self.scale
        return out

    @property
    def asymptotic_slope(self) -> complex:
        if self.family == "linear_tilt":
            return complex(1.0, self.lam)
        return complex(1.0, 0.0)

    def L(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "flat":
            return np.zeros_like(x)
        if self.family == "sine":
            return self.lam * np.sin(x)
        if self.family == "linear_tilt":
            return self.lam * x
        u = x / self.scale
        return self.lam * self.scale * u / (1.0 + u * u)

    def dL(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "flat":
            return np.zeros_like(x)
        if self.family == "sine":
            return self.lam * np.cos(x)
        if self.family == "linear_tilt":
            return np.full_like(x, self.lam)
        u2 = (x / self.scale) ** 2
        return self.lam * (1.0 - u2) / (1.0 + u2) ** 2

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        return x + 1j * self.L(x)

    def dgamma(self, x):
        return 1.0 + 1j * self.dL(x)

    def label(self) -> str:
        if self.family == "flat":
            return "flat"
        return f"{self.family}({self.lam:g})"


@dataclass(frozen=True)
class ProductSurface:
    curve1: LipschitzCurve
    curve2: LipschitzCurve

    @classmethod
    def from_dict(cls, data: dict) -> "ProductSurface":
        return cls(LipschitzCurve.from_dict(data["curve1"]), LipschitzCurve.from_dict(data["curve2"]))

    @classmethod
    def flat(cls) -> "ProductSurface":
        return cls(LipschitzCurve("flat"), LipschitzCurve("flat"))

    @property
    def curves(self) -> tuple[LipschitzCurve, LipschitzCurve]:
        return (self.curve1, self.curve2)

    @property
    def is_flat(self) -> bool:
        return self.curve1.family == "flat" and self.curve2.family == "flat"

    def label(self) -> str:
        return f"{self.curve1.label()}x{self.curve2.label()}"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-X, X] with spacing h; 0 is always a node."""

    X: float = 8.0
    h: float = 1.0 / 64

    def __post_init__(self):
        X, h = float(self.X), float(self.h)
        if not (X > 0 and h > 0) or not (math.isfinite(X) and math.isfinite(h)):
            raise DomainError("grid requires X > 0 and h > 0")
        if h > X:
            raise DomainError(f"grid spacing h={h} exceeds half window X={X}")
        m = round(X / h)
        if abs(m * h - X) > 1e-9 * X:
            raise DomainError(f"X/h must be an integer, got {X / h}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "h", h)

    @property
    def half_count(self) -> int:
        return int(round(self.X / self.h))

    @property
    def n(self) -> int:
        return 2 * self.half_count + 1

    @property
    def nodes(self) -> np.ndarray:
        m = self.half_count
        return np.arange(-m, m + 1) * self.h

    def refined(self) -> "GridSpec":
        return GridSpec(self.X, self.h / 2)


class SampledField:
    """A complex field g o gamma sampled on a square grid (axis 0 is x1)."""

    def __init__(self, grid: GridSpec, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n, grid.n):
            raise DomainError(f"values must have shape {(grid.n, grid.n)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("sampled field values must be finite")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self._coef = None

    def weights(self, surface: ProductSurface) -> np.ndarray:
        x = self.grid.nodes
        w1 = np.abs(surface.curve1.dgamma(x))
        w2 = np.abs(surface.curve2.dgamma(x))
        return np.outer(w1, w2) * self.grid.h**2

    def spline_coefficients(self):
        """Tensor-product cubic B-spline coefficients interpolating the samples."""
        if self._coef is None:
            from scipy.interpolate import make_interp_spline

            x = self.grid.nodes
            s1 = make_interp_spline(x, self.values, k=3, axis=0)
            s2 = make_interp_spline(x, s1.c, k=3, axis=1)
            self._coef = (s1.t, s2.c)
        return self._coef

    def __add__(self, other):
        _check_same_grid(self, other)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return SampledField(self.grid, self.values - other.values)

    def scaled(self, c) -> "SampledField":
        return SampledField(self.grid, c * self.values)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise DomainError("fields live on different grids")


def curve_eval(curve: LipschitzCurve, x: float) -> tuple[complex, complex]:
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    return complex(curve.gamma(x)), complex(curve.dgamma(x))


class CurveReport(NamedTuple):
    lambda_hat: float
    re_ratio_min: float
    re_ratio_max: float


def validate_curve(curve: LipschitzCurve, grid: GridSpec, max_nodes: int = 1025) -> CurveReport:
    """Check the Lipschitz, derivative and comparability invariants on grid pairs."""
    x = grid.nodes
    if x.size == 0:
        raise DomainError("empty grid")
    if x.size > max_nodes:
        x = x[np.linspace(0, x.size - 1, max_nodes).round().astype(int)]
    lam = curve.lam
    tol = 1e-12

    dg = curve.dgamma(x)
    if np.any(dg.real != 1.0):
        raise ValidationFailure("Re gamma' must equal 1")
    mod = np.abs(dg)
    if mod.min() < 1.0 - tol or mod.max() > math.sqrt(1 + lam * lam) + tol:
        raise ValidationFailure("|gamma'| outside [1, sqrt(1+lambda^2)]")

    i, j = np.triu_indices(x.size, k=1)
    dx = x[j] - x[i]
    dL = curve.L(x[j]) - curve.L(x[i])
    lambda_hat = float(np.max(np.abs(dL / dx))) if dx.size else 0.0
    dgam = curve.gamma(x[j]) - curve.gamma(x[i])
    ratio = np.abs((dgam * dgam).real) / (dx * dx)
    rmin = float(ratio.min()) if ratio.size else 1.0
    rmax = float(ratio.max()) if ratio.size else 1.0

    if lambda_hat > lam + tol:
        raise ValidationFailure(f"sampled Lipschitz constant {lambda_hat} exceeds {lam}")
    if rmin < 1.0 - lam * lam - tol or rmax > 2.0 + tol:
        raise ValidationFailure(f"comparability ratios [{rmin}, {rmax}] violate the bounds")
    return CurveReport(lambda_hat, rmin, rmax)


class FieldNorms(NamedTuple):
    surface_norm: float
    pullback_norm: float
    chain_holds: bool


def field_norm(field: SampledField, surface: ProductSurface, p: float = 2.0) -> FieldNorms:
    """L^p(Gamma) norm and the pullback norm on R^2, by Riemann sums."""
    if not (p > 1.0) or not math.isfinite(p):
        raise DomainError(f"need 1 < p < inf, got {p}")
    a = np.abs(field.values) ** p
    h2 = field.grid.h**2
    pull = float(a.sum() * h2)
    surf = float((a * field.weights(surface)).sum())
    slack = 1e-12 * max(pull, 1e-300)
    chain = pull <= surf + slack and surf <= 2.0 * pull + slack
    return FieldNorms(surf ** (1 / p), pull ** (1 / p), bool(chain))
