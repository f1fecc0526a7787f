"""Closed-form test fields: one-dimensional profiles and sums of separable products.

A profile carries its derivative so the log-potential path never has to
differentiate sampled data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .surface import GridSpec, SampledField


class Profile:
    """A smooth function of one real variable, vectorized over numpy arrays."""

    support: tuple[float, float] | None = None

    def __call__(self, y):
        raise NotImplementedError

    def derivative(self, y):
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False


@dataclass(frozen=True)
class Constant(Profile):
    value: complex = 1.0

    def __call__(self, y):
        return np.full(np.shape(y), self.value, dtype=complex)

    def derivative(self, y):
        return np.zeros(np.shape(y), dtype=complex)

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True)
class Gaussian(Profile):
    """exp(-((y - center) / width)^2)."""

    center: float = 0.0
    width: float = 1.0

    def __call__(self, y):
        u = (np.asarray(y, dtype=float) - self.center) / self.width
        return np.exp(-u * u)

    def derivative(self, y):
        u = (np.asarray(y, dtype=float) - self.center) / self.width
        return -2.0 * u / self.width * np.exp(-u * u)


@dataclass(frozen=True)
class Bump(Profile):
    """exp(-1 / (1 - u^2)) * e on |u| < 1, u = (y - center) / radius; peak value 1."""

    center: float = 0.0
    radius: float = 1.0

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def _parts(self, y):
        u = (np.asarray(y, dtype=float) - self.center) / self.radius
        inside = np.abs(u) < 1.0
        s = np.where(inside, 1.0 - u * u, 1.0)
        e = np.where(inside, np.exp(1.0 - 1.0 / s), 0.0)
        return u, s, e

    def __call__(self, y):
        return self._parts(y)[2]

    def derivative(self, y):
        u, s, e = self._parts(y)
        return e * (-2.0 * u / (s * s)) / self.radius


@dataclass(frozen=True)
class PoissonProfile(Profile):
    """The flat Poisson kernel p_s(y - center)."""

    s: float = 1.0
    center: float = 0.0

    def __call__(self, y):
        u = np.asarray(y, dtype=float) - self.center
        return self.s / (math.pi * (u * u + self.s * self.s))

    def derivative(self, y):
        u = np.asarray(y, dtype=float) - self.center
        d = u * u + self.s * self.s
        return -2.0 * self.s * u / (math.pi * d * d)


@dataclass(frozen=True)
class Scaled(Profile):
    """coef * base(y)."""

    base: Profile
    coef: complex = 1.0

    @property
    def support(self):
        return self.base.support

    def __call__(self, y):
        return self.coef * self.base(y)

    def derivative(self, y):
        return self.coef * self.base.derivative(y)

    @property
    def is_constant(self) -> bool:
        return self.base.is_constant


class ProductField:
    """A finite sum  sum_k c_k u_k(y1) v_k(y2)  of separable terms."""

    def __init__(self, terms):
        self.terms = tuple((complex(c), u, v) for c, u, v in terms)

    @classmethod
    def single(cls, u: Profile, v: Profile, coef: complex = 1.0) -> "ProductField":
        return cls([(coef, u, v)])

    @classmethod
    def zero(cls) -> "ProductField":
        return cls([])

    def __call__(self, y1, y2):
        y1, y2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        out = np.zeros(y1.shape, dtype=complex)
        for c, u, v in self.terms:
            out += c * u(y1) * v(y2)
        return out

    def mixed_partial(self, y1, y2):
        y1, y2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        out = np.zeros(y1.shape, dtype=complex)
        for c, u, v in self.terms:
            out += c * u.derivative(y1) * v.derivative(y2)
        return out

    def sample(self, grid: GridSpec) -> SampledField:
        x = grid.nodes
        vals = np.zeros((x.size, x.size), dtype=complex)
        for c, u, v in self.terms:
            vals += c * np.outer(u(x), v(x))
        return SampledField(grid, vals)

    def compactly_supported_in(self, X: float) -> bool:
        for _, u, v in self.terms:
            for prof in (u, v):
                if prof.support is None:
                    return False
                a, b = prof.support
                if a < -X or b > X:
                    return False
        return True

    def has_constant_axis(self) -> bool:
        return any(u.is_constant or v.is_constant for _, u, v in self.terms)

    def scaled(self, coef) -> "ProductField":
        return ProductField([(coef * c, u, v) for c, u, v in self.terms])


def random_smooth_field(rng: np.random.Generator, n_terms: int = 3, spread: float = 1.5,
                        radius=(0.6, 1.5)) -> ProductField:
    """Random sum of separable C-infinity bumps with complex coefficients."""
    terms = []
    for _ in range(n_terms):
        c = complex(rng.normal(), rng.normal())
        r1, r2 = rng.uniform(*radius, size=2)
        c1, c2 = rng.uniform(-spread, spread, size=2)
        terms.append((c, Bump(float(c1), float(r1)), Bump(float(c2), float(r2))))
    return ProductField(terms)
