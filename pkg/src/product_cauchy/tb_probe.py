"""Numerical probes of the Tb-theorem hypotheses for the Cauchy operator on Gamma.

Every pairing goes through the log representation, so no truncation limit is
taken: along one axis

    I(f, g) = (1/2pi) int g(x) gamma'(x) int log((gamma(x) - gamma(y))^2) f'(y) dy dx,

and the biparameter pairing <M_b C M_b (f1 f2), g1 g2> with b = gamma1' gamma2'
is the product of the two axis factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .cauchy_ops import ConvergenceReport, apply_truncated, fit_log2_slope, maximal_transform
from .errors import DomainError, HypothesisViolation
from .fields import ProductField, random_smooth_field
from .kernels import KernelSelector, principal_log
from .quadrature import QuadratureConfig, axis_rule, gauss_legendre, panel_rule
from .surface import GridSpec, LipschitzCurve, ProductSurface, field_norm

MAX_ORDER = 4
DEFAULT_ORDER = 2
_PROBE = np.linspace(-1.0, 1.0, 20001)
_LOG_CFG = QuadratureConfig(X=1.0, h0=0.125, log_levels=40)


# ---------------------------------------------------------------------------
# Profiles


def _e_derivatives(u, n: int) -> list[np.ndarray]:
    """[e, e', ..., e^(n)] for e(u) = exp(-1/(1-u^2)) on |u| < 1, zero outside."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    uu = np.where(inside, u, 0.0)
    e = np.where(inside, np.exp(-1.0 / (1.0 - uu * uu)), 0.0)
    live = e > 0
    uu = np.where(live, uu, 0.0)
    # g = -1/(1-u^2) = -(1/(1-u) + 1/(1+u))/2
    g = [-0.5 * math.factorial(k) * ((1 - uu) ** -(k + 1) + (-1) ** k * (1 + uu) ** -(k + 1))
         for k in range(1, n + 1)]
    out = [e]
    for m in range(n):
        acc = np.zeros_like(e)
        for k in range(m + 1):
            acc = acc + math.comb(m, k) * g[k] * out[m - k]
        out.append(np.where(live, acc, 0.0))
    return out


def _gl_support(lo: float, hi: float, panels: int = 64, order: int = 16):
    x, w = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


@dataclass(frozen=True)
class NormalizedBump:
    """A C-infinity bump supported in [center - radius, center + radius].

    The unit-scale profile has every derivative of order <= ``order`` bounded
    by 1.  ``mean_zero_against`` is None, "one", or a curve whose gamma' is the
    weight the bump integrates to zero against.
    """

    order: int
    center: float
    radius: float
    mean_zero_against: object = None
    beta: complex = 0.0
    scale: float = 1.0
    amplitude: float = 1.0

    @property
    def mean_zero(self) -> bool:
        return self.mean_zero_against is not None

    def profile_derivatives(self, u, n: int) -> list[np.ndarray]:
        """Derivatives 0..n of the unit-scale profile."""
        if self.mean_zero:
            e = _e_derivatives(u, n + 1)
            return [self.scale * (e[k + 1] - self.beta * e[k]) for k in range(n + 1)]
        return [self.scale * d for d in _e_derivatives(u, n)]

    def __call__(self, y):
        return self.derivative(y, 0)

    def derivative(self, y, k: int = 1):
        u = (np.asarray(y, dtype=float) - self.center) / self.radius
        d = self.profile_derivatives(u, k)[k]
        return self.amplitude * d / self.radius**k

    def support(self) -> tuple[float, float]:
        return self.center - self.radius, self.center + self.radius

    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    def weight(self, y):
        if self.mean_zero_against is None or self.mean_zero_against == "one":
            return np.ones_like(np.asarray(y, dtype=float))
        return self.mean_zero_against.dgamma(y)

    def moment(self, weight: Callable | None = None) -> complex:
        lo, hi = self.support()
        y, w = _gl_support(lo, hi)
        wt = self.weight(y) if weight is None else weight(y)
        return complex(np.sum(w * self(y) * wt))

    def translated(self, center: float) -> "NormalizedBump":
        return make_bump(self.order, center, self.radius, self.mean_zero_against,
                         amplitude=self.amplitude)

    def times(self, a: float) -> "NormalizedBump":
        return NormalizedBump(self.order, self.center, self.radius, self.mean_zero_against,
                              self.beta, self.scale, self.amplitude * a)

    def check_invariants(self) -> dict:
        """Support, derivative caps and weighted moment, evaluated on a fine probe grid."""
        ders = self.profile_derivatives(_PROBE, self.order)
        caps = [float(np.max(np.abs(d))) for d in ders]
        outside = self(np.array([self.center - 1.0001 * self.radius,
                                 self.center + 1.0001 * self.radius]))
        return {
            "support": bool(np.all(outside == 0)),
            "derivative_caps": caps,
            "caps_ok": max(caps) <= 1.0 + 1e-9,
            "moment": abs(self.moment()) if self.mean_zero else None,
        }


def make_bump(order: int = DEFAULT_ORDER, center: float = 0.0, radius: float = 1.0,
              mean_zero_against=None, amplitude: float = 1.0) -> NormalizedBump:
    if not (0 <= order <= MAX_ORDER):
        raise DomainError(f"bump order must lie in 0..{MAX_ORDER}")
    if not radius > 0:
        raise DomainError("radius must be positive")
    if mean_zero_against not in (None, "one") and not isinstance(mean_zero_against, LipschitzCurve):
        raise DomainError("mean_zero_against must be None, 'one' or a LipschitzCurve")
    beta = 0.0
    if mean_zero_against is not None:
        raw = NormalizedBump(order, center, radius, mean_zero_against)
        u, w = _gl_support(-1.0, 1.0)
        e0, e1 = _e_derivatives(u, 1)
        wt = raw.weight(center + radius * u)
        beta = complex(np.sum(w * e1 * wt) / np.sum(w * e0 * wt))
        if mean_zero_against == "one":
            beta = 0.0
    base = NormalizedBump(order, center, radius, mean_zero_against, beta, 1.0)
    cap = max(float(np.max(np.abs(d))) for d in base.profile_derivatives(_PROBE, order))
    return NormalizedBump(order, center, radius, mean_zero_against, beta, 1.0 / cap, amplitude)


@dataclass(frozen=True)
class EtaCutoff:
    """eta_R = 1 on |x| <= R, 0 for |x| >= 2R, eta_R(x) = S((2R - |x|)/R) between."""

    radius: float = 1.0

    @staticmethod
    def _f(s):
        s = np.asarray(s, dtype=float)
        pos = s > 0
        with np.errstate(over="ignore"):  # exp(-1/s) underflows to 0 for subnormal s
            return np.where(pos, np.exp(-1.0 / np.where(pos, s, 1.0)), 0.0)

    @classmethod
    def step(cls, s):
        s = np.asarray(s, dtype=float)
        a, b = cls._f(s), cls._f(1.0 - s)
        return a / (a + b)

    @classmethod
    def step_prime(cls, s):
        s = np.asarray(s, dtype=float)
        a, b = cls._f(s), cls._f(1.0 - s)
        sp = np.where(s > 0, s, 1.0)
        sm = np.where(1 - s > 0, 1 - s, 1.0)
        da = np.where(s > 0, a / sp**2, 0.0)
        db = np.where(1 - s > 0, b / sm**2, 0.0)
        return (da * b + a * db) / (a + b) ** 2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.step((2 * self.radius - np.abs(x)) / self.radius)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return -np.sign(x) * self.step_prime((2 * self.radius - np.abs(x)) / self.radius) / self.radius


# ---------------------------------------------------------------------------
# Axis pairings


def _outer_rule(g: NormalizedBump, panels: int = 32, order: int = 16):
    lo, hi = g.support()
    return _gl_support(lo, hi, panels, order)


def _inner_log(curve: LipschitzCurve, x: float, f: NormalizedBump) -> complex:
    """int log((gamma(x) - gamma(y))^2) f'(y) dy over supp f."""
    lo, hi = f.support()
    if lo - f.radius / 4 < x < hi + f.radius / 4:
        r = axis_rule([x], [0.0], _LOG_CFG, lo=lo, hi=hi, h_base=f.radius / 16, order=12,
                      far_order=12)
        y, w = r.nodes, r.weights
        ok = y != x
        y, w = y[ok], w[ok]
    else:
        y, w = _gl_support(lo, hi, 32, 16)
    d = curve.gamma(x) - curve.gamma(y)
    return complex(np.sum(w * principal_log(d * d) * f.derivative(y, 1)))


def axis_pairing(curve: LipschitzCurve, f: NormalizedBump, g: NormalizedBump) -> complex:
    if f.is_zero() or g.is_zero():
        return 0j
    x, w = _outer_rule(g)
    inner = np.array([_inner_log(curve, float(xi), f) for xi in x])
    return complex(np.sum(w * g(x) * curve.dgamma(x) * inner) / (2 * math.pi))


def _separated(f: NormalizedBump, g: NormalizedBump) -> bool:
    return abs(f.center - g.center) > 4 * max(f.radius, g.radius)


def wbp_pairing(surface: ProductSurface, f1: NormalizedBump, f2: NormalizedBump,
                g1: NormalizedBump, g2: NormalizedBump) -> complex:
    """<M_b C M_b (f1 f2), g1 g2> for b = gamma1' gamma2'.

    Each axis needs a mean-zero bump on one side unless the two bumps on that
    axis are separated by more than 4 radii.
    """
    for ax, (f, g) in enumerate(((f1, g1), (f2, g2)), start=1):
        if not (f.mean_zero or g.mean_zero or _separated(f, g)):
            raise HypothesisViolation(f"axis {ax}: no cancellation and no separation")
    if any(b.is_zero() for b in (f1, f2, g1, g2)):
        return 0j
    c1, c2 = surface.curves
    return axis_pairing(c1, f1, g1) * axis_pairing(c2, f2, g2)


class DecayFit(NamedTuple):
    slope: float
    separations: list
    values: list


def mixed_wbp_decay(surface: ProductSurface, bumps, separations: Sequence[float],
                    mean_zero: bool) -> DecayFit:
    """|pairing| as the axis-1 test bump moves d away; slope of log|pairing| vs log(d/R1).

    ``bumps`` = (f1, f2, g1, g2).  With ``mean_zero`` the axis-1 test bump is
    replaced by its version that is mean-zero against gamma1'.
    """
    f1, f2, g1, g2 = bumps
    r1 = max(f1.radius, g1.radius)
    seps = [float(d) for d in separations]
    if any(d <= 4 * r1 for d in seps):
        raise HypothesisViolation("separations must exceed 4 R1")
    c1 = surface.curve1
    if mean_zero:
        g1 = make_bump(g1.order, g1.center, g1.radius, c1, g1.amplitude)
    elif g1.mean_zero:
        g1 = make_bump(g1.order, g1.center, g1.radius, None, g1.amplitude)
    if any(b.is_zero() for b in (f1, f2, g1, g2)):
        return DecayFit(float("nan"), seps, [0.0] * len(seps))
    a2 = axis_pairing(surface.curve2, f2, g2)
    vals = []
    for d in seps:
        g = g1.translated(f1.center + d)
        vals.append(abs(axis_pairing(c1, f1, g) * a2))
    slope = fit_log2_slope([d / r1 for d in seps], vals)
    return DecayFit(slope, seps, vals)


# ---------------------------------------------------------------------------
# BMO probe


def bmo_value(curve: LipschitzCurve, x: float, u: float, R: float, psi: NormalizedBump) -> complex:
    """int log((gamma(x) - gamma(y))^2) R^-1 psi((u - y)/R) dy, psi at unit scale about 0."""
    lo, hi = u - R, u + R
    if lo - R / 4 < x < hi + R / 4:
        r = axis_rule([x], [0.0], _LOG_CFG, lo=lo, hi=hi, h_base=R / 16, order=12, far_order=12)
        y, w = r.nodes, r.weights
        ok = y != x
        y, w = y[ok], w[ok]
    else:
        y, w = _gl_support(lo, hi, 32, 16)
    d = curve.gamma(x) - curve.gamma(y)
    return complex(np.sum(w * principal_log(d * d) * psi((u - y) / R)) / R)


def bmo_probe(curve: LipschitzCurve, x, samples, psi: NormalizedBump | None = None) -> float:
    """sup over (u, R) samples of |bmo_value| at each x in ``x``."""
    psi = psi or make_bump(DEFAULT_ORDER, 0.0, 1.0, "one")
    if psi.is_zero():
        return 0.0
    if psi.center != 0.0 or psi.radius != 1.0:
        raise DomainError("psi must be a unit-scale bump about 0")
    if abs(psi.moment(lambda y: np.ones_like(y))) > 1e-10:
        raise HypothesisViolation("psi must be mean-zero")
    xs = np.atleast_1d(np.asarray(x, float))
    best = 0.0
    for xi in xs:
        for u, R in samples:
            best = max(best, abs(bmo_value(curve, float(xi), float(u), float(R), psi)))
    return best


def bmo_samples(x: float, k_lo: int, k_hi: int, offsets=(0.0, 1.0, 4.0)):
    """(u, R) with R = 2^k, k_lo <= k <= k_hi, and u - x in offsets * R."""
    return [(x + o * 2.0**k, 2.0**k) for k in range(k_lo, k_hi + 1) for o in offsets]


# ---------------------------------------------------------------------------
# Tb limit


def _eta_rule(R: float, order: int = 8):
    # panels resolve sin(R y) on 1 <= |y| <= 2
    m = max(16, int(math.ceil(4 * R)))
    y, w = panel_rule(np.linspace(1.0, 2.0, m + 1), [], order, order)
    return np.concatenate([-y[::-1], y]), np.concatenate([w[::-1], w])


def F_R(curve: LipschitzCurve, x, R: float) -> np.ndarray:
    """F_R(x) = int log((gamma(x) - gamma(R y))^2 / R^2) eta'(y) dy with eta = eta_1."""
    x = np.atleast_1d(np.asarray(x, float))
    y, w = _eta_rule(R)
    deta = EtaCutoff(1.0).derivative(y)
    d = (curve.gamma(x)[:, None] - curve.gamma(R * y)[None, :]) / R
    return principal_log(d * d) @ (w * deta)


def flat_limit_constant(order: int = 16, panels: int = 64) -> complex:
    """Direct quadrature of int log(y^2) eta'(y) dy, which vanishes by symmetry."""
    y, w = _gl_support(1.0, 2.0, panels, order)
    y = np.concatenate([-y[::-1], y])
    w = np.concatenate([w[::-1], w])
    return complex(np.sum(w * np.log(y * y) * EtaCutoff(1.0).derivative(y)))


def tb_limit(surface: ProductSurface, psi1: NormalizedBump, psi2: NormalizedBump,
             phi2: NormalizedBump, R_schedule: Sequence[float]) -> ConvergenceReport:
    """|<C(gamma1' eta_R gamma2' phi2), gamma1' psi1 gamma2' psi2>| along R_schedule.

    l2_errors holds |pairing(R)|; max_errors holds sup_x |F_R - F_{R_max}| on
    supp psi1.  ``extra`` carries the F_R profile at the largest R.
    """
    c1, c2 = surface.curves
    sched = [float(r) for r in R_schedule]
    if not sched or np.any(np.diff(sched) <= 0):
        raise DomainError("R schedule must be non-empty and increasing")
    if not psi1.is_zero():
        if not isinstance(psi1.mean_zero_against, LipschitzCurve) and not (
                psi1.mean_zero_against == "one" and c1.is_flat):
            raise HypothesisViolation("psi1 must be mean-zero against gamma1'")
        if abs(psi1.moment(c1.dgamma)) > 1e-10:
            raise HypothesisViolation("psi1 is not mean-zero against gamma1'")
    lo, hi = psi1.support()
    if max(abs(lo), abs(hi)) > sched[-1] / 2:
        raise DomainError("supp psi1 must lie in ball(0, R/2) at the largest R")
    a2 = axis_pairing(c2, phi2, psi2)
    x, w = _outer_rule(psi1)
    weight = w * psi1(x) * c1.dgamma(x) / (2 * math.pi)
    profiles = [F_R(c1, x, R) for R in sched]
    pair = [abs(complex(np.sum(weight * F)) * a2) for F in profiles]
    last = profiles[-1]
    dev = [float(np.max(np.abs(F - last))) for F in profiles]
    return ConvergenceReport(
        parameter="R", schedule=sched, l2_errors=pair, max_errors=dev,
        slope=fit_log2_slope(sched, pair), reference="pairing",
        extra={"x": x.tolist(), "F_R_last": last.tolist(), "axis2_pairing": a2},
    )


# ---------------------------------------------------------------------------
# Operator-norm estimates


def opnorm_ratio(field, surface: ProductSurface, selector: str, p: float, t_min: float,
                 grid: GridSpec, config: QuadratureConfig | None = None,
                 t_levels: int = 6) -> float:
    f_s = field.sample(grid) if isinstance(field, ProductField) else field
    den = field_norm(f_s, surface, p).surface_norm
    if den == 0:
        raise DomainError("zero field")
    if selector == "maximal":
        ts = [t_min * 2.0**k for k in range(t_levels)][::-1]
        out = maximal_transform(field, surface, ts, grid=grid, config=config)
    else:
        out = apply_truncated(field, surface, t_min, KernelSelector(selector), grid=grid,
                              config=config)
    return field_norm(out, surface, p).surface_norm / den


def opnorm_estimate(surface: ProductSurface, selector: str = "QQ", p: float = 2.0,
                    trials: int = 20, t_min: float = 2.0**-6, *, grid: GridSpec | None = None,
                    seed: int = 0, fields=None, config: QuadratureConfig | None = None) -> float:
    """max over a seeded random smooth suite of ||A f||_p / ||f||_p on the grid window."""
    if not (1 < p < math.inf):
        raise DomainError("need 1 < p < inf")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if selector not in ("QQ", "QP", "PQ", "maximal"):
        raise DomainError("selector must be QQ, QP, PQ or maximal")
    grid = grid or GridSpec(4.0, 1 / 16)
    if fields is None:
        rng = np.random.default_rng(seed)
        fields = [random_smooth_field(rng) for _ in range(trials)]
    cfg = config or QuadratureConfig(X=grid.X)
    return max(opnorm_ratio(f, surface, selector, p, t_min, grid, cfg) for f in fields)
