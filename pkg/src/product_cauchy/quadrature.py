"""Composite Gauss-Legendre panel quadrature with near-diagonal refinement.

For t > 0 the truncated kernels are smooth but carry a spike of width t, so
panels of width min(h0, t/8) cover |y - c| <= 8t and then widen
geometrically until they reach the base width.  For t = 0 (the integrable
log singularity) panels shrink geometrically towards the center instead.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import erfc

from .errors import DomainError, ToleranceNotMet

TAIL_MODES = ("truncate", "geometric")


@dataclass(frozen=True)
class QuadratureConfig:
    X: float = 8.0
    h0: float = 0.125
    order: int = 8
    far_order: int = 8
    atol: float = 1e-10
    rtol: float = 1e-8
    tail: str = "truncate"
    near_factor: float = 8.0
    width_factor: float = 0.125
    log_levels: int = 40
    tail_extent: float = 2.0**40

    def __post_init__(self):
        if not (self.X > 0 and self.h0 > 0):
            raise DomainError("quadrature needs X > 0 and h0 > 0")
        if not (self.atol > 0 and self.rtol > 0):
            raise DomainError("atol and rtol must be positive")
        if self.tail not in TAIL_MODES:
            raise DomainError(f"tail mode must be one of {TAIL_MODES}")
        if self.order < 2 or self.far_order < 1:
            raise DomainError("panel orders too small")

    def refinement_width(self, t: float, h_base: float | None = None) -> float:
        h = self.h0 if h_base is None else h_base
        return min(h, abs(t) * self.width_factor) if t != 0 else h

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class TailEstimate(NamedTuple):
    bound: float
    method: str


@functools.lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _base_edges(lo: float, hi: float, h: float) -> np.ndarray:
    m = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
    return np.linspace(lo, hi, m + 1)


def _center_edges(c: float, t: float, h_base: float, cfg: QuadratureConfig) -> np.ndarray:
    t = abs(t)
    if t > 0:
        w = cfg.refinement_width(t, h_base)
        m = int(math.ceil(cfg.near_factor * t / w - 1e-9))
        near = w * np.arange(-m, m + 1)
        r, width, grade = m * w, w, []
        while width < h_base:
            width = min(2.0 * width, h_base)
            r += width
            grade.append(r)
        grade = np.asarray(grade)
        return c + np.concatenate([near, grade, -grade])
    levels = h_base * 0.5 ** np.arange(cfg.log_levels + 1)
    two_h = 2.0 * h_base * np.arange(1, 3)
    return c + np.concatenate([[0.0], levels, -levels, two_h, -two_h])


def panel_edges(centers: Sequence[float], scales: Sequence[float], cfg: QuadratureConfig,
                lo: float | None = None, hi: float | None = None,
                base_edges: np.ndarray | None = None, h_base: float | None = None) -> np.ndarray:
    """Sorted panel breakpoints on [lo, hi] refined around every (center, scale)."""
    lo = -cfg.X if lo is None else lo
    hi = cfg.X if hi is None else hi
    if base_edges is None:
        h_base = cfg.h0 if h_base is None else h_base
        base_edges = _base_edges(lo, hi, h_base)
    elif h_base is None:
        h_base = float(np.min(np.diff(base_edges)))
    parts = [np.asarray(base_edges, float), [lo, hi]]
    for c, t in zip(centers, scales):
        parts.append(_center_edges(float(c), float(t), h_base, cfg))
    e = np.concatenate(parts)
    e = np.unique(e[(e >= lo) & (e <= hi)])
    keep = np.concatenate([[True], np.diff(e) > 1e-13 * max(1.0, abs(hi - lo))])
    return e[keep]


def _geometric_tail_edges(cfg: QuadratureConfig) -> tuple[np.ndarray, np.ndarray]:
    k = int(math.ceil(math.log2(cfg.tail_extent)))
    right = cfg.X * 2.0 ** np.arange(0, k + 1)
    return right, -right[::-1]


def panel_rule(edges: np.ndarray, centers: Sequence[float], order: int, far_order: int,
               far_ratio: float = 4.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on every panel, sorted left to right.

    Panels farther than ``far_ratio`` widths from every center use ``far_order``.
    """
    a, b = edges[:-1], edges[1:]
    width = b - a
    if len(centers):
        c = np.asarray(centers, float)[:, None]
        dist = np.maximum(np.maximum(a[None, :] - c, c - b[None, :]), 0.0).min(axis=0)
    else:
        dist = np.full(a.shape, np.inf)
    far = dist >= far_ratio * width
    nodes, weights = [], []
    for n, mask in ((order, ~far), (far_order, far)):
        if not np.any(mask):
            continue
        x, w = gauss_legendre(n)
        mid = 0.5 * (a[mask] + b[mask])[:, None]
        half = 0.5 * width[mask][:, None]
        nodes.append((mid + half * x).ravel())
        weights.append((half * w).ravel())
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    idx = np.argsort(nodes, kind="stable")
    return nodes[idx], weights[idx]


class AxisRule(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray


def axis_rule(centers, scales, cfg: QuadratureConfig, *, base_edges=None, h_base=None,
              lo=None, hi=None, order=None, far_order=None, tails=False) -> AxisRule:
    centers = np.atleast_1d(np.asarray(centers, float))
    scales = np.atleast_1d(np.asarray(scales, float))
    if scales.size == 1 and centers.size > 1:
        scales = np.full(centers.shape, scales[0])
    edges = panel_edges(centers, scales, cfg, lo=lo, hi=hi, base_edges=base_edges, h_base=h_base)
    n = cfg.order if order is None else order
    fn = cfg.far_order if far_order is None else far_order
    nodes, weights = panel_rule(edges, centers, n, fn)
    if tails:
        right, left = _geometric_tail_edges(cfg)
        xr, wr = panel_rule(right, [], n, n)
        xl, wl = panel_rule(left, [], n, n)
        nodes = np.concatenate([xl, nodes, xr])
        weights = np.concatenate([wl, weights, wr])
    return AxisRule(nodes, weights)


def _check_tolerance(value, err, cfg: QuadratureConfig):
    if not np.isfinite(err) or err > max(cfg.atol, cfg.rtol * abs(value)):
        raise ToleranceNotMet(
            f"quadrature error estimate {err:.3e} exceeds tolerance "
            f"max(atol={cfg.atol:g}, rtol*|value|={cfg.rtol * abs(value):.3e})",
            value=value, err_est=err,
        )


def _geometric_remainder(integrand, cfg: QuadratureConfig) -> float:
    far = cfg.X * 2.0 ** math.ceil(math.log2(cfg.tail_extent))
    vals = np.abs(np.asarray(integrand(np.array([-far, far])), dtype=complex))
    return float(vals.sum() * far)


def integrate_axis(integrand: Callable, center: float, t: float, cfg: QuadratureConfig,
                   tail: TailEstimate | None = None) -> tuple[complex, float]:
    """Integrate a vectorized integrand over [-X, X] (or R with geometric tails).

    Returns (value, err_est).  The estimate is the gap between the configured
    panel orders and orders raised by four on the same panels, plus the tail
    estimate.
    """
    if t < 0:
        raise DomainError("scale t must be non-negative")
    geometric = cfg.tail == "geometric"
    lo_rule = axis_rule([center], [t], cfg, tails=geometric)
    hi_rule = axis_rule([center], [t], cfg, order=cfg.order + 4, far_order=cfg.far_order + 4,
                        tails=geometric)
    v_lo = complex(np.sum(lo_rule.weights * integrand(lo_rule.nodes)))
    v_hi = complex(np.sum(hi_rule.weights * integrand(hi_rule.nodes)))
    if geometric:
        tail = TailEstimate(_geometric_remainder(integrand, cfg), "geometric")
    elif tail is None:
        tail = TailEstimate(0.0, "truncated")
    err = abs(v_hi - v_lo) + tail.bound
    _check_tolerance(v_hi, err, cfg)
    return v_hi, err


def tensor_integrate(integrand2d: Callable, centers, scales, cfg: QuadratureConfig
                     ) -> tuple[complex, float]:
    """Iterated panel quadrature over [-X, X]^2 (axis 1 inner)."""
    (c1, c2), (t1, t2) = centers, scales
    geometric = cfg.tail == "geometric"
    vals = []
    for bump in (0, 4):
        r1 = axis_rule([c1], [t1], cfg, order=cfg.order + bump, far_order=cfg.far_order + bump,
                       tails=geometric)
        r2 = axis_rule([c2], [t2], cfg, order=cfg.order + bump, far_order=cfg.far_order + bump,
                       tails=geometric)
        F = np.asarray(integrand2d(r1.nodes[:, None], r2.nodes[None, :]), dtype=complex)
        inner = r1.weights @ F
        vals.append(complex(inner @ r2.weights))
    err = abs(vals[1] - vals[0])
    _check_tolerance(vals[1], err, cfg)
    return vals[1], err


def tail_bound(kernel: str, t: float, X: float, decay: str, *, field_l1: float = 0.0,
               field_sup: float = 0.0, width: float = 1.0, lam: float = 0.0) -> TailEstimate:
    """Conservative bound on what domain truncation at X discards.

    ``compact``: field supported in [-X/2, X/2]; bounds the kernel's reach to
    outputs with |x| >= X, using |q_t(gamma(x) - gamma(y))| <= C_lam / (pi |x - y|).
    ``gaussian``: field bounded by field_sup * exp(-(y / width)^2); bounds the
    discarded part of the y-integral for outputs inside the window.
    """
    if X <= 0:
        raise DomainError("X must be positive")
    kernel = str(getattr(kernel, "value", kernel)).lower()
    if decay == "zero" or (field_l1 == 0.0 and field_sup == 0.0):
        return TailEstimate(0.0, "zero")
    c_lam = math.sqrt(1 + lam * lam) / (1 - lam * lam)
    uses_q = "q" in kernel
    t = abs(t)
    if decay == "compact":
        d = X / 2.0
        if uses_q:
            k = c_lam / (math.pi * d)
        else:
            k = t / (math.pi * (1 - lam * lam) * d * d)
        return TailEstimate(k * field_l1, "compact-reach")
    if decay == "gaussian":
        if t == 0:
            raise DomainError("gaussian tail bound needs t > 0")
        ksup = c_lam / (math.pi * t)
        mass = width * math.sqrt(math.pi) * erfc(X / width)
        return TailEstimate(ksup * field_sup * mass, "gaussian-tail")
    raise DomainError(f"unknown decay class {decay!r}")
