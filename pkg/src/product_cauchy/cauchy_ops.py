"""Truncated biparameter/partial Cauchy transforms, extension G, quadrant values.

Internal convention: with p_t, q_t normalized by 1/pi,

    C_t f(x) = int q_t1(g1(x1) - g1(y1)) q_t2(g2(x2) - g2(y2)) f(y) g1'(y1) g2'(y2) dy,

C_t^{p1} puts q on axis 1 and p on axis 2, C_t^{p2} the reverse, and P_t is
p (x) p.  The 1/(2 pi i)^2 form of the same operators is -1/4 times these
(``normalization="intro"``).  Every operator is a tensor product of one
quadrature row per output coordinate and axis, so fields given as sums of
separable profiles cost O(rows x nodes) per axis, and sampled fields go
through their cubic B-spline coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
import numpy as np
from scipy import sparse
from scipy.interpolate import BSpline
from scipy.signal import fftconvolve

from .errors import DomainError, OracleUnavailable, SingularKernel, ToleranceNotMet
from .fields import ProductField, Profile
from .kernels import KernelSelector, poisson_pair, principal_log
from .parallel import map_ordered
from .quadrature import QuadratureConfig, axis_rule
from .surface import GridSpec, LipschitzCurve, ProductSurface, SampledField, field_norm

INTRO_FACTOR = math.pi**2 / (2j * math.pi) ** 2  # = -1/4

DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# One-axis quadrature rows


class AxisQuadrature:
    """Quadrature rows for one axis, one row per output coordinate.

    ``scales`` are the refinement scales |t| per row (0 requests geometric
    grading towards the center for the log kernel).  Kernel weights include
    the quadrature weight and, for p/q/cauchy kinds, the factor gamma'(y).
    """

    def __init__(self, curve: LipschitzCurve, x_out, scales, cfg: QuadratureConfig, *,
                 lo: float, hi: float, base_edges=None, h_base=None, order_boost: int = 0):
        self.curve = curve
        self.x = np.asarray(x_out, dtype=float).ravel()
        self.scales = np.broadcast_to(np.abs(np.asarray(scales, float)), self.x.shape).copy()
        self.lo, self.hi = float(lo), float(hi)
        rules = [
            axis_rule([xr], [sr], cfg, lo=lo, hi=hi, base_edges=base_edges, h_base=h_base,
                      order=cfg.order + order_boost, far_order=cfg.far_order + order_boost)
            for xr, sr in zip(self.x, self.scales)
        ]
        counts = np.array([r.nodes.size for r in rules])
        self.offsets = np.concatenate([[0], np.cumsum(counts)])
        self.nodes = np.concatenate([r.nodes for r in rules]) if rules else np.zeros(0)
        self.weights = np.concatenate([r.weights for r in rules]) if rules else np.zeros(0)
        self.row = np.repeat(np.arange(self.x.size), counts)
        self._gy = curve.gamma(self.nodes)
        self._dgy = curve.dgamma(self.nodes)
        self._gx = curve.gamma(self.x)

    @property
    def n_rows(self) -> int:
        return self.x.size

    def _omega(self):
        return self._gx[self.row] - self._gy

    def kernel(self, kind: str, t=None, omega=None) -> np.ndarray:
        """Per-node kernel weights for kind in {p, q, cauchy, log}.

        ``t`` is the signed scale per row for p/q; ``omega`` the off-curve
        point per row for cauchy.
        """
        if kind in ("p", "q"):
            tt = np.broadcast_to(np.asarray(t, float), self.x.shape)[self.row]
            p, q = poisson_pair(self._omega(), tt)
            k = p if kind == "p" else q
            return k * self._dgy * self.weights
        if kind == "cauchy":
            om = np.broadcast_to(np.asarray(omega, complex), self.x.shape)[self.row]
            d = self._gy - om
            if np.any(d == 0):
                raise SingularKernel("extension point lies on the curve")
            return self._dgy * self.weights / (2j * math.pi * d)
        if kind == "log":
            w = self._omega()
            return principal_log(w * w) * self.weights / (2.0 * math.pi)
        raise DomainError(f"unknown kernel kind {kind!r}")

    def reduce(self, vals) -> np.ndarray:
        if self.nodes.size == 0:
            return np.zeros(self.n_rows, dtype=complex)
        return np.add.reduceat(np.asarray(vals, dtype=complex), self.offsets[:-1])

    def constant_tail(self, kind: str, t=None, omega=None) -> np.ndarray:
        """Exact contribution of (-inf, lo] and [hi, inf) for a constant profile.

        Uses the antiderivatives -(i/2pi) Log((w+it)/(w-it)) of p_t g' and
        -(1/2pi) Log(w^2+t^2) of q_t g' in y, w = g(x) - g(y); the two infinite
        endpoints cancel in the symmetric limit.
        """
        if kind == "log":
            return np.zeros(self.n_rows, dtype=complex)
        if kind == "cauchy":
            om = np.broadcast_to(np.asarray(omega, complex), self.x.shape)
            tprime = om.imag - self.curve.L(om.real)
            sub = AxisTailHelper(self.curve, om.real, self.lo, self.hi)
            return 0.5 * (sub.tail("p", tprime) + 1j * sub.tail("q", tprime))
        tt = np.broadcast_to(np.asarray(t, float), self.x.shape)
        return AxisTailHelper(self.curve, self.x, self.lo, self.hi).tail(kind, tt)

    def apply_profile(self, kind: str, prof: Profile, t=None, omega=None,
                      derivative: bool = False, kernel=None) -> np.ndarray:
        k = self.kernel(kind, t=t, omega=omega) if kernel is None else kernel
        vals = prof.derivative(self.nodes) if derivative else prof(self.nodes)
        out = self.reduce(k * vals)
        if prof.is_constant and not derivative:
            out = out + prof(0.0) * self.constant_tail(kind, t=t, omega=omega)
        return out

    def matrix(self, kind: str, knots, t=None, omega=None, kernel=None, chunk: int = 400_000):
        """Dense (rows x n_coef) operator acting on cubic B-spline coefficients."""
        k = self.kernel(kind, t=t, omega=omega) if kernel is None else kernel
        n = self.nodes.size
        bounds = list(range(0, n, chunk)) + [n]
        ncoef = len(knots) - 4

        def block(i):
            a, b = bounds[i], bounds[i + 1]
            D = BSpline.design_matrix(self.nodes[a:b], knots, 3).tocsr()
            R = sparse.csr_matrix((k[a:b], (self.row[a:b], np.arange(b - a))),
                                  shape=(self.n_rows, b - a))
            return (R @ D).toarray()

        parts = map_ordered(block, range(len(bounds) - 1))
        out = np.zeros((self.n_rows, ncoef), dtype=complex)
        for p in parts:
            out += p
        return out


class AxisTailHelper:
    def __init__(self, curve: LipschitzCurve, x, lo, hi):
        self.curve = curve
        self.gx = curve.gamma(np.asarray(x, float))
        self.glo = complex(curve.gamma(lo))
        self.ghi = complex(curve.gamma(hi))

    def _F(self, kind, gy, t):
        w = self.gx - gy
        if kind == "p":
            return -0.5j / math.pi * principal_log((w + 1j * t) / (w - 1j * t))
        return -0.5 / math.pi * principal_log(w * w + t * t)

    def tail(self, kind, t):
        t = np.asarray(t, float)
        return self._F(kind, self.glo, t) - self._F(kind, self.ghi, t)


# ---------------------------------------------------------------------------
# Field plumbing


def _window(field, cfg: QuadratureConfig):
    if isinstance(field, SampledField):
        g = field.grid
        return dict(lo=-g.X, hi=g.X, base_edges=g.nodes, h_base=g.h)
    return dict(lo=-cfg.X, hi=cfg.X, base_edges=None, h_base=cfg.h0)


def _as_pair(t) -> tuple[float, float]:
    if np.isscalar(t):
        return float(t), float(t)
    a, b = t
    return float(a), float(b)


def _unique(x):
    x = np.asarray(x, float).ravel()
    u, inv = np.unique(x, return_inverse=True)
    return u, inv


class _Evaluator:
    """Tensor assembly of axis rows for a field at points or on a grid."""

    def __init__(self, field, surface: ProductSurface, cfg: QuadratureConfig):
        if not isinstance(field, (SampledField, ProductField)):
            raise DomainError("field must be a SampledField or a ProductField")
        self.field = field
        self.surface = surface
        self.cfg = cfg
        self.win = _window(field, cfg)

    def axes(self, x1, x2, s1, s2, log=(False, False), order_boost=0):
        a1 = AxisQuadrature(self.surface.curve1, x1, 0.0 if log[0] else s1, self.cfg,
                            order_boost=order_boost, **self.win)
        a2 = AxisQuadrature(self.surface.curve2, x2, 0.0 if log[1] else s2, self.cfg,
                            order_boost=order_boost, **self.win)
        return a1, a2

    def combine(self, a1, a2, op1, op2, inv1=None, inv2=None, grid=False):
        """op = (kind, t, omega, derivative).  Returns values at points or a grid."""
        f = self.field
        if isinstance(f, SampledField):
            if op1[3] or op2[3]:
                raise DomainError("sampled fields have no closed-form derivatives")
            knots, C = f.spline_coefficients()
            M1 = a1.matrix(op1[0], knots, t=op1[1], omega=op1[2])
            M2 = a2.matrix(op2[0], knots, t=op2[1], omega=op2[2])
            if grid:
                return M1 @ C @ M2.T
            return np.einsum("pm,pm->p", (M1 @ C)[inv1], M2[inv2])
        k1 = None if op1[0] == "id" else a1.kernel(op1[0], t=op1[1], omega=op1[2])
        k2 = None if op2[0] == "id" else a2.kernel(op2[0], t=op2[1], omega=op2[2])
        n_out = (a1.n_rows, a2.n_rows) if grid else (inv1.size,)
        out = np.zeros(n_out, dtype=complex)
        for c, u, v in f.terms:
            r1 = _axis_values(a1, op1, u, k1)
            r2 = _axis_values(a2, op2, v, k2)
            out += c * (np.outer(r1, r2) if grid else r1[inv1] * r2[inv2])
        return out


def _axis_values(ax: AxisQuadrature, op, prof: Profile, kernel):
    kind, t, omega, deriv = op
    if kind == "id":
        return prof.derivative(ax.x) if deriv else prof(ax.x)
    return ax.apply_profile(kind, prof, t=t, omega=omega, derivative=deriv, kernel=kernel)


def _resolve_output(field, grid, points):
    if points is not None:
        x1, x2 = (np.asarray(p, float).ravel() for p in points)
        if x1.shape != x2.shape:
            raise DomainError("point coordinate arrays differ in length")
        return None, x1, x2
    if grid is None:
        if isinstance(field, SampledField):
            grid = field.grid
        else:
            raise DomainError("closed-form fields need an output grid or points")
    return grid, grid.nodes, grid.nodes


# ---------------------------------------------------------------------------
# Public operations


def apply_truncated(field, surface: ProductSurface, t, selector, *, grid: GridSpec | None = None,
                    points=None, config: QuadratureConfig | None = None,
                    normalization: str = "internal", check: bool = False):
    """C_t (QQ), C_t^{p1} (QP), C_t^{p2} (PQ) or P_t (PP) applied to a field.

    Returns a SampledField on ``grid`` (default: the field's grid) or an array
    at ``points = (x1, x2)``.  With ``check=True`` a few rows are recomputed
    with panel orders raised by four and ToleranceNotMet is raised if they
    disagree beyond max(atol, rtol |value|).
    """
    cfg = config or DEFAULT_CONFIG
    selector = KernelSelector(selector)
    t1, t2 = _as_pair(t)
    if not (t1 > 0 and t2 > 0):
        raise DomainError("truncation parameters must be positive")
    if isinstance(field, ProductField) and not field.terms:
        out_grid, x1, x2 = _resolve_output(field, grid, points)
        if out_grid is None:
            return np.zeros(x1.size, dtype=complex)
        return SampledField(out_grid, np.zeros((out_grid.n, out_grid.n)))
    out_grid, x1, x2 = _resolve_output(field, grid, points)
    k1, k2 = selector.axis_kinds
    ev = _Evaluator(field, surface, cfg)
    if out_grid is not None:
        a1, a2 = ev.axes(x1, x2, t1, t2)
        vals = ev.combine(a1, a2, (k1, t1, None, False), (k2, t2, None, False), grid=True)
    else:
        u1, inv1 = _unique(x1)
        u2, inv2 = _unique(x2)
        a1, a2 = ev.axes(u1, u2, t1, t2)
        vals = ev.combine(a1, a2, (k1, t1, None, False), (k2, t2, None, False), inv1, inv2)
    if normalization == "intro" and selector is not KernelSelector.PP:
        vals = vals * INTRO_FACTOR
    elif normalization not in ("internal", "intro"):
        raise DomainError(f"unknown normalization {normalization!r}")
    if check:
        _control(field, surface, (t1, t2), selector, x1, x2, vals, out_grid, cfg, normalization)
    if out_grid is None:
        return vals
    return SampledField(out_grid, vals)


def _control(field, surface, t, selector, x1, x2, vals, out_grid, cfg, normalization, n_ctrl=6):
    if out_grid is not None:
        idx = np.linspace(0, x1.size - 1, n_ctrl).round().astype(int)
        p1 = x1[idx][:, None].repeat(n_ctrl, 1).ravel()
        p2 = x2[idx][None, :].repeat(n_ctrl, 0).ravel()
        ref = vals[np.ix_(idx, idx)].ravel()
    else:
        sel = np.linspace(0, x1.size - 1, min(n_ctrl * n_ctrl, x1.size)).round().astype(int)
        p1, p2, ref = x1[sel], x2[sel], vals[sel]
    ev = _Evaluator(field, surface, cfg)
    u1, inv1 = _unique(p1)
    u2, inv2 = _unique(p2)
    a1, a2 = ev.axes(u1, u2, t[0], t[1], order_boost=4)
    k1, k2 = KernelSelector(selector).axis_kinds
    hi = ev.combine(a1, a2, (k1, t[0], None, False), (k2, t[1], None, False), inv1, inv2)
    if normalization == "intro" and selector is not KernelSelector.PP:
        hi = hi * INTRO_FACTOR
    err = float(np.max(np.abs(hi - ref)))
    scale = float(np.max(np.abs(hi)))
    if err > max(cfg.atol, cfg.rtol * scale):
        raise ToleranceNotMet(f"control rows differ by {err:.3e}", value=scale, err_est=err)


@dataclass(frozen=True)
class QuadrantValues:
    """Boundary values g++, g+-, g-+, g-- at one or more surface points."""

    g_pp: np.ndarray
    g_pm: np.ndarray
    g_mp: np.ndarray
    g_mm: np.ndarray
    P: np.ndarray = dc_field(repr=False, default=None)
    C: np.ndarray = dc_field(repr=False, default=None)
    C_p1: np.ndarray = dc_field(repr=False, default=None)
    C_p2: np.ndarray = dc_field(repr=False, default=None)

    def jump(self):
        return self.g_pp - self.g_pm - self.g_mp + self.g_mm

    def total(self):
        return self.g_pp + self.g_pm + self.g_mp + self.g_mm

    def quadrant(self, tag: str):
        return {"++": self.g_pp, "+-": self.g_pm, "-+": self.g_mp, "--": self.g_mm}[tag]


QUADRANT_SIGNS = {"++": (1, 1), "+-": (1, -1), "-+": (-1, 1), "--": (-1, -1)}


def _assemble(P, C, Q1, Q2) -> QuadrantValues:
    # G(z1 + s1 i t1, z2 + s2 i t2) = 1/4 sum over the p/q products with
    # p_{-t} = -p_t and q_{-t} = q_t folded into the signs.
    g_pp = 0.25 * (P - C + 1j * Q1 + 1j * Q2)
    g_pm = 0.25 * (-P - C - 1j * Q1 + 1j * Q2)
    g_mp = 0.25 * (-P - C + 1j * Q1 - 1j * Q2)
    g_mm = 0.25 * (P - C - 1j * Q1 - 1j * Q2)
    return QuadrantValues(g_pp, g_pm, g_mp, g_mm, P, C, Q1, Q2)


def _four_operators(field, surface, t, cfg, grid=None, points=None):
    t1, t2 = _as_pair(t)
    if not (t1 > 0 and t2 > 0):
        raise DomainError("truncation parameters must be positive")
    out_grid, x1, x2 = _resolve_output(field, grid, points)
    ev = _Evaluator(field, surface, cfg)
    on_grid = out_grid is not None
    if on_grid:
        a1, a2 = ev.axes(x1, x2, t1, t2)
        inv1 = inv2 = None
    else:
        u1, inv1 = _unique(x1)
        u2, inv2 = _unique(x2)
        a1, a2 = ev.axes(u1, u2, t1, t2)
    if isinstance(field, ProductField) and not field.terms:
        z = np.zeros((x1.size, x2.size) if on_grid else x1.size, dtype=complex)
        return out_grid, (z, z, z, z)
    if isinstance(field, SampledField):
        knots, Cf = field.spline_coefficients()
        M = {(ax, k): a.matrix(k, knots, t=tt)
             for ax, a, tt in ((1, a1, t1), (2, a2, t2)) for k in ("p", "q")}

        def op(k1, k2):
            if on_grid:
                return M[1, k1] @ Cf @ M[2, k2].T
            return np.einsum("pm,pm->p", (M[1, k1] @ Cf)[inv1], M[2, k2][inv2])
    else:
        kern = {(1, k): a1.kernel(k, t=t1) for k in ("p", "q")}
        kern.update({(2, k): a2.kernel(k, t=t2) for k in ("p", "q")})
        rows = {}
        for i, (c, u, v) in enumerate(field.terms):
            for k in ("p", "q"):
                rows[1, k, i] = a1.apply_profile(k, u, t=t1, kernel=kern[1, k])
                rows[2, k, i] = a2.apply_profile(k, v, t=t2, kernel=kern[2, k])

        def op(k1, k2):
            acc = 0
            for i, (c, _, _) in enumerate(field.terms):
                r1, r2 = rows[1, k1, i], rows[2, k2, i]
                acc = acc + c * (np.outer(r1, r2) if on_grid else r1[inv1] * r2[inv2])
            return acc
    return out_grid, (op("p", "p"), op("q", "q"), op("q", "p"), op("p", "q"))


def quadrant_decomposition(field, surface: ProductSurface, t, z=None, *, grid=None,
                           config: QuadratureConfig | None = None) -> QuadrantValues:
    """Four quadrant values from one evaluation of P_t, C_t, C_t^{p1}, C_t^{p2}.

    ``z = (x1, x2)`` are parameter coordinates of surface points; without it
    the values are returned on ``grid`` (or the field's grid).
    """
    cfg = config or DEFAULT_CONFIG
    _, (P, C, Q1, Q2) = _four_operators(field, surface, t, cfg, grid=grid, points=z)
    return _assemble(P, C, Q1, Q2)


@dataclass(frozen=True)
class ExtensionQuery:
    omega1: np.ndarray
    omega2: np.ndarray
    quadrant: str | None = None

    @classmethod
    def at(cls, surface: ProductSurface, z1, z2, t1, t2, quadrant: str = "++") -> "ExtensionQuery":
        s1, s2 = QUADRANT_SIGNS[quadrant]
        z1 = np.asarray(z1, float)
        z2 = np.asarray(z2, float)
        w1 = surface.curve1.gamma(z1) + 1j * s1 * np.asarray(t1, float)
        w2 = surface.curve2.gamma(z2) + 1j * s2 * np.asarray(t2, float)
        return cls(np.atleast_1d(w1), np.atleast_1d(w2), quadrant)


def extend(field, surface: ProductSurface, query: ExtensionQuery,
           config: QuadratureConfig | None = None):
    """G(omega1, omega2) = (2 pi i)^-2 int g(xi) dxi / ((xi1 - omega1)(xi2 - omega2)).

    Direct quadrature of the Cauchy kernel; rows are refined around Re omega_j
    at the scale of the distance Im omega_j - L_j(Re omega_j) to the curve.
    """
    cfg = config or DEFAULT_CONFIG
    w1 = np.atleast_1d(np.asarray(query.omega1, complex))
    w2 = np.atleast_1d(np.asarray(query.omega2, complex))
    if w1.shape != w2.shape:
        raise DomainError("omega arrays differ in length")
    d1 = w1.imag - surface.curve1.L(w1.real)
    d2 = w2.imag - surface.curve2.L(w2.real)
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise SingularKernel("extension point lies on the surface")
    if isinstance(field, ProductField) and not field.terms:
        return np.zeros(w1.size, dtype=complex)
    ev = _Evaluator(field, surface, cfg)
    a1 = AxisQuadrature(surface.curve1, w1.real, d1, cfg, **ev.win)
    a2 = AxisQuadrature(surface.curve2, w2.real, d2, cfg, **ev.win)
    idx = np.arange(w1.size)
    return ev.combine(a1, a2, ("cauchy", None, w1, False), ("cauchy", None, w2, False), idx, idx)


def _values_on(field, grid: GridSpec) -> np.ndarray:
    if isinstance(field, SampledField):
        if field.grid != grid:
            raise DomainError("field grid differs from the output grid")
        return field.values
    return field.sample(grid).values


def jump_reconstruct(field, surface: ProductSurface, t, *, grid: GridSpec | None = None,
                     config: QuadratureConfig | None = None):
    """(g++ - g+- - g-+ + g--, relative L^2(Gamma) error against the field)."""
    cfg = config or DEFAULT_CONFIG
    out_grid, _, _ = _resolve_output(field, grid, None)
    q = quadrant_decomposition(field, surface, t, grid=out_grid, config=cfg)
    recon = SampledField(out_grid, q.jump())
    f = SampledField(out_grid, _values_on(field, out_grid))
    den = field_norm(f, surface, 2).surface_norm
    num = field_norm(recon - f, surface, 2).surface_norm
    return recon, (num / den if den > 0 else 0.0)


def _t_pairs(t_grid):
    return [_as_pair(t) for t in t_grid]


def maximal_transform(field, surface: ProductSurface, t_grid, *, grid: GridSpec | None = None,
                      points=None, config: QuadratureConfig | None = None):
    """sup over t in t_grid of |C_t f|, a lower bound for the maximal transform."""
    pairs = _t_pairs(t_grid)
    if not pairs:
        raise DomainError("empty t grid")
    if any(a <= 0 or b <= 0 for a, b in pairs):
        raise DomainError("t grid must be positive")
    best = None
    for tp in pairs:
        out = apply_truncated(field, surface, tp, "QQ", grid=grid, points=points, config=config)
        a = np.abs(out.values if isinstance(out, SampledField) else out)
        best = a if best is None else np.maximum(best, a)
    if isinstance(out, SampledField):
        return SampledField(out.grid, best)
    return best


# Geometric tail panels beyond X are too wide to follow an oscillating curve,
# so the resolved window is kept large.
SEMIGROUP_CONFIG = QuadratureConfig(X=256.0, h0=0.25, tail="geometric", atol=1e-11, rtol=1e-9)


def semigroup_integral(curve: LipschitzCurve, z: float, zeta: float, t: float, s: float,
                       config: QuadratureConfig | None = None) -> tuple[complex, float]:
    """int_Gamma q_t(gamma(z) - xi) p_s(xi - gamma(zeta)) dxi and its error estimate."""
    cfg = config or SEMIGROUP_CONFIG
    if t == 0 or s == 0:
        raise DomainError("t and s must be non-zero")
    gz, gzeta = complex(curve.gamma(z)), complex(curve.gamma(zeta))
    geometric = cfg.tail == "geometric"
    vals = []
    for boost in (0, 4):
        r = axis_rule([z, zeta], [abs(t), abs(s)], cfg, order=cfg.order + boost,
                      far_order=cfg.far_order + boost, tails=geometric)
        xi = curve.gamma(r.nodes)
        _, q = poisson_pair(gz - xi, t)
        p, _ = poisson_pair(xi - gzeta, s)
        vals.append(complex(np.sum(q * p * curve.dgamma(r.nodes) * r.weights)))
    return vals[1], abs(vals[1] - vals[0])


def semigroup_check(curve: LipschitzCurve, z_param: float, zeta_param: float, t: float, s: float,
                    config: QuadratureConfig | None = None) -> float:
    """|int q_t(gamma(z) - xi) p_s(xi - gamma(zeta)) dxi - q_{t+s}(gamma(z) - gamma(zeta))|.

    For real t, s of either sign the right side is sign(s) q_{|t|+|s|}, which
    follows from p_{-s} = -p_s and q_{-t} = q_t.
    """
    lhs, _ = semigroup_integral(curve, z_param, zeta_param, t, s, config)
    d = complex(curve.gamma(z_param) - curve.gamma(zeta_param))
    _, rhs = poisson_pair(d, abs(t) + abs(s))
    rhs = math.copysign(1.0, s) * rhs
    return abs(lhs - rhs)


LOG_KINDS = {"full": ("log", "log"), "p1": ("log", "id"), "p2": ("id", "log")}


def log_potential(field: ProductField, surface: ProductSurface, x=None, *, grid=None,
                  kind: str = "full", config: QuadratureConfig | None = None):
    """t-free log representation of C~(bf), or of the partial transforms.

    full: (1/4 pi^2) int log((g1(x1)-g1(y1))^2) log((g2(x2)-g2(y2))^2) d1 d2 f dy
    p1:   (1/2 pi) int log((g1(x1)-g1(y1))^2) d1 f(y1, x2) dy1
    p2:   (1/2 pi) int log((g2(x2)-g2(y2))^2) d2 f(x1, y2) dy2
    """
    cfg = config or DEFAULT_CONFIG
    if not isinstance(field, ProductField):
        raise DomainError("log_potential needs a closed-form field with analytic partials")
    if kind not in LOG_KINDS:
        raise DomainError(f"kind must be one of {tuple(LOG_KINDS)}")
    if field.terms and not field.compactly_supported_in(cfg.X):
        raise DomainError("field must be compactly supported inside the window")
    k1, k2 = LOG_KINDS[kind]
    out_grid, x1, x2 = _resolve_output(field, grid, x)
    if not field.terms:
        shape = (x1.size, x2.size) if out_grid is not None else x1.size
        z = np.zeros(shape, dtype=complex)
        return SampledField(out_grid, z) if out_grid is not None else z
    ev = _Evaluator(field, surface, cfg)
    on_grid = out_grid is not None
    if on_grid:
        u1, inv1, u2, inv2 = x1, None, x2, None
    else:
        u1, inv1 = _unique(x1)
        u2, inv2 = _unique(x2)
    a1, a2 = ev.axes(u1, u2, 0.0, 0.0, log=(True, True))
    vals = ev.combine(a1, a2, (k1, None, None, k1 == "log"), (k2, None, None, k2 == "log"),
                      inv1, inv2, grid=on_grid)
    return SampledField(out_grid, vals) if on_grid else vals


def hilbert_fft(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Discrete Hilbert transform with multiplier -i sign(xi) along one axis.

    Uses the ideal discrete Hilbert filter 2 / (pi m) on odd offsets m, which
    is exact for the band-limited interpolant of the samples; the aperiodic
    convolution runs through the FFT, so no periodic images enter.
    """
    n = values.shape[axis]
    m = np.arange(-(n - 1), n)
    kern = np.where(m % 2 == 1, 2.0 / (math.pi * np.where(m == 0, 1, m)), 0.0)
    shape = [1] * values.ndim
    shape[axis] = kern.size
    full = fftconvolve(values, kern.reshape(shape), mode="full", axes=axis)
    return np.take(full, np.arange(n - 1, 2 * n - 1), axis=axis)


def flat_oracle(field, surface: ProductSurface | None = None, *,
                grid: GridSpec | None = None) -> SampledField:
    """H1 H2 f by FFT, the t -> 0 limit of C_t on the flat surface (H p_1 = q_1)."""
    if surface is not None and not surface.is_flat:
        raise OracleUnavailable("the FFT Hilbert oracle only exists for the flat surface")
    if isinstance(field, ProductField):
        if grid is None:
            raise DomainError("closed-form fields need a grid")
        field = field.sample(grid)
    v = hilbert_fft(field.values, field.grid.h, 0)
    v = hilbert_fft(v, field.grid.h, 1)
    return SampledField(field.grid, v)


@dataclass
class ConvergenceReport:
    """Per-step errors along a monotone schedule and the fitted log2 decay slope."""

    parameter: str
    schedule: list
    l2_errors: list
    max_errors: list
    slope: float
    reference: str = ""
    extra: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        keys = [s[0] if isinstance(s, (tuple, list)) else s for s in self.schedule]
        d = np.diff(np.asarray(keys, float))
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError("schedule must be strictly monotone")

    def csv_rows(self):
        rows = []
        for s, e, m in zip(self.schedule, self.l2_errors, self.max_errors):
            t1, t2 = s if isinstance(s, (tuple, list)) else (s, s)
            rows.append((t1, t2, e, m))
        return rows

    def monotone_decreasing(self) -> bool:
        e = np.asarray(self.l2_errors, float)
        return bool(np.all(np.diff(e) < 0))


def fit_log2_slope(params, values) -> float:
    params = np.asarray(params, float)
    values = np.asarray(values, float)
    ok = (params > 0) & (values > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log2(params[ok]), np.log2(values[ok]), 1)[0])


def _norms(diff, out_grid, surface):
    if out_grid is not None:
        l2 = field_norm(SampledField(out_grid, diff), surface, 2).surface_norm
    else:
        l2 = float(np.sqrt(np.mean(np.abs(diff) ** 2)))
    return l2, float(np.max(np.abs(diff))) if diff.size else 0.0


def t_sweep(field, surface: ProductSurface, selector, schedule, *, grid=None, points=None,
            reference: str = "auto", config: QuadratureConfig | None = None) -> ConvergenceReport:
    """Errors of A_t f along a decreasing t schedule against a reference.

    reference: "log" (log_potential, QQ/QP/PQ with compactly supported
    closed-form fields), "field" (f itself, PP), "fft" (flat QQ oracle),
    "last" (the smallest-t member), "cauchy" (successive differences), or
    "auto", which prefers log, then field for PP, then last.
    """
    cfg = config or DEFAULT_CONFIG
    selector = KernelSelector(selector)
    pairs = _t_pairs(schedule)
    if not pairs:
        raise DomainError("empty schedule")
    firsts = np.array([p[0] for p in pairs])
    if pairs and np.any(np.diff(firsts) >= 0):
        raise DomainError("schedule must be strictly decreasing")
    out_grid, x1, x2 = _resolve_output(field, grid, points)
    pts = None if out_grid is not None else (x1, x2)

    def run(tp):
        out = apply_truncated(field, surface, tp, selector, grid=out_grid, points=pts, config=cfg)
        return out.values if isinstance(out, SampledField) else out

    results = [run(tp) for tp in pairs]
    if reference == "auto":
        closed = isinstance(field, ProductField) and field.terms and field.compactly_supported_in(cfg.X)
        if selector is KernelSelector.PP:
            reference = "field"
        elif closed:
            reference = "log"
        else:
            reference = "last"
    if reference == "log":
        kind = {"QQ": "full", "QP": "p1", "PQ": "p2"}[selector.value]
        ref = log_potential(field, surface, pts, grid=out_grid, kind=kind, config=cfg)
        ref = ref.values if isinstance(ref, SampledField) else ref
        diffs = [r - ref for r in results]
    elif reference == "field":
        if out_grid is None:
            ref = field(x1, x2) if isinstance(field, ProductField) else None
            if ref is None:
                raise DomainError("field reference at points needs a closed-form field")
        else:
            ref = _values_on(field, out_grid)
        diffs = [r - ref for r in results]
    elif reference == "fft":
        if out_grid is None:
            raise DomainError("fft reference needs a grid")
        ref = flat_oracle(field, surface, grid=out_grid).values
        diffs = [r - ref for r in results]
    elif reference == "last":
        diffs = [r - results[-1] for r in results[:-1]]
        pairs = pairs[:-1]
    elif reference == "cauchy":
        diffs = [results[i] - results[i + 1] for i in range(len(results) - 1)]
        pairs = pairs[:-1]
    else:
        raise DomainError(f"unknown reference {reference!r}")
    l2, mx = zip(*[_norms(d, out_grid, surface) for d in diffs]) if diffs else ((), ())
    slope = fit_log2_slope([p[0] for p in pairs], l2)
    return ConvergenceReport("t", [tuple(p) for p in pairs], list(l2), list(mx), slope, reference)


def poisson_mass(surface: ProductSurface, t, x=(0.0, 0.0), config: QuadratureConfig | None = None):
    """P_t 1 at one surface point, with the exact tails beyond the window."""
    from .fields import Constant

    one = ProductField.single(Constant(1.0), Constant(1.0))
    pts = (np.atleast_1d(float(x[0])), np.atleast_1d(float(x[1])))
    return complex(apply_truncated(one, surface, t, "PP", points=pts, config=config)[0])
