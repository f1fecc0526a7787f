"""Para-accretive approximations to the identity on uniform grids (n1 = n2 = 1).

P_k is convolution with phi_k(x) = 2^k phi(2^k x), phi supported in
B(0, 1/8); S_k^b = P_k M_{(P_k b)^-1} P_k and D_k^b = S_{k+1}^b - S_k^b.
Convolutions extend by zero outside the window and are computed as direct
sums, so kernels vanish exactly off their support.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import integrate
from scipy.ndimage import convolve1d

from .errors import AccretiveLowerBoundFailure, DomainError, NotAccretive
from .surface import GridSpec, LipschitzCurve

LOWER_BOUND = 1e-6


@functools.lru_cache(maxsize=None)
def _unit_bump_mass() -> float:
    val, _ = integrate.quad(lambda u: math.exp(-1.0 / (1.0 - u * u)), -1.0, 1.0,
                            epsabs=0.0, epsrel=1e-12, limit=400)
    return val


@dataclass(frozen=True)
class Mollifier:
    """phi(x) = Z exp(-1 / (1 - (8x)^2)) on |x| < 1/8."""

    radius: float = 0.125

    @property
    def Z(self) -> float:
        return 1.0 / (self.radius * _unit_bump_mass())

    def __call__(self, x):
        u = np.asarray(x, dtype=float) / self.radius
        inside = np.abs(u) < 1.0
        s = np.where(inside, 1.0 - u * u, 1.0)
        return np.where(inside, self.Z * np.exp(-1.0 / s), 0.0)

    def scaled(self, k: int, x):
        return 2.0**k * self(2.0**k * np.asarray(x, dtype=float))

    def grid_weights(self, k: int, h: float) -> np.ndarray:
        """Samples h phi_k(jh) on the support, renormalized to sum exactly 1."""
        r = self.radius * 2.0**-k
        m = int(math.floor(r / h))
        j = np.arange(-m, m + 1)
        w = self.scaled(k, j * h) * h
        if w.sum() <= 0:
            w = np.zeros(2 * m + 1)
            w[m] = 1.0
        return w / w.sum()


MOLLIFIER = Mollifier()


def _conv(f: np.ndarray, w: np.ndarray, axis: int) -> np.ndarray:
    f = np.asarray(f)
    if np.iscomplexobj(f):
        return (convolve1d(f.real, w, axis=axis, mode="constant", cval=0.0)
                + 1j * convolve1d(f.imag, w, axis=axis, mode="constant", cval=0.0))
    return convolve1d(f.astype(float), w, axis=axis, mode="constant", cval=0.0)


@dataclass(frozen=True)
class ScaleRange:
    kmin: int
    kmax: int

    def __post_init__(self):
        if self.kmin > self.kmax:
            raise DomainError("kmin must not exceed kmax")

    def validate(self, grid: GridSpec) -> "ScaleRange":
        if 2.0**-self.kmax < 4 * grid.h - 1e-15:
            raise DomainError(f"scale 2^-{self.kmax} is below 4h on this grid")
        if 2.0**-self.kmin > grid.X / 4 + 1e-15:
            raise DomainError(f"scale 2^{-self.kmin} exceeds X/4 on this grid")
        return self

    @classmethod
    def default_for(cls, grid: GridSpec) -> "ScaleRange":
        kmin = math.ceil(math.log2(4.0 / grid.X) - 1e-12)
        kmax = math.floor(math.log2(1.0 / (4.0 * grid.h)) + 1e-12)
        return cls(kmin, kmax)

    @property
    def scales(self) -> list[int]:
        return list(range(self.kmin, self.kmax + 1))

    def margin(self) -> float:
        return 2.0**-self.kmin


class ParaAccretiveFunction:
    """Values of b on a 1D grid together with its accretivity data."""

    def __init__(self, grid: GridSpec, values, depth: int = 6):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n,):
            raise DomainError("b must have one value per grid node")
        if not np.all(np.isfinite(values)) or np.any(values == 0):
            raise DomainError("b and 1/b must be bounded")
        self.grid = grid
        self.values = values
        self.depth = depth
        self._c0 = None
        self._pk = {}

    @classmethod
    def from_curve(cls, curve: LipschitzCurve, grid: GridSpec) -> "ParaAccretiveFunction":
        return cls(grid, curve.dgamma(grid.nodes))

    @classmethod
    def one(cls, grid: GridSpec) -> "ParaAccretiveFunction":
        return cls(grid, np.ones(grid.n))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def inverse_sup_norm(self) -> float:
        return float(np.max(1.0 / np.abs(self.values)))

    @property
    def c0_estimate(self) -> float:
        if self._c0 is None:
            self._c0 = para_accretivity_check(self, self.depth)
        return self._c0

    def Pk_b(self, k: int) -> np.ndarray:
        if k not in self._pk:
            pk = _conv(self.values, MOLLIFIER.grid_weights(k, self.grid.h), 0)
            if np.min(np.abs(pk)) < LOWER_BOUND:
                raise AccretiveLowerBoundFailure(f"min |P_{k} b| = {np.min(np.abs(pk)):.3e}")
            self._pk[k] = pk
        return self._pk[k]


def para_accretivity_check(b: ParaAccretiveFunction, depth: int = 6, sub_depth: int = 3) -> float:
    """min over dyadic Q of max over dyadic R in Q of |int_R b| / |Q|.

    Q runs over the dyadic subdivisions of the window down to ``depth``
    levels and R over the dyadic descendants of Q up to ``sub_depth`` levels
    below it.  Sums are cell sums of the nodal values.
    """
    n = b.grid.n
    if 2 ** (depth + sub_depth) > n - 1:
        raise DomainError("depth too large for the grid")
    cells = 0.5 * (b.values[:-1] + b.values[1:]) * b.grid.h
    csum = np.concatenate([[0.0], np.cumsum(cells)])
    ncell = n - 1
    best_min = np.inf
    for level in range(depth + 1):
        nq = 2**level
        edges_q = np.round(np.linspace(0, ncell, nq + 1)).astype(int)
        for i in range(nq):
            a, c = edges_q[i], edges_q[i + 1]
            size = (c - a) * b.grid.h
            best = 0.0
            for sub in range(sub_depth + 1):
                e = np.round(np.linspace(a, c, 2**sub + 1)).astype(int)
                vals = np.abs(csum[e[1:]] - csum[e[:-1]])
                best = max(best, float(vals.max()) / size)
            best_min = min(best_min, best)
    if not best_min > 1e-12:
        raise NotAccretive(f"dyadic accretivity estimate {best_min:.3e} is not positive")
    return float(best_min)


class LPOperator:
    """S_k^b or D_k^b on a 1D grid, applied along one axis of an array."""

    def __init__(self, kind: str, k: int, b: ParaAccretiveFunction):
        if kind not in ("S", "D"):
            raise DomainError("kind must be 'S' or 'D'")
        self.kind = kind
        self.k = k
        self.b = b
        self.grid = b.grid
        for kk in (k, k + 1) if kind == "D" else (k,):
            b.Pk_b(kk)

    def _S(self, k: int, f: np.ndarray, axis: int) -> np.ndarray:
        w = MOLLIFIER.grid_weights(k, self.grid.h)
        pkb = self.b.Pk_b(k)
        shape = [1] * f.ndim
        shape[axis] = pkb.size
        return _conv(_conv(f, w, axis) / pkb.reshape(shape), w, axis)

    def apply(self, f, axis: int = 0) -> np.ndarray:
        f = np.asarray(f)
        if f.shape[axis] != self.grid.n:
            raise DomainError("array length does not match the operator grid")
        if self.kind == "S":
            return self._S(self.k, f, axis)
        return self._S(self.k + 1, f, axis) - self._S(self.k, f, axis)

    def kernel(self, max_n: int = 4097) -> np.ndarray:
        """Dense kernel K[i, j] with (Tf)(x_i) = sum_j K[i, j] f(x_j) h."""
        n = self.grid.n
        if n > max_n:
            raise DomainError(f"dense kernel of size {n} exceeds max_n={max_n}")
        eye = np.eye(n) / self.grid.h
        return self.apply(eye, axis=0)

    def support_radius(self) -> float:
        k = self.k + 1 if self.kind == "D" else self.k
        return 2 * MOLLIFIER.radius * 2.0 ** -min(self.k, k)


def build_Sk(b: ParaAccretiveFunction, k: int) -> LPOperator:
    return LPOperator("S", k, b)


def build_Dk(b: ParaAccretiveFunction, k: int) -> LPOperator:
    return LPOperator("D", k, b)


def bump_envelope(k: int, N: float, x):
    """Phi_k^N(x) = 2^k / (1 + 2^k |x|)^N."""
    if not N > 1:
        raise DomainError("N must exceed the dimension 1")
    x = np.asarray(x, dtype=float)
    out = 2.0**k / (1.0 + 2.0**k * np.abs(x)) ** N
    return float(out) if out.ndim == 0 else out


def _dyadic_menu(n: int) -> list[int]:
    out, s = [], 1
    while s <= n:
        out.append(s)
        s *= 2
    return out


def _window_means(a: np.ndarray, length: int, axis: int) -> np.ndarray:
    """Means over every window of ``length`` nodes meeting the array (zero padded)."""
    pad = [(0, 0)] * a.ndim
    pad[axis] = (length - 1, length - 1)
    ap = np.pad(a, pad)
    c = np.cumsum(ap, axis=axis)
    zero_shape = list(c.shape)
    zero_shape[axis] = 1
    c = np.concatenate([np.zeros(zero_shape), c], axis=axis)
    hi = np.take(c, np.arange(length, c.shape[axis]), axis=axis)
    lo = np.take(c, np.arange(0, c.shape[axis] - length), axis=axis)
    return (hi - lo) / length


def strong_maximal(field2d, menu=None) -> np.ndarray:
    """Max over axis-parallel grid rectangles containing each node of the mean of |f|.

    Side lengths (in nodes) are drawn from ``menu`` (default: powers of two
    up to the grid size) independently per axis; the field is zero outside.
    """
    a = np.abs(np.asarray(field2d, dtype=complex)).astype(float)
    if a.ndim != 2:
        raise DomainError("strong_maximal expects a 2D array")
    n1, n2 = a.shape
    m1 = list(menu) if menu else _dyadic_menu(n1)
    m2 = list(menu) if menu else _dyadic_menu(n2)
    out = np.zeros_like(a)
    for l1 in m1:
        s1 = _window_means(a, l1, 0)
        for l2 in m2:
            s = _window_means(s1, l2, 1)
            s = sliding_window_view(s, l1, axis=0).max(axis=-1)
            s = sliding_window_view(s, l2, axis=1).max(axis=-1)
            np.maximum(out, s, out=out)
    return out


def biparameter_D(b1: ParaAccretiveFunction, b2: ParaAccretiveFunction, k1: int, k2: int,
                  field2d, order: str = "12") -> np.ndarray:
    """D_{k1}^{b1} along axis 0 then D_{k2}^{b2} along axis 1 (or the reverse)."""
    f = np.asarray(field2d)
    d1, d2 = build_Dk(b1, k1), build_Dk(b2, k2)
    if order == "12":
        return d2.apply(d1.apply(f, axis=0), axis=1)
    return d1.apply(d2.apply(f, axis=1), axis=0)


def _interior(grid: GridSpec, margin: float) -> np.ndarray:
    return np.abs(grid.nodes) <= grid.X - margin + 1e-12


class SquareFunctionResult(NamedTuple):
    Sf: np.ndarray
    ratio: float
    energies: dict


def square_function(b1: ParaAccretiveFunction, b2: ParaAccretiveFunction, rng: ScaleRange,
                    field2d, p: float = 2.0) -> SquareFunctionResult:
    """Sf = (sum_k |D_k f|^2)^(1/2) and ||Sf||_p / ||f||_p away from the edges."""
    if not (1 < p < math.inf):
        raise DomainError("need 1 < p < inf")
    grid = b1.grid
    f = np.asarray(field2d)
    inner = _interior(grid, rng.margin())
    mask = np.outer(inner, inner)
    h2 = grid.h**2
    ops1 = {k: build_Dk(b1, k) for k in rng.scales}
    ops2 = {k: build_Dk(b2, k) for k in rng.scales}
    sq = np.zeros(f.shape)
    energies = {}
    for k1 in rng.scales:
        g = ops1[k1].apply(f, axis=0)
        for k2 in rng.scales:
            d = ops2[k2].apply(g, axis=1)
            a = np.abs(d) ** 2
            sq += a
            energies[(k1, k2)] = float(a[mask].sum() * h2)
    Sf = np.sqrt(sq)
    den = float((np.abs(f[mask]) ** p).sum() * h2) ** (1 / p)
    num = float((Sf[mask] ** p).sum() * h2) ** (1 / p)
    return SquareFunctionResult(Sf, num / den if den > 0 else 0.0, energies)


def reproducing_check(b: ParaAccretiveFunction, f, kmax: int):
    """(e_plus, e_minus) with e_plus(k) = ||S_k(bf) - f||_2, e_minus(k) = ||S_{-k}(bf)||_2."""
    f = np.asarray(f)
    h = b.grid.h
    bf = b.values * f
    e_plus, e_minus = [], []
    for k in range(1, kmax + 1):
        e_plus.append(float(np.sqrt((np.abs(build_Sk(b, k).apply(bf) - f) ** 2).sum() * h)))
        e_minus.append(float(np.sqrt((np.abs(build_Sk(b, -k).apply(bf)) ** 2).sum() * h)))
    return e_plus, e_minus


class OrthogonalityResult(NamedTuple):
    epsilon_hat: float
    ratios: dict


def orthogonality_decay(b: ParaAccretiveFunction, rng: ScaleRange, probe, max_gap: int = 6
                        ) -> OrthogonalityResult:
    """Fit m(k, j) / m(j, j) ~ 2^(-eps |k - j|), m(k, j) = ||D_k M_b D_j (b probe)||_inf."""
    probe = np.asarray(probe)
    ops = {k: build_Dk(b, k) for k in rng.scales}
    inner = _interior(b.grid, rng.margin())
    first = {j: ops[j].apply(b.values * probe) for j in rng.scales}
    second = {j: b.values * first[j] for j in rng.scales}
    diag = {j: float(np.max(np.abs(ops[j].apply(second[j]))[inner])) for j in rng.scales}
    # scales the grid cannot resolve give D_j = 0 up to rounding; leave them out
    floor = 1e-12 * max(max(diag.values()), 1e-300)
    live = [j for j in rng.scales if diag[j] > floor]
    ratios = {}
    for j in live:
        for k in live:
            if abs(k - j) > max_gap:
                continue
            mkj = float(np.max(np.abs(ops[k].apply(second[j]))[inner]))
            ratios[(k, j)] = mkj / diag[j]
    gaps = np.array([abs(k - j) for (k, j) in ratios], dtype=float)
    vals = np.array(list(ratios.values()))
    ok = vals > 0
    if np.unique(gaps[ok]).size < 2:
        raise DomainError("scale range has too few resolved scales to fit a decay rate")
    slope = np.polyfit(gaps[ok], np.log2(vals[ok]), 1)[0]
    return OrthogonalityResult(float(-slope), ratios)
