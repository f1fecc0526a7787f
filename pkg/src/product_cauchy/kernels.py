"""Poisson / conjugate Poisson kernels, the principal logarithm and the product Cauchy kernel."""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DomainError, SingularKernel
from .surface import LipschitzCurve, ProductSurface


class KernelSelector(str, enum.Enum):
    """Which of p_t, q_t sits on each axis: QQ is C_t, QP is C_t^{p1}, PQ is C_t^{p2}, PP is P_t."""

    QQ = "QQ"
    QP = "QP"
    PQ = "PQ"
    PP = "PP"

    @property
    def axis_kinds(self) -> tuple[str, str]:
        return (self.value[0].lower(), self.value[1].lower())


def poisson_pair(omega, t):
    """Return (p_t(omega), q_t(omega)) = (t, omega) / (pi (omega^2 + t^2)).

    Works on scalars and arrays.  Raises SingularKernel where omega^2 + t^2 = 0.
    """
    omega = np.asarray(omega, dtype=complex)
    t = np.asarray(t, dtype=float)
    den = omega * omega + t * t
    if np.any(den == 0):
        raise SingularKernel("omega^2 + t^2 vanishes")
    den = math.pi * den
    p, q = t / den, omega / den
    if p.ndim == 0:
        return complex(p), complex(q)
    return p, q


def principal_log(z):
    """log|z| + i Arg z with Arg in (-pi, pi]; the negative real axis maps to +i pi."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("log is undefined at 0")
    out = np.log(z)
    on_cut = (z.imag == 0) & (z.real < 0)
    if np.any(on_cut):
        out = np.where(on_cut, np.log(np.abs(z)) + 1j * math.pi, out)
    if out.ndim == 0:
        return complex(out)
    return out


def log_surface_kernel(curve: LipschitzCurve, x, y):
    """principal_log((gamma(x) - gamma(y))^2), taken of the square, never 2 log(difference)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x == y):
        raise DomainError("log kernel is singular on the diagonal")
    d = curve.gamma(x) - curve.gamma(y)
    return principal_log(d * d)


class StandardBiparameterKernel:
    """K(x, y) = 1 / ((gamma1(x1) - gamma1(y1)) (gamma2(x2) - gamma2(y2)))."""

    def __init__(self, surface: ProductSurface):
        self.surface = surface

    def __call__(self, x1, x2, y1, y2):
        c1, c2 = self.surface.curves
        d1 = c1.gamma(x1) - c1.gamma(y1)
        d2 = c2.gamma(x2) - c2.gamma(y2)
        if np.any(d1 == 0) or np.any(d2 == 0):
            raise SingularKernel("kernel evaluated on a diagonal")
        return 1.0 / (d1 * d2)

    def size_bound(self) -> float:
        l1, l2 = self.surface.curve1.lam, self.surface.curve2.lam
        return 1.0 / math.sqrt((1 - l1 * l1) * (1 - l2 * l2))


def cz_size_check(surface: ProductSurface, sample_pairs) -> float:
    """max |K(x, y)| |x1 - y1| |x2 - y2| over an (n, 4) array of (x1, x2, y1, y2)."""
    s = np.asarray(sample_pairs, dtype=float).reshape(-1, 4)
    x1, x2, y1, y2 = s.T
    if np.any(x1 == y1) or np.any(x2 == y2):
        raise DomainError("sample pairs must avoid the diagonals")
    K = StandardBiparameterKernel(surface)(x1, x2, y1, y2)
    return float(np.max(np.abs(K) * np.abs(x1 - y1) * np.abs(x2 - y2)))
