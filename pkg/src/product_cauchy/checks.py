"""Executable acceptance checks and the quick invariant suite.

Each criterion is one function returning a CheckResult.  ``fast=True``
coarsens grids and trims trial counts where that does not change what is
being measured; the per-check docstrings say what changes.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field as dc_field
from typing import Callable

import numpy as np
from scipy import integrate

from . import littlewood_paley as lp
from . import tb_probe as tb
from .cauchy_ops import (
    ExtensionQuery,
    apply_truncated,
    extend,
    flat_oracle,
    jump_reconstruct,
    log_potential,
    poisson_mass,
    quadrant_decomposition,
    semigroup_check,
    semigroup_integral,
)
from .fields import Bump, Gaussian, ProductField, random_smooth_field
from .kernels import cz_size_check
from .quadrature import QuadratureConfig
from .surface import GridSpec, LipschitzCurve, ProductSurface, validate_curve

BUILTIN_CURVES = (
    LipschitzCurve("flat", 0.0),
    LipschitzCurve("sine", 0.5),
    LipschitzCurve("linear_tilt", 0.5),
    LipschitzCurve("smooth_bump", 0.5),
)
BUILTIN_SURFACES = tuple(ProductSurface(c, c) for c in BUILTIN_CURVES)
ALL_SURFACE_PAIRS = tuple(ProductSurface(a, b) for a in BUILTIN_CURVES for b in BUILTIN_CURVES)
SINE = LipschitzCurve("sine", 0.5)
SINE_SURFACE = ProductSurface(SINE, SINE)


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: dict = dc_field(default_factory=dict)
    wall_time: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: value={self.value:.6g} threshold={self.threshold:.6g} "
                f"({self.wall_time:.1f}s)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = bool(self.passed)
        return d


def _result(name, value, threshold, passed, **detail) -> CheckResult:
    return CheckResult(name, float(value), float(threshold), bool(passed), detail)


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _gauss_field() -> ProductField:
    return ProductField.single(Gaussian(0.0, 1.0), Gaussian(0.3, 0.8))


# ---------------------------------------------------------------------------
# Criteria


def c01_quadrant_algebra(fast: bool = False, seed: int = 0) -> CheckResult:
    """Quadrant sign identities at 100 random nodes on all 16 ordered curve pairs."""
    rng = np.random.default_rng(seed)
    z = (rng.uniform(-3, 3, 100), rng.uniform(-3, 3, 100))
    surfaces = BUILTIN_SURFACES if fast else ALL_SURFACE_PAIRS
    worst = 0.0
    for S in surfaces:
        q = quadrant_decomposition(_gauss_field(), S, (0.01, 0.02), z)
        worst = max(worst, float(np.max(np.abs(q.jump() - q.P))),
                    float(np.max(np.abs(q.total() + q.C))))
    return _result("quadrant_algebra", worst, 1e-12, worst <= 1e-12, surfaces=len(surfaces))


def c02_extension_consistency(fast: bool = False, seed: int = 0) -> CheckResult:
    """extend vs quadrant_decomposition on a 5x5 (t1, t2) lattice, sine x sine."""
    rng = np.random.default_rng(seed)
    npts = 8 if fast else 20
    z = (rng.uniform(-3, 3, npts), rng.uniform(-3, 3, npts))
    ts = [0.5, 0.25, 0.1, 0.05, 0.01]
    F = _gauss_field()
    worst = 0.0
    for t1 in ts:
        for t2 in ts:
            q = quadrant_decomposition(F, SINE_SURFACE, (t1, t2), z)
            for tag in ("++", "+-", "-+", "--"):
                G = extend(F, SINE_SURFACE, ExtensionQuery.at(SINE_SURFACE, z[0], z[1], t1, t2, tag))
                ref = q.quadrant(tag)
                worst = max(worst, float(np.max(np.abs(G - ref) / np.abs(ref))))
    return _result("extension_consistency", worst, 1e-10, worst <= 1e-10)


def c03_semigroup(fast: bool = False, seed: int = 0) -> CheckResult:
    """50 random (z, zeta, t, s) per curve plus the flat closed form q_2(1) = 1/(5 pi)."""
    rng = np.random.default_rng(seed)
    n = 10 if fast else 50
    worst = 0.0
    for c in BUILTIN_CURVES:
        for _ in range(n):
            z, zeta = rng.uniform(-3, 3, 2)
            t, s = rng.uniform(0.05, 2.0, 2) * rng.choice([-1.0, 1.0], 2)
            worst = max(worst, semigroup_check(c, float(z), float(zeta), float(t), float(s)))
    spot, _ = semigroup_integral(LipschitzCurve("flat"), 1.0, 0.0, 1.0, 1.0)
    spot_err = abs(spot - 1 / (5 * math.pi))
    ok = worst <= 1e-6 and spot_err <= 1e-8
    return _result("semigroup", worst, 1e-6, ok, spot_error=spot_err)


def c04_poisson_mass(fast: bool = False, seed: int = 0) -> CheckResult:
    """|P_t 1 - 1| with exact tails for t in {2^-2, 2^-6} on every built-in surface."""
    pts = [(0.0, 0.0), (0.3, -0.7), (2.5, 1.1)]
    worst = 0.0
    for S in BUILTIN_SURFACES:
        for t in (0.25, 2.0**-6):
            for x in pts:
                worst = max(worst, abs(poisson_mass(S, t, x) - 1))
    return _result("poisson_mass", worst, 1e-4, worst <= 1e-4)


def c05_jump_reconstruction(fast: bool = False, seed: int = 0) -> CheckResult:
    """Jump error at t = 2^-10 and monotone decay along 2^-4..2^-10 (fast: h = 1/16)."""
    grid = GridSpec(2.0, 1 / 16 if fast else 1 / 32)
    cfg = QuadratureConfig(X=2.0)
    F = ProductField.single(Bump(0.0, 1.0), Bump(0.0, 1.0))
    worst, mono, curves = 0.0, True, {}
    for S in (ProductSurface.flat(), SINE_SURFACE):
        errs = [jump_reconstruct(F, S, 2.0**-k, grid=grid, config=cfg)[1] for k in range(4, 11)]
        curves[S.label()] = errs
        worst = max(worst, errs[-1])
        mono = mono and bool(np.all(np.diff(errs) < 0))
    return _result("jump_reconstruction", worst, 1e-2, worst <= 1e-2 and mono,
                   monotone=mono, errors=curves)


def c06_log_cross_path(fast: bool = False, seed: int = 0, radius: float = 16.0) -> CheckResult:
    """Truncated QQ/QP/PQ at t = 2^-12 vs the log representations, sine x sine.

    The gap carries an O(t / radius) truncation bias, so the bump is wide
    (radius 16 in a window of 20).  Fast mode uses a 17-point grid.
    """
    X = radius + 4.0
    cfg = QuadratureConfig(X=X, h0=min(0.125 * radius, 0.5))
    F = ProductField.single(Bump(0.0, radius), Bump(0.0, radius))
    grid = GridSpec(X, X / (8 if fast else 16))
    gaps = {}
    for kind, sel in (("full", "QQ"), ("p1", "QP"), ("p2", "PQ")):
        L = log_potential(F, SINE_SURFACE, grid=grid, kind=kind, config=cfg).values
        C = apply_truncated(F, SINE_SURFACE, 2.0**-12, sel, grid=grid, config=cfg).values
        gaps[sel] = _rel(C, L)
    worst = max(gaps.values())
    return _result("log_cross_path", worst, 1e-4, worst <= 1e-4, gaps=gaps, radius=radius)


def c07_flat_oracle(fast: bool = False, seed: int = 0, widths=(3.0, 4.0)) -> CheckResult:
    """C_t at t = 2^-10 vs the FFT H1 H2 oracle on Gaussians of width a, window 5a.

    The truncated operator differs from H1 H2 by about 1.8 t / a in relative
    L^2, so unit-width Gaussians sit above 1e-3 and widths >= 3 are used.
    Fast mode uses h = 1/4.
    """
    flat = ProductSurface.flat()
    gaps = {}
    for a in widths:
        X = 5 * a
        grid = GridSpec(X, 1 / 4 if fast else 1 / 8)
        F = ProductField.single(Gaussian(0.0, a), Gaussian(0.0, a))
        orc = flat_oracle(F, flat, grid=grid).values
        Ct = apply_truncated(F, flat, 2.0**-10, "QQ", grid=grid, config=QuadratureConfig(X=X)).values
        gaps[a] = _rel(Ct, orc)
    worst = max(gaps.values())
    return _result("flat_oracle", worst, 1e-3, worst <= 1e-3, gaps=gaps)


def c08_bmo_probe(fast: bool = False, seed: int = 0) -> CheckResult:
    """BMO sup over x in {-2, 0, 3}, u - x in {0, R, 4R}, R in 2^-3..2^3 vs 2^-4..2^4."""
    psi = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0, "one")
    worst, sups = 0.0, {}
    for c in BUILTIN_CURVES:
        base = max(tb.bmo_probe(c, x, tb.bmo_samples(x, -3, 3), psi) for x in (-2.0, 0.0, 3.0))
        wide = max(tb.bmo_probe(c, x, tb.bmo_samples(x, -4, 4), psi) for x in (-2.0, 0.0, 3.0))
        var = abs(wide - base) / base
        sups[c.label()] = (base, wide)
        worst = max(worst, var)
    finite = all(np.isfinite(v).all() for v in sups.values())
    return _result("bmo_probe", worst, 0.1, worst < 0.1 and finite, sups=sups)


def c09_mixed_wbp(fast: bool = False, seed: int = 0) -> CheckResult:
    """Mixed WBP slopes over d in {8, 16, 32} R1: plain <= -0.9, mean-zero <= -1.8."""
    plain, mz = -math.inf, -math.inf
    slopes = {}
    for S in BUILTIN_SURFACES:
        f = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0)
        g2 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0, S.curve2)
        a = tb.mixed_wbp_decay(S, (f, f, f, g2), [8, 16, 32], False).slope
        b = tb.mixed_wbp_decay(S, (f, f, f, g2), [8, 16, 32], True).slope
        slopes[S.label()] = (a, b)
        plain, mz = max(plain, a), max(mz, b)
    ok = plain <= -0.9 and mz <= -1.8
    return _result("mixed_wbp_decay", plain, -0.9, ok, mean_zero_slope=mz, slopes=slopes)


def c10_tb_limit(fast: bool = False, seed: int = 0) -> CheckResult:
    """|pairing(R)| decreasing to <= 1e-3 of its first value at R = 2^10; flat F_R constant."""
    sched = [2.0**k for k in range(-1, 11)]
    worst, mono, ratios = 0.0, True, {}
    surfaces = (ProductSurface.flat(), SINE_SURFACE) if fast else BUILTIN_SURFACES
    for S in surfaces:
        psi1 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 0.25, S.curve1)
        psi2 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0, S.curve2)
        phi2 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0)
        rep = tb.tb_limit(S, psi1, psi2, phi2, sched)
        r = rep.l2_errors[-1] / rep.l2_errors[0]
        ratios[S.label()] = r
        worst = max(worst, r)
        mono = mono and rep.monotone_decreasing()
    # closed form: int log(y^2) eta'(y) dy = 0 since eta' is odd; oracle is adaptive quad
    deta = tb.EtaCutoff(1.0).derivative
    oracle = sum(integrate.quad(lambda y: math.log(y * y) * float(deta(y)), a, b,
                                epsabs=1e-13, epsrel=1e-13, limit=200)[0]
                 for a, b in ((-2.0, -1.0), (1.0, 2.0)))
    const_err = abs(oracle - 0.0)
    ok = worst <= 1e-3 and mono and const_err <= 1e-8
    return _result("tb_limit", worst, 1e-3, ok, monotone=mono, flat_constant_error=const_err,
                   ratios=ratios)


def c11_lp_kernels(fast: bool = False, seed: int = 0) -> CheckResult:
    """Kernel support (exact), D_k b = 0, min |P_k b| >= 1 on the default grid and range."""
    grid = GridSpec()
    rng = lp.ScaleRange.default_for(grid).validate(grid)
    inner = np.abs(grid.nodes) <= grid.X - rng.margin() + 1e-12
    x = grid.nodes
    supp, db, minp = 0.0, 0.0, math.inf
    for c in BUILTIN_CURVES:
        b = lp.ParaAccretiveFunction.from_curve(c, grid)
        for k in rng.scales:
            D = lp.build_Dk(b, k)
            K = D.kernel()
            far = 2.0**k * np.abs(x[:, None] - x[None, :]) > 1
            if far.any():
                supp = max(supp, float(np.max(np.abs(K[far]))))
            db = max(db, float(np.max(np.abs(D.apply(b.values))[inner])))
            minp = min(minp, float(np.min(np.abs(b.Pk_b(k))[inner])))
    # min |P_k b| = 1 holds exactly in exact arithmetic; allow rounding
    ok = supp == 0.0 and db <= 1e-10 and minp >= 1 - 1e-12
    return _result("lp_kernel_invariants", db, 1e-10, ok, support_max=supp, min_Pkb=minp,
                   scales=rng.scales)


def _seeded_fields(seed: int, n: int):
    rng = np.random.default_rng(seed)
    return [random_smooth_field(rng) for _ in range(n)]


def c12_square_function(fast: bool = False, seed: int = 0) -> CheckResult:
    """||Sf||_2/||f||_2 for 20 seeded fields under h = 1/32 -> 1/64, b = gamma' (sine)."""
    fields = _seeded_fields(seed, 5 if fast else 20)
    ratios = []
    for h in (1 / 32, 1 / 64):
        grid = GridSpec(4.0, h)
        b = lp.ParaAccretiveFunction.from_curve(SINE, grid)
        rng = lp.ScaleRange(0, 3).validate(grid)
        ratios.append(np.array([lp.square_function(b, b, rng, f.sample(grid).values).ratio
                                for f in fields]))
    finite = bool(np.all(np.isfinite(ratios)) and np.all(ratios[0] > 0))
    q = ratios[1] / ratios[0]
    spread = float(np.max(np.maximum(q, 1 / q)))
    return _result("square_function_stability", spread, 2.0, finite and spread < 2.0,
                   ratios_coarse=ratios[0].tolist(), ratios_fine=ratios[1].tolist())


def c13_almost_orthogonality(fast: bool = False, seed: int = 0) -> CheckResult:
    """epsilon_hat over |k - j| <= 6 on X = 8, h = 2^-11, k in -1..5, every built-in b."""
    grid = GridSpec(8.0, 2.0**-10 if fast else 2.0**-11)
    rng = lp.ScaleRange(-1, 4 if fast else 5).validate(grid)
    probe = np.random.default_rng(seed).standard_normal(grid.n)
    eps = {}
    for c in BUILTIN_CURVES:
        b = lp.ParaAccretiveFunction.from_curve(c, grid)
        eps[c.label()] = lp.orthogonality_decay(b, rng, probe).epsilon_hat
    worst = min(eps.values())
    return _result("almost_orthogonality", worst, 0.2, worst >= 0.2, epsilon_hat=eps)


def c14_opnorm_stability(fast: bool = False, seed: int = 0) -> CheckResult:
    """Max L^2 ratio over 20 trials under (h, t_min) = (1/16, 2^-6) -> (1/32, 2^-7)."""
    fields = _seeded_fields(seed, 5 if fast else 20)
    spreads, vals = {}, {}
    for sel in ("QQ", "QP", "PQ", "maximal"):
        a = tb.opnorm_estimate(SINE_SURFACE, sel, 2.0, len(fields), 2.0**-6,
                               grid=GridSpec(4.0, 1 / 16), fields=fields)
        b = tb.opnorm_estimate(SINE_SURFACE, sel, 2.0, len(fields), 2.0**-7,
                               grid=GridSpec(4.0, 1 / 32), fields=fields)
        vals[sel] = (a, b)
        spreads[sel] = max(a / b, b / a)
    worst = max(spreads.values())
    return _result("opnorm_stability", worst, 2.0, worst < 2.0, max_ratios=vals)


CRITERIA: dict[int, tuple[str, Callable[..., CheckResult]]] = {
    1: ("quadrant_algebra", c01_quadrant_algebra),
    2: ("extension_consistency", c02_extension_consistency),
    3: ("semigroup", c03_semigroup),
    4: ("poisson_mass", c04_poisson_mass),
    5: ("jump_reconstruction", c05_jump_reconstruction),
    6: ("log_cross_path", c06_log_cross_path),
    7: ("flat_oracle", c07_flat_oracle),
    8: ("bmo_probe", c08_bmo_probe),
    9: ("mixed_wbp_decay", c09_mixed_wbp),
    10: ("tb_limit", c10_tb_limit),
    11: ("lp_kernel_invariants", c11_lp_kernels),
    12: ("square_function_stability", c12_square_function),
    13: ("almost_orthogonality", c13_almost_orthogonality),
    14: ("opnorm_stability", c14_opnorm_stability),
}
TARGETS = {name: num for num, (name, _) in CRITERIA.items()}


def resolve_target(target) -> int:
    s = str(target).strip().lower()
    if s.isdigit() and int(s) in CRITERIA:
        return int(s)
    if s.startswith("c") and s[1:].isdigit() and int(s[1:]) in CRITERIA:
        return int(s[1:])
    if s in TARGETS:
        return TARGETS[s]
    raise KeyError(f"unknown target {target!r}")


def run_criterion(target, fast: bool = False, seed: int = 0) -> CheckResult:
    num = resolve_target(target)
    name, fn = CRITERIA[num]
    t0 = time.perf_counter()
    res = fn(fast=fast, seed=seed)
    res.wall_time = time.perf_counter() - t0
    res.detail["criterion"] = num
    return res


# ---------------------------------------------------------------------------
# Quick invariant suite for `verify` without a target


def invariant_suite(surface: ProductSurface, grid: GridSpec, seed: int = 0) -> list[CheckResult]:
    """Fast module invariants on one surface: curves, kernels, quadrature, algebra, LP, bumps."""
    out = []
    rng = np.random.default_rng(seed)
    for i, c in enumerate(surface.curves, start=1):
        rep = validate_curve(c, grid)
        out.append(_result(f"curve{i}_lipschitz", rep.lambda_hat, max(c.lam, 1e-15) + 1e-9,
                           rep.lambda_hat <= c.lam + 1e-9))
    pairs = rng.uniform(-4, 4, (200, 4))
    cz = cz_size_check(surface, pairs)
    out.append(_result("cz_size", cz, 1.0, cz <= 1.0 + 1e-12))
    pm = max(abs(poisson_mass(surface, t, (0.2, -0.4)) - 1) for t in (0.25, 2.0**-6))
    out.append(_result("poisson_mass", pm, 1e-4, pm <= 1e-4))
    z = (rng.uniform(-2, 2, 20), rng.uniform(-2, 2, 20))
    q = quadrant_decomposition(_gauss_field(), surface, (0.05, 0.1), z)
    alg = max(float(np.max(np.abs(q.jump() - q.P))), float(np.max(np.abs(q.total() + q.C))))
    out.append(_result("quadrant_algebra", alg, 1e-12, alg <= 1e-12))
    sg = max(semigroup_check(c, 0.3, -0.5, 0.5, -0.25) for c in surface.curves)
    out.append(_result("semigroup", sg, 1e-6, sg <= 1e-6))
    lg = GridSpec(grid.X, grid.h)
    srange = lp.ScaleRange.default_for(lg).validate(lg)
    inner = np.abs(lg.nodes) <= lg.X - srange.margin() + 1e-12
    db = 0.0
    for c in surface.curves:
        b = lp.ParaAccretiveFunction.from_curve(c, lg)
        for k in srange.scales:
            db = max(db, float(np.max(np.abs(lp.build_Dk(b, k).apply(b.values))[inner])))
    out.append(_result("lp_Db_zero", db, 1e-10, db <= 1e-10))
    worst_mom, caps_ok = 0.0, True
    for w in (None, "one", surface.curve1, surface.curve2):
        inv = tb.make_bump(tb.DEFAULT_ORDER, 0.2, 0.8, w).check_invariants()
        caps_ok = caps_ok and inv["caps_ok"] and inv["support"]
        if inv["moment"] is not None:
            worst_mom = max(worst_mom, inv["moment"])
    out.append(_result("bump_invariants", worst_mom, 1e-12, caps_ok and worst_mom <= 1e-12))
    return out
