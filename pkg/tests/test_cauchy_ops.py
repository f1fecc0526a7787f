import math

import numpy as np
import pytest
from scipy.special import dawsn

from product_cauchy import (
    DomainError,
    GridSpec,
    LipschitzCurve,
    OracleUnavailable,
    ProductSurface,
    SampledField,
    SingularKernel,
)
from product_cauchy.cauchy_ops import (
    ExtensionQuery,
    INTRO_FACTOR,
    apply_truncated,
    extend,
    fit_log2_slope,
    flat_oracle,
    hilbert_fft,
    jump_reconstruct,
    log_potential,
    maximal_transform,
    poisson_mass,
    quadrant_decomposition,
    semigroup_check,
    semigroup_integral,
    t_sweep,
)
from product_cauchy.fields import Bump, Gaussian, PoissonProfile, ProductField
from product_cauchy.littlewood_paley import strong_maximal
from product_cauchy.quadrature import QuadratureConfig

FLAT = ProductSurface.flat()
SINE = LipschitzCurve("sine", 0.5)
SINE2 = ProductSurface(SINE, SINE)
GAUSS = ProductField.single(Gaussian(0.0, 1.0), Gaussian(0.0, 1.0))
PTS = (np.array([0.0, 0.4, -1.3]), np.array([0.0, -0.8, 0.6]))


def test_zero_field_gives_zero():
    z = ProductField.zero()
    g = GridSpec(1, 0.25)
    for sel in ("QQ", "QP", "PQ", "PP"):
        out = apply_truncated(z, SINE2, 0.1, sel, grid=g)
        assert np.all(out.values == 0)
    assert np.all(extend(z, SINE2, ExtensionQuery.at(SINE2, 0.0, 0.0, 0.1, 0.1)) == 0)


def test_nonpositive_t_rejected():
    with pytest.raises(DomainError):
        apply_truncated(GAUSS, FLAT, (0.1, 0.0), "QQ", points=PTS)


@pytest.mark.parametrize("surface", [FLAT, SINE2, ProductSurface(LipschitzCurve("linear_tilt", 0.5), SINE)],
                         ids=["flat", "sine", "tilt_sine"])
def test_poisson_mass_is_one(surface):
    for t in (0.5, 2.0**-6):
        assert abs(poisson_mass(surface, t, (0.2, -0.4)) - 1) <= 1e-4


def test_semigroup_flat_closed_form():
    v, err = semigroup_integral(LipschitzCurve("flat"), 1.0, 0.0, 1.0, 1.0)
    assert abs(v - 1 / (5 * math.pi)) <= 1e-8
    assert err <= 1e-8


@pytest.mark.parametrize("t,s", [(0.3, 0.7), (-0.3, 0.7), (0.3, -0.7), (-1.5, -0.05)])
def test_semigroup_signs_on_sine(t, s):
    assert semigroup_check(SINE, 0.4, -1.1, t, s) <= 1e-6


def test_semigroup_rejects_zero_scale():
    with pytest.raises(DomainError):
        semigroup_integral(SINE, 0.0, 0.0, 0.0, 1.0)


def test_qq_of_poisson_product_is_poisson_product():
    # flat: q_t * p_s = q_{t+s} on each axis
    F = ProductField.single(PoissonProfile(0.5), PoissonProfile(0.5))
    cfg = QuadratureConfig(X=256.0, h0=0.25)
    x = (np.array([0.0, 0.7]), np.array([0.3, -1.2]))
    out = apply_truncated(F, FLAT, 0.25, "QQ", points=x, config=cfg)
    q = lambda u: u / (math.pi * (u * u + 0.75**2))  # noqa: E731
    assert np.max(np.abs(out - q(x[0]) * q(x[1]))) <= 1e-8


def test_intro_normalization_factor():
    assert INTRO_FACTOR == pytest.approx(-0.25)
    a = apply_truncated(GAUSS, SINE2, 0.1, "QP", points=PTS)
    b = apply_truncated(GAUSS, SINE2, 0.1, "QP", points=PTS, normalization="intro")
    assert np.allclose(b, -0.25 * a, rtol=1e-15, atol=0)
    with pytest.raises(DomainError):
        apply_truncated(GAUSS, SINE2, 0.1, "QP", points=PTS, normalization="other")


def test_sampled_and_closed_form_agree():
    g = GridSpec(4, 1 / 16)
    a = apply_truncated(GAUSS, SINE2, 0.2, "QQ", grid=GridSpec(1, 1 / 4)).values
    b = apply_truncated(GAUSS.sample(g), SINE2, 0.2, "QQ", grid=GridSpec(1, 1 / 4),
                        config=QuadratureConfig(X=4)).values
    assert np.max(np.abs(a - b)) <= 1e-4 * np.max(np.abs(a))


def test_quadrant_sums():
    q = quadrant_decomposition(GAUSS, SINE2, (0.1, 0.05), PTS)
    assert np.allclose(q.total(), -q.C, atol=1e-15)
    assert np.allclose(q.jump(), q.P, atol=1e-15)
    assert np.allclose(q.quadrant("+-"), q.g_pm)


def test_extend_matches_quadrants():
    for tag in ("++", "+-", "-+", "--"):
        q = quadrant_decomposition(GAUSS, SINE2, (0.25, 0.1), PTS)
        G = extend(GAUSS, SINE2, ExtensionQuery.at(SINE2, PTS[0], PTS[1], 0.25, 0.1, tag))
        assert np.max(np.abs(G - q.quadrant(tag)) / np.abs(q.quadrant(tag))) <= 1e-10


def test_extension_is_holomorphic():
    w1, w2, eps = 0.3 + 0.6j, -0.2 + 0.9j, 1e-4
    def G(a, b):
        return extend(GAUSS, SINE2, ExtensionQuery(np.array([a]), np.array([b])))[0]
    # d/d(conj w1) = (d/dx + i d/dy) / 2
    dbar1 = ((G(w1 + eps, w2) - G(w1 - eps, w2)) + 1j * (G(w1 + 1j * eps, w2) - G(w1 - 1j * eps, w2))) / (4 * eps)
    dbar2 = ((G(w1, w2 + eps) - G(w1, w2 - eps)) + 1j * (G(w1, w2 + 1j * eps) - G(w1, w2 - 1j * eps))) / (4 * eps)
    assert abs(dbar1) <= 1e-6 and abs(dbar2) <= 1e-6


def test_extend_rejects_points_on_surface():
    with pytest.raises(SingularKernel):
        extend(GAUSS, SINE2, ExtensionQuery(np.array([complex(0.5, SINE.L(0.5))]), np.array([1j])))


def test_jump_reconstruction_flat_and_sine():
    grid = GridSpec(2.0, 1 / 16)
    cfg = QuadratureConfig(X=2.0)
    F = ProductField.single(Bump(0.0, 1.0), Bump(0.0, 1.0))
    e_flat = [jump_reconstruct(F, FLAT, 2.0**-k, grid=grid, config=cfg)[1] for k in (4, 7, 10)]
    e_sine = [jump_reconstruct(F, SINE2, 2.0**-k, grid=grid, config=cfg)[1] for k in (4, 7, 10)]
    assert e_flat[-1] <= 1e-2
    assert e_sine[0] > e_sine[1] > e_sine[2]


def test_maximal_dominates_each_truncation():
    ts = [2.0**-k for k in range(1, 5)]
    M = maximal_transform(GAUSS, SINE2, ts, points=PTS)
    for t in ts:
        assert np.all(M >= np.abs(apply_truncated(GAUSS, SINE2, t, "QQ", points=PTS)) - 1e-15)
    with pytest.raises(DomainError):
        maximal_transform(GAUSS, SINE2, [], points=PTS)


def test_flat_maximal_below_strong_maximal_of_oracle():
    grid = GridSpec(8.0, 1 / 8)
    ts = [2.0**-k for k in range(1, 8)]
    M = maximal_transform(GAUSS, FLAT, ts, grid=grid).values
    H = flat_oracle(GAUSS, FLAT, grid=grid).values
    assert np.max(M / strong_maximal(H)) <= 1.0


def test_log_potential_zero_and_domain():
    z = log_potential(ProductField.zero(), SINE2, PTS)
    assert np.all(z == 0)
    with pytest.raises(DomainError):
        log_potential(GAUSS, SINE2, PTS)
    with pytest.raises(DomainError):
        log_potential(GAUSS.sample(GridSpec(1, 0.5)), SINE2, PTS)


def test_flat_qp_against_log_p1():
    F = ProductField.single(Bump(0.0, 4.0), Bump(0.0, 4.0))
    cfg = QuadratureConfig(X=6.0, h0=0.5)
    a = apply_truncated(F, FLAT, 2.0**-12, "QP", points=PTS, config=cfg)
    b = log_potential(F, FLAT, PTS, kind="p1", config=cfg)
    assert np.max(np.abs(a - b)) <= 1e-3 * np.max(np.abs(b))


def test_hilbert_fft_matches_dawson():
    g = GridSpec(16.0, 1 / 8)
    x = g.nodes
    H = hilbert_fft(np.exp(-x * x), g.h, 0)
    exact = 2 / math.sqrt(math.pi) * dawsn(x)
    inner = np.abs(x) <= 4
    assert np.max(np.abs(H - exact)[inner]) <= 1e-12


def test_hilbert_of_poisson_is_conjugate_poisson():
    h = 1 / 16
    x = h * np.arange(-2**15, 2**15 + 1)
    H = hilbert_fft(1 / (math.pi * (x * x + 1)), h, 0)
    inner = np.abs(x) <= 4
    assert np.max(np.abs(H - x / (math.pi * (x * x + 1)))[inner]) <= 1e-4


def test_flat_oracle_unavailable_on_curved_surface():
    with pytest.raises(OracleUnavailable):
        flat_oracle(GAUSS, SINE2, grid=GridSpec(1, 0.5))
    with pytest.raises(DomainError):
        flat_oracle(GAUSS, FLAT)


def test_semigroup_composition_of_truncations():
    # C_t = P_{t - tm} C_{tm} on each axis: q_t = q_tm * p_{t - tm}
    src = GridSpec(32.0, 1 / 8)
    out = GridSpec(2.0, 1 / 8)
    cfg = QuadratureConfig(X=32.0)
    F = ProductField.single(Gaussian(0.0, 0.7), Gaussian(0.0, 0.7))
    t, tm = 0.5, 0.25
    Ctm = apply_truncated(F, SINE2, tm, "QQ", grid=src, config=cfg)
    lhs = apply_truncated(Ctm, SINE2, t - tm, "PP", grid=out, config=cfg).values
    rhs = apply_truncated(F, SINE2, t, "QQ", grid=out, config=cfg).values
    assert np.linalg.norm(lhs - rhs) <= 1e-4 * np.linalg.norm(rhs)


def test_t_sweep_pp_converges_to_field():
    rep = t_sweep(GAUSS, SINE2, "PP", [2.0**-k for k in range(2, 7)], grid=GridSpec(1, 1 / 4))
    assert rep.reference == "field"
    assert rep.monotone_decreasing()
    assert rep.slope > 0.5


def test_t_sweep_log_reference():
    F = ProductField.single(Bump(0.0, 2.0), Bump(0.0, 2.0))
    cfg = QuadratureConfig(X=3.0)
    rep = t_sweep(F, SINE2, "QQ", [2.0**-k for k in range(2, 7)], points=PTS, config=cfg)
    assert rep.reference == "log"
    assert rep.monotone_decreasing()
    assert len(rep.csv_rows()) == 5


def test_t_sweep_last_and_errors():
    rep = t_sweep(GAUSS, SINE2, "QQ", [0.5, 0.25, 0.125], points=PTS)
    assert rep.reference == "last" and len(rep.l2_errors) == 2
    with pytest.raises(DomainError):
        t_sweep(GAUSS, SINE2, "QQ", [0.1, 0.2], points=PTS)
    with pytest.raises(DomainError):
        t_sweep(GAUSS, SINE2, "QQ", [], points=PTS)
    with pytest.raises(DomainError):
        t_sweep(GAUSS, SINE2, "QQ", [0.5, 0.25], points=PTS, reference="fft")


def test_t_sweep_fft_reference_flat():
    g = GridSpec(8.0, 1 / 4)
    F = ProductField.single(Gaussian(0.0, 2.0), Gaussian(0.0, 2.0))
    rep = t_sweep(F, FLAT, "QQ", [2.0**-k for k in range(2, 7)], grid=g, reference="fft")
    assert rep.monotone_decreasing()


def test_fit_log2_slope():
    assert fit_log2_slope([1, 2, 4], [1, 4, 16]) == pytest.approx(2.0)
    assert math.isnan(fit_log2_slope([1, 2], [0, 0]))


def test_sampled_field_input_on_grid():
    g = GridSpec(2.0, 1 / 8)
    f = SampledField(g, GAUSS.sample(g).values)
    out = apply_truncated(f, FLAT, 0.5, "PP", config=QuadratureConfig(X=2.0))
    assert out.grid == g
