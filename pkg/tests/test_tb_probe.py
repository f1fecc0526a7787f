import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from product_cauchy import (
    DomainError,
    GridSpec,
    HypothesisViolation,
    LipschitzCurve,
    ProductSurface,
)
from product_cauchy import tb_probe as tb
from product_cauchy.fields import Gaussian, ProductField

FLAT_C = LipschitzCurve("flat")
SINE = LipschitzCurve("sine", 0.5)
FLAT = ProductSurface.flat()
SINE2 = ProductSurface(SINE, SINE)


def test_bump_caps_frozen():
    plain = tb.make_bump(2).check_invariants()
    assert plain["support"] and plain["caps_ok"]
    assert np.allclose(plain["derivative_caps"], [0.0474701359, 0.1030271432, 1.0], atol=1e-9)
    mz = tb.make_bump(2, 0.0, 1.0, "one").check_invariants()
    assert np.allclose(mz["derivative_caps"], [0.0042834362, 0.0415758026, 1.0], atol=1e-9)
    assert mz["moment"] <= 1e-15


def test_bump_scaling_and_support():
    b = tb.make_bump(2, 1.5, 0.5)
    assert b.support() == (1.0, 2.0)
    assert b(np.array([0.99, 2.01])).tolist() == [0.0, 0.0]
    # derivative k picks up radius^-k
    assert b.derivative(1.6, 1) == pytest.approx(tb.make_bump(2, 0.0, 1.0).derivative(0.2, 1) / 0.5)


def test_mean_zero_against_curve_quad_oracle():
    b = tb.make_bump(2, 0.4, 1.0, SINE)
    assert abs(b.moment()) <= 1e-15
    part = lambda y: b(y) * SINE.dgamma(y)  # noqa: E731
    re = integrate.quad(lambda y: float(np.real(part(y))), -0.6, 1.4, epsabs=1e-14, limit=200)[0]
    im = integrate.quad(lambda y: float(np.imag(part(y))), -0.6, 1.4, epsabs=1e-14, limit=200)[0]
    assert abs(complex(re, im)) <= 1e-12


def test_make_bump_errors():
    with pytest.raises(DomainError):
        tb.make_bump(5)
    with pytest.raises(DomainError):
        tb.make_bump(2, 0.0, 0.0)
    with pytest.raises(DomainError):
        tb.make_bump(2, 0.0, 1.0, "gamma")


def test_translated_and_times():
    b = tb.make_bump(2, 0.0, 1.0, "one")
    t = b.translated(3.0)
    assert t(3.2) == pytest.approx(b(0.2))
    assert b.times(0.0).is_zero()


def test_wbp_pairing_scales_like_area_on_flat():
    vals = []
    for R in (0.25, 1.0, 4.0):
        f = tb.make_bump(2, 0.0, R)
        g = tb.make_bump(2, 0.3 * R, R, "one")
        vals.append(abs(tb.wbp_pairing(FLAT, f, f, g, g)) / R**2)
    assert np.allclose(vals, 8.2596572626e-09, rtol=1e-9)


def test_wbp_pairing_bounded_on_sine():
    vals = []
    for R in (0.25, 1.0, 4.0):
        f = tb.make_bump(2, 0.0, R)
        g = tb.make_bump(2, 0.3 * R, R, "one")
        vals.append(abs(tb.wbp_pairing(SINE2, f, f, g, g)) / R**2)
    assert max(vals) <= 2 * min(vals)


def test_wbp_requires_cancellation_or_separation():
    f = tb.make_bump(2)
    with pytest.raises(HypothesisViolation):
        tb.wbp_pairing(FLAT, f, f, f, f)
    far = f.translated(10.0)
    assert tb.wbp_pairing(FLAT, f, f, far, far) != 0


def test_axis_pairing_antisymmetric_on_flat():
    f = tb.make_bump(2, -0.7, 0.5, "one")
    g = tb.make_bump(2, 0.4, 0.6)
    a, b = tb.axis_pairing(FLAT_C, f, g), tb.axis_pairing(FLAT_C, g, f)
    assert abs(a + b) <= 1e-9 * abs(a)
    assert tb.axis_pairing(FLAT_C, f.times(0.0), g) == 0


def test_mixed_wbp_decay_rates():
    f = tb.make_bump(2)
    g2 = tb.make_bump(2, 0.0, 1.0, SINE)
    plain = tb.mixed_wbp_decay(SINE2, (f, f, f, g2), [8, 16, 32], False)
    mz = tb.mixed_wbp_decay(SINE2, (f, f, f, g2), [8, 16, 32], True)
    assert plain.slope <= -0.9
    assert mz.slope <= -1.8


def test_mixed_wbp_zero_and_close():
    f = tb.make_bump(2)
    fit = tb.mixed_wbp_decay(FLAT, (f.times(0.0), f, f, f), [8, 16], False)
    assert math.isnan(fit.slope) and fit.values == [0.0, 0.0]
    with pytest.raises(HypothesisViolation):
        tb.mixed_wbp_decay(FLAT, (f, f, f, f), [4, 8], False)


def test_bmo_flat_scale_and_translation_invariant():
    psi = tb.make_bump(2, 0.0, 1.0, "one")
    vals = [tb.bmo_value(FLAT_C, 0.3, 0.3 + R, R, psi) for R in (0.125, 1.0, 8.0)]
    assert np.allclose(vals, 0.006015991998, atol=1e-8)
    a = tb.bmo_value(FLAT_C, -2.0, -1.0, 1.0, psi)
    b = tb.bmo_value(FLAT_C, 3.0, 4.0, 1.0, psi)
    assert abs(a - b) <= 1e-10


def test_bmo_probe_stable_under_wider_range():
    for c in (FLAT_C, SINE):
        base = tb.bmo_probe(c, [0.0], tb.bmo_samples(0.0, -3, 3))
        wide = tb.bmo_probe(c, [0.0], tb.bmo_samples(0.0, -4, 4))
        assert abs(wide - base) <= 0.1 * base


def test_bmo_probe_hypotheses():
    assert tb.bmo_probe(FLAT_C, [0.0], [(0.0, 1.0)], tb.make_bump(2, 0, 1, "one").times(0.0)) == 0
    with pytest.raises(HypothesisViolation):
        tb.bmo_probe(FLAT_C, [0.0], [(0.0, 1.0)], tb.make_bump(2))
    with pytest.raises(DomainError):
        tb.bmo_probe(FLAT_C, [0.0], [(0.0, 1.0)], tb.make_bump(2, 0.5, 1.0, "one"))


def test_bmo_samples():
    s = tb.bmo_samples(1.0, 0, 1)
    assert s == [(1.0, 1.0), (2.0, 1.0), (5.0, 1.0), (1.0, 2.0), (3.0, 2.0), (9.0, 2.0)]


def test_eta_cutoff_values():
    e = tb.EtaCutoff(2.0)
    assert e(np.array([0.0, 2.0, 3.0, 4.0, 5.0])).tolist() == [1.0, 1.0, 0.5, 0.0, 0.0]
    d = e.derivative(np.array([-3.0, 3.0]))
    assert d[0] == -d[1] and d[1] < 0


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 1.5))
def test_eta_step_symmetry_and_derivative(s):
    S = tb.EtaCutoff.step
    assert float(S(s) + S(1 - s)) == pytest.approx(1.0, abs=1e-15)
    if 0.01 < s < 0.99:
        h = 1e-6
        fd = float(S(s + h) - S(s - h)) / (2 * h)
        assert float(tb.EtaCutoff.step_prime(s)) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_flat_limit_constant_vanishes():
    assert abs(tb.flat_limit_constant()) <= 1e-14


def test_tb_limit_decays():
    psi1 = tb.make_bump(2, 0.0, 0.25, SINE)
    psi2 = tb.make_bump(2, 0.0, 1.0, SINE)
    phi2 = tb.make_bump(2)
    rep = tb.tb_limit(SINE2, psi1, psi2, phi2, [2.0**k for k in range(-1, 11)])
    assert rep.monotone_decreasing()
    assert rep.l2_errors[-1] <= 1e-3 * rep.l2_errors[0]
    assert rep.max_errors[-1] == 0


def test_tb_limit_hypotheses():
    psi2, phi2 = tb.make_bump(2, 0.0, 1.0, SINE), tb.make_bump(2)
    zero = tb.make_bump(2, 0.0, 0.25).times(0.0)
    rep = tb.tb_limit(SINE2, zero, psi2, phi2, [1.0, 2.0])
    assert rep.l2_errors == [0.0, 0.0]
    with pytest.raises(HypothesisViolation):
        tb.tb_limit(SINE2, tb.make_bump(2, 0.0, 0.25), psi2, phi2, [1.0, 2.0])
    psi1 = tb.make_bump(2, 0.0, 0.25, SINE)
    with pytest.raises(DomainError):
        tb.tb_limit(SINE2, psi1, psi2, phi2, [2.0, 1.0])
    with pytest.raises(DomainError):
        tb.tb_limit(SINE2, psi1, psi2, phi2, [0.25])


def test_opnorm_single_gaussian_flat():
    F = ProductField.single(Gaussian(0.0, 1.0), Gaussian(0.0, 1.0))
    r = tb.opnorm_estimate(FLAT, "QQ", 2.0, fields=[F])
    assert 0 < r <= 1.05


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_opnorm_finite_for_p(p):
    r = tb.opnorm_estimate(SINE2, "QP", p, trials=1, grid=GridSpec(2.0, 1 / 8))
    assert np.isfinite(r) and r > 0


def test_opnorm_errors():
    with pytest.raises(DomainError):
        tb.opnorm_estimate(FLAT, "QQ", 1.0)
    with pytest.raises(DomainError):
        tb.opnorm_estimate(FLAT, "QQ", 2.0, trials=0)
    with pytest.raises(DomainError):
        tb.opnorm_estimate(FLAT, "PP", 2.0)
    with pytest.raises(DomainError):
        tb.opnorm_estimate(FLAT, "QQ", 2.0, fields=[ProductField.zero()])
