"""Envelope formula evaluation, regimes, and hypothesis checks."""
import math

import numpy as np
import pytest

from templevy.envelope import (
    EnvelopeSpec,
    env_lower_large_t,
    env_lower_small_t,
    env_upper_large_t,
    env_upper_small_t,
    evaluate,
    hypothesis_check,
    in_cone,
    product_form,
    relativistic_lower_profile,
    spec_from_dict,
    spec_to_dict,
)
from templevy.errors import DomainError, RegimeError
from templevy.model import exp_model, poly_model, relativistic_model, stable_model
from templevy.profiles import Constant, ExpTempered, PolyTempered


def _upper_small(profile, **kw):
    base = dict(side="upper", regime="small_t", d=1, alpha=1.0, gamma=1.0)
    base.update(kw)
    return EnvelopeSpec(profile=profile, **base)


def test_upper_small_t_direct_value():
    # min(t^{-1}, t |x|^{-2} qbar(|x|)) at t = 0.25, x = 4, qbar = (1+s)^{-2}
    spec = _upper_small(PolyTempered(2.0))
    val = env_upper_small_t(spec, 0.25, np.array([4.0]))
    assert val == pytest.approx(min(4.0, 0.25 * 4.0 ** -2 * 5.0 ** -2),
                                rel=1e-12)
    assert val == pytest.approx(6.25e-4, rel=1e-12)


def test_upper_small_t_origin():
    spec = _upper_small(Constant(1.0), alpha=0.5)
    assert env_upper_small_t(spec, 0.5, np.zeros(1)) == pytest.approx(
        0.5 ** -2.0)


def test_lower_small_t_direct_value():
    # d=1, alpha=0.5, gamma=1, q=(1+s)^{-3}, t=0.5, x=2
    spec = EnvelopeSpec(side="lower", regime="small_t", d=1, alpha=0.5,
                        gamma=1.0, profile=PolyTempered(3.0),
                        directions=((1.0,), (-1.0,)))
    val = env_lower_small_t(spec, 0.5, np.array([2.0]))
    assert val == pytest.approx(min(4.0, 0.5 * 2.0 ** -1.5 * 3.0 ** -3),
                                rel=1e-12)
    assert val == pytest.approx(6.5462e-3, rel=1e-3)


def test_lower_large_t_direct_value():
    # d=1, gamma=1, beta=2, alpha=1, q=e^{-2s}: t=4, x=3
    spec = EnvelopeSpec(side="lower", regime="large_t", d=1, alpha=1.0,
                        gamma=1.0, profile=ExpTempered(a=0.0, c1=2.0),
                        beta=2.0, directions=((1.0,), (-1.0,)))
    val = env_lower_large_t(spec, 4.0, np.array([3.0]))
    assert val == pytest.approx(min(0.5, 4.0 * 3.0 ** -2 * math.exp(-6.0)),
                                rel=1e-12)
    assert val == pytest.approx(1.102e-3, rel=1e-3)


def test_upper_large_t_origin():
    spec = EnvelopeSpec(side="upper", regime="large_t", d=1, alpha=1.0,
                        gamma=1.0, profile=PolyTempered(3.0), beta=2.0)
    assert env_upper_large_t(spec, 9.0, np.zeros(1)) == pytest.approx(
        9.0 ** -0.5)


def test_regime_errors():
    up = _upper_small(PolyTempered(2.0))
    with pytest.raises(RegimeError):
        env_upper_small_t(up, 2.0, np.array([1.0]))
    large = EnvelopeSpec(side="upper", regime="large_t", d=1, alpha=1.0,
                         gamma=1.0, profile=PolyTempered(3.0), beta=2.0)
    with pytest.raises(RegimeError):
        env_upper_large_t(large, 0.5, np.array([1.0]))


def test_spec_invariants():
    with pytest.raises(DomainError):
        EnvelopeSpec(side="upper", regime="small_t", d=1, alpha=1.0,
                     gamma=0.5, profile=Constant(1.0))   # gamma < 1
    with pytest.raises(DomainError):
        EnvelopeSpec(side="upper", regime="large_t", d=1, alpha=1.0,
                     gamma=1.0, profile=Constant(1.0), beta=0.5)  # beta < alpha


def test_lower_outside_cone_not_applicable():
    spec = EnvelopeSpec(side="lower", regime="small_t", d=2, alpha=1.0,
                        gamma=1.0, profile=PolyTempered(3.0),
                        directions=((1.0, 0.0), (-1.0, 0.0)))
    assert in_cone(spec, np.array([3.0, 0.0]))
    assert not in_cone(spec, np.array([1.0, 1.0]))
    assert math.isnan(env_lower_small_t(spec, 0.5, np.array([1.0, 1.0])))


def test_envelope_monotone_in_x():
    spec = _upper_small(PolyTempered(2.0))
    radii = np.linspace(0.1, 15.0, 50)
    vals = [env_upper_small_t(spec, 0.3, np.array([r])) for r in radii]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_min_vs_product_form_comparable():
    spec = _upper_small(PolyTempered(3.0))
    ratios = []
    for t in (0.05, 0.2, 0.8):
        for r in np.logspace(-1, 1.3, 12):
            x = np.array([r])
            ratios.append(evaluate(spec, t, x) / product_form(spec, t, x))
    assert 0.0 < min(ratios) and max(ratios) / min(ratios) < 50.0


def test_hypothesis_check_poly_upper_passes():
    m = poly_model(3.0, 1.0)
    rep = hypothesis_check(m, _upper_small(PolyTempered(3.0)))
    assert rep["pass"]


def test_hypothesis_check_rejects_exponential_upper():
    # exponentially tempered profiles fail the doubling requirement of the
    # upper envelopes; polynomial replacements must be used instead
    m = exp_model(1.0)
    rep = hypothesis_check(m, _upper_small(ExpTempered(a=0.0, c1=1.0)))
    assert not rep["pass"]
    assert not rep["checks"]["profile_doubling"]["pass"]


def test_hypothesis_check_constant_beta2_fails_integrability():
    # q = const with beta > alpha: int_1^inf s^{beta-alpha-1} q(s) ds diverges
    m = stable_model(1.0)
    spec = EnvelopeSpec(side="upper", regime="large_t", d=1, alpha=1.0,
                        gamma=1.0, profile=Constant(1.0), beta=2.0)
    rep = hypothesis_check(m, spec)
    assert not rep["checks"]["beta_integrability"]["pass"]


def test_hypothesis_check_relativistic_lower():
    m = relativistic_model(1.0)
    spec = EnvelopeSpec(side="lower", regime="small_t", d=1, alpha=1.0,
                        gamma=1.0, profile=relativistic_lower_profile(1, 1.0),
                        directions=((1.0,), (-1.0,)))
    rep = hypothesis_check(m, spec)
    assert rep["pass"]


def test_relativistic_lower_profile_shape():
    q = relativistic_lower_profile(2, 1.0)
    s = np.array([3.0])
    assert q(s)[0] == pytest.approx((1 + 3.0) ** 1.0 * math.exp(-6.0),
                                    rel=1e-12)


def test_spec_serialization_roundtrip():
    spec = EnvelopeSpec(side="lower", regime="large_t", d=1, alpha=1.2,
                        gamma=1.0, profile=ExpTempered(a=0.0, c1=2.0),
                        beta=2.0, directions=((1.0,), (-1.0,)))
    back = spec_from_dict(spec_to_dict(spec))
    x = np.array([2.0])
    assert evaluate(back, 3.0, x) == pytest.approx(evaluate(spec, 3.0, x),
                                                   rel=1e-14)
