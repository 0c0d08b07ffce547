"""Increment sampler: seeding, jump law, covariance, distribution."""
import math

import numpy as np
import pytest

from templevy.density import GridSpec, invert
from templevy.errors import DomainError
from templevy.model import cauchy_model, nu_tail, poly_model
from templevy.montecarlo import (
    SamplerConfig,
    jump_counts,
    jump_radius_cdf,
    sample_big_jump_sum,
    sample_increment,
    sample_many,
    small_jump_covariance,
)


def test_config_validation():
    m = cauchy_model()
    with pytest.raises(DomainError):
        SamplerConfig(m, t=1.0, eps=0.0)
    with pytest.raises(DomainError):
        SamplerConfig(m, t=-1.0, eps=0.1)
    with pytest.raises(DomainError):
        SamplerConfig(m, t=1.0, eps=0.1, mode="exact")


def test_seeded_determinism():
    cfg = SamplerConfig(cauchy_model(), t=1.0, eps=0.1, count=200, seed=7)
    a = sample_many(cfg)
    b = sample_many(cfg)
    np.testing.assert_array_equal(a, b)
    c = sample_many(SamplerConfig(cauchy_model(), t=1.0, eps=0.1,
                                  count=200, seed=8))
    assert not np.array_equal(a, c)


def test_single_draw_shapes():
    cfg = SamplerConfig(cauchy_model(), t=0.5, eps=0.2, seed=3)
    assert sample_increment(cfg).shape == (1,)
    assert sample_big_jump_sum(cfg).shape == (1,)


def test_jump_counts_mean():
    m = cauchy_model()
    eps, t, n = 0.5, 0.7, 40000
    lam = nu_tail(m, eps)
    counts = jump_counts(SamplerConfig(m, t=t, eps=eps, seed=11), count=n)
    se = math.sqrt(t * lam / n)
    assert abs(counts.mean() - t * lam) <= 3.0 * se


def test_jump_radius_cdf_pareto():
    # q = 1: the radius law is exactly Pareto(alpha) above eps
    m = cauchy_model()
    eps = 0.3
    s = np.array([0.3, 0.6, 1.2, 10.0])
    np.testing.assert_allclose(jump_radius_cdf(m, eps, s),
                               np.maximum(0.0, 1.0 - eps / s), rtol=1e-10)


def test_jump_radius_cdf_monotone():
    m = poly_model(3.0, 1.0)
    s = np.linspace(0.1, 50.0, 200)
    cdf = jump_radius_cdf(m, 0.1, s)
    assert np.all(np.diff(cdf) >= -1e-12)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-3)


def test_small_jump_covariance_value():
    # 2 int_0^eps s^{1-alpha} q ds with alpha = 1, q = 1 -> 2 eps
    cov = small_jump_covariance(cauchy_model(), 0.25)
    assert cov.shape == (1, 1)
    assert cov[0, 0] == pytest.approx(0.5, rel=1e-10)


def test_drop_mode_pure_jumps():
    # with eps tiny and mode "drop", empirical variance of the big-jump sum
    # of a tempered model stays finite and positive
    cfg = SamplerConfig(poly_model(3.0, 1.0), t=0.5, eps=0.05,
                        mode="drop", count=4000, seed=5)
    x = sample_many(cfg)
    assert x.shape == (4000, 1)
    assert 0.0 < x.var() < 50.0


def test_ks_against_inverted_density():
    m = poly_model(3.0, 1.0)
    t = 0.5
    cfg = SamplerConfig(m, t=t, eps=0.02, count=20000, seed=42)
    x = np.sort(sample_many(cfg)[:, 0])
    fld = invert(m, t, GridSpec(1, 256.0, 2 ** 15))
    cdf_grid = np.cumsum(fld.values) * fld.grid.h
    cdf = np.interp(x, fld.grid.x_axis(), cdf_grid)
    emp = (np.arange(len(x)) + 0.5) / len(x)
    ks = np.max(np.abs(emp - cdf))
    assert ks < 0.02
