"""Truncated-measure decomposition: split, local part, compound Poisson."""
import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from templevy.decomp import (
    _poisson_order,
    bounded_cell_masses,
    compound_poisson,
    convolution_ball_check,
    default_eps,
    frequency_identity_defect,
    local_density,
    local_lower_check,
    local_moment,
    recompose,
    split,
)
from templevy.density import GridSpec, invert
from templevy.model import cauchy_model, exp_model, poly_model


def test_split_rate_cauchy():
    # lambda = nu(B(0,1)^c) = 2 int_1^inf s^-2 ds = 2
    sm = split(cauchy_model(), 1.0)
    assert sm.lam == pytest.approx(2.0, rel=1e-10)


def test_split_rate_poly_m2():
    # 2 int_1^inf s^-2 (1+s)^-2 ds = 3 - 4 ln 2 (partial fractions)
    sm = split(poly_model(2.0, 1.0), 1.0)
    assert sm.lam == pytest.approx(3.0 - 4.0 * math.log(2.0), rel=1e-10)


def test_default_eps_regimes():
    m = exp_model(1.0)           # beta = 2
    assert default_eps(m, 0.25) == pytest.approx(0.25)       # t^{1/alpha}
    assert default_eps(m, 4.0) == pytest.approx(2.0)         # t^{1/beta}


def test_poisson_order():
    # smallest n with P(N > n) < tol for N ~ Poisson(2)
    assert _poisson_order(2.0, 1e-10) == 16
    # brute-force check of both sides of the threshold
    def tail(n, mu=2.0):
        k = np.arange(n + 1)
        cdf = math.exp(-mu) * np.sum(mu ** k / np.array(
            [math.factorial(int(j)) for j in k]))
        return 1.0 - cdf
    assert tail(16) < 1e-10 < tail(15)


def test_bounded_cell_masses_total():
    sm = split(cauchy_model(), 1.0)
    g = GridSpec(1, 256.0, 2 ** 14)
    masses = bounded_cell_masses(sm, g)
    # gridded nubar keeps lambda up to the mass beyond the window
    assert masses.sum() == pytest.approx(sm.lam, rel=1e-2)
    assert masses.sum() < sm.lam


def test_local_density_mass_and_symmetry():
    sm = split(poly_model(3.0, 1.0), 0.5)
    fld = local_density(sm, 0.5)
    assert abs(fld.mass - 1.0) < 1e-6
    assert fld.symmetry_defect() <= 1e-9 * float(fld.values.max())


def test_local_moment_scaling():
    # the 2n-th truncated-semigroup moment scales like t^{2n/alpha}
    m = exp_model(1.0)
    ts = [2.0 ** -k for k in range(8, 2, -1)]
    for n in (1, 2):
        logs = [math.log(local_moment(split(m, default_eps(m, t)), t, n))
                for t in ts]
        slope = np.polyfit(np.log(ts), logs, 1)[0]
        assert slope == pytest.approx(2.0 * n, rel=0.05)


def test_frequency_identity():
    # fast-decaying profile so the big-jump mass outside the window is
    # negligible and the product identity holds to grid accuracy
    sm = split(poly_model(3.0, 1.0), 1.0)
    defect = frequency_identity_defect(sm, 1.0, GridSpec(1, 1024.0, 2 ** 16))
    assert defect < 1e-5


def test_recompose_matches_direct():
    m = cauchy_model()
    t = 1.0
    g = GridSpec(1, 2048.0, 2 ** 17)
    sm = split(m, default_eps(m, t))
    local = local_density(sm, t, g)
    cp = compound_poisson(sm, t, g)
    together = recompose(local, cp)
    direct = invert(m, t, g)
    err = (np.max(np.abs(together.values - direct.values))
           / np.max(direct.values))
    assert err < 1e-4
    # mass is short exactly by the big-jump tail outside the window,
    # which the compound-Poisson field reports in its tail bound
    assert abs(together.mass - 1.0) <= cp.tail_bound + 1e-5


def test_compound_poisson_total_mass():
    sm = split(poly_model(3.0, 1.0), 1.0)
    g = GridSpec(1, 512.0, 2 ** 15)
    cp = compound_poisson(sm, 2.0, g)
    # atom weight + a.c. mass sum to 1 within the reported tail bound
    total = cp.atom_weight + cp.ac_mass()
    assert abs(total - 1.0) <= cp.tail_bound + 1e-8


def test_convolution_ball_oracle_n2():
    # nubar^{2*}(B(x, r)) against a brute-force double quadrature
    m = cauchy_model()
    sm = split(m, 1.0)
    rows = convolution_ball_check(sm, 2, [10.0], GridSpec(1, 256.0, 2 ** 15))
    row = next(r for r in rows
               if r["n"] == 2 and r["rule"] == "eps/3" and r["admissible"])
    x, r = row["x"], row["r"]

    def f(s):  # density of nubar on the line (both atoms)
        return abs(s) ** -2.0 if abs(s) > 1.0 else 0.0

    oracle, _ = dblquad(
        lambda z, y: f(y) * f(z) if abs(y + z - x) < r else 0.0,
        -60.0, 60.0, lambda y: x - r - y, lambda y: x + r - y,
        epsabs=1e-10, epsrel=1e-8)
    assert row["ball"] == pytest.approx(oracle, rel=1e-4)


def test_convolution_ball_ratio_span():
    sm = split(poly_model(3.0, 1.0), 1.0)
    rows = convolution_ball_check(sm, 5, [6.0, 10.0, 14.0])
    by_n = {}
    for r in rows:
        if r.get("admissible") and "ratio" in r and r["ratio"] > 0:
            by_n.setdefault(r["n"], []).append(r["ratio"] ** (1.0 / r["n"]))
    vals = [v for lst in by_n.values() for v in lst]
    assert max(vals) / min(vals) < 10.0


def test_local_lower_check_bounded():
    rows = local_lower_check(poly_model(3.0, 1.0), [0.05, 0.1, 0.2, 0.4])
    vals = [v for _, v in rows]
    assert min(vals) > 0.0
    assert max(vals) / min(vals) < 2.0
