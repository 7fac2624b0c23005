import itertools
import math

import numpy as np
import pytest

import rdness


def test_fixed_point_matches_quadratic_root():
    p = rdness.ModelParams(a=1.0, b=2.0, lam=0.5)
    # (a + l r)(1 - r) - b r = 0  ->  -l r^2 + (l - a - b) r + a = 0
    roots = np.roots([-0.5, 0.5 - 3.0, 1.0])
    expect = [r for r in roots if 0 < r < 1][0]
    assert rdness.rho_star(p) == pytest.approx(expect, abs=1e-13)
    fp = rdness.fixed_point(p)
    assert fp.chi == pytest.approx(expect * (1 - expect))
    assert fp.excess == pytest.approx(2 * 0.5 * expect * (1 - expect) ** 2)


def test_white_noise_at_zero_lambda():
    p = rdness.ModelParams(a=1.0, b=3.0, lam=0.0)
    for k2 in (0.0, 1.0, 9.0):
        assert rdness.mode_variance(k2, p) == 0.25 * 0.75
    assert rdness.gaussian_entropy_sum(p, 8) == 0.0


def test_invalid_parameters_raise():
    with pytest.raises(ValueError):
        rdness.ModelParams(a=-1.0)
    with pytest.raises(ValueError):
        rdness.xi(0.0)


def test_exact_stationary_product_at_zero_lambda():
    p = rdness.ModelParams(a=1.0, b=3.0, lam=0.0, d=1, n=4)
    pi = rdness.stationary_distribution(p)
    ref = np.array([0.25 ** bin(s).count("1") * 0.75 ** (4 - bin(s).count("1")) for s in range(16)])
    assert np.abs(pi - ref).sum() / 2 < 1e-10
    assert rdness.total_variation(pi, rdness.product_measure(1, 4, 0.25)) < 1e-10


def test_adjoint_routes_agree():
    r = rdness.adjoint_one(rdness.ModelParams(a=1.0, b=1.0, lam=0.4, d=2, n=2))
    assert r["max_residual"] < 1e-12
    assert np.allclose(r["closed_form"], r["matrix"], atol=1e-12)


def test_product_marginal_enumeration():
    m = rdness.product_marginal(1, 1, 0.3)
    for pattern, bits in enumerate(itertools.product([0, 1], repeat=3)):
        ones = bin(pattern).count("1")
        assert m[pattern] == pytest.approx(0.3 ** ones * 0.7 ** (3 - ones))


def test_simulate_is_deterministic_and_shaped():
    p = rdness.ModelParams(a=1.0, b=1.0, lam=0.3, d=1, n=32)
    kw = dict(seed=4, total_time=4.0, interval=0.5, replicas=2, mode_cutoff=3, box_radius=1, burn_in=1.0)
    a = rdness.simulate(p, **kw)
    b = rdness.simulate(p, **kw)
    assert len(a) == 2
    assert np.array_equal(a[0]["densities"], b[0]["densities"])
    assert np.array_equal(a[1]["modes"], b[1]["modes"])
    s = a[0]
    assert s["modes"].shape == (len(s["times"]), len(s["modes_k"]))
    assert s["pattern_counts"].shape == (len(s["times"]), 8)
    assert np.all(s["pattern_counts"].sum(axis=1) == 32)
    # The k = 0 coefficient is the centred particle count over sqrt(n).
    rho = rdness.rho_star(p)
    k0 = [i for i, k in enumerate(s["modes_k"]) if tuple(k) == (0, 0, 0)][0]
    assert np.allclose(s["modes"][:, k0].real, (s["densities"] - rho) * 32 / math.sqrt(32), atol=1e-5)


def test_flow_energy_small_case():
    assert rdness.flow_energy(2, 8, 1) == pytest.approx(10 / 16)


def test_gaussian_field_sample():
    p = rdness.ModelParams(lam=0.2)
    ks, coef, var = rdness.sample_gaussian_field(p, 4, seed=3)
    assert len(ks) == len(coef) == len(var) == 5
    assert coef[0].imag == 0.0
    assert var[1] == pytest.approx(rdness.mode_variance(1.0, p))
