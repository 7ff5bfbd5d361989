from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from freeconv import (Domain, eval_eta, eval_F, eval_G, eval_phi, eval_psi, make_atomic,
                      make_named, nevanlinna_read, sigma_transform, voiculescu_phi)
from freeconv.errors import DomainMismatch, OutsideInversionInterval
from freeconv.transforms import TransformHandle, law_of, make_handle
from freeconv.measure import DomainTag

from conftest import random_atomic


def test_cauchy_of_point_mass_at_i():
    assert eval_G(make_atomic([(0, 1.0)]), 1j) == pytest.approx(-1j)


def test_cauchy_and_F_of_symmetric_bernoulli(sym):
    assert eval_G(sym, 2j) == pytest.approx(-0.4j)
    assert eval_F(sym, 2j) == pytest.approx(2.5j)


def test_F_of_point_mass_is_a_shift():
    mu = make_atomic([(1.7, 1.0)])
    z = np.array([1j, -3 + 0.2j, 5 + 7j])
    assert np.allclose(eval_F(mu, z), z - 1.7)


@pytest.mark.parametrize("mu", [make_atomic([(-1, 0.3), (4, 0.7)]), make_named("semicircle", (1, 2)),
                                make_named("arcsine", (0, 4)), make_named("uniform", (-1, 3))])
def test_normalization_at_infinity(mu):
    y = 1e6
    assert abs(1j * y * eval_G(mu, 1j * y) - 1) < 1e-5
    assert abs(eval_F(mu, 1j * y) / (1j * y) - 1) < 1e-5


@pytest.mark.parametrize("name,params", [("semicircle", (0.5, 1.5)), ("arcsine", (-1, 2)),
                                         ("uniform", (0, 3))])
def test_closed_forms_match_quadrature(name, params):
    mu = make_named(name, params, n_nodes=4000)
    z = np.array([0.3 + 0.5j, -2 + 1j, 4 + 0.2j, 1 - 0.7j])
    quad = (1 / (z[:, None] - mu.nodes)) @ mu.weights
    assert np.allclose(eval_G(mu, z), quad, atol=1e-6)


def test_signed_zero_does_not_flip_branch():
    mu = make_named("semicircle", (0, 2))
    a = eval_G(mu, complex(-3, 0.0))
    b = eval_G(mu, complex(-3, -0.0))
    assert a == pytest.approx(b)
    assert a.real < 0


def test_psi_of_delta_one():
    assert eval_psi(make_atomic([(1, 1.0)], Domain.HALFLINE), -1) == pytest.approx(-0.5)


def test_haar_psi_vanishes():
    h = make_named("haar", (), Domain.CIRCLE)
    z = np.array([0.3, 0.5j, -0.9 + 0.1j])
    assert np.max(np.abs(eval_psi(h, z))) < 1e-10
    assert np.max(np.abs(eval_eta(h, z))) < 1e-10


def test_eta_of_point_masses():
    z = np.array([-0.4, 0.2 + 0.3j, 1 + 1j])
    assert np.allclose(eval_eta(make_atomic([(2.5, 1.0)], Domain.HALFLINE), z), 2.5 * z)
    theta = 1.1
    zc = np.array([0.1, 0.5j, -0.3 - 0.4j])
    assert np.allclose(eval_eta(make_atomic([(theta, 1.0)], Domain.CIRCLE), zc), np.exp(1j * theta) * zc)


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        eval_G(make_named("haar", (), Domain.CIRCLE), 1j)
    with pytest.raises(DomainMismatch):
        eval_eta(make_atomic([(0, 1.0)]), 0.5)


@pytest.mark.parametrize("fn,expected", [
    (lambda z: z - 1 / z, (0.0, 1.0, 1.0)),
    (lambda z: z + 5, (5.0, 1.0, 0.0)),
    (lambda z: 2 * z, (0.0, 2.0, 0.0)),
])
def test_nevanlinna_read(fn, expected):
    h = TransformHandle("F", fn, DomainTag.UPPER_HALFPLANE)
    got = nevanlinna_read(h)
    assert np.allclose(got, expected, atol=1e-6)


def test_voiculescu_phi_point_mass():
    assert voiculescu_phi(make_atomic([(0.7, 1.0)]), 10j) == pytest.approx(0.7)


def test_voiculescu_phi_semicircle_against_moment_series():
    # oracle: invert F from the truncated moment series of the semicircle of variance 1
    moments = [1, 0, 1, 0, 2, 0, 5, 0, 14]
    G = lambda u: sum(m / u ** (k + 1) for k, m in enumerate(moments))
    target = 10j
    u = target
    for _ in range(50):
        f = 1 / G(u) - target
        d = (1 / G(u + 1e-6) - 1 / G(u - 1e-6)) / 2e-6
        u = u - f / d
    oracle = u - target
    got = voiculescu_phi(make_named("semicircle", (0, 2)), target)
    assert abs(got - oracle) < 1e-7
    assert abs(got - 1 / target) < 1e-7


def test_sigma_of_point_mass():
    assert sigma_transform(make_atomic([(3.0, 1.0)], Domain.HALFLINE), -0.1) == pytest.approx(1 / 3)


def test_sigma_against_bisection():
    def eta(x):
        psi = 0.5 * x / (1 - x) + 0.5 * 2 * x / (1 - 2 * x)
        return psi / (1 + psi)

    z = -0.01
    lo, hi = -1.0, 0.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if eta(mid) > z:
            hi = mid
        else:
            lo = mid
    oracle = (lo + hi) / 2 / z
    mu = make_atomic([(1, 0.5), (2, 0.5)], Domain.HALFLINE)
    assert abs(sigma_transform(mu, z) - oracle) < 1e-10


def test_sigma_requires_negative_argument():
    with pytest.raises(OutsideInversionInterval):
        sigma_transform(make_atomic([(1, 0.5), (2, 0.5)], Domain.HALFLINE), 0.1)


def test_handles_expose_sibling_transforms(sym):
    h = make_handle(sym, "G")
    assert h(2j) == pytest.approx(-0.4j)
    assert h.sibling("F")(2j) == pytest.approx(2.5j)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-5, 5), st.floats(0.01, 5))
def test_F_increases_imaginary_part(seed, x, y):
    mu = random_atomic(np.random.default_rng(seed), Domain.REAL, 3)
    assert eval_F(mu, complex(x, y)).imag >= y - 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 0.99), st.floats(0, 2 * np.pi))
def test_circle_phi_is_bounded_by_one(seed, r, a):
    mu = random_atomic(np.random.default_rng(seed), Domain.CIRCLE, 3)
    assert abs(eval_phi(mu, r * np.exp(1j * a))) <= 1 + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-50, -0.01))
def test_halfline_eta_is_negative_and_increasing_on_negative_axis(seed, x):
    mu = random_atomic(np.random.default_rng(seed), Domain.HALFLINE, 3)
    e1 = eval_eta(mu, x)
    e2 = eval_eta(mu, x * 0.9)
    assert abs(e1.imag) < 1e-12 and e1.real < 0
    assert e2.real > e1.real


def test_mixture_with_named_family_small_z():
    # named-family mass must be counted once on both evaluation branches
    from freeconv import combine
    mu = combine([(3.0, 0.2)], make_named("uniform", (1, 2)), Domain.HALFLINE)
    law = law_of(mu)
    for z in (0.01 + 0.01j, -0.2, -3.0 + 0.5j):
        re = quad(lambda x: (z * x / (1 - z * x)).real, 1, 2, epsabs=1e-14)[0]
        im = quad(lambda x: (z * x / (1 - z * x)).imag, 1, 2, epsabs=1e-14)[0]
        ref = 0.2 * z * 3 / (1 - 3 * z) + 0.8 * (re + 1j * im)
        assert abs(law.psi(z) - ref) < 1e-12


def test_F_minus_id_avoids_cancellation():
    mp = pytest.importorskip("mpmath")
    from freeconv import combine
    mu = combine([(3.0, 0.2)], make_named("uniform", (1, 2)))
    law = law_of(mu)
    for z in (0.3 + 0.01j, 5 + 1j, 1e4 + 3j, 100.5 + 1e-3j, -50j):
        with mp.workdps(40):
            zz = mp.mpc(z.real, z.imag)
            G = 0.2 / (zz - 3) + 0.8 * (mp.log(zz - 1) - mp.log(zz - 2))
            ref = complex(1 / G - zz)
        # rounding in the quadrature weights perturbs the total mass by ~1e-16,
        # which moves F(z) − z by about |z|·1e-16
        assert abs(law.F_minus_id(z) - ref) < 1e-13 * max(1, abs(ref)) + 4e-15 * abs(z)
