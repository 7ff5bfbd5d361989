from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeconv import (Domain, atom_mass_real, atoms_free_add, atoms_free_mult, combine, density_circle,
                      free_add, free_mult, free_mult_circle, free_mult_halfline, make_atomic,
                      make_named, recover_grid, two_atom_add_oracle, two_atom_mult_oracle)
from freeconv.errors import BadWeights, DomainMismatch
from freeconv.transforms import law_of

from conftest import random_atomic

UPPER = np.array([0.3 + 0.5j, -2 + 0.05j, 1.5 + 2j, 4 + 1e-3j, -0.7 + 1e-5j])
DISK = np.array([0.3 + 0.1j, -0.5j, 0.9 * np.exp(2j), 0.99, -0.7 + 0.1j])
SLIT = np.array([-0.5, -3.0, 0.4 + 0.3j, 2 - 0.01j, -1 + 2j])


def test_point_mass_translates():
    nu = make_atomic([(-1, 0.2), (0.5, 0.3), (2, 0.5)])
    a = 0.8
    F = free_add(make_atomic([(a, 1.0)]), nu).convolved
    assert np.allclose(F(UPPER), law_of(nu).F(UPPER - a))
    F2 = free_add(nu, make_atomic([(a, 1.0)])).convolved
    assert np.allclose(F2(UPPER), law_of(nu).F(UPPER - a))


def test_point_mass_dilates_on_halfline():
    nu = make_atomic([(0.5, 0.4), (3, 0.6)], Domain.HALFLINE)
    a = 1.7
    eta = free_mult_halfline(make_atomic([(a, 1.0)], Domain.HALFLINE), nu).convolved
    assert np.allclose(eta(SLIT), law_of(nu).eta(a * SLIT))
    eta = free_mult_halfline(nu, make_atomic([(a, 1.0)], Domain.HALFLINE)).convolved
    assert np.allclose(eta(SLIT), law_of(nu).eta(a * SLIT))


@pytest.mark.parametrize("first", [True, False])
def test_point_mass_rotates_on_circle(first):
    nu = combine([(0.4, 0.3), (2.5, 0.2)], make_named("haar", (), Domain.CIRCLE), Domain.CIRCLE)
    d = make_atomic([(1.1, 1.0)], Domain.CIRCLE)
    pair = free_mult_circle(d, nu) if first else free_mult_circle(nu, d)
    assert np.allclose(pair.convolved(DISK), law_of(nu).eta(np.exp(1j * 1.1) * DISK), atol=1e-12)
    assert np.max(pair.residual_probe(DISK)) < 1e-12


def test_rotations_compose_on_circle():
    al, be = 0.7, 2.1
    res = free_mult_circle(make_atomic([(al, 1.0)], Domain.CIRCLE), make_atomic([(be, 1.0)], Domain.CIRCLE))
    assert np.allclose(res.convolved(DISK), np.exp(1j * (al + be)) * DISK)
    assert res.law.point_mass == pytest.approx(al + be)


def test_two_zero_mean_laws_give_haar():
    mu = make_atomic([(0.0, 0.5), (np.pi, 0.5)], Domain.CIRCLE)
    nu = make_atomic([(0.3, 1 / 3), (0.3 + 2 * np.pi / 3, 1 / 3), (0.3 + 4 * np.pi / 3, 1 / 3)],
                     Domain.CIRCLE)
    res = free_mult_circle(mu, nu)
    assert np.max(np.abs(res.convolved(DISK))) == 0
    th = np.linspace(0, 2 * np.pi, 7)
    assert np.allclose(density_circle(res.law, th), 1 / (2 * np.pi), atol=1e-12)


def test_one_zero_mean_factor_is_not_absorbing():
    # μ⊠δ_β is μ rotated by β, even when μ has zero first moment
    mu = make_atomic([(0.0, 0.5), (np.pi, 0.5)], Domain.CIRCLE)
    be = 0.4
    res = free_mult_circle(mu, make_atomic([(be, 1.0)], Domain.CIRCLE))
    rotated = make_atomic([(be, 0.5), (np.pi + be, 0.5)], Domain.CIRCLE)
    assert np.allclose(res.convolved(DISK), law_of(rotated).eta(DISK), atol=1e-12)


def test_haar_absorbs_everything():
    h = make_named("haar", (), Domain.CIRCLE)
    nu = make_atomic([(0.2, 0.7), (2.0, 0.3)], Domain.CIRCLE)
    res = free_mult_circle(h, nu)
    assert np.max(np.abs(res.convolved(DISK))) < 1e-12


def test_zero_atom_takes_the_larger_mass():
    mu = make_atomic([(0.0, 0.3), (1.0, 0.7)], Domain.HALFLINE)
    nu = make_atomic([(0.0, 0.5), (2.0, 0.5)], Domain.HALFLINE)
    rep = atoms_free_mult(mu, nu)
    assert rep.to_list()[0] == {"pos": 0.0, "mass": 0.5, "rule": "zero_rule"}
    law = free_mult(mu, nu).law
    assert atom_mass_real(law, 0.0) == pytest.approx(0.5, abs=1e-6)


def test_additive_oracle_roots():
    G, roots = two_atom_add_oracle(0.5, 2, 0.5, 2)
    assert np.allclose(roots, [0, 2, 2, 4])
    x = np.linspace(0.01, 3.99, 50)
    assert np.all(np.prod(x[:, None] - roots[None, :], axis=1) <= 0)
    assert np.all(np.prod(np.array([-0.5, 4.5])[:, None] - roots[None, :], axis=1) > 0)


def test_additive_oracle_matches_fixed_point(rng):
    for _ in range(5):
        s, t = rng.uniform(0.1, 0.9, 2)
        u, v = rng.uniform(0.5, 3, 2)
        G, _ = two_atom_add_oracle(s, u, t, v)
        pair = free_add(make_atomic([(0, s), (u, 1 - s)]), make_atomic([(0, t), (v, 1 - t)]))
        z = UPPER[:4]
        assert np.max(np.abs(law_of(pair.law).G(z) - G(z))) < 1e-9


def test_multiplicative_oracle_coefficients_and_weights():
    (A, B, C, D), _ = two_atom_mult_oracle(0.3, 2, 0.4, 3)
    assert A == pytest.approx(36)
    with pytest.raises(BadWeights):
        two_atom_mult_oracle(0.5, 1, 0.5, 1)
    with pytest.raises(BadWeights):
        two_atom_add_oracle(1.2, 1, 0.5, 1)


def test_multiplicative_oracle_matches_fixed_point(rng):
    for _ in range(5):
        s, t = rng.uniform(0.1, 0.9, 2)
        u, v = rng.uniform(1.2, 4, 2)
        _, eta = two_atom_mult_oracle(s, u, t, v)
        mu = make_atomic([(1, s), (u, 1 - s)], Domain.HALFLINE)
        nu = make_atomic([(1, t), (v, 1 - t)], Domain.HALFLINE)
        got = free_mult(mu, nu).convolved(SLIT)
        assert np.max(np.abs(got - eta(SLIT))) < 1e-9


def test_atom_reports():
    mu = make_atomic([(0, 0.8), (1, 0.2)])
    nu = make_atomic([(0, 0.7), (2, 0.3)])
    rep = atoms_free_add(mu, nu)
    assert rep.locations == [0.0, 2.0] and rep.masses == [pytest.approx(0.5), pytest.approx(0.1)]
    sym = make_atomic([(-1, 0.5), (1, 0.5)])
    assert len(atoms_free_add(sym, sym)) == 0
    rep = atoms_free_add(make_atomic([(1.5, 1.0)]), make_atomic([(-0.5, 1.0)]))
    assert rep.locations == [1.0] and rep.masses == [1.0]
    rep = atoms_free_mult(make_atomic([(1, 0.6), (2, 0.4)], Domain.HALFLINE),
                          make_atomic([(1, 0.7), (3, 0.3)], Domain.HALFLINE))
    assert rep.locations == [1.0, 2.0] and rep.masses == [pytest.approx(0.3), pytest.approx(0.1)]
    rep = atoms_free_mult(make_atomic([(0.5, 1.0)], Domain.CIRCLE), make_atomic([(1.0, 1.0)], Domain.CIRCLE))
    assert rep.locations == [1.5] and rep.masses == [1.0]


def test_domain_checks():
    with pytest.raises(DomainMismatch):
        free_add(make_atomic([(0, 1.0)]), make_atomic([(0, 1.0)], Domain.CIRCLE))
    with pytest.raises(DomainMismatch):
        free_mult(make_atomic([(0, 1.0)]), make_atomic([(1, 1.0)]))


def test_continuous_operands():
    sc = make_named("semicircle", (0, 2))
    # semicircle ⊞ semicircle is the semicircle of doubled variance
    pair = free_add(sc, sc)
    ref = make_named("semicircle", (0, 2 * np.sqrt(2)))
    assert np.allclose(pair.convolved(UPPER), law_of(ref).F(UPPER), atol=1e-9)
    mp = combine([(0.5, 0.3)], make_named("uniform", (1, 2)), Domain.HALFLINE)
    res = free_mult(mp, make_atomic([(1, 0.5), (2, 0.5)], Domain.HALFLINE))
    assert np.max(res.residual_probe(SLIT)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_additive_subordination_properties(seed):
    r = np.random.default_rng(seed)
    mu, nu = random_atomic(r, Domain.REAL, 2), random_atomic(r, Domain.REAL, 3)
    pair = free_add(mu, nu)
    assert np.max(pair.residual_probe(UPPER)) < 1e-10
    w1, w2 = pair.omega1(UPPER), pair.omega2(UPPER)
    assert np.all(w1.imag >= UPPER.imag - 1e-12) and np.all(w2.imag >= UPPER.imag - 1e-12)
    assert np.allclose(pair.convolved(UPPER), free_add(nu, mu).convolved(UPPER), atol=1e-9)
    # conjugate symmetry
    assert np.allclose(pair.convolved(np.conj(UPPER)), np.conj(pair.convolved(UPPER)))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_circle_subordination_properties(seed):
    r = np.random.default_rng(seed)
    mu, nu = random_atomic(r, Domain.CIRCLE, 2), random_atomic(r, Domain.CIRCLE, 3)
    pair = free_mult(mu, nu)
    assert np.max(pair.residual_probe(DISK)) < 1e-10
    assert np.all(np.abs(pair.omega1(DISK)) <= np.abs(DISK) + 1e-12)
    assert np.all(np.abs(pair.omega2(DISK)) <= np.abs(DISK) + 1e-12)
    assert pair.omega1(0.0) == 0
    assert np.allclose(pair.convolved(DISK), free_mult(nu, mu).convolved(DISK), atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_halfline_subordination_properties(seed):
    r = np.random.default_rng(seed)
    mu, nu = random_atomic(r, Domain.HALFLINE, 2), random_atomic(r, Domain.HALFLINE, 3)
    pair = free_mult(mu, nu)
    assert np.max(pair.residual_probe(SLIT)) < 1e-10
    neg = np.array([-0.1, -1.0, -10.0])
    assert np.allclose(pair.convolved(neg).imag, 0)
    assert np.allclose(pair.convolved(SLIT), free_mult(nu, mu).convolved(SLIT), atol=1e-9)


def test_recovered_density_of_arcsine_case(bernoulli):
    g = recover_grid(free_add(bernoulli, bernoulli).law, (0.2, 3.8, 181))
    x = g.abscissae
    assert np.max(np.abs(g.densities - 1 / (np.pi * np.sqrt(x * (4 - x))))) < 1e-6
