from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeconv import Domain, make_atomic
from freeconv.dwolff import (SolverConfig, continued, denjoy_wolff, fixed_points, invert_disk,
                            invert_halfplane, invert_slitplane)
from freeconv.errors import NotAdmissible
from freeconv.measure import DomainTag
from freeconv.transforms import law_of


def test_affine_map_has_interior_point():
    res = denjoy_wolff(lambda w: w / 2 + 1j, DomainTag.UPPER_HALFPLANE)
    assert res.kind == "interior"
    assert res.location == pytest.approx(2j)


def test_square_on_disk_is_attracted_to_zero():
    res = denjoy_wolff(lambda z: z * z, DomainTag.UNIT_DISK)
    assert res.kind == "interior"
    assert abs(res.location) < 1e-12


def test_map_without_fixed_point_escapes_to_infinity():
    res = denjoy_wolff(lambda w: w - 1 / w, DomainTag.UPPER_HALFPLANE)
    assert res.kind == "boundary"
    assert res.location == complex(np.inf)


def test_invert_identity():
    assert invert_halfplane(lambda z: z, 1 + 2j) == pytest.approx(1 + 2j)
    assert invert_disk(lambda z: z, 0.3j) == pytest.approx(0.3j)
    assert invert_slitplane(lambda z: z, -2.0) == pytest.approx(-2.0)


def test_invert_quadratic_halfplane_map():
    # H(z) = z + 1/z; ω(3i) solves z² − 3iz + 1 = 0 in the upper half-plane
    w = invert_halfplane(lambda z: z + 1 / z, 3j)
    assert w == pytest.approx(1j * (3 + np.sqrt(13)) / 2, abs=1e-12)


def test_invert_linear_shift():
    assert invert_halfplane(lambda z: z + 1, 1j) == pytest.approx(-1 + 1j)


def test_disk_inversion_at_zero():
    assert invert_disk(lambda z: z / (0.5 + 0.2 * z), 0.0) == 0


def test_disk_inversion_needs_modulus_growth():
    # |z²| < |z| inside the disk, so z² is not an admissible Φ
    with pytest.raises(NotAdmissible):
        invert_disk(lambda z: z * z, 0.25)


def test_slitplane_inversion_of_linear_map():
    a = 2.5
    assert invert_slitplane(lambda z: z / a, -1.0) == pytest.approx(-a)


def test_slitplane_inversion_of_power_map_residual():
    mu = law_of(make_atomic([(1, 0.5), (2, 0.5)], Domain.HALFLINE))
    Phi = lambda z: z * z / mu.eta(z)
    w = invert_slitplane(Phi, -1.0)
    assert abs(Phi(w) - (-1.0)) < 1e-10


def test_fixed_points_vectorized_and_nan_on_failure():
    cfg = SolverConfig(max_iterations=50)
    f = lambda w, p: w / 2 + p
    w, res, its = fixed_points(f, np.array([1j, 2j]), 1j, DomainTag.UPPER_HALFPLANE, cfg)
    assert np.allclose(w, [2j, 4j])
    w, _, _ = fixed_points(lambda w, p: w + p, np.array([1j]), 1j, DomainTag.UPPER_HALFPLANE, cfg)
    assert np.isnan(w[0])


def test_continued_reaches_points_near_the_axis():
    H = lambda w: w + 1 / w
    g = lambda w, a: w + a - H(w)

    def solve(a, seed):
        w, _, _ = fixed_points(g, a, a if seed is None else seed, DomainTag.UPPER_HALFPLANE)
        return w

    z = np.array([0.5 + 1e-6j, 1.9 + 1e-4j, 3 + 2j])
    w = continued(solve, z)
    assert np.all(np.isfinite(w))
    assert np.max(np.abs(H(w) - z)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(1e-3, 5))
def test_inverse_of_F_plus_identity_is_a_right_inverse(x, y):
    mu = law_of(make_atomic([(-1, 0.3), (2, 0.7)]))
    H = lambda w: 2 * w - mu.F(w)
    a = complex(x, y)
    w = invert_halfplane(H, a, check=False)
    assert w.imag >= 0
    assert abs(H(w) - a) < 1e-9 * max(1, abs(a))
