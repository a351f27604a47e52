import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darboux.jets import stack
from darboux.errors import NotImmersion, NotIsometricDeformation, UnknownPair
from darboux.surfaces import (DeformationPair, SurfaceMap, catalog, get_pair, pair_names,
                              perturbed, shifted, transported, trivial_pair, validate_pair)
from darboux.suites import SAUER_MATRIX
from darboux.triplets import compute_h


def d1(m, u, v, order=1):
    return m.eval(np.array([u]), np.array([v]), order).partial(1, 0)[0]


def test_catalog_names():
    assert pair_names() == ["paraboloid", "trivial", "planar", "ruled", "cylinder", "cone"]
    with pytest.raises(UnknownPair):
        get_pair("torus")


def test_paraboloid_hand_values(paraboloid):
    # d1g = h ^ d1f at (1, 1) with h = (1, -1, 0) and d1f = (1, 0, 2)
    assert np.array_equal(d1(paraboloid.f, 1.0, 1.0), [1.0, 0.0, 2.0])
    assert np.array_equal(paraboloid.h(1.0, 1.0), [1.0, -1.0, 0.0])
    assert np.array_equal(d1(paraboloid.g, 1.0, 1.0), [-2.0, -2.0, 1.0])


def test_recovered_rotation_fields(pairs):
    for name, pair in pairs.items():
        u, v = pair.grid(7)
        h = compute_h(pair.f.eval(u, v, 2), pair.g.eval(u, v, 2))
        assert np.max(np.abs(h.value - pair.h.eval(u, v, 1).value)) < 1e-12, name


def test_trivial_rotation_is_constant(pairs):
    u, v = pairs["trivial"].grid(6)
    h = compute_h(pairs["trivial"].f.eval(u, v, 2), pairs["trivial"].g.eval(u, v, 2))
    assert np.max(np.abs(h.value - [1.0, 2.0, 3.0])) < 1e-12


def test_planar_rotation_field(pairs):
    # h = (d2 w, -d1 w, 0) for w = sin u cos v
    pair = pairs["planar"]
    u, v = pair.grid(5)
    h = compute_h(pair.f.eval(u, v, 2), pair.g.eval(u, v, 2)).value
    expected = np.stack([-np.sin(u) * np.sin(v), -np.cos(u) * np.cos(v), 0 * u], -1)
    assert np.max(np.abs(h - expected)) < 1e-14


def test_all_pairs_validate(pairs):
    for name, pair in pairs.items():
        rep = validate_pair(pair, n=21)
        assert rep["pass"], name
        assert rep["max_residual"] <= 1e-9, name
        assert rep["points"] > 0


def test_paraboloid_bending_is_nontrivial(paraboloid):
    u, v = paraboloid.grid(21)
    h = paraboloid.h.eval(u, v, 0).value
    spread = np.max(np.linalg.norm(h[:, None, :] - h[None, :, :], axis=-1))
    assert spread >= 1.0


def test_perturbed_pair_fails(paraboloid):
    bad = perturbed(paraboloid, (1e-3, 0.0, 0.0))
    rep = validate_pair(bad, raise_on_fail=False)
    assert not rep["pass"]
    # d1f . (1e-3, 0, 0) = 1e-3 exactly for f = (u, v, ...)
    assert rep["max_raw_residual"] >= 1e-3 * (1 - 1e-12)
    with pytest.raises(NotIsometricDeformation):
        validate_pair(bad)


def _curve(u, v):
    # depends on u only, so d2 f = 0
    return stack([u, u * u, 0.0 * u])


def test_non_immersion_detected():
    flat = SurfaceMap(_curve)
    pair = DeformationPair("point", flat, flat, "generic", get_pair("planar").domain)
    with pytest.raises(NotImmersion):
        validate_pair(pair, n=3)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=6, max_size=6))
def test_trivial_passes_for_any_motion(ab):
    pair = trivial_pair(ab[:3], ab[3:])
    assert validate_pair(pair, n=5)["pass"]


def test_shift_keeps_isometry(paraboloid):
    assert validate_pair(shifted(paraboloid), n=9)["pass"]


def test_transported_pair_is_isometric(paraboloid):
    rep = validate_pair(transported(paraboloid, SAUER_MATRIX), n=21)
    assert rep["max_residual"] <= 1e-9


def test_domain_grid_is_row_major(paraboloid):
    u, v = paraboloid.domain.grid(3)
    assert u[0] == u[1] == u[2] and v[0] < v[1] < v[2]
    assert paraboloid.excluded_points(5) == []


def test_singular_set_excluded(paraboloid):
    assert not paraboloid.domain.is_valid(1.5, 1.5)
    assert not paraboloid.domain.is_valid(0.6, 0.8)  # u^2 + v^2 = 1
    assert paraboloid.domain.is_valid(1.0, 2.0)


def test_catalog_is_fresh():
    a, b = catalog(), catalog()
    assert [p.name for p in a] == [p.name for p in b]
    assert a[0] is not b[0]
