import numpy as np
import pytest

from darboux.errors import DegenerateSecondary
from darboux.gauss import (IsotropicImmersionPoint, classify_rank, cross_oracle,
                           darboux_at_phi_level, gauss_maps_closed_form, gauss_maps_generic,
                           gauss_ranks, lift_psi, minus_subspace_general, rank_label,
                           ruling_test, triality_orbit, triality_residuals,
                           verify_triality_cycle)
from darboux.quadric import MINUS, PLUS, chart_minus, q
from darboux.surfaces import (DEVELOPABLE, GENERIC, PLANAR, RULED, TRIVIAL)
from darboux.triplets import DarbouxTriplet

ANGLE_TOL = 1e-8


def triplet(pair, n=5, order=4):
    return DarbouxTriplet.from_pair(pair, *pair.grid(n), order)


def test_psi_is_totally_isotropic(pairs):
    for name, pair in pairs.items():
        psi = lift_psi(triplet(pair))
        basis = np.stack([psi.value, psi.partial(1, 0), psi.partial(0, 1)], -2)
        gram = np.einsum("...ia,ab,...jb->...ij", basis, _polar_matrix(), basis)
        assert np.max(np.abs(gram)) < 1e-12, name
        assert np.max(np.abs(q(psi.value))) < 1e-12, name


def _polar_matrix():
    """Bilinear form of q(x, s, y, t) = x.y + s t, built by polarisation."""
    m = np.zeros((8, 8))
    e = np.eye(8)
    for i in range(8):
        for j in range(8):
            m[i, j] = 0.5 * (q(e[i] + e[j]) - q(e[i]) - q(e[j]))
    return m


def test_cross_oracle(pairs):
    """The generic extension and the closed forms give the same subspaces."""
    for name, pair in pairs.items():
        res = cross_oracle(triplet(pair))
        assert res["families_ok"], name
        for key in ("angle_plus", "angle_minus", "label_plus", "label_minus"):
            assert np.max(res[key]) <= ANGLE_TOL, (name, key)


def test_generic_maps_contain_tangent_space(paraboloid):
    p = IsotropicImmersionPoint.from_pair(paraboloid, *paraboloid.grid(3))
    gm = gauss_maps_generic(p)
    basis = p.tangent_basis().reshape(-1, 3, 8)
    for k, (wp, wm) in enumerate(zip(gm.plus, gm.minus)):
        assert wp.dim == 4 and wm.dim == 4
        assert wp.family == PLUS and wm.family == MINUS
        assert max(wp.distance(b) for b in basis[k]) < 1e-10
        assert max(wm.distance(b) for b in basis[k]) < 1e-10


def test_polar_free_minus_map_agrees(paraboloid):
    t = triplet(paraboloid, 3)
    cf = gauss_maps_closed_form(t, fallback=True)
    f, g, h = (m.value.reshape(-1, 3) for m in (t.f, t.g, t.h))
    nu = np.cross(t.f.partial(1, 0), t.f.partial(0, 1)).reshape(-1, 3)
    for k in range(f.shape[0]):
        w = minus_subspace_general(nu[k], f[k], h[k], g[k] - np.cross(h[k], f[k]))
        assert w.angle(cf.minus[k]) < 1e-10


def test_differential_triality(pairs):
    for name, pair in pairs.items():
        p = IsotropicImmersionPoint.from_pair(pair, *pair.grid(6))
        for key, r in triality_residuals(p).items():
            assert np.max(r) <= 1e-9, (name, key)


def test_triality_cycle_paraboloid(paraboloid):
    res = verify_triality_cycle(paraboloid, *paraboloid.grid(5))
    assert res["excluded"] == []
    for key, r in res["residuals"].items():
        assert np.max(r) <= ANGLE_TOL, key
    p = IsotropicImmersionPoint.from_pair(paraboloid, *paraboloid.grid(3))
    assert np.max(triality_orbit(p)) <= ANGLE_TOL


def test_triality_cycle_excludes_constant_gauss_map(pairs):
    trivial = pairs["trivial"]
    u, v = trivial.grid(4)
    res = verify_triality_cycle(trivial, u, v)
    assert len(res["excluded"]) == u.size
    assert all(reason == "phi_plus is not an immersion" for _, reason in res["excluded"])
    assert np.all(np.isnan(res["residuals"]["plus_plus"]))
    assert np.nanmax(res["residuals"]["minus_plus"]) <= ANGLE_TOL
    with pytest.raises(DegenerateSecondary):
        verify_triality_cycle(trivial, u, v, strict=True)


def test_darboux_at_phi_level(pairs):
    for name, pair in pairs.items():
        res = darboux_at_phi_level(triplet(pair))
        skipped = res.pop("skipped")
        assert np.max(res["theta_plus_vs_c_A"]) <= ANGLE_TOL, name
        for key, val in res.items():
            assert np.max(val) <= 1e-7, (name, key)
        if name in ("paraboloid", "trivial", "ruled"):
            assert skipped == {}, name
        else:
            assert "sigma_vs_D" in skipped, name


@pytest.mark.parametrize("rp, rm, label", [(0, 2, TRIVIAL), (2, 0, PLANAR), (1, 0, PLANAR),
                                           (1, 1, DEVELOPABLE), (2, 1, DEVELOPABLE),
                                           (1, 2, RULED), (2, 2, GENERIC)])
def test_rank_label(rp, rm, label):
    assert rank_label(rp, rm) == label


def test_ranks_match_catalog_classes(pairs):
    expected = {"paraboloid": ({2}, {2}), "trivial": ({0}, {2}), "ruled": ({1}, {2}),
                "cylinder": ({1}, {1}), "cone": ({1}, {1})}
    for name, pair in pairs.items():
        res = classify_rank(pair, *pair.grid(5))
        assert res["label"] == pair.expected_class, name
        assert set(res["labels"]) == {pair.expected_class}, name
        if name in expected:
            rp, rm = expected[name]
            assert set(np.ravel(res["rank_plus"]).tolist()) == rp, name
            assert set(np.ravel(res["rank_minus"]).tolist()) == rm, name
        else:
            assert set(np.ravel(res["rank_minus"]).tolist()) == {0}, name


def test_planar_minus_map_is_constant(pairs):
    """For f in the plane z = 0, phi_- is the fixed point (0, (0, 0, -1))_-."""
    t = triplet(pairs["planar"], 4)
    target = chart_minus(np.zeros(3), np.array([0.0, 0.0, -1.0]))
    cf = gauss_maps_closed_form(t)
    assert max(w.angle(target) for w in cf.minus) <= ANGLE_TOL
    p = IsotropicImmersionPoint.from_triplet(t)
    _, rm = gauss_ranks(p)
    assert np.all(rm == 0)


def test_rulings_of_rank_one_pairs(pairs):
    for name in ("ruled", "cylinder", "cone"):
        res = ruling_test(triplet(pairs[name]))
        assert np.max(res["straightness"]) <= 1e-7, name
        assert np.max(res["tangent_to_dh"]) <= 1e-7, name


def test_ruling_test_detects_curved_lines(paraboloid):
    """On a generic pair the kernel field of the dominant row is not a ruling."""
    res = ruling_test(triplet(paraboloid))
    assert np.max(res["straightness"]) > 1e-3
