import numpy as np
import pytest

from darboux import jets
from darboux.errors import (BothRoutesUnavailable, InconsistentSystem, NotImmersion,
                            TangentPlaneThroughOrigin, WordError)
from darboux.jets import Jet2, stack
from darboux.surfaces import SurfaceMap, perturbed
from darboux.triplets import (CLASSES, COMPARE_SCORE, ORBIT_ORDER, TWELVE, DarbouxTriplet,
                              apply_word, closure_residual, compute_h, d_routes,
                              distinct_surfaces, polar, reduce_word, route_scores,
                              transform_A, transform_D, twelve_surfaces)


def np_polar(m, dm1, dm2):
    nu = np.cross(dm1, dm2)
    return -nu / np.sum(nu * m, -1)[..., None]


@pytest.fixture(scope="module")
def orbit_triplet(paraboloid):
    u, v = paraboloid.grid(10)
    return DarbouxTriplet.from_pair(paraboloid, u, v, ORBIT_ORDER)


def oracle_twelve(pair, u, v):
    """Closed forms of the twelve surfaces from the pair's f, g, h and their normals."""
    f = pair.f.eval(u, v, 1)
    h = pair.h.eval(u, v, 1)
    fv, gv, hv = f.value, pair.g(u, v), h.value
    fs = np_polar(fv, f.partial(1, 0), f.partial(0, 1))
    hs = np_polar(hv, h.partial(1, 0), h.partial(0, 1))
    gt = gv - np.cross(hv, fv)
    out = {"f": fv, "g": gv, "h": hv, "f*": fs, "h*": hs, "g~": gt,
           "h~": hv - np.cross(fs, gt), "f~": fv - np.cross(hs, gv),
           # g and g~ have normals along h and f (dg = h ^ df, dg~ = f ^ dh)
           "g*": -hv / np.sum(hv * gv, -1)[..., None],
           "g~*": -fv / np.sum(fv * gt, -1)[..., None]}
    return out


def test_word_table():
    assert TWELVE["f"] == "" and TWELVE["g"] == "D" and TWELVE["f*"] == "ADA"
    assert len(set(TWELVE.values())) == 12
    assert sorted(sum(CLASSES.values(), ())) == sorted(TWELVE)


def test_compute_h_examples(pairs):
    pair = pairs["paraboloid"]
    one = np.array([1.0])
    h = compute_h(pair.f.eval(one, one, 2), pair.g.eval(one, one, 2))
    assert np.allclose(h.value[0], [1.0, -1.0, 0.0], atol=1e-14)
    cyl = pairs["cylinder"]
    u, v = cyl.grid(5)
    h = compute_h(cyl.f, cyl.g).eval(u, v, 1)
    assert np.allclose(h.value, np.stack([0 * u, 0 * u, -np.cos(u)], -1), atol=1e-14)


def test_compute_h_errors(paraboloid):
    u, v = paraboloid.grid(4)
    bad = perturbed(paraboloid, (1e-3, 0.0, 0.0))
    with pytest.raises(InconsistentSystem):
        compute_h(bad.f.eval(u, v, 2), bad.g.eval(u, v, 2))
    line = lambda a, b: stack([a, 0.0 * a, 0.0 * a])  # noqa: E731
    with pytest.raises(NotImmersion):
        compute_h(SurfaceMap(line).eval(u, v, 2), paraboloid.g.eval(u, v, 2))


def test_transform_A(pairs):
    t = DarbouxTriplet.from_pair(pairs["trivial"], *pairs["trivial"].grid(5), 3)
    a = transform_A(t)
    assert np.allclose(a.f.value, [1.0, 2.0, 3.0], atol=1e-12)
    assert np.allclose(a.g.value, [4.0, 5.0, 6.0], atol=1e-12)
    assert np.array_equal(a.h.coeffs, t.f.coeffs)
    for i in range(2):
        assert np.max(np.abs(a.f.diff(i).value)) < 1e-12
        assert np.max(np.abs(a.g.diff(i).value)) < 1e-12
    for name, pair in pairs.items():
        if name == "trivial":
            continue  # A(T) has constant first and second components
        t = DarbouxTriplet.from_pair(pair, *pair.grid(6), 3)
        assert np.max(transform_A(t).relation_residual()) <= 1e-8, name
        assert np.max(closure_residual(t, "AA")) <= 1e-12, name


def test_polar_examples(pairs):
    def sphere(u, v):
        return stack([jets.cos(u) * jets.cos(v), jets.sin(u) * jets.cos(v), jets.sin(v)])

    u, v = np.linspace(0.1, 1.0, 7), np.linspace(-0.5, 0.6, 7)
    m = SurfaceMap(sphere).eval(u, v, 2)
    assert np.max(np.abs(polar(m).value + m.value)) < 1e-14
    plane = pairs["planar"]
    fs = polar(plane.f).eval(*plane.grid(4), 1)
    assert np.allclose(fs.value, [0.0, 0.0, -1.0], atol=1e-15)
    cone = pairs["cone"]
    with pytest.raises(TangentPlaneThroughOrigin):
        polar(cone.f.eval(*cone.grid(3), 2))


def test_polar_identities(pairs):
    for name, pair in pairs.items():
        u, v = pair.grid(6)
        for which in ("f", "h"):
            m = getattr(pair, which).eval(u, v, 2)
            try:
                ms = polar(m)
            except (TangentPlaneThroughOrigin, NotImmersion):
                continue
            mk = m.truncate(ms.order)
            assert np.max(np.abs(jets.dot(ms, mk).value + 1.0)) < 1e-12, (name, which)
            for i in range(2):
                assert np.max(np.abs(jets.dot(ms, mk.diff(i)).value)) < 1e-12, (name, which)


def test_transform_D(orbit_triplet):
    t = orbit_triplet
    d = transform_D(t)
    hs, h = d.h.value, t.h.value
    assert np.max(np.abs(np.sum(hs * h, -1) + 1.0)) < 1e-12
    for i in ((1, 0), (0, 1)):
        assert np.max(np.abs(np.sum(hs * t.f.partial(*i), -1))) < 1e-12
    assert np.max(closure_residual(t, "DD")) <= 1e-8


def test_route_agreement(orbit_triplet):
    (h1, ok1), (h2, ok2) = d_routes(orbit_triplet)
    s1, s2 = route_scores(orbit_triplet)
    both = ok1 & ok2 & (s1 >= COMPARE_SCORE) & (s2 >= COMPARE_SCORE)
    assert np.any(both)
    err = np.linalg.norm(h1.value - h2.value, axis=-1) / np.linalg.norm(h1.value, axis=-1)
    assert np.max(err[both]) <= 1e-8


def test_both_routes_unavailable(pairs):
    cyl = pairs["cylinder"]  # g depends on u only and h is a curve
    t = DarbouxTriplet.from_pair(cyl, *cyl.grid(3), 3)
    with pytest.raises(BothRoutesUnavailable):
        transform_D(t)
    with pytest.raises(WordError) as info:
        apply_word(t, "D")
    assert info.value.prefix == ""
    assert isinstance(info.value.cause, BothRoutesUnavailable)


def test_reduce_word():
    assert reduce_word("AADDA") == "A"
    assert reduce_word("ADDA") == ""
    assert reduce_word("dada") == "DADA"
    with pytest.raises(ValueError):
        reduce_word("ADX")


def test_apply_word_basics(orbit_triplet):
    t = orbit_triplet
    assert apply_word(t, "") is t
    assert apply_word(t, "AA") is t
    assert apply_word(t, "DAD").word == "DAD"
    assert "DA" in t._cache


def test_twelve_match_closed_forms(paraboloid, orbit_triplet):
    u, v = orbit_triplet.points
    oracle = oracle_twelve(paraboloid, u, v)
    twelve = twelve_surfaces(orbit_triplet)
    for label, val in oracle.items():
        got = twelve[label][1].value
        err = np.max(np.linalg.norm(got - val, axis=-1) / np.linalg.norm(val, axis=-1))
        assert err < 1e-10, label


def test_orbit_polars_pair_up(orbit_triplet):
    """Every m* in the table is the polar of m (m*.m = -1, m*.dm = 0)."""
    twelve = twelve_surfaces(orbit_triplet)
    for base in ("f", "g", "h", "f~", "g~", "h~"):
        m, ms = twelve[base][1], twelve[base + "*"][1]
        k = min(m.order, ms.order)
        m, ms = m.truncate(k), ms.truncate(k)
        assert np.max(np.abs(jets.dot(ms, m).value + 1.0)) < 1e-9, base
        for i in range(2):
            d = m.diff(i).value
            rel = np.abs(np.sum(ms.value * d, -1)) / (
                np.linalg.norm(ms.value, axis=-1) * np.linalg.norm(d, axis=-1))
            assert np.max(rel) < 1e-9, base


def test_every_orbit_member_is_a_triplet(orbit_triplet):
    for label, word in TWELVE.items():
        t = apply_word(orbit_triplet, word)
        assert np.max(t.relation_residual()) <= 1e-7, label
        assert np.max(t.closure_residual()) <= 1e-7, label


def test_word_of_length_twelve_closes_the_orbit(orbit_triplet):
    assert orbit_triplet.values().shape[0] >= 100
    assert np.max(closure_residual(orbit_triplet)) <= 1e-7
    assert np.max(closure_residual(orbit_triplet, "AD" * 6)) <= 1e-7
    values = {k: j.value for k, (_, j) in twelve_surfaces(orbit_triplet).items()}
    assert distinct_surfaces(values) == 12


def test_class_orbits_under_ada_and_dad(orbit_triplet):
    """The class of f is its orbit under the subgroup generated by ADA and DAD."""
    seen = {}
    frontier = [""]
    while frontier:
        w = frontier.pop()
        r = reduce_word(w)
        if r in seen or len(r) > 12:
            continue
        seen[r] = apply_word(orbit_triplet, r).f.value
        frontier += [r + "ADA", r + "DAD"]
    labels = set()
    twelve = {k: j.value for k, (_, j) in twelve_surfaces(orbit_triplet).items()}
    for val in seen.values():
        for label, ref in twelve.items():
            if np.max(np.abs(val - ref)) < 1e-7 * max(1.0, np.max(np.abs(ref))):
                labels.add(label)
    assert labels == set(CLASSES["f"])


def test_shift_is_a_triplet(orbit_triplet):
    s = orbit_triplet.shifted()
    assert np.max(s.relation_residual()) <= 1e-12
    assert np.max(closure_residual(s)) <= 1e-7


def test_truncate_and_auto_order(orbit_triplet):
    t = DarbouxTriplet(orbit_triplet.f, orbit_triplet.g, orbit_triplet.h.truncate(3))
    assert t.order == 3
    assert isinstance(t.f, Jet2)
