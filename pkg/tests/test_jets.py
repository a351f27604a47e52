import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darboux import jets
from darboux.errors import DivisionBySingularJet, DomainError, OrderExceeded
from darboux.jets import Jet2, cross, dot, extract_partial, index, jet_arith, jet_elementary
from darboux.suites import catalog_fd_residuals
from darboux.surfaces import catalog

U = lambda k, x=0.0: Jet2.variable(x, 0, k)  # noqa: E731
V = lambda k, x=0.0: Jet2.variable(x, 1, k)  # noqa: E731


def coeff_dict(j: Jet2) -> dict:
    return {m: float(j.coeffs[index(*m)]) for m in jets.monomials(j.order)}


def poly_mul_oracle(a: dict, b: dict, order: int) -> dict:
    """Plain double loop over monomials, then truncation."""
    out = {m: 0.0 for m in jets.monomials(order)}
    for (i, j), ca in a.items():
        for (k, l), cb in b.items():
            if i + j + k + l <= order:
                out[(i + k, j + l)] += ca * cb
    return out


def random_jet(rng, order):
    return Jet2(order, rng.standard_normal(jets.ncoeffs(order)))


def test_storage_size():
    for k in range(7):
        assert Jet2.constant(1.0, k).coeffs.shape[-1] == (k + 1) * (k + 2) // 2


def test_product_of_conjugates():
    one = Jet2.constant(1.0, 2)
    p = jet_arith(one + U(2), one - U(2), "mul")
    assert coeff_dict(p) == {(0, 0): 1.0, (1, 0): 0.0, (0, 1): 0.0, (2, 0): -1.0, (1, 1): 0.0,
                             (0, 2): 0.0}


def test_geometric_series():
    q = jet_arith(Jet2.constant(1.0, 2), Jet2.constant(1.0, 2) - U(2), "div")
    c = coeff_dict(q)
    assert c[(0, 0)] == c[(1, 0)] == c[(2, 0)] == 1.0
    assert c[(0, 1)] == c[(1, 1)] == c[(0, 2)] == 0.0


def test_mul_matches_convolution(rng):
    for _ in range(20):
        a, b = random_jet(rng, 3), random_jet(rng, 3)
        oracle = poly_mul_oracle(coeff_dict(a), coeff_dict(b), 3)
        got = coeff_dict(a * b)
        assert max(abs(got[m] - oracle[m]) for m in oracle) < 1e-14


def test_divide_singular():
    with pytest.raises(DivisionBySingularJet):
        Jet2.constant(1.0, 2) / U(2)


def test_sine_series():
    c = coeff_dict(jet_elementary(U(3), "sin"))
    assert c[(1, 0)] == 1.0
    assert abs(c[(3, 0)] + 1.0 / 6.0) < 1e-16
    assert abs(c[(0, 0)]) < 1e-16 and abs(c[(2, 0)]) < 1e-16


def test_exp_of_zero_jet():
    assert coeff_dict(jet_elementary(Jet2.constant(0.0, 3), "exp")) == coeff_dict(
        Jet2.constant(1.0, 3))


def test_cos_against_finite_differences():
    x0, y0, h = 0.3, -0.7, 1e-5
    j = jet_elementary(U(2, x0) + V(2, y0), "cos")
    f = lambda a, b: math.cos(a + b)  # noqa: E731
    fd = {
        (1, 0): (f(x0 + h, y0) - f(x0 - h, y0)) / (2 * h),
        (2, 0): (f(x0 + h, y0) - 2 * f(x0, y0) + f(x0 - h, y0)) / h ** 2,
        (1, 1): (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h)
                 + f(x0 - h, y0 - h)) / (4 * h * h),
    }
    for m, val in fd.items():
        assert abs(extract_partial(j, m) - val) < 1e-6


def test_sqrt_domain():
    with pytest.raises(DomainError):
        jet_elementary(Jet2.constant(-1.0, 2) + U(2), "sqrt")


def test_sqrt_squares_back(rng):
    a = Jet2.constant(2.0, 4) + random_jet(rng, 4) * 0.1
    a = Jet2(4, np.concatenate([[2.0], a.coeffs[1:]]))
    r = jet_elementary(a, "sqrt")
    assert np.max(np.abs((r * r - a).coeffs)) < 1e-14


def test_vector_products():
    e = np.eye(3)
    basis = [jets.stack([Jet2.constant(x, 2) for x in row]) for row in e]
    assert np.allclose(cross(basis[0], basis[1]).value, e[2])
    h = np.array([1.0, -1.0, 0.0])
    d1f = np.array([1.0, 0.0, 2.0])
    assert np.array_equal(cross(h, d1f), [-2.0, -2.0, 1.0])


def test_triple_product_vanishes(rng):
    a = jets.stack([random_jet(rng, 3) for _ in range(3)])
    b = jets.stack([random_jet(rng, 3) for _ in range(3)])
    assert np.max(np.abs(dot(a, cross(a, b)).coeffs)) < 1e-13
    assert np.max(np.abs((dot(a, b) - dot(b, a)).coeffs)) < 1e-14
    assert np.max(np.abs((cross(a, b) + cross(b, a)).coeffs)) < 1e-14


def test_extract_partial():
    u, v = U(3), V(3)
    assert extract_partial(u * u, (1, 0)) == 0.0
    assert extract_partial(u * v, (1, 1)) == 1.0
    assert abs(extract_partial(jet_elementary(u, "sin"), (1, 0)) - 1.0) < 1e-16
    assert extract_partial(u * u * u, (3, 0)) == 6.0
    with pytest.raises(OrderExceeded):
        extract_partial(u, (2, 2))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), order=st.integers(0, 6))
def test_ring_axioms(seed, order):
    rng = np.random.default_rng(seed)
    a, b, c = (random_jet(rng, order) for _ in range(3))
    scale = max(1.0, float(np.max(np.abs(((a * b) * c).coeffs))))
    assert np.max(np.abs(((a * b) * c - a * (b * c)).coeffs)) <= 2e-14 * scale * 10
    assert np.max(np.abs((a * (b + c) - (a * b + a * c)).coeffs)) <= 2e-14 * scale * 10
    assert np.max(np.abs((a * b - b * a).coeffs)) <= 2e-14 * scale


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), order=st.integers(1, 6))
def test_truncation_consistency(seed, order):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-1, 1, 2)
    hi = [Jet2.variable(x, 0, order), Jet2.variable(y, 1, order)]
    lo = [Jet2.variable(x, 0, order - 1), Jet2.variable(y, 1, order - 1)]
    expr = lambda u, v: jets.exp(u * v) / (jets.cos(u) + 2.0) + jets.sin(v) * u  # noqa: E731
    assert np.max(np.abs(expr(*hi).truncate(order - 1).coeffs - expr(*lo).coeffs)) < 1e-14


def test_catalog_maps_match_finite_differences():
    res = catalog_fd_residuals(catalog(), n=4)
    assert max(res.values()) <= 1e-6, res
