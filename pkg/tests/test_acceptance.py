"""The nine acceptance criteria, at their stated tolerances.

Each test records a one-line outcome that is printed in the pytest summary.
"""

import time
import warnings

import numpy as np

from darboux.gauss import (IsotropicImmersionPoint, cross_oracle, gauss_maps_closed_form,
                           gauss_ranks, ruling_test, triality_residuals, verify_triality_cycle)
from darboux.incidence import (EXPECTED_RANKS, IncidenceTriple, integral_surface_check,
                               fibre_dimensions, nonintegrability_probe)
from darboux.quadric import chart_minus
from darboux.secondforms import (apolarity_check, forms_from_octonions, proportionality_check,
                                 rank_table)
from darboux.suites import (SAUER_MATRIX, catalog_fd_residuals, octonion_residuals,
                            sauer_residuals)
from darboux.surfaces import catalog, transported, validate_pair
from darboux.triplets import ORBIT_ORDER, DarbouxTriplet, apply_word, closure_residual


def fmt(values: dict) -> str:
    return ", ".join(f"{k}={v:.1e}" if isinstance(v, float) else f"{k}={v}"
                     for k, v in values.items())


def test_criterion_1_octonion_algebra(criterion):
    t0 = time.perf_counter()
    res = octonion_residuals(np.random.default_rng(1), n=10_000)
    elapsed = time.perf_counter() - t0
    worst = {k: float(np.max(v)) for k, v in res.items()}
    criterion(fmt({**worst, "seconds": elapsed}))
    assert res["norm_multiplicative"].size == 10_000
    for key in ("norm_multiplicative", "L_a L_abar = N(a) Id", "R_abar R_a = N(a) Id",
                "polarised_identity"):
        assert worst[key] <= 1e-12, key
    assert elapsed < 1.0


def test_criterion_2_twelve_surfaces(criterion, paraboloid):
    t0 = time.perf_counter()
    u, v = paraboloid.grid(12)
    t = DarbouxTriplet.from_pair(paraboloid, u, v, ORBIT_ORDER)
    back = apply_word(t, "DADADADADADA", reduce=False)
    a, b = t.values(), back.values()
    per_component = np.max(np.linalg.norm(a - b, axis=-1) / np.linalg.norm(a, axis=-1))
    closure = float(np.max(closure_residual(t)))
    a2 = float(np.max(closure_residual(t, "AA")))
    d2 = float(np.max(closure_residual(t, "DD")))
    elapsed = time.perf_counter() - t0
    criterion(fmt({"points": u.size, "(DA)^6": float(per_component), "A^2": a2, "D^2": d2,
                   "seconds": elapsed}))
    assert u.size >= 100
    assert per_component <= 1e-7 and closure <= 1e-7
    assert a2 <= 1e-12
    assert d2 <= 1e-8
    assert elapsed < 10.0


def test_criterion_3_gauss_cross_oracle(criterion):
    worst = {}
    for pair in catalog():
        t = DarbouxTriplet.from_pair(pair, *pair.grid(10), 4)
        res = cross_oracle(t)
        assert res["families_ok"], pair.name
        worst[pair.name] = float(max(np.max(res[k]) for k in
                                     ("angle_plus", "angle_minus", "label_plus", "label_minus")))
    criterion(fmt(worst))
    assert max(worst.values()) <= 1e-7


def test_criterion_4_differential_triality(criterion, paraboloid):
    u, v = paraboloid.grid(10)
    p = IsotropicImmersionPoint.from_pair(paraboloid, u, v)
    tri = max(float(np.max(r)) for r in triality_residuals(p).values())
    cyc = verify_triality_cycle(p)
    assert cyc["excluded"] == []
    r = cyc["residuals"]
    cycle = float(max(np.max(r["plus_plus"]), np.max(r["plus_minus"])))
    full = float(max(np.max(x) for x in r.values()))
    criterion(fmt({"triality": tri, "phi_++ = phi_-, phi_+- = phi": cycle, "all cycle": full}))
    assert tri <= 1e-7
    assert cycle <= 1e-6 and full <= 1e-6


def test_criterion_5_degeneracy_catalog(criterion, pairs):
    trivial = pairs["trivial"]
    p = IsotropicImmersionPoint.from_pair(trivial, *trivial.grid(10))
    rp, _ = gauss_ranks(p)
    dplus = np.max(np.linalg.norm(np.stack([p.psi_plus.coords.partial(1, 0),
                                            p.psi_plus.coords.partial(0, 1)]), axis=-1))
    planar = pairs["planar"]
    t = DarbouxTriplet.from_pair(planar, *planar.grid(10), 4)
    target = chart_minus(np.zeros(3), np.array([0.0, 0.0, -1.0]))
    planar_angle = max(w.angle(target) for w in gauss_maps_closed_form(t).minus)
    ruled = pairs["ruled"]
    t = DarbouxTriplet.from_pair(ruled, *ruled.grid(10), 4)
    rp_ruled, _ = gauss_ranks(IsotropicImmersionPoint.from_triplet(t))
    rt = ruling_test(t)
    ruling = float(max(np.max(rt["straightness"]), np.max(rt["tangent_to_dh"])))
    criterion(fmt({"|d phi_+| trivial": float(dplus), "planar phi_- angle": planar_angle,
                   "ruled ranks": sorted(set(np.ravel(rp_ruled).tolist())), "ruling": ruling}))
    assert np.all(rp == 0) and dplus <= 1e-12
    assert planar_angle <= 1e-7
    assert np.all(rp_ruled == 1)
    assert ruling <= 1e-5


def test_criterion_6_second_forms(criterion, pairs):
    apol, triples, kernels = 0.0, set(), []
    for pair in pairs.values():
        p = IsotropicImmersionPoint.from_pair(pair, *pair.grid(10))
        forms = forms_from_octonions(p)
        apol = max(apol, float(np.max(apolarity_check(forms.plus, forms.minus, forms.scale))))
        res = rank_table(p)
        assert np.all(res["in_table"]), pair.name
        triples |= set(map(tuple, res["triples"].tolist()))
        kernels += res["kernel_angles"].tolist()
    t = DarbouxTriplet.from_pair(pairs["paraboloid"], *pairs["paraboloid"].grid(10), 4)
    prop = proportionality_check(t)
    cross = float(max(np.max(prop[k]) for k in ("plus_vs_f", "minus_vs_g", "mixed_vs_h")))
    kernel = max(kernels)
    criterion(fmt({"apolarity": apol, "proportionality": cross, "kernel angle": kernel,
                   "kernels": len(kernels), "triples": sorted(triples)}))
    assert apol <= 1e-6
    assert cross <= 1e-6
    assert len(kernels) > 0 and kernel <= 1e-5


def test_criterion_7_incidence(criterion, pairs, paraboloid):
    membership = max(integral_surface_check(pair, n=10)["membership"] for pair in pairs.values())
    rng = np.random.default_rng(7)
    u, v = rng.uniform(0.65, 1.15, 3), rng.uniform(1.95, 2.45, 3)
    phi = IncidenceTriple.from_point(IsotropicImmersionPoint.from_pair(paraboloid, u, v, 2))
    bases = [IncidenceTriple(phi.x0[i], phi.x1[i], phi.x2[i]) for i in range(3)]
    dims = [fibre_dimensions(b)["xi0+xi1+xi2"] for b in bases]
    probes = [nonintegrability_probe(b) for b in bases]
    ranks = [tuple(r["ranks"]) for r in probes]
    probe_ok = all(r == EXPECTED_RANKS for r in ranks)
    criterion(fmt({"membership": float(membership), "dim xi": dims,
                   "probe ranks (heuristic)": ranks}))
    assert membership <= 1e-8
    assert dims == [6, 6, 6]
    assert all(r["heuristic"] for r in probes)
    if not probe_ok:
        warnings.warn(f"heuristic bracket probe ranks {ranks}, expected {EXPECTED_RANKS}")


def test_criterion_8_darboux_sauer(criterion, paraboloid):
    res = sauer_residuals(np.random.default_rng(8), n=1000)
    q_res = float(np.max(res["q_preserved"]))
    fixed = float(np.max(res["chart_plus_origin_fixed"]))
    moved = transported(paraboloid, SAUER_MATRIX)
    iso = validate_pair(moved, n=21, raise_on_fail=False)["max_residual"]
    criterion(fmt({"q preserved": q_res, "chart_plus(0, 0) fixed": fixed,
                   "transported df.dg": float(iso)}))
    assert res["q_preserved"].size == 1000
    assert q_res <= 1e-12
    assert fixed <= 1e-12
    assert iso <= 1e-9


def test_criterion_9_jet_engine(criterion):
    res = catalog_fd_residuals(catalog())
    worst = max(res.values())
    criterion(fmt({"maps": len(res), "worst": worst}))
    assert worst <= 1e-6
