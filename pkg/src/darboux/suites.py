"""Verification suites shared by the command line and the acceptance tests.

Every suite returns a :class:`Report`: a list of named checks with a
scale-normalised ``max_residual``, a ``tolerance`` and ``pass``, plus the
grid points that were excluded and the checks that were skipped (each with
a reason).  Reports are deterministic for a given pair, grid and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DarbouxError
from .gauss import (IsotropicImmersionPoint, cross_oracle, darboux_at_phi_level,
                    gauss_maps_closed_form, gauss_ranks, ruling_test, triality_residuals,
                    verify_triality_cycle)
from .incidence import (IncidenceTriple, integral_surface_check, fibre_dimensions,
                        membership, nonintegrability_probe)
from .jets import extract_partial
from .octonion import (LEFT, RIGHT, ZornMatrix, mul_operator, random_zorn, zorn_bilinear,
                       zorn_conj, zorn_mul, zorn_norm)
from .quadric import chart_minus, chart_plus, pgl4_action, pgl4_subspace, q, rho
from .secondforms import (DIRECTION_TOL, apolarity_check, forms_from_octonions,
                          proportionality_check, rank_table)
from .surfaces import (DEVELOPABLE, GENERIC, PLANAR, RULED, TRIVIAL, DeformationPair,
                       transported, validate_pair)
from .triplets import ORBIT_ORDER, DarbouxTriplet, closure_residual, twelve_surfaces

SCHEMA = 1
SUITES = ("algebra", "triplets", "gauss", "forms", "incidence")

ALGEBRA_SAMPLES = 10_000
OPERATOR_SAMPLES = 1_000
SAUER_SAMPLES = 1_000
ALGEBRA_TOL = 1e-12
SAUER_ISOMETRY_TOL = 1e-9
FD_STEP = 1e-4
FD_TOL = 1e-6
CLOSURE_TOL = 1e-7
A_SQUARED_TOL = 1e-12
D_SQUARED_TOL = 1e-8
RELATION_TOL = 1e-9
GAUSS_ANGLE_TOL = 1e-7
TRIALITY_TOL = 1e-7
CYCLE_TOL = 1e-6
RULING_TOL = 1e-5
APOLARITY_TOL = 1e-6
PROPORTIONALITY_TOL = 1e-6
KERNEL_TOL = 1e-5
MEMBERSHIP_TOL = 1e-8
PROBE_POINTS = 3

# a fixed projective (non-affine) transformation for the transport check
SAUER_MATRIX = np.array([
    [1.0, 0.2, -0.1, 0.3],
    [0.1, 0.9, 0.2, -0.2],
    [-0.2, 0.1, 1.1, 0.1],
    [0.05, -0.03, 0.02, 1.0],
])


@dataclass
class Check:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.max_residual) and self.max_residual <= self.tolerance)

    def to_json(self) -> dict:
        value = self.max_residual if math.isfinite(self.max_residual) else None
        return {"name": self.name, "max_residual": value,
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class Report:
    suite: str
    pair: str
    grid: int
    seed: int
    checks: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def add(self, name: str, residual, tolerance: float) -> Check:
        r = np.asarray(residual, dtype=float)
        value = float(np.max(r)) if r.size else 0.0
        c = Check(name, value, tolerance)
        self.checks.append(c)
        return c

    def skip(self, name: str, reason: str):
        self.skipped[name] = reason

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "suite": self.suite,
            "pair": self.pair,
            "grid": {"n": self.grid, "points": self.info.get("points")},
            "seed": self.seed,
            "checks": [c.to_json() for c in self.checks],
            "excluded": [{"point": list(p), "reason": r} for p, r in self.excluded],
            "skipped": dict(sorted(self.skipped.items())),
            "info": {k: v for k, v in self.info.items() if k != "points"},
            "pass": self.passed,
        }


def _new(suite, pair: DeformationPair, n, seed) -> tuple[Report, np.ndarray, np.ndarray]:
    rep = Report(suite, pair.name, n, seed)
    u, v = pair.grid(n)
    rep.excluded = [(p, "on the singular set of the pair") for p in pair.excluded_points(n)]
    rep.info["points"] = int(u.size)
    return rep, u, v


# ---------------------------------------------------------------------------
# algebra: octonions, quadric, Darboux-Sauer, jet engine


def octonion_residuals(rng: np.random.Generator, n: int = ALGEBRA_SAMPLES,
                       n_ops: int = OPERATOR_SAMPLES) -> dict:
    """Norm multiplicativity, L_a L_abar = N(a) Id = R_abar R_a, the polarised identity."""
    z, w = random_zorn(rng, n), random_zorn(rng, n)
    e2 = lambda c: np.sum(c * c, -1)  # noqa: E731
    zc, wc = z.coords, w.coords
    mult = np.abs(zorn_norm(zorn_mul(z, w)) - zorn_norm(z) * zorn_norm(w)) / (e2(zc) * e2(wc))
    conj = (np.linalg.norm(zorn_conj(zorn_mul(z, w)).coords
                           - zorn_mul(zorn_conj(w), zorn_conj(z)).coords, axis=-1)
            / np.sqrt(e2(zc) * e2(wc)))
    a = random_zorn(rng, n_ops)
    lhs_l = mul_operator(a, LEFT) @ mul_operator(zorn_conj(a), LEFT)
    lhs_r = mul_operator(zorn_conj(a), RIGHT) @ mul_operator(a, RIGHT)
    target = zorn_norm(a)[:, None, None] * np.eye(8)
    sa = e2(a.coords)[:, None, None]
    ops_left = np.max(np.abs(lhs_l - target) / sa, axis=(-2, -1))
    ops_right = np.max(np.abs(lhs_r - target) / sa, axis=(-2, -1))
    b, x, y = (random_zorn(rng, n) for _ in range(3))
    pol = (zorn_bilinear(zorn_mul(z, x), zorn_mul(b, y)) + zorn_bilinear(zorn_mul(z, y), zorn_mul(b, x))
           - 2 * zorn_bilinear(z, b) * zorn_bilinear(x, y))
    scale = np.sqrt(e2(zc) * e2(b.coords) * e2(x.coords) * e2(y.coords))
    v = rng.standard_normal((n_ops, 8))
    anti = np.abs(zorn_norm(rho(v)) + q(v)) / e2(v)
    return {"norm_multiplicative": mult, "conj_antiautomorphism": conj,
            "L_a L_abar = N(a) Id": ops_left, "R_abar R_a = N(a) Id": ops_right,
            "polarised_identity": np.abs(pol) / scale, "rho_anti_isometry": anti}


def random_invertible(rng: np.random.Generator) -> np.ndarray:
    while True:
        a = rng.standard_normal((4, 4))
        if np.linalg.cond(a) < 1e3:
            return a


def sauer_residuals(rng: np.random.Generator, n: int = SAUER_SAMPLES) -> dict:
    """q preserved by diag(A, A^{-T}) and chart_plus(0, 0) fixed, for random A."""
    qres, fixed = [], []
    p1 = chart_plus(np.zeros(3), np.zeros(3))
    for _ in range(n):
        a = random_invertible(rng)
        v = rng.standard_normal(8)
        w = pgl4_action(a, v)
        scale = (np.linalg.norm(v[:4]) * np.linalg.norm(v[4:])
                 + np.linalg.norm(w[:4]) * np.linalg.norm(w[4:]))
        qres.append(abs(q(w) - q(v)) / scale)
        fixed.append(pgl4_subspace(a, p1).angle(p1))
    return {"q_preserved": np.array(qres), "chart_plus_origin_fixed": np.array(fixed)}


def jet_fd_residuals(m, u, v, h: float = FD_STEP) -> np.ndarray:
    """Relative gap between order <= 2 jet partials of ``m`` and central differences."""
    jet = m.eval(np.asarray(u, float), np.asarray(v, float), 2)
    f = lambda a, b: np.asarray(m(a, b), dtype=float)  # noqa: E731
    fd = {
        (1, 0): (f(u + h, v) - f(u - h, v)) / (2 * h),
        (0, 1): (f(u, v + h) - f(u, v - h)) / (2 * h),
        (2, 0): (f(u + h, v) - 2 * f(u, v) + f(u - h, v)) / h ** 2,
        (0, 2): (f(u, v + h) - 2 * f(u, v) + f(u, v - h)) / h ** 2,
        (1, 1): (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4 * h * h),
    }
    exact = {k: extract_partial(jet, k) for k in fd}
    scale = max(1.0, max(float(np.max(np.abs(e))) for e in exact.values()))
    return np.array([np.max(np.abs(fd[k] - exact[k])) / scale for k in fd])


def catalog_fd_residuals(pairs, n: int = 5) -> dict:
    out = {}
    for pair in pairs:
        u, v = pair.grid(n)
        maps = {"f": pair.f, "g": pair.g}
        if pair.h is not None:
            maps["h"] = pair.h
        for name, m in maps.items():
            out[f"{pair.name}.{name}"] = max(
                float(np.max(jet_fd_residuals(m, a, b))) for a, b in zip(u, v))
    return out


def suite_algebra(pair: DeformationPair, n: int, seed: int) -> Report:
    from .surfaces import catalog

    rep, u, v = _new("algebra", pair, n, seed)
    rng = np.random.default_rng(seed)
    for name, r in octonion_residuals(rng).items():
        rep.add("octonion:" + name, r, ALGEBRA_TOL)
    for name, r in sauer_residuals(rng).items():
        rep.add("darboux_sauer:" + name, r, ALGEBRA_TOL)
    moved = transported(pair, SAUER_MATRIX)
    rep.add("darboux_sauer:transported_isometry",
            validate_pair(moved, samples=(u, v), raise_on_fail=False)["max_residual"],
            SAUER_ISOMETRY_TOL)
    rep.add("surfaces:isometry", validate_pair(pair, samples=(u, v), raise_on_fail=False)
            ["max_residual"], SAUER_ISOMETRY_TOL)
    fd = catalog_fd_residuals(catalog())
    rep.add("jets:finite_differences", list(fd.values()), FD_TOL)
    return rep


# ---------------------------------------------------------------------------
# triplets


def suite_triplets(pair: DeformationPair, n: int, seed: int) -> Report:
    rep, u, v = _new("triplets", pair, n, seed)
    t = DarbouxTriplet.from_pair(pair, u, v, ORBIT_ORDER)
    rep.add("relation dg = h x df", t.relation_residual(), RELATION_TOL)
    rep.add("A^2 = id", closure_residual(t, "AA"), A_SQUARED_TOL)
    for name, word, tol in (("D^2 = id", "DD", D_SQUARED_TOL),
                            ("(DA)^6 = id", "DA" * 6, CLOSURE_TOL),
                            ("(AD)^6 = id", "AD" * 6, CLOSURE_TOL)):
        try:
            rep.add(name, closure_residual(t, word), tol)
        except DarbouxError as exc:
            rep.skip(name, f"{type(exc).__name__}: {exc}")
    try:
        values = {k: jet.value for k, (_, jet) in twelve_surfaces(t).items()}
        spread = {k: float(np.max(np.ptp(val, axis=0))) for k, val in values.items()}
        rep.info["orbit_spread"] = dict(sorted(spread.items()))
    except DarbouxError as exc:
        rep.skip("twelve_surfaces", f"{type(exc).__name__}: {exc}")
    return rep


# ---------------------------------------------------------------------------
# Gauss maps


def suite_gauss(pair: DeformationPair, n: int, seed: int) -> Report:
    rep, u, v = _new("gauss", pair, n, seed)
    t = DarbouxTriplet.from_pair(pair, u, v, 4)
    co = cross_oracle(t)
    rep.add("cross_oracle:angle_plus", co["angle_plus"], GAUSS_ANGLE_TOL)
    rep.add("cross_oracle:angle_minus", co["angle_minus"], GAUSS_ANGLE_TOL)
    rep.add("cross_oracle:label_plus", co["label_plus"], GAUSS_ANGLE_TOL)
    rep.add("cross_oracle:label_minus", co["label_minus"], GAUSS_ANGLE_TOL)
    rep.add("cross_oracle:families", 0.0 if co["families_ok"] else 1.0, 0.0)
    p = IsotropicImmersionPoint.from_triplet(t.truncate(3))
    for name, r in triality_residuals(p).items():
        rep.add("triality:" + name, r, TRIALITY_TOL)
    cyc = verify_triality_cycle(p)
    flat_u, flat_v = np.ravel(u), np.ravel(v)
    for k, reason in cyc["excluded"]:
        rep.excluded.append(((float(flat_u[k]), float(flat_v[k])), reason))
    for name, r in cyc["residuals"].items():
        r = r[np.isfinite(r)]
        if r.size:
            rep.add("cycle:" + name, r, CYCLE_TOL)
        else:
            rep.skip("cycle:" + name, "the source Gauss map is not an immersion at any point")
    dp = darboux_at_phi_level(t)
    for name, reason in dp.pop("skipped").items():
        rep.skip("darboux:" + name, reason)
    for name, r in dp.items():
        rep.add("darboux:" + name, r, GAUSS_ANGLE_TOL)
    rp, rm = gauss_ranks(p)
    rep.info["rank_plus"] = sorted({int(x) for x in np.ravel(rp)})
    rep.info["rank_minus"] = sorted({int(x) for x in np.ravel(rm)})
    _degeneracy_checks(rep, pair, t, rp, rm)
    return rep


def _degeneracy_checks(rep: Report, pair, t, rp, rm):
    cls = pair.expected_class
    mismatch = lambda r, want: float(np.mean(np.ravel(r) != want))  # noqa: E731
    if cls == TRIVIAL:
        rep.add("degeneracy:rank d phi_+ = 0", mismatch(rp, 0), 0.0)
    elif cls == PLANAR:
        target = chart_minus(np.zeros(3), np.array([0.0, 0.0, -1.0]))
        cf = gauss_maps_closed_form(t)
        rep.add("degeneracy:phi_- = (0, -e3)_-", [w.angle(target) for w in cf.minus],
                GAUSS_ANGLE_TOL)
    elif cls == RULED:
        rep.add("degeneracy:rank d phi_+ = 1", mismatch(rp, 1), 0.0)
        rt = ruling_test(t)
        rep.add("degeneracy:ruling_straightness", rt["straightness"], RULING_TOL)
        rep.add("degeneracy:ruling_tangent_to_dh", rt["tangent_to_dh"], RULING_TOL)
    elif cls == DEVELOPABLE:
        rep.add("degeneracy:rank d phi_- = 1", mismatch(rm, 1), 0.0)
    elif cls == GENERIC:
        rep.add("degeneracy:ranks (2, 2)", max(mismatch(rp, 2), mismatch(rm, 2)), 0.0)


# ---------------------------------------------------------------------------
# second forms


def suite_forms(pair: DeformationPair, n: int, seed: int) -> Report:
    rep, u, v = _new("forms", pair, n, seed)
    t = DarbouxTriplet.from_pair(pair, u, v, 4)
    p = IsotropicImmersionPoint.from_triplet(t)
    forms = forms_from_octonions(p, check=False)
    rep.add("forms:direction", forms.direction_residual, DIRECTION_TOL)
    for name, a, b in (("plus.minus", forms.plus, forms.minus),
                       ("plus.mixed", forms.plus, forms.mixed),
                       ("minus.mixed", forms.minus, forms.mixed)):
        rep.add("apolarity:" + name, apolarity_check(a, b, forms.scale), APOLARITY_TOL)
    table = rank_table(p, strict=False)
    rep.add("table:violations", float(len(table["violations"])), 0.0)
    rep.add("table:rank_match", float(np.mean(~table["rank_match"])), 0.0)
    rep.info["rank_triples"] = sorted({tuple(int(x) for x in tr) for tr in table["triples"]})
    if table["kernel_angles"].size:
        rep.add("table:kernel_matching", table["kernel_angles"], KERNEL_TOL)
    else:
        rep.skip("table:kernel_matching", "no point where a form and the opposite Gauss map "
                                          "both have rank 1")
    if pair.expected_class == GENERIC:
        try:
            pc = proportionality_check(t)
        except DarbouxError as exc:
            rep.skip("proportionality", f"{type(exc).__name__}: {exc}")
        else:
            for name in ("plus_vs_f", "minus_vs_g", "mixed_vs_h"):
                rep.add("proportionality:" + name, pc[name], PROPORTIONALITY_TOL)
            for name in ("ratio_plus", "ratio_minus", "ratio_mixed"):
                rep.add("proportionality:" + name + " = 1", np.abs(pc[name] - 1.0),
                        PROPORTIONALITY_TOL)
    else:
        rep.skip("proportionality", "the classical forms need generic points "
                                    f"(pair class {pair.expected_class})")
    return rep


# ---------------------------------------------------------------------------
# incidence


def suite_incidence(pair: DeformationPair, n: int, seed: int) -> Report:
    rep, u, v = _new("incidence", pair, n, seed)
    isc = integral_surface_check(pair, samples=(u, v))
    for name, c in isc["checks"].items():
        rep.add(name, c["max_residual"], c["tolerance"])
    rng = np.random.default_rng(seed)
    p = IsotropicImmersionPoint.from_pair(pair, u, v, 2)
    triples = IncidenceTriple.from_point(p)
    offsets = rng.standard_normal(triples.x2.shape)
    off = IncidenceTriple(triples.x0, triples.x1,
                          triples.x2 + 1e-3 * offsets / np.linalg.norm(offsets, axis=-1, keepdims=True))
    rep.info["perturbed_membership_min"] = float(np.min(membership(off)))
    idx = rng.choice(u.size, size=min(PROBE_POINTS, u.size), replace=False)
    probes = []
    for i in sorted(int(k) for k in idx):
        base = IncidenceTriple(triples.x0[i], triples.x1[i], triples.x2[i])
        point = (float(u[i]), float(v[i]))
        try:
            dims = fibre_dimensions(base)
            probe = nonintegrability_probe(base)
        except DarbouxError as exc:
            rep.skip(f"probe at {point}", f"{type(exc).__name__}: {exc}")
            continue
        rep.add(f"fibres:dim(xi0+xi1+xi2) at {point}", abs(dims["xi0+xi1+xi2"] - 6), 0.0)
        probes.append({"point": list(point), "ranks": probe["ranks"],
                       "expected": probe["expected"], "pass": probe["pass"]})
    # the bracket probe is heuristic: reported, never counted as a failed check
    rep.info["probe"] = {"heuristic": True, "results": probes}
    return rep


RUNNERS = {
    "algebra": suite_algebra,
    "triplets": suite_triplets,
    "gauss": suite_gauss,
    "forms": suite_forms,
    "incidence": suite_incidence,
}


def run_suite(suite: str, pair: DeformationPair, n: int, seed: int) -> list[Report]:
    names = SUITES if suite == "all" else (suite,)
    return [RUNNERS[s](pair, n, seed) for s in names]
