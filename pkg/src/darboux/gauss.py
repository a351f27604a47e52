"""Totally isotropic immersions psi = (f, 1, g, -f.g) and their Gauss maps.

Two routes produce the Gauss maps phi_+ / phi_- at a point:

* the *generic* route extends the tangent 3-space span(psi, d1 psi, d2 psi)
  to the two maximal isotropic subspaces containing it;
* the *closed-form* route reads them off the triplet:
  phi_+ = (h, g~)_+ and phi_- = (h~, f*)_-, with a polar-free
  description of phi_- where the tangent plane of f contains the origin.

The closed-form route also gives jet-valued Zorn representatives

    psi_+ = (h.g~, -h; -g~, 1),
    psi_- = (nu.f, (nu.f) h + nu ^ g~; -nu, -h.nu),   nu = d1f ^ d2f,

the second one being (nu.f) (1, h~; f*, h~.f*) written without division.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DarbouxError, DegenerateInput, DegenerateSecondary, PolarUndefined
from .jets import Jet2, cross, dot
from .linalg import line_angle, null_space, orthonormal_rows, rank
from .octonion import ZornMatrix, zorn_mul
from .quadric import (MINUS, PLUS, IsoSubspace, chart_minus, chart_plus, classify_family,
                      extend_isotropic3, involution_c, involution_sc, involution_sigma, rho,
                      rho_inv, vec44)
from .surfaces import (DEVELOPABLE, GENERIC, PLANAR, RULED, TRIVIAL, DeformationPair)
from .triplets import DarbouxTriplet, apply_word, polar_masked, transform_A, transform_D

POLAR_TOL = 1e-9
RANK_RTOL = 1e-7
RANK_ATOL = 1e-9  # relative to the size of d psi of the base immersion


# ---------------------------------------------------------------------------
# lifts and representatives


def lift_psi(src, u=None, v=None, order: int = jets.DEFAULT_ORDER) -> Jet2:
    """psi = (f, 1, g, -f.g) as a jet-valued vector of R^{4,4}.

    ``src`` is a :class:`DarbouxTriplet` or a :class:`DeformationPair`
    (then ``u``, ``v`` and ``order`` select the expansion).
    """
    if isinstance(src, DeformationPair):
        f, g = src.f.eval(u, v, order), src.g.eval(u, v, order)
    else:
        f, g = src.f, src.g
    one = 0.0 * f[..., 0] + 1.0
    return vec44(f, one, g, -dot(f, g))


def psi_plus_rep(t: DarbouxTriplet) -> ZornMatrix:
    """(h.g~, -h; -g~, 1), whose left annihilator is phi_+ = (h, g~)_+."""
    gt = t.g - cross(t.h, t.f)
    one = 0.0 * t.f[..., 0] + 1.0
    return ZornMatrix.from_parts(dot(t.h, gt), -t.h, -gt, one)


def psi_minus_rep(t: DarbouxTriplet) -> ZornMatrix:
    """Division-free representative of phi_- (one jet order lower)."""
    nu = cross(t.f.diff(0), t.f.diff(1))
    f, g, h = (m.truncate(nu.order) for m in (t.f, t.g, t.h))
    gt = g - cross(h, f)
    nf = dot(nu, f)
    return ZornMatrix.from_parts(nf, h * nf[..., None] + cross(nu, gt), -nu, -dot(h, nu))


def normalize(z):
    """Unit Euclidean norm, first (basepoint) coordinate above 1e-9 made positive.

    Works on jets (the scale factor is itself a jet) and on arrays.
    """
    c = z.coords if isinstance(z, ZornMatrix) else z
    val = jets.value(c)
    n = np.linalg.norm(val, axis=-1, keepdims=True)
    first = np.argmax(np.abs(val) > 1e-9 * n, axis=-1)
    sign = np.sign(np.take_along_axis(val, first[..., None], -1))[..., 0]
    sign = np.where(sign == 0, 1.0, sign)
    if isinstance(c, Jet2):
        out = c * (1.0 / (jets.sqrt(dot(c, c)) * sign))[..., None]
    else:
        out = c / n * sign[..., None]
    return ZornMatrix(out) if isinstance(z, ZornMatrix) else out


@dataclass
class IsotropicImmersionPoint:
    """psi, psi_+ and psi_- (as normalised Zorn jets) over a batch of points."""

    triplet: DarbouxTriplet
    psi: ZornMatrix
    psi_plus: ZornMatrix
    psi_minus: ZornMatrix
    normalized: bool = True
    _extra: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_triplet(cls, t: DarbouxTriplet, normalized: bool = True):
        psi = rho(lift_psi(t))
        pp = psi_plus_rep(t)
        pm = psi_minus_rep(t)
        k = pm.coords.order
        psi, pp = ZornMatrix(psi.coords.truncate(k)), ZornMatrix(pp.coords.truncate(k))
        if normalized:
            psi, pp, pm = normalize(psi), normalize(pp), normalize(pm)
        return cls(t, psi, pp, pm, normalized)

    @classmethod
    def from_pair(cls, pair: DeformationPair, u, v, order: int = 3, normalized: bool = True):
        return cls.from_triplet(DarbouxTriplet.from_pair(pair, u, v, order + 1), normalized)

    @property
    def order(self) -> int:
        return self.psi.coords.order

    @property
    def shape(self):
        return self.psi.shape

    def vec(self, which: str = "psi") -> Jet2:
        """Representative as a jet-valued vector of R^{4,4} (through rho^{-1})."""
        return rho_inv(getattr(self, which))

    def tangent_basis(self, which: str = "psi") -> np.ndarray:
        """(..., 3, 8) vectors (x, d1 x, d2 x) in R^{4,4} coordinates."""
        x = self.vec(which)
        return np.stack([x.value, x.partial(1, 0), x.partial(0, 1)], axis=-2)

    def V(self, index) -> IsoSubspace:
        """span(psi, d1 psi, d2 psi) at one point."""
        return IsoSubspace(self.tangent_basis()[index], check=True)

    def incidence_residuals(self) -> dict:
        """|psi_+ psi|, |psi psi_-|, |psi_- psi_+| (unit representatives)."""
        p, pp, pm = (z.value().coords for z in (self.psi, self.psi_plus, self.psi_minus))
        prods = {
            "psi_plus*psi": zorn_mul(ZornMatrix(pp), ZornMatrix(p)),
            "psi*psi_minus": zorn_mul(ZornMatrix(p), ZornMatrix(pm)),
            "psi_minus*psi_plus": zorn_mul(ZornMatrix(pm), ZornMatrix(pp)),
        }
        return {k: np.linalg.norm(z.coords, axis=-1) for k, z in prods.items()}


# ---------------------------------------------------------------------------
# the two routes


@dataclass
class GaussMaps:
    plus: list
    minus: list
    z_plus: np.ndarray  # triality labels, (n, 8)
    z_minus: np.ndarray

    def __len__(self):
        return len(self.plus)


def _flat(a):
    return np.reshape(a, (-1,) + np.shape(a)[-1:])


def gauss_maps_generic(p: IsotropicImmersionPoint, which: str = "psi") -> GaussMaps:
    """Extend span(x, d1 x, d2 x) (x = psi, psi_+ or psi_-) to W_+ and W_-."""
    basis = p.tangent_basis(which).reshape(-1, 3, 8)
    plus, minus, zp, zm = [], [], [], []
    for b in basis:
        if rank(b, rtol=1e-7) != 3:
            raise DegenerateInput("the tangent space is not 3-dimensional")
        wp, wm = extend_isotropic3(IsoSubspace(b))
        plus.append(wp)
        minus.append(wm)
        zp.append(classify_family(wp)[1].coords)
        zm.append(classify_family(wm)[1].coords)
    return GaussMaps(plus, minus, np.array(zp), np.array(zm))


def minus_subspace_general(nu, f, h, gt) -> IsoSubspace:
    """V_- from y = h^x + g~ s + l nu, t = -g~.x - l nu.f, nu.(x - s f) = 0.

    Needs no polar, so it also applies where nu.f = 0.
    """
    nu, f, h, gt = (np.asarray(a, dtype=float) for a in (nu, f, h, gt))
    params = np.eye(5)  # (x, s, l)
    vecs = []
    for x1, x2, x3, s, lam in params:
        x = np.array([x1, x2, x3])
        vecs.append(vec44(x, s, np.cross(h, x) + gt * s + lam * nu, -gt @ x - lam * (nu @ f)))
    vecs = np.array(vecs)
    constraint = np.concatenate([nu, [-(nu @ f), 0.0]])
    coef = null_space(constraint[None, :])
    return IsoSubspace(coef @ vecs, family=MINUS)


def gauss_maps_closed_form(t: DarbouxTriplet, fallback: bool = True) -> GaussMaps:
    """phi_+ = (h, g~)_+ and phi_- = (h~, f*)_-, with the polar-free fallback."""
    fs, ok = polar_masked(t.f, POLAR_TOL)
    if not fallback and not np.all(ok):
        raise PolarUndefined("nu_f . f vanishes; f* is undefined")
    f, g, h = (_flat(m.value) for m in (t.f, t.g, t.h))
    gt = g - np.cross(h, f)
    nu = _flat(np.cross(t.f.partial(1, 0), t.f.partial(0, 1)))
    fs = _flat(fs.value)
    ok = np.ravel(ok)
    plus, minus, zp, zm = [], [], [], []
    for k in range(f.shape[0]):
        wp = chart_plus(h[k], gt[k])
        if ok[k]:
            ht = h[k] - np.cross(fs[k], gt[k])
            wm = chart_minus(ht, fs[k])
        else:
            wm = minus_subspace_general(nu[k], f[k], h[k], gt[k])
        plus.append(wp)
        minus.append(wm)
        zp.append(classify_family(wp)[1].coords)
        zm.append(classify_family(wm)[1].coords)
    return GaussMaps(plus, minus, np.array(zp), np.array(zm))


def cross_oracle(t: DarbouxTriplet) -> dict:
    """Principal angles between the generic and closed-form Gauss maps."""
    p = IsotropicImmersionPoint.from_triplet(t)
    gen = gauss_maps_generic(p)
    cf = gauss_maps_closed_form(t)
    ang_p = np.array([a.angle(b) for a, b in zip(gen.plus, cf.plus)])
    ang_m = np.array([a.angle(b) for a, b in zip(gen.minus, cf.minus)])
    fam_ok = all(w.family == PLUS for w in gen.plus) and all(w.family == MINUS for w in gen.minus)
    # the jet representatives must label the same subspaces
    rep_p = np.array([line_angle(z, w) for z, w in
                      zip(gen.z_plus, _flat(p.psi_plus.value().coords))])
    rep_m = np.array([line_angle(z, w) for z, w in
                      zip(gen.z_minus, _flat(p.psi_minus.value().coords))])
    return {"angle_plus": ang_p, "angle_minus": ang_m, "label_plus": rep_p,
            "label_minus": rep_m, "families_ok": fam_ok}


# ---------------------------------------------------------------------------
# differential triality


def _prod_norm(a: np.ndarray, b: np.ndarray, floor_a=0.0, floor_b=0.0) -> np.ndarray:
    """|a b| / (max(|a|, floor_a) max(|b|, floor_b))."""
    num = np.linalg.norm(zorn_mul(ZornMatrix(a), ZornMatrix(b)).coords, axis=-1)
    den = (np.maximum(np.linalg.norm(a, axis=-1), floor_a)
           * np.maximum(np.linalg.norm(b, axis=-1), floor_b))
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def triality_residuals(p: IsotropicImmersionPoint) -> dict:
    """psi_- d psi_+, d psi_- psi_+, psi_+ d psi, d psi psi_- (scale-normalised).

    Representatives are unit vectors; a derivative factor is measured against
    the size of d psi so that a constant Gauss map (d psi_+ = 0) gives 0
    instead of a ratio of rounding errors.
    """
    psi, pp, pm = (z.coords for z in (p.psi, p.psi_plus, p.psi_minus))
    scale = np.max(np.linalg.norm(projective_differential(psi), axis=-1), axis=-1)
    d = {name: [z.partial(1, 0), z.partial(0, 1)] for name, z in
         (("psi", psi), ("plus", pp), ("minus", pm))}
    v = {"psi": psi.value, "plus": pp.value, "minus": pm.value}
    out = {}
    for key, left, right in (("psi_minus*dpsi_plus", "minus", "dplus"),
                             ("dpsi_minus*psi_plus", "dminus", "plus"),
                             ("psi_plus*dpsi", "plus", "dpsi"),
                             ("dpsi*psi_minus", "dpsi", "minus")):
        res = 0.0
        for i in range(2):
            a = d[left[1:]][i] if left.startswith("d") else v[left]
            b = d[right[1:]][i] if right.startswith("d") else v[right]
            fa = scale if left.startswith("d") else 0.0
            fb = scale if right.startswith("d") else 0.0
            res = np.maximum(res, _prod_norm(a, b, fa, fb))
        out[key] = res
    out.update(p.incidence_residuals())
    return out


def verify_differential_triality(pair: DeformationPair, u, v, order: int = 3) -> dict:
    p = IsotropicImmersionPoint.from_pair(pair, u, v, order)
    res = triality_residuals(p)
    return {k: float(np.max(r)) for k, r in res.items()}


def _is_immersion(basis3: np.ndarray, rtol: float = RANK_RTOL) -> bool:
    return rank(basis3, rtol=rtol) == 3


def verify_triality_cycle(pair_or_point, u=None, v=None, order: int = 3,
                          strict: bool = False) -> dict:
    """Gauss maps of phi_+ and phi_- read as maps into Q through theta_+ / theta_-.

    Checks (phi_+)_+ = phi_-, (phi_+)_- = phi, (phi_-)_- = phi_+, (phi_-)_+ = phi
    projectively on the triality labels, and records points where phi_+ or
    phi_- is not an immersion.  ``strict`` turns any such point into
    :class:`DegenerateSecondary`.
    """
    if isinstance(pair_or_point, IsotropicImmersionPoint):
        p = pair_or_point
    else:
        p = IsotropicImmersionPoint.from_pair(pair_or_point, u, v, order)
    labels = {"psi": _flat(p.psi.value().coords), "plus": _flat(p.psi_plus.value().coords),
              "minus": _flat(p.psi_minus.value().coords)}
    expect = {"plus": ("minus", "psi"), "minus": ("psi", "plus"), "psi": ("plus", "minus")}
    bases = {w: p.tangent_basis({"psi": "psi", "plus": "psi_plus",
                                 "minus": "psi_minus"}[w]).reshape(-1, 3, 8)
             for w in ("psi", "plus", "minus")}
    n = bases["psi"].shape[0]
    res = {k: np.full(n, np.nan) for k in ("plus_plus", "plus_minus", "minus_plus", "minus_minus",
                                           "psi_plus", "psi_minus")}
    excluded = []
    for k in range(n):
        for src in ("plus", "minus", "psi"):
            b = bases[src][k]
            if not _is_immersion(b):
                excluded.append((k, f"phi_{src} is not an immersion"))
                continue
            wp, wm = extend_isotropic3(IsoSubspace(b))
            zp, zm = classify_family(wp)[1].coords, classify_family(wm)[1].coords
            tp, tm = expect[src]
            res[f"{src}_plus"][k] = line_angle(zp, labels[tp][k])
            res[f"{src}_minus"][k] = line_angle(zm, labels[tm][k])
    if strict and excluded:
        raise DegenerateSecondary(f"secondary Gauss maps undefined at {excluded[:5]}"
                                  f"{' ...' if len(excluded) > 5 else ''}")
    return {"residuals": res, "excluded": excluded}


def triality_orbit(p: IsotropicImmersionPoint, steps: int = 3) -> np.ndarray:
    """Follow x -> x_+ three times from psi; returns the angle back to psi."""
    labels = [_flat(p.psi.value().coords), _flat(p.psi_plus.value().coords),
              _flat(p.psi_minus.value().coords)]
    names = ["psi", "psi_plus", "psi_minus"]
    n = labels[0].shape[0]
    cur = np.zeros(n, dtype=int)
    out = np.zeros(n)
    for k in range(n):
        idx = 0
        for _ in range(steps):
            b = p.tangent_basis(names[idx]).reshape(-1, 3, 8)[k]
            wp, _ = extend_isotropic3(IsoSubspace(b))
            z = classify_family(wp)[1].coords
            # identify which of the three labels z is
            angles = [line_angle(z, lab[k]) for lab in labels]
            idx = int(np.argmin(angles))
            out[k] = max(out[k], min(angles))
        cur[k] = idx
    if np.any(cur != 0):
        raise DegenerateSecondary("the x -> x_+ cycle did not return to psi")
    return out


# ---------------------------------------------------------------------------
# Darboux transforms at the level of phi


def lift_point(t: DarbouxTriplet) -> np.ndarray:
    return _flat(lift_psi(t).value)


def darboux_at_phi_level(t: DarbouxTriplet) -> dict:
    """theta_+(phi_+) = c(phi_A(T)), sigma(phi_T) = phi_D(T), (DA)^3 = sigma c.

    Checks whose Darboux steps are undefined at the points are reported in
    ``skipped`` with the reason instead of failing the whole report.
    """
    p = IsotropicImmersionPoint.from_triplet(t)
    gen = gauss_maps_generic(p)
    lhs = np.array([rho_inv(ZornMatrix(z)) for z in gen.z_plus])
    rhs = involution_c(lift_point(transform_A(t)))
    out = {"theta_plus_vs_c_A": np.array([line_angle(a, b) for a, b in zip(lhs, rhs)])}
    skipped = {}
    try:
        out["sigma_vs_D"] = np.array([line_angle(a, b) for a, b in
                                      zip(involution_sigma(lift_point(t)),
                                          lift_point(transform_D(t)))])
    except DarbouxError as exc:
        skipped["sigma_vs_D"] = str(exc)
    base = involution_sc(lift_point(t))
    for w in ("DADADA", "ADADAD"):
        try:
            other = lift_point(apply_word(t, w))
        except DarbouxError as exc:
            skipped["central_" + w] = str(exc)
            continue
        out["central_" + w] = np.array([line_angle(a, b) for a, b in zip(base, other)])
    out["skipped"] = skipped
    return out


# ---------------------------------------------------------------------------
# ranks and degeneracies


def projective_differential(x: Jet2) -> np.ndarray:
    """(..., 2, 8) derivatives of the unit representative, tangent to the sphere."""
    val = x.value
    out = []
    for i in ((1, 0), (0, 1)):
        d = x.partial(*i)
        out.append(d - np.sum(d * val, -1, keepdims=True) * val)
    return np.stack(out, axis=-2)


def gauss_ranks(p: IsotropicImmersionPoint, rtol: float = RANK_RTOL,
                atol: float = RANK_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Numerical ranks of d phi_+ and d phi_- (projective, scale free)."""
    dpsi = projective_differential(p.psi.coords)
    scale = np.max(np.linalg.norm(dpsi, axis=-1), axis=-1)
    ranks = []
    for z in (p.psi_plus, p.psi_minus):
        d = projective_differential(z.coords)
        r = np.array([rank(m, rtol=rtol, atol=atol * s) for m, s in
                      zip(d.reshape(-1, 2, 8), scale.ravel())]).reshape(d.shape[:-2])
        ranks.append(r)
    return ranks[0], ranks[1]


def rank_label(rp: int, rm: int) -> str:
    if rp == 0:
        return TRIVIAL
    if rm == 0:
        return PLANAR
    if rm == 1:
        return DEVELOPABLE
    if rp == 1:
        return RULED
    return GENERIC


def classify_rank(pair: DeformationPair, u, v, order: int = 3) -> dict:
    p = IsotropicImmersionPoint.from_pair(pair, u, v, order)
    rp, rm = gauss_ranks(p)
    labels = [rank_label(a, b) for a, b in zip(np.ravel(rp), np.ravel(rm))]
    return {"rank_plus": rp, "rank_minus": rm, "labels": labels,
            "label": max(set(labels), key=labels.count)}


def ruling_test(t: DarbouxTriplet) -> dict:
    """Lines of a rank-1 rotation field: straight, and tangent to im dh.

    With w the direction of im dh, X = (d2h.w, -d1h.w) spans ker dh.  Along X
    the curve gamma has gamma' = df(X) and gamma'' = D^2f(X, X) + df(dX.X).
    Returns the sine of the angle between gamma' and im dh, and between
    gamma' and gamma'' (zero for a straight line).
    """
    if t.order < 2:
        raise DegenerateInput("the ruling test needs a triplet of order >= 2")
    dh = [t.h.diff(0), t.h.diff(1)]
    d0 = np.stack([dh[0].value, dh[1].value], axis=-2)
    k = np.argmax(np.linalg.norm(d0, axis=-1), axis=-1)
    w = np.take_along_axis(d0, k[..., None, None], -2)[..., 0, :]
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    x1, x2 = dot(dh[1], w), -dot(dh[0], w)
    df = [t.f.diff(0), t.f.diff(1)]
    gp = df[0] * x1[..., None] + df[1] * x2[..., None]  # jet of df(X) along S
    # derivative of gamma' along X
    gpp = gp.diff(0).value * x1.value[..., None] + gp.diff(1).value * x2.value[..., None]
    g1 = gp.value
    n1 = np.linalg.norm(g1, axis=-1)
    n2 = np.linalg.norm(gpp, axis=-1)
    straight = np.where(n2 > 1e-12 * n1 ** 2,
                        np.linalg.norm(np.cross(g1, gpp), axis=-1) / (n1 * np.maximum(n2, 1e-300)),
                        0.0)
    along = np.linalg.norm(np.cross(g1, w), axis=-1) / n1
    return {"straightness": straight, "tangent_to_dh": along, "kernel": np.stack(
        [x1.value, x2.value], -1)}
