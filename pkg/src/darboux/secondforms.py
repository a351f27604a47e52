"""The three second fundamental forms of a totally isotropic immersion.

With jets of the representatives psi, psi_+ and psi_-, the Zorn products of
first derivatives are proportional to known directions:

    -(X psi_+)(Y psi) = Pi_-(X, Y) conj(psi_-)
    -(X psi)(Y psi_-) = Pi_+(X, Y) conj(psi_+)
    -(X psi_-)(Y psi_+) = Pi(X, Y) conj(psi)

The scalar is extracted by a least-squares projection on the direction, and
the off-direction part is reported as a consistency residual.  All forms are
2x2 symmetric matrices in the coordinate frame (d1, d2) and are compared
projectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DirectionMismatch, PolarUndefined, TableViolation
from .gauss import IsotropicImmersionPoint, projective_differential
from .jets import Jet2
from .linalg import null_space
from .octonion import ZornMatrix, zorn_conj, zorn_mul
from .triplets import DarbouxTriplet, polar_masked

DIRECTION_TOL = 1e-6
RANK_RTOL = 1e-6
FORM_ATOL = 1e-9  # a form below this fraction of its natural scale counts as zero
MARGIN = 10.0

TABLE = ((2, 2, 2), (2, 1, 1), (1, 2, 1), (1, 1, 0), (0, None, 0), (None, 0, 0))


@dataclass
class QuadraticForm2:
    """Batch of symmetric 2x2 matrices (..., 2, 2), defined up to a nonzero scale."""

    matrix: np.ndarray
    projective: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        self.matrix = 0.5 * (m + np.swapaxes(m, -1, -2))

    @property
    def flat(self) -> np.ndarray:
        """(a11, a12, a22)."""
        m = self.matrix
        return np.stack([m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]], axis=-1)

    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.flat, axis=-1)

    def det(self) -> np.ndarray:
        return np.linalg.det(self.matrix)

    def __getitem__(self, idx) -> "QuadraticForm2":
        return QuadraticForm2(self.matrix[idx])


def _partials(z: Jet2):
    return [z.partial(1, 0), z.partial(0, 1)]


def _extract(a_list, b_list, target, floor):
    """Least-squares scalar c with -(a_i b_j) = c target, and the relative residual.

    Derivative norms are floored at ``floor`` (the size of d psi) so that a
    vanishing factor yields a zero residual rather than a ratio of roundoff.
    """
    tgt = zorn_conj(ZornMatrix(target)).coords
    tt = np.sum(tgt * tgt, -1)
    coef = np.zeros(target.shape[:-1] + (2, 2))
    resid = np.zeros(target.shape[:-1])
    for i in range(2):
        for j in range(2):
            prod = -zorn_mul(ZornMatrix(a_list[i]), ZornMatrix(b_list[j])).coords
            c = np.sum(prod * tgt, -1) / tt
            coef[..., i, j] = c
            off = np.linalg.norm(prod - c[..., None] * tgt, axis=-1)
            den = (np.maximum(np.linalg.norm(a_list[i], axis=-1), floor)
                   * np.maximum(np.linalg.norm(b_list[j], axis=-1), floor))
            resid = np.maximum(resid, np.where(den > 0, off / np.where(den > 0, den, 1.0), 0.0))
    asym = np.abs(coef[..., 0, 1] - coef[..., 1, 0])
    return coef, resid, asym


@dataclass
class SecondForms:
    plus: QuadraticForm2
    minus: QuadraticForm2
    mixed: QuadraticForm2
    direction_residual: np.ndarray
    asymmetry: np.ndarray
    scale: np.ndarray


def forms_from_octonions(p: IsotropicImmersionPoint, tol: float = DIRECTION_TOL,
                         check: bool = True) -> SecondForms:
    """(Pi_+, Pi_-, Pi) from first derivatives of psi, psi_+, psi_-."""
    psi, pp, pm = (z.coords for z in (p.psi, p.psi_plus, p.psi_minus))
    dpsi, dpp, dpm = _partials(psi), _partials(pp), _partials(pm)
    floor = np.max(np.linalg.norm(projective_differential(psi), axis=-1), axis=-1)
    c_minus, r1, s1 = _extract(dpp, dpsi, pm.value, floor)
    c_plus, r2, s2 = _extract(dpsi, dpm, pp.value, floor)
    c_mixed, r3, s3 = _extract(dpm, dpp, psi.value, floor)
    resid = np.maximum(np.maximum(r1, r2), r3)
    if check and np.any(resid > tol):
        raise DirectionMismatch(
            f"a product of derivatives is not along its expected direction "
            f"(residual {np.max(resid):.2e} > {tol:.1e})")
    norms = [np.linalg.norm(np.stack(d, -2), axis=(-2, -1)) for d in (dpsi, dpp, dpm)]
    scale = np.maximum(np.maximum(norms[0] * norms[1], norms[0] * norms[2]), norms[1] * norms[2])
    asym = np.maximum(np.maximum(s1, s2), s3) / np.where(scale > 0, scale, 1.0)
    return SecondForms(QuadraticForm2(c_plus), QuadraticForm2(c_minus), QuadraticForm2(c_mixed),
                       resid, asym, scale)


def apolarity_residual(a, b, floor=0.0) -> np.ndarray:
    """(a11 b22 + a22 b11 - 2 a12 b12) / (|a| |b|), 0 if a form vanishes.

    A form whose norm is at most ``floor`` counts as zero, so the identity
    is vacuous there and the residual is 0 rather than a ratio of roundoff.
    """
    a = a.matrix if isinstance(a, QuadraticForm2) else np.asarray(a, dtype=float)
    b = b.matrix if isinstance(b, QuadraticForm2) else np.asarray(b, dtype=float)
    num = a[..., 0, 0] * b[..., 1, 1] + a[..., 1, 1] * b[..., 0, 0] - 2 * a[..., 0, 1] * b[..., 0, 1]
    na = np.linalg.norm(QuadraticForm2(a).flat, axis=-1)
    nb = np.linalg.norm(QuadraticForm2(b).flat, axis=-1)
    live = (na > floor) & (nb > floor)
    den = np.where(live, na * nb, 1.0)
    return np.where(live, np.abs(num) / den, 0.0)


def apolarity_check(plus, minus, scale=None) -> np.ndarray:
    """Apolarity residual; ``scale`` (e.g. :attr:`SecondForms.scale`) sets the zero floor."""
    floor = 0.0 if scale is None else FORM_ATOL * np.asarray(scale)
    return apolarity_residual(plus, minus, floor)


# ---------------------------------------------------------------------------
# classical forms


def _hess_dot(n: np.ndarray, m: Jet2) -> np.ndarray:
    """(n . d_i d_j m) as (..., 2, 2)."""
    hess = m.hessian()  # (..., 3, 2, 2)
    return np.einsum("...k,...kij->...ij", n, hess)


def g_polar(t: DarbouxTriplet) -> np.ndarray:
    """g* = -h / (h . g), which satisfies g* . g = -1 and g* . dg = 0."""
    h, g = t.h.value, t.g.value
    hg = np.sum(h * g, -1)
    if np.any(np.abs(hg) <= 1e-12 * np.linalg.norm(h, axis=-1) * np.linalg.norm(g, axis=-1)):
        raise PolarUndefined("h . g vanishes; g* is undefined")
    return -h / hg[..., None]


def _polar_value(m: Jet2, what: str) -> np.ndarray:
    p, ok = polar_masked(m)
    if not np.all(ok):
        raise PolarUndefined(f"{what}* is undefined (tangent plane through the origin)")
    return p.value


def classical_forms(t: DarbouxTriplet):
    """(Pi_f, Pi_g, Pi_h) = (f* . D^2 f, g* . D^2 g, h* . D^2 h)."""
    if t.order < 2:
        raise ValueError("classical second forms need a triplet of order >= 2")
    fs = _polar_value(t.f, "f")
    hs = _polar_value(t.h, "h")
    gs = g_polar(t)
    return (QuadraticForm2(_hess_dot(fs, t.f)), QuadraticForm2(_hess_dot(gs, t.g)),
            QuadraticForm2(_hess_dot(hs, t.h)))


def proportionality(a: QuadraticForm2, b: QuadraticForm2) -> np.ndarray:
    """|a x b| / (|a| |b|) on flattened forms; 0 when a form vanishes."""
    fa, fb = a.flat, b.flat
    den = np.linalg.norm(fa, axis=-1) * np.linalg.norm(fb, axis=-1)
    num = np.linalg.norm(np.cross(fa, fb), axis=-1)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def ratio(a: QuadraticForm2, b: QuadraticForm2) -> np.ndarray:
    """Least-squares scalar r with a = r b."""
    fa, fb = a.flat, b.flat
    return np.sum(fa * fb, -1) / np.sum(fb * fb, -1)


def unnormalized_gauge_point(t: DarbouxTriplet) -> IsotropicImmersionPoint:
    """psi = (1, f; g, f.g), psi_+ = (h.g~, -h; -g~, 1), psi_- = (1, h~; f*, h~.f*).

    These unnormalised representatives carry the proportionality factors
    between the octonionic and the classical second forms.
    """
    p = IsotropicImmersionPoint.from_triplet(t, normalized=False)
    nu_f = p.psi_minus.coords[..., 0]  # the a-entry is nu . f
    _polar_value(t.f, "f")
    return IsotropicImmersionPoint(t, p.psi, p.psi_plus,
                                   ZornMatrix(p.psi_minus.coords / nu_f[..., None]), False)


def proportionality_check(t: DarbouxTriplet) -> dict:
    """Pi_+ ~ Pi_f, Pi_- ~ Pi_g, Pi ~ Pi_h, with the predicted factors.

    In the unnormalised gauge Pi_+ = e Pi_f, Pi_- = e (h.g)(f.h*) Pi_g and
    Pi = e (h.f*) Pi_h for one global sign e.
    """
    k = t.order
    q = unnormalized_gauge_point(t.truncate(k))
    forms = forms_from_octonions(q)
    pf, pg, ph = classical_forms(t)
    fs = _polar_value(t.f, "f")
    hs = _polar_value(t.h, "h")
    f, g, h = t.f.value, t.g.value, t.h.value
    fac_g = np.sum(h * g, -1) * np.sum(f * hs, -1)
    fac_h = np.sum(h * fs, -1)
    out = {
        "plus_vs_f": proportionality(forms.plus, pf),
        "minus_vs_g": proportionality(forms.minus, pg),
        "mixed_vs_h": proportionality(forms.mixed, ph),
        "ratio_plus": ratio(forms.plus, pf),
        "ratio_minus": ratio(forms.minus, pg) / fac_g,
        "ratio_mixed": ratio(forms.mixed, ph) / fac_h,
        "vanishing_f": pf.norm() <= FORM_ATOL * np.max(np.abs(t.f.hessian()), axis=(-3, -2, -1)),
    }
    return out


# ---------------------------------------------------------------------------
# ranks


def form_rank(form: QuadraticForm2, scale: np.ndarray, rtol: float = RANK_RTOL,
              atol: float = FORM_ATOL):
    """Ranks of 2x2 forms and a marginal flag (singular value within MARGIN of a cutoff)."""
    s = np.linalg.svd(form.matrix, compute_uv=False)  # (..., 2)
    zero = atol * scale
    r = np.where(s[..., 0] <= zero, 0, np.where(s[..., 1] <= rtol * s[..., 0], 1, 2))
    marginal = ((s[..., 0] > zero / MARGIN) & (s[..., 0] <= zero * MARGIN)) | (
        (s[..., 0] > zero) & (s[..., 1] > rtol * s[..., 0] / MARGIN)
        & (s[..., 1] <= rtol * s[..., 0] * MARGIN))
    return r, marginal


def in_table(triple) -> bool:
    return any(all(t is None or t == x for t, x in zip(row, triple)) for row in TABLE)


def _kernel_1d(m: np.ndarray) -> np.ndarray:
    return null_space(m, rtol=1e-6)


def _angle2(a: np.ndarray, b: np.ndarray) -> float:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(np.arcsin(min(1.0, abs(a[0] * b[1] - a[1] * b[0]))))


def rank_table(p: IsotropicImmersionPoint, strict: bool = True) -> dict:
    """Rank triples (rk Pi_+, rk Pi_-, rk Pi), table membership, kernel matching.

    Kernels of Pi_+ and Pi_- are compared with the kernels of d phi_- and
    d phi_+ wherever the rank is 1 and not marginal.
    """
    from .gauss import gauss_ranks

    forms = forms_from_octonions(p)
    ranks, marg = [], np.zeros(forms.scale.shape, dtype=bool)
    for form in (forms.plus, forms.minus, forms.mixed):
        r, m = form_rank(form, forms.scale)
        ranks.append(r)
        marg |= m
    triples = np.stack(ranks, -1).reshape(-1, 3)
    marg = marg.ravel()
    ok = np.array([in_table(tuple(int(x) for x in tr)) for tr in triples])
    violations = [i for i in range(len(ok)) if not ok[i] and not marg[i]]
    if strict and violations:
        raise TableViolation(f"rank triples not in the table at {violations}: "
                             f"{[tuple(triples[i]) for i in violations[:5]]}")
    rp, rm = gauss_ranks(p)
    dphi = {"plus": projective_differential(p.psi_plus.coords).reshape(-1, 2, 8),
            "minus": projective_differential(p.psi_minus.coords).reshape(-1, 2, 8)}
    kernel_angles = []
    for form, other, rk_other in ((forms.plus, "minus", rm), (forms.minus, "plus", rp)):
        fm = form.matrix.reshape(-1, 2, 2)
        rko = np.ravel(rk_other)
        rkf = triples[:, 0] if other == "minus" else triples[:, 1]
        for i in range(fm.shape[0]):
            if marg[i] or rkf[i] != 1 or rko[i] != 1:
                continue
            k1 = _kernel_1d(fm[i])
            k2 = _kernel_1d(dphi[other][i].T)
            if k1.shape[0] == 1 and k2.shape[0] == 1:
                kernel_angles.append(_angle2(k1[0], k2[0]))
    # rank agreement between Pi_+- and d phi_-+ (the same statement at rank level)
    rank_match = (triples[:, 0] == np.ravel(rm)) & (triples[:, 1] == np.ravel(rp))
    return {
        "triples": triples,
        "marginal": marg,
        "in_table": ok,
        "violations": violations,
        "kernel_angles": np.array(kernel_angles),
        "rank_match": rank_match,
        "forms": forms,
    }


def trichotomy(forms: SecondForms) -> np.ndarray:
    """Where all three forms are nondegenerate: True iff exactly one is definite."""
    dets = np.stack([forms.plus.det(), forms.minus.det(), forms.mixed.det()], -1)
    return np.sum(dets > 0, axis=-1) == 1
