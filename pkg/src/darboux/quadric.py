"""The (4,4) quadric Q, its two families of maximal isotropic subspaces, and triality.

Vectors of R^{4,4} are coordinate arrays ``(x1, x2, x3, s, y1, y2, y3, t)``
with q = x.y + s t.  ``rho`` identifies them with Zorn matrices,
``(x, s, y, t) -> [[s, x], [y, -t]]``, an anti-isometry (N o rho = -q).

Family tags follow the chart convention: ``plus`` is the component holding
the graphs ``(a, b)_+`` and pulls back ``ker L_Z`` for null Z, ``minus``
holds ``(a, b)_-`` and pulls back ``ker R_Z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import AmbiguousFamily, DegenerateInput, SameFamily, SingularMatrix
from .linalg import line_angle, null_space, orthonormal_rows, rank, subspace_angle
from .octonion import LEFT, RIGHT, ZornMatrix, mul_operator, zorn_mul

PLUS = "plus"
MINUS = "minus"

EPS_ISO = 1e-9
PROJ_TOL = 1e-8  # rad, projective / subspace equality
FAMILY_RTOL = 1e-9

# polarisation of q: B(v, w) = v^T POLAR w
POLAR = np.zeros((8, 8))
POLAR[0:3, 4:7] = POLAR[4:7, 0:3] = 0.5 * np.eye(3)
POLAR[3, 7] = POLAR[7, 3] = 0.5


def vec44(x, s, y, t):
    return jets.concat([x, jets.stack([s]), y, jets.stack([t])])


def split44(v):
    return v[..., 0:3], v[..., 3], v[..., 4:7], v[..., 7]


def q(v):
    x, s, y, t = split44(v)
    return jets.dot(x, y) + s * t


def polar_form(v, w):
    x, s, y, t = split44(v)
    x2, s2, y2, t2 = split44(w)
    return 0.5 * (jets.dot(x, y2) + jets.dot(x2, y) + s * t2 + s2 * t)


def gram(basis: np.ndarray) -> np.ndarray:
    basis = np.atleast_2d(basis)
    return basis @ POLAR @ basis.T


# rho -----------------------------------------------------------------------


def rho(v) -> ZornMatrix:
    x, s, y, t = split44(v)
    return ZornMatrix(jets.concat([jets.stack([s]), x, y, jets.stack([-t])]))


def rho_inv(z: ZornMatrix):
    c = z.coords
    return vec44(c[..., 1:4], c[..., 0], c[..., 4:7], -c[..., 7])


def rho_coords(v: np.ndarray) -> np.ndarray:
    return rho(np.asarray(v, dtype=float)).coords


def rho_inv_coords(c: np.ndarray) -> np.ndarray:
    return rho_inv(ZornMatrix(np.asarray(c, dtype=float)))


# points and subspaces ----------------------------------------------------------


@dataclass(frozen=True)
class ProjPoint:
    """A point of P(R^{4,4}) given by a nonzero representative."""

    rep: np.ndarray

    def __post_init__(self):
        rep = np.asarray(self.rep, dtype=float)
        if rep.shape != (8,) or not np.any(rep):
            raise ValueError("a projective point needs a nonzero 8-vector")
        object.__setattr__(self, "rep", rep)

    def on_quadric(self, tol: float = EPS_ISO) -> bool:
        return abs(float(q(self.rep))) <= tol * float(self.rep @ self.rep)

    def angle(self, other: "ProjPoint") -> float:
        return line_angle(self.rep, other.rep)

    def same_as(self, other: "ProjPoint", tol: float = PROJ_TOL) -> bool:
        return self.angle(other) <= tol


class IsoSubspace:
    """Totally isotropic subspace of R^{4,4} with an orthonormal basis (rows)."""

    def __init__(self, basis, family: str | None = None, check: bool = True):
        basis = orthonormal_rows(np.asarray(basis, dtype=float))
        if not 1 <= basis.shape[0] <= 4:
            raise DegenerateInput(f"isotropic subspaces have dim 1..4, got {basis.shape[0]}")
        if check and self.isotropy_residual_of(basis) > EPS_ISO:
            raise DegenerateInput(
                f"subspace is not totally isotropic "
                f"(Gram residual {self.isotropy_residual_of(basis):.2e})"
            )
        if basis.shape[0] < 4:
            family = None
        self.basis = basis
        self.family = family

    @staticmethod
    def isotropy_residual_of(basis) -> float:
        return float(np.max(np.abs(gram(basis))))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def isotropy_residual(self) -> float:
        return self.isotropy_residual_of(self.basis)

    def contains(self, v, tol: float = PROJ_TOL) -> bool:
        return self.distance(v) <= tol

    def distance(self, v) -> float:
        """Sine of the angle between the line R v and the subspace."""
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        r = v - (self.basis @ v) @ self.basis
        return float(np.linalg.norm(r) / n)

    def containment_residual(self, other: "IsoSubspace") -> float:
        return max(self.distance(w) for w in other.basis)

    def angle(self, other: "IsoSubspace") -> float:
        if self.dim != other.dim:
            raise ValueError("principal angles need equal dimensions")
        return subspace_angle(self.basis, other.basis)

    def same_as(self, other: "IsoSubspace", tol: float = PROJ_TOL) -> bool:
        return self.dim == other.dim and self.angle(other) <= tol

    def intersection_dim(self, other: "IsoSubspace", tol: float = 1e-7) -> int:
        s = np.linalg.svd(self.basis @ other.basis.T, compute_uv=False)
        return int(np.sum(s >= 1.0 - tol))

    def zorn_basis(self) -> np.ndarray:
        return rho_coords(self.basis)

    def __repr__(self):
        fam = f", family={self.family}" if self.family else ""
        return f"IsoSubspace(dim={self.dim}{fam})"


# charts -----------------------------------------------------------------------


def chart_plus(a, b) -> IsoSubspace:
    """Graph ``(a, b)_+`` of (x, s) -> (y, t) = (a^x + b s, -b.x)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    rows = []
    for k in range(4):
        xs = np.eye(4)[k]
        x, s = xs[:3], xs[3]
        rows.append(vec44(x, s, np.cross(a, x) + b * s, -np.dot(b, x)))
    return IsoSubspace(np.array(rows), family=PLUS)


def chart_minus(a, b) -> IsoSubspace:
    """Twisted graph ``(a, b)_-`` of (x, t) -> (y, s) = (a^x + b t, -b.x)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    rows = []
    for k in range(4):
        xt = np.eye(4)[k]
        x, t = xt[:3], xt[3]
        rows.append(vec44(x, -np.dot(b, x), np.cross(a, x) + b * t, t))
    return IsoSubspace(np.array(rows), family=MINUS)


# families / triality ---------------------------------------------------------------


def _family_system(basis: np.ndarray, side: str) -> np.ndarray:
    # plus: Z w = 0 for all w, i.e. R_w Z = 0; minus: w Z = 0, i.e. L_w Z = 0
    ws = ZornMatrix(rho_coords(basis))
    op_side = RIGHT if side == LEFT else LEFT
    return mul_operator(ws, op_side).reshape(-1, 8)


def family_solutions(basis: np.ndarray, rtol: float = FAMILY_RTOL):
    """Kernels of the two linear systems {Z : Z w = 0} and {Z : w Z = 0}."""
    plus = null_space(_family_system(basis, LEFT), rtol=rtol)
    minus = null_space(_family_system(basis, RIGHT), rtol=rtol)
    return plus, minus


def classify_family(w: IsoSubspace, rtol: float = FAMILY_RTOL):
    """Return ``(family, Z)`` with rho(W) = ker L_Z (plus) or ker R_Z (minus).

    Z is the triality label theta_+^{-1} / theta_-^{-1} of W, unit norm,
    first nonzero coordinate positive.
    """
    if w.dim != 4:
        raise AmbiguousFamily(f"family is defined for dim-4 subspaces, got dim {w.dim}")
    plus, minus = family_solutions(w.basis, rtol)
    if plus.shape[0] == 1 and minus.shape[0] == 0:
        return PLUS, ZornMatrix(_gauge(plus[0]))
    if minus.shape[0] == 1 and plus.shape[0] == 0:
        return MINUS, ZornMatrix(_gauge(minus[0]))
    raise AmbiguousFamily(
        f"plus system kernel dim {plus.shape[0]}, minus system kernel dim {minus.shape[0]}"
    )


def _gauge(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v if v[k] > 0 else -v


def tagged(w: IsoSubspace) -> IsoSubspace:
    """Copy of a dim-4 subspace with its family recomputed from scratch."""
    fam, _ = classify_family(w)
    return IsoSubspace(w.basis, family=fam, check=False)


def extend_isotropic3(v: IsoSubspace):
    """The two maximal isotropic subspaces containing a 3-dim isotropic V.

    V^perp / V carries a form of signature (1, 1); its two null lines give
    the two extensions, which are then tagged by :func:`classify_family`.
    """
    if v.dim != 3:
        raise DegenerateInput(f"extend_isotropic3 needs dim 3, got {v.dim}")
    if v.isotropy_residual > EPS_ISO:
        raise DegenerateInput("V is not totally isotropic")
    perp = null_space(v.basis @ POLAR, rtol=1e-10)
    if perp.shape[0] != 5:
        raise DegenerateInput(f"V^perp has dim {perp.shape[0]}, expected 5")
    comp = perp - (perp @ v.basis.T) @ v.basis
    comp = orthonormal_rows(comp, rtol=1e-6)
    if comp.shape[0] != 2:
        raise DegenerateInput("V^perp / V is not 2-dimensional")
    g = gram(comp)
    lam, vecs = np.linalg.eigh(g)
    if not lam[0] < 0 < lam[1]:
        raise DegenerateInput(f"V^perp / V is not of signature (1,1): eigenvalues {lam}")
    out = {}
    for sign in (1.0, -1.0):
        coef = np.sqrt(lam[1]) * vecs[:, 0] + sign * np.sqrt(-lam[0]) * vecs[:, 1]
        n = coef @ comp
        w = IsoSubspace(np.vstack([v.basis, n]), check=True)
        fam, _ = classify_family(w)
        if fam in out:
            raise AmbiguousFamily("both extensions fell into the same family")
        out[fam] = IsoSubspace(w.basis, family=fam, check=False)
    return out[PLUS], out[MINUS]


def subspace_from_vectors(vectors, rtol: float = 1e-9) -> IsoSubspace:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    basis = orthonormal_rows(vectors, rtol=rtol)
    w = IsoSubspace(basis)
    if w.dim == 4:
        w = tagged(w)
    return w


# incidence ---------------------------------------------------------------------------


def incident(p, w, tol: float = 1e-7, method: str = "intersection") -> bool:
    """Incidence between a point of Q and a maximal subspace, or between families.

    For two subspaces ``method`` selects the test: ``"intersection"``
    (dim W+ n W- = 3) or ``"zorn"`` (Z- Z+ = 0).
    """
    if isinstance(p, IsoSubspace) and not isinstance(w, IsoSubspace):
        p, w = w, p
    if isinstance(p, ProjPoint):
        if not isinstance(w, IsoSubspace):
            raise TypeError("a point is incident only to a subspace")
        return w.contains(p.rep, tol)
    if not isinstance(p, IsoSubspace) or not isinstance(w, IsoSubspace):
        raise TypeError("incident() takes ProjPoint / IsoSubspace arguments")
    fp, zp = classify_family(p)
    fw, zw = classify_family(w)
    if fp == fw:
        raise SameFamily(f"both subspaces belong to the {fp} family")
    if method == "intersection":
        return p.intersection_dim(w, tol) == 3
    if method == "zorn":
        zplus, zminus = (zp, zw) if fp == PLUS else (zw, zp)
        prod = zorn_mul(zminus, zplus).coords
        return float(np.linalg.norm(prod)) <= tol
    raise ValueError(f"unknown incidence method {method!r}")


# involutions -----------------------------------------------------------------------------


def _as_rep(p):
    return p.rep if isinstance(p, ProjPoint) else p


def _wrap(p, rep):
    return ProjPoint(rep) if isinstance(p, ProjPoint) else rep


def involution_sigma(p):
    """(x : s : y : t) -> (y : s : x : t); induced by Zorn transposition."""
    x, s, y, t = split44(_as_rep(p))
    return _wrap(p, vec44(y, s, x, t))


def involution_c(p):
    """(x : s : y : t) -> (x : t : y : s); induced by Zorn conjugation."""
    x, s, y, t = split44(_as_rep(p))
    return _wrap(p, vec44(x, t, y, s))


def involution_sc(p):
    """(x : s : y : t) -> (y : t : x : s), the central involution."""
    x, s, y, t = split44(_as_rep(p))
    return _wrap(p, vec44(y, t, x, s))


# Darboux-Sauer -----------------------------------------------------------------------------


def pgl4_action(a: np.ndarray, v):
    """Apply diag(A, A^{-T}): (x, s) -> A (x, s), (y, t) -> A^{-T} (y, t)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (4, 4):
        raise ValueError("A must be 4x4")
    if abs(np.linalg.det(a)) < 1e-12 * max(1.0, np.linalg.norm(a)) ** 4:
        raise SingularMatrix("A is singular")
    ait = np.linalg.inv(a).T
    v = _as_rep(v)
    xs = jets.concat([v[..., 0:4]])
    yt = jets.concat([v[..., 4:8]])
    if isinstance(v, jets.Jet2):
        nxs = jets.stack([sum(xs[..., j] * a[i, j] for j in range(4)) for i in range(4)])
        nyt = jets.stack([sum(yt[..., j] * ait[i, j] for j in range(4)) for i in range(4)])
    else:
        nxs = xs @ a.T
        nyt = yt @ ait.T
    return jets.concat([nxs, nyt])


def pgl4_subspace(a: np.ndarray, w: IsoSubspace) -> IsoSubspace:
    return subspace_from_vectors(pgl4_action(a, w.basis))


def random_isotropic44(rng: np.random.Generator, size=None) -> np.ndarray:
    from .octonion import random_isotropic

    return rho_inv_coords(random_isotropic(rng, size).coords)


def random_iso3(rng: np.random.Generator) -> IsoSubspace:
    """A random 3-dim totally isotropic subspace (inside a random plus chart)."""
    w = chart_plus(rng.standard_normal(3), rng.standard_normal(3))
    coef = rng.standard_normal((3, 4))
    return IsoSubspace(coef @ w.basis)


__all__ = [
    "PLUS", "MINUS", "POLAR", "ProjPoint", "IsoSubspace", "vec44", "split44", "q",
    "polar_form", "gram", "rho", "rho_inv", "rho_coords", "rho_inv_coords",
    "chart_plus", "chart_minus", "classify_family", "family_solutions", "tagged",
    "extend_isotropic3", "subspace_from_vectors", "incident", "involution_sigma",
    "involution_c", "involution_sc", "pgl4_action", "pgl4_subspace",
    "random_isotropic44", "random_iso3", "rank",
]
