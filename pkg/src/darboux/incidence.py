"""The incidence variety of the three trial quadrics and its rank-6 distribution.

A point of the incidence variety is a triple of null octonions
(x0, x1, x2) with x0 x1 = x1 x2 = x2 x0 = 0.  Slot 0 holds a point of
the quadric Q, slot 1 a point of Q_- and slot 2 a point of Q_+, so a totally
isotropic immersion psi gives the triple (psi, psi_-, psi_+).

The distribution xi is the sum of the three "vertical" subbundles xi_i: a
vector of xi_i moves x_i alone while keeping both products involving x_i
zero.  Concretely xi_i at x is

    { w in R^8 : w x_{i+1} = 0,  x_{i-1} w = 0,  <c_i, w> = 0 }

placed in block i of R^24, where <c_i, x_i> = 1 is the gauge that picks
one representative per projective point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartDegenerate
from .gauss import IsotropicImmersionPoint, projective_differential
from .linalg import null_space
from .octonion import (LEFT, RIGHT, ZornMatrix, annihilator_basis, mul_operator,
                       random_isotropic, structure_constants, zorn_mul, zorn_norm)
from .surfaces import DeformationPair

MEMBERSHIP_TOL = 1e-8
TANGENCY_TOL = 1e-7
SVD_RTOL = 1e-6
PROBE_STEP = 1e-4
NEWTON_TOL = 1e-13
NEWTON_MAXITER = 30
DIM_VARIETY = 11
DIM_FIBRE = 2
EXPECTED_RANKS = (6, 9, 11)

SLOT_NAMES = ("Q", "Q_minus", "Q_plus")


@dataclass
class IncidenceTriple:
    """Representatives (x0, x1, x2) in Zorn coordinates, shape (..., 8) each."""

    x0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        self.x0, self.x1, self.x2 = (np.asarray(x, dtype=float) for x in (self.x0, self.x1, self.x2))

    @property
    def slots(self) -> tuple:
        return (self.x0, self.x1, self.x2)

    def rotated(self, k: int = 1) -> "IncidenceTriple":
        """Cyclic relabelling x_i -> x_{i+k} (the defining relations are invariant)."""
        s = self.slots
        return IncidenceTriple(*(s[(i + k) % 3] for i in range(3)))

    def flat(self) -> np.ndarray:
        return np.concatenate(self.slots, axis=-1)

    @classmethod
    def from_flat(cls, x: np.ndarray) -> "IncidenceTriple":
        x = np.asarray(x, dtype=float)
        return cls(x[..., 0:8], x[..., 8:16], x[..., 16:24])

    @classmethod
    def from_point(cls, p: IsotropicImmersionPoint) -> "IncidenceTriple":
        """Phi = (psi, psi_-, psi_+) at the basepoints of ``p``."""
        return cls(p.psi.coords.value, p.psi_minus.coords.value, p.psi_plus.coords.value)


def _pair_residual(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    num = np.linalg.norm(zorn_mul(ZornMatrix(a), ZornMatrix(b)).coords, axis=-1)
    den = np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)
    return num / den


def membership_residuals(t: IncidenceTriple) -> dict:
    """|x_i x_{i+1}| / (|x_i| |x_{i+1}|) for i = 0, 1, 2."""
    s = t.slots
    for i, x in enumerate(s):
        if not np.all(np.linalg.norm(x, axis=-1) > 0):
            raise ValueError(f"representative x{i} vanishes")
    return {f"x{i}*x{(i + 1) % 3}": _pair_residual(s[i], s[(i + 1) % 3]) for i in range(3)}


def membership(t: IncidenceTriple) -> np.ndarray:
    """Largest of the three scale-normalised products (per point)."""
    res = membership_residuals(t)
    return np.max(np.stack(list(res.values()), axis=0), axis=0)


def random_incidence_triple(rng: np.random.Generator) -> IncidenceTriple:
    """x0 null, x1 in ker L_{x0}, x2 in ker L_{x1} and ker R_{x0}, all random."""
    x0 = random_isotropic(rng).coords
    x1 = rng.standard_normal(4) @ annihilator_basis(ZornMatrix(x0), LEFT)
    m = np.vstack([mul_operator(ZornMatrix(x1), LEFT), mul_operator(ZornMatrix(x0), RIGHT)])
    ker = null_space(m, rtol=1e-9)
    x2 = rng.standard_normal(ker.shape[0]) @ ker
    return IncidenceTriple(x0, x1, x2)


# ---------------------------------------------------------------------------
# integral surfaces


def _floored_product(a, b, floor_a, floor_b):
    num = np.linalg.norm(zorn_mul(ZornMatrix(a), ZornMatrix(b)).coords, axis=-1)
    den = (np.maximum(np.linalg.norm(a, axis=-1), floor_a)
           * np.maximum(np.linalg.norm(b, axis=-1), floor_b))
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def tangency_residuals(p: IsotropicImmersionPoint) -> dict:
    """d x_i . x_{i+1} and x_i . d x_{i+1} for Phi = (psi, psi_-, psi_+).

    Both products vanishing separately is what it means for dPhi to lie
    in xi (rather than merely in the tangent space of the variety).  A
    derivative factor is measured against the size of d psi, so a constant
    slot gives 0.
    """
    jets_ = (p.psi.coords, p.psi_minus.coords, p.psi_plus.coords)
    scale = np.max(np.linalg.norm(projective_differential(jets_[0]), axis=-1), axis=-1)
    out = {}
    for i in range(3):
        j = (i + 1) % 3
        a, b = jets_[i], jets_[j]
        r_left = r_right = 0.0
        for da, db in ((a.partial(1, 0), b.partial(1, 0)), (a.partial(0, 1), b.partial(0, 1))):
            r_left = np.maximum(r_left, _floored_product(da, b.value, scale, 0.0))
            r_right = np.maximum(r_right, _floored_product(a.value, db, 0.0, scale))
        out[f"dx{i}*x{j}"] = r_left
        out[f"x{i}*dx{j}"] = r_right
    return out


def integral_surface_check(pair: DeformationPair, n: int = 10, samples=None,
                           order: int = 2) -> dict:
    """Membership and tangency to xi of Phi = (phi, phi_-, phi_+) on a grid."""
    u, v = samples if samples is not None else pair.grid(n)
    p = IsotropicImmersionPoint.from_pair(pair, u, v, order)
    mem = membership_residuals(IncidenceTriple.from_point(p))
    tan = tangency_residuals(p)
    checks = {}
    for name, r in mem.items():
        checks["membership:" + name] = (float(np.max(r)), MEMBERSHIP_TOL)
    for name, r in tan.items():
        checks["tangency:" + name] = (float(np.max(r)), TANGENCY_TOL)
    report = {
        "pair": pair.name,
        "points": int(np.size(u)),
        "checks": {k: {"max_residual": m, "tolerance": tol, "pass": m <= tol}
                   for k, (m, tol) in checks.items()},
    }
    report["membership"] = max(c[0] for k, c in checks.items() if k.startswith("membership"))
    report["tangency"] = max(c[0] for k, c in checks.items() if k.startswith("tangency"))
    report["pass"] = all(c["pass"] for c in report["checks"].values())
    return report


# ---------------------------------------------------------------------------
# local geometry of the variety


def _left(z: np.ndarray) -> np.ndarray:
    """Matrix of w -> z w."""
    return np.einsum("i,ijk->kj", z, structure_constants())


def _right(z: np.ndarray) -> np.ndarray:
    """Matrix of w -> w z."""
    return np.einsum("j,ijk->ki", z, structure_constants())


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("i,j,ijk->k", a, b, structure_constants())


class IncidenceChart:
    """Local chart of the incidence variety around a base triple.

    Points are gauge-fixed representatives x in R^24 with <c_i, x_i> = 1.
    The chart coordinate of x is s = T^t (x - x_base), where the rows of
    T^t span the tangent space at the base; its inverse is computed by
    Newton iteration on the defining equations.
    """

    def __init__(self, base: IncidenceTriple):
        slots = []
        for i, x in enumerate(base.slots):
            nx = np.linalg.norm(x)
            if nx == 0.0:
                raise ChartDegenerate(f"x{i} vanishes")
            slots.append(x / nx)
        self.gauge = [x.copy() for x in slots]  # <c_i, x_i> = 1 for unit x_i
        self.base = np.concatenate(slots)
        if np.max(membership(IncidenceTriple.from_flat(self.base))) > MEMBERSHIP_TOL:
            raise ChartDegenerate("the base triple is not incident")
        jac = self.jacobian(self.base)
        tangent = null_space(jac, rtol=SVD_RTOL)
        if tangent.shape[0] != DIM_VARIETY:
            raise ChartDegenerate(
                f"tangent space has dimension {tangent.shape[0]}, expected {DIM_VARIETY}")
        self.tangent = tangent  # (11, 24), orthonormal rows
        self.frame0 = [self.fibre_basis(self.base, i) for i in range(3)]

    # defining equations ----------------------------------------------------

    def equations(self, x: np.ndarray) -> np.ndarray:
        t = IncidenceTriple.from_flat(x)
        s = t.slots
        prods = [_product(s[i], s[(i + 1) % 3]) for i in range(3)]
        norms = [np.atleast_1d(zorn_norm(ZornMatrix(z))) for z in s]
        gauge = [np.atleast_1d(np.dot(c, z) - 1.0) for c, z in zip(self.gauge, s)]
        return np.concatenate(prods + norms + gauge)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        s = IncidenceTriple.from_flat(x).slots
        jac = np.zeros((30, 24))
        for i in range(3):
            j = (i + 1) % 3
            rows = slice(8 * i, 8 * i + 8)
            # d(x_i x_j) = dx_i x_j + x_i dx_j
            jac[rows, 8 * i:8 * i + 8] = _right(s[j])
            jac[rows, 8 * j:8 * j + 8] = _left(s[i])
            jac[24 + i, 8 * i:8 * i + 8] = self._norm_gradient(s[i])
            jac[27 + i, 8 * i:8 * i + 8] = self.gauge[i]
        return jac

    @staticmethod
    def _norm_gradient(z: np.ndarray) -> np.ndarray:
        # N(a, x, y, b) = a b - x.y
        g = np.empty(8)
        g[0] = z[7]
        g[7] = z[0]
        g[1:4] = -z[4:7]
        g[4:7] = -z[1:4]
        return g

    def project(self, s: np.ndarray) -> np.ndarray:
        """The point of the variety with chart coordinate ``s``."""
        x = self.base + np.asarray(s, dtype=float) @ self.tangent
        for _ in range(NEWTON_MAXITER):
            res = np.concatenate([self.equations(x), self.tangent @ (x - self.base) - s])
            if np.max(np.abs(res)) <= NEWTON_TOL:
                return x
            jac = np.vstack([self.jacobian(x), self.tangent])
            dx = np.linalg.lstsq(jac, -res, rcond=None)[0]
            x = x + dx
        res = np.concatenate([self.equations(x), self.tangent @ (x - self.base) - s])
        if np.max(np.abs(res)) > 1e3 * NEWTON_TOL:
            raise ChartDegenerate("chart inverse did not converge")
        return x

    # distribution --------------------------------------------------------

    def fibre_basis(self, x: np.ndarray, i: int) -> np.ndarray:
        """Orthonormal rows of xi_i at x (in R^8, block i)."""
        s = IncidenceTriple.from_flat(x).slots
        nxt, prv = s[(i + 1) % 3], s[(i - 1) % 3]
        m = np.vstack([_right(nxt), _left(prv), self.gauge[i][None, :]])
        ker = null_space(m, rtol=SVD_RTOL)
        if ker.shape[0] != DIM_FIBRE:
            raise ChartDegenerate(f"xi_{i} has dimension {ker.shape[0]}, expected {DIM_FIBRE}")
        return ker

    def xi_fields(self, s: np.ndarray) -> np.ndarray:
        """The six frame fields of xi at chart coordinate s, in chart coordinates (6, 11).

        Field (i, k) is the orthogonal projection of the k-th base vector of
        xi_i onto xi_i at the current point, so the frame is smooth.
        """
        x = self.project(s)
        out = []
        for i in range(3):
            ker = self.fibre_basis(x, i)
            for b in self.frame0[i]:
                w = np.zeros(24)
                w[8 * i:8 * i + 8] = ker.T @ (ker @ b)
                out.append(self.tangent @ w)
        return np.array(out)

    def field(self, s: np.ndarray, word: tuple) -> np.ndarray:
        """Vector field named by ``word``: (a,) is frame field a, (a, b, ...) is [X_a, field(b, ...)]."""
        if len(word) == 1:
            return self.xi_fields(s)[word[0]]
        h = PROBE_STEP
        xa = self.xi_fields(s)[word[0]]
        rest = word[1:]
        y = self.field(s, rest)
        dy_xa = (self.field(s + h * xa, rest) - self.field(s - h * xa, rest)) / (2 * h)
        dxa_y = (self.xi_fields(s + h * y)[word[0]] - self.xi_fields(s - h * y)[word[0]]) / (2 * h)
        return dy_xa - dxa_y


def _numerical_rank(vectors: np.ndarray, rtol: float = SVD_RTOL):
    s = np.linalg.svd(np.atleast_2d(vectors), compute_uv=False)
    tol = rtol * s[0] if s.size and s[0] > 0 else 0.0
    return int(np.sum(s > tol)), s


def fibre_dimensions(base: IncidenceTriple) -> dict:
    """dim xi_i, dim(xi_i + xi_j) and dim(xi_0 + xi_1 + xi_2) at the base."""
    chart = IncidenceChart(base)
    blocks = []
    for i in range(3):
        ker = chart.frame0[i]
        w = np.zeros((ker.shape[0], 24))
        w[:, 8 * i:8 * i + 8] = ker
        blocks.append(w)
    out = {f"xi{i}": _numerical_rank(blocks[i])[0] for i in range(3)}
    for i in range(3):
        j = (i + 1) % 3
        key = f"xi{min(i, j)}+xi{max(i, j)}"
        out[key] = _numerical_rank(np.vstack([blocks[i], blocks[j]]))[0]
    out["xi0+xi1+xi2"] = _numerical_rank(np.vstack(blocks))[0]
    return out


def nonintegrability_probe(base: IncidenceTriple) -> dict:
    """Ranks of xi, xi + [xi, xi] and xi + [xi, xi] + [xi, [xi, xi]] at ``base``.

    Heuristic: brackets of a numerically constructed frame are estimated by
    central finite differences in a Newton-based chart.  The expected
    ranks are (6, 9, 11).
    """
    chart = IncidenceChart(base)
    zero = np.zeros(DIM_VARIETY)
    level0 = chart.xi_fields(zero)
    pairs = [(a, b) for a in range(6) for b in range(a + 1, 6)]
    level1 = np.array([chart.field(zero, (a, b)) for a, b in pairs])
    r0, s0 = _numerical_rank(level0)
    r1, s1 = _numerical_rank(np.vstack([level0, level1]))
    r1_only, _ = _numerical_rank(level1)
    # only brackets that survive at level one can contribute new directions
    norms = np.linalg.norm(level1, axis=-1)
    live = [ab for ab, nrm in zip(pairs, norms) if nrm > SVD_RTOL * max(np.max(norms), 1.0)]
    level2 = np.array([chart.field(zero, (c, a, b)) for c in range(6) for a, b in live])
    if not live:
        level2 = np.zeros((0, DIM_VARIETY))
    r2, s2 = _numerical_rank(np.vstack([level0, level1, level2]))
    ranks = (r0, r1, r2)
    return {
        "heuristic": True,
        "method": "finite-difference brackets of a projected frame, step %.0e" % PROBE_STEP,
        "ranks": list(ranks),
        "expected": list(EXPECTED_RANKS),
        "bracket_only_rank": r1_only,
        "nonzero_brackets": len(live),
        "singular_values": {"xi": s0.tolist(), "xi+[xi,xi]": s1.tolist(),
                            "xi+[xi,xi]+[xi,[xi,xi]]": s2.tolist()},
        "dimensions": fibre_dimensions(base),
        "pass": ranks == EXPECTED_RANKS,
    }
