"""Darboux triplets (f, g, h) with dg = h ^ df, the involutions A and D, and orbits.

A triplet is materialised as three jets at a batch of sample points.  The
involution ``A`` costs no jet order; ``D`` differentiates once, so a word
with ``n`` letters ``D`` needs ``n`` spare orders.

Words are strings over ``{"A", "D"}`` read left to right: ``"AD"`` applies
``A`` first and then ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import (BothRoutesUnavailable, InconsistentRoutes, InconsistentSystem, NotImmersion,
                     TangentPlaneThroughOrigin, WordError)
from .jets import Jet2, cross, dot
from .surfaces import DeformationPair, SurfaceMap

IMMERSION_TOL = 1e-9
DERIVATIVE_FLOOR = 1e-10  # partials below this fraction of |m| count as zero
SYSTEM_TOL = 1e-8
POLAR_TOL = 1e-9
ROUTE_TOL = 1e-8
COMPARE_SCORE = 0.05  # both routes well conditioned: their agreement is asserted

ORBIT_ORDER = 7  # (D A)^6 has six D steps; order 7 keeps values and first derivatives

# label -> word (applied left to right) for the twelve first components
TWELVE = {
    "f": "",
    "g": "D",
    "h": "A",
    "g~": "AD",
    "h*": "DA",
    "f*": "ADA",
    "f~": "DAD",
    "h~": "ADAD",
    "g*": "DADA",
    "g~*": "ADADA",
    "h~*": "DADAD",
    "f~*": "DADADA",
}
CLASSES = {
    "f": ("f", "f*", "f~", "f~*"),
    "g": ("g", "g*", "g~", "g~*"),
    "h": ("h", "h*", "h~", "h~*"),
}


# ---------------------------------------------------------------------------
# small jet linear algebra


def _safe(den, ok):
    """Replace the basepoint of ``den`` by 1 where ``ok`` is False (avoids 1/0)."""
    if isinstance(den, Jet2):
        c = den.coeffs.copy()
        c[~ok] = 0.0
        c[~ok, 0] = 1.0
        return Jet2(den.order, c)
    return np.where(ok, den, 1.0)


def _solve3(m, r, ok):
    """Solve m h = r for a batch of 3x3 jet systems by the adjugate formula.

    ``m`` is a nested list m[i][j] of scalar jets, ``r`` a jet 3-vector.
    Returns the solution and ``ok`` restricted to points with a usable
    determinant.
    """
    c0, c1, c2 = (jets.stack([m[i][j] for i in range(3)]) for j in range(3))
    det = dot(c0, cross(c1, c2))
    # rows of the inverse are the cross products of the columns
    adj = [cross(c1, c2), cross(c2, c0), cross(c0, c1)]
    ok = ok & (np.abs(det.value) > 10 * jets.EPS_JET)
    det = _safe(det, ok)
    return jets.stack([dot(adj[i], r) for i in range(3)]) / det[..., None], ok


def _norm(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1)


def _bad_indices(ok: np.ndarray) -> list:
    return [tuple(int(i) for i in ix) if len(ix) != 1 else int(ix[0])
            for ix in zip(*np.nonzero(~np.asarray(ok)))]


# ---------------------------------------------------------------------------
# the rotation field


def _flat_partials(m: Jet2) -> np.ndarray:
    """True where both first partials are at rounding level relative to |m|."""
    floor = DERIVATIVE_FLOOR * _norm(m.value)
    return (_norm(m.partial(1, 0)) <= floor) | (_norm(m.partial(0, 1)) <= floor)


def immersion_measure(m: Jet2) -> np.ndarray:
    """|d1m ^ d2m| / (|d1m| |d2m|), set to 0 where a partial is numerically zero."""
    a1, a2 = m.partial(1, 0), m.partial(0, 1)
    d = _norm(a1) * _norm(a2)
    out = np.where(d > 0, _norm(np.cross(a1, a2)) / np.where(d > 0, d, 1.0), 0.0)
    return np.where(_flat_partials(m), 0.0, out)


def immersion_mask(m: Jet2, tol: float = IMMERSION_TOL) -> np.ndarray:
    return immersion_measure(m) > tol


def compute_h_masked(f: Jet2, g: Jet2, tol: float = SYSTEM_TOL):
    """Least-squares solution of d_i g = h ^ d_i f in jets, with a validity mask.

    Returns ``(h, immersed, consistent)``: the jet h (one order below the
    inputs), the points where f is an immersion, and the points where the
    6x3 system is consistent within ``tol``.
    """
    a = [f.diff(0), f.diff(1)]
    b = [g.diff(0), g.diff(1)]
    immersed = immersion_mask(f)
    # normal equations: sum_i (|a_i|^2 I - a_i a_i^T) h = sum_i a_i ^ b_i
    # scaled by 1 / (|d1f|^2 + |d2f|^2) so the determinant is scale free
    inv_s = 1.0 / np.maximum(sum(np.sum(ai.value ** 2, -1) for ai in a), 1e-300)
    m = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            s = 0.0
            for ai in a:
                term = -ai[..., i] * ai[..., j]
                if i == j:
                    term = term + dot(ai, ai)
                s = term + s
            m[i][j] = s * inv_s
    rhs = (cross(a[0], b[0]) + cross(a[1], b[1])) * inv_s[..., None]
    h, immersed = _solve3(m, rhs, immersed)
    res = np.zeros(h.shape[:-1])
    scale = np.zeros(h.shape[:-1])
    for ai, bi in zip(a, b):
        r = bi - cross(h, ai)
        res = np.maximum(res, np.max(np.abs(r.coeffs), axis=(-2, -1)))
        scale = np.maximum(scale, np.max(np.abs(bi.coeffs), axis=(-2, -1))
                           + np.max(np.abs(h.coeffs), axis=(-2, -1))
                           * np.max(np.abs(ai.coeffs), axis=(-2, -1)))
    consistent = res <= tol * np.where(scale > 0, scale, 1.0)
    return h, immersed, consistent


def compute_h(f, g, tol: float = SYSTEM_TOL):
    """The unique h with dg = h ^ df.

    Accepts jets (returns a jet one order lower) or two :class:`SurfaceMap`
    objects (returns a :class:`RotationField` map).
    """
    if isinstance(f, SurfaceMap):
        return RotationField(f, g)
    h, immersed, consistent = compute_h_masked(f, g, tol)
    if not np.all(immersed):
        raise NotImmersion(f"d1f ^ d2f vanishes at points {_bad_indices(immersed)}")
    if not np.all(consistent):
        raise InconsistentSystem(
            f"dg = h ^ df has no solution (df.dg != 0) at points {_bad_indices(consistent)}")
    return h


class RotationField(SurfaceMap):
    """h as a map: evaluating at order K evaluates (f, g) at order K + 1."""

    def __init__(self, f: SurfaceMap, g: SurfaceMap):
        super().__init__(None, f.domain, "h")
        self.f_map, self.g_map = f, g

    def eval(self, u1, u2, order: int = jets.DEFAULT_ORDER) -> Jet2:
        return compute_h(self.f_map.eval(u1, u2, order + 1), self.g_map.eval(u1, u2, order + 1))

    def __call__(self, u, v):
        return self.eval(u, v, 0).value


# ---------------------------------------------------------------------------
# polars


def polar_masked(m: Jet2, tol: float = POLAR_TOL):
    """m* = -nu / (nu . m) with nu = d1m ^ d2m; returns (m*, valid mask)."""
    nu = cross(m.diff(0), m.diff(1))
    nv = _norm(nu.value)
    nu = nu * (1.0 / np.where(nv > 0, nv, 1.0))[..., None]  # unit at the basepoint
    mm = m.truncate(nu.order)
    num = dot(nu, mm)
    ok = (immersion_mask(m) & (np.abs(num.value) > tol * _norm(mm.value))
          & (np.abs(num.value) > 10 * jets.EPS_JET))
    return -nu / _safe(num, ok)[..., None], ok


def polar(m, tol: float = POLAR_TOL):
    """Polar surface with respect to the quadric x . x = -1.

    Satisfies m* . m = -1 and m* . dm = 0.  Raises
    :class:`TangentPlaneThroughOrigin` where nu_m . m vanishes.
    """
    if isinstance(m, SurfaceMap):
        return PolarMap(m, tol)
    p, ok = polar_masked(m, tol)
    if not np.all(ok):
        raise TangentPlaneThroughOrigin(
            f"tangent plane passes through the origin at points {_bad_indices(ok)}")
    return p


class PolarMap(SurfaceMap):
    def __init__(self, m: SurfaceMap, tol: float = POLAR_TOL):
        super().__init__(None, m.domain, (m.name or "m") + "*")
        self.base, self.tol = m, tol

    def eval(self, u1, u2, order: int = jets.DEFAULT_ORDER) -> Jet2:
        return polar(self.base.eval(u1, u2, order + 1), self.tol)

    def __call__(self, u, v):
        return self.eval(u, v, 0).value


# ---------------------------------------------------------------------------
# triplets


@dataclass
class DarbouxTriplet:
    """Jets of (f, g, h) at a batch of points; ``word`` records the provenance."""

    f: Jet2
    g: Jet2
    h: Jet2
    word: str = ""
    points: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        k = min(self.f.order, self.g.order, self.h.order)
        self.f, self.g, self.h = self.f.truncate(k), self.g.truncate(k), self.h.truncate(k)

    @classmethod
    def from_pair(cls, pair: DeformationPair, u, v, order: int = jets.DEFAULT_ORDER):
        """Triplet of order ``order`` (f and g are expanded one order higher)."""
        f = pair.f.eval(u, v, order + 1)
        g = pair.g.eval(u, v, order + 1)
        return cls(f, g, compute_h(f, g), "", (np.asarray(u), np.asarray(v)))

    @property
    def order(self) -> int:
        return self.f.order

    @property
    def shape(self):
        return self.f.shape[:-1]

    def components(self):
        return self.f, self.g, self.h

    def values(self) -> np.ndarray:
        """(..., 3, 3) array of the basepoint values of (f, g, h)."""
        return np.stack([self.f.value, self.g.value, self.h.value], axis=-2)

    def truncate(self, order: int) -> "DarbouxTriplet":
        return DarbouxTriplet(self.f.truncate(order), self.g.truncate(order),
                              self.h.truncate(order), self.word, self.points)

    def relation_residual(self) -> np.ndarray:
        """max_i |d_i g - h ^ d_i f| / max_i (|d_i g| + |h| |d_i f|) per point.

        The denominator is shared by both directions so that a direction in
        which every term vanishes (a ruling of h, say) does not turn rounding
        noise into an O(1) ratio.
        """
        h = self.h.value
        num = np.zeros(self.shape)
        den = np.zeros(self.shape)
        for i in range(2):
            df = self.f.diff(i).value
            dg = self.g.diff(i).value
            num = np.maximum(num, _norm(dg - np.cross(h, df)))
            den = np.maximum(den, _norm(dg) + _norm(h) * _norm(df))
        return np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)

    def closure_residual(self) -> np.ndarray:
        """Normal component of d_i h relative to |d_i h| (im dh lies in im df)."""
        nu = np.cross(self.f.partial(1, 0), self.f.partial(0, 1))
        nu = nu / _norm(nu)[..., None]
        out = np.zeros(self.shape)
        for i in range(2):
            dh = self.h.diff(i).value
            n = _norm(dh)
            out = np.maximum(out, np.where(n > 0, np.abs(np.sum(dh * nu, -1))
                                           / np.where(n > 0, n, 1), 0.0))
        return out

    def shifted(self, v=(0.1, 0.2, 0.3), a=(0.07, -0.05, 0.11), b=(0.0, 0.0, 0.0)):
        return shift_triplet(self, v, a, b)


def shift_triplet(t: DarbouxTriplet, v=(0.1, 0.2, 0.3), a=(0.07, -0.05, 0.11),
                  b=(0.0, 0.0, 0.0)) -> DarbouxTriplet:
    """(f, g, h) -> (f + v, g + a ^ f + b, h + a), again a Darboux triplet."""
    v, a, b = (np.asarray(x, dtype=float) for x in (v, a, b))
    a_b = np.broadcast_to(a, t.f.value.shape)
    return DarbouxTriplet(t.f + v, t.g + cross(a_b, t.f) + b, t.h + a, t.word, t.points)


def transform_A(t: DarbouxTriplet) -> DarbouxTriplet:
    """A(f, g, h) = (h, g - h ^ f, f)."""
    return DarbouxTriplet(t.h, t.g - cross(t.h, t.f), t.f, t.word + "A", t.points)


def route_scores(t: DarbouxTriplet):
    """Conditioning of the two constructions of h* (1 is perfect, 0 is singular).

    The first route needs g to be an immersion, the second needs h to be an
    immersion whose tangent planes avoid the origin.
    """
    s1 = immersion_measure(t.g)
    nu = np.cross(t.h.partial(1, 0), t.h.partial(0, 1))
    nn = _norm(nu) * _norm(t.h.value)
    s2 = np.minimum(immersion_measure(t.h),
                    np.abs(np.sum(nu * t.h.value, -1)) / np.where(nn > 0, nn, 1.0))
    return s1, s2


def transform_D(t: DarbouxTriplet, tol: float = ROUTE_TOL,
                compare_above: float = COMPARE_SCORE) -> DarbouxTriplet:
    """D(f, g, h) = (g, f, h*), h* solving df = h* ^ dg or the polar of h.

    At each point the better conditioned construction is used.  Where both
    are well conditioned (scores above ``compare_above``) their values must
    coincide to relative ``tol``.
    """
    h1, immersed, consistent = compute_h_masked(t.g, t.f)
    ok1 = immersed & consistent
    h2, ok2 = polar_masked(t.h)
    if not np.all(ok1 | ok2):
        raise BothRoutesUnavailable(
            f"neither g is an immersion nor is the polar of h defined at {_bad_indices(ok1 | ok2)}")
    s1, s2 = route_scores(t)
    s1, s2 = np.where(ok1, s1, -1.0), np.where(ok2, s2, -1.0)
    both = (s1 >= compare_above) & (s2 >= compare_above)
    if np.any(both):
        c1, c2 = h1.value[both], h2.value[both]
        scale = np.maximum(_norm(c1), _norm(c2))
        err = _norm(c1 - c2) / scale
        if np.any(err > tol):
            raise InconsistentRoutes(
                f"the two constructions of h* differ by {np.max(err):.3e} > {tol:.1e}")
    use1 = (s1 >= s2)[..., None, None]
    hstar = Jet2(h1.order, np.where(use1, h1.coeffs, h2.coeffs))
    return DarbouxTriplet(t.g, t.f, hstar, t.word + "D", t.points)


def d_routes(t: DarbouxTriplet):
    """Both candidate h* jets with their validity masks (for cross-checks)."""
    h1, immersed, consistent = compute_h_masked(t.g, t.f)
    h2, ok2 = polar_masked(t.h)
    return (h1, immersed & consistent), (h2, ok2)


_STEPS = {"A": transform_A, "D": transform_D}


def reduce_word(word: str) -> str:
    """Cancel adjacent AA and DD (both letters are involutions)."""
    out: list[str] = []
    for ch in word.upper():
        if ch not in _STEPS:
            raise ValueError(f"words are strings over {{A, D}}, got {ch!r} in {word!r}")
        if out and out[-1] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def apply_word(t: DarbouxTriplet, word: str, reduce: bool = True) -> DarbouxTriplet:
    """Apply the letters of ``word`` left to right, caching every prefix on ``t``."""
    w = reduce_word(word) if reduce else word.upper()
    for ch in w:
        if ch not in _STEPS:
            raise ValueError(f"words are strings over {{A, D}}, got {ch!r}")
    cur = t
    for k in range(len(w)):
        prefix = w[: k + 1]
        nxt = t._cache.get(prefix)
        if nxt is None:
            try:
                nxt = _STEPS[w[k]](cur)
            except Exception as exc:  # noqa: BLE001 - re-raised with context
                raise WordError(w[:k], exc) from exc
            t._cache[prefix] = nxt
        cur = nxt
    if not w:
        return t
    return cur


def twelve_surfaces(t: DarbouxTriplet) -> dict:
    """The twelve first components of the dihedral orbit, keyed by label.

    Each entry is ``(word, jet)``; see :data:`TWELVE` and :data:`CLASSES`.
    """
    return {label: (w, apply_word(t, w).f) for label, w in TWELVE.items()}


def closure_residual(t: DarbouxTriplet, word: str = "DA" * 6) -> np.ndarray:
    """Pointwise relative distance between (D A)^6 (f, g, h) and (f, g, h)."""
    back = apply_word(t, word, reduce=False)
    a, b = t.values(), back.values()
    return _norm((a - b).reshape(a.shape[:-2] + (9,))) / np.maximum(
        _norm(a.reshape(a.shape[:-2] + (9,))), 1e-300)


def distinct_surfaces(values: dict, tol: float = 1e-7) -> int:
    """Number of pairwise distinct surfaces among ``label -> (..., 3) values``."""
    reps: list[np.ndarray] = []
    for arr in values.values():
        arr = np.asarray(arr)
        if not any(np.max(_norm(arr - r)) <= tol * max(1.0, np.max(_norm(r))) for r in reps):
            reps.append(arr)
    return len(reps)
