"""Maps S -> R^3 with jet evaluation, and a catalog of infinitesimal bendings.

Every catalog formula is written once against a small numeric API
(``+ - * /`` and :func:`darboux.jets.sin` / :func:`~darboux.jets.cos`) so it
evaluates on plain floats as well as on jets.  Float evaluation is what the
finite-difference oracles use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .errors import NotImmersion, NotIsometricDeformation, UnknownPair
from .jets import Jet2, cos, cross, sin, stack

ISOMETRY_TOL = 1e-8
IMMERSION_TOL = 1e-9

GENERIC = "generic"
TRIVIAL = "trivial_displacement"
PLANAR = "planar_normal"
RULED = "ruled_rank1_plus"
DEVELOPABLE = "developable_rank1_minus"


@dataclass(frozen=True)
class Domain:
    """Closed rectangle minus an explicitly described singular set."""

    u_range: tuple[float, float]
    v_range: tuple[float, float]
    excluded: str = ""
    # distance-like function to the singular set; points with value < margin are excluded
    singular: Callable | None = None
    margin: float = 1e-3

    def is_valid(self, u, v) -> np.ndarray:
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        ok = np.ones(np.broadcast(u, v).shape, dtype=bool)
        if self.singular is not None:
            ok &= np.abs(self.singular(u, v)) >= self.margin
        return ok

    def grid(self, n: int):
        """Row-major n x n grid (u varies slowest); returns flat arrays (u, v)."""
        us = np.linspace(*self.u_range, n)
        vs = np.linspace(*self.v_range, n)
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        return uu.ravel(), vv.ravel()

    def contains(self, u, v) -> np.ndarray:
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        return ((self.u_range[0] <= u) & (u <= self.u_range[1])
                & (self.v_range[0] <= v) & (v <= self.v_range[1]))

    def to_json(self):
        return {"u": list(self.u_range), "v": list(self.v_range), "excluded": self.excluded}


class SurfaceMap:
    """A smooth map S -> R^3 evaluated as jets.

    ``fn(u, v)`` must accept floats, arrays or jets and return a stacked
    3-vector (see :func:`darboux.jets.stack`).
    """

    def __init__(self, fn: Callable, domain: Domain | None = None, name: str = ""):
        self.fn = fn
        self.domain = domain
        self.name = name

    def __call__(self, u, v) -> np.ndarray:
        """Plain float evaluation, shape (..., 3)."""
        return np.asarray(self.fn(np.asarray(u, dtype=float), np.asarray(v, dtype=float)))

    def eval(self, u1, u2, order: int = jets.DEFAULT_ORDER) -> Jet2:
        u = Jet2.variable(np.asarray(u1, dtype=float), 0, order)
        v = Jet2.variable(np.asarray(u2, dtype=float), 1, order)
        out = self.fn(u, v)
        if not isinstance(out, Jet2):  # constant map
            shape = np.broadcast_shapes(np.shape(u1), np.shape(u2))
            out = Jet2.constant(np.broadcast_to(np.asarray(out, dtype=float), shape + (3,)), order)
        return out

    def __repr__(self):
        return f"SurfaceMap({self.name or self.fn.__name__})"


@dataclass
class DeformationPair:
    """An immersion f with an infinitesimal isometric deformation g (df . dg = 0)."""

    name: str
    f: SurfaceMap
    g: SurfaceMap
    expected_class: str
    domain: Domain
    h: SurfaceMap | None = None  # closed-form rotation field, when known
    description: str = ""
    params: dict = field(default_factory=dict)

    def grid(self, n: int, keep_invalid: bool = False):
        u, v = self.domain.grid(n)
        if keep_invalid:
            return u, v
        ok = self.domain.is_valid(u, v)
        return u[ok], v[ok]

    def excluded_points(self, n: int):
        u, v = self.domain.grid(n)
        bad = ~self.domain.is_valid(u, v)
        return [(float(a), float(b)) for a, b in zip(u[bad], v[bad])]


# ---------------------------------------------------------------------------
# catalog


def _paraboloid_f(u, v):
    return stack([u, v, u * u + v * v + 1.0])


def _paraboloid_g(u, v):
    return stack([-v * u * u - v * v * v / 3.0, -u * u * u / 3.0 - u * v * v, u * v])


def _paraboloid_h(u, v):
    return stack([u, -v, u * u - v * v])


_A_TRIVIAL = np.array([1.0, 2.0, 3.0])
_B_TRIVIAL = np.array([4.0, 5.0, 6.0])


def trivial_pair(a=_A_TRIVIAL, b=_B_TRIVIAL, name: str = "trivial") -> "DeformationPair":
    """The infinitesimal motion g = a ^ f + b of the paraboloid; h is the constant a."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def g(u, v):
        f = _paraboloid_f(u, v)
        return cross(np.broadcast_to(a, np.shape(jets.value(f))), f) + b

    def h(u, v):
        return stack([0.0 * u + a[0], 0.0 * u + a[1], 0.0 * u + a[2]])

    par = PARABOLOID_DOMAIN
    return DeformationPair(
        name, SurfaceMap(_paraboloid_f, par, "f"), SurfaceMap(g, par, "g"),
        TRIVIAL, par, h=SurfaceMap(h, par, "h"),
        description="infinitesimal motion g = a ^ f + b of the paraboloid",
        params={"a": a.tolist(), "b": b.tolist()},
    )


def _plane_f(u, v):
    return stack([u, v, 0.0 * u + 1.0])


def _plane_g(u, v):
    return stack([0.0 * u, 0.0 * u, sin(u) * cos(v)])


def _plane_h(u, v):
    # (d2 w, -d1 w, 0) for w = sin u cos v
    return stack([-sin(u) * sin(v), -cos(u) * cos(v), 0.0 * u])


def _helix(x2):
    return stack([cos(x2), sin(x2), x2])


def _helix_d(x2):
    return stack([-sin(x2), cos(x2), 0.0 * x2 + 1.0])


def _helix_cross_d(x2):
    # h ^ h' for h = (cos, sin, id)
    return stack([sin(x2) - x2 * cos(x2), -x2 * sin(x2) - cos(x2), 0.0 * x2 + 1.0])


def _ruled_f(x1, x2):
    return stack([0.0 * x2, 0.0 * x2, x2]) + _helix_d(x2) * _bcast(x1)


def _ruled_g(x1, x2):
    # g0' = h ^ f0' = (sin, -cos, 0)  =>  g0 = (-cos, -sin, 0)
    return stack([-cos(x2), -sin(x2), 0.0 * x2]) + _helix_cross_d(x2) * _bcast(x1)


def _ruled_h(x1, x2):
    return _helix(x2) + 0.0 * _bcast(x1)


def _cone_f(x1, x2):
    return _helix_d(x2) * _bcast(x1)


def _cone_g(x1, x2):
    return _helix_cross_d(x2) * _bcast(x1)


def _bcast(s):
    return s[..., None] if isinstance(s, Jet2) else np.asarray(s)[..., None]


def _cyl_f(u, v):
    return stack([cos(u), sin(u), v])


def _cyl_g(u, v):
    return stack([u / 2.0 + sin(2.0 * u) / 4.0, (1.0 - cos(2.0 * u)) / 4.0, 0.0 * v])


def _cyl_h(u, v):
    return stack([0.0 * u, 0.0 * u, -cos(u)])


def _paraboloid_singular(u, v):
    # dg drops rank on |u| = |v|; tangent planes of f pass through 0 on u^2+v^2 = 1
    return np.minimum(np.abs(np.abs(u) - np.abs(v)), np.abs(u * u + v * v - 1.0))


PARABOLOID_DOMAIN = Domain(
    (0.6, 1.2), (1.9, 2.5),
    excluded="|u| = |v| (rank dg < 2) and u^2 + v^2 = 1 (tangent plane of f through 0)",
    singular=_paraboloid_singular,
)


def catalog() -> list[DeformationPair]:
    par = PARABOLOID_DOMAIN
    return [
        DeformationPair(
            "paraboloid", SurfaceMap(_paraboloid_f, par, "f"), SurfaceMap(_paraboloid_g, par, "g"),
            GENERIC, par, h=SurfaceMap(_paraboloid_h, par, "h"),
            description="translation paraboloid f = a(u) + b(v), h = a - b, g = int h ^ df",
        ),
        trivial_pair(),
        DeformationPair(
            "planar", SurfaceMap(_plane_f), SurfaceMap(_plane_g), PLANAR,
            Domain((0.2, 1.2), (0.2, 1.2)), h=SurfaceMap(_plane_h),
            description="plane z = 1 with normal field g = (0, 0, sin u cos v)",
        ),
        DeformationPair(
            "ruled", SurfaceMap(_ruled_f), SurfaceMap(_ruled_g), RULED,
            Domain((0.5, 1.5), (0.5, 1.5)), h=SurfaceMap(_ruled_h),
            description="ruled normal form f = f0(x2) + x1 h'(x2), h = (cos x2, sin x2, x2)",
        ),
        DeformationPair(
            "cylinder", SurfaceMap(_cyl_f), SurfaceMap(_cyl_g), DEVELOPABLE,
            Domain((0.2, 1.2), (-0.5, 0.5)), h=SurfaceMap(_cyl_h),
            description="circular cylinder bent in its cross-section plane",
        ),
        DeformationPair(
            "cone", SurfaceMap(_cone_f), SurfaceMap(_cone_g), DEVELOPABLE,
            Domain((0.5, 1.5), (0.0, 1.0)), h=SurfaceMap(_ruled_h),
            description="cone f = x1 h'(x2) with apex 0 (tangent planes through the origin)",
        ),
    ]


def get_pair(name: str) -> DeformationPair:
    for p in catalog():
        if p.name == name:
            return p
    raise UnknownPair(f"unknown pair {name!r}; known pairs: {', '.join(pair_names())}")


def pair_names() -> list[str]:
    return [p.name for p in catalog()]


# ---------------------------------------------------------------------------
# validation


def jacobian(m: Jet2) -> np.ndarray:
    """(..., 3, 2) matrix of first partials of a jet-valued 3-vector."""
    return m.gradient()


def bending_residuals(f_jet: Jet2, g_jet: Jet2, normalized: bool = True):
    """Residuals of d1f.d1g, d2f.d2g and d1f.d2g + d2f.d1g.

    With ``normalized`` they are divided by |df| |dg|, otherwise raw.
    """
    jf, jg = jacobian(f_jet), jacobian(g_jet)
    e11 = np.sum(jf[..., 0] * jg[..., 0], axis=-1)
    e22 = np.sum(jf[..., 1] * jg[..., 1], axis=-1)
    e12 = np.sum(jf[..., 0] * jg[..., 1] + jf[..., 1] * jg[..., 0], axis=-1)
    scale = np.linalg.norm(jf, axis=(-2, -1)) * np.linalg.norm(jg, axis=(-2, -1))
    res = np.stack([e11, e22, e12], axis=-1)
    if not normalized:
        return np.abs(res)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale[..., None] > 0, np.abs(res) / scale[..., None], 0.0)
    return rel


def immersion_measure(f_jet: Jet2) -> np.ndarray:
    """|d1f ^ d2f| / (|d1f| |d2f|), the sine of the angle between partials."""
    jf = jacobian(f_jet)
    n = np.linalg.norm(np.cross(jf[..., 0], jf[..., 1]), axis=-1)
    d = np.linalg.norm(jf[..., 0], axis=-1) * np.linalg.norm(jf[..., 1], axis=-1)
    return np.where(d > 0, n / np.where(d > 0, d, 1.0), 0.0)


def validate_pair(pair: DeformationPair, samples=None, n: int = 21,
                  tol: float = ISOMETRY_TOL, raise_on_fail: bool = True) -> dict:
    """Check df . dg = 0 and that f is an immersion on sample points."""
    u, v = samples if samples is not None else pair.grid(n)
    fj = pair.f.eval(u, v, 1)
    gj = pair.g.eval(u, v, 1)
    res = bending_residuals(fj, gj)
    raw = bending_residuals(fj, gj, normalized=False)
    imm = immersion_measure(fj)
    report = {
        "pair": pair.name,
        "points": int(np.size(u)),
        "residuals": res,
        "max_residual": float(np.max(res)) if res.size else 0.0,
        "max_raw_residual": float(np.max(raw)) if raw.size else 0.0,
        "min_immersion": float(np.min(imm)) if imm.size else 0.0,
        "tolerance": tol,
    }
    report["pass"] = report["max_residual"] <= tol and report["min_immersion"] > IMMERSION_TOL
    if raise_on_fail:
        if report["min_immersion"] <= IMMERSION_TOL:
            raise NotImmersion(f"{pair.name}: |d1f ^ d2f| vanishes on the samples")
        if report["max_residual"] > tol:
            raise NotIsometricDeformation(
                f"{pair.name}: df.dg residual {report['max_residual']:.3e} > {tol:.1e}")
    return report


def perturbed(pair: DeformationPair, vector, name: str | None = None) -> DeformationPair:
    """Add u * vector to g (breaks isometry for vector not orthogonal to d1f)."""
    vec = np.asarray(vector, dtype=float)
    g0 = pair.g.fn

    def g(u, v):
        return g0(u, v) + _bcast(u) * vec

    return DeformationPair(name or pair.name + "+perturbed", pair.f, SurfaceMap(g),
                           pair.expected_class, pair.domain)


def shifted(pair: DeformationPair, v=(0.1, 0.2, 0.3), a=(0.07, -0.05, 0.11), b=(0.0, 0.0, 0.0),
            name: str | None = None) -> DeformationPair:
    """(f, g) -> (f + v, g + a ^ f + b); the rotation field becomes h + a."""
    v, a, b = (np.asarray(t, dtype=float) for t in (v, a, b))
    f0, g0 = pair.f.fn, pair.g.fn

    def f(s, t):
        return f0(s, t) + v

    def g(s, t):
        base = f0(s, t)
        return g0(s, t) + cross(np.broadcast_to(a, np.shape(jets.value(base))), base) + b

    h = None
    if pair.h is not None:
        h0 = pair.h.fn
        h = SurfaceMap(lambda s, t: h0(s, t) + a)
    return DeformationPair(name or pair.name + "+shift", SurfaceMap(f), SurfaceMap(g),
                           pair.expected_class, pair.domain, h=h, description=pair.description)


def transported(pair: DeformationPair, a_mat, name: str | None = None) -> DeformationPair:
    """Image of (f, g) under the projective action diag(A, A^{-T}) on the quadric."""
    from .quadric import pgl4_action

    a_mat = np.asarray(a_mat, dtype=float)

    def lift(s, t):
        f, g = pair.f.fn(s, t), pair.g.fn(s, t)
        return pgl4_action(a_mat, jets.concat([f, jets.stack([0.0 * jets.dot(f, f) + 1.0]),
                                               g, jets.stack([-jets.dot(f, g)])]))

    def f(s, t):
        p = lift(s, t)
        return p[..., 0:3] / p[..., 3][..., None]

    def g(s, t):
        p = lift(s, t)
        return p[..., 4:7] / p[..., 3][..., None]

    return DeformationPair(name or pair.name + "+pgl4", SurfaceMap(f), SurfaceMap(g),
                           pair.expected_class, pair.domain)
