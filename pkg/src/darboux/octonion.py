"""Split octonions as Zorn vector matrices.

An element ``[[a, x], [y, b]]`` (a, b scalars, x, y 3-vectors) is stored as
one coordinate array ``(a, x1, x2, x3, y1, y2, y3, b)`` on the last axis.
The scalar ring is either plain floats (numpy arrays) or :class:`Jet2`, in
which case the coordinate axis is the last *leading* axis of the jet.

    [[a, x], [y, b]] [[a', x'], [y', b']] =
        [[aa' + x.y',           ax' + b'x - y^y'],
         [a'y + by' + x^x',     x'.y + bb'     ]]

with ``^`` the cross product.  N = ab - x.y is multiplicative.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import jets
from .errors import NotIsotropic, ZeroElement
from .linalg import null_space

EPS_ISO = 1e-9
KERNEL_RTOL = 1e-9

LEFT = "left"
RIGHT = "right"


def _split(c):
    return c[..., 0], c[..., 1:4], c[..., 4:7], c[..., 7]


def _join(a, x, y, b):
    return jets.concat([jets.stack([a]), x, y, jets.stack([b])])


class ZornMatrix:
    """A split octonion over floats or jets."""

    __array_ufunc__ = None
    __slots__ = ("coords",)

    def __init__(self, coords):
        if not isinstance(coords, jets.Jet2):
            coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != 8:
            raise ValueError(f"Zorn coordinates need a last axis of 8, got {coords.shape}")
        self.coords = coords

    @classmethod
    def from_parts(cls, a, x, y, b) -> "ZornMatrix":
        return cls(_join(a, x, y, b))

    @classmethod
    def unit(cls) -> "ZornMatrix":
        return cls([1, 0, 0, 0, 0, 0, 0, 1])

    # parts ----------------------------------------------------------------
    @property
    def a(self):
        return self.coords[..., 0]

    @property
    def x(self):
        return self.coords[..., 1:4]

    @property
    def y(self):
        return self.coords[..., 4:7]

    @property
    def b(self):
        return self.coords[..., 7]

    @property
    def is_jet(self) -> bool:
        return isinstance(self.coords, jets.Jet2)

    @property
    def shape(self):
        return self.coords.shape[:-1]

    def __getitem__(self, idx) -> "ZornMatrix":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return ZornMatrix(self.coords[idx + (Ellipsis, slice(None))])

    def value(self) -> "ZornMatrix":
        """Basepoint value (drops the jet structure)."""
        return ZornMatrix(jets.value(self.coords))

    def diff(self, axis: int) -> "ZornMatrix":
        return ZornMatrix(self.coords.diff(axis))

    def __repr__(self):
        if self.is_jet:
            return f"ZornMatrix(jet order={self.coords.order}, shape={self.shape})"
        return f"ZornMatrix({np.array2string(self.coords, precision=6)})"

    # vector space ---------------------------------------------------------
    def __add__(self, other):
        return ZornMatrix(self.coords + other.coords)

    def __sub__(self, other):
        return ZornMatrix(self.coords - other.coords)

    def __neg__(self):
        return ZornMatrix(-self.coords)

    def scale(self, s) -> "ZornMatrix":
        """Multiply by a scalar (float, batch array, or scalar jet)."""
        if isinstance(s, jets.Jet2):
            return ZornMatrix(self.coords * s[..., None])
        s = np.asarray(s, dtype=float)
        if isinstance(self.coords, jets.Jet2):
            return ZornMatrix(self.coords * s[..., None])
        return ZornMatrix(self.coords * s[..., None])

    # algebra --------------------------------------------------------------
    def __mul__(self, other) -> "ZornMatrix":
        if not isinstance(other, ZornMatrix):
            return self.scale(other)
        return zorn_mul(self, other)

    def conj(self) -> "ZornMatrix":
        return zorn_conj(self)

    def transpose(self) -> "ZornMatrix":
        return zorn_transpose(self)

    def norm(self):
        return zorn_norm(self)


def zorn_mul(z: ZornMatrix, w: ZornMatrix) -> ZornMatrix:
    a, x, y, b = _split(z.coords)
    a2, x2, y2, b2 = _split(w.coords)
    dot, cross = jets.dot, jets.cross
    return ZornMatrix.from_parts(
        a * a2 + dot(x, y2),
        x2 * a[..., None] + x * b2[..., None] - cross(y, y2),
        y * a2[..., None] + y2 * b[..., None] + cross(x, x2),
        dot(x2, y) + b * b2,
    )


def zorn_conj(z: ZornMatrix) -> ZornMatrix:
    a, x, y, b = _split(z.coords)
    return ZornMatrix.from_parts(b, -x, -y, a)


def zorn_transpose(z: ZornMatrix) -> ZornMatrix:
    a, x, y, b = _split(z.coords)
    return ZornMatrix.from_parts(a, y, x, b)


def zorn_norm(z: ZornMatrix):
    a, x, y, b = _split(z.coords)
    return a * b - jets.dot(x, y)


def zorn_bilinear(z: ZornMatrix, w: ZornMatrix):
    """Polarisation <z, w> = (N(z + w) - N(z) - N(w)) / 2."""
    a, x, y, b = _split(z.coords)
    a2, x2, y2, b2 = _split(w.coords)
    return 0.5 * (a * b2 + a2 * b - jets.dot(x, y2) - jets.dot(x2, y))


def real_part(z: ZornMatrix):
    """Re(z) = <z, 1>."""
    return 0.5 * (z.a + z.b)


def euclid_norm(z: ZornMatrix) -> np.ndarray:
    """Euclidean norm of the (real) coordinate vector."""
    return np.linalg.norm(jets.value(z.coords), axis=-1)


# 8x8 operators ---------------------------------------------------------------

_BASIS = np.eye(8)


def mul_operator(z: ZornMatrix, side: str = LEFT) -> np.ndarray:
    """Matrix of w -> z w (left) or w -> w z (right) on coordinate vectors.

    Works on batches: ``z.shape == (...,)`` gives ``(..., 8, 8)``.
    """
    if z.is_jet:
        raise TypeError("multiplication operators are defined for real scalars only")
    zc = z.coords[..., None, :]
    basis = ZornMatrix(np.broadcast_to(_BASIS, z.shape + (8, 8)))
    zb = ZornMatrix(np.broadcast_to(zc, z.shape + (8, 8)))
    if side == LEFT:
        cols = zorn_mul(zb, basis).coords
    elif side == RIGHT:
        cols = zorn_mul(basis, zb).coords
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return np.swapaxes(cols, -1, -2)


@lru_cache(maxsize=None)
def structure_constants() -> np.ndarray:
    """C with (z w)_k = sum_ij C[i, j, k] z_i w_j (the product is bilinear)."""
    e = ZornMatrix(np.eye(8)[:, None, :].repeat(8, axis=1))
    f = ZornMatrix(np.eye(8)[None, :, :].repeat(8, axis=0))
    c = zorn_mul(e, f).coords
    c.setflags(write=False)
    return c


def annihilator_basis(z: ZornMatrix, side: str = LEFT) -> np.ndarray:
    """Orthonormal rows spanning ker L_z (side='left') or ker R_z, in Zorn coords."""
    zc = np.asarray(z.coords, dtype=float)
    scale = float(np.dot(zc, zc))
    if scale == 0.0:
        raise ZeroElement("annihilator of the zero octonion")
    n = float(zorn_norm(ZornMatrix(zc)))
    if abs(n) > EPS_ISO * scale:
        raise NotIsotropic(f"N(z) = {n:.3e} is not zero (|z|^2 = {scale:.3e})")
    ker = null_space(mul_operator(ZornMatrix(zc), side), rtol=KERNEL_RTOL)
    if ker.shape[0] != 4:
        raise NotIsotropic(f"kernel has dimension {ker.shape[0]}, expected 4")
    return ker


def annihilator(z: ZornMatrix, side: str = LEFT):
    """ker L_z or ker R_z as an :class:`~darboux.quadric.IsoSubspace` of R^{4,4}.

    ``ker L_z`` pulls back (via rho) to a subspace of the plus family,
    ``ker R_z`` to the minus family.
    """
    from .quadric import IsoSubspace, MINUS, PLUS, rho_inv_coords

    basis = rho_inv_coords(annihilator_basis(z, side))
    return IsoSubspace(basis, family=PLUS if side == LEFT else MINUS)


def random_zorn(rng: np.random.Generator, size=None) -> ZornMatrix:
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    return ZornMatrix(rng.standard_normal(shape + (8,)))


def random_isotropic(rng: np.random.Generator, size=None) -> ZornMatrix:
    """Random z with N(z) = 0: draw x, y, b and solve for a."""
    z = random_zorn(rng, size).coords.copy()
    b = z[..., 7]
    b = np.where(np.abs(b) < 0.1, np.sign(b) + (b == 0) + b, b)
    z[..., 7] = b
    z[..., 0] = np.sum(z[..., 1:4] * z[..., 4:7], axis=-1) / b
    return ZornMatrix(z)
