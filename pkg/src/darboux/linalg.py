"""Small dense linear-algebra helpers (SVD-based rank and kernel decisions)."""

from __future__ import annotations

import numpy as np


def null_space(m: np.ndarray, rtol: float = 1e-9, atol: float = 0.0) -> np.ndarray:
    """Orthonormal rows spanning the kernel of ``m``.

    A singular value counts as zero when it is <= max(atol, rtol * s_max).
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    tol = max(atol, rtol * smax)
    rank = int(np.sum(s > tol)) if smax > atol else 0
    return vh[rank:]


def rank(m: np.ndarray, rtol: float = 1e-9, atol: float = 0.0) -> int:
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    if not s.size or s[0] <= atol:
        return 0
    return int(np.sum(s > max(atol, rtol * s[0])))


def orthonormal_rows(m: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (rows) of the row space of ``m``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    _, s, vh = np.linalg.svd(m, full_matrices=False)
    if not s.size or s[0] == 0.0:
        return vh[:0]
    return vh[: int(np.sum(s > rtol * s[0]))]


def subspace_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle between the row spaces of ``a`` and ``b``.

    Uses the sine form so that angles far below sqrt(eps) are resolved.
    Row spaces of different dimension are compared from the smaller one.
    """
    qa = orthonormal_rows(a)
    qb = orthonormal_rows(b)
    if qa.shape[0] > qb.shape[0]:
        qa, qb = qb, qa
    resid = qa - (qa @ qb.T) @ qb
    s = np.linalg.norm(resid, ord=2) if resid.size else 0.0
    return float(np.arcsin(min(1.0, s)))


def line_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between the lines R u and R v (projective distance, in [0, pi/2])."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return float(np.pi / 2)
    u, v = u / nu, v / nv
    return float(np.arcsin(min(1.0, np.linalg.norm(v - np.dot(u, v) * u))))


def proportionality(u: np.ndarray, v: np.ndarray) -> float:
    """|u ^ v| / (|u| |v|) computed as the sine of the angle; 0 if either vanishes."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if not np.any(u) or not np.any(v):
        return 0.0
    return float(np.sin(line_angle(u, v)))
