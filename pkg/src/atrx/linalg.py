"""
Small dense linear algebra: one-sided Jacobi SVD and a 2-D convex hull.

The matrices handled here are channel gains and receiver combiners of at
most a few antennas, so clarity and determinism matter more than speed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

_EPS = np.finfo(float).eps
_MAX_SWEEPS = 100


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D float array (1-D input becomes a row)."""
    a = np.array(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


@dataclass(frozen=True)
class SvdFactors:
    """Full SVD ``m = left @ diag(singular_values) @ right``.

    ``left`` is rows x rows and ``right`` is cols x cols, both orthogonal;
    ``singular_values`` has min(rows, cols) entries, sorted nonincreasing.
    Zero singular values are kept.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def rank_count(self) -> int:
        return len(self.singular_values)

    def sigma_matrix(self) -> np.ndarray:
        rows, cols = self.left.shape[0], self.right.shape[0]
        out = np.zeros((rows, cols))
        k = self.rank_count
        out[:k, :k] = np.diag(self.singular_values)
        return out

    def reconstruct(self) -> np.ndarray:
        return self.left @ self.sigma_matrix() @ self.right


def _complete_basis(q: np.ndarray, filled: np.ndarray) -> np.ndarray:
    """Fill the columns of ``q`` not flagged in ``filled`` with an orthonormal complement."""
    n = q.shape[0]
    q = q.copy()
    basis = [q[:, j] for j in range(q.shape[1]) if filled[j]]
    candidates = iter(np.eye(n))
    for j in range(q.shape[1]):
        if filled[j]:
            continue
        while True:
            v = next(candidates).copy()
            # two Gram-Schmidt passes for numerical orthogonality
            for _ in range(2):
                for b in basis:
                    v -= (b @ v) * b
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                break
        v /= norm
        q[:, j] = v
        basis.append(v)
    return q


def _first_nonzero_sign(v: np.ndarray, tol: float = 1e-12) -> float:
    for x in v:
        if abs(x) > tol:
            return 1.0 if x > 0 else -1.0
    return 1.0


def _jacobi_tall(a: np.ndarray):
    """One-sided (Hestenes) Jacobi on a rows >= cols matrix.

    Returns (u, sigma, v) with ``a = u[:, :k] diag(sigma) v.T`` where
    ``u`` is rows x rows and ``v`` is cols x cols.
    """
    m, n = a.shape
    w = a.copy()
    v = np.eye(n)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = w[:, p] @ w[:, p]
                beta = w[:, q] @ w[:, q]
                gamma = w[:, p] @ w[:, q]
                if abs(gamma) <= _EPS * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wp, wq = w[:, p].copy(), w[:, q].copy()
                w[:, p] = c * wp - s * wq
                w[:, q] = s * wp + c * wq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break

    sigma = np.linalg.norm(w, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    w = w[:, order]
    v = v[:, order]

    scale = sigma[0] if n and sigma[0] > 0 else 1.0
    nonzero = sigma > _EPS * max(m, n) * scale
    sigma = np.where(nonzero, sigma, 0.0)

    u = np.zeros((m, m))
    filled = np.zeros(m, dtype=bool)
    for j in range(n):
        if nonzero[j]:
            u[:, j] = w[:, j] / sigma[j]
            filled[j] = True
    u = _complete_basis(u, filled)
    return u, sigma, v


def svd(m) -> SvdFactors:
    """Full singular value decomposition by one-sided Jacobi rotations.

    Each right singular vector (row of ``right``) is signed so that its
    first nonzero component is positive; the paired left vector flips with it.

    Raises
    ------
    InvalidInputError
        If ``m`` is empty or has non-finite entries.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if rows >= cols:
        u, sigma, v = _jacobi_tall(a)
        left, right = u, v.T
    else:
        # a.T = u' S v'.T  =>  a = v' S u'.T
        u, sigma, v = _jacobi_tall(a.T)
        left, right = v, u.T
    left = left.copy()
    right = right.copy()
    k = len(sigma)
    for i in range(right.shape[0]):
        if _first_nonzero_sign(right[i]) < 0:
            right[i] *= -1.0
            if i < k:
                left[:, i] *= -1.0
    for j in range(k, left.shape[1]):
        if _first_nonzero_sign(left[:, j]) < 0:
            left[:, j] *= -1.0
    return SvdFactors(left=left, singular_values=sigma, right=right)


def orthogonality_error(q: np.ndarray) -> float:
    """Frobenius norm of ``q.T q - I``."""
    q = np.asarray(q, dtype=float)
    return float(np.linalg.norm(q.T @ q - np.eye(q.shape[1])))


# --------------------------------------------------------------------------
# 2-D convex hull


@dataclass(frozen=True, order=True)
class Point2D:
    """A rate pair (R1, R2) in bits per channel-use."""

    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InvalidInputError(f"non-finite point ({self.x}, {self.y})")
        if self.x < 0 or self.y < 0:
            raise InvalidInputError(f"rates must be nonnegative, got ({self.x}, {self.y})")


def _cross(o: Point2D, a: Point2D, b: Point2D) -> float:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def convex_hull_2d(points: Iterable[Point2D | Sequence[float]]) -> list[Point2D]:
    """Vertices of the convex hull in counterclockwise order (monotone chain).

    Collinear boundary points are dropped. A single distinct point yields
    itself; collinear input yields the two extreme points.
    """
    pts = sorted({p if isinstance(p, Point2D) else Point2D(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise InvalidInputError("convex hull of an empty point set")
    if len(pts) <= 2:
        return pts

    lower: list[Point2D] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point2D] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) > 1 else hull[:1]


def hull_contains(hull: Sequence[Point2D], p: Point2D | Sequence[float], tol: float = 1e-12) -> bool:
    """True if ``p`` satisfies every half-plane inequality of a CCW hull within ``tol``."""
    q = p if isinstance(p, Point2D) else Point2D(float(p[0]), float(p[1]))
    n = len(hull)
    if n == 1:
        return abs(q.x - hull[0].x) <= tol and abs(q.y - hull[0].y) <= tol
    if n == 2:
        a, b = hull
        if abs(_cross(a, b, q)) > tol * max(1.0, np.hypot(b.x - a.x, b.y - a.y)):
            return False
        lo_x, hi_x = sorted((a.x, b.x))
        lo_y, hi_y = sorted((a.y, b.y))
        return lo_x - tol <= q.x <= hi_x + tol and lo_y - tol <= q.y <= hi_y + tol
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        # signed distance from q to the edge line, positive on the inside
        if _cross(a, b, q) / np.hypot(b.x - a.x, b.y - a.y) < -tol:
            return False
    return True
