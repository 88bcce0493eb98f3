"""Small dense linear-algebra helpers (complex, numpy only).

Subspaces are handled as matrices whose columns form an orthonormal basis.
Rank decisions assume O(1)-normalized inputs (projectors, structure
tensors): singular values are compared against rel_tol * max(s_max, 1), so
a numerically zero matrix has rank zero.
"""
from __future__ import annotations

import numpy as np

RANK_TOL = 1e-10


def frob(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def sup(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitize(a: np.ndarray) -> np.ndarray:
    return (a + dagger(a)) / 2.0


def min_eigval(a: np.ndarray) -> float:
    """Smallest eigenvalue of a (nearly) Hermitian matrix."""
    return float(np.linalg.eigvalsh(hermitize(a))[0])


def _rank(s: np.ndarray, rel_tol: float) -> int:
    if s.size == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * max(float(s[0]), 1.0)))


def orthonormal_columns(cols: np.ndarray, rel_tol: float = RANK_TOL) -> np.ndarray:
    """SVD-orthonormalized basis of the column space, rank-truncated."""
    cols = np.asarray(cols, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[1] == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, :_rank(s, rel_tol)]


def nullspace(a: np.ndarray, rel_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the kernel (columns)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a[None, :]
    if a.size == 0:
        return np.eye(a.shape[1], dtype=complex)
    # economy SVD keeps vh complete whenever there are at least as many
    # rows as columns; a wide matrix needs the full version
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < a.shape[1])
    return dagger(vh)[:, _rank(s, rel_tol):]


def real_nullspace(a: np.ndarray, rel_tol: float = RANK_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < a.shape[1])
    return vh.T[:, _rank(s, rel_tol):]


def projector(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of orthonormal columns."""
    return basis @ dagger(basis)


def containment_defect(big: np.ndarray, vectors: np.ndarray) -> float:
    """max over columns v of ||(1 - P_big) v|| / ||v||."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[1] == 0:
        return 0.0
    resid = vectors - projector(big) @ vectors
    norms = np.linalg.norm(vectors, axis=0)
    norms = np.where(norms > 0.0, norms, 1.0)
    return float(np.max(np.linalg.norm(resid, axis=0) / norms))


def subspace_intersection(b1: np.ndarray, b2: np.ndarray,
                          rel_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of span(b1) & span(b2)."""
    n = b1.shape[0]
    eye = np.eye(n, dtype=complex)
    stack = np.vstack([eye - projector(b1), eye - projector(b2)])
    return nullspace(stack, rel_tol)


def subspace_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    """Frobenius distance of the orthogonal projectors."""
    return frob(projector(b1) - projector(b2))
