"""Cosine-similarity primitives: pairwise matrices and stable rankings.

All similarities are clamped into [-1, 1] so that floating-point drift can
never leak out-of-range values downstream. Zero vectors are rejected, never
silently mapped to 0: an all-zero embedding means the encoder collapsed and
must surface as an error.
"""

from __future__ import annotations

import numpy as np

from .core import DataError, ensure_features


def _norms_or_raise(e: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(e, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DataError(f"zero vector at row {zero[0]}: cosine similarity undefined")
    huge = np.flatnonzero(~np.isfinite(norms))
    if huge.size:
        # norm overflow would silently normalize the row to zero
        raise DataError(f"row {huge[0]} overflows the norm computation")
    return norms


def unit_rows(e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized copy of ``e`` plus the original row norms."""
    e = ensure_features(e)
    norms = _norms_or_raise(e)
    return e / norms[:, None], norms


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"expected two vectors of equal length, got {a.shape} and {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DataError("zero vector: cosine similarity undefined")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def similarity_matrix(e) -> np.ndarray:
    """All-pairs cosine similarities of the rows of ``e``.

    Returns an (n, n) float64 matrix that is exactly symmetric, has unit
    diagonal, and entries in [-1, 1].
    """
    u, _ = unit_rows(e)
    s = u @ u.T
    s = 0.5 * (s + s.T)  # dgemm output is symmetric only up to rounding
    np.clip(s, -1.0, 1.0, out=s)
    np.fill_diagonal(s, 1.0)
    return s


def rank_ascending(anchor: int, candidates, s: np.ndarray) -> np.ndarray:
    """Candidate indices ordered by similarity to ``anchor``, ascending.

    Ties break by ascending sample index so the ranking is deterministic.
    An empty candidate set yields an empty array.
    """
    cand = np.asarray(sorted(candidates), dtype=np.int64)
    if cand.size == 0:
        return cand
    if anchor in set(cand.tolist()):
        raise ValueError(f"anchor {anchor} must not appear among its own candidates")
    sims = s[anchor, cand]
    order = np.argsort(sims, kind="stable")  # stable keeps index order on ties
    return cand[order]
