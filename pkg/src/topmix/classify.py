"""k-nearest-neighbor prediction over a precomputed distance matrix.

All tie handling is deterministic: candidates tied at the rank-k boundary
are admitted by smallest row index, and a tied majority vote goes to the
class with the smaller summed distance among the k neighbors, then to the
smaller class label.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError


def knn_predict(
    query: int,
    candidates: np.ndarray,
    distances: np.ndarray,
    labels: np.ndarray,
    k: int,
) -> int:
    """Majority label among the k candidates nearest to the query row.

    Args:
        query: row index being classified; must not be a candidate.
        candidates: row indices eligible as neighbors (training rows).
        distances: full symmetric distance matrix over all rows.
        labels: 0/1 label per row.
        k: neighbor count, 1 <= k <= len(candidates).
    """
    candidates = np.asarray(candidates, dtype=np.intp)
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    if candidates.size < k:
        raise ContractError(
            f"need at least k={k} candidates, got {candidates.size}"
        )
    if (candidates == query).any():
        raise ContractError(f"query row {query} may not be its own candidate")

    dist = distances[query, candidates]
    order = np.lexsort((candidates, dist))[:k]
    top_labels = labels[candidates[order]]
    top_dist = dist[order]

    votes = np.bincount(top_labels, minlength=2)
    best = votes.max()
    tied = np.flatnonzero(votes == best)
    if tied.size == 1:
        return int(tied[0])
    # tied vote: smaller summed distance wins, then smaller label
    sums = [top_dist[top_labels == cls].sum() for cls in tied]
    return int(tied[int(np.lexsort((tied, sums))[0])])
