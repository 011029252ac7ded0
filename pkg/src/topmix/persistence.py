"""Dimension-0 persistence of the Rips filtration of a finite point set.

As the scale sweeps upward, connected components of the distance graph
merge; each merge kills a component born at scale 0. For a Rips
filtration these merge scales are exactly the minimum-spanning-tree edge
weights, so the diagram is computed with Kruskal's algorithm over a
union-find structure instead of any boundary-matrix machinery. The one
component surviving to the end is recorded with death equal to the
filtration cap, so diagrams sharing a cap stay mutually comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cloud import PointCloud, build_point_cloud, pairwise_distances
from .errors import ContractError


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs at one homology dimension, with a cap.

    Pairs are kept sorted by (death, birth) so equal diagrams are
    representation-identical.
    """

    pairs: np.ndarray
    maxscale: float
    dimension: int = 0

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        order = np.lexsort((pairs[:, 0], pairs[:, 1]))
        object.__setattr__(self, "pairs", pairs[order])
        if self.maxscale <= 0:
            raise ContractError("maxscale must be positive")
        if pairs.size:
            births, deaths = pairs[:, 0], pairs[:, 1]
            if (births < 0).any() or (births > deaths).any() or (deaths > self.maxscale).any():
                raise ContractError("diagram pairs must satisfy 0 <= birth <= death <= maxscale")

    def __len__(self) -> int:
        return self.pairs.shape[0]

    @property
    def deaths(self) -> np.ndarray:
        return self.pairs[:, 1]


class _UnionFind:
    """Union by size with path compression; tracks component count."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True


def rips_dim0_diagram(distances: np.ndarray, maxscale: float) -> PersistenceDiagram:
    """Dimension-0 diagram of the Rips filtration over a distance matrix.

    Equivalent to sweeping a threshold upward through the sorted pairwise
    distances and emitting a (0, threshold) pair every time two connected
    components of the threshold graph merge, plus (0, maxscale) for the
    component that survives. Implemented as Kruskal's MST with equal-weight
    edges processed in (i, j) order; an n-point input yields exactly n pairs.

    Raises:
        ContractError: non-square/asymmetric/negative input, nonzero
            diagonal, non-positive maxscale, or a merge distance exceeding
            maxscale (a cap that would truncate finite features is an error,
            never a silent clamp).
    """
    dist = np.asarray(distances, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ContractError("distance matrix must be square")
    n = dist.shape[0]
    if n == 0:
        raise ContractError("distance matrix must be non-empty")
    if not np.array_equal(dist, dist.T):
        raise ContractError("distance matrix must be symmetric")
    if (dist < 0).any():
        raise ContractError("distance matrix must be nonnegative")
    if np.diag(dist).any():
        raise ContractError("distance matrix must have a zero diagonal")
    if maxscale <= 0:
        raise ContractError("maxscale must be positive")

    iu, ju = np.triu_indices(n, k=1)
    weights = dist[iu, ju]
    # ascending weight, ties in lexicographic (i, j) order
    order = np.lexsort((ju, iu, weights))

    uf = _UnionFind(n)
    deaths = []
    for e in order:
        if uf.count == 1:
            break
        if uf.union(int(iu[e]), int(ju[e])):
            w = float(weights[e])
            if w > maxscale:
                raise ContractError(
                    f"maxscale too small: components merge at distance {w!r} "
                    f"> maxscale {maxscale!r}"
                )
            deaths.append(w)
    deaths.append(float(maxscale))  # essential component, capped

    pairs = np.zeros((n, 2), dtype=np.float64)
    pairs[:, 1] = deaths
    return PersistenceDiagram(pairs=pairs, maxscale=float(maxscale), dimension=0)


def choose_maxscale(clouds: Sequence[PointCloud], safety: float = 1.1) -> float:
    """One shared filtration cap: safety x the largest distance in any cloud.

    Every diagram in an experiment must use the same cap so that their
    capped essential pairs match each other at zero cost under diagram
    distances.
    """
    if safety < 1:
        raise ContractError("safety factor must be >= 1")
    if not clouds:
        raise ContractError("choose_maxscale needs at least one cloud")
    top = max(float(pairwise_distances(c).max()) for c in clouds)
    if top <= 0:
        # all-coincident clouds still need a positive cap
        return float(safety)
    return float(safety * top)


def diagrams_for_rows(matrix_rows: np.ndarray, maxscale: float) -> list[PersistenceDiagram]:
    """Build each row's projection cloud and compute its diagram."""
    out = []
    for i, row in enumerate(matrix_rows):
        cloud = build_point_cloud(row, source_row=i)
        out.append(rips_dim0_diagram(pairwise_distances(cloud), maxscale))
    return out


def save_diagrams(diagrams: Iterable[PersistenceDiagram], path: str | Path) -> None:
    """Write one ``row,dim,birth,death`` record per pair, row-major."""
    with open(path, "w", encoding="utf-8") as fh:
        for row, diagram in enumerate(diagrams):
            for birth, death in diagram.pairs:
                fh.write(f"{row},{diagram.dimension},{float(birth)!r},{float(death)!r}\n")


def load_diagrams(path: str | Path, maxscale: float) -> list[PersistenceDiagram]:
    """Inverse of save_diagrams; the cap comes from the cache manifest."""
    by_row: dict[int, list[tuple[float, float]]] = {}
    dims: dict[int, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row_s, dim_s, birth_s, death_s = line.split(",")
            row = int(row_s)
            by_row.setdefault(row, []).append((float(birth_s), float(death_s)))
            dims[row] = int(dim_s)
    if not by_row:
        return []
    n_rows = max(by_row) + 1
    if sorted(by_row) != list(range(n_rows)):
        raise ContractError(f"diagram cache {path} has missing row indices")
    return [
        PersistenceDiagram(
            pairs=np.asarray(by_row[row], dtype=np.float64),
            maxscale=maxscale,
            dimension=dims[row],
        )
        for row in range(n_rows)
    ]
