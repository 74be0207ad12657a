"""Windowed agglomerative clustering and the relative-height dendrogram cut."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TypeVar

import numpy as np

from .features import pairwise_distances

LINKAGES = ("average", "single", "complete")

T = TypeVar("T")


@dataclass(frozen=True)
class Merge:
    """One agglomeration step.

    ``left`` and ``right`` are node refs: ``0..n-1`` index the leaves, ``n + k``
    is the node created by the k-th merge. ``left`` is the side holding the
    smaller seq_id.
    """

    left: int
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[int, ...]
    merges: tuple[Merge, ...]

    @property
    def max_height(self) -> float:
        """Height of the tallest merge; 0 for a single leaf."""
        return max((m.height for m in self.merges), default=0.0)

    def to_dict(self) -> dict:
        return {
            "leaves": list(self.leaves),
            "merges": [{"left": m.left, "right": m.right, "height": m.height} for m in self.merges],
            "D": self.max_height,
        }


@dataclass(frozen=True)
class SimilarityCluster:
    member_ids: tuple[int, ...]

    def __post_init__(self):
        if not self.member_ids:
            raise ValueError("a similarity cluster must have at least one member")
        if list(self.member_ids) != sorted(set(self.member_ids)):
            raise ValueError("member_ids must be sorted and unique")

    def __len__(self) -> int:
        return len(self.member_ids)


def window_partition(items: Sequence[T], n: int) -> list[Sequence[T]]:
    """Split ``items`` into consecutive chunks of ``n``; the last may be shorter."""
    if n < 1:
        raise ValueError(f"window size must be >= 1, got {n}")
    return [items[i : i + n] for i in range(0, len(items), n)]


def build_dendrogram(
    features: np.ndarray | Sequence[np.ndarray],
    linkage: str = "average",
    leaves: Sequence[int] | None = None,
) -> Dendrogram:
    """Agglomerative clustering of feature rows under Euclidean distance.

    ``features`` may be any 2-D array (one row per item) or a 1-D array of
    scalars. ``leaves`` gives the seq_id of each row and defaults to
    ``0..n-1``; it drives the tie-break, which merges the tied pair whose
    (smaller, larger) minimum member seq_ids are lexicographically smallest.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.size == 0 or len(features) == 0:
        raise ValueError("cannot cluster an empty set of features")
    dist = pairwise_distances(features)
    return build_dendrogram_from_distances(dist, linkage, leaves)


def build_dendrogram_from_distances(
    dist: np.ndarray, linkage: str = "average", leaves: Sequence[int] | None = None
) -> Dendrogram:
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    n = len(dist)
    if n == 0:
        raise ValueError("cannot cluster an empty set of features")
    leaves = tuple(range(n)) if leaves is None else tuple(int(x) for x in leaves)
    if len(leaves) != n:
        raise ValueError("leaves and features differ in length")

    # Average linkage tracks summed pairwise distances so that the cluster
    # distance is always sum / (|P| |Q|), independent of merge history.
    total = np.array(dist, dtype=np.float64)
    size = np.ones(n)
    link = total.copy()
    np.fill_diagonal(link, np.inf)
    min_id = np.array(leaves, dtype=np.int64)
    node = list(range(n))
    active = np.ones(n, dtype=bool)
    merges: list[Merge] = []

    for step in range(n - 1):
        m = link.min()
        ii, jj = np.nonzero(link == m)
        upper = ii < jj
        ii, jj = ii[upper], jj[upper]
        lo = np.minimum(min_id[ii], min_id[jj])
        hi = np.maximum(min_id[ii], min_id[jj])
        pick = np.lexsort((hi, lo))[0]
        p, q = int(ii[pick]), int(jj[pick])
        if min_id[q] < min_id[p]:
            p, q = q, p

        merges.append(Merge(node[p], node[q], float(m)))
        node[p] = n + step
        min_id[p] = min(min_id[p], min_id[q])

        if linkage == "average":
            total[p] += total[q]
            total[:, p] = total[p]
            size[p] += size[q]
            row = total[p] / (size[p] * size)
        elif linkage == "single":
            row = np.minimum(link[p], link[q])
        else:
            row = np.maximum(link[p], link[q])
        active[q] = False
        row[~active] = np.inf
        row[p] = np.inf
        link[p] = row
        link[:, p] = row
        link[q] = np.inf
        link[:, q] = np.inf

    return Dendrogram(leaves, tuple(merges))


def cut_dendrogram(tree: Dendrogram, t1: float) -> list[SimilarityCluster]:
    """Keep merges strictly below ``t1 * D``; return the resulting components.

    Clusters are ordered by their smallest seq_id. If ``D == 0`` every leaf
    lands in one cluster.
    """
    if not t1 > 0:
        raise ValueError(f"T1 must be positive, got {t1}")
    n = len(tree.leaves)
    d_max = tree.max_height
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rep = list(range(n))  # node ref -> a leaf inside it
    threshold = t1 * d_max
    for m in tree.merges:
        rep.append(rep[m.left])
        if d_max == 0 or m.height < threshold:
            a, b = find(rep[m.left]), find(rep[m.right])
            if a != b:
                parent[max(a, b)] = min(a, b)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(tree.leaves[i])
    clusters = [SimilarityCluster(tuple(sorted(g))) for g in groups.values()]
    return sorted(clusters, key=lambda c: c.member_ids[0])
