"""Density clustering of near-duplicate descriptions.

Candidates embed into a shared vector space; DBSCAN over cosine
distance (1 - cosine similarity) groups paraphrases, and the highest
scoring member of each cluster becomes its canonical representative.
Noise points are kept as their own singletons rather than dropped, so
a unique-but-correct description always survives deduplication.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidEps,
    LengthMismatch,
    ZeroNormVector,
)
from .model import EmbeddingVector

# Cluster id assigned to points that are not density-reachable from any core.
NOISE = -1


@dataclass(frozen=True)
class ClusterAssignment:
    candidate_index: int
    cluster_id: int  # >= 0, or NOISE


@dataclass(frozen=True)
class CanonicalSet:
    """One representative index per cluster, plus each noise singleton."""

    representatives: tuple[int, ...]


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    va, vb = a.as_array(), b.as_array()
    na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormVector("cosine similarity undefined for a zero vector")
    return float(np.dot(va, vb) / (na * nb))


def _cosine_distance_matrix(embeddings: list[EmbeddingVector]) -> np.ndarray:
    dims = {e.dim for e in embeddings}
    if len(dims) > 1:
        raise DimensionMismatch(f"embeddings have mixed dims: {sorted(dims)}")
    mat = np.stack([e.as_array() for e in embeddings])
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ZeroNormVector("cosine distance undefined for a zero vector")
    unit = mat / norms[:, None]
    sim = unit @ unit.T
    # numeric noise can push self-similarity past 1
    np.clip(sim, -1.0, 1.0, out=sim)
    return 1.0 - sim


def dbscan_cluster(
    embeddings: list[EmbeddingVector], eps: float, min_pts: int
) -> list[ClusterAssignment]:
    """Classic DBSCAN over cosine distance.

    A point's neighborhood includes itself; only core points (at least
    min_pts neighbors) expand. Seeds are taken in ascending index order
    so the labeling is deterministic: cluster ids increase with the
    index of their first core point, and a border point reachable from
    several clusters joins the earliest one.
    """
    if len(embeddings) == 0:
        raise EmptyInput("at least one embedding required")
    if eps <= 0:
        raise InvalidEps(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise InvalidEps(f"min_pts must be >= 1, got {min_pts}")

    n = len(embeddings)
    dist = _cosine_distance_matrix(embeddings)
    neighbors = [np.flatnonzero(dist[i] <= eps) for i in range(n)]
    is_core = [len(neighbors[i]) >= min_pts for i in range(n)]

    labels = [None] * n  # None = unvisited, NOISE or id once decided
    cluster_id = 0
    for seed in range(n):
        if labels[seed] is not None:
            continue
        if not is_core[seed]:
            labels[seed] = NOISE  # may be reclaimed later as a border point
            continue
        labels[seed] = cluster_id
        queue = list(neighbors[seed])
        qi = 0
        while qi < len(queue):
            p = int(queue[qi])
            qi += 1
            if labels[p] == NOISE:
                labels[p] = cluster_id  # border point reclaimed
            if labels[p] is not None and labels[p] != cluster_id:
                continue
            if labels[p] is None:
                labels[p] = cluster_id
            if is_core[p]:
                for q in neighbors[p]:
                    q = int(q)
                    if labels[q] is None or labels[q] == NOISE:
                        queue.append(q)
        cluster_id += 1

    return [ClusterAssignment(i, int(labels[i])) for i in range(n)]


def select_canonical(
    assignments: list[ClusterAssignment], scores: list[float]
) -> CanonicalSet:
    """Argmax-by-score representative per cluster; noise points stand alone.

    Ties break toward the lowest candidate index.
    """
    if len(assignments) != len(scores):
        raise LengthMismatch(
            f"{len(assignments)} assignments vs {len(scores)} scores"
        )
    best: dict[int, int] = {}  # cluster_id -> candidate index
    reps: list[int] = []
    for a in sorted(assignments, key=lambda a: a.candidate_index):
        if a.cluster_id == NOISE:
            reps.append(a.candidate_index)
            continue
        cur = best.get(a.cluster_id)
        if cur is None or scores[a.candidate_index] > scores[cur]:
            best[a.cluster_id] = a.candidate_index
    reps.extend(best.values())
    return CanonicalSet(representatives=tuple(sorted(reps)))
