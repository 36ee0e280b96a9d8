"""Exact cosine nearest neighbors over ingested sentence embeddings.

Embeddings are L2-normalized once at load, so cosine similarity is a dot
product.  Search is exact brute force, blocked over queries to bound
memory; at this tool's dataset sizes exactness is affordable and removes
any index-approximation error from the analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingEmbeddings, ZeroVector
from .ingestion import ProjectState

QUERY_BLOCK_ROWS = 512


@dataclass(frozen=True)
class NeighborList:
    query_split: str
    query_id: int
    target_split: str
    neighbors: tuple[tuple[int, float], ...]  # (id, cosine similarity), descending

    @property
    def top_similarity(self) -> float | None:
        return self.neighbors[0][1] if self.neighbors else None


def _require_embeddings(state: ProjectState, split: str) -> np.ndarray:
    if split not in state.embeddings:
        raise MissingEmbeddings(f"no embeddings loaded for split {split!r}")
    return state.embeddings[split]


def nearest_neighbors(
    query_vector: np.ndarray,
    target: np.ndarray,
    k: int,
    exclude_id: int | None = None,
) -> tuple[tuple[int, float], ...]:
    """Exact top-k by cosine similarity against a normalized target matrix.

    Ties break toward the lower id; similarities are clamped into [-1, 1]
    to absorb rounding.
    """
    query_vector = np.asarray(query_vector, dtype=np.float64)
    norm = float(np.linalg.norm(query_vector))
    if norm == 0.0:
        raise ZeroVector("cannot rank neighbors of a zero embedding")
    sims = target @ (query_vector / norm)
    if exclude_id is not None:
        sims = sims.copy()
        sims[exclude_id] = -np.inf
    # stable sort on descending similarity keeps ascending-id order on ties
    order = np.argsort(-sims, kind="stable")[:k]
    return tuple(
        (int(i), float(np.clip(sims[i], -1.0, 1.0))) for i in order if np.isfinite(sims[i])
    )


def neighbor_table(
    state: ProjectState, query_split: str, target_split: str, k: int
) -> list[NeighborList]:
    """Neighbor lists for every utterance of one split against another.

    Within the same split each query excludes itself.  Computed in query
    blocks; results are deterministic and cacheable.
    """
    queries = _require_embeddings(state, query_split)
    target = _require_embeddings(state, target_split)
    same = query_split == target_split
    n = queries.shape[0]
    out: list[NeighborList] = []
    for start in range(0, n, QUERY_BLOCK_ROWS):
        stop = min(start + QUERY_BLOCK_ROWS, n)
        sims = queries[start:stop] @ target.T
        if same:
            for i in range(start, stop):
                sims[i - start, i] = -np.inf
        order = np.argsort(-sims, axis=1, kind="stable")[:, :k]
        for local, qid in enumerate(range(start, stop)):
            if float(np.linalg.norm(queries[qid])) == 0.0:
                raise ZeroVector(
                    f"{query_split}[{qid}]: cannot rank neighbors of a zero embedding"
                )
            neighbors = tuple(
                (int(j), float(np.clip(sims[local, j], -1.0, 1.0)))
                for j in order[local]
                if np.isfinite(sims[local, j])
            )
            out.append(NeighborList(query_split, qid, target_split, neighbors))
    return out


def similarity_tags(
    neighbors_by_target: dict[str, NeighborList],
    label: str,
    labels_by_split: dict[str, list[str]],
    tau_close: float,
    tau_same: float,
) -> frozenset[str]:
    """Dissimilarity-family tags for one utterance.

    no_close_X fires when the best similarity against split X is below
    tau_close (or no neighbor exists); conflicting_neighbors_X fires when
    the share of same-label neighbors is below tau_same.
    """
    tags = set()
    for target_split, nl in neighbors_by_target.items():
        suffix = target_split
        top = nl.top_similarity
        if top is None or top < tau_close:
            tags.add(f"no_close_{suffix}")
        if nl.neighbors:
            target_labels = labels_by_split[target_split]
            same = sum(1 for nid, _ in nl.neighbors if target_labels[nid] == label)
            if same / len(nl.neighbors) < tau_same:
                tags.add(f"conflicting_neighbors_{suffix}")
    return frozenset(tags)
