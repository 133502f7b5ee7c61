"""First- and second-order random walk sampling and empirical transition estimates.

Walks advance in lock-step: every step draws one uniform per walk and maps it
through a global cumulative weight array with searchsorted, so no Python loop
runs over walks.
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from schemas.graph import Graph, freeze_array
from schemas.sampler import TransitionEstimate, WalkCorpus
from services.graph_service import make_rng
from utils.errors import DegenerateInputError, ParameterError
from utils.io import write_text
from utils.logger import logger


def _checked_adjacency(g: Graph, length: int, min_length: int, per_node: int) -> sp.csr_matrix:
    if length < min_length:
        raise ParameterError(f"walk length must be >= {min_length}, got {length}")
    if per_node < 1:
        raise ParameterError(f"walks per node must be >= 1, got {per_node}")
    isolated = np.flatnonzero(np.asarray(g.degrees) <= 0)
    if isolated.size:
        node = int(isolated[0])
        raise DegenerateInputError(f"node {node} is isolated; a walk cannot leave it", node=node)
    A = sp.csr_matrix(g.adjacency)
    A.sort_indices()
    return A


def _draw(rng: np.random.Generator, cumulative: np.ndarray, starts: np.ndarray, stops: np.ndarray) -> np.ndarray:
    """Pick one slot in [starts, stops) per row, proportional to the slot weights"""
    base = np.where(starts > 0, cumulative[np.maximum(starts - 1, 0)], 0.0)
    top = cumulative[stops - 1]
    targets = base + rng.random(starts.shape[0]) * (top - base)
    slots = np.searchsorted(cumulative, targets, side='right')
    return np.clip(slots, starts, stops - 1)


def _start_nodes(n: int, per_node: int) -> np.ndarray:
    # walk index outer, node inner
    return np.tile(np.arange(n, dtype=np.int64), per_node)


def _first_step(rng, A: sp.csr_matrix, cumulative: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Edge slots (csr positions) of one first-order step from each current node"""
    return _draw(rng, cumulative, A.indptr[current], A.indptr[current + 1])


def sample_walks(g: Graph, length: int, per_node: int, seed: int) -> WalkCorpus:
    """First-order walks: each step picks a neighbor with probability proportional to edge weight"""
    A = _checked_adjacency(g, length, 2, per_node)
    rng = make_rng(seed)
    cumulative = np.cumsum(A.data)

    walks = np.empty((g.n * per_node, length), dtype=np.int64)
    walks[:, 0] = _start_nodes(g.n, per_node)
    for step in range(1, length):
        slots = _first_step(rng, A, cumulative, walks[:, step - 1])
        walks[:, step] = A.indices[slots]

    logger.debug(f"Sampled {walks.shape[0]} first-order walks of length {length} (seed={seed})")
    return WalkCorpus(walks=walks, n=g.n, length=length, per_node=per_node, seed=seed)


def _second_order_tables(A: sp.csr_matrix, p: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per directed edge t->v, the biased weights over v's neighbors x.

    Returns (offsets, cumulative) where the slots of edge e span
    [offsets[e], offsets[e] + deg(v)) and follow v's csr neighbor order.
    """
    indptr, indices, data = A.indptr, A.indices, A.data
    heads = indices  # v for each csr slot e = (t -> v)
    out_degree = np.diff(indptr)
    offsets = np.concatenate([[0], np.cumsum(out_degree[heads])]).astype(np.int64)
    weights = np.empty(offsets[-1], dtype=np.float64)

    for t in range(A.shape[0]):
        t_neighbors = indices[indptr[t]:indptr[t + 1]]
        for e in range(indptr[t], indptr[t + 1]):
            v = indices[e]
            x = indices[indptr[v]:indptr[v + 1]]
            bias = np.where(np.isin(x, t_neighbors), 1.0, 1.0 / q)
            bias[x == t] = 1.0 / p
            weights[offsets[e]:offsets[e + 1]] = data[indptr[v]:indptr[v + 1]] * bias

    return offsets, np.cumsum(weights)


def sample_walks_2nd(g: Graph, p: float, q: float, length: int, per_node: int, seed: int) -> WalkCorpus:
    """Second-order walks: from t->v the walker moves to x with weight w_vx / p if x = t,
    w_vx if x is adjacent to t, and w_vx / q otherwise. The first step is first-order.
    """
    if not (np.isfinite(p) and p > 0 and np.isfinite(q) and q > 0):
        raise ParameterError(f"p and q must be > 0, got p={p}, q={q}")
    A = _checked_adjacency(g, length, 3, per_node)
    rng = make_rng(seed)
    offsets, edge_cumulative = _second_order_tables(A, float(p), float(q))

    walks = np.empty((g.n * per_node, length), dtype=np.int64)
    walks[:, 0] = _start_nodes(g.n, per_node)
    edge = _first_step(rng, A, np.cumsum(A.data), walks[:, 0])
    walks[:, 1] = A.indices[edge]

    for step in range(2, length):
        slots = _draw(rng, edge_cumulative, offsets[edge], offsets[edge + 1])
        current = walks[:, step - 1]
        edge = A.indptr[current] + (slots - offsets[edge])
        walks[:, step] = A.indices[edge]

    logger.debug(f"Sampled {walks.shape[0]} second-order walks (p={p}, q={q}, seed={seed})")
    return WalkCorpus(walks=walks, n=g.n, length=length, per_node=per_node, seed=seed, p=float(p), q=float(q))


def non_edge_steps(corpus: WalkCorpus, g: Graph) -> int:
    """Number of corpus steps that do not follow a graph edge"""
    sources, targets = corpus.transitions()
    weights = np.asarray(g.adjacency.tocsr()[sources, targets]).ravel()
    return int(np.count_nonzero(weights <= 0))


def _step_counts(sources: np.ndarray, targets: np.ndarray, n: int) -> np.ndarray:
    counts = sp.coo_matrix((np.ones(sources.shape[0]), (sources, targets)), shape=(n, n))
    return counts.toarray()


def _row_normalize(counts: np.ndarray) -> Tuple[np.ndarray, list]:
    totals = counts.sum(axis=1)
    unvisited = np.flatnonzero(totals == 0)
    matrix = np.zeros_like(counts)
    visited = totals > 0
    matrix[visited] = counts[visited] / totals[visited, None]
    return matrix, [int(i) for i in unvisited]


def empirical_transition(corpus: WalkCorpus) -> TransitionEstimate:
    """Row-normalized step counts of the corpus"""
    sources, targets = corpus.transitions()
    if sources.size == 0:
        raise ParameterError("corpus has no steps")
    matrix, unvisited = _row_normalize(_step_counts(sources, targets, corpus.n))
    if unvisited:
        logger.warning(f"{len(unvisited)} rows never visited by the corpus: {unvisited[:10]}")
    return TransitionEstimate(matrix=freeze_array(matrix), unvisited=unvisited, steps=int(sources.size))


def cooccurrence(corpus: WalkCorpus, window: int) -> TransitionEstimate:
    """Row-normalized counts of (w_i, w_{i+r}) for r = 1..window over full windows only"""
    if window < 1:
        raise ParameterError(f"window must be >= 1, got {window}")
    if window >= corpus.length:
        raise ParameterError(f"window {window} does not fit in walks of length {corpus.length}")

    anchors = corpus.walks[:, :corpus.length - window]
    sources = np.concatenate([anchors.ravel()] * window)
    targets = np.concatenate([corpus.walks[:, r:corpus.length - window + r].ravel() for r in range(1, window + 1)])
    matrix, unvisited = _row_normalize(_step_counts(sources, targets, corpus.n))
    return TransitionEstimate(matrix=freeze_array(matrix), unvisited=unvisited, steps=int(anchors.size))


def tv_distance(P, Q) -> np.ndarray:
    """Per-row total variation distance 0.5 * sum |P - Q|"""
    P, Q = np.asarray(P, dtype=np.float64), np.asarray(Q, dtype=np.float64)
    if P.shape != Q.shape:
        raise ParameterError(f"shape mismatch {P.shape} vs {Q.shape}")
    return 0.5 * np.abs(P - Q).sum(axis=1)


def corpus_to_text(corpus: WalkCorpus) -> str:
    return ''.join(line + '\n' for line in corpus.lines())


def write_corpus(corpus: WalkCorpus, path: Optional[Union[str, Path]] = None) -> None:
    """One walk per line, space-separated node ids"""
    write_text(path, corpus_to_text(corpus))
