"""Graph ingestion, adjacency construction and the normalization family.

Every normalized matrix stays sparse; only the spectral engine densifies.
"""

import hashlib
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from config import Config
from schemas.graph import Graph, NormalizedMatrix, NORM_KINDS, SYMMETRIC_KINDS, freeze_array
from utils.errors import (
    DegenerateInputError,
    DimensionMismatchError,
    DuplicateEdgeError,
    EdgeListParseError,
    ParameterError,
    SelfLoopError,
    UnsupportedKindError,
)
from utils.logger import logger

EdgeTriple = Tuple[int, int, float]

RENORM_KINDS = frozenset({'renorm-left', 'renorm-right', 'renorm-sym', 'renorm-sym-laplacian'})

# Kinds that divide by the raw degree and therefore need a zero-degree policy
DEGREE_DIVIDING_KINDS = frozenset({'rw-left', 'rw-right', 'sym', 'sym-laplacian', 'rw-laplacian'})


def build_graph(n: int, edges: Iterable[Sequence[float]]) -> Graph:
    """Build a Graph from (u, v[, w]) tuples, enforcing the edge-list invariants"""
    if n < 1:
        raise ParameterError(f"graph needs at least one node, got n={n}")

    triples: List[EdgeTriple] = []
    seen = set()
    for edge in edges:
        u, v = int(edge[0]), int(edge[1])
        w = float(edge[2]) if len(edge) > 2 else 1.0
        if not (0 <= u < n and 0 <= v < n):
            raise ParameterError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise ParameterError(f"self-loop on node {u} in raw edge list")
        if not (np.isfinite(w) and w > 0):
            raise ParameterError(f"edge ({u}, {v}) has non-positive weight {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParameterError(f"duplicate undirected edge {key}")
        seen.add(key)
        triples.append((u, v, w))

    if triples:
        rows = np.array([t[0] for t in triples], dtype=np.int64)
        cols = np.array([t[1] for t in triples], dtype=np.int64)
        weights = np.array([t[2] for t in triples], dtype=np.float64)
        adjacency = sp.coo_matrix(
            (np.concatenate([weights, weights]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(n, n),
        ).tocsr()
    else:
        adjacency = sp.csr_matrix((n, n), dtype=np.float64)

    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    return Graph(n=n, edges=tuple(triples), degrees=freeze_array(degrees), adjacency=adjacency)


def load_edge_list(path: Union[str, Path]) -> Graph:
    """Parse a `u<TAB>v[<TAB>w]` edge list with `#` comments"""
    path = Path(path)
    edges: List[EdgeTriple] = []
    seen = set()

    with path.open('r', encoding='utf-8') as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue

            parts = line.split('\t')
            if len(parts) not in (2, 3):
                raise EdgeListParseError(line_number, f"expected 'u<TAB>v[<TAB>w]', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise EdgeListParseError(line_number, f"non-numeric field in {line!r}")

            if u < 0 or v < 0:
                raise EdgeListParseError(line_number, f"negative node id in {line!r}")
            if u == v:
                raise SelfLoopError(line_number, f"self-loop on node {u}")
            if not (np.isfinite(w) and w > 0):
                raise EdgeListParseError(line_number, f"weight must be positive, got {w}")

            key = (min(u, v), max(u, v))
            if key in seen:
                raise DuplicateEdgeError(line_number, f"duplicate edge {u}-{v}")
            seen.add(key)
            edges.append((u, v, w))

    if not edges:
        raise EdgeListParseError(0, f"no edges found in {path}")

    n = max(max(u, v) for u, v, _ in edges) + 1
    graph = build_graph(n, edges)
    logger.info(f"Loaded graph from {path}: {graph.describe()}")
    return graph


def as_feature_matrix(X, n: Optional[int] = None) -> np.ndarray:
    """Coerce X to a float64 N x F matrix, checking the row count when n is given"""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatchError(f"feature matrix must be 2-D, got shape {X.shape}")
    if n is not None and X.shape[0] != n:
        raise DimensionMismatchError(f"feature matrix has {X.shape[0]} rows, graph has {n} nodes")
    return X


def _inverse_degrees(g: Graph, kind: str, policy: str, power: float) -> np.ndarray:
    degrees = np.asarray(g.degrees)
    zero = np.flatnonzero(degrees <= 0)
    if zero.size and policy == 'strict':
        node = int(zero[0])
        raise DegenerateInputError(
            f"node {node} has zero degree; kind '{kind}' divides by it (policy 'strict')", node=node
        )
    inverse = np.zeros_like(degrees)
    positive = degrees > 0
    inverse[positive] = degrees[positive] ** (-power)
    return inverse


def normalize(g: Graph, kind: str, policy: Optional[str] = None) -> NormalizedMatrix:
    """Materialize one normalization of the graph's adjacency (sparse)"""
    if kind not in NORM_KINDS:
        raise UnsupportedKindError(f"unknown normalization kind '{kind}'")
    policy = policy or Config.ZERO_DEGREE_POLICY
    if policy not in Config.ZERO_DEGREE_POLICIES:
        raise ParameterError(f"unknown zero-degree policy '{policy}'")

    A = g.adjacency.tocsr()
    identity = sp.identity(g.n, format='csr', dtype=np.float64)

    if kind == 'raw-adjacency':
        M = A.copy()
    elif kind == 'laplacian':
        M = sp.diags(np.asarray(g.degrees)) - A
    elif kind in RENORM_KINDS:
        A_tilde = A + identity
        d_tilde = np.asarray(g.degrees) + 1.0
        if kind == 'renorm-left':
            M = sp.diags(1.0 / d_tilde) @ A_tilde
        elif kind == 'renorm-right':
            M = A_tilde @ sp.diags(1.0 / d_tilde)
        else:
            scale = sp.diags(1.0 / np.sqrt(d_tilde))
            M = scale @ A_tilde @ scale
            if kind == 'renorm-sym-laplacian':
                M = identity - M
    else:
        if kind in ('rw-left', 'rw-right', 'rw-laplacian'):
            inverse = sp.diags(_inverse_degrees(g, kind, policy, 1.0))
            M = A @ inverse if kind == 'rw-right' else inverse @ A
            if kind == 'rw-laplacian':
                M = identity - M
        else:
            scale = sp.diags(_inverse_degrees(g, kind, policy, 0.5))
            M = scale @ A @ scale
            if kind == 'sym-laplacian':
                M = identity - M

    M = sp.csr_matrix(M)
    if kind in SYMMETRIC_KINDS:
        # Remove one-ulp asymmetry from the two-sided scaling
        M = sp.csr_matrix((M + M.T) * 0.5)
    M.eliminate_zeros()
    return NormalizedMatrix(kind=kind, values=M)


def matrix_power_apply(M: NormalizedMatrix, k: int, X) -> np.ndarray:
    """M^k X by k successive sparse products; M^k is never formed"""
    if k < 0:
        raise ParameterError(f"power must be non-negative, got {k}")
    Z = as_feature_matrix(X, M.n).copy()
    for _ in range(k):
        Z = M.values @ Z
    return Z


def graph_hash(g: Graph) -> str:
    """Content hash of (n, edge list) used as cache key"""
    digest = hashlib.sha256()
    digest.update(str(g.n).encode('utf-8'))
    if g.edges:
        digest.update(np.asarray(g.edges, dtype=np.float64).tobytes())
    return digest.hexdigest()


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _sample_new_edges(rng: np.random.Generator, n: int, count: int, seen: set) -> List[Tuple[int, int]]:
    added: List[Tuple[int, int]] = []
    attempts = 0
    while len(added) < count and attempts < 100:
        attempts += 1
        batch = max(2 * (count - len(added)), 16)
        u = rng.integers(0, n, size=batch)
        v = rng.integers(0, n, size=batch)
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            added.append(key)
            if len(added) == count:
                break
    return added


def random_connected_graph(n: int, avg_degree: float, seed: int) -> Graph:
    """Random spanning tree plus uniformly sampled extra edges, seeded"""
    if n < 2:
        raise ParameterError("a connected random graph needs n >= 2")
    rng = make_rng(seed)
    seen = set()
    edges: List[Tuple[int, int]] = []
    for node in range(1, n):
        parent = int(rng.integers(0, node))
        seen.add((parent, node))
        edges.append((parent, node))

    max_edges = n * (n - 1) // 2
    target = min(max_edges, int(round(n * avg_degree / 2.0)))
    edges.extend(_sample_new_edges(rng, n, max(0, target - len(edges)), seen))
    return build_graph(n, edges)


def erdos_renyi_graph(n: int, avg_degree: float, seed: int) -> Graph:
    """G(n, p) with p chosen for the expected degree, seeded"""
    if n < 2:
        raise ParameterError("an Erdos-Renyi graph needs n >= 2")
    rng = make_rng(seed)
    max_edges = n * (n - 1) // 2
    p = min(1.0, avg_degree / (n - 1))
    count = int(rng.binomial(max_edges, p))
    edges = _sample_new_edges(rng, n, count, set())
    return build_graph(n, edges)
