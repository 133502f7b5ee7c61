"""Small graphs and seeded signals shared by the test suites."""

from pathlib import Path

import numpy as np

from services.graph_service import build_graph, make_rng, random_connected_graph

SAMPLES_DIR = Path(__file__).resolve().parents[1] / 'samples'


def k2():
    return build_graph(2, [(0, 1)])


def p3():
    return build_graph(3, [(0, 1), (1, 2)])


def triangle():
    return build_graph(3, [(0, 1), (1, 2), (0, 2)])


def star(leaves: int = 4):
    return build_graph(leaves + 1, [(0, leaf) for leaf in range(1, leaves + 1)])


def path(n: int):
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int):
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def ten_node():
    """Connected, non-bipartite, weighted: ring plus chords"""
    edges = [(i, i + 1) for i in range(9)] + [(0, 9), (0, 2, 2.0), (3, 7), (4, 8, 0.5)]
    return build_graph(10, edges)


def random_graph(n: int, seed: int, avg_degree: float = 4.0):
    return random_connected_graph(n, avg_degree, seed)


def signal(n: int, features: int = 8, seed: int = 0) -> np.ndarray:
    return make_rng(seed).standard_normal((n, features))
