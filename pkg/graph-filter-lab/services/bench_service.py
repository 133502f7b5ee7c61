"""Timing harness for the linear / polynomial / rational operator families."""

import statistics
import time
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import numpy.polynomial.polynomial as npoly
from scipy.special import comb

from config import Config
from schemas.bench import BENCH_HEADER, BenchRecord
from schemas.graph import Graph
from schemas.operator import OperatorSpec
from services.graph_service import erdos_renyi_graph, make_rng
from services.operator_zoo import apply_spatial, make_linear, make_polynomial, make_rational
from utils.errors import ParameterError
from utils.io import rows_to_csv
from utils.logger import logger

FAMILIES = ('linear', 'polynomial', 'rational')

MIN_REPS = 3
# Sub-microsecond medians are below timer resolution
MIN_MEDIAN_SECONDS = 1e-6
MAX_INNER_LOOPS = 1_000_000


def make_workload(n: int, seed: int = Config.BENCH_SEED, avg_degree: float = Config.BENCH_DEGREE,
                  features: int = Config.BENCH_FEATURES) -> Tuple[Graph, np.ndarray]:
    """Seeded Erdos-Renyi graph and standard-normal features; identical across runs"""
    graph = erdos_renyi_graph(n, avg_degree, seed)
    X = make_rng(seed + 1).standard_normal((n, features))
    return graph, X


def family_spec(family: str, K: int) -> OperatorSpec:
    """gcn for linear, sgc(K) for polynomial, a degree-(K, K) rational over renorm-sym"""
    if family == 'linear':
        return make_linear('gcn')
    if family == 'polynomial':
        return make_polynomial('sgc', K=K)
    if family == 'rational':
        numerator = comb(K, np.arange(K + 1)) / 2.0 ** K
        denominator = npoly.polypow([1.0, -0.5], K)
        return make_rational('rationalnet', p=numerator, q=denominator)
    raise ParameterError(f"unknown bench family '{family}'; expected one of {FAMILIES}")


def time_call(fn: Callable[[], object], reps: int) -> Tuple[float, int]:
    """Median seconds per call after a discarded warm-up; inner loops grow until above timer resolution"""
    fn()
    inner = 1
    while True:
        samples = []
        for _ in range(reps):
            start = time.perf_counter()
            for _ in range(inner):
                fn()
            samples.append((time.perf_counter() - start) / inner)
        median = statistics.median(samples)
        if median >= MIN_MEDIAN_SECONDS or inner >= MAX_INNER_LOOPS:
            return max(median, np.finfo(float).tiny), inner
        inner *= 10
        logger.debug(f"Median {median:.2e}s below timer resolution, raising inner loops to {inner}")


def _density(g: Graph) -> float:
    if g.n < 2:
        return 0.0
    return 2.0 * len(g.edges) / (g.n * (g.n - 1))


def _check_ordering(records: List[BenchRecord]) -> bool:
    largest = max(record.n for record in records)
    times: Dict[str, float] = {r.family: r.median_seconds for r in records if r.n == largest}
    ordered = [times[f] for f in FAMILIES if f in times]
    if all(a <= b for a, b in zip(ordered, ordered[1:])):
        return True
    logger.warning(f"Bench ordering inverted at n={largest}: {times}")
    return False


def run_bench(families: Sequence[str], sizes: Sequence[int], K: int, reps: int = MIN_REPS) -> List[BenchRecord]:
    """Time every (family, n) pair on the shared seeded workload"""
    sizes = [int(n) for n in sizes]
    if reps < MIN_REPS:
        raise ParameterError(f"reps must be >= {MIN_REPS}, got {reps}")
    if K < 1:
        raise ParameterError(f"order K must be >= 1, got {K}")
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ParameterError(f"sizes must be non-empty and strictly ascending, got {sizes}")
    specs = {family: family_spec(family, K) for family in families}

    records: List[BenchRecord] = []
    for n in sizes:
        graph, X = make_workload(n)
        density = _density(graph)
        for family, spec in specs.items():
            median, inner = time_call(lambda: apply_spatial(spec, graph, X), reps)
            records.append(BenchRecord(family=family, n=n, F=X.shape[1], K=K, median_seconds=median,
                                       reps=reps, density=density))
            logger.info(f"Bench {family} n={n} K={K}: median {median:.3e}s over {reps} reps (inner={inner})")

    _check_ordering(records)
    return records


def bench_to_csv(records: Sequence[BenchRecord]) -> str:
    return rows_to_csv(BENCH_HEADER, (record.as_row() for record in records))
