from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

from config import Config
from schemas.graph import Graph
from schemas.operator import OperatorSpec
from schemas.run_config import RunConfig
from services.approximation_service import (
    convergence_curve,
    curve_to_csv,
    make_target,
    plot_curve,
    poly_fit,
    rational_fit,
)
from services.bench_service import bench_to_csv, run_bench
from services.diagnostics_service import smoothing_trajectory, trajectory_to_csv
from services.graph_service import load_edge_list, make_rng
from services.operator_zoo import (
    OperatorZoo,
    apply_spatial,
    apply_spectral,
    propagation,
    spectral_kind,
    verify_equivalence,
)
from services.spectral_service import get_basis, is_bipartite
from services.walk_sampler import cooccurrence, corpus_to_text, sample_walks, sample_walks_2nd
from utils.errors import ParameterError
from utils.io import load_features, matrix_to_csv, rows_to_csv
from utils.logger import logger

DEFAULT_FEATURES = 8

FIT_HEADER = ['method', 'num_degree', 'den_degree', 'max_error', 'max_error_windowed', 'iterations']


class FilterPipeline:
    """Runs lab commands end to end: load inputs, call the services, render artifacts"""

    def __init__(self):
        try:
            Config.validate_config()
            self.zoo = OperatorZoo()
            logger.info("Filter pipeline initialized successfully")
        except Exception as e:
            logger.error(f"Error initializing filter pipeline: {e}")
            raise

    def _failure(self, command: str, error: Exception, **context) -> Dict[str, Any]:
        logger.log_error_with_context(error, {'command': command, **context})
        return {
            'success': False,
            'command': command,
            'error': str(error),
            'timestamp': datetime.now().isoformat(),
        }

    def _success(self, command: str, **payload) -> Dict[str, Any]:
        return {'success': True, 'command': command, 'timestamp': datetime.now().isoformat(), **payload}

    def _load_graph(self, cfg: RunConfig) -> Graph:
        if not cfg.graph:
            raise ParameterError(f"command '{cfg.command}' requires --graph")
        return load_edge_list(cfg.graph)

    def _load_features(self, cfg: RunConfig, g: Graph) -> np.ndarray:
        if cfg.features:
            return load_features(cfg.features)
        logger.info(f"No --features given; drawing {DEFAULT_FEATURES} standard-normal columns (seed={cfg.seed})")
        return make_rng(cfg.seed).standard_normal((g.n, DEFAULT_FEATURES))

    def _operator(self, cfg: RunConfig, name: Optional[str] = None) -> OperatorSpec:
        name = name or cfg.op
        if name is None:
            if cfg.norm is None:
                raise ParameterError("an operator (--op) or a normalization (--norm) is required")
            return propagation(cfg.norm)
        spec = self.zoo.build(name, **(cfg.params if name == cfg.op else {}))
        if cfg.norm is not None and cfg.norm != spec.norm_kind:
            spec = spec.model_copy(update={'norm_kind': cfg.norm})
        return spec

    def list_operators(self) -> Dict[str, Any]:
        table = self.zoo.catalog_table()
        return self._success('list', operators=self.zoo.names(), artifact=table)

    def apply(self, cfg: RunConfig) -> Dict[str, Any]:
        """Filter the features with one operator through the chosen route"""
        try:
            g = self._load_graph(cfg)
            X = self._load_features(cfg, g)
            spec = self._operator(cfg)
            if cfg.route == 'spectral':
                Z = apply_spectral(spec, get_basis(g, spectral_kind(spec)), X)
            else:
                Z = apply_spatial(spec, g, X)
            logger.info(f"Applied {spec.name} ({cfg.route}) to {X.shape[0]}x{X.shape[1]} features")
            return self._success('apply', operator=spec.name, route=cfg.route, matrix=Z,
                                 artifact=matrix_to_csv(Z))
        except (ValueError, OSError) as e:
            return self._failure('apply', e, graph=cfg.graph, op=cfg.op)

    def verify(self, cfg: RunConfig) -> Dict[str, Any]:
        """Spatial vs spectral check for one operator, or every registered operator"""
        try:
            g = self._load_graph(cfg)
            X = self._load_features(cfg, g)
            names: List[str] = [cfg.op] if cfg.op else self.zoo.names()
            bipartite = is_bipartite(g)
            reports = []
            for name in names:
                report = verify_equivalence(self._operator(cfg, name), g, X, tol=cfg.tol, bipartite=bipartite)
                reports.append(report.to_json_dict())
                if not report.passed:
                    logger.warning(f"{name}: max_err {report.max_err:.3e} exceeds tol {cfg.tol:g}")

            passed = sum(1 for report in reports if report['pass'])
            logger.log_run_stats({'command': 'verify', 'operators': len(reports), 'passed': passed,
                                  'failed': len(reports) - passed, 'bipartite': bipartite})
            return self._success('verify', reports=reports, all_passed=passed == len(reports), artifact=reports)
        except (ValueError, OSError) as e:
            return self._failure('verify', e, graph=cfg.graph, op=cfg.op)

    def approximate(self, cfg: RunConfig) -> Dict[str, Any]:
        """Fit the target with the requested fitters, or sweep a budget list"""
        try:
            target = make_target(cfg.target)
            if cfg.budgets:
                curve = convergence_curve(target, cfg.budgets)
                if cfg.plot:
                    plot_curve(curve, cfg.plot)
                return self._success('approx', summary=curve.summary(), artifact=curve_to_csv(curve))

            poly, rational = cfg.poly, cfg.rational
            if poly is None and rational is None:
                poly, rational = 8, (4, 4)
            fits = []
            if poly is not None:
                fits.append(poly_fit(target, poly))
            if rational is not None:
                fits.append(rational_fit(target, *rational))

            rows = [[fit.method, fit.degrees[0], fit.degrees[1], fit.max_error, fit.max_error_windowed,
                     fit.iterations] for fit in fits]
            logger.info(f"Approximated {target.kind}: " +
                        ', '.join(f"{fit.method}{fit.degrees}={fit.max_error_windowed:.3e}" for fit in fits))
            return self._success('approx', fits=fits, artifact=rows_to_csv(FIT_HEADER, rows))
        except (ValueError, OSError) as e:
            return self._failure('approx', e, target=cfg.target)

    def oversmooth(self, cfg: RunConfig) -> Dict[str, Any]:
        """Trajectory of row spread, energy and stationary distance over k applications"""
        try:
            g = self._load_graph(cfg)
            X = self._load_features(cfg, g)
            spec = self._operator(cfg)
            trajectory = smoothing_trajectory(spec, g, X, cfg.k)
            return self._success('oversmooth', operator=spec.name, final=trajectory.final.model_dump(),
                                 artifact=trajectory_to_csv(trajectory))
        except (ValueError, OSError) as e:
            return self._failure('oversmooth', e, graph=cfg.graph, op=cfg.op)

    def bench(self, cfg: RunConfig) -> Dict[str, Any]:
        try:
            records = run_bench(cfg.families, cfg.sizes, cfg.order, cfg.reps)
            return self._success('bench', records=len(records), artifact=bench_to_csv(records))
        except (ValueError, OSError) as e:
            return self._failure('bench', e, sizes=cfg.sizes)

    def sample(self, cfg: RunConfig) -> Dict[str, Any]:
        """Walk corpus: second-order when --p or --q is given, first-order otherwise"""
        try:
            g = self._load_graph(cfg)
            if cfg.p is not None or cfg.q is not None:
                corpus = sample_walks_2nd(g, cfg.p or 1.0, cfg.q or 1.0, cfg.length, cfg.walks, cfg.seed)
            else:
                corpus = sample_walks(g, cfg.length, cfg.walks, cfg.seed)
            logger.info(f"Sampled {corpus.walks.shape[0]} walks ({corpus.steps} steps, seed={cfg.seed})")
            if cfg.window:
                estimate = cooccurrence(corpus, cfg.window)
                return self._success('sample', walks=int(corpus.walks.shape[0]), steps=corpus.steps,
                                     artifact=matrix_to_csv(estimate.matrix))
            return self._success('sample', walks=int(corpus.walks.shape[0]), steps=corpus.steps,
                                 artifact=corpus_to_text(corpus))
        except (ValueError, OSError) as e:
            return self._failure('sample', e, graph=cfg.graph)

    def run(self, cfg: RunConfig) -> Dict[str, Any]:
        if cfg.command == 'list':
            return self.list_operators()
        handler = {
            'apply': self.apply,
            'verify': self.verify,
            'approx': self.approximate,
            'oversmooth': self.oversmooth,
            'bench': self.bench,
            'sample': self.sample,
        }[cfg.command]
        return handler(cfg)
