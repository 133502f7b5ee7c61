"""Named graph filters with a spatial (sparse matrix) and a spectral (eigenbasis) route.

Every operator is an OperatorSpec Z = P(M) Q(M)^-1 X over one normalization M.
The spatial route evaluates P by Horner products and solves the Q system; the
spectral route scales graph Fourier coefficients by the induced response.
"""

import warnings
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.polynomial.chebyshev as ncheb
import numpy.polynomial.polynomial as npoly
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.stats import poisson

from config import Config
from schemas.graph import (
    EquivalenceReport,
    FeatureMatrix,
    Graph,
    NormalizedMatrix,
    PAIRED_LAPLACIAN,
    SYMMETRIC_KINDS,
    SpectralBasis,
)
from schemas.operator import OperatorSpec
from services.graph_service import as_feature_matrix, normalize
from services.spectral_service import apply_response, get_basis, is_bipartite, largest_eigenvalue
from utils.basis_cache import BasisCache
from utils.errors import (
    DimensionMismatchError,
    KindMismatchError,
    ParameterError,
    SingularOperatorError,
    SolverError,
)
from utils.logger import logger
from utils.polynomials import compose_linear, horner_apply, matrix_polynomial, trim

# Roots closer than this to the real axis count as real
ROOT_IMAG_TOL = 1e-9

LINEAR_KINDS = ('gcn', 'gcn-renorm', 'sage_mean', 'gin')
POLYNOMIAL_KINDS = ('chebnet', 'deepwalk', 'dcnn', 'gdc', 'node2vec', 'line_sdne', 'sgc')
RATIONAL_KINDS = ('auto_regressive', 'ppnp', 'arma', 'parwalks', 'rationalnet')


def _coefficients(values, what: str) -> np.ndarray:
    if values is None:
        raise ParameterError(f"{what} is required")
    coeffs = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ParameterError(f"{what} must be a non-empty coefficient list")
    if not np.all(np.isfinite(coeffs)):
        raise ParameterError(f"{what} must be finite")
    return coeffs


def _positive(value, what: str) -> float:
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise ParameterError(f"{what} must be > 0, got {value}")
    return value


def _spec(name: str, norm_kind: str, p, q=(1.0,), family: str = 'polynomial',
          params: Optional[Dict[str, Any]] = None) -> OperatorSpec:
    p = trim(p) if family != 'linear' else np.asarray(p, dtype=np.float64)
    return OperatorSpec(
        name=name,
        norm_kind=norm_kind,
        p_coeffs=tuple(float(c) for c in p),
        q_coeffs=tuple(float(c) for c in q),
        family=family,
        params=params or {},
    )


def check_denominator(q_coeffs: Sequence[float], name: str) -> None:
    """Reject a denominator with a real root in [-1, 1], the spectrum of every paired M"""
    q = trim(q_coeffs)
    if q.size == 1:
        if q[0] == 0.0:
            raise SingularOperatorError(f"{name}: denominator is identically zero")
        return
    roots = npoly.polyroots(q)
    real = roots[np.abs(roots.imag) <= ROOT_IMAG_TOL * np.maximum(1.0, np.abs(roots))].real
    inside = real[(real >= -1.0 - 1e-12) & (real <= 1.0 + 1e-12)]
    if inside.size:
        raise SingularOperatorError(f"{name}: denominator has a root at {inside[0]:.6g} inside [-1, 1]")


def _rational(name: str, norm_kind: str, p, q, params: Dict[str, Any]) -> OperatorSpec:
    p = _coefficients(p, f"{name} numerator")
    q = trim(_coefficients(q, f"{name} denominator"))
    if q[0] == 0.0:
        raise SingularOperatorError(f"{name}: denominator vanishes at 0 (q_0 = 0)")
    p, q = p / q[0], q / q[0]
    check_denominator(q, name)
    return _spec(name, norm_kind, p, q, family='rational', params=params)


def make_linear(kind: str, eps: float = 0.0, symmetric_scaling: bool = True) -> OperatorSpec:
    """One-hop operators: gcn, gcn-renorm, sage_mean and gin(eps)"""
    if kind == 'gcn':
        return _spec('gcn', 'renorm-sym', [1.0, 1.0], family='linear')
    if kind == 'gcn-renorm':
        return _spec('gcn-renorm', 'renorm-sym', [0.0, 1.0], family='linear')
    if kind == 'sage_mean':
        return _spec('sage_mean', 'sym', [1.0, 1.0], family='linear')
    if kind == 'gin':
        eps = float(eps)
        if not np.isfinite(eps) or eps < 0:
            raise ParameterError(f"gin eps must be >= 0, got {eps}")
        norm = 'sym' if symmetric_scaling else 'raw-adjacency'
        return _spec('gin', norm, [1.0 + eps, 1.0], family='linear',
                     params={'eps': eps, 'symmetric_scaling': bool(symmetric_scaling)})
    raise ParameterError(f"unknown linear operator '{kind}'")


def _chebnet(theta, lambda_max: float = 2.0, norm: str = 'sym') -> OperatorSpec:
    theta = _coefficients(theta, 'chebnet theta')
    lambda_max = _positive(lambda_max, 'chebnet lambda_max')
    # x = 2 lambda / lambda_max - 1 with lambda = 1 - mu
    in_x = ncheb.cheb2poly(theta)
    p = compose_linear(in_x, 2.0 / lambda_max - 1.0, -2.0 / lambda_max)
    return _spec('chebnet', norm, p, params={'theta': tuple(theta.tolist()), 'lambda_max': lambda_max})


def _gdc_coefficients(preset: str, alpha: float, s: float) -> Tuple[np.ndarray, Dict[str, Any]]:
    tail_mass, max_order = Config.GDC_TAIL_MASS, Config.GDC_MAX_ORDER

    if preset == 'ppr':
        alpha = float(alpha)
        if not (0.0 < alpha <= 1.0):
            raise ParameterError(f"gdc ppr alpha must lie in (0, 1], got {alpha}")
        tail = lambda K: (1.0 - alpha) ** (K + 1)
        term = lambda k: alpha * (1.0 - alpha) ** k
        params = {'preset': 'ppr', 'alpha': alpha}
    elif preset == 'heat':
        s = float(s)
        if not (np.isfinite(s) and s >= 0.0):
            raise ParameterError(f"gdc heat s must be >= 0, got {s}")
        tail = lambda K: float(poisson.sf(K, s)) if s > 0 else 0.0
        term = lambda k: float(poisson.pmf(k, s)) if s > 0 else float(k == 0)
        params = {'preset': 'heat', 's': s}
    else:
        raise ParameterError(f"unknown gdc preset '{preset}'")

    K = 0
    while tail(K) >= tail_mass:
        K += 1
        if K > max_order:
            raise ParameterError(f"gdc {preset} preset tail not convergent within {max_order} terms")
    return np.array([term(k) for k in range(K + 1)]), params


def make_polynomial(kind: str, **params) -> OperatorSpec:
    """Finite-order operators: chebnet, deepwalk, dcnn, gdc, node2vec, line_sdne, sgc"""
    if kind == 'chebnet':
        return _chebnet(params.get('theta'), params.get('lambda_max', 2.0), params.get('norm', 'sym'))

    if kind == 'deepwalk':
        t = int(params.get('t', 1))
        if t < 1:
            raise ParameterError(f"deepwalk window t must be >= 1, got {t}")
        return _spec('deepwalk', 'sym', np.full(t + 1, 1.0 / (t + 1)), params={'t': t})

    if kind == 'dcnn':
        w = _coefficients(params.get('w'), 'dcnn w')
        return _spec('dcnn', 'sym', np.concatenate([[0.0], w]), params={'w': tuple(w.tolist())})

    if kind == 'gdc':
        theta, preset = _gdc_coefficients(params.get('preset', 'ppr'), params.get('alpha', 0.15),
                                          params.get('s', 3.0))
        return _spec(f"gdc_{preset['preset']}", 'sym', theta, params=preset)

    if kind == 'node2vec':
        p = _positive(params.get('p', 1.0), 'node2vec p')
        q = _positive(params.get('q', 1.0), 'node2vec q')
        return _spec('node2vec', 'sym', [1.0 / p, 1.0 - 1.0 / q, 1.0 / q], params={'p': p, 'q': q})

    if kind == 'line_sdne':
        alpha = float(params.get('alpha', 0.0))
        if not np.isfinite(alpha) or alpha < 0:
            raise ParameterError(f"line_sdne alpha must be >= 0, got {alpha}")
        return _spec('line_sdne', 'sym', [0.0, 1.0, alpha], params={'alpha': alpha})

    if kind == 'sgc':
        K = int(params.get('K', 1))
        if K < 1:
            raise ParameterError(f"sgc K must be >= 1, got {K}")
        p = np.zeros(K + 1)
        p[K] = 1.0
        return _spec('sgc', 'renorm-sym', p, params={'K': K})

    raise ParameterError(f"unknown polynomial operator '{kind}'")


def make_rational(kind: str, **params) -> OperatorSpec:
    """Infinite-order operators realized as P(M) Q(M)^-1"""
    norm = params.get('norm', 'renorm-sym')

    if kind == 'auto_regressive':
        alpha = _positive(params.get('alpha', 1.0), 'auto_regressive alpha')
        return _rational('auto_regressive', norm, [1.0], [1.0 + alpha, -alpha], {'alpha': alpha})

    if kind == 'ppnp':
        alpha = float(params.get('alpha', 0.1))
        if not (0.0 < alpha <= 1.0):
            raise ParameterError(f"ppnp alpha must lie in (0, 1], got {alpha}")
        return _rational('ppnp', norm, [alpha], [1.0, -(1.0 - alpha)], {'alpha': alpha})

    if kind == 'arma':
        a, b = float(params.get('a', 0.5)), float(params.get('b', 0.5))
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ParameterError("arma a and b must be finite")
        return _rational('arma', norm, [b], [1.0, -a], {'a': a, 'b': b})

    if kind == 'parwalks':
        beta = _positive(params.get('beta', 1.0), 'parwalks beta')
        return _rational('parwalks', norm, [beta], [beta + 1.0, -1.0], {'beta': beta})

    if kind == 'rationalnet':
        p = _coefficients(params.get('p'), 'rationalnet P')
        q = _coefficients(params.get('q'), 'rationalnet Q')
        return _rational('rationalnet', norm, p, q, {'p': tuple(p.tolist()), 'q': tuple(q.tolist())})

    raise ParameterError(f"unknown rational operator '{kind}'")


def propagation(kind: str) -> OperatorSpec:
    """Plain one-step propagation M X over any normalization"""
    return _spec(f'propagate[{kind}]', kind, [0.0, 1.0], family='linear')


def as_polynomial(spec: OperatorSpec) -> OperatorSpec:
    if spec.family == 'rational' and spec.q_coeffs != (1.0,):
        raise ParameterError(f"{spec.name} has a non-trivial denominator; no polynomial form")
    return spec.model_copy(update={'family': 'polynomial'})


def as_rational(spec: OperatorSpec) -> OperatorSpec:
    return spec.model_copy(update={'family': 'rational'})


def stack(spec: OperatorSpec, k: int) -> OperatorSpec:
    """k layers of the same operator: P^k / Q^k"""
    if k < 1:
        raise ParameterError(f"stack depth must be >= 1, got {k}")
    if k == 1:
        return spec
    p = npoly.polypow(spec.p_coeffs, k)
    q = npoly.polypow(spec.q_coeffs, k)
    family = 'rational' if spec.family == 'rational' else 'polynomial'
    return _spec(f'{spec.name}^{k}', spec.norm_kind, p, q, family=family,
                 params={**spec.params, 'layers': k})


def is_lowpass(spec: OperatorSpec, lambdas, tol: float = 1e-12) -> bool:
    """Response is non-negative and non-increasing over the given frequencies"""
    values = spec.response(np.sort(np.asarray(lambdas, dtype=np.float64)))
    if not np.all(np.isfinite(values)):
        return False
    return bool(np.all(values >= -tol) and np.all(np.diff(values) <= tol))


def true_lambda_max(g: Graph, norm: str = 'sym', cap: Optional[int] = None) -> float:
    """Largest eigenvalue of the Laplacian paired with `norm`"""
    laplacian = PAIRED_LAPLACIAN.get(norm)
    if laplacian is None:
        raise KindMismatchError(f"kind '{norm}' has no paired Laplacian")
    return largest_eigenvalue(normalize(g, laplacian), cap=cap)


def _condition(dense: np.ndarray) -> float:
    with np.errstate(all='ignore'):
        return float(np.linalg.cond(dense))


def _interval_condition(q_coeffs) -> float:
    # max|Q| / min|Q| over [-1, 1], the spectral range of the paired adjacency kinds
    values = np.abs(npoly.polyval(np.linspace(-1.0, 1.0, 2001), q_coeffs))
    smallest = values.min()
    return float(values.max() / smallest) if smallest > 0 else float('inf')


def _iterative_solve(QM, rhs: np.ndarray, spd: bool) -> np.ndarray:
    n = QM.shape[0]
    operator = spla.LinearOperator(QM.shape, matvec=lambda v: QM @ v, dtype=np.float64)
    Z = np.empty_like(rhs)
    for j in range(rhs.shape[1]):
        if spd:
            column, info = spla.cg(QM, rhs[:, j], rtol=1e-12, atol=0.0, maxiter=10 * n)
        else:
            column, info = spla.gmres(operator, rhs[:, j], rtol=1e-12, atol=0.0,
                                      restart=min(n, 50), maxiter=10 * n)
        if info < 0:
            raise SolverError(f"iterative solver breakdown on column {j}")
        Z[:, j] = column
    return Z


def _solve_denominator(M: NormalizedMatrix, q_coeffs, rhs: np.ndarray,
                       cap: Optional[int]) -> np.ndarray:
    QM = matrix_polynomial(M.values, q_coeffs)
    cap = cap or Config.SPECTRAL_CAP
    dense = None

    if M.n <= cap:
        dense = QM.toarray()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
                factors = scipy.linalg.lu_factor(dense, check_finite=True)
                Z = scipy.linalg.lu_solve(factors, rhs)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError):
            raise SolverError("denominator Q(M) is singular", condition=_condition(dense))
    else:
        Z = _iterative_solve(QM, rhs, spd=M.kind in PAIRED_LAPLACIAN)

    residual = np.abs(QM @ Z - rhs).max() if Z.size else 0.0
    if not np.isfinite(residual) or residual > Config.SOLVER_RESIDUAL * (1.0 + np.abs(rhs).max()):
        condition = _condition(dense) if dense is not None else _interval_condition(q_coeffs)
        raise SolverError(f"denominator solve residual {residual:.3e} above tolerance", condition=condition)
    return Z


def apply_spatial(spec: OperatorSpec, g: Graph, X: FeatureMatrix, cap: Optional[int] = None,
                  policy: Optional[str] = None) -> np.ndarray:
    """Z = P(M) X, or the solution of Q(M) Z = P(M) X for rational specs"""
    X = as_feature_matrix(X, g.n)
    M = normalize(g, spec.norm_kind, policy)
    rhs = horner_apply(M.values, spec.p_coeffs, X)
    if spec.q_coeffs == (1.0,):
        return rhs
    return _solve_denominator(M, spec.q_coeffs, rhs, cap)


def _argument_map(spec: OperatorSpec, basis: SpectralBasis) -> Callable[[np.ndarray], np.ndarray]:
    if PAIRED_LAPLACIAN.get(spec.norm_kind) == basis.source_kind:
        return lambda lambdas: 1.0 - lambdas
    if basis.source_kind == spec.norm_kind and spec.norm_kind in SYMMETRIC_KINDS:
        return lambda lambdas: lambdas
    raise KindMismatchError(
        f"{spec.name} runs over '{spec.norm_kind}' but the basis was built from '{basis.source_kind}'"
    )


def apply_spectral(spec: OperatorSpec, basis: SpectralBasis, X: FeatureMatrix) -> np.ndarray:
    """Z = U diag(P(mu) / Q(mu)) U^T X with mu the eigenvalues of the spec's argument"""
    to_argument = _argument_map(spec, basis)
    return apply_response(basis, lambda lambdas: spec.argument_response(to_argument(lambdas)), X)


def spectral_kind(spec: OperatorSpec) -> str:
    """Matrix whose eigenbasis serves the spectral route of spec"""
    if spec.norm_kind in PAIRED_LAPLACIAN:
        return PAIRED_LAPLACIAN[spec.norm_kind]
    if spec.norm_kind in SYMMETRIC_KINDS:
        return spec.norm_kind
    raise KindMismatchError(f"{spec.name} runs over non-symmetric '{spec.norm_kind}'; no spectral route")


def masked_aggregate(W, g: Graph, X: FeatureMatrix) -> np.ndarray:
    """Z = (W ⊙ A) X with the weights read only on the graph's edges"""
    X = as_feature_matrix(X, g.n)
    W = W.toarray() if sp.issparse(W) else np.asarray(W, dtype=np.float64)
    if W.shape != (g.n, g.n):
        raise DimensionMismatchError(f"weight matrix has shape {W.shape}, graph has {g.n} nodes")

    A = g.adjacency.tocoo()
    weights = W[A.row, A.col]
    if not np.all(np.isfinite(weights)):
        raise ParameterError("attention weights must be finite on the edge set")
    if np.any(weights < 0):
        raise ParameterError("attention weights must be non-negative")

    masked = sp.csr_matrix((A.data * weights, (A.row, A.col)), shape=(g.n, g.n))
    return np.asarray(masked @ X)


def verify_equivalence(spec: OperatorSpec, g: Graph, X: FeatureMatrix, tol: Optional[float] = None,
                       basis: Optional[SpectralBasis] = None, cache: Optional[BasisCache] = None,
                       cap: Optional[int] = None, bipartite: Optional[bool] = None) -> EquivalenceReport:
    """Compare the spatial and spectral routes of one operator on one graph"""
    tol = Config.DEFAULT_TOL if tol is None else float(tol)
    if tol < 0 or not np.isfinite(tol):
        raise ParameterError(f"tolerance must be finite and >= 0, got {tol}")
    X = as_feature_matrix(X, g.n)

    if basis is None:
        basis = get_basis(g, spectral_kind(spec), cache=cache, cap=cap)
    spectral = apply_spectral(spec, basis, X)
    spatial = apply_spatial(spec, g, X, cap=cap)

    diff = np.abs(spatial - spectral)
    max_err = float(diff.max()) if diff.size else 0.0
    mean_err = float(diff.mean()) if diff.size else 0.0
    scale = 1.0 + (float(np.abs(X).max()) if X.size else 0.0)
    passed = tol > 0 and max_err <= tol * scale

    if bipartite is None:
        bipartite = is_bipartite(g, cap=cap)

    report = EquivalenceReport(name=spec.name, max_err=max_err, mean_err=mean_err, passed=passed,
                               tol=tol, n=g.n, bipartite=bipartite)
    logger.debug(f"Equivalence {spec.name}: max_err={max_err:.3e} pass={passed}")
    return report


class OperatorZoo:
    """Registry of the named operators with default parameters"""

    def __init__(self):
        self._builders: Dict[str, Tuple[Callable[..., OperatorSpec], Dict[str, Any]]] = {
            'gcn': (lambda **kw: make_linear('gcn'), {}),
            'gcn-renorm': (lambda **kw: make_linear('gcn-renorm'), {}),
            'sage_mean': (lambda **kw: make_linear('sage_mean'), {}),
            'gin': (lambda **kw: make_linear('gin', **kw), {'eps': 0.1, 'symmetric_scaling': True}),
            'chebnet': (lambda **kw: make_polynomial('chebnet', **kw),
                        {'theta': (0.6, -0.3, 0.1), 'lambda_max': 2.0}),
            'deepwalk': (lambda **kw: make_polynomial('deepwalk', **kw), {'t': 3}),
            'dcnn': (lambda **kw: make_polynomial('dcnn', **kw), {'w': (0.5, 0.3, 0.2)}),
            'gdc_ppr': (lambda **kw: make_polynomial('gdc', preset='ppr', **kw), {'alpha': 0.15}),
            'gdc_heat': (lambda **kw: make_polynomial('gdc', preset='heat', **kw), {'s': 3.0}),
            'node2vec': (lambda **kw: make_polynomial('node2vec', **kw), {'p': 1.0, 'q': 2.0}),
            'line_sdne': (lambda **kw: make_polynomial('line_sdne', **kw), {'alpha': 0.5}),
            'sgc': (lambda **kw: make_polynomial('sgc', **kw), {'K': 2}),
            'auto_regressive': (lambda **kw: make_rational('auto_regressive', **kw), {'alpha': 1.0}),
            'ppnp': (lambda **kw: make_rational('ppnp', **kw), {'alpha': 0.1}),
            'arma': (lambda **kw: make_rational('arma', **kw), {'a': 0.5, 'b': 0.4}),
            'parwalks': (lambda **kw: make_rational('parwalks', **kw), {'beta': 0.5}),
            'rationalnet': (lambda **kw: make_rational('rationalnet', **kw),
                            {'p': (1.0, 0.5), 'q': (1.0, -0.5, 0.1)}),
        }

    def names(self) -> List[str]:
        return list(self._builders)

    def defaults(self, name: str) -> Dict[str, Any]:
        return dict(self._lookup(name)[1])

    def _lookup(self, name: str):
        try:
            return self._builders[name]
        except KeyError:
            raise ParameterError(f"unknown operator '{name}'; known: {', '.join(self._builders)}")

    def build(self, name: str, **overrides) -> OperatorSpec:
        builder, defaults = self._lookup(name)
        spec = builder(**{**defaults, **overrides})
        return spec if spec.name == name else spec.model_copy(update={'name': name})

    def catalog(self) -> List[OperatorSpec]:
        return [self.build(name) for name in self._builders]

    def catalog_table(self) -> str:
        """Fixed-width text table: name, family, norm_kind, p_coeffs, q_coeffs"""
        rows = [spec.catalog_row() for spec in self.catalog()]
        columns = ['name', 'family', 'norm_kind', 'p_coeffs', 'q_coeffs']
        widths = {c: max(len(c), *(len(r[c]) for r in rows)) for c in columns[:-1]}
        lines = ['  '.join(c.ljust(widths.get(c, 0)) for c in columns).rstrip()]
        for row in rows:
            lines.append('  '.join(row[c].ljust(widths.get(c, 0)) for c in columns).rstrip())
        return '\n'.join(lines) + '\n'
