"""Polynomial and rational approximation of frequency responses.

Fits are computed in a Chebyshev basis on the target's domain and converted to
monomial coefficients in x at the end, so a FitResult can be dropped straight
into a rationalnet operator.
"""

import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.polynomial.chebyshev as ncheb
from numpy.polynomial import Chebyshev, Polynomial

from config import Config
from schemas.approximation import (
    ConvergenceCurve,
    CurveRow,
    DEFAULT_DOMAINS,
    FitResult,
    TargetResponse,
)
from utils.errors import FitError, GraphFilterError, ParameterError
from utils.io import rows_to_csv
from utils.logger import logger

CONVERGENCE_TOL = 1e-10
FINE_GRID_FACTOR = 10
# |Q| below this fraction of max|Q| on the domain counts as a pole
POLE_FLOOR = 1e-8
DAMPING_STEPS = 12


def make_target(kind: str, domain: Optional[Tuple[float, float]] = None, samples: Optional[int] = None,
                values: Optional[Sequence[float]] = None, xs: Optional[Sequence[float]] = None,
                exclusion: Optional[float] = None) -> TargetResponse:
    """Build a target, defaulting the domain per kind ([-1, 1] for sign-step and smooth-exp, else [0, 1])"""
    if domain is None:
        domain = DEFAULT_DOMAINS.get(kind, (0.0, 1.0))
    try:
        return TargetResponse(
            kind=kind,
            domain=tuple(float(v) for v in domain),
            samples=samples or Config.GRID_SIZE,
            exclusion=Config.EXCLUSION_WINDOW if exclusion is None else exclusion,
            values=None if values is None else np.asarray(values, dtype=np.float64),
            xs=None if xs is None else np.asarray(xs, dtype=np.float64),
        )
    except ValueError as e:
        raise ParameterError(f"invalid target: {e}")


def _fit_points(target: TargetResponse) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = target.grid()
    y = target.evaluate(x)
    return x, y, target.window_mask(x)


def _check_degree(degree: int, available: int, what: str) -> None:
    if degree < 0:
        raise ParameterError(f"{what} must be >= 0, got {degree}")
    if degree >= available:
        raise FitError(f"ill-posed fit: {what}={degree} needs more than {available} grid points")


def _errors(target: TargetResponse, numerator, denominator) -> Tuple[float, float]:
    x = target.grid()
    with np.errstate(divide='ignore', invalid='ignore'):
        error = np.abs(np.polynomial.polynomial.polyval(x, numerator)
                       / np.polynomial.polynomial.polyval(x, denominator) - target.evaluate(x))
    if not np.all(np.isfinite(error)):
        raise FitError("approximant is not finite on the grid")
    windowed = error[target.window_mask(x)]
    return float(error.max()), float(windowed.max() if windowed.size else 0.0)


def _result(method: str, target: TargetResponse, numerator, denominator=(1.0,),
            iterations: int = 0) -> FitResult:
    max_error, windowed = _errors(target, numerator, denominator)
    return FitResult(
        method=method,
        numerator=tuple(float(c) for c in numerator),
        denominator=tuple(float(c) for c in denominator),
        max_error=max_error,
        max_error_windowed=windowed,
        iterations=iterations,
        domain=target.domain,
    )


def _to_monomial(chebyshev_coeffs, domain) -> np.ndarray:
    return Chebyshev(chebyshev_coeffs, domain=list(domain)).convert(kind=Polynomial).coef


def _midrange(y: np.ndarray) -> float:
    return 0.5 * (float(y.max()) + float(y.min()))


def poly_fit(target: TargetResponse, degree: int, method: str = 'poly') -> FitResult:
    """Least-squares polynomial of the given degree on the fitting grid"""
    x, y, mask = _fit_points(target)
    _check_degree(degree, int(mask.sum()), 'degree')

    if degree == 0:
        return _result(method, target, [_midrange(y[mask])])

    series = Chebyshev.fit(x[mask], y[mask], degree, domain=list(target.domain))
    result = _result(method, target, _to_monomial(series.coef, target.domain))
    logger.debug(f"poly_fit {target.kind} K={degree}: max_error={result.max_error_windowed:.3e}")
    return result


def chebyshev_fit(target: TargetResponse, degree: int) -> FitResult:
    """Interpolation at degree+1 Chebyshev points of the domain"""
    x, y, mask = _fit_points(target)
    _check_degree(degree, target.samples, 'degree')

    if degree == 0:
        return _result('chebyshev', target, [_midrange(y[mask])])

    series = Chebyshev.interpolate(target.evaluate, degree, domain=list(target.domain))
    return _result('chebyshev', target, _to_monomial(series.coef, target.domain))


def _scaled(x: np.ndarray, domain) -> np.ndarray:
    lo, hi = domain
    return (2.0 * x - (lo + hi)) / (hi - lo)


def _pole_free(q_values: np.ndarray) -> bool:
    if not np.all(np.isfinite(q_values)):
        return False
    scale = np.abs(q_values).max()
    if scale == 0:
        return False
    # Q keeps one sign and stays away from zero
    return bool(np.all(q_values * np.sign(q_values[0]) > POLE_FLOOR * scale))


def rational_fit(target: TargetResponse, num_degree: int, den_degree: int) -> FitResult:
    """Linearized minimax fit of P/Q.

    Each pass solves the weighted least-squares problem P - f Q ~ 0 with the
    constant Chebyshev coefficient of Q fixed to 1, weights 1/|Q_prev| times
    Lawson sup-norm weights. Steps that would put a pole on the domain are
    damped back toward the previous denominator. The best pass is kept and
    finally rescaled so that Q(0) = 1.
    """
    if num_degree < 0 or den_degree < 0:
        raise ParameterError(f"degrees must be >= 0, got ({num_degree}, {den_degree})")
    if den_degree == 0:
        return poly_fit(target, num_degree, method='rational')

    x, y, mask = _fit_points(target)
    _check_degree(num_degree + den_degree, int(mask.sum()), 'num_degree + den_degree')

    xf, f = x[mask], y[mask]
    t = _scaled(xf, target.domain)
    Vp = ncheb.chebvander(t, num_degree)
    Vq = ncheb.chebvander(t, den_degree)
    t_check = _scaled(target.grid(target.samples * 2), target.domain)
    Vq_check = ncheb.chebvander(t_check, den_degree)

    b = np.zeros(den_degree + 1)
    b[0] = 1.0
    lawson = np.full(f.shape, 1.0 / f.size)
    best: Optional[Tuple[float, np.ndarray, np.ndarray, int]] = None
    previous_error = np.inf
    A = np.hstack([Vp, -f[:, None] * Vq[:, 1:]])

    iterations = 0
    for iterations in range(1, Config.MAX_FIT_ITERATIONS + 1):
        q_prev = Vq @ b
        weights = np.sqrt(lawson) / np.abs(q_prev)
        solution, *_ = np.linalg.lstsq(weights[:, None] * A, weights * f, rcond=None)
        a = solution[:num_degree + 1]
        b_new = np.concatenate([[1.0], solution[num_degree + 1:]])

        step = 1.0
        for _ in range(DAMPING_STEPS):
            if _pole_free(Vq_check @ b_new):
                break
            step *= 0.5
            b_new = b + step * (b_new - b)
        else:
            logger.debug(f"rational_fit: pole persisted after damping at pass {iterations}")
            break

        if step < 1.0:
            # Refit the numerator for the damped denominator
            a, *_ = np.linalg.lstsq(weights[:, None] * Vp, weights * f * (Vq @ b_new), rcond=None)

        b = b_new
        error = np.abs(Vp @ a / (Vq @ b) - f)
        sup_error = float(error.max())
        if best is None or sup_error < best[0]:
            best = (sup_error, a.copy(), b.copy(), iterations)

        if abs(previous_error - sup_error) < CONVERGENCE_TOL:
            break
        previous_error = sup_error

        lawson = lawson * np.maximum(error, 1e-300)
        total = lawson.sum()
        if not np.isfinite(total) or total == 0:
            break
        lawson = np.maximum(lawson / total, 1e-14 / f.size)
        lawson /= lawson.sum()

    if best is None:
        raise FitError(f"rational fit ({num_degree}, {den_degree}) found no pole-free denominator")

    _, a, b, best_pass = best
    numerator = _to_monomial(a, target.domain)
    denominator = _to_monomial(b, target.domain)
    q0 = denominator[0]
    if abs(q0) <= 1e-12 * np.abs(denominator).max():
        raise FitError("cannot normalize q_0 = 1: the fitted denominator vanishes at x = 0")
    numerator, denominator = numerator / q0, denominator / q0

    if not _pole_free(np.polynomial.polynomial.polyval(target.grid(target.samples * 2), denominator)):
        raise FitError(f"rational fit ({num_degree}, {den_degree}) has a pole inside {target.domain}")

    result = _result('rational', target, numerator, denominator, iterations=iterations)
    logger.debug(f"rational_fit {target.kind} ({num_degree},{den_degree}): "
                 f"max_error={result.max_error_windowed:.3e} best_pass={best_pass}/{iterations}")
    return result


def _slope(ks: Sequence[float], errors: Sequence[float], transform) -> Optional[float]:
    points = [(transform(k), math.log(e)) for k, e in zip(ks, errors)
              if k >= 1 and np.isfinite(e) and e > 0]
    if len(points) < 2 or len({p[0] for p in points}) < 2:
        return None
    xs, ys = zip(*points)
    return float(np.polyfit(xs, ys, 1)[0])


def convergence_curve(target: TargetResponse, budgets: Iterable[int]) -> ConvergenceCurve:
    """Sup error (windowed) per budget K: polynomial degree K against rational (ceil(K/2), ceil(K/2))"""
    budgets = [int(k) for k in budgets]
    if not budgets:
        raise ParameterError("budgets must be non-empty")
    if any(k < 0 for k in budgets) or any(b <= a for a, b in zip(budgets, budgets[1:])):
        raise ParameterError(f"budgets must be non-negative and strictly ascending, got {budgets}")

    rows: List[CurveRow] = []
    best_poly, best_rational = np.inf, np.inf
    for K in budgets:
        notes = []
        half = math.ceil(K / 2)
        try:
            best_poly = min(best_poly, poly_fit(target, K).max_error_windowed)
        except GraphFilterError as e:
            notes.append(f"poly: {e}")
        try:
            best_rational = min(best_rational, rational_fit(target, half, half).max_error_windowed)
        except GraphFilterError as e:
            notes.append(f"rational: {e}")
        if notes:
            logger.warning(f"convergence_curve K={K}: {'; '.join(notes)}")
        rows.append(CurveRow(
            K=K,
            poly_error=float(best_poly) if np.isfinite(best_poly) else float('nan'),
            rational_error=float(best_rational) if np.isfinite(best_rational) else float('nan'),
            note='; '.join(notes),
        ))

    ks = [row.K for row in rows]
    curve = ConvergenceCurve(
        target=target.kind,
        rows=rows,
        poly_slope=_slope(ks, [row.poly_error for row in rows], math.log),
        rational_slope=_slope(ks, [row.rational_error for row in rows], math.sqrt),
    )
    logger.info(f"Convergence curve for {target.kind}: {curve.summary()}")
    return curve


def curve_to_csv(curve: ConvergenceCurve) -> str:
    return rows_to_csv(['K', 'poly_error', 'rational_error'],
                       ([row.K, row.poly_error, row.rational_error] for row in curve.rows))


def plot_curve(curve: ConvergenceCurve, path: Union[str, Path]) -> bool:
    """Semilog plot of both error curves; returns False when matplotlib is unavailable"""
    try:
        import matplotlib
        matplotlib.use('Agg')
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib not installed; skipping plot")
        return False

    ks = [row.K for row in curve.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ks, [row.poly_error for row in curve.rows], marker='o', label='Polynomial')
    ax.semilogy(ks, [row.rational_error for row in curve.rows], marker='s', label='Rational')
    ax.set_xlabel('Budget K')
    ax.set_ylabel('sup |f - approximant|')
    ax.set_title(f'Approximation errors for {curve.target}')
    ax.grid(True)
    ax.legend(loc='upper right')
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches='tight')
    plt.close(fig)
    logger.info(f"Saved convergence plot to {path}")
    return True
