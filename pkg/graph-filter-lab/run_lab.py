#!/usr/bin/env python3
"""
Command-line entry point for the graph filter lab.

Artifacts (CSV, JSON, walk corpora) go to stdout or --out; logs go to stderr.
Exit codes: 0 success, 1 domain or verification failure, 2 usage error.
"""

import argparse
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

# Always load .env from the project root
env_path = Path(__file__).resolve().parents[1] / '.env'
load_dotenv(dotenv_path=env_path)

from schemas.graph import NORM_KINDS  # noqa: E402
from schemas.run_config import RunConfig  # noqa: E402
from services.filter_pipeline import FilterPipeline  # noqa: E402
from utils.io import write_json, write_text  # noqa: E402
from utils.logger import logger  # noqa: E402

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

_INT = re.compile(r'^[+-]?\d+$')


def parse_value(raw: str) -> Any:
    """Operator parameter value: bool, int, float, comma list of floats, or a bare string"""
    lowered = raw.strip().lower()
    if lowered in ('true', 'false'):
        return lowered == 'true'
    if ',' in raw:
        return tuple(float(part) for part in raw.split(',') if part.strip())
    if _INT.match(raw.strip()):
        return int(raw)
    try:
        return float(raw)
    except ValueError:
        return raw.strip()


def parse_params(pairs: Optional[List[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition('=')
        if not sep or not key.strip():
            raise ValueError(f"--param expects key=value, got {pair!r}")
        params[key.strip()] = parse_value(value)
    return params


def _int_list(raw: str) -> List[int]:
    return [int(part) for part in raw.split(',') if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='run_lab.py', description='Graph filter lab')
    subparsers = parser.add_subparsers(dest='command')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Output file (default: stdout)')
    common.add_argument('--seed', type=int, default=42, help='Random seed (default: 42)')

    graph_args = argparse.ArgumentParser(add_help=False)
    graph_args.add_argument('--graph', help='Edge list: u<TAB>v[<TAB>w] per line')
    graph_args.add_argument('--features', help='N x F feature CSV (default: seeded normal, F=8)')
    graph_args.add_argument('--op', help='Operator name from `list`')
    graph_args.add_argument('--param', action='append', metavar='KEY=VALUE', help='Operator parameter (repeatable)')
    graph_args.add_argument('--norm', choices=NORM_KINDS, help='Normalization kind override')

    subparsers.add_parser('list', parents=[common], help='Print the operator catalog')

    apply_parser = subparsers.add_parser('apply', parents=[common, graph_args], help='Filter features')
    apply_parser.add_argument('--route', choices=['spatial', 'spectral'], default='spatial')

    verify_parser = subparsers.add_parser('verify', parents=[common, graph_args],
                                          help='Check spatial/spectral equivalence')
    verify_parser.add_argument('--tol', type=float, default=1e-8, help='Relative tolerance (default: 1e-8)')

    approx_parser = subparsers.add_parser('approx', parents=[common], help='Fit a target response')
    approx_parser.add_argument('--target', default='sign-step',
                               help='sign, abs, sqrt, bump, sine, exp (or the full kind name)')
    approx_parser.add_argument('--poly', type=int, help='Polynomial degree')
    approx_parser.add_argument('--rational', help='Rational degrees m,n')
    approx_parser.add_argument('--budgets', type=_int_list, help='Comma list of budgets K for a convergence curve')
    approx_parser.add_argument('--plot', help='PNG path for the convergence curve')

    smooth_parser = subparsers.add_parser('oversmooth', parents=[common, graph_args],
                                          help='Over-smoothing trajectory')
    smooth_parser.add_argument('--k', type=int, default=10, help='Number of applications (default: 10)')

    bench_parser = subparsers.add_parser('bench', parents=[common], help='Time operator families')
    bench_parser.add_argument('--families', type=lambda raw: [f for f in raw.split(',') if f],
                              default=['linear', 'polynomial', 'rational'])
    bench_parser.add_argument('--sizes', type=_int_list, default=[500, 1000, 2000])
    bench_parser.add_argument('--order', type=int, default=3, help='Order K of the polynomial/rational families')
    bench_parser.add_argument('--reps', type=int, default=3)

    sample_parser = subparsers.add_parser('sample', parents=[common], help='Sample random walks')
    sample_parser.add_argument('--graph', help='Edge list: u<TAB>v[<TAB>w] per line')
    sample_parser.add_argument('--walks', type=int, default=10, help='Walks per node')
    sample_parser.add_argument('--len', dest='length', type=int, default=10, help='Walk length')
    sample_parser.add_argument('--p', type=float, help='Return parameter (second-order walks)')
    sample_parser.add_argument('--q', type=float, help='In-out parameter (second-order walks)')
    sample_parser.add_argument('--window', type=int, help='Emit the co-occurrence matrix for this window')

    return parser


def to_run_config(args: argparse.Namespace) -> RunConfig:
    values = {key: value for key, value in vars(args).items() if value is not None}
    values['params'] = parse_params(values.pop('param', None))
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and write its artifact"""
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        cfg = to_run_config(args)
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE

    try:
        pipeline = FilterPipeline()
    except ValueError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE

    result = pipeline.run(cfg)
    if not result['success']:
        logger.error(f"{cfg.command} failed: {result.get('error', 'Unknown error')}")
        return EXIT_FAILURE

    try:
        if cfg.command == 'verify':
            write_json(cfg.out, result['artifact'])
        else:
            write_text(cfg.out, result['artifact'])
    except OSError as e:
        logger.error(f"Could not write output: {e}")
        return EXIT_FAILURE

    if cfg.command == 'verify' and not result['all_passed']:
        logger.error("Equivalence check failed for at least one operator")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
