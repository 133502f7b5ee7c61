import time
import unittest
from unittest.mock import patch

import numpy as np

from schemas.bench import BENCH_HEADER, BenchRecord
from services.bench_service import (
    _check_ordering,
    bench_to_csv,
    family_spec,
    make_workload,
    run_bench,
    time_call,
)
from utils.errors import ParameterError


class TestBenchService(unittest.TestCase):
    """Test cases for the operator timing harness"""

    def test_workload_is_deterministic(self):
        """Test the seeded workload is identical across calls"""
        g1, X1 = make_workload(200)
        g2, X2 = make_workload(200)
        self.assertEqual(g1.edges, g2.edges)
        np.testing.assert_array_equal(X1, X2)
        self.assertEqual(X1.shape, (200, 16))

    def test_family_specs(self):
        """Test each family maps to an operator of the requested order"""
        self.assertEqual(family_spec('linear', 4).name, 'gcn')
        self.assertEqual(family_spec('polynomial', 4).degrees, (4, 0))
        rational = family_spec('rational', 3)
        self.assertEqual(rational.degrees, (3, 3))
        self.assertEqual(rational.family, 'rational')
        with self.assertRaises(ParameterError):
            family_spec('spline', 2)

    def test_time_call(self):
        """Test timings are positive and the warm-up call is not counted"""
        calls = []

        def slow():
            calls.append(1)
            time.sleep(0.001)

        median, inner = time_call(slow, reps=3)
        self.assertGreaterEqual(median, 0.001)
        self.assertEqual(inner, 1)
        self.assertEqual(len(calls), 4)

    def test_time_call_fast_function(self):
        """Test sub-microsecond calls are looped until measurable"""
        median, inner = time_call(lambda: None, reps=3)
        self.assertGreater(median, 0.0)
        self.assertGreaterEqual(median * inner, 1e-6)

    def test_single_record(self):
        """Test one family on one size yields one valid record"""
        records = run_bench(['linear'], [60], K=2, reps=3)
        self.assertEqual(len(records), 1)
        record = records[0]
        self.assertEqual((record.family, record.n, record.F, record.K, record.reps), ('linear', 60, 16, 2, 3))
        self.assertGreater(record.median_seconds, 0.0)
        self.assertLessEqual(record.density, 1.0)

    def test_csv(self):
        """Test the CSV header and one row per (family, n)"""
        records = run_bench(['linear', 'polynomial', 'rational'], [40, 80], K=2, reps=3)
        lines = bench_to_csv(records).splitlines()
        self.assertEqual(lines[0], ','.join(BENCH_HEADER))
        self.assertEqual(len(lines), 7)

    def test_invalid_arguments(self):
        """Test reps, order and sizes are validated"""
        with self.assertRaises(ParameterError):
            run_bench(['linear'], [50], K=2, reps=2)
        with self.assertRaises(ParameterError):
            run_bench(['linear'], [50], K=0)
        with self.assertRaises(ParameterError):
            run_bench(['linear'], [100, 50], K=2)

    def test_ordering_check(self):
        """Test an inverted ordering at the largest size is reported"""
        def record(family, seconds):
            return BenchRecord(family=family, n=100, F=16, K=2, median_seconds=seconds, reps=3, density=0.1)

        self.assertTrue(_check_ordering([record('linear', 1e-4), record('polynomial', 2e-4),
                                         record('rational', 5e-4)]))
        with patch('services.bench_service.logger') as mock_logger:
            self.assertFalse(_check_ordering([record('linear', 3e-4), record('polynomial', 2e-4)]))
            mock_logger.warning.assert_called_once()


if __name__ == '__main__':
    unittest.main()
