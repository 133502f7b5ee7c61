import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from services.graph_service import (
    as_feature_matrix,
    build_graph,
    graph_hash,
    load_edge_list,
    matrix_power_apply,
    normalize,
    random_connected_graph,
    erdos_renyi_graph,
)
from utils.errors import (
    DegenerateInputError,
    DimensionMismatchError,
    DuplicateEdgeError,
    EdgeListParseError,
    ParameterError,
    SelfLoopError,
    UnsupportedKindError,
)
from tests.helpers import SAMPLES_DIR, k2, p3, random_graph, star, ten_node


class TestEdgeListLoading(unittest.TestCase):
    """Test cases for edge-list parsing"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, text: str) -> Path:
        path = Path(self.tmp.name) / 'graph.tsv'
        path.write_text(text, encoding='utf-8')
        return path

    def test_single_edge(self):
        """Test the minimal one-edge file"""
        g = load_edge_list(self._write("0\t1\n"))
        self.assertEqual(g.n, 2)
        self.assertEqual(g.edges, ((0, 1, 1.0),))

    def test_path_degrees(self):
        """Test degree counting on P3"""
        g = load_edge_list(self._write("0\t1\n1\t2\n"))
        self.assertEqual(g.n, 3)
        np.testing.assert_array_equal(g.degrees, [1.0, 2.0, 1.0])

    def test_comments_and_weights(self):
        """Test comment lines are skipped and weights parsed"""
        g = load_edge_list(self._write("# header\n\n0\t1\t2.5\n1\t2\n"))
        self.assertEqual(g.edges[0], (0, 1, 2.5))
        np.testing.assert_allclose(g.degrees, [2.5, 3.5, 1.0])

    def test_duplicate_edge(self):
        """Test duplicate undirected edges are rejected with the line number"""
        with self.assertRaises(DuplicateEdgeError) as ctx:
            load_edge_list(self._write("0\t1\n1\t0\n"))
        self.assertEqual(ctx.exception.line_number, 2)

    def test_self_loop(self):
        """Test self-loops are rejected"""
        with self.assertRaises(SelfLoopError):
            load_edge_list(self._write("0\t1\n2\t2\n"))

    def test_malformed_line(self):
        """Test malformed lines report their line number"""
        with self.assertRaises(EdgeListParseError) as ctx:
            load_edge_list(self._write("0\t1\n1 2\n"))
        self.assertEqual(ctx.exception.line_number, 2)
        self.assertIn('line 2', str(ctx.exception))

    def test_non_positive_weight(self):
        """Test zero weights are rejected"""
        with self.assertRaises(EdgeListParseError):
            load_edge_list(self._write("0\t1\t0\n"))

    def test_missing_file(self):
        """Test a missing file surfaces as OSError"""
        with self.assertRaises(OSError):
            load_edge_list(Path(self.tmp.name) / 'absent.tsv')

    def test_bundled_samples(self):
        """Test the bundled sample graphs parse"""
        self.assertEqual(load_edge_list(SAMPLES_DIR / 'k2.tsv').n, 2)
        self.assertEqual(load_edge_list(SAMPLES_DIR / 'p3.tsv').n, 3)
        g = load_edge_list(SAMPLES_DIR / 'ten_node.tsv')
        self.assertEqual(g.n, 10)
        self.assertEqual(len(g.edges), 13)


class TestBuildGraph(unittest.TestCase):
    """Test cases for in-memory graph construction"""

    def test_degrees_match_row_sums(self):
        """Test degrees equal adjacency row sums"""
        g = ten_node()
        np.testing.assert_allclose(g.degrees, np.asarray(g.adjacency.sum(axis=1)).ravel())

    def test_endpoint_out_of_range(self):
        """Test edges must stay inside [0, n)"""
        with self.assertRaises(ParameterError):
            build_graph(2, [(0, 2)])

    def test_feature_rows_must_match(self):
        """Test feature row count is checked"""
        with self.assertRaises(DimensionMismatchError):
            as_feature_matrix(np.zeros((3, 2)), n=2)
        self.assertEqual(as_feature_matrix([1.0, 2.0]).shape, (2, 1))


class TestNormalize(unittest.TestCase):
    """Test cases for the normalization family"""

    def test_k2_sym(self):
        """Test sym on K2 is the swap matrix"""
        np.testing.assert_allclose(normalize(k2(), 'sym').dense(), [[0.0, 1.0], [1.0, 0.0]])

    def test_k2_renorm_sym(self):
        """Test renorm-sym on K2 averages both nodes"""
        np.testing.assert_allclose(normalize(k2(), 'renorm-sym').dense(), np.full((2, 2), 0.5))

    def test_p3_sym_laplacian_spectrum(self):
        """Test P3 sym-laplacian eigenvalues are 0, 1, 2"""
        lambdas = np.linalg.eigvalsh(normalize(p3(), 'sym-laplacian').dense())
        np.testing.assert_allclose(lambdas, [0.0, 1.0, 2.0], atol=1e-12)

    def test_row_stochastic_kinds(self):
        """Test rw-left and renorm-left rows sum to one"""
        g = ten_node()
        for kind in ('rw-left', 'renorm-left'):
            rows = np.asarray(normalize(g, kind).values.sum(axis=1)).ravel()
            np.testing.assert_allclose(rows, 1.0, atol=1e-12)
        columns = np.asarray(normalize(g, 'rw-right').values.sum(axis=0)).ravel()
        np.testing.assert_allclose(columns, 1.0, atol=1e-12)

    def test_symmetric_kinds(self):
        """Test sym and renorm-sym are symmetric"""
        g = random_graph(30, seed=3)
        for kind in ('sym', 'renorm-sym', 'sym-laplacian', 'renorm-sym-laplacian'):
            dense = normalize(g, kind).dense()
            self.assertLessEqual(np.abs(dense - dense.T).max(), 1e-12)

    def test_laplacian_forms(self):
        """Test the Laplacian kinds against their defining formulas"""
        g = ten_node()
        A = g.adjacency.toarray()
        D = np.diag(g.degrees)
        np.testing.assert_allclose(normalize(g, 'laplacian').dense(), D - A)
        np.testing.assert_allclose(normalize(g, 'sym-laplacian').dense(),
                                   np.eye(10) - normalize(g, 'sym').dense(), atol=1e-15)
        rw = normalize(g, 'rw-laplacian').dense()
        np.testing.assert_allclose(rw.sum(axis=1), 0.0, atol=1e-12)

    def test_spectral_ranges(self):
        """Test renorm-sym in [-1, 1] and sym-laplacian in [0, 2]"""
        g = random_graph(40, seed=11)
        renorm = np.linalg.eigvalsh(normalize(g, 'renorm-sym').dense())
        laplacian = np.linalg.eigvalsh(normalize(g, 'sym-laplacian').dense())
        self.assertGreaterEqual(renorm.min(), -1.0 - 1e-9)
        self.assertLessEqual(renorm.max(), 1.0 + 1e-9)
        self.assertGreaterEqual(laplacian.min(), -1e-9)
        self.assertLessEqual(laplacian.max(), 2.0 + 1e-9)

    def test_sym_laplacian_null_vector(self):
        """Test D^1/2 1 spans the null space of sym-laplacian"""
        g = ten_node()
        u = np.sqrt(g.degrees)
        residual = normalize(g, 'sym-laplacian').values @ u
        self.assertLessEqual(np.abs(residual).max(), 1e-8)

    def test_zero_degree_strict(self):
        """Test the strict policy names the isolated node"""
        g = build_graph(3, [(0, 1)])
        with self.assertRaises(DegenerateInputError) as ctx:
            normalize(g, 'rw-left', policy='strict')
        self.assertEqual(ctx.exception.node, 2)
        self.assertIn('node 2', str(ctx.exception))

    def test_zero_degree_zero_row(self):
        """Test the zero-row policy leaves isolated rows empty"""
        g = build_graph(3, [(0, 1)])
        dense = normalize(g, 'sym', policy='zero-row').dense()
        np.testing.assert_array_equal(dense[2], 0.0)
        renorm = normalize(g, 'renorm-left').dense()
        self.assertAlmostEqual(renorm[2, 2], 1.0)

    def test_unknown_kind(self):
        """Test an unknown kind is rejected"""
        with self.assertRaises(UnsupportedKindError):
            normalize(k2(), 'cosine')


class TestMatrixPowers(unittest.TestCase):
    """Test cases for repeated sparse products"""

    def test_power_zero_is_identity(self):
        """Test k=0 returns X"""
        X = np.array([[1.0], [2.0], [3.0]])
        np.testing.assert_array_equal(matrix_power_apply(normalize(p3(), 'rw-left'), 0, X), X)

    def test_k2_renorm_average(self):
        """Test one renorm-sym step on K2"""
        Z = matrix_power_apply(normalize(k2(), 'renorm-sym'), 1, [[1.0], [0.0]])
        np.testing.assert_allclose(Z, [[0.5], [0.5]])

    def test_renorm_left_reaches_stationary_row(self):
        """Test renorm-left powers on P3 converge to the degree-weighted row"""
        g = p3()
        X = np.array([[1.0], [0.0], [0.0]])
        Z = matrix_power_apply(normalize(g, 'renorm-left'), 200, X)
        d_tilde = g.degrees + 1.0
        stationary = (d_tilde / d_tilde.sum()) @ X
        np.testing.assert_allclose(Z, np.tile(stationary, (3, 1)), atol=1e-6)

    def test_rw_left_oscillates_on_bipartite_path(self):
        """Test rw-left powers on the bipartite P3 alternate instead of converging"""
        M = normalize(p3(), 'rw-left')
        X = np.array([[1.0], [0.0], [0.0]])
        even = matrix_power_apply(M, 200, X)
        odd = matrix_power_apply(M, 201, X)
        self.assertGreater(np.abs(even - odd).max(), 0.1)

    def test_rw_left_converges_on_non_bipartite_graph(self):
        """Test rw-left powers reach d_i / sum(d) on the ten-node graph"""
        g = ten_node()
        X = np.eye(10)[:, :1]
        Z = matrix_power_apply(normalize(g, 'rw-left'), 2000, X)
        stationary = (g.degrees / g.degrees.sum()) @ X
        np.testing.assert_allclose(Z, np.tile(stationary, (10, 1)), atol=1e-6)


class TestGenerators(unittest.TestCase):
    """Test cases for seeded graph generators and hashing"""

    def test_random_connected_graph(self):
        """Test the generator is connected and reproducible"""
        g = random_connected_graph(50, 4.0, seed=7)
        n_components, _ = connected_components(g.adjacency, directed=False)
        self.assertEqual(n_components, 1)
        self.assertEqual(graph_hash(g), graph_hash(random_connected_graph(50, 4.0, seed=7)))
        self.assertNotEqual(graph_hash(g), graph_hash(random_connected_graph(50, 4.0, seed=8)))

    def test_erdos_renyi_reproducible(self):
        """Test G(n, p) workloads are identical across calls"""
        a = erdos_renyi_graph(200, 8.0, seed=42)
        b = erdos_renyi_graph(200, 8.0, seed=42)
        self.assertEqual(a.edges, b.edges)
        self.assertGreater(len(a.edges), 400)

    def test_hash_depends_on_weights(self):
        """Test the content hash sees edge weights"""
        self.assertNotEqual(graph_hash(build_graph(2, [(0, 1, 1.0)])), graph_hash(build_graph(2, [(0, 1, 2.0)])))
        self.assertNotEqual(graph_hash(star(3)), graph_hash(star(4)))


if __name__ == '__main__':
    unittest.main()
