import unittest

import numpy as np

from schemas.graph import PAIRED_LAPLACIAN
from services.diagnostics_service import (
    analytic_label_prop,
    dirichlet_energy,
    lowpass_profile,
    nonconstant_energy,
    rayleigh_quotient,
    smoothing_trajectory,
    stationary_row,
    trajectory_to_csv,
)
from services.graph_service import normalize
from services.operator_zoo import (
    OperatorZoo,
    apply_spatial,
    is_lowpass,
    make_linear,
    make_rational,
    propagation,
    stack,
)
from services.spectral_service import eigendecompose, gft, is_bipartite
from utils.errors import DegenerateInputError, KindMismatchError, ParameterError
from tests.helpers import k2, p3, random_graph, signal, ten_node


class TestLowpassProfile(unittest.TestCase):
    """Test cases for the eigenvalue proportion-change profile"""

    def test_three_eigenvalues(self):
        """Test bias 2 over {0, 1, 2}"""
        np.testing.assert_allclose(lowpass_profile([0.0, 1.0, 2.0], 2.0), [2 / 3, 1 / 3, 0.0])

    def test_large_bias_is_uniform(self):
        """Test a huge bias flattens the profile"""
        w = lowpass_profile([0.0, 0.5, 1.0, 2.0], 1e9)
        self.assertLessEqual(np.abs(w - 0.25).max(), 1e-6)

    def test_symmetric_bias(self):
        """Test bias 1 over {0, 2}"""
        np.testing.assert_allclose(lowpass_profile([0.0, 2.0], 1.0), [0.5, 0.5])

    def test_sums_to_one(self):
        """Test the profile is a distribution"""
        lambdas = eigendecompose(normalize(ten_node(), 'sym-laplacian')).lambdas
        w = lowpass_profile(lambdas, 2.0)
        self.assertAlmostEqual(float(w.sum()), 1.0, places=12)
        self.assertTrue(np.all(w >= 0))

    def test_degenerate(self):
        """Test every eigenvalue at the bias is rejected"""
        with self.assertRaises(DegenerateInputError):
            lowpass_profile([1.0, 1.0], 1.0)


class TestEnergy(unittest.TestCase):
    """Test cases for Dirichlet energy and Rayleigh quotients"""

    def test_null_vector(self):
        """Test D^1/2 1 has zero energy"""
        g = ten_node()
        L = normalize(g, 'sym-laplacian')
        self.assertAlmostEqual(dirichlet_energy(L, np.sqrt(g.degrees)), 0.0, places=10)

    def test_eigenvectors(self):
        """Test unit eigenvectors have energy equal to their eigenvalue"""
        L = normalize(ten_node(), 'sym-laplacian')
        basis = eigendecompose(L)
        for i in range(10):
            self.assertAlmostEqual(dirichlet_energy(L, basis.U[:, i]), float(basis.lambdas[i]), places=9)

    def test_combinatorial_edge_sum(self):
        """Test the combinatorial Laplacian energy is the weighted edge sum"""
        g = ten_node()
        Z = signal(10, features=1, seed=5)
        expected = sum(w * (Z[u, 0] - Z[v, 0]) ** 2 for u, v, w in g.edges)
        self.assertAlmostEqual(dirichlet_energy(normalize(g, 'laplacian'), Z), expected, places=9)
        self.assertAlmostEqual(dirichlet_energy(normalize(k2(), 'laplacian'), [[1.0], [0.0]]), 1.0)

    def test_requires_laplacian(self):
        """Test adjacency kinds are rejected"""
        with self.assertRaises(KindMismatchError):
            dirichlet_energy(normalize(k2(), 'sym'), [[1.0], [0.0]])

    def test_rayleigh_zero_signal(self):
        """Test the quotient of a zero signal is undefined"""
        with self.assertRaises(DegenerateInputError):
            rayleigh_quotient(normalize(k2(), 'sym-laplacian'), np.zeros((2, 1)))

    def test_lowpass_operators_contract_rayleigh_quotient(self):
        """Test low-pass operators never raise the Rayleigh quotient"""
        g = random_graph(25, seed=4)
        X = signal(25, features=3, seed=4)
        checked = 0
        for spec in OperatorZoo().catalog():
            laplacian = PAIRED_LAPLACIAN.get(spec.norm_kind)
            if laplacian is None:
                continue
            L = normalize(g, laplacian)
            if not is_lowpass(spec, eigendecompose(L).lambdas):
                continue
            checked += 1
            Z = apply_spatial(spec, g, X)
            with self.subTest(operator=spec.name):
                self.assertLessEqual(rayleigh_quotient(L, Z), rayleigh_quotient(L, X) + 1e-9)
        self.assertGreater(checked, 0)


class TestSmoothingTrajectory(unittest.TestCase):
    """Test cases for repeated application trajectories"""

    def test_random_walk_reaches_stationary_row(self):
        """Test rw-left powers collapse rows on a connected non-bipartite graph"""
        g = random_graph(30, seed=0, avg_degree=6.0)
        self.assertFalse(is_bipartite(g))
        X = signal(30, features=4, seed=0)
        trajectory = smoothing_trajectory(propagation('rw-left'), g, X, 200)
        self.assertEqual(len(trajectory.records), 200)
        self.assertLessEqual(trajectory.final.max_row_dist, 1e-6)
        self.assertLessEqual(trajectory.final.stationary_dist, 1e-6)
        self.assertLess(trajectory.final.dirichlet, trajectory.records[0].dirichlet)

    def test_bipartite_path_keeps_oscillating(self):
        """Test rw-left on P3 does not collapse"""
        trajectory = smoothing_trajectory(propagation('rw-left'), p3(), [[1.0], [0.0], [0.0]], 50)
        self.assertGreater(trajectory.final.max_row_dist, 0.1)

    def test_single_step(self):
        """Test one step yields one record"""
        trajectory = smoothing_trajectory(make_rational('ppnp', alpha=0.2), ten_node(), signal(10), 1)
        self.assertEqual([record.k for record in trajectory.records], [1])
        lines = trajectory_to_csv(trajectory).splitlines()
        self.assertEqual(lines[0], 'k,max_row_dist,dirichlet,stationary_dist')
        self.assertEqual(len(lines), 2)

    def test_invalid_steps(self):
        """Test zero steps are rejected"""
        with self.assertRaises(ParameterError):
            smoothing_trajectory(propagation('rw-left'), ten_node(), signal(10), 0)

    def test_stationary_row(self):
        """Test the stationary row is the degree-weighted mean"""
        g = p3()
        np.testing.assert_allclose(stationary_row(g, [[1.0], [0.0], [0.0]]), [0.25])
        np.testing.assert_allclose(stationary_row(g, [[1.0], [0.0], [0.0]], 'renorm-left'), [2 / 7])

    def test_repeated_steps_match_stacked_operator(self):
        """Test k gcn steps give the same metrics as one step of the degree-k expansion"""
        g, X = ten_node(), signal(10, features=3, seed=21)
        gcn = make_linear('gcn')
        L = normalize(g, 'renorm-sym-laplacian')
        for k in (2, 5, 8):
            with self.subTest(k=k):
                stacked = stack(gcn, k)
                self.assertEqual(stacked.degrees, (k, 0))
                repeated = smoothing_trajectory(gcn, g, X, k).final
                single = smoothing_trajectory(stacked, g, X, 1).final
                np.testing.assert_allclose(
                    [single.max_row_dist, single.dirichlet, single.stationary_dist],
                    [repeated.max_row_dist, repeated.dirichlet, repeated.stationary_dist],
                    rtol=1e-8, atol=1e-8,
                )

                Z = X
                for _ in range(k):
                    Z = apply_spatial(gcn, g, Z)
                self.assertAlmostEqual(rayleigh_quotient(L, apply_spatial(stacked, g, X)),
                                       rayleigh_quotient(L, Z), delta=1e-8)


class TestPersonalizedPropagation(unittest.TestCase):
    """Test cases for energy retained by personalized propagation"""

    def test_ppnp_keeps_nonconstant_energy(self):
        """Test ppnp(0.2) retains at least (alpha / (2 - alpha))^2 of the non-constant energy"""
        alpha = 0.2
        for seed in range(5):
            g = random_graph(40, seed=seed)
            X = signal(40, features=3, seed=seed)
            Z = apply_spatial(make_rational('ppnp', alpha=alpha), g, X)
            bound = (alpha / (2.0 - alpha)) ** 2 * nonconstant_energy(g, X)
            self.assertGreaterEqual(nonconstant_energy(g, Z), bound - 1e-9)

    def test_spectral_coefficient_oracle(self):
        """Test the non-constant energy equals the spectral tail sum"""
        g = ten_node()
        X = signal(10, features=2, seed=3)
        spec = make_rational('ppnp', alpha=0.2)
        basis = eigendecompose(normalize(g, 'renorm-sym-laplacian'))
        coefficients = gft(basis, X) * spec.response(basis.lambdas)[:, None]
        expected = float(np.sum(coefficients[1:] ** 2))
        Z = apply_spatial(spec, g, X)
        self.assertAlmostEqual(nonconstant_energy(g, Z), expected, places=9)


class TestLabelPropagation(unittest.TestCase):
    """Test cases for the closed-form smoothing solution"""

    def test_matches_auto_regressive(self):
        """Test (I + alpha L) Z = Y equals the auto_regressive filter"""
        g = ten_node()
        Y = signal(10, features=3, seed=7)
        for alpha in (0.5, 1.0, 4.0):
            Z = analytic_label_prop(normalize(g, 'renorm-sym-laplacian'), Y, alpha)
            expected = apply_spatial(make_rational('auto_regressive', alpha=alpha), g, Y)
            np.testing.assert_allclose(Z, expected, atol=1e-10)

    def test_small_alpha_returns_labels(self):
        """Test alpha -> 0 leaves Y unchanged"""
        Y = signal(10, features=2, seed=8)
        Z = analytic_label_prop(normalize(ten_node(), 'sym-laplacian'), Y, 1e-9)
        self.assertLessEqual(np.abs(Z - Y).max(), 1e-6)

    def test_invalid_inputs(self):
        """Test non-positive alpha and adjacency kinds are rejected"""
        with self.assertRaises(ParameterError):
            analytic_label_prop(normalize(ten_node(), 'sym-laplacian'), signal(10), 0.0)
        with self.assertRaises(KindMismatchError):
            analytic_label_prop(normalize(ten_node(), 'sym'), signal(10), 1.0)


if __name__ == '__main__':
    unittest.main()
