import numpy as np
from django.test import SimpleTestCase

from attribute_app import gp, selection
from attribute_app.exceptions import ComputationError, InputError
from attribute_app.numcore import l2_normalize_columns, make_rng
from attribute_app.pursuit import Dictionary
from attribute_app.tests.test_gp import block_kernel


def codes_kernel(rng, K=10, N=60, density=0.4):
    """Covariance of random sparse coefficient rows."""
    rows = rng.standard_normal((K, N)) * (rng.random((K, N)) < density)
    return gp.KernelMatrix.from_dense(np.cov(rows, bias=True))


class EntropySelectionTestCase(SimpleTestCase):
    def test_identity_kernel_uses_lowest_indices(self):
        trace = selection.select_me(gp.KernelMatrix.from_dense(np.eye(4)), 2)
        self.assertEqual(trace.atoms, [0, 1])
        self.assertEqual(trace.method, 'me')
        self.assertEqual(len(trace.seconds), 2)

    def test_largest_variance_first(self):
        kern = gp.KernelMatrix.from_dense(np.diag([4.0, 1.0, 1.0]))
        self.assertEqual(selection.select_me(kern, 1).atoms, [0])

    def test_correlated_twin_is_skipped(self):
        kern = gp.KernelMatrix.from_dense(
            [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        self.assertEqual(selection.select_me(kern, 2).atoms, [0, 2])

    def test_gains_diminish(self):
        kern = codes_kernel(make_rng(1), K=12)
        trace = selection.select_me(kern, 8, compact=False)
        for before, after in zip(trace.objectives, trace.objectives[1:]):
            self.assertLessEqual(after, before + 1e-9)

    def test_k_out_of_range(self):
        with self.assertRaises(InputError):
            selection.select_me(gp.KernelMatrix.from_dense(np.eye(3)), 4)


class MutualInformationSelectionTestCase(SimpleTestCase):
    def test_representative_atom_wins(self):
        kern = gp.KernelMatrix.from_dense(
            [[1.0, 0.9, 0.0], [0.9, 1.0, 0.0], [0.0, 0.0, 1.0]], jitter=0.0)
        trace = selection.select_mmi1(kern, 1)
        self.assertEqual(trace.atoms, [0])
        # 1/2 ln(1 / 0.19)
        self.assertAlmostEqual(trace.objectives[0], 0.5 * np.log(1 / 0.19),
                               places=9)

    def test_identity_kernel(self):
        trace = selection.select_mmi1(gp.KernelMatrix.from_dense(np.eye(5)),
                                      3)
        self.assertEqual(trace.atoms, [0, 1, 2])

    def test_remaining_set_empty(self):
        with self.assertRaisesMessage(InputError, 'remaining set empty'):
            selection.select_mmi1(gp.KernelMatrix.from_dense(np.eye(3)), 3)

    def test_objective_is_sum_of_terms(self):
        trace = selection.select_mmi1(codes_kernel(make_rng(2)), 4)
        for objective, diversity, coverage in zip(
                trace.objectives, trace.diversity, trace.coverage):
            self.assertAlmostEqual(objective, diversity + coverage, places=12)

    def test_compact_matches_dense_on_block_kernel(self):
        kern = block_kernel(make_rng(3), 12, 5, tau=1e-6)
        dense = selection.select_mmi1(kern, 8, compact=False)
        compact = selection.select_mmi1(kern, 8, compact=True, n_jobs=2)
        self.assertEqual(dense.atoms, compact.atoms)
        self.assertTrue(np.allclose(dense.objectives, compact.objectives,
                                    atol=1e-8))

    def test_scaling_the_kernel_keeps_the_trace(self):
        rng = make_rng(4)
        for _ in range(5):
            kern = codes_kernel(rng)
            scaled = gp.KernelMatrix(kern.values * 4.0, tau=kern.tau * 4.0,
                                     jitter=kern.jitter)
            self.assertEqual(selection.select_me(kern, 4).atoms,
                             selection.select_me(scaled, 4).atoms)
            self.assertEqual(selection.select_mmi1(kern, 4).atoms,
                             selection.select_mmi1(scaled, 4).atoms)

    def test_min_gain_stops_early(self):
        kern = codes_kernel(make_rng(5), K=10)
        full = selection.select_mmi1(kern, 9)
        threshold = full.objectives[2]
        stopped = selection.select_mmi1(kern, 9, min_gain=threshold)
        self.assertLessEqual(len(stopped), 9)
        self.assertEqual(stopped.atoms, full.atoms[:len(stopped)])
        self.assertTrue(all(o >= threshold for o in stopped.objectives))
        none = selection.select_mmi1(kern, 9, min_gain=1e9)
        self.assertEqual(len(none), 0)

    def test_step_objectives_never_increase(self):
        rng = make_rng(6)
        for _ in range(5):
            trace = selection.select_mmi1(codes_kernel(rng, K=12), 10,
                                          compact=False)
            for before, after in zip(trace.objectives, trace.objectives[1:]):
                self.assertLessEqual(after, before + 1e-9)


class LabelAwareSelectionTestCase(SimpleTestCase):
    def test_zero_lambda_reduces_to_appearance_only(self):
        rng = make_rng(6)
        for _ in range(10):
            kern = codes_kernel(rng)
            dists = rng.dirichlet(np.ones(3), size=kern.size)
            self.assertEqual(
                selection.select_mmi2(kern, dists, 5, lam=0.0).atoms,
                selection.select_mmi1(kern, 5).atoms)

    def test_shared_distribution_keeps_appearance_order(self):
        kern = codes_kernel(make_rng(7))
        dists = np.tile([0.2, 0.3, 0.5], (kern.size, 1))
        self.assertEqual(
            selection.select_mmi2(kern, dists, 5, lam=1.0).atoms,
            selection.select_mmi1(kern, 5).atoms)

    def test_pool_representative_distribution_wins(self):
        # equal appearance; label gains are -0.0203, 0 and -0.0287
        kern = gp.KernelMatrix.from_dense(np.eye(3))
        dists = np.array([[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]])
        trace = selection.select_mmi2(kern, dists, 1, lam=10.0)
        self.assertEqual(trace.atoms, [1])
        self.assertAlmostEqual(trace.objectives[0], 0.0, places=9)
        self.assertEqual(trace.lam, 10.0)

    def test_single_class_lambda_is_zero(self):
        kern = codes_kernel(make_rng(8))
        self.assertEqual(
            selection.estimate_lambda(kern, np.ones((kern.size, 1))), 0.0)

    def test_lambda_for_a_shared_distribution(self):
        kern = codes_kernel(make_rng(9), K=6)
        q = np.array([0.7, 0.3])
        dists = np.tile(q, (6, 1))
        everything = np.arange(6)
        appearance = max(
            gp.conditional_entropy(kern, i)
            - gp.conditional_entropy(kern, i, everything[everything != i])
            for i in everything)
        uniform = np.full(2, 0.5)
        gain = (-np.sum(uniform * q * np.log(q))
                + np.sum(q * q * np.log(q)))
        self.assertAlmostEqual(selection.estimate_lambda(kern, dists,
                                                         compact=False),
                               max(gain, 0.0) / appearance, places=9)

    def test_degenerate_kernel(self):
        with self.assertRaisesMessage(ComputationError, 'degenerate kernel'):
            selection.estimate_lambda(gp.KernelMatrix.from_dense(np.eye(3)),
                                      np.full((3, 2), 0.5))

    def test_estimated_lambda_is_recorded(self):
        kern = codes_kernel(make_rng(10))
        dists = make_rng(11).dirichlet(np.ones(3), size=kern.size)
        trace = selection.select_mmi2(kern, dists, 3)
        self.assertEqual(trace.lam, selection.estimate_lambda(kern, dists))

    def test_negative_lambda(self):
        kern = codes_kernel(make_rng(12))
        with self.assertRaises(InputError):
            selection.select_mmi2(kern, np.full((kern.size, 2), 0.5), 2,
                                  lam=-1.0)


class MergeTestCase(SimpleTestCase):
    def test_identical_distributions_lose_nothing(self):
        loss, _, _ = selection.merge_loss(0.3, [0.2, 0.8], 0.1, [0.2, 0.8])
        self.assertAlmostEqual(float(loss), 0.0, places=12)

    def test_disjoint_classes_lose_ln2(self):
        loss, prior, dist = selection.merge_loss(0.5, [1.0, 0.0],
                                                 0.5, [0.0, 1.0])
        self.assertAlmostEqual(float(loss), np.log(2), delta=1e-12)
        self.assertEqual(float(prior), 1.0)
        self.assertTrue(np.allclose(dist, [0.5, 0.5]))

    def test_identical_pair_merges_first(self):
        dictionary = Dictionary(np.eye(4))
        dists = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.5, 0.5]])
        result, merges = selection.select_mmi3(dictionary, dists,
                                               np.full(4, 0.25), 3)
        self.assertEqual((merges[0].kept, merges[0].removed), (0, 2))
        self.assertAlmostEqual(merges[0].loss, 0.0, places=12)
        self.assertEqual(result.K, 3)
        self.assertTrue(np.allclose(result.atoms[:, 0],
                                    [1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0]))
        self.assertTrue(np.allclose(result.atom_prior, [0.5, 0.25, 0.25]))

    def test_ties_pick_the_smallest_pair(self):
        dictionary = Dictionary(np.eye(3))
        dists = np.full((3, 2), 0.5)
        _, merges = selection.select_mmi3(dictionary, dists,
                                          np.full(3, 1 / 3), 2)
        self.assertEqual((merges[0].kept, merges[0].removed), (0, 1))

    def test_total_loss_non_negative(self):
        rng = make_rng(13)
        atoms, _ = l2_normalize_columns(rng.standard_normal((6, 12)))
        dists = rng.dirichlet(np.ones(3), size=12)
        prior = rng.dirichlet(np.ones(12))
        result, merges = selection.select_mmi3(Dictionary(atoms), dists,
                                               prior, 4)
        self.assertEqual(len(merges), 8)
        self.assertGreaterEqual(sum(m.loss for m in merges), 0.0)
        self.assertAlmostEqual(result.atom_prior.sum(), 1.0, places=9)
        self.assertTrue(np.allclose(result.class_dist.sum(axis=1), 1.0))

    def test_negated_partner_is_aligned(self):
        atoms = np.array([[1.0, -0.96, 0.0], [0.0, 0.28, 0.0],
                          [0.0, 0.0, 1.0]])
        dists = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        result, merges = selection.select_mmi3(
            Dictionary(atoms), dists, np.array([0.25, 0.25, 0.5]), 2)
        self.assertEqual((merges[0].kept, merges[0].removed), (0, 1))
        self.assertGreater(abs(result.atoms[0, 0]), 0.98)

    def test_k_out_of_range(self):
        with self.assertRaises(InputError):
            selection.select_mmi3(Dictionary(np.eye(3)), np.full((3, 2), 0.5),
                                  np.full(3, 1 / 3), 3)


class KmeansTestCase(SimpleTestCase):
    def test_every_atom_its_own_cluster(self):
        atoms, _ = l2_normalize_columns(make_rng(14).standard_normal((5, 6)))
        result = selection.select_kmeans(Dictionary(atoms), 6, seed=1)
        for i in range(6):
            gaps = np.linalg.norm(result.atoms - atoms[:, [i]], axis=0)
            self.assertLess(gaps.min(), 1e-9)

    def test_two_tight_clusters(self):
        rng = make_rng(15)
        centers = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        points = np.repeat(centers, 5, axis=1) + \
            0.01 * rng.standard_normal((3, 10))
        atoms, _ = l2_normalize_columns(points)
        result = selection.select_kmeans(Dictionary(atoms), 2, seed=3)
        expected, _ = l2_normalize_columns(np.stack(
            [atoms[:, :5].mean(axis=1), atoms[:, 5:].mean(axis=1)], axis=1))
        for c in range(2):
            gaps = np.linalg.norm(result.atoms - expected[:, [c]], axis=0)
            self.assertLess(gaps.min(), 1e-6)

    def test_duplicated_atom(self):
        atom = np.array([0.6, 0.8])
        result = selection.select_kmeans(
            Dictionary(np.tile(atom[:, None], (1, 4))), 1)
        self.assertTrue(np.allclose(result.atoms[:, 0], atom, atol=1e-12))

    def test_same_seed_same_centroids(self):
        atoms, _ = l2_normalize_columns(make_rng(16).standard_normal((4, 30)))
        first = selection.select_kmeans(Dictionary(atoms), 5, seed=9)
        second = selection.select_kmeans(Dictionary(atoms), 5, seed=9)
        self.assertTrue(np.array_equal(first.atoms, second.atoms))

    def test_tolerance_is_an_absolute_shift(self):
        points = 10.0 * make_rng(17).standard_normal((30, 4))
        model = selection.fit_kmeans(points, 3, seed=2, tol=1e-8)
        spread = np.mean(np.var(points, axis=0))
        self.assertAlmostEqual(model.tol * spread, 1e-8, delta=1e-20)
        self.assertEqual(model.labels_.shape, (30,))
