import numpy as np
from django.test import SimpleTestCase
from scipy import sparse

from attribute_app.exceptions import InputError
from attribute_app.numcore import make_rng
from attribute_app.pursuit import Dictionary, SparseCodeTable, ksvd_train, \
    omp_encode, reconstruction_rmse
from attribute_app.synthetic import random_dictionary, sparse_signals


class OmpTestCase(SimpleTestCase):
    def setUp(self):
        self.dictionary = Dictionary(np.array([
            [1.0, 0.0, 1.0 / np.sqrt(2)],
            [0.0, 1.0, 1.0 / np.sqrt(2)],
        ]))

    def test_most_correlated_atom(self):
        codes = omp_encode(self.dictionary, np.array([0.6, 0.8]), 1)
        atoms, values = codes.support(0)
        self.assertEqual(atoms.tolist(), [2])
        self.assertAlmostEqual(values[0], 1.4 / np.sqrt(2), places=12)

    def test_signal_equal_to_atom(self):
        codes = omp_encode(self.dictionary, np.array([0.0, 1.0]), 2)
        atoms, values = codes.support(0)
        self.assertEqual(atoms.tolist(), [1])
        self.assertAlmostEqual(values[0], 1.0, places=12)

    def test_zero_signal(self):
        codes = omp_encode(self.dictionary, np.zeros(2), 2)
        self.assertEqual(codes.support(0)[0].size, 0)

    def test_dimension_mismatch(self):
        with self.assertRaises(InputError):
            omp_encode(self.dictionary, np.ones(3), 1)

    def test_sparsity_out_of_range(self):
        with self.assertRaises(InputError):
            omp_encode(self.dictionary, np.ones(2), 3)

    def test_non_normalized_dictionary(self):
        with self.assertRaises(InputError):
            Dictionary(np.array([[2.0, 0.0], [0.0, 1.0]]))

    def test_residual_orthogonal_to_support(self):
        rng = make_rng(5)
        dictionary = random_dictionary(20, 40, rng)
        Y = rng.standard_normal((20, 30))
        codes = omp_encode(dictionary, Y, 5, n_jobs=2)
        for j in range(Y.shape[1]):
            atoms, values = codes.support(j)
            self.assertLessEqual(atoms.size, 5)
            self.assertEqual(len(set(atoms.tolist())), atoms.size)
            residual = Y[:, j] - dictionary.atoms[:, atoms] @ values
            self.assertLess(
                np.abs(dictionary.atoms[:, atoms].T @ residual).max(), 1e-8)

    def test_parallel_matches_serial(self):
        _, Y, _ = sparse_signals(16, 32, 50, 3, seed=2)
        dictionary = random_dictionary(16, 32, make_rng(9))
        serial = omp_encode(dictionary, Y, 3, n_jobs=1).to_dense()
        threaded = omp_encode(dictionary, Y, 3, n_jobs=4).to_dense()
        self.assertTrue(np.array_equal(serial, threaded))


class ReconstructionTestCase(SimpleTestCase):
    def test_exact_codes(self):
        dictionary = Dictionary(np.eye(2))
        Y = np.array([[1.0, 0.0], [0.0, 2.0]])
        codes = SparseCodeTable(sparse.csc_matrix(Y), 1)
        self.assertEqual(reconstruction_rmse(dictionary, codes, Y), 0.0)

    def test_empty_codes(self):
        dictionary = Dictionary(np.eye(2))
        Y = np.array([[3.0], [4.0]])
        codes = SparseCodeTable(sparse.csc_matrix((2, 1)), 1)
        self.assertAlmostEqual(reconstruction_rmse(dictionary, codes, Y),
                               5.0 / np.sqrt(2), places=12)

    def test_hand_case(self):
        dictionary = Dictionary(np.array([[0.0], [1.0]]))
        codes = SparseCodeTable(sparse.csc_matrix((1, 1)), 1)
        self.assertAlmostEqual(
            reconstruction_rmse(dictionary, codes, np.array([1.0, 0.0])),
            1.0 / np.sqrt(2), places=12)

    def test_shape_mismatch(self):
        dictionary = Dictionary(np.eye(2))
        codes = SparseCodeTable(sparse.csc_matrix((2, 3)), 1)
        with self.assertRaises(InputError):
            reconstruction_rmse(dictionary, codes, np.ones((2, 2)))


class KsvdTestCase(SimpleTestCase):
    def test_exact_orthonormal_atoms(self):
        basis, _ = np.linalg.qr(make_rng(1).standard_normal((8, 4)))
        Y = basis[:, np.arange(24) % 4]
        dictionary, codes, history = ksvd_train(Y, 4, 1, iters=20, seed=3)
        self.assertLess(history[-1], 1e-8)
        self.assertLess(reconstruction_rmse(dictionary, codes, Y), 1e-8)

    def test_error_history_non_increasing(self):
        _, Y, _ = sparse_signals(16, 24, 200, 3, seed=4)
        _, codes, history = ksvd_train(Y, 24, 3, iters=8, seed=0, tol=0.0)
        self.assertEqual(len(history), 8)
        for before, after in zip(history, history[1:]):
            self.assertLessEqual(after, before + 1e-9)
        self.assertLessEqual(np.diff(codes.matrix.indptr).max(), 3)

    def test_same_seed_same_dictionary(self):
        _, Y, _ = sparse_signals(12, 16, 80, 2, seed=6)
        first = ksvd_train(Y, 16, 2, iters=3, seed=42)[0]
        second = ksvd_train(Y, 16, 2, iters=3, seed=42, n_jobs=3)[0]
        self.assertTrue(np.array_equal(first.atoms, second.atoms))

    def test_atoms_are_unit_norm(self):
        _, Y, _ = sparse_signals(12, 16, 80, 2, seed=6)
        dictionary = ksvd_train(Y, 10, 2, iters=3, seed=1)[0]
        self.assertTrue(np.allclose(np.linalg.norm(dictionary.atoms, axis=0),
                                    1.0, atol=1e-9))

    def test_more_atoms_than_signals(self):
        with self.assertRaisesMessage(InputError,
                                      'over-complete beyond sample count'):
            ksvd_train(np.ones((3, 4)), 5, 1)
