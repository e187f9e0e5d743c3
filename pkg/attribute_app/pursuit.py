"""
Sparse coding over a fixed dictionary (orthogonal matching pursuit) and
K-SVD learning of the initial over-complete dictionary.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from joblib import Parallel, delayed, effective_n_jobs
from scipy import linalg, sparse
from sklearn.utils import gen_even_slices

from .exceptions import InputError
from .numcore import l2_normalize_columns, make_rng

logger = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-9
DISTRIBUTION_TOL = 1e-9
RESIDUAL_TOL = 1e-10


def _check_distribution_rows(name, rows):
    if np.any(rows < 0):
        raise InputError(f"{name} has negative probabilities")
    sums = rows.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > DISTRIBUTION_TOL):
        raise InputError(f"{name} rows must sum to 1")


@dataclass(frozen=True, eq=False)
class Dictionary:
    atoms: np.ndarray  # n x K, unit-norm columns
    class_dist: Optional[np.ndarray] = None  # K x M
    atom_prior: Optional[np.ndarray] = None  # K

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float, ndmin=2)
        norms = np.linalg.norm(atoms, axis=0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if bad.size:
            raise InputError(
                f"dictionary atoms {bad[:5].tolist()} are not unit norm")
        atoms.setflags(write=False)
        object.__setattr__(self, 'atoms', atoms)
        if self.class_dist is not None:
            dist = np.array(self.class_dist, dtype=float, ndmin=2)
            if dist.shape[0] != self.K:
                raise InputError(
                    f"class distribution has {dist.shape[0]} rows for "
                    f"{self.K} atoms")
            _check_distribution_rows('class distribution', dist)
            object.__setattr__(self, 'class_dist', dist)
        if self.atom_prior is not None:
            prior = np.array(self.atom_prior, dtype=float).ravel()
            if prior.shape[0] != self.K:
                raise InputError(
                    f"atom prior has {prior.shape[0]} entries for "
                    f"{self.K} atoms")
            _check_distribution_rows('atom prior', prior)
            object.__setattr__(self, 'atom_prior', prior)

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    @property
    def K(self) -> int:
        return self.atoms.shape[1]

    def with_class_dist(self, class_dist, atom_prior=None) -> 'Dictionary':
        return Dictionary(self.atoms, class_dist, atom_prior)


@dataclass(frozen=True, eq=False)
class SparseCodeTable:
    """Sparse codes X (K x N, one column per signal) with sparsity bound T."""

    matrix: sparse.csc_matrix
    sparsity: int

    def __post_init__(self):
        matrix = sparse.csc_matrix(self.matrix, dtype=float)
        matrix.sum_duplicates()
        matrix.sort_indices()
        if self.sparsity < 1:
            raise InputError("sparsity bound must be positive")
        sizes = np.diff(matrix.indptr)
        if sizes.size and sizes.max() > self.sparsity:
            raise InputError(
                f"a signal uses {sizes.max()} atoms, bound is {self.sparsity}")
        object.__setattr__(self, 'matrix', matrix)

    @property
    def K(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]

    def support(self, j: int):
        start, stop = self.matrix.indptr[j], self.matrix.indptr[j + 1]
        return self.matrix.indices[start:stop], self.matrix.data[start:stop]

    def rows(self) -> sparse.csr_matrix:
        """Atom-major view; row i is the observation vector of atom i."""
        return self.matrix.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def check_unit_norm(atoms: np.ndarray) -> None:
    norms = np.linalg.norm(atoms, axis=0)
    if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
        raise InputError("dictionary is not L2-normalized")


def _omp_single(atoms, y, T, residual_tol):
    if np.linalg.norm(y) < residual_tol:
        return [], np.empty(0)
    residual = y
    support = []
    coef = np.empty(0)
    for _ in range(T):
        corr = np.abs(atoms.T @ residual)
        corr[support] = -np.inf
        best = int(np.argmax(corr))
        if not corr[best] > 0.0:
            break
        support.append(best)
        selected = atoms[:, support]
        coef = linalg.lstsq(selected, y)[0]
        residual = y - selected @ coef
        if np.linalg.norm(residual) < residual_tol:
            break
    return support, coef


def _omp_block(atoms, Y, T, residual_tol):
    return [_omp_single(atoms, Y[:, j], T, residual_tol)
            for j in range(Y.shape[1])]


def omp_encode(dictionary: Dictionary, Y, T: int, *,
               residual_tol: float = RESIDUAL_TOL,
               n_jobs: Optional[int] = None) -> SparseCodeTable:
    """
    Orthogonal matching pursuit of every column of ``Y``.

    Each step adds the atom most correlated with the residual (lowest index
    on ties) and re-solves least squares on the support; a signal stops at T
    atoms or once its residual norm drops below ``residual_tol``.
    """
    atoms = dictionary.atoms
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, K = atoms.shape
    if Y.shape[0] != n:
        raise InputError(
            f"signal dimension {Y.shape[0]} does not match dictionary "
            f"dimension {n}")
    check_unit_norm(atoms)
    if not 1 <= T <= min(K, n):
        raise InputError(f"sparsity {T} must lie in [1, min(K={K}, n={n})]")

    N = Y.shape[1]
    n_chunks = max(1, min(N, effective_n_jobs(n_jobs) * 4))
    blocks = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_omp_block)(atoms, Y[:, chunk], T, residual_tol)
        for chunk in gen_even_slices(N, n_chunks)
    ) if N else []

    indptr = [0]
    indices = []
    data = []
    for block in blocks:
        for support, coef in block:
            indices.extend(support)
            data.extend(coef.tolist())
            indptr.append(len(indices))
    matrix = sparse.csc_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int32)),
        shape=(K, N))
    return SparseCodeTable(matrix, T)


def reconstruction_rmse(dictionary: Dictionary, codes: SparseCodeTable,
                        Y) -> float:
    """Return ||Y - DX||_F / sqrt(nN)."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if codes.K != dictionary.K or Y.shape != (dictionary.n, codes.N):
        raise InputError(
            f"shape mismatch: Y {Y.shape}, D {dictionary.atoms.shape}, "
            f"X {codes.matrix.shape}")
    approx = np.asarray(codes.matrix.T @ dictionary.atoms.T).T
    return float(np.linalg.norm(Y - approx) / np.sqrt(Y.size))


def _initial_atoms(Y, K, rng):
    nonzero = np.flatnonzero(np.linalg.norm(Y, axis=0) > 0)
    if nonzero.size < K:
        raise InputError(
            f"only {nonzero.size} nonzero signals for {K} initial atoms")
    chosen = rng.choice(nonzero, size=K, replace=False)
    atoms, _ = l2_normalize_columns(Y[:, chosen])
    return atoms


def _column_errors(E):
    return np.linalg.norm(E, axis=0)


def ksvd_train(Y, K: int, T: int, iters: int = 20, seed: int = 0, *,
               tol: float = 1e-6, residual_tol: float = RESIDUAL_TOL,
               n_jobs: Optional[int] = None):
    """
    Learn a K-atom dictionary with K-SVD.

    Returns ``(dictionary, codes, error_history)`` where the history holds
    the RMSE after each completed iteration. Per signal, an iteration keeps
    the better of the fresh OMP code and the previous one, so the history
    never increases.
    """
    Y = np.asarray(Y, dtype=float)
    n, N = Y.shape
    if K > N:
        raise InputError("over-complete beyond sample count")
    if iters < 1:
        raise InputError("iters must be at least 1")
    if not 1 <= T <= min(K, n):
        raise InputError(f"sparsity {T} must lie in [1, min(K={K}, n={n})]")

    atoms = _initial_atoms(Y, K, make_rng(seed))
    signal_norms = np.linalg.norm(Y, axis=0)
    X = None
    history = []
    for it in range(iters):
        fresh = omp_encode(Dictionary(atoms), Y, T,
                           residual_tol=residual_tol, n_jobs=n_jobs).to_dense()
        E = Y - atoms @ fresh
        if X is not None:
            E_prev = Y - atoms @ X
            keep_prev = _column_errors(E_prev) < _column_errors(E)
            fresh[:, keep_prev] = X[:, keep_prev]
            E[:, keep_prev] = E_prev[:, keep_prev]
        X = fresh

        unused = []
        for j in range(K):
            users = np.flatnonzero(X[j])
            if users.size == 0:
                unused.append(j)
                continue
            E_j = E[:, users] + np.outer(atoms[:, j], X[j, users])
            u, s, vt = linalg.svd(E_j, full_matrices=False)
            atoms[:, j] = u[:, 0]
            X[j, users] = s[0] * vt[0]
            E[:, users] = E_j - np.outer(atoms[:, j], X[j, users])

        if unused:
            errors = _column_errors(E)
            order = np.lexsort((np.arange(N), -errors))
            candidates = [i for i in order if signal_norms[i] > 0]
            for j, signal in zip(unused, candidates):
                atoms[:, j] = Y[:, signal] / signal_norms[signal]
            logger.debug("iteration %d: replaced %d unused atoms",
                         it + 1, len(unused))

        rmse = float(np.linalg.norm(E) / np.sqrt(n * N))
        history.append(rmse)
        logger.debug("K-SVD iteration %d/%d rmse=%.6g", it + 1, iters, rmse)
        if tol > 0 and len(history) > 1 and history[-2] - history[-1] < tol:
            logger.info("K-SVD converged after %d iterations", it + 1)
            break

    atoms, _ = l2_normalize_columns(atoms)
    codes = SparseCodeTable(sparse.csc_matrix(X), T)
    return Dictionary(atoms), codes, history
