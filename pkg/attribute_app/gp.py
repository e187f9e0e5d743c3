"""
Gaussian-process model over dictionary atoms.

The kernel is the covariance between the sparse-coefficient rows of two
atoms (or the Gram matrix of frames for summarization). Conditional
variances follow the GP closed form

    V(t | C) = K(t,t) - K(t,C) K(C,C)^-1 K(C,t)

solved through a Cholesky factor of the conditioning block.

Compact-support evaluation: entries with |K(i,j)| < tau are dropped from
the support graph. A conditioning set then splits into the connected
components of the graph it induces; components are treated as mutually
uncorrelated and only those touching the target contribute. Inside a
component the full kernel values are used, so the compact path equals the
dense one whenever dropped entries are exact zeros.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg, sparse
from scipy.sparse.csgraph import connected_components

from .exceptions import ComputationError, InputError

logger = logging.getLogger(__name__)

JITTER = 1e-8
TAU = 1e-6
VARIANCE_FLOOR = 1e-12
LOG_2PIE = float(np.log(2.0 * np.pi * np.e))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Symmetric covariance over atoms; jitter is already on the diagonal."""

    values: np.ndarray
    tau: float = TAU
    jitter: float = JITTER
    floor: float = VARIANCE_FLOOR
    support: sparse.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2)
        if values.shape[0] != values.shape[1]:
            raise InputError(f"kernel must be square, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("kernel has non-finite entries")
        if not np.array_equal(values, values.T):
            raise InputError("kernel must be symmetric")
        if np.any(np.diag(values) < 0):
            raise InputError("kernel diagonal must be non-negative")
        if self.tau < 0 or self.jitter < 0:
            raise InputError("tau and jitter must be non-negative")
        if self.floor <= 0:
            raise InputError("variance floor must be positive")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

        mask = np.abs(values) >= self.tau
        np.fill_diagonal(mask, True)
        rows, cols = np.nonzero(mask)
        support = sparse.csr_matrix(
            (np.ones(rows.size), (rows, cols)), shape=values.shape)
        object.__setattr__(self, 'support', support)

    @classmethod
    def from_dense(cls, matrix, tau: float = TAU, jitter: float = JITTER,
                   floor: float = VARIANCE_FLOOR) -> 'KernelMatrix':
        """Symmetrize ``matrix`` and add ``jitter`` to its diagonal."""
        matrix = np.asarray(matrix, dtype=float)
        values = (matrix + matrix.T) / 2.0
        values[np.diag_indices_from(values)] += jitter
        return cls(values, tau=tau, jitter=jitter, floor=floor)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def density(self) -> float:
        return self.support.nnz / float(self.size ** 2)

    def neighbors(self, i: int) -> np.ndarray:
        start, stop = self.support.indptr[i], self.support.indptr[i + 1]
        return np.sort(self.support.indices[start:stop])

    def components(self, nodes: np.ndarray) -> list:
        """Split ``nodes`` into connected components of the support graph."""
        nodes = np.asarray(nodes, dtype=int)
        if nodes.size <= 1 or self.tau == 0:
            return [nodes] if nodes.size else []
        induced = self.support[nodes][:, nodes]
        count, labels = connected_components(induced, directed=False)
        if count == 1:
            return [nodes]
        order = np.argsort(labels, kind='stable')
        bounds = np.flatnonzero(np.diff(labels[order])) + 1
        return np.split(nodes[order], bounds)


def _index_array(indices: Optional[Iterable[int]]) -> np.ndarray:
    if indices is None:
        return np.empty(0, dtype=int)
    return np.asarray(sorted(int(i) for i in indices), dtype=int)


def _cholesky(block: np.ndarray):
    try:
        return linalg.cho_factor(block, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise ComputationError("conditioning block not PD") from exc


def kernel_from_codes(codes, tau: float = TAU, jitter: float = JITTER,
                      floor: float = VARIANCE_FLOOR) -> KernelMatrix:
    """
    Population covariance (1/N) between the coefficient rows of every pair
    of atoms, with ``jitter`` added to the diagonal.
    """
    N = codes.N
    if N < 2:
        raise InputError("covariance undefined")
    rows = codes.rows()
    mean = np.asarray(rows.mean(axis=1)).ravel()
    second = (rows @ rows.T).toarray() / N
    cov = second - np.outer(mean, mean)
    # Rows that are identically zero have exactly zero covariance.
    unused = np.diff(rows.indptr) == 0
    cov[unused, :] = 0.0
    cov[:, unused] = 0.0
    logger.debug("kernel over %d atoms from %d signals", codes.K, N)
    return KernelMatrix.from_dense(cov, tau=tau, jitter=jitter, floor=floor)


def kernel_linear(frames, tau: float = TAU, jitter: float = JITTER,
                  floor: float = VARIANCE_FLOOR) -> KernelMatrix:
    """Gram matrix d_i^T d_j of the columns of an n x F frame matrix."""
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 2 or frames.shape[1] < 1:
        raise InputError("kernel_linear needs at least one frame")
    return KernelMatrix.from_dense(frames.T @ frames, tau=tau, jitter=jitter,
                                   floor=floor)


def sparse_support_neighbors(kern: KernelMatrix, target: int) -> np.ndarray:
    """Atoms j with |K(target, j)| >= tau (the target's compact support)."""
    return kern.neighbors(target)


def _quadratic_terms(kern, cond, targets):
    """k_t^T K_CC^-1 k_t for every target column against one block C."""
    factor = _cholesky(kern.values[np.ix_(cond, cond)])
    cross = kern.values[np.ix_(cond, targets)]
    return np.einsum('ij,ij->j', cross, linalg.cho_solve(factor, cross))


def _relevant_components(kern, target, cond):
    direct = np.isin(cond, kern.neighbors(target))
    if not direct.any():
        return []
    return [comp for comp in kern.components(cond)
            if np.isin(comp, cond[direct]).any()]


def conditional_variance(kern: KernelMatrix, target: int, cond=None, *,
                         compact: bool = False,
                         floor: Optional[float] = None) -> float:
    """V(target | cond), clamped to ``floor`` or the kernel's floor."""
    cond = _index_array(cond)
    if np.isin(target, cond):
        raise InputError(f"target {target} is part of the conditioning set")
    variance = kern.values[target, target]
    if cond.size:
        blocks = (_relevant_components(kern, target, cond)
                  if compact else [cond])
        for block in blocks:
            variance -= _quadratic_terms(kern, block, [target])[0]
    return max(float(variance), kern.floor if floor is None else floor)


def entropy_from_variance(variance):
    """Gaussian entropy 1/2 ln(2 pi e V), natural log."""
    return 0.5 * (LOG_2PIE + np.log(variance))


def conditional_entropy(kern: KernelMatrix, target: int, cond=None, *,
                        compact: bool = False,
                        floor: Optional[float] = None) -> float:
    return float(entropy_from_variance(conditional_variance(
        kern, target, cond, compact=compact, floor=floor)))


def conditional_variances(kern: KernelMatrix, candidates, cond=None, *,
                          compact: bool = False,
                          floor: Optional[float] = None,
                          n_jobs: Optional[int] = None) -> np.ndarray:
    """
    V(c | cond) for every candidate c, sharing one factorization of each
    conditioning block.
    """
    candidates = np.asarray(candidates, dtype=int)
    cond = _index_array(cond)
    variance = kern.values[candidates, candidates].copy()
    if cond.size and candidates.size:
        blocks = kern.components(cond) if compact else [cond]
        if compact:
            rows = kern.support[candidates]
            touched = [
                candidates[np.asarray(
                    rows[:, block].sum(axis=1)).ravel() > 0]
                for block in blocks
            ]
        else:
            touched = [candidates]
        jobs = [(block, targets) for block, targets in zip(blocks, touched)
                if targets.size]
        terms = Parallel(n_jobs=n_jobs, prefer='threads')(
            delayed(_quadratic_terms)(kern, block, targets)
            for block, targets in jobs)
        position = {int(c): i for i, c in enumerate(candidates)}
        for (_, targets), quad in zip(jobs, terms):
            variance[[position[int(t)] for t in targets]] -= quad
    return np.maximum(variance, kern.floor if floor is None else floor)


def _leave_one_out_block(kern, block):
    if block.size == 1:
        return kern.values[block, block].copy()
    factor = _cholesky(kern.values[np.ix_(block, block)])[0]
    lower_inv = linalg.solve_triangular(
        np.tril(factor), np.eye(block.size), lower=True, check_finite=False)
    return 1.0 / np.einsum('ij,ij->j', lower_inv, lower_inv)


def remainder_variances(kern: KernelMatrix, pool, *, compact: bool = False,
                        floor: Optional[float] = None,
                        n_jobs: Optional[int] = None) -> np.ndarray:
    """
    V(c | pool \\ {c}) for every c in ``pool``, read off the diagonal of the
    inverse pool block: V = 1 / [K_pool^-1]_cc.
    """
    pool = np.asarray(pool, dtype=int)
    blocks = kern.components(pool) if compact else [pool]
    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_leave_one_out_block)(kern, block) for block in blocks)
    variance = np.empty(pool.size)
    position = {int(c): i for i, c in enumerate(pool)}
    for block, values in zip(blocks, results):
        variance[[position[int(c)] for c in block]] = values
    return np.maximum(variance, kern.floor if floor is None else floor)


def joint_entropy(kern: KernelMatrix, subset) -> float:
    """H(S) = 1/2 ln det(2 pi e K_SS); 0 for the empty set."""
    subset = _index_array(subset)
    if subset.size == 0:
        return 0.0
    factor = _cholesky(kern.values[np.ix_(subset, subset)])[0]
    log_det = 2.0 * np.sum(np.log(np.diag(factor)))
    return float(0.5 * (subset.size * LOG_2PIE + log_det))


def mutual_information(kern: KernelMatrix, subset) -> float:
    """I(S; V \\ S) = H(S) + H(V \\ S) - H(V)."""
    subset = _index_array(subset)
    rest = np.setdiff1d(np.arange(kern.size), subset)
    everything = np.arange(kern.size)
    return (joint_entropy(kern, subset) + joint_entropy(kern, rest)
            - joint_entropy(kern, everything))
