"""Class distributions over dictionary atoms and the label-entropy terms."""
from __future__ import annotations

import numpy as np

from .exceptions import InputError

AGGREGATIONS = ('abs', 'signed', 'count')
PRIORS = ('mass', 'uniform')


def uniform(M: int) -> np.ndarray:
    return np.full(M, 1.0 / M)


def _normalize_rows(mass: np.ndarray) -> np.ndarray:
    totals = mass.sum(axis=1, keepdims=True)
    M = mass.shape[1]
    with np.errstate(invalid='ignore', divide='ignore'):
        dist = np.where(totals > 0, mass / np.where(totals > 0, totals, 1.0),
                        1.0 / M)
    return dist


def atom_class_dist(codes, labels, M: int, aggregation: str = 'abs'):
    """
    P(L | d_i) for every atom: the atom's coefficients summed per class of
    the signal they encode, normalized. Atoms with no mass get the uniform
    distribution.

    ``aggregation`` selects the per-coefficient mass: ``abs`` (|x|),
    ``signed`` (x, negative class totals clipped to 0) or ``count``
    (1 per nonzero).
    """
    if aggregation not in AGGREGATIONS:
        raise InputError(f"unknown aggregation {aggregation!r}")
    labels = np.asarray(labels, dtype=int)
    if labels.shape[0] != codes.N:
        raise InputError(
            f"{labels.shape[0]} labels for {codes.N} coded signals")
    if np.any(labels < 1):
        raise InputError("every signal must be labeled")
    if M < 1 or np.any(labels > M):
        raise InputError(f"labels must lie in [1, {M}]")

    matrix = codes.matrix.tocoo()
    if aggregation == 'abs':
        weight = np.abs(matrix.data)
    elif aggregation == 'signed':
        weight = matrix.data
    else:
        weight = (matrix.data != 0).astype(float)
    mass = np.zeros((codes.K, M))
    np.add.at(mass, (matrix.row, labels[matrix.col] - 1), weight)
    if aggregation == 'signed':
        mass = np.clip(mass, 0.0, None)
    return _normalize_rows(mass)


def atom_prior(codes, mode: str = 'mass') -> np.ndarray:
    """
    p(d_i): each atom's share of the total absolute coefficient mass, or
    uniform. Falls back to uniform when the codes carry no mass at all.
    """
    if mode not in PRIORS:
        raise InputError(f"unknown prior {mode!r}")
    K = codes.K
    if mode == 'uniform':
        return uniform(K)
    mass = np.asarray(abs(codes.rows()).sum(axis=1)).ravel()
    total = mass.sum()
    if total <= 0:
        return uniform(K)
    return mass / total


def set_class_dist(dists, members) -> np.ndarray:
    """P(L | D*): mean of the member distributions; uniform for empty D*."""
    dists = np.asarray(dists, dtype=float)
    members = np.asarray(list(members), dtype=int)
    if members.size == 0:
        return uniform(dists.shape[1])
    return dists[members].mean(axis=0)


def _xlogx_weighted(p, weight):
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(p > 0, weight * p * np.log(np.where(p > 0, p, 1.0)),
                         0.0)
    return terms


def label_cond_entropy(p_target, p_cond) -> float:
    """
    H(L_d* | L_D*) = -sum_L P(L_d*) P(L_D*) log P(L_d*), with 0 log 0 = 0.
    """
    p_target = np.asarray(p_target, dtype=float)
    p_cond = np.asarray(p_cond, dtype=float)
    return float(-_xlogx_weighted(p_target, p_cond).sum(axis=-1))


def label_cond_entropies(p_targets, p_conds) -> np.ndarray:
    """Row-wise :func:`label_cond_entropy` for stacked distributions."""
    p_targets = np.asarray(p_targets, dtype=float)
    p_conds = np.broadcast_to(np.asarray(p_conds, dtype=float),
                              p_targets.shape)
    return -_xlogx_weighted(p_targets, p_conds).sum(axis=-1)
