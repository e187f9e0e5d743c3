"""
Seeded synthetic data: sparse signals over a known dictionary, labeled
class mixtures, class attributes under a shared background, attribute-driven
action sequences performed by several actors, and clustered frame sets for
summarization.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.spatial import distance

from .exceptions import InputError
from .numcore import FeatureDataset, FeatureSequence, l2_normalize_columns, \
    make_rng
from .pursuit import Dictionary

logger = logging.getLogger(__name__)

KINDS = ('sparse', 'mixture', 'attributes', 'actions', 'clusters')


def random_dictionary(n: int, K: int, rng) -> Dictionary:
    atoms, _ = l2_normalize_columns(rng.standard_normal((n, K)))
    return Dictionary(atoms)


def mutual_coherence(atoms) -> float:
    """max_{i != j} |d_i^T d_j|."""
    atoms = np.asarray(atoms, dtype=float)
    gram = np.abs(atoms.T @ atoms)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max()) if gram.size else 0.0


def exact_recovery_coefficient(atoms, support) -> float:
    """
    max over atoms outside ``support`` of ||pinv(D_S) d_j||_1. Below 1 OMP
    recovers every signal supported on ``support``.
    """
    atoms = np.asarray(atoms, dtype=float)
    support = np.asarray(support, dtype=int)
    outside = np.setdiff1d(np.arange(atoms.shape[1]), support)
    if outside.size == 0:
        return 0.0
    weights = np.linalg.pinv(atoms[:, support]) @ atoms[:, outside]
    return float(np.abs(weights).sum(axis=0).max())


def sparse_signals(n: int, K: int, N: int, T: int, seed: int = 0, *,
                   dictionary: Optional[Dictionary] = None,
                   coherence_guard: bool = False, noise: float = 0.0,
                   min_magnitude: float = 0.5, max_tries: int = 1000):
    """
    N signals, each an exact combination of T atoms of a random unit-norm
    n x K dictionary with coefficient magnitudes in [min_magnitude, 1].

    With ``coherence_guard`` every support is redrawn until its exact
    recovery coefficient is below 1.

    Returns ``(dictionary, Y, supports)``; ``supports`` is N x T, sorted.
    """
    if not 1 <= T <= min(n, K):
        raise InputError(f"T={T} must lie in [1, min(n={n}, K={K})]")
    rng = make_rng(seed)
    if dictionary is None:
        dictionary = random_dictionary(n, K, rng)
    atoms = dictionary.atoms
    Y = np.zeros((n, N))
    supports = np.zeros((N, T), dtype=int)
    for j in range(N):
        for _ in range(max_tries):
            support = np.sort(rng.choice(K, size=T, replace=False))
            if not coherence_guard or \
                    exact_recovery_coefficient(atoms, support) < 1.0:
                break
        else:
            raise InputError(
                f"no support passed the coherence guard in {max_tries} draws")
        magnitude = rng.uniform(min_magnitude, 1.0, size=T)
        sign = rng.choice((-1.0, 1.0), size=T)
        Y[:, j] = atoms[:, support] @ (magnitude * sign)
        supports[j] = support
    if noise > 0:
        Y += noise * rng.standard_normal(Y.shape)
    return dictionary, Y, supports


def _as_dataset(frames_per_sequence, labels, groups, prefix):
    sequences = []
    for i, (frames, label, group) in enumerate(
            zip(frames_per_sequence, labels, groups)):
        sequences.append(FeatureSequence(
            sequence_id=f"{prefix}{i:04d}", frames=frames, label=label,
            group=group))
    return FeatureDataset(tuple(sequences))


def labeled_mixture(n: int = 16, M: int = 4, sequences_per_class: int = 10,
                    frames: int = 10, seed: int = 0, *,
                    spread: float = 0.1) -> FeatureDataset:
    """
    Separable classes: frames of class c scatter around a random unit
    center with per-coordinate noise ``spread / sqrt(n)``.
    """
    if M < 1 or sequences_per_class < 1 or frames < 1:
        raise InputError("mixture needs at least one class, sequence and frame")
    rng = make_rng(seed)
    centers, _ = l2_normalize_columns(rng.standard_normal((n, M)))
    blocks, labels = [], []
    for c in range(M):
        for _ in range(sequences_per_class):
            noise = spread / np.sqrt(n) * rng.standard_normal((frames, n))
            blocks.append(centers[:, c][None, :] + noise)
            labels.append(c + 1)
    return _as_dataset(blocks, labels, [None] * len(labels), 'mix')


def separated_directions(n: int, count: int, rng, *,
                         max_coherence: float = 0.5,
                         max_tries: int = 1000) -> np.ndarray:
    """
    ``count`` random unit vectors in R^n whose pairwise |cosine| stays
    below ``max_coherence``, drawn one at a time by rejection.
    """
    chosen = np.zeros((n, 0))
    for _ in range(count):
        for _ in range(max_tries):
            vector = rng.standard_normal(n)
            vector /= np.linalg.norm(vector)
            if not chosen.shape[1] or \
                    np.abs(chosen.T @ vector).max() < max_coherence:
                break
        else:
            raise InputError(
                f"no direction below coherence {max_coherence} in {max_tries} "
                f"draws; lower the count or raise n")
        chosen = np.column_stack([chosen, vector])
    return chosen


def attribute_mixture(n: int = 16, M: int = 4, sequences_per_class: int = 20,
                      frames: int = 20, seed: int = 0, *,
                      attributes_per_class: int = 6, background: float = 0.2,
                      background_scale: float = 4.0,
                      noise: float = 0.1) -> FeatureDataset:
    """
    Every class owns ``attributes_per_class`` directions; a frame shows one
    of them at unit magnitude. With probability ``background`` a frame
    shows instead a direction shared by all classes, with random sign and
    a magnitude of ``background_scale`` times U[0.5, 1.5]. Noise has
    expected norm ``noise``.
    """
    if M < 1 or sequences_per_class < 1 or frames < 1:
        raise InputError("mixture needs at least one class, sequence and frame")
    if not 0.0 <= background < 1.0:
        raise InputError("background share must lie in [0, 1)")
    rng = make_rng(seed)
    directions = separated_directions(n, M * attributes_per_class + 1, rng)
    shared = directions[:, -1]
    blocks, labels = [], []
    for c in range(M):
        for _ in range(sequences_per_class):
            picks = c * attributes_per_class + rng.integers(
                0, attributes_per_class, size=frames)
            sequence = directions[:, picks].T.copy()
            hidden = np.flatnonzero(rng.random(frames) < background)
            if hidden.size:
                scale = background_scale * rng.uniform(0.5, 1.5, hidden.size)
                sign = rng.choice((-1.0, 1.0), size=hidden.size)
                sequence[hidden] = (sign * scale)[:, None] * shared[None, :]
            sequence += noise / np.sqrt(n) * rng.standard_normal(
                sequence.shape)
            blocks.append(sequence)
            labels.append(c + 1)
    return _as_dataset(blocks, labels, [None] * len(labels), 'att')


def action_sequences(n: int = 24, M: int = 3, actors: int = 9,
                     frames: int = 12, seed: int = 0, *,
                     attributes_per_class: int = 4, shared: int = 2,
                     T: int = 2, noise: float = 0.01,
                     actor_jitter: float = 0.1) -> FeatureDataset:
    """
    Every actor performs every class once. A class is an ordered cycle over
    its own attributes; each frame mixes the current attribute with one
    shared attribute (T=2) and the actor's style perturbs the weights.
    """
    if not 1 <= T <= 2:
        raise InputError("action frames mix one or two attributes")
    rng = make_rng(seed)
    total = M * attributes_per_class + shared
    attributes = random_dictionary(n, total, rng).atoms
    style = 1.0 + actor_jitter * rng.standard_normal((actors, 2))
    blocks, labels, groups = [], [], []
    for actor in range(actors):
        for c in range(M):
            own = c * attributes_per_class + np.arange(attributes_per_class)
            phase = rng.integers(0, attributes_per_class)
            sequence = np.zeros((frames, n))
            for t in range(frames):
                step = (phase + t * attributes_per_class // frames) \
                    % attributes_per_class
                sequence[t] = style[actor, 0] * attributes[:, own[step]]
                if T == 2 and shared:
                    common = M * attributes_per_class + t % shared
                    sequence[t] += 0.5 * style[actor, 1] * \
                        attributes[:, common]
            sequence += noise * rng.standard_normal(sequence.shape)
            blocks.append(sequence)
            labels.append(c + 1)
            groups.append(f"actor{actor}")
    return _as_dataset(blocks, labels, groups, 'act')


def clustered_frames(n: int = 32, clusters: int = 10, per_cluster: int = 10,
                     seed: int = 0, *, noise: float = 0.05,
                     shuffle: bool = True):
    """
    Frames around ``clusters`` random unit centers. The noise vector of a
    frame has expected norm ``noise`` times the smallest center gap.

    Returns ``(frames n x F, assignment)``.
    """
    if clusters < 1 or per_cluster < 1:
        raise InputError("need at least one cluster and one frame per cluster")
    rng = make_rng(seed)
    centers, _ = l2_normalize_columns(rng.standard_normal((n, clusters)))
    gap = distance.pdist(centers.T).min() if clusters > 1 else 1.0
    assignment = np.repeat(np.arange(clusters), per_cluster)
    if shuffle:
        assignment = rng.permutation(assignment)
    sigma = noise * gap / np.sqrt(n)
    frames = centers[:, assignment] + sigma * rng.standard_normal(
        (n, assignment.size))
    return frames, assignment


def generate(kind: str, seed: int = 0, **options) -> FeatureDataset:
    """Dataset of the given ``kind`` for the ``gen`` command."""
    if kind == 'sparse':
        frames = options.pop('frames', 10)
        _, Y, _ = sparse_signals(
            options.pop('n', 32), options.pop('atoms', 64),
            options.pop('signals', 500), options.pop('sparsity', 4), seed,
            **options)
        blocks = [Y[:, i:i + frames].T for i in range(0, Y.shape[1], frames)]
        return _as_dataset(blocks, [None] * len(blocks),
                           [None] * len(blocks), 'sig')
    if kind == 'mixture':
        return labeled_mixture(seed=seed, **options)
    if kind == 'attributes':
        return attribute_mixture(seed=seed, **options)
    if kind == 'actions':
        return action_sequences(seed=seed, **options)
    if kind == 'clusters':
        count = options.pop('sequences', 1)
        blocks = [clustered_frames(seed=seed + i, **options)[0].T
                  for i in range(count)]
        return _as_dataset(blocks, [None] * count, [None] * count, 'clu')
    raise InputError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
