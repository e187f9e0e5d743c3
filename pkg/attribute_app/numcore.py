"""
Shared numerical plumbing: the labeled sequence dataset, signal-matrix
layout and seeded randomness.

Dense matrices are plain float64 numpy arrays; a signal matrix ``Y`` has
one column per frame (n x N).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .exceptions import InputError

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    """Every stochastic operation takes a generator built from one seed."""
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    sequence_id: str
    frames: np.ndarray  # F x n, one row per frame
    label: Optional[int] = None
    group: Optional[str] = None
    frame_ids: tuple = ()

    def __post_init__(self):
        frames = np.array(self.frames, dtype=float, ndmin=2)
        if frames.shape[0] < 1 or frames.shape[1] < 1:
            raise InputError(f"sequence {self.sequence_id!r} has no frames")
        if not np.all(np.isfinite(frames)):
            raise InputError(
                f"sequence {self.sequence_id!r} has non-finite features")
        frames.setflags(write=False)
        object.__setattr__(self, 'frames', frames)
        ids = tuple(int(i) for i in self.frame_ids) or tuple(
            range(frames.shape[0]))
        if len(ids) != frames.shape[0]:
            raise InputError(
                f"sequence {self.sequence_id!r}: {len(ids)} frame ids for "
                f"{frames.shape[0]} frames")
        if any(b <= a for a, b in zip(ids, ids[1:])) or ids[0] < 0:
            raise InputError(
                f"sequence {self.sequence_id!r}: frame ids must be "
                "non-negative and strictly increasing")
        object.__setattr__(self, 'frame_ids', ids)
        if self.label is not None and int(self.label) < 1:
            raise InputError(
                f"sequence {self.sequence_id!r}: labels start at 1")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Labeled sequences of per-frame feature vectors."""

    sequences: tuple = field(default_factory=tuple)

    def __post_init__(self):
        sequences = tuple(self.sequences)
        object.__setattr__(self, 'sequences', sequences)
        seen = set()
        dims = set()
        for seq in sequences:
            if seq.sequence_id in seen:
                raise InputError(f"duplicate sequence id {seq.sequence_id!r}")
            seen.add(seq.sequence_id)
            dims.add(seq.frames.shape[1])
        if len(dims) > 1:
            raise InputError(
                f"frames have inconsistent dimensions {sorted(dims)}")

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    @property
    def n(self) -> int:
        if not self.sequences:
            return 0
        return self.sequences[0].frames.shape[1]

    @property
    def n_classes(self) -> int:
        labels = [s.label for s in self.sequences if s.label is not None]
        return max(labels) if labels else 0

    @property
    def n_frames(self) -> int:
        return sum(s.n_frames for s in self.sequences)

    @property
    def is_labeled(self) -> bool:
        return bool(self.sequences) and all(
            s.label is not None for s in self.sequences)

    def get(self, sequence_id: str) -> FeatureSequence:
        for seq in self.sequences:
            if seq.sequence_id == sequence_id:
                return seq
        raise InputError(f"unknown sequence id {sequence_id!r}")

    def subset(self, keep: Iterable[str]) -> 'FeatureDataset':
        keep = set(keep)
        return FeatureDataset(
            tuple(s for s in self.sequences if s.sequence_id in keep))

    def without_class(self, label: int) -> 'FeatureDataset':
        return FeatureDataset(
            tuple(s for s in self.sequences if s.label != label))

    def require_labels(self) -> None:
        """Training inputs must be labeled and cover every class 1..M."""
        if not self.is_labeled:
            missing = [s.sequence_id for s in self.sequences if s.label is None]
            raise InputError(
                f"unlabeled sequences: {', '.join(missing[:5])}")
        present = {s.label for s in self.sequences}
        absent = sorted(set(range(1, self.n_classes + 1)) - present)
        if absent:
            raise InputError(
                f"classes {absent} have no sequence; labels must cover "
                f"1..{self.n_classes}")


def flatten(dataset: FeatureDataset):
    """
    Lay every frame out as one column of the signal matrix.

    Returns ``(Y, labels, frame_index)`` where column j of ``Y`` is the j-th
    frame in sequence-major, frame-ascending order, ``labels[j]`` is its
    class (0 when unlabeled) and ``frame_index[j]`` is
    ``(sequence_id, frame position)``.
    """
    if not dataset.sequences or dataset.n_frames == 0:
        raise InputError("no signals")
    Y = np.concatenate([s.frames for s in dataset.sequences], axis=0).T
    labels = np.concatenate([
        np.full(s.n_frames, s.label or 0, dtype=int)
        for s in dataset.sequences
    ])
    frame_index = [
        (s.sequence_id, pos)
        for s in dataset.sequences for pos in range(s.n_frames)
    ]
    return np.ascontiguousarray(Y), labels, frame_index


def unflatten(Y: np.ndarray, labels, frame_index, template=None):
    """
    Inverse of :func:`flatten`.

    ``template`` (the original dataset) supplies frame ids and groups; when
    omitted frame ids are the positions.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.shape[1] != len(frame_index):
        raise InputError(
            f"{Y.shape[1]} signals but {len(frame_index)} index entries")
    order = []
    columns = {}
    for col, (sequence_id, pos) in enumerate(frame_index):
        if sequence_id not in columns:
            columns[sequence_id] = []
            order.append(sequence_id)
        columns[sequence_id].append((pos, col))
    sequences = []
    for sequence_id in order:
        entries = sorted(columns[sequence_id])
        cols = [col for _, col in entries]
        label = int(labels[cols[0]]) or None
        kwargs = {}
        if template is not None:
            original = template.get(sequence_id)
            kwargs = {'group': original.group,
                      'frame_ids': original.frame_ids}
        sequences.append(FeatureSequence(
            sequence_id=sequence_id, frames=Y[:, cols].T, label=label,
            **kwargs))
    return FeatureDataset(tuple(sequences))


def l2_normalize_columns(m: np.ndarray):
    """
    Scale every nonzero column to unit Euclidean norm.

    Returns ``(normalized, zero_columns)``; zero columns are left untouched
    and flagged in the boolean mask.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    norms = np.linalg.norm(m, axis=0)
    zero = norms == 0.0
    # Unit columns are returned bit-identical so normalization is idempotent.
    scale = np.where(zero | (norms == 1.0), 1.0, norms)
    if zero.any():
        logger.debug("%d zero columns left unnormalized", int(zero.sum()))
    return m / scale, zero
