"""
Sequence summarization: frames play the role of atoms, their Gram matrix is
the GP kernel, and MMI-1 picks the summary. The two objective terms are
kept per step: H(d|D*) rewards diversity, -H(d|D-bar*) rewards coverage.

Two baselines pick summaries from one side only: ME (diversity) and
k-means (coverage; the member frame closest to each centroid).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial import distance

from . import gp
from .exceptions import InputError
from .numcore import FeatureDataset, l2_normalize_columns
from .selection import fit_kmeans, select_me, select_mmi1

logger = logging.getLogger(__name__)

SUMMARY_METHODS = ('mmi1', 'me', 'kmeans')


@dataclass(frozen=True)
class Summary:
    sequence_id: str
    frames: tuple  # chosen frame positions, ascending
    order: tuple  # chosen frame positions, in selection order
    diversity: tuple  # per selection step
    coverage: tuple  # per selection step
    mutual_information: float = 0.0


def concatenate_features(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """
    Fuse several per-frame feature blocks (each n_b x F) into one n x F
    matrix, normalizing every block's columns first.
    """
    if not blocks:
        raise InputError("no feature blocks")
    widths = {np.asarray(b).shape[1] for b in blocks}
    if len(widths) != 1:
        raise InputError("feature blocks disagree on the frame count")
    return np.vstack([l2_normalize_columns(b)[0] for b in blocks])


def split_blocks(frames, sizes: Sequence[int]) -> List[np.ndarray]:
    """Cut the rows of an n x F frame matrix into blocks of ``sizes`` rows."""
    frames = np.asarray(frames, dtype=float)
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes) or sum(sizes) != frames.shape[0]:
        raise InputError(
            f"feature blocks {sizes} do not add up to n={frames.shape[0]}")
    return np.split(frames, np.cumsum(sizes)[:-1], axis=0)


def _closest_members(frames, k, seed, max_iter, tol):
    points = frames.T
    model = fit_kmeans(points, k, seed, max_iter=max_iter, tol=tol)
    chosen = []
    for c, centroid in enumerate(model.cluster_centers_):
        members = np.flatnonzero(model.labels_ == c)
        if not members.size:
            continue
        gaps = distance.cdist(points[members], centroid[None, :]).ravel()
        chosen.append(int(members[np.argmin(gaps)]))
    return chosen


def summarize_sequence(frames, k: int, *, sequence_id: str = '',
                       method: str = 'mmi1', normalize: bool = True,
                       compact: bool = False, tau: float = gp.TAU,
                       jitter: float = gp.JITTER, seed: int = 0,
                       max_iter: int = 100, tol: float = 1e-8,
                       n_jobs: Optional[int] = None) -> Summary:
    """
    Pick ``k`` frames of an n x F frame matrix with MMI-1, or with one of
    the ``me`` / ``kmeans`` baselines.
    """
    if method not in SUMMARY_METHODS:
        raise InputError(f"unknown summary method {method!r}; choose from "
                         f"{', '.join(SUMMARY_METHODS)}")
    frames = np.asarray(frames, dtype=float)
    F = frames.shape[1]
    if not 1 <= k <= F - 1:
        raise InputError(
            f"summary size k={k} must lie in [1, {F - 1}] for {F} frames")
    if normalize:
        frames, zero = l2_normalize_columns(frames)
        if zero.any():
            logger.warning("sequence %r has %d all-zero frames",
                           sequence_id, int(zero.sum()))
    kern = gp.kernel_linear(frames, tau=tau, jitter=jitter)
    diversity = coverage = ()
    if method == 'kmeans':
        chosen = _closest_members(frames, k, seed, max_iter, tol)
    elif method == 'me':
        trace = select_me(kern, k, compact=compact, n_jobs=n_jobs)
        chosen, diversity = trace.atoms, tuple(trace.diversity)
    else:
        trace = select_mmi1(kern, k, compact=compact, n_jobs=n_jobs)
        chosen = trace.atoms
        diversity, coverage = tuple(trace.diversity), tuple(trace.coverage)
    return Summary(
        sequence_id=sequence_id,
        frames=tuple(sorted(chosen)),
        order=tuple(chosen),
        diversity=diversity,
        coverage=coverage,
        mutual_information=gp.mutual_information(kern, chosen),
    )


def coverage_diversity_report(summary: Summary, frames):
    """
    Human-facing scores of a summary over an n x F frame matrix:
    diversity is the mean pairwise distance among chosen frames, coverage
    the mean distance of every frame to its nearest chosen one (lower is
    better).
    """
    points = np.asarray(frames, dtype=float).T
    chosen = points[list(summary.frames)]
    if chosen.shape[0] < 1:
        raise InputError("empty summary")
    diversity = (float(distance.pdist(chosen).mean())
                 if chosen.shape[0] > 1 else 0.0)
    coverage = float(distance.cdist(points, chosen).min(axis=1).mean())
    return diversity, coverage


def summarize_dataset(dataset: FeatureDataset, k: int, *,
                      method: str = 'mmi1', normalize: bool = True,
                      blocks: Optional[Sequence[int]] = None,
                      seed: int = 0, max_iter: int = 100, tol: float = 1e-8,
                      n_jobs: Optional[int] = None) -> List[Summary]:
    """
    One independent summary per sequence. With ``blocks`` the feature
    columns are cut into consecutive blocks of those sizes and fused with
    :func:`concatenate_features`.
    """
    if not len(dataset):
        raise InputError("no sequences to summarize")
    short = [s.sequence_id for s in dataset if s.n_frames <= k]
    if short:
        raise InputError(
            f"summary size {k} needs more frames in: {', '.join(short[:5])}")

    def frames_of(seq):
        if blocks:
            return concatenate_features(split_blocks(seq.frames.T, blocks))
        return seq.frames.T

    return Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(summarize_sequence)(frames_of(seq), k,
                                    sequence_id=seq.sequence_id,
                                    method=method, normalize=normalize,
                                    seed=seed, max_iter=max_iter, tol=tol)
        for seq in dataset)
