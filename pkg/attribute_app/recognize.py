"""
Recognition in the sparse-code domain: encode sequences over a learned
dictionary, compare them by DTW or by code histograms, classify with k-NN,
and score dictionaries by purity and compactness.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial import distance
from sklearn.metrics import accuracy_score, confusion_matrix
from sklearn.model_selection import GroupKFold, LeaveOneGroupOut

from .exceptions import InputError
from .numcore import FeatureDataset, flatten
from .pursuit import Dictionary, omp_encode

logger = logging.getLogger(__name__)

SCHEMES = ('dtw', 'hist')
METRICS = ('dtw', 'euclidean')


@dataclass(frozen=True, eq=False)
class CodeSequence:
    sequence_id: str
    codes: np.ndarray  # frames x k, dense
    label: Optional[int] = None
    group: Optional[str] = None

    def __post_init__(self):
        codes = np.array(self.codes, dtype=float, ndmin=2)
        if codes.shape[0] < 1:
            raise InputError(f"code sequence {self.sequence_id!r} is empty")
        codes.setflags(write=False)
        object.__setattr__(self, 'codes', codes)


@dataclass(frozen=True)
class Prediction:
    sequence_id: str
    true_label: Optional[int]
    predicted_label: int
    distance: float


def encode_sequences(dictionary: Dictionary, dataset: FeatureDataset, T: int,
                     *, n_jobs: Optional[int] = None) -> List[CodeSequence]:
    """OMP-encode every frame and regroup the dense codes per sequence."""
    if dataset.n != dictionary.n:
        raise InputError(
            f"dataset dimension {dataset.n} does not match dictionary "
            f"dimension {dictionary.n}")
    Y, _, _ = flatten(dataset)
    dense = omp_encode(dictionary, Y, T, n_jobs=n_jobs).to_dense().T
    result = []
    start = 0
    for seq in dataset:
        stop = start + seq.n_frames
        result.append(CodeSequence(seq.sequence_id, dense[start:stop],
                                   seq.label, seq.group))
        start = stop
    return result


def dtw_distance(a, b, *, absolute: bool = False) -> float:
    """
    Dynamic time warping with Euclidean local cost and no band; the optimal
    path cost is divided by the path length (ties in cost prefer the shorter
    path, keeping the measure symmetric).
    """
    a = a.codes if isinstance(a, CodeSequence) else np.asarray(a, dtype=float)
    b = b.codes if isinstance(b, CodeSequence) else np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise InputError("DTW needs non-empty sequences")
    if absolute:
        a, b = np.abs(a), np.abs(b)
    local = distance.cdist(a, b)
    n, m = local.shape
    cost = np.full((n + 1, m + 1), np.inf)
    length = np.zeros((n + 1, m + 1), dtype=int)
    cost[0, 0] = 0.0
    for i in range(1, n + 1):
        row_cost = cost[i]
        for j in range(1, m + 1):
            options = (
                (cost[i - 1, j - 1], length[i - 1, j - 1]),
                (cost[i - 1, j], length[i - 1, j]),
                (row_cost[j - 1], length[i, j - 1]),
            )
            best_cost, best_length = min(options)
            row_cost[j] = best_cost + local[i - 1, j - 1]
            length[i, j] = best_length + 1
    return float(cost[n, m] / length[n, m])


def histogram_descriptor(c) -> np.ndarray:
    """Mean of the absolute per-frame codes."""
    codes = c.codes if isinstance(c, CodeSequence) else np.asarray(c)
    if codes.shape[0] == 0:
        raise InputError("histogram of an empty sequence")
    return np.abs(codes).mean(axis=0)


def _distance(metric, a, b, absolute):
    if metric == 'dtw':
        return dtw_distance(a, b, absolute=absolute)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def nearest_neighbors(train, query, k_nn: int = 1, metric: str = 'dtw', *,
                      absolute: bool = False):
    """Indices and distances of the ``k_nn`` closest training items."""
    if metric not in METRICS:
        raise InputError(f"unknown metric {metric!r}")
    if not train:
        raise InputError("empty training set")
    if k_nn < 1:
        raise InputError("k_nn must be at least 1")
    distances = np.array([_distance(metric, item, query, absolute)
                          for item, _ in train])
    order = np.argsort(distances, kind='stable')[:k_nn]
    return order, distances[order]


def _vote(train, order):
    votes = Counter(int(train[i][1]) for i in order)
    top = max(votes.values())
    return min(label for label, count in votes.items() if count == top)


def knn_classify(train, query, k_nn: int = 1, metric: str = 'dtw', *,
                 absolute: bool = False) -> int:
    """
    Majority vote among the ``k_nn`` nearest training items; vote ties go
    to the smallest label, distance ties to the lower training index.
    """
    order, _ = nearest_neighbors(train, query, k_nn, metric,
                                 absolute=absolute)
    return _vote(train, order)


def classify_sequences(train: Sequence[CodeSequence],
                       test: Sequence[CodeSequence], scheme: str = 'dtw',
                       k_nn: int = 1, *, absolute: bool = False,
                       n_jobs: Optional[int] = None) -> List[Prediction]:
    """Classify every test sequence against the labeled training ones."""
    if scheme not in SCHEMES:
        raise InputError(f"unknown scheme {scheme!r}")
    if any(seq.label is None for seq in train):
        raise InputError("training sequences must be labeled")
    if scheme == 'dtw':
        items = [(seq, seq.label) for seq in train]
        queries = list(test)
        metric = 'dtw'
    else:
        items = [(histogram_descriptor(seq), seq.label) for seq in train]
        queries = [histogram_descriptor(seq) for seq in test]
        metric = 'euclidean'

    def predict(seq, query):
        order, distances = nearest_neighbors(items, query, k_nn, metric,
                                             absolute=absolute)
        return Prediction(seq.sequence_id, seq.label, _vote(items, order),
                          float(distances[0]))

    return Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(predict)(seq, query) for seq, query in zip(test, queries))


def cross_validate(sequences: Sequence[CodeSequence], split: str = 'group',
                   folds: int = 5, scheme: str = 'dtw', k_nn: int = 1, *,
                   absolute: bool = False,
                   n_jobs: Optional[int] = None) -> List[Prediction]:
    """
    Leave-one-group-out (``split='group'``, groups from the feature file)
    or group k-fold by sequence id (``split='kfold'``).
    """
    sequences = list(sequences)
    if split == 'group':
        groups = [seq.group for seq in sequences]
        if any(group is None for group in groups):
            raise InputError("leave-one-group-out needs a group column")
        splitter = LeaveOneGroupOut()
    elif split == 'kfold':
        groups = [seq.sequence_id for seq in sequences]
        if folds < 2 or folds > len(sequences):
            raise InputError(
                f"folds={folds} must lie in [2, {len(sequences)}]")
        splitter = GroupKFold(n_splits=folds)
    else:
        raise InputError(f"unknown split {split!r}")
    predictions = {}
    index = np.arange(len(sequences))
    for train_idx, test_idx in splitter.split(index, groups=groups):
        fold = classify_sequences(
            [sequences[i] for i in train_idx],
            [sequences[i] for i in test_idx],
            scheme, k_nn, absolute=absolute, n_jobs=n_jobs)
        for i, prediction in zip(test_idx, fold):
            predictions[int(i)] = prediction
    return [predictions[i] for i in sorted(predictions)]


def accuracy(predictions: Sequence[Prediction]) -> Optional[float]:
    scored = [p for p in predictions if p.true_label is not None]
    if not scored:
        return None
    return float(accuracy_score([p.true_label for p in scored],
                                [p.predicted_label for p in scored]))


def confusion(predictions: Sequence[Prediction], M: int) -> np.ndarray:
    scored = [p for p in predictions if p.true_label is not None]
    return confusion_matrix([p.true_label for p in scored],
                            [p.predicted_label for p in scored],
                            labels=list(range(1, M + 1)))


def _histogram(values, bins):
    counts, edges = np.histogram(np.clip(values, 0.0, 1.0), bins=bins,
                                 range=(0.0, 1.0))
    total = counts.sum()
    frequency = counts / total if total else counts.astype(float)
    return edges, frequency


def purity_histogram(dists, bins: int = 10):
    """Histogram of max_c P(L=c|d_i) over atoms; returns (edges, frequency)."""
    dists = np.asarray(dists, dtype=float)
    if dists.size == 0:
        raise InputError("no class distributions")
    return _histogram(dists.max(axis=1), bins)


def compactness_histogram(dictionary, bins: int = 10):
    """Histogram of |d_i^T d_j| over atom pairs i < j."""
    atoms = (dictionary.atoms if isinstance(dictionary, Dictionary)
             else np.asarray(dictionary, dtype=float))
    gram = np.abs(atoms.T @ atoms)
    upper = gram[np.triu_indices(atoms.shape[1], k=1)]
    if upper.size == 0:
        logger.warning("compactness of a single-atom dictionary is empty")
    return _histogram(upper, bins)


def mass_at_least(edges, frequency, threshold: float) -> float:
    """Frequency mass of the bins starting at or above ``threshold``."""
    return float(frequency[edges[:-1] >= threshold - 1e-12].sum())


def sequence_reconstruction(dictionary: Dictionary, dataset: FeatureDataset,
                            T: int, *, n_jobs: Optional[int] = None):
    """Per-sequence RMSE of the OMP reconstruction over ``dictionary``."""
    codes = encode_sequences(dictionary, dataset, T, n_jobs=n_jobs)
    rows = []
    for seq, coded in zip(dataset, codes):
        approx = coded.codes @ dictionary.atoms.T
        rmse = float(np.linalg.norm(seq.frames - approx)
                     / np.sqrt(seq.frames.size))
        rows.append((seq.sequence_id, seq.label, rmse))
    return rows
