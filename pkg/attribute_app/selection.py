"""
Dictionary compression: pick (or build) k atoms out of an initial
dictionary.

ME, MMI-1 and MMI-2 are greedy selections scored through the GP model over
atoms; MMI-3 merges atom pairs by minimum loss of label information; the
k-means baseline clusters atom vectors. Every greedy step breaks ties
toward the lowest atom index.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from sklearn.cluster import KMeans

from . import gp
from .exceptions import ComputationError, InputError
from .labeldist import label_cond_entropies, uniform
from .numcore import l2_normalize_columns
from .pursuit import Dictionary

logger = logging.getLogger(__name__)

METHODS = ('me', 'mmi1', 'mmi2', 'mmi3', 'kmeans')
DEGENERATE_GAIN = 1e-12
# Scores this close (relative) to the best count as tied. Leave-one-out
# variances of near-singular kernels carry rounding noise far above 1e-12.
TIE_TOL = 1e-6


@dataclass
class SelectionTrace:
    method: str
    atoms: List[int] = field(default_factory=list)
    objectives: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    lam: Optional[float] = None
    diversity: List[float] = field(default_factory=list)
    coverage: List[float] = field(default_factory=list)

    def __len__(self):
        return len(self.atoms)


@dataclass(frozen=True)
class MergeStep:
    step: int
    kept: int
    removed: int
    loss: float


def _appearance_terms(kern, chosen, remaining, compact, n_jobs):
    """H(d|D*) and H(d|D-bar*) for every remaining candidate d."""
    entropy_chosen = gp.entropy_from_variance(gp.conditional_variances(
        kern, remaining, chosen, compact=compact, n_jobs=n_jobs))
    entropy_rest = gp.entropy_from_variance(gp.remainder_variances(
        kern, remaining, compact=compact, n_jobs=n_jobs))
    return entropy_chosen, entropy_rest


def _label_gains(dists, chosen, remaining):
    """H(L_d|L_D*) - H(L_d|L_D-bar*) for every remaining candidate d."""
    candidates = dists[remaining]
    if chosen:
        p_chosen = dists[chosen].mean(axis=0)
    else:
        p_chosen = uniform(dists.shape[1])
    others = remaining.size - 1
    if others > 0:
        p_rest = (candidates.sum(axis=0)[None, :] - candidates) / others
    else:
        p_rest = np.broadcast_to(uniform(dists.shape[1]), candidates.shape)
    return (label_cond_entropies(candidates, p_chosen)
            - label_cond_entropies(candidates, p_rest))


def _first_best(scores):
    top = np.max(scores)
    slack = TIE_TOL * max(1.0, abs(top))
    return int(np.flatnonzero(scores >= top - slack)[0])


def _greedy(kern, k, method, score, *, min_gain=None, lam=None):
    K = kern.size
    remaining = np.arange(K)
    chosen: List[int] = []
    trace = SelectionTrace(method=method, lam=lam)
    for step in range(k):
        started = time.perf_counter()
        scores, diversity, coverage = score(chosen, remaining)
        best = _first_best(scores)
        if min_gain is not None and scores[best] < min_gain:
            logger.info("%s: gain %.6g below %.6g, stopping at %d atoms",
                        method, scores[best], min_gain, len(chosen))
            break
        atom = int(remaining[best])
        chosen.append(atom)
        remaining = np.delete(remaining, best)
        trace.atoms.append(atom)
        trace.objectives.append(float(scores[best]))
        trace.diversity.append(float(diversity[best]))
        if coverage is not None:
            trace.coverage.append(float(coverage[best]))
        trace.seconds.append(time.perf_counter() - started)
        logger.debug("%s step %d: atom %d objective %.6g",
                     method, step + 1, atom, scores[best])
    return trace


def _check_k(k, K, upper, message):
    if not 1 <= k <= upper:
        if k >= K and upper < K:
            raise InputError(message)
        raise InputError(f"k={k} must lie in [1, {upper}]")


def select_me(kern, k: int, *, compact: bool = True,
              n_jobs: Optional[int] = None) -> SelectionTrace:
    """Greedy maximization of entropy: argmax H(d*|D*)."""
    _check_k(k, kern.size, kern.size, "k exceeds the dictionary size")

    def score(chosen, remaining):
        entropy = gp.entropy_from_variance(gp.conditional_variances(
            kern, remaining, chosen, compact=compact, n_jobs=n_jobs))
        return entropy, entropy, None

    return _greedy(kern, k, 'me', score)


def select_mmi1(kern, k: int, *, compact: bool = True,
                min_gain: Optional[float] = None,
                n_jobs: Optional[int] = None) -> SelectionTrace:
    """
    Greedy mutual-information maximization on appearance:
    argmax H(d*|D*) - H(d*|D-bar*), i.e. the log of the variance ratio.
    """
    _check_k(k, kern.size, kern.size - 1, "remaining set empty")

    def score(chosen, remaining):
        diversity, rest = _appearance_terms(
            kern, chosen, remaining, compact, n_jobs)
        return diversity - rest, diversity, -rest

    return _greedy(kern, k, 'mmi1', score, min_gain=min_gain)


def estimate_lambda(kern, dists, *, compact: bool = True,
                    n_jobs: Optional[int] = None) -> float:
    """
    Ratio of the best first-step label gain to the best first-step
    appearance gain (D* empty, D-bar* = every other atom).
    """
    dists = np.asarray(dists, dtype=float)
    if dists.shape[0] != kern.size:
        raise InputError(
            f"{dists.shape[0]} class distributions for {kern.size} atoms")
    everything = np.arange(kern.size)
    diversity, rest = _appearance_terms(kern, [], everything, compact, n_jobs)
    appearance = float(np.max(diversity - rest))
    if appearance <= DEGENERATE_GAIN:
        raise ComputationError("degenerate kernel")
    label = float(np.max(_label_gains(dists, [], everything)))
    lam = max(label, 0.0) / appearance
    logger.info("estimated lambda=%.6g (label %.6g / appearance %.6g)",
                lam, label, appearance)
    return lam


def select_mmi2(kern, dists, k: int, lam: Optional[float] = None, *,
                compact: bool = True, min_gain: Optional[float] = None,
                n_jobs: Optional[int] = None) -> SelectionTrace:
    """
    Greedy mutual-information maximization on appearance and class
    distribution: [H(d*|D*) - H(d*|D-bar*)]
    + lam [H(L_d*|L_D*) - H(L_d*|L_D-bar*)].
    """
    dists = np.asarray(dists, dtype=float)
    if dists.shape[0] != kern.size:
        raise InputError(
            f"{dists.shape[0]} class distributions for {kern.size} atoms")
    _check_k(k, kern.size, kern.size - 1, "remaining set empty")
    if lam is None:
        lam = estimate_lambda(kern, dists, compact=compact, n_jobs=n_jobs)
    if lam < 0:
        raise InputError("lambda must be non-negative")

    def score(chosen, remaining):
        diversity, rest = _appearance_terms(
            kern, chosen, remaining, compact, n_jobs)
        labels = _label_gains(dists, chosen, remaining)
        return (diversity - rest) + lam * labels, diversity, -rest

    return _greedy(kern, k, 'mmi2', score, min_gain=min_gain, lam=lam)


def merge_loss(p1, q1, p2, q2):
    """
    Loss of label information when merging atom 1 into each atom of the
    second argument (broadcast over leading axes of p2/q2).

    Returns ``(loss, p_merged, q_merged)``.
    """
    p2 = np.asarray(p2, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    q1 = np.broadcast_to(np.asarray(q1, dtype=float), q2.shape)
    p1 = np.broadcast_to(np.asarray(p1, dtype=float), p2.shape)
    p_merged = p1 + p2
    safe = np.where(p_merged > 0, p_merged, 1.0)[..., None]
    q_merged = np.where(
        p_merged[..., None] > 0,
        (p1[..., None] * q1 + p2[..., None] * q2) / safe,
        (q1 + q2) / 2.0)

    def divergence(p, q):
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = np.where(
                q > 0, q * (np.log(np.where(q > 0, q, 1.0))
                            - np.log(np.where(q > 0, q_merged, 1.0))), 0.0)
        return np.where(p > 0, p * terms.sum(axis=-1), 0.0)

    loss = divergence(p1, q1) + divergence(p2, q2)
    return np.maximum(loss, 0.0), p_merged, q_merged


def select_mmi3(dictionary: Dictionary, dists, priors, k: int):
    """
    Agglomerative merging of atom pairs with the smallest loss of label
    information until ``k`` atoms remain.

    Returns ``(Dictionary, merges)``; the dictionary carries the merged
    class distributions and priors.
    """
    atoms = np.array(dictionary.atoms, dtype=float)
    dists = np.array(dists, dtype=float)
    priors = np.array(priors, dtype=float)
    K = atoms.shape[1]
    if not 2 <= k < K:
        raise InputError(f"k={k} must lie in [2, {K - 1}]")
    if dists.shape[0] != K or priors.shape[0] != K:
        raise InputError("class distributions and priors must cover every atom")
    if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
        raise InputError("atom priors must be a probability vector")

    active = np.ones(K, dtype=bool)
    losses = np.full((K, K), np.inf)
    for i in range(K - 1):
        losses[i, i + 1:] = merge_loss(
            priors[i], dists[i], priors[i + 1:], dists[i + 1:])[0]

    merges = []
    for step in range(K - k):
        flat = int(np.argmin(losses))
        i, j = divmod(flat, K)
        loss = float(losses[i, j])
        _, p_new, q_new = merge_loss(priors[i], dists[i], priors[j], dists[j])
        p_new = float(p_new)
        # an atom and its negation span the same direction
        partner = atoms[:, j]
        if atoms[:, i] @ partner < 0:
            partner = -partner
        if p_new > 0:
            vector = (priors[i] * atoms[:, i] + priors[j] * partner) / p_new
        else:
            vector = (atoms[:, i] + partner) / 2.0
        norm = np.linalg.norm(vector)
        atoms[:, i] = vector / norm if norm > 0 else atoms[:, i]
        priors[i], dists[i] = p_new, q_new
        active[j] = False
        losses[j, :] = np.inf
        losses[:, j] = np.inf

        others = np.flatnonzero(active)
        others = others[others != i]
        row = merge_loss(priors[i], dists[i], priors[others], dists[others])[0]
        after = others > i
        losses[i, others[after]] = row[after]
        losses[others[~after], i] = row[~after]
        merges.append(MergeStep(step + 1, i, j, loss))
        logger.debug("mmi3 merge %d: %d <- %d loss %.6g", step + 1, i, j, loss)

    kept = np.flatnonzero(active)
    return Dictionary(atoms[:, kept], dists[kept], priors[kept]), merges


def fit_kmeans(points, k: int, seed: int = 0, *, max_iter: int = 100,
               tol: float = 1e-8) -> KMeans:
    """
    k-means++ seeded Lloyd iterations over the rows of ``points``.

    ``tol`` bounds the total squared centroid movement between two
    iterations. scikit-learn multiplies its own ``tol`` by the mean feature
    variance, so the value passed on is divided by that variance.
    """
    points = np.asarray(points, dtype=float)
    spread = float(np.mean(np.var(points, axis=0)))
    model = KMeans(n_clusters=k, init='k-means++', n_init=1,
                   max_iter=max_iter,
                   tol=tol / spread if spread > 0 else tol,
                   algorithm='lloyd', random_state=int(seed) & 0xFFFFFFFF)
    return model.fit(points)


def select_kmeans(dictionary: Dictionary, k: int, seed: int = 0, *,
                  max_iter: int = 100, tol: float = 1e-8) -> Dictionary:
    """k-means (k-means++ seeding) over atom vectors; unit-norm centroids."""
    K = dictionary.K
    if not 1 <= k <= K:
        raise InputError(f"k={k} must lie in [1, {K}]")
    points = dictionary.atoms.T
    model = fit_kmeans(points, k, seed, max_iter=max_iter, tol=tol)
    assignment = model.labels_
    centroids = np.array(model.cluster_centers_.T)
    centroids, zero = l2_normalize_columns(centroids)
    for c in np.flatnonzero(zero):
        members = np.flatnonzero(assignment == c)
        centroids[:, c] = points[members[0] if members.size else c]
    logger.info("k-means: %d atoms -> %d centroids in %d iterations",
                K, k, model.n_iter_)
    return Dictionary(centroids)
