"""Shape-based distance and k-shape clustering of pooled snippets.

The distance between two equal-length sequences is 1 minus the maximum
coefficient-normalized cross-correlation over all relative shifts.
Correlation is circular: the snippets being compared are all cut to one
unified period length, so a rotation of the same shape should count as
the same shape.  A positive shift means the second sequence lags the
first; rolling it back by the shift aligns the pair.

Cluster centroids come from the spectral shape-extraction step: members
are aligned to the current centroid, and the new centroid is the leading
eigenvector of the centered Gram matrix of the aligned members, found by
power iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyCluster, LengthMismatch, TooFewSnippets
from .series import VARIANCE_EPS, znormalize
from .snippets import Snippet, _znorm_rows

_POWER_TOL = 1e-8
_POWER_MAX_ITER = 1000


@dataclass(frozen=True, eq=False)
class ShapeCluster:
    """One mined shape factor: its id, centroid, and member snippets.

    Members are (series id, snippet rank) pairs pointing back into the
    per-series snippet lists.
    """

    factor_id: int
    centroid: np.ndarray
    members: tuple[tuple[str, int], ...]


def _signed_shifts(m: int) -> np.ndarray:
    """Signed representative for each rotation 0..m-1, in (-m/2, m/2]."""
    raw = np.arange(m)
    return np.where(raw > m // 2, raw - m, raw)


def _cc_rows(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Circular cross-correlation of every row of ``X`` against ``y``.

    Column j holds sum over t of row[(t + j) mod m] * y[t]: the score
    for reading the row as ``y`` rotated forward by j positions.
    """
    m = X.shape[1]
    fx = np.fft.rfft(X, axis=1)
    fy = np.conj(np.fft.rfft(y))
    return np.fft.irfft(fx * fy, m, axis=1)


def sbd(x, y) -> tuple[float, int]:
    """Shape-based distance and the rotation where the two sequences match.

    Returns
    -------
    (distance, shift)
        ``distance`` is 1 - max normalized cross-correlation, in [0, 2].
        ``shift`` is positive when ``y`` lags ``x``; rolling ``y`` back
        by it lines the pair up.  Ties between equally good shifts
        resolve to the smallest magnitude, negative before positive.
        If either input is near-constant the pair is declared maximally
        dissimilar at shift 0.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise LengthMismatch(
            f"sequences of length {xa.size} and {ya.size} are not comparable"
        )
    if xa.std() <= VARIANCE_EPS or ya.std() <= VARIANCE_EPS:
        return 1.0, 0
    denom = float(np.linalg.norm(xa) * np.linalg.norm(ya))
    cc = _cc_rows(xa[None, :], ya)[0] / denom
    m = xa.size
    # column j reads x as y rotated by j, so y lags x by (m - j) mod m
    shifts = _signed_shifts(m)[(m - np.arange(m)) % m]
    best = cc.max()
    ties = np.flatnonzero(cc == best)
    shift = min((int(shifts[i]) for i in ties), key=lambda s: (abs(s), s))
    dist = float(np.clip(1.0 - best, 0.0, 2.0))
    return dist, int(shift)


def _best_shifts(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """How much each row of ``X`` lags ``y``: row i gets ``sbd(y, X[i])[1]``.

    Column j of the row correlations scores the row as ``y`` rotated
    forward by j, so j is itself the candidate lag.  Columns are
    scanned in the (|shift|, shift) preference order ``sbd`` uses.
    """
    m = X.shape[1]
    signed = _signed_shifts(m)
    order = np.array(sorted(range(m), key=lambda j: (abs(signed[j]), signed[j])))
    cc = _cc_rows(X, y)[:, order]
    return signed[order][np.argmax(cc, axis=1)]


def _distance_matrix(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Shape-based distances from every row of ``X`` to every centroid."""
    nx = np.linalg.norm(X, axis=1)
    live_rows = nx > VARIANCE_EPS
    D = np.ones((X.shape[0], centroids.shape[0]))
    for j in range(centroids.shape[0]):
        c = centroids[j]
        nc = float(np.linalg.norm(c))
        if nc <= VARIANCE_EPS:
            continue
        cc = _cc_rows(X, c).max(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = 1.0 - cc / (nx * nc)
        D[live_rows, j] = np.clip(d[live_rows], 0.0, 2.0)
    return D


def shape_extract(members: Sequence[np.ndarray], current_centroid) -> np.ndarray:
    """New centroid for a cluster, given its members and the old centroid.

    Members are aligned to ``current_centroid`` by their shape-distance
    shift (a zero or constant centroid aligns nothing), re-normalized,
    and summarized by the leading eigenvector of M = Q S Q where S is
    the Gram matrix of aligned members and Q the centering matrix.  The
    eigenvector's sign is chosen to correlate positively with the
    aligned mean, and the result is z-normalized.
    """
    if len(members) == 0:
        raise EmptyCluster("shape extraction over zero members")
    A = np.asarray(list(members), dtype=float)
    m = A.shape[1]
    cur = np.asarray(current_centroid, dtype=float)
    if cur.size != m:
        raise LengthMismatch(
            f"centroid length {cur.size} does not match members of length {m}"
        )

    if cur.std() > VARIANCE_EPS:
        lags = _best_shifts(A, cur)
        # a zero-norm row has no meaningful lag; sbd guards those to 0
        lags[np.linalg.norm(A, axis=1) <= VARIANCE_EPS] = 0
        aligned = np.stack(
            [np.roll(A[i], -int(lags[i])) for i in range(A.shape[0])]
        )
    else:
        aligned = A

    aligned = _znorm_rows(aligned)
    gram = aligned.T @ aligned
    q = np.eye(m) - np.full((m, m), 1.0 / m)
    big_m = q @ gram @ q

    mean_aligned = aligned.mean(axis=0)
    v = mean_aligned - mean_aligned.mean()
    if np.linalg.norm(v) <= VARIANCE_EPS:
        v = q[:, 0].copy()
    v /= np.linalg.norm(v)
    for _ in range(_POWER_MAX_ITER):
        w = big_m @ v
        norm_w = np.linalg.norm(w)
        if norm_w <= 1e-15:
            return np.zeros(m)
        w /= norm_w
        done = np.linalg.norm(w - v) < _POWER_TOL
        v = w
        if done:
            break

    if float(v @ mean_aligned) < 0.0:
        v = -v
    return znormalize(v)


def _fill_empty(X, labels, centroids, n):
    """Reseed empty clusters with the points farthest from their centroid."""
    counts = np.bincount(labels, minlength=n)
    empties = np.flatnonzero(counts == 0)
    if empties.size == 0:
        return labels
    labels = labels.copy()
    D = _distance_matrix(X, centroids)
    d_own = D[np.arange(X.shape[0]), labels]
    for j in empties:
        i = int(np.argmax(d_own))
        labels[i] = j
        d_own[i] = -np.inf
    return labels


def _kshape(X: np.ndarray, n: int, rng: np.random.Generator, max_iter: int):
    """Core refinement loop; returns labels, centroids, objective path."""
    count = X.shape[0]
    labels = rng.integers(0, n, size=count)
    centroids = np.zeros((n, X.shape[1]))
    objective: list[float] = []
    for _ in range(max_iter):
        labels = _fill_empty(X, labels, centroids, n)
        for j in range(n):
            members = X[labels == j]
            if members.shape[0] == 0:
                continue  # emptied by a reseed move; next round fixes it
            centroids[j] = shape_extract(members, centroids[j])
        D = _distance_matrix(X, centroids)
        new_labels = D.argmin(axis=1)
        objective.append(float(D[np.arange(count), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centroids, objective


def kshape_cluster(
    snippets: Sequence[Snippet], n: int, seed: int, max_iter: int = 100
) -> list[ShapeCluster]:
    """Cluster pooled snippets into ``n`` shape factors.

    Snippet windows are z-normalized, iteratively assigned to the
    nearest centroid by shape-based distance (ties to the lower factor
    id), and centroids refined by spectral shape extraction until the
    assignment stops moving or ``max_iter`` rounds pass.  Deterministic
    for a fixed seed.
    """
    if n < 1:
        raise ValueError("cluster count must be at least 1")
    pooled = list(snippets)
    if len(pooled) < n:
        raise TooFewSnippets(
            f"{len(pooled)} snippets cannot fill {n} clusters"
        )
    lengths = {s.subsequence.length for s in pooled}
    if len(lengths) != 1:
        raise LengthMismatch(f"pooled snippet lengths differ: {sorted(lengths)}")

    X = np.stack([znormalize(s.subsequence.values) for s in pooled])
    rng = np.random.default_rng(seed)
    labels, centroids, _ = _kshape(X, n, rng, max_iter)

    clusters = []
    for j in range(n):
        members = tuple(
            (pooled[i].subsequence.source, pooled[i].rank)
            for i in np.flatnonzero(labels == j)
        )
        cen = centroids[j].copy()
        cen.flags.writeable = False
        clusters.append(ShapeCluster(factor_id=j, centroid=cen, members=members))
    return clusters
