"""Snippet mining: the handful of windows that summarize a series best.

A snippet is a window whose z-normalized profile sits close to many other
windows of the series.  Candidates live on a non-overlapping grid (starts
1, l+1, 2l+1, ...); selection is greedy, each round picking the candidate
that shrinks the area under the element-wise minimum of the selected
distance profiles the most.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import KTooLarge, SeriesTooShort, WindowTooLong
from .series import Subsequence, TimeSeries, VARIANCE_EPS, znormalize


@dataclass(frozen=True, eq=False)
class DistanceProfile:
    """Distances from one query window to every window of a series.

    ``values[p - 1]`` is the z-normalized Euclidean distance between the
    query and the window starting at (1-based) position p.
    """

    values: np.ndarray


@dataclass(frozen=True, eq=False)
class Snippet:
    """A selected representative window with its coverage share."""

    subsequence: Subsequence
    coverage: float
    rank: int


def _znorm_rows(mat: np.ndarray) -> np.ndarray:
    mu = mat.mean(axis=1, keepdims=True)
    sd = mat.std(axis=1, keepdims=True)
    safe = np.where(sd > VARIANCE_EPS, sd, 1.0)
    return np.where(sd > VARIANCE_EPS, (mat - mu) / safe, 0.0)


def _profile_matrix(values: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Distance profiles of several equal-length queries over one series.

    Rows of ``queries`` are raw windows; both sides are z-normalized
    before the Euclidean distance.  Output shape is
    (len(queries), n - m + 1).
    """
    m = queries.shape[1]
    windows = _znorm_rows(sliding_window_view(values, m))
    qn = _znorm_rows(queries)
    # One direct pass per query. A Gram-matrix shortcut would be faster
    # but loses the exact zero on self-matches to cancellation.
    out = np.empty((qn.shape[0], windows.shape[0]))
    for i, q in enumerate(qn):
        diff = windows - q
        out[i] = np.sqrt((diff * diff).sum(axis=1))
    return out


def subseq_distance_profile(query: Subsequence, series: TimeSeries) -> DistanceProfile:
    """Distance from ``query`` to every same-length window of ``series``."""
    m = query.length
    if m > series.n:
        raise WindowTooLong(
            f"query length {m} exceeds series length {series.n}"
        )
    prof = _profile_matrix(series.values, query.values[None, :])[0]
    return DistanceProfile(values=prof)


def discover_snippets(series: TimeSeries, k: int, l: int) -> list[Snippet]:
    """Pick the ``k`` length-``l`` windows that represent ``series`` best.

    Parameters
    ----------
    series : TimeSeries
    k : int
        Number of snippets, between 1 and floor(n / l).
    l : int
        Snippet length; the series must fit at least two such windows.

    Returns
    -------
    list of Snippet, in selection order (rank 1 first).  Coverage is the
    fraction of window positions lying closest to that snippet's profile,
    ties going to the earlier-ranked snippet, so coverages of one series
    sum to 1.
    """
    n = series.n
    if n < 2 * l:
        raise SeriesTooShort(
            f"series of length {n} cannot host two windows of length {l}"
        )
    n_candidates = n // l
    if not 1 <= k <= n_candidates:
        raise KTooLarge(
            f"k={k} outside [1, {n_candidates}] for n={n}, l={l}"
        )

    starts0 = np.arange(n_candidates) * l
    candidates = np.stack([series.values[s : s + l] for s in starts0])
    profiles = _profile_matrix(series.values, candidates)

    selected: list[int] = []
    running_min = np.full(profiles.shape[1], np.inf)
    for _ in range(k):
        best_idx = -1
        best_area = np.inf
        for c in range(n_candidates):
            if c in selected:
                continue
            area = float(np.minimum(running_min, profiles[c]).sum())
            if area < best_area:  # strict: ties keep the earlier start
                best_area = area
                best_idx = c
        selected.append(best_idx)
        np.minimum(running_min, profiles[best_idx], out=running_min)

    # Each window position belongs to the selected snippet whose profile
    # is lowest there; argmin over rank order resolves ties toward the
    # earlier rank.
    chosen = np.argmin(profiles[selected], axis=0)
    n_positions = profiles.shape[1]
    out = []
    for rank_0, c in enumerate(selected):
        frac = float((chosen == rank_0).sum()) / n_positions
        sub = Subsequence(
            source=series.id,
            start=int(starts0[c]) + 1,
            values=series.values[starts0[c] : starts0[c] + l],
        )
        out.append(Snippet(subsequence=sub, coverage=frac, rank=rank_0 + 1))
    return out
