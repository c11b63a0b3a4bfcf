"""Edge-level causal strength via propensity score matching.

Each candidate edge t -> y is read as a treatment/outcome question over
the factor matrix: rows with the t bit set are treated, the remaining
factor columns are confounder covariates, and the effect is the matched
difference-in-outcomes.  Per-edge effects are then blended across the
candidate DAGs with BIC softmax weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .encode import FactorMatrix
from .errors import DegenerateTreatment, NoMatches
from .graph import CandidateSet
from .series import TimeSeries
from .snippets import Snippet

_RIDGE = 1e-3
_IRLS_TOL = 1e-8
_IRLS_MAX_ITER = 100
_SCORE_FLOOR = 0.01
_CALIPER_FACTOR = 0.2


@dataclass(frozen=True, eq=False)
class MatchResult:
    """Matched (row, opposite-group row) pairs plus the caliper casualties."""

    pairs: tuple[tuple[int, int], ...]
    unmatched: int


class StrengthMap:
    """Per-edge causal strengths plus the candidate weights behind them."""

    def __init__(
        self,
        per_edge: Mapping[tuple[int, int], float],
        weights_used: Sequence[float],
    ):
        self.per_edge = {(int(u), int(v)): float(s) for (u, v), s in per_edge.items()}
        self.weights_used = tuple(float(w) for w in weights_used)

    def strength(self, u: int, v: int) -> float:
        return self.per_edge.get((u, v), 0.0)

    def __eq__(self, other):
        if not isinstance(other, StrengthMap):
            return NotImplemented
        return (
            self.per_edge == other.per_edge
            and self.weights_used == other.weights_used
        )

    def __repr__(self):
        return f"StrengthMap({self.per_edge!r})"


@dataclass(frozen=True, eq=False)
class TimestepStrengths:
    """Per-timestep label-relevance weights; non-negative, summing to 1."""

    zeta: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.zeta, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "zeta", arr)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(eta, -30.0, 30.0)))


def propensity_scores(matrix: FactorMatrix, treatment: int) -> np.ndarray:
    """P(t = 1 | other factors) from a ridge-penalized logistic fit.

    Newton / IRLS with an L2 penalty of ``_RIDGE`` on the coefficients;
    the intercept is left unpenalized so that with no covariates the
    scores collapse to the marginal treatment rate exactly.  Outputs are
    clamped into [0.01, 0.99] to keep logits finite.
    """
    t = matrix.bits[:, treatment].astype(float)
    if t.min() == t.max():
        raise DegenerateTreatment(f"treatment column {treatment} is constant")
    covars = [c for c in range(matrix.n_factors) if c != treatment]
    design = np.column_stack(
        [np.ones(matrix.n_rows)] + [matrix.bits[:, c].astype(float) for c in covars]
    )
    penalty = np.full(design.shape[1], _RIDGE)
    penalty[0] = 0.0

    beta = np.zeros(design.shape[1])
    for _ in range(_IRLS_MAX_ITER):
        p = _sigmoid(design @ beta)
        w = np.maximum(p * (1.0 - p), 1e-10)
        grad = design.T @ (t - p) - penalty * beta
        hess = (design * w[:, None]).T @ design + np.diag(penalty)
        step = np.linalg.solve(hess, grad)
        beta += step
        if float(np.linalg.norm(step)) < _IRLS_TOL:
            break
    return np.clip(_sigmoid(design @ beta), _SCORE_FLOOR, 1.0 - _SCORE_FLOOR)


def match_pairs(scores: np.ndarray, treatment: np.ndarray) -> MatchResult:
    """Nearest-logit matching with replacement under a caliper.

    Every row is matched to the opposite-group row whose logit score is
    closest, provided the gap is within 0.2 standard deviations of the
    logit scores; rows failing the caliper are dropped and counted.
    Distance ties resolve to the lower row index.
    """
    scores = np.asarray(scores, dtype=float)
    t = np.asarray(treatment)
    logits = np.log(scores / (1.0 - scores))
    caliper = _CALIPER_FACTOR * float(logits.std())

    groups = {1: np.flatnonzero(t == 1), 0: np.flatnonzero(t == 0)}
    if groups[1].size == 0 or groups[0].size == 0:
        raise NoMatches("one of the treatment groups is empty")

    # per group: logit values sorted, with each distinct value represented
    # by its lowest original row index
    prepared = {}
    for g, idx in groups.items():
        order = np.lexsort((idx, logits[idx]))
        vals = logits[idx][order]
        rows = idx[order]
        prepared[g] = (vals, rows)

    def nearest(value: float, g: int) -> tuple[float, int]:
        vals, rows = prepared[g]
        pos = int(np.searchsorted(vals, value))
        best = None
        for cand in (pos - 1, pos):
            if not 0 <= cand < vals.size:
                continue
            dist = abs(value - vals[cand])
            # representative of this candidate's value run: its first row
            first = int(np.searchsorted(vals, vals[cand]))
            row = int(rows[first])
            if best is None or dist < best[0] or (dist == best[0] and row < best[1]):
                best = (dist, row)
        return best

    pairs = []
    unmatched = 0
    for i in range(scores.size):
        opposite = 0 if t[i] == 1 else 1
        dist, j = nearest(float(logits[i]), opposite)
        if dist > caliper:
            unmatched += 1
            continue
        pairs.append((i, j))
    if not pairs:
        raise NoMatches("caliper excluded every row")
    return MatchResult(pairs=tuple(pairs), unmatched=unmatched)


def ate(
    matrix: FactorMatrix,
    treatment: int,
    outcome: int,
    pairs: Sequence[tuple[int, int]],
) -> float:
    """Average treatment effect over matched pairs.

    phi = (sum of within-pair outcome differences over treated rows
    minus the sum over control rows) / number of matched rows.  When the
    outcome is the label column it is binarized to the indicator of the
    modal class among treated rows (ties to the smallest class id), so
    a scalar difference is meaningful.
    """
    if not pairs:
        raise ValueError("no matched pairs to average over")
    t = matrix.bits[:, treatment]
    if outcome == matrix.label_node:
        treated_labels = matrix.labels[t == 1]
        if treated_labels.size == 0:
            raise DegenerateTreatment("no treated rows")
        modal = int(np.bincount(treated_labels).argmax())
        y = (matrix.labels == modal).astype(float)
    else:
        y = matrix.bits[:, outcome].astype(float)

    total = 0.0
    for i, j in pairs:
        delta = y[i] - y[j]
        total += delta if t[i] == 1 else -delta
    return total / len(pairs)


def edge_strengths(candidates: CandidateSet, matrix: FactorMatrix) -> StrengthMap:
    """BIC-softmax blend of per-edge matched effects across candidates.

    Candidate weights are exp(bic - max bic), normalized.  Each distinct
    edge's effect is estimated once (it only depends on the matrix); an
    edge whose treatment column is constant, or whose matching comes up
    empty, contributes strength 0 rather than failing the whole map.
    """
    cands = candidates.candidates
    if any(c.bic is None for c in cands):
        raise ValueError("candidates must be scored before strength estimation")
    w = bic_softmax([c.bic for c in cands])

    all_edges = sorted({e for c in cands for e in c.dag.edges})
    match_cache: dict[int, MatchResult | None] = {}
    effects: dict[tuple[int, int], float] = {}
    for t_node, y_node in all_edges:
        if t_node not in match_cache:
            try:
                scores = propensity_scores(matrix, t_node)
                match_cache[t_node] = match_pairs(scores, matrix.bits[:, t_node])
            except (DegenerateTreatment, NoMatches):
                match_cache[t_node] = None
        matched = match_cache[t_node]
        if matched is None:
            effects[(t_node, y_node)] = 0.0
            continue
        try:
            effects[(t_node, y_node)] = ate(matrix, t_node, y_node, matched.pairs)
        except DegenerateTreatment:
            effects[(t_node, y_node)] = 0.0

    per_edge = {}
    for e in all_edges:
        mass = sum(float(wq) for wq, c in zip(w, cands) if e in c.dag.edges)
        per_edge[e] = mass * effects[e]
    return StrengthMap(per_edge=per_edge, weights_used=w)


def timestep_strengths(
    series: TimeSeries,
    snippets: Sequence[Snippet],
    assignments: Sequence[int],
    strengths: StrengthMap,
    label_node: int | None,
) -> TimestepStrengths:
    """Distribute label-edge strength over the series' time steps.

    Steps covered by a snippet of factor f receive |strength(f -> label)|,
    overlaps keeping the maximum; the vector is normalized to sum 1, or
    left uniform when no covered step carries any strength.
    """
    n = series.n
    raw = np.zeros(n)
    if label_node is not None:
        for snip, fid in zip(snippets, assignments):
            s = abs(strengths.strength(fid, label_node))
            if s == 0.0:
                continue
            lo = snip.subsequence.start - 1
            hi = min(lo + snip.subsequence.length, n)
            np.maximum(raw[lo:hi], s, out=raw[lo:hi])
    total = raw.sum()
    if total <= 0.0:
        return TimestepStrengths(zeta=np.full(n, 1.0 / n))
    return TimestepStrengths(zeta=raw / total)


def bic_softmax(bics: Sequence[float]) -> np.ndarray:
    """Normalized exp(bic - max bic); shift-invariant by construction."""
    arr = np.asarray(bics, dtype=float)
    w = np.exp(arr - arr.max())
    return w / w.sum()
