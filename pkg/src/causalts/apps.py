"""End-to-end structure building and what you do with the result:
masked nearest-neighbor classification, dataset pruning, the causal
information ratio, and parameter sweeps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .encode import (
    FactorMatrix,
    assign_factor,
    assign_snippets,
    encode_dataset,
    temporal_precedence,
)
from .errors import CausalTsError, NoLabel, NoOverlap, PipelineError
from .graph import (
    CausalDag,
    Pag,
    apply_constraints,
    discover_pag,
    resolve_candidates,
    select_graph,
)
from .config import RunConfig
from .kshape import ShapeCluster, kshape_cluster
from .series import Dataset, TimeSeries, unified_length
from .snippets import Snippet, discover_snippets
from .strength import StrengthMap, edge_strengths

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FactorSummary:
    """What survives of a shape cluster inside a finished structure."""

    factor_id: int
    centroid: np.ndarray
    exemplar_count: int

    def __post_init__(self):
        arr = np.asarray(self.centroid, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "centroid", arr)

    def __eq__(self, other):
        if not isinstance(other, FactorSummary):
            return NotImplemented
        return (
            self.factor_id == other.factor_id
            and self.exemplar_count == other.exemplar_count
            and np.array_equal(self.centroid, other.centroid)
        )


@dataclass(frozen=True)
class ScoredCandidate:
    """A candidate DAG with its normalized BIC weight."""

    dag: CausalDag
    bic_weight: float


@dataclass(frozen=True, eq=False)
class CausalStructure:
    """Everything the pipeline mined from one dataset.

    ``dag`` is the selected graph; ``strengths`` covers exactly its
    edges.  ``candidates`` keeps the full weighted family so strength
    blending stays reproducible after a round trip through JSON.
    """

    factors: tuple[FactorSummary, ...]
    label_node: int | None
    dag: CausalDag
    strengths: StrengthMap
    candidates: tuple[ScoredCandidate, ...]
    config: RunConfig
    unified_len: int
    seed: int

    def __eq__(self, other):
        if not isinstance(other, CausalStructure):
            return NotImplemented
        return (
            self.factors == other.factors
            and self.label_node == other.label_node
            and self.dag == other.dag
            and self.strengths == other.strengths
            and self.candidates == other.candidates
            and self.config == other.config
            and self.unified_len == other.unified_len
            and self.seed == other.seed
        )

    @property
    def causal_factors(self) -> tuple[int, ...]:
        """Factors with a directed edge into the label, ascending."""
        if self.label_node is None:
            return ()
        return tuple(
            sorted(u for u, v in self.dag.edges if v == self.label_node)
        )


@dataclass(frozen=True, eq=False)
class Representation:
    """Concatenated snippet values with a validity mask.

    Padding positions carry value 0 and mask 0; distances between
    representations only ever look at jointly unmasked positions.
    """

    values: np.ndarray
    mask: np.ndarray
    source_factors: tuple[int, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        msk = np.asarray(self.mask, dtype=bool)
        if vals.shape != msk.shape:
            raise ValueError("values and mask must share a shape")
        vals.flags.writeable = False
        msk.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mask", msk)


def build_structure(dataset: Dataset, config: RunConfig) -> CausalStructure:
    """Run the whole mining pipeline on a dataset.

    Stages: unified window length (or the configured override), per-series
    snippets, pooled k-shape clustering, factor encoding plus temporal
    precedence, PAG discovery, constraint application, candidate
    resolution, BIC selection, and strength estimation.  Any stage error
    is re-raised as a PipelineError naming the stage.  Datasets too small
    for discovery (under 20 rows, or a single column) degrade to an empty
    graph with a logged warning instead of failing.
    """
    def run(stage, fn):
        try:
            return fn()
        except PipelineError:
            raise
        except CausalTsError as err:
            raise PipelineError(stage, str(err)) from err

    if config.l_override is not None:
        length = config.l_override
    else:
        length = run("unified-length", lambda: unified_length(dataset))

    snippets_by_series = run(
        "snippets",
        lambda: {
            s.id: discover_snippets(s, config.k_snippets, length) for s in dataset
        },
    )
    pooled = [sn for s in dataset for sn in snippets_by_series[s.id]]
    clusters = run(
        "clustering",
        lambda: kshape_cluster(pooled, config.n_clusters, config.seed),
    )
    assignments = run(
        "encoding", lambda: assign_snippets(snippets_by_series, clusters)
    )
    matrix = run(
        "encoding",
        lambda: encode_dataset(dataset, snippets_by_series, clusters, assignments),
    )
    precedence = run(
        "encoding",
        lambda: temporal_precedence(
            dataset, snippets_by_series, assignments, len(clusters)
        ),
    )

    if matrix.node_count < 2 or matrix.n_rows < 20:
        log.warning(
            "dataset too small for graph discovery (%d rows, %d columns); "
            "falling back to an empty graph",
            matrix.n_rows,
            matrix.node_count,
        )
        pag = Pag(matrix.node_count, matrix.label_node)
    else:
        pag = run(
            "discovery",
            lambda: discover_pag(matrix, config.alpha, score_warm_start=False),
        )

    constrained = run(
        "constraints",
        lambda: apply_constraints(
            pag, matrix.label_node, precedence, config.theta_prec
        ),
    )
    candidates = run(
        "resolution",
        lambda: resolve_candidates(constrained, config.bootstrap_b, config.seed),
    )
    if candidates.no_acyclic_warning:
        log.warning("no acyclic resolution existed; using the empty graph")
    dag, scored = run("selection", lambda: select_graph(candidates, matrix))
    strengths = run("strength", lambda: edge_strengths(scored, matrix))

    weights = strengths.weights_used
    factor_summaries = tuple(
        FactorSummary(
            factor_id=c.factor_id,
            centroid=np.asarray(c.centroid, dtype=float),
            exemplar_count=len(c.members),
        )
        for c in clusters
    )
    return CausalStructure(
        factors=factor_summaries,
        label_node=matrix.label_node,
        dag=dag,
        strengths=StrengthMap(
            per_edge={e: strengths.strength(*e) for e in dag.edges},
            weights_used=weights,
        ),
        candidates=tuple(
            ScoredCandidate(dag=c.dag, bic_weight=float(wq))
            for c, wq in zip(scored.candidates, weights)
        ),
        config=config,
        unified_len=length,
        seed=config.seed,
    )


def _structure_clusters(structure: CausalStructure) -> list[ShapeCluster]:
    return [
        ShapeCluster(factor_id=f.factor_id, centroid=f.centroid, members=())
        for f in structure.factors
    ]


def series_factors(
    series: TimeSeries, structure: CausalStructure, k: int | None = None
) -> tuple[list[Snippet], list[int]]:
    """Mine a series' snippets and assign each to a structure factor."""
    k = structure.config.k_snippets if k is None else k
    snips = discover_snippets(series, k, structure.unified_len)
    clusters = _structure_clusters(structure)
    return snips, [assign_factor(sn, clusters) for sn in snips]


def represent(
    series: TimeSeries,
    structure: CausalStructure,
    k: int | None = None,
    l: int | None = None,
) -> Representation:
    """Masked concatenation of the series' causally relevant snippets.

    Snippets whose factor has an edge into the label are kept (in rank
    order); if none qualifies every snippet is kept, so the fallback is
    the plain snippet representation.  The vector is padded with zeros
    to k * l positions, the mask flagging real values.
    """
    k = structure.config.k_snippets if k is None else k
    l = structure.unified_len if l is None else l
    snips = discover_snippets(series, k, l)
    clusters = _structure_clusters(structure)
    assigned = [assign_factor(sn, clusters) for sn in snips]

    causal = set(structure.causal_factors)
    keep = [i for i, fid in enumerate(assigned) if fid in causal]
    if not keep:
        keep = list(range(len(snips)))

    values = np.zeros(k * l)
    mask = np.zeros(k * l, dtype=bool)
    cursor = 0
    kept_factors = []
    for i in keep:
        window = snips[i].subsequence.values
        values[cursor : cursor + window.size] = window
        mask[cursor : cursor + window.size] = True
        cursor += window.size
        kept_factors.append(assigned[i])
    return Representation(
        values=values, mask=mask, source_factors=tuple(kept_factors)
    )


def masked_distance(a: Representation, b: Representation) -> float:
    """Mean-per-position Euclidean distance over jointly unmasked spots."""
    both = a.mask & b.mask
    overlap = int(both.sum())
    if overlap == 0:
        return float("inf")
    diff = a.values[both] - b.values[both]
    return float(np.sqrt(float((diff**2).sum())) / overlap)


def classify_knn(
    train: Sequence[tuple[Representation, int]],
    test: Representation,
    k_nn: int = 1,
) -> int:
    """Majority label among the k nearest masked representations.

    ``k_nn`` must be odd.  Distance ties keep the earlier training row;
    a vote tie falls back to the single nearest neighbor's label.
    """
    if k_nn < 1 or k_nn % 2 == 0:
        raise ValueError("k_nn must be a positive odd number")
    if not train:
        raise ValueError("empty training set")
    dists = np.array([masked_distance(rep, test) for rep, _ in train])
    if np.isinf(dists).all():
        raise NoOverlap("test representation overlaps no training row")
    order = np.argsort(dists, kind="stable")[: min(k_nn, len(train))]
    votes: dict[int, int] = {}
    for idx in order:
        lab = train[int(idx)][1]
        votes[lab] = votes.get(lab, 0) + 1
    best = max(votes.values())
    winners = [lab for lab, v in votes.items() if v == best]
    if len(winners) == 1:
        return winners[0]
    return train[int(order[0])][1]


def accuracy(predicted: Sequence[int], actual: Sequence[int]) -> float:
    pred = np.asarray(predicted)
    act = np.asarray(actual)
    if pred.size == 0 or pred.shape != act.shape:
        raise ValueError("prediction/label length mismatch")
    return float((pred == act).mean())


def macro_f1(predicted: Sequence[int], actual: Sequence[int]) -> float:
    """Unweighted mean of per-class F1 over the classes present in
    ``actual``; a class never predicted contributes an F1 of 0."""
    pred = np.asarray(predicted)
    act = np.asarray(actual)
    scores = []
    for c in np.unique(act):
        tp = float(((pred == c) & (act == c)).sum())
        fp = float(((pred == c) & (act != c)).sum())
        fn = float(((pred != c) & (act == c)).sum())
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def prune_dataset(dataset: Dataset, structure: CausalStructure) -> Dataset:
    """Keep only series exhibiting at least one causal factor.

    A series survives when any of its snippets is assigned to a factor
    that has an edge into the label.  Order is preserved and surviving
    series are the very same objects.
    """
    if structure.label_node is None:
        raise NoLabel("pruning needs a structure with a label node")
    causal = set(structure.causal_factors)
    kept = []
    for s in dataset:
        _, assigned = series_factors(s, structure)
        if causal.intersection(assigned):
            kept.append(s)
    return Dataset(series=tuple(kept))


def cir(structure: CausalStructure, n: int | None = None) -> float:
    """Causal information ratio: the share of factors driving the label."""
    if structure.label_node is None:
        raise NoLabel("the structure has no label node")
    n = len(structure.factors) if n is None else n
    if n < 1:
        raise ValueError("factor count must be positive")
    return len(structure.causal_factors) / n


@dataclass(frozen=True)
class SweepCell:
    """One (window length, snippet count) grid evaluation."""

    l: int
    k: int
    cir_value: float | None
    error: str | None = None


def sweep_parameters(
    dataset: Dataset,
    l_grid: Sequence[int],
    k_grid: Sequence[int],
    config: RunConfig,
) -> list[SweepCell]:
    """Rebuild the structure per grid point and record its ratio.

    A grid point that fails (series too short for the window, say)
    yields a missing cell naming the error instead of aborting the
    sweep.
    """
    cells = []
    for l in l_grid:
        for k in k_grid:
            cfg = replace(config, l_override=int(l), k_snippets=int(k))
            try:
                structure = build_structure(dataset, cfg)
                cells.append(SweepCell(l=int(l), k=int(k), cir_value=cir(structure)))
            except CausalTsError as err:
                cells.append(
                    SweepCell(
                        l=int(l),
                        k=int(k),
                        cir_value=None,
                        error=type(err).__name__,
                    )
                )
    return cells
