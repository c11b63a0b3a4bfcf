"""Turning snippet assignments into a binary factor matrix plus the
temporal precedence relation between factors.

One row per series: bit j is set when at least one of the series'
snippets falls into shape cluster j.  When the dataset is labeled the
label rides along as an extra column (values remapped to 0..C-1 in
sorted order) so graph discovery can treat it as one more variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import LengthMismatch, MissingSnippets
from .kshape import ShapeCluster, sbd
from .series import Dataset, znormalize
from .snippets import Snippet


@dataclass(frozen=True, eq=False)
class FactorMatrix:
    """Binary factor presence per series, with an optional label column.

    Graph code addresses columns as nodes: factors are nodes
    0..n_factors-1 and the label, when present, is node ``n_factors``.
    """

    bits: np.ndarray                 # (rows, n_factors) of {0, 1}
    labels: np.ndarray | None        # (rows,) codes 0..class_count-1
    factor_ids: tuple[int, ...]
    series_ids: tuple[str, ...]

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int64)
        if bits.ndim != 2:
            raise ValueError("bits must be a 2-d matrix")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("factor bits must be 0 or 1")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (bits.shape[0],):
                raise ValueError("label column length mismatch")
            lab.flags.writeable = False
            object.__setattr__(self, "labels", lab)

    @property
    def n_rows(self) -> int:
        return int(self.bits.shape[0])

    @property
    def n_factors(self) -> int:
        return int(self.bits.shape[1])

    @property
    def class_count(self) -> int:
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def label_node(self) -> int | None:
        return self.n_factors if self.labels is not None else None

    @property
    def node_count(self) -> int:
        return self.n_factors + (1 if self.labels is not None else 0)

    def node_values(self, node: int) -> np.ndarray:
        if node == self.label_node:
            return self.labels
        return self.bits[:, node]

    def node_levels(self, node: int) -> int:
        if node == self.label_node:
            return max(self.class_count, 2)
        return 2


@dataclass(frozen=True, eq=False)
class PrecedenceRelation:
    """after[x, y]: fraction of co-occurrences where factor x starts
    strictly later than factor y (earliest snippet starts compared)."""

    after: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.after, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "after", arr)

    def after_frac(self, x: int, y: int) -> float:
        return float(self.after[x, y])


def assign_factor(snippet: Snippet, clusters: Sequence[ShapeCluster]) -> int:
    """Factor id of the cluster whose centroid sits nearest the snippet.

    The snippet window is z-normalized first, mirroring how pooled
    snippets entered clustering.  Ties go to the lower factor id.
    """
    if not clusters:
        raise ValueError("no clusters to assign into")
    z = znormalize(snippet.subsequence.values)
    best_id = -1
    best_d = np.inf
    for c in clusters:
        if len(c.centroid) != z.size:
            raise LengthMismatch(
                f"centroid length {len(c.centroid)} vs snippet length {z.size}"
            )
        d, _ = sbd(z, c.centroid)
        if d < best_d:
            best_d = d
            best_id = c.factor_id
    return best_id


def assign_snippets(
    snippets_by_series: Mapping[str, Sequence[Snippet]],
    clusters: Sequence[ShapeCluster],
) -> dict[str, tuple[int, ...]]:
    """Factor assignment for every snippet of every series."""
    return {
        sid: tuple(assign_factor(s, clusters) for s in snips)
        for sid, snips in snippets_by_series.items()
    }


def encode_dataset(
    dataset: Dataset,
    snippets_by_series: Mapping[str, Sequence[Snippet]],
    clusters: Sequence[ShapeCluster],
    assignments: Mapping[str, Sequence[int]] | None = None,
) -> FactorMatrix:
    """Binary factor matrix over the dataset, rows in dataset order.

    ``assignments`` can carry precomputed factor assignments (keyed like
    ``snippets_by_series``) to avoid re-running the nearest-centroid
    search; otherwise they are computed here.
    """
    factor_ids = tuple(c.factor_id for c in clusters)
    col_of = {fid: i for i, fid in enumerate(factor_ids)}
    rows = np.zeros((len(dataset), len(factor_ids)), dtype=np.int64)
    for r, s in enumerate(dataset):
        snips = snippets_by_series.get(s.id)
        if not snips:
            raise MissingSnippets(f"series {s.id!r} has no snippets to encode")
        if assignments is not None:
            assigned = assignments[s.id]
        else:
            assigned = [assign_factor(sn, clusters) for sn in snips]
        for fid in assigned:
            rows[r, col_of[fid]] = 1

    labels = None
    if dataset.labeled:
        raw = np.array([s.label for s in dataset], dtype=np.int64)
        ordered = np.unique(raw)
        remap = {v: i for i, v in enumerate(ordered.tolist())}
        labels = np.array([remap[v] for v in raw.tolist()], dtype=np.int64)

    return FactorMatrix(
        bits=rows,
        labels=labels,
        factor_ids=factor_ids,
        series_ids=tuple(s.id for s in dataset),
    )


def temporal_precedence(
    dataset: Dataset,
    snippets_by_series: Mapping[str, Sequence[Snippet]],
    assignments: Mapping[str, Sequence[int]],
    n_factors: int,
) -> PrecedenceRelation:
    """How often each factor starts after each other factor.

    Per series, each present factor is reduced to its earliest snippet
    start; for every ordered pair co-occurring in a series, x counts as
    "after" y when its earliest start is strictly later.  Fractions are
    over co-occurrence counts, and pairs that never co-occur score 0.
    """
    after = np.zeros((n_factors, n_factors))
    co = np.zeros((n_factors, n_factors))
    for s in dataset:
        snips = snippets_by_series.get(s.id)
        if not snips:
            raise MissingSnippets(f"series {s.id!r} has no snippets")
        assigned = assignments[s.id]
        first: dict[int, int] = {}
        for sn, fid in zip(snips, assigned):
            start = sn.subsequence.start
            if fid not in first or start < first[fid]:
                first[fid] = start
        present = sorted(first)
        for x in present:
            for y in present:
                if x == y:
                    continue
                co[x, y] += 1
                if first[x] > first[y]:
                    after[x, y] += 1
    with np.errstate(invalid="ignore"):
        frac = np.where(co > 0, after / np.where(co > 0, co, 1.0), 0.0)
    return PrecedenceRelation(after=frac)
