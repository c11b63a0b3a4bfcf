"""Shared synthetic generators for the test suite.

Most tests plant a known shape, graph, or effect and check that the
library digs it back out, so the builders here are deliberately simple:
periodic templates, segment-concatenated series, and hand-assembled
structures with known causal factors.
"""

from __future__ import annotations

import numpy as np

from causalts import (
    CausalDag,
    CausalStructure,
    Dataset,
    FactorSummary,
    RunConfig,
    ScoredCandidate,
    TimeSeries,
)
from causalts.strength import StrengthMap


def sine_wave(n, period, phase=0.0):
    t = np.arange(n, dtype=float)
    return np.sin(2.0 * np.pi * (t + phase) / period)


def square_wave(n, period):
    return np.where((np.arange(n) % period) < period / 2.0, 1.0, -1.0)


def sawtooth_wave(n, period):
    # descending ramp: its fundamental is in phase with sine_wave's, so
    # segment-concatenated series keep one clean spectral peak
    return 1.0 - ((np.arange(n) % period) / period) * 2.0


TEMPLATES = {
    "sine": sine_wave,
    "square": square_wave,
    "saw": sawtooth_wave,
}


def two_regime_series(rng, n=400, period=25, noise=0.05):
    """Sine for the first half, square wave for the second."""
    half = n // 2
    vals = np.concatenate(
        [sine_wave(half, period), square_wave(n - half, period)]
    )
    return vals + rng.normal(0.0, noise, size=n)


def segment_series(shapes, seg_len, period, rng, noise=0.05):
    """Concatenate one template segment per entry of ``shapes``."""
    parts = [TEMPLATES[s](seg_len, period) for s in shapes]
    vals = np.concatenate(parts)
    return vals + rng.normal(0.0, noise, size=vals.size)


def powercons_like(seed, n_rows=180, seg_len=80, period=16, noise=0.05):
    """Two-class dataset shaped like a small appliance-usage benchmark.

    Class 0 leads with a sine motif, class 1 with a square motif; the
    second segment repeats the class motif most of the time but sometimes
    carries the other class's motif or a sawtooth distractor, so factor
    bits vary within each class.
    """
    rng = np.random.default_rng(seed)
    series = []
    per_class = n_rows // 2
    for i in range(n_rows):
        label = 0 if i < per_class else 1
        main = "sine" if label == 0 else "square"
        other = "square" if label == 0 else "sine"
        u = rng.random()
        if u < 0.55:
            second = main
        elif u < 0.80:
            second = other
        else:
            second = "saw"
        vals = segment_series([main, second], seg_len, period, rng, noise)
        series.append(TimeSeries(values=vals, label=label, id=f"s{i:03d}"))
    return Dataset(series=tuple(series))


def early_late_dataset(seed, n_rows=40, seg_len=80, period=16, noise=0.05):
    """Planted pipeline dataset: an early motif, a late motif, a label.

    Segment one is sine (factor A) or sawtooth; segment two is square
    (factor B) or sawtooth, drawn independently. The label copies B's
    presence with a 10% flip, so B drives the label while the sawtooth
    filler is noise. Whenever A and B co-occur, B starts later.
    """
    rng = np.random.default_rng(seed)
    series = []
    for i in range(n_rows):
        first = "sine" if rng.random() < 0.6 else "saw"
        has_b = rng.random() < 0.5
        second = "square" if has_b else "saw"
        label = int(has_b) ^ int(rng.random() < 0.1)
        vals = segment_series([first, second], seg_len, period, rng, noise)
        series.append(TimeSeries(values=vals, label=label, id=f"s{i:03d}"))
    return Dataset(series=tuple(series))


# ---------------------------------------------------------------------------
# Hand-assembled structures


def make_structure(
    n_factors,
    dag_edges,
    label_node=None,
    strengths=None,
    unified_len=12,
    k_snippets=2,
    seed=0,
    centroids=None,
):
    """Assemble a CausalStructure directly, skipping the pipeline."""
    if centroids is None:
        shapes = list(TEMPLATES.values())
        centroids = [
            shapes[f % len(shapes)](unified_len, unified_len) for f in range(n_factors)
        ]
    factors = tuple(
        FactorSummary(factor_id=f, centroid=centroids[f], exemplar_count=1)
        for f in range(n_factors)
    )
    n_nodes = n_factors + (1 if label_node is not None else 0)
    dag = CausalDag(n_nodes=n_nodes, edges=tuple(dag_edges), label_node=label_node)
    if strengths is None:
        strengths = {e: 0.5 for e in dag.edges}
    smap = StrengthMap(per_edge=strengths, weights_used=(1.0,))
    config = RunConfig(
        seed=seed,
        n_clusters=n_factors,
        k_snippets=k_snippets,
        l_override=unified_len,
    )
    return CausalStructure(
        factors=factors,
        label_node=label_node,
        dag=dag,
        strengths=smap,
        candidates=(ScoredCandidate(dag=dag, bic_weight=1.0),),
        config=config,
        unified_len=unified_len,
        seed=seed,
    )


def random_structure(rng, unified_len=12, k_snippets=2):
    """Random labeled structure over 2..5 factors with a random DAG.

    Edges follow the node order (factors ascending, label last), which
    keeps every draw acyclic and the label a sink by construction.
    """
    n_factors = int(rng.integers(2, 6))
    label_node = n_factors
    edges = []
    for u in range(n_factors):
        for v in range(u + 1, n_factors + 1):
            if rng.random() < 0.35:
                edges.append((u, v))
    strengths = {e: float(rng.normal(0.0, 0.5)) for e in edges}
    # Mimic the pipeline occasionally blending an edge down to nothing.
    for e in list(strengths):
        if rng.random() < 0.1:
            strengths[e] = 0.0
    # Noise templates keep snippet assignment meaningful.
    shapes = list(TEMPLATES.values())
    centroids = []
    for f in range(n_factors):
        base = shapes[f % len(shapes)](unified_len, unified_len)
        centroids.append(base + rng.normal(0.0, 0.05, size=unified_len))
    return make_structure(
        n_factors,
        edges,
        label_node=label_node,
        strengths=strengths,
        unified_len=unified_len,
        k_snippets=k_snippets,
        seed=int(rng.integers(0, 2**31)),
        centroids=centroids,
    )


def random_dataset_for(structure, rng, n_series=None, tiles=4):
    """Series built by tiling the structure's own centroid shapes."""
    m = structure.unified_len
    n_series = int(rng.integers(8, 16)) if n_series is None else n_series
    series = []
    for i in range(n_series):
        f = int(rng.integers(0, len(structure.factors)))
        tile = np.asarray(structure.factors[f].centroid, dtype=float)
        vals = np.tile(tile, tiles) + rng.normal(0.0, 0.05, size=m * tiles)
        vals = np.roll(vals, int(rng.integers(0, m)))
        series.append(
            TimeSeries(values=vals, label=int(rng.integers(0, 2)), id=f"r{i:03d}")
        )
    return Dataset(series=tuple(series))
