"""File formats: delimited series files, the structure JSON, the
strengths JSON handed to downstream consumers, and DOT export.

Serialization is deterministic: dict insertion order is fixed, floats
go through Python's shortest round-trip repr, so identical structures
produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Mapping, Sequence

import numpy as np

from .apps import CausalStructure, FactorSummary, ScoredCandidate, series_factors
from .config import RunConfig
from .errors import EmptyFile, ParseError, RaggedRows
from .graph import CausalDag
from .series import Dataset, TimeSeries
from .strength import StrengthMap, timestep_strengths

STRUCTURE_VERSION = 1
STRENGTHS_VERSION = 1


# ---------------------------------------------------------------------------
# delimited series files
# ---------------------------------------------------------------------------


def detect_delimiter(first_line: str) -> str:
    if "\t" in first_line:
        return "\t"
    if "," in first_line:
        return ","
    raise ParseError(1, "no tab or comma delimiter found")


def load_ucr(path: str, delimiter: str | None = None) -> tuple[Dataset, dict]:
    """Load a label-first delimited file into a dataset.

    Each non-blank line is one series: the first field is its class
    label, the rest are samples.  Labels are remapped to contiguous ids
    0..C-1 in sorted numeric order; the returned mapping goes from the
    original label value to the new id.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    rows: list[tuple[int, str]] = [
        (n + 1, line.strip())
        for n, line in enumerate(text.splitlines())
        if line.strip()
    ]
    if not rows:
        raise EmptyFile(f"{path} holds no data rows")
    if delimiter is None:
        delimiter = detect_delimiter(rows[0][1])

    parsed: list[tuple[float, np.ndarray]] = []
    width = None
    for lineno, line in rows:
        fields = line.split(delimiter)
        if width is None:
            width = len(fields)
            if width < 2:
                raise ParseError(lineno, "a row needs a label and at least one sample")
        elif len(fields) != width:
            raise RaggedRows(
                lineno, f"expected {width} fields, found {len(fields)}"
            )
        try:
            numbers = [float(f) for f in fields]
        except ValueError as err:
            raise ParseError(lineno, str(err)) from None
        parsed.append((numbers[0], np.array(numbers[1:])))

    distinct = sorted({lab for lab, _ in parsed})
    mapping = {lab: i for i, lab in enumerate(distinct)}
    series = tuple(
        TimeSeries(values=vals, label=mapping[lab], id=str(i))
        for i, (lab, vals) in enumerate(parsed)
    )
    return Dataset(series=series), mapping


def format_ucr(
    dataset: Dataset,
    delimiter: str = "\t",
    label_values: Mapping[int, float] | None = None,
) -> str:
    """Render a labeled dataset back into the label-first format.

    ``label_values`` maps internal label ids back to the original file's
    label values (the inverse of the mapping ``load_ucr`` returned).
    """
    lines = []
    for s in dataset:
        lab = float(s.label if label_values is None else label_values[s.label])
        fields = [repr(lab)] + [repr(float(v)) for v in s.values]
        lines.append(delimiter.join(fields))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structure JSON
# ---------------------------------------------------------------------------


def _config_to_json(config: RunConfig) -> dict:
    return {
        "seed": config.seed,
        "alpha": config.alpha,
        "nClusters": config.n_clusters,
        "kSnippets": config.k_snippets,
        "thetaPrec": config.theta_prec,
        "bootstrapB": config.bootstrap_b,
        "lOverride": config.l_override,
    }


def _config_from_json(obj: Mapping) -> RunConfig:
    return RunConfig(
        seed=int(obj["seed"]),
        alpha=float(obj["alpha"]),
        n_clusters=int(obj["nClusters"]),
        k_snippets=int(obj["kSnippets"]),
        theta_prec=float(obj["thetaPrec"]),
        bootstrap_b=int(obj["bootstrapB"]),
        l_override=None if obj["lOverride"] is None else int(obj["lOverride"]),
    )


def export_structure(structure: CausalStructure) -> str:
    """Structure as deterministic, round-trippable JSON text."""
    obj = {
        "version": STRUCTURE_VERSION,
        "unifiedLength": structure.unified_len,
        "factors": [
            {
                "id": f.factor_id,
                "centroid": [float(v) for v in f.centroid],
                "exemplarCount": f.exemplar_count,
            }
            for f in structure.factors
        ],
        "label": structure.label_node,
        "edges": [
            {"from": u, "to": v, "strength": structure.strengths.strength(u, v)}
            for u, v in structure.dag.edges
        ],
        "candidates": [
            {
                "edges": [[u, v] for u, v in c.dag.edges],
                "bicWeight": c.bic_weight,
            }
            for c in structure.candidates
        ],
        "config": _config_to_json(structure.config),
        "seed": structure.seed,
    }
    return json.dumps(obj, indent=2) + "\n"


def import_structure(text: str) -> CausalStructure:
    """Inverse of :func:`export_structure`."""
    obj = json.loads(text)
    version = obj.get("version")
    if version != STRUCTURE_VERSION:
        raise ValueError(f"unsupported structure version {version!r}")
    n_factors = len(obj["factors"])
    label = obj["label"]
    n_nodes = n_factors + (1 if label is not None else 0)
    factors = tuple(
        FactorSummary(
            factor_id=int(f["id"]),
            centroid=np.array(f["centroid"], dtype=float),
            exemplar_count=int(f["exemplarCount"]),
        )
        for f in obj["factors"]
    )
    dag = CausalDag(
        n_nodes=n_nodes,
        edges=tuple((int(e["from"]), int(e["to"])) for e in obj["edges"]),
        label_node=label,
    )
    candidates = tuple(
        ScoredCandidate(
            dag=CausalDag(
                n_nodes=n_nodes,
                edges=tuple((int(u), int(v)) for u, v in c["edges"]),
                label_node=label,
            ),
            bic_weight=float(c["bicWeight"]),
        )
        for c in obj["candidates"]
    )
    strengths = StrengthMap(
        per_edge={
            (int(e["from"]), int(e["to"])): float(e["strength"])
            for e in obj["edges"]
        },
        weights_used=tuple(c.bic_weight for c in candidates),
    )
    return CausalStructure(
        factors=factors,
        label_node=label,
        dag=dag,
        strengths=strengths,
        candidates=candidates,
        config=_config_from_json(obj["config"]),
        unified_len=int(obj["unifiedLength"]),
        seed=int(obj["seed"]),
    )


# ---------------------------------------------------------------------------
# strengths JSON (the contract consumed by downstream trainers)
# ---------------------------------------------------------------------------


def export_strengths(structure: CausalStructure, dataset: Dataset) -> str:
    """Edge strengths plus a per-series timestep weight vector."""
    zeta: dict[str, list[float]] = {}
    for s in dataset:
        snips, assigned = series_factors(s, structure)
        ts = timestep_strengths(
            s, snips, assigned, structure.strengths, structure.label_node
        )
        zeta[s.id] = [float(v) for v in ts.zeta]
    obj = {
        "version": STRENGTHS_VERSION,
        "label": structure.label_node,
        "edges": [
            {"from": u, "to": v, "strength": structure.strengths.strength(u, v)}
            for u, v in structure.dag.edges
        ],
        "zeta": zeta,
    }
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def export_dot(
    structure: CausalStructure,
    mode: str = "dataset",
    series: TimeSeries | None = None,
) -> str:
    """Graphviz rendering of the selected graph.

    Dataset mode draws every factor; series mode re-encodes the given
    series and drops factors (and their edges) it does not exhibit.
    The label node is double-circled, edge labels carry strengths to
    three decimals.
    """
    if mode not in ("dataset", "series"):
        raise ValueError(f"unknown mode {mode!r}")
    visible = {f.factor_id for f in structure.factors}
    if mode == "series":
        if series is None:
            raise ValueError("series mode needs a series")
        _, assigned = series_factors(series, structure)
        visible = set(assigned)

    lines = ["digraph causal_structure {"]
    for f in structure.factors:
        if f.factor_id in visible:
            lines.append(f'  f{f.factor_id} [label="factor {f.factor_id}"];')
    if structure.label_node is not None:
        lines.append('  label [label="label", shape=doublecircle];')

    def node_name(v: int) -> str:
        return "label" if v == structure.label_node else f"f{v}"

    for u, v in structure.dag.edges:
        if u != structure.label_node and u not in visible:
            continue
        if v != structure.label_node and v not in visible:
            continue
        s = structure.strengths.strength(u, v)
        lines.append(f'  {node_name(u)} -> {node_name(v)} [label="{s:.3f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# filesystem helpers
# ---------------------------------------------------------------------------


def atomic_write(path: str, text: str):
    """Write via a temp file and rename, so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
