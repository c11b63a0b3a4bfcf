"""Command-line front end.

Subcommands mirror the library surface: discover a structure, emit
strengths, prune a dataset, classify with the masked representation,
print the causal information ratio, and sweep the (l, k) grid.  Domain
errors print one JSON object on stderr and exit nonzero, so scripted
callers can branch on the error class.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .apps import (
    accuracy,
    build_structure,
    cir,
    classify_knn,
    macro_f1,
    prune_dataset,
    represent,
    sweep_parameters,
)
from .config import RunConfig
from .errors import CausalTsError, PipelineError
from .io import (
    atomic_write,
    detect_delimiter,
    export_dot,
    export_strengths,
    export_structure,
    format_ucr,
    import_structure,
    load_ucr,
)


def _add_config_options(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with run configuration")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--alpha", type=float, help="independence test level")
    p.add_argument("--clusters", type=int, help="number of shape factors")
    p.add_argument("--snippets", type=int, help="snippets per series")
    p.add_argument("--theta-prec", type=float, help="precedence ban threshold")
    p.add_argument("--bootstrap", type=int, help="resolution sample budget")
    p.add_argument("--length", type=int, help="fixed snippet length override")


_CONFIG_KEYS = {
    "seed": "seed",
    "alpha": "alpha",
    "nClusters": "n_clusters",
    "kSnippets": "k_snippets",
    "thetaPrec": "theta_prec",
    "bootstrapB": "bootstrap_b",
    "lOverride": "l_override",
}


def _build_config(args) -> RunConfig:
    values = dataclasses.asdict(RunConfig())
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        for key, val in raw.items():
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            values[_CONFIG_KEYS[key]] = val
    overrides = {
        "seed": args.seed,
        "alpha": args.alpha,
        "n_clusters": getattr(args, "clusters", None),
        "k_snippets": getattr(args, "snippets", None),
        "theta_prec": getattr(args, "theta_prec", None),
        "bootstrap_b": getattr(args, "bootstrap", None),
        "l_override": getattr(args, "length", None),
    }
    for field, val in overrides.items():
        if val is not None:
            values[field] = val
    return RunConfig(**values)


def _load_structure(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return import_structure(fh.read())


def _cmd_discover(args) -> int:
    config = _build_config(args)
    dataset, _ = load_ucr(args.data)
    structure = build_structure(dataset, config)
    os.makedirs(args.out_dir, exist_ok=True)
    out_json = f"{args.out_dir}/structure.json"
    out_dot = f"{args.out_dir}/structure.dot"
    atomic_write(out_json, export_structure(structure))
    atomic_write(out_dot, export_dot(structure))
    print(f"factors={len(structure.factors)} edges={len(structure.dag.edges)}")
    print(f"wrote {out_json}")
    print(f"wrote {out_dot}")
    return 0


def _cmd_strength(args) -> int:
    structure = _load_structure(args.structure)
    dataset, _ = load_ucr(args.data)
    atomic_write(args.out, export_strengths(structure, dataset))
    print(f"wrote {args.out}")
    return 0


def _cmd_prune(args) -> int:
    structure = _load_structure(args.structure)
    dataset, mapping = load_ucr(args.data)
    pruned = prune_dataset(dataset, structure)
    with open(args.data, "r", encoding="utf-8") as fh:
        first = next(line for line in fh.read().splitlines() if line.strip())
    delimiter = detect_delimiter(first)
    inverse = {v: k for k, v in mapping.items()}
    atomic_write(args.out, format_ucr(pruned, delimiter, label_values=inverse))
    print(f"kept {len(pruned)} of {len(dataset)} series; wrote {args.out}")
    return 0


def _cmd_classify(args) -> int:
    structure = _load_structure(args.structure)
    train_ds, _ = load_ucr(args.train)
    test_ds, _ = load_ucr(args.test)
    train_reps = [(represent(s, structure), s.label) for s in train_ds]
    predictions = [
        classify_knn(train_reps, represent(s, structure), args.knn) for s in test_ds
    ]
    actual = [s.label for s in test_ds]
    acc = accuracy(predictions, actual)
    f1 = macro_f1(predictions, actual)
    print(f"accuracy={acc} macro_f1={f1}")
    atomic_write(args.out, f"accuracy,macro_f1\n{acc},{f1}\n")
    return 0


def _cmd_cir(args) -> int:
    structure = _load_structure(args.structure)
    print(cir(structure))
    return 0


def _cmd_sweep(args) -> int:
    config = _build_config(args)
    dataset, _ = load_ucr(args.data)
    l_grid = [int(v) for v in args.l_grid.split(",") if v]
    k_grid = [int(v) for v in args.k_grid.split(",") if v]
    cells = sweep_parameters(dataset, l_grid, k_grid, config)
    lines = ["l,k,cir"]
    for cell in cells:
        value = "" if cell.cir_value is None else repr(cell.cir_value)
        lines.append(f"{cell.l},{cell.k},{value}")
    atomic_write(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalts",
        description="Mine causal structure inside univariate time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="mine a causal structure from a dataset")
    p.add_argument("data", help="delimited series file (label first)")
    p.add_argument("--out-dir", default=".", help="where structure files land")
    _add_config_options(p)
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("strength", help="emit edge and timestep strengths")
    p.add_argument("structure", help="structure JSON file")
    p.add_argument("data", help="delimited series file")
    p.add_argument("--out", default="strengths.json")
    p.add_argument("--seed", type=int, help="unused; accepted for uniformity")
    p.set_defaults(func=_cmd_strength)

    p = sub.add_parser("prune", help="drop series without causal factors")
    p.add_argument("structure")
    p.add_argument("data")
    p.add_argument("--out", default="pruned.tsv")
    p.add_argument("--seed", type=int, help="unused; accepted for uniformity")
    p.set_defaults(func=_cmd_prune)

    p = sub.add_parser("classify", help="masked nearest-neighbor classification")
    p.add_argument("structure")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--knn", type=int, default=1, help="odd neighbor count")
    p.add_argument("--out", default="metrics.csv")
    p.add_argument("--seed", type=int, help="unused; accepted for uniformity")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("cir", help="print the causal information ratio")
    p.add_argument("structure")
    p.add_argument("--seed", type=int, help="unused; accepted for uniformity")
    p.set_defaults(func=_cmd_cir)

    p = sub.add_parser("sweep", help="grid-evaluate window length and snippet count")
    p.add_argument("data")
    p.add_argument("--l-grid", required=True, help="comma-separated lengths")
    p.add_argument("--k-grid", required=True, help="comma-separated snippet counts")
    p.add_argument("--out", default="sweep.csv")
    _add_config_options(p)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CausalTsError as err:
        payload = {"error": type(err).__name__, "message": str(err)}
        if isinstance(err, PipelineError):
            payload["stage"] = err.stage
        print(json.dumps(payload), file=sys.stderr)
        return 1
    except (OSError, ValueError) as err:
        payload = {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(payload), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
