"""Command-line entry points.

Subcommands run pipeline prefixes, honoring caches:
  classify   full experiment (splits, k selection, report artifacts)
  diagrams   compute and store per-row persistence diagrams only
  distances  compute and store the pairwise distance matrix only
  inspect    print one row's point cloud, diagram, and nearest neighbors
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .cloud import build_point_cloud
from .errors import TopmixError
from .evaluate import holdout_indices
from .pipeline import (
    compute_diagrams,
    compute_distances,
    load_experiment_config,
    run_pipeline,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--k", type=int, help="override neighbor count")
    parser.add_argument("--seed", type=int, help="override split seed")
    parser.add_argument("--p", type=float, help="override Wasserstein order")
    parser.add_argument(
        "--maxscale-safety", type=float, help="override filtration cap safety factor"
    )
    parser.add_argument("--cache-dir", help="override cache directory")
    parser.add_argument("--out-dir", help="override output directory")
    parser.add_argument("--threads", type=int, help="worker processes for distances")


def _overrides(args: argparse.Namespace) -> dict:
    paths = {
        key: str(Path(value).resolve())
        for key, value in (("cache_dir", args.cache_dir), ("out_dir", args.out_dir))
        if value is not None
    }
    return {
        "k": args.k,
        "split_seed": args.seed,
        "wasserstein_p": args.p,
        "maxscale_safety": args.maxscale_safety,
        "threads": args.threads,
        **paths,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topmix",
        description="Topological k-NN classification of mixed tabular data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("classify", help="run the full experiment"))
    _add_common(sub.add_parser("diagrams", help="compute per-row diagrams"))
    _add_common(sub.add_parser("distances", help="compute the distance matrix"))

    inspect = sub.add_parser("inspect", help="examine one row")
    _add_common(inspect)
    inspect.add_argument("--row", type=int, required=True, help="row index")
    return parser


def _cmd_classify(config) -> int:
    result = run_pipeline(config)
    sys.stdout.write((result.artifacts["report"]).read_text(encoding="utf-8"))
    print(f"artifacts written to {config.out_dir}")
    return 0


def _cmd_diagrams(config) -> int:
    diagram_set = compute_diagrams(config)
    n_pairs = sum(len(d) for d in diagram_set.diagrams)
    print(
        f"{len(diagram_set.diagrams)} diagrams, {n_pairs} pairs, "
        f"maxscale {diagram_set.maxscale!r}"
    )
    if config.cache_dir is not None:
        print(f"written to {config.cache_dir / 'diagrams.csv'}")
    return 0


def _cmd_distances(config) -> int:
    diagram_set = compute_diagrams(config)
    matrix = compute_distances(config, diagram_set)
    print(f"{matrix.shape[0]}x{matrix.shape[1]} distance matrix")
    if config.cache_dir is not None:
        print(f"written to {config.cache_dir / 'distances.csv'}")
    return 0


def _cmd_inspect(config, row: int) -> int:
    diagram_set = compute_diagrams(config)
    matrix = compute_distances(config, diagram_set)
    n = len(diagram_set.diagrams)
    if not 0 <= row < n:
        raise TopmixError(f"row {row} out of range 0..{n - 1}")

    features = diagram_set.prepared.features
    print(f"row {row}: label {int(diagram_set.labels[row])}")
    print("point cloud (row vector, then one projection per coordinate):")
    cloud = build_point_cloud(features.values[row], source_row=row)
    for point in cloud.points:
        print("  " + " ".join(f"{v:.6g}" for v in point))
    print("diagram (birth, death):")
    for birth, death in diagram_set.diagrams[row].pairs:
        print(f"  ({float(birth)!r}, {float(death)!r})")

    if config.split.mode == "holdout":
        train, _, _ = holdout_indices(diagram_set.labels, config.split)
        pool = train[train != row]
        pool_name = "training rows"
    else:
        pool = np.asarray([i for i in range(n) if i != row])
        pool_name = "other rows"
    k = config.k if config.k is not None else 5
    k = min(k, pool.size)
    dist = matrix[row, pool]
    order = np.lexsort((pool, dist))[:k]
    print(f"{k} nearest {pool_name}:")
    for idx in order:
        neighbor = int(pool[idx])
        print(
            f"  row {neighbor}  distance {float(matrix[row, neighbor])!r}  "
            f"label {int(diagram_set.labels[neighbor])}"
        )
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_experiment_config(args.config, _overrides(args))
        if args.command == "classify":
            return _cmd_classify(config)
        if args.command == "diagrams":
            return _cmd_diagrams(config)
        if args.command == "distances":
            return _cmd_distances(config)
        if args.command == "inspect":
            return _cmd_inspect(config, args.row)
        parser.error(f"unknown command {args.command!r}")
    except TopmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
