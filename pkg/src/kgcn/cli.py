"""Command-line entry point.

Subcommands: train, rank-exp, spectrum, bench, selftest. Dataset names are
resolved against --dataset-dir or the KGCN_DATA environment variable; a
path to a container directory is also accepted. Under --deterministic the
process pins numeric kernels to one thread and omits wall-clock fields, so
repeated runs with the same config and seed are byte-identical.

Exit codes: 0 ok, 1 bad config, 2 missing dataset, 3 numerical failure,
4 other error. Failures print a machine-readable JSON line on stderr.

Bulk file formats (all little-endian): dataset containers are a directory
of meta.json + edges.bin (u32 pairs) + features.bin (float64 row-major) +
labels.bin (u16); parameter checkpoints are a u64 header length, a JSON
header listing named shapes, then each weight as float64 row-major.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .config import BENCH_SCHEMA, TRAIN_SCHEMA, load_config
from .container import load_container
from .errors import BadConfig, KgcnError, MissingDataset, NumericalError
from .models import extract_features, save_params
from .presets import get_preset, hyperparams_from_preset, spec_for_variant
from .training import Hyperparams, train

__all__ = ["main"]


def _deterministic_context(enabled: bool):
    if not enabled:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:  # pragma: no cover - threadpoolctl ships with scipy stacks
        return contextlib.nullcontext()


def _resolve_dataset(name_or_path: str, dataset_dir: str | None) -> Path:
    p = Path(name_or_path)
    if (p / "meta.json").is_file():
        return p
    root = dataset_dir or os.environ.get("KGCN_DATA")
    if root:
        q = Path(root) / name_or_path
        if (q / "meta.json").is_file():
            return q
    raise MissingDataset(
        f"no dataset container for {name_or_path!r}; searched the path itself"
        + (f" and {root}" if root else " (set KGCN_DATA or --dataset-dir)")
    )


def _append_summary_csv(path: Path, dataset: str, arch: str, split: str, report):
    fields = ["dataset", "arch", "split", "mean", "std", "seeds"]
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        if new:
            writer.writeheader()
        writer.writerow(
            {
                "dataset": dataset,
                "arch": arch,
                "split": split,
                "mean": repr(report.mean),
                "std": repr(report.std),
                "seeds": ";".join(map(str, report.seeds)),
            }
        )


def _write_embeddings_csv(path: Path, features: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"dim_{i}" for i in range(features.shape[1])])
        for i, row in enumerate(features):
            writer.writerow([i] + [repr(float(v)) for v in row])


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_train(args) -> int:
    cfg = load_config(args.config, TRAIN_SCHEMA)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    deterministic = args.deterministic or cfg.get("deterministic", False)
    out_dir = Path(args.out or cfg.get("out", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    validation = cfg.get("validation", cfg["split"] == "public")
    width_cap = cfg.get("width_cap")

    ds_path = _resolve_dataset(cfg["dataset"], args.dataset_dir)
    dataset = load_container(ds_path)
    if cfg.get("preset", False):
        row = get_preset(cfg["variant"], dataset.name, cfg["split"], validation)
        if row.anomalous:
            raise BadConfig("preset row is flagged anomalous; supply hyperparams explicitly")
        hp = hyperparams_from_preset(row, seed=seed, width_cap=width_cap)
    else:
        h = dict(cfg["hyperparams"])
        hidden = h.pop("hidden")
        if width_cap is not None:
            hidden = min(hidden, width_cap)
        hp = Hyperparams(hidden=hidden, seed=seed, **h)
    dataset = experiments.resolve_split(dataset, cfg["split"], validation, seed)
    spec = spec_for_variant(cfg["variant"], dataset.n_features, dataset.n_classes, hp)

    with _deterministic_context(deterministic):
        report = train(
            dataset, spec, hp,
            n_runs=cfg.get("n_runs", 10),
            jobs=args.jobs,
            record_wall_time=not deterministic,
        )

    payload = {
        "dataset": dataset.name,
        "arch": cfg["variant"],
        "split": cfg["split"],
        "validation": validation,
        "seed": seed,
        "deterministic": deterministic,
        "report": report.to_dict(),
    }
    (out_dir / "report.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _append_summary_csv(out_dir / "summary.csv", dataset.name, cfg["variant"],
                        cfg["split"], report)

    if args.dump_embeddings or cfg.get("dump_embeddings", False):
        from .training import train_single_params

        # rerun the first seed to materialize its trained model
        with _deterministic_context(deterministic):
            params = train_single_params(dataset, spec, hp, report.seeds[0])
            feats = extract_features(dataset.operator, dataset.features, params, spec)
        _write_embeddings_csv(out_dir / "embeddings.csv", feats)
        save_params(out_dir / "params.ckpt", params)
    print(f"mean accuracy {report.mean:.4f} +- {report.std:.4f} over "
          f"{len(report.accuracies)} runs -> {out_dir / 'report.json'}")
    return 0


def cmd_rank_exp(args) -> int:
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    with _deterministic_context(args.deterministic):
        trace = experiments.rank_experiment(
            args.arch, args.activation,
            depth=args.depth, reps=args.reps, seed=args.seed or 0,
            n_nodes=args.nodes, edge_p=args.edge_p,
            n_features=args.features, width=args.width, blocks=args.blocks,
            jobs=args.jobs,
        )
    experiments.write_rank_trace_csv([trace], out_dir / "rank_trace.csv")
    print(f"layer-{args.depth} mean rank {trace.mean[-1]:.2f} -> "
          f"{out_dir / 'rank_trace.csv'}")
    return 0


def cmd_spectrum(args) -> int:
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    ds_path = _resolve_dataset(args.dataset, args.dataset_dir)
    dataset = load_container(ds_path)
    with _deterministic_context(args.deterministic):
        result = experiments.spectrum_experiment(
            dataset, bins=args.bins, lanczos_steps=args.lanczos_steps,
            seed=args.seed or 0,
        )
    experiments.write_spectrum_csv(result, out_dir / "spectrum.csv")
    print(f"{result.method}: {result.eigenvalues.size} eigenvalues in "
          f"[{result.eigenvalues.min():.6f}, {result.eigenvalues.max():.6f}] -> "
          f"{out_dir / 'spectrum.csv'}")
    return 0


def cmd_bench(args) -> int:
    cfg = load_config(args.config, BENCH_SCHEMA)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    deterministic = args.deterministic or cfg.get("deterministic", False)
    out_dir = Path(args.out or cfg.get("out", "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    datasets = {}
    cells = []
    for cell in cfg["cells"]:
        name = cell["dataset"]
        if name not in datasets:
            datasets[name] = load_container(_resolve_dataset(name, args.dataset_dir))
        cells.append(
            (name, cell["variant"], cell["split"],
             cell.get("validation", cell["split"] == "public"))
        )
    with _deterministic_context(deterministic):
        results = experiments.benchmark_grid(
            datasets, cells, n_runs=cfg.get("n_runs", 10), seed=seed,
            jobs=args.jobs, width_cap=cfg.get("width_cap"),
        )
    experiments.write_bench_csv(results, out_dir / "bench.csv")
    failed = [c for c in results if c.status != "ok"]
    print(f"{len(results) - len(failed)}/{len(results)} cells ok -> "
          f"{out_dir / 'bench.csv'}")
    return 0 if not failed else 3


def cmd_selftest(args) -> int:
    from .selftest import run_all

    ok = True
    for name, passed, detail in run_all(fast=not args.full):
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        ok &= passed
    return 0 if ok else 3


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_common(p, dataset_dir=False):
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded kernels, byte-stable outputs")
    if dataset_dir:
        p.add_argument("--dataset-dir", help="dataset root (default: $KGCN_DATA)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgcn", description="block-Krylov graph convolution toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p.add_argument("--dump-embeddings", action="store_true",
                   help="write final-layer features as CSV")
    _add_common(p, dataset_dir=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank-exp", help="per-layer numerical rank trace")
    p.add_argument("arch", choices=list(experiments.RANK_ARCHS))
    p.add_argument("activation", choices=["relu", "tanh", "identity"])
    p.add_argument("--jobs", type=int, default=1, help="parallel repetitions")
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--edge-p", type=float, default=0.01)
    p.add_argument("--features", type=int, default=500)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--blocks", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_rank_exp)

    p = sub.add_parser("spectrum", help="eigenvalues of the renormalized adjacency")
    p.add_argument("--dataset", required=True, help="container name or path")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--lanczos-steps", type=int, default=2000)
    _add_common(p, dataset_dir=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bench", help="accuracy grid over preset cells")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p, dataset_dir=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--full", action="store_true", help="full-size check suite")
    p.set_defaults(func=cmd_selftest)
    return parser


_EXIT_CODES = {BadConfig: 1, MissingDataset: 2, NumericalError: 3}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KgcnError as exc:
        code = next(
            (c for t, c in _EXIT_CODES.items() if isinstance(exc, t)), 4
        )
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return code


if __name__ == "__main__":
    sys.exit(main())
