"""Rank-dynamics traces, operator spectra, and the accuracy benchmark grid.

The rank experiment simulates the forward pass of a deep network over a
fresh random graph per repetition and records the numerical rank of every
hidden layer: a 1000-node random graph with edge probability 0.01, a
1000 x 500 standard-normal feature block (row-normalized), 128 output
channels per layer, standard-normal weights, and 3 Krylov blocks per layer
for the truncated architecture. Results are reproducible per seed;
per-repetition traces are kept so the mean/std columns can be recomputed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .container import Dataset, row_normalize
from .errors import ShapeError
from .graph import diffusion, erdos_renyi, make_split
from .linalg import (
    DENSE_EIG_LIMIT,
    SparseMatrix,
    activation,
    lanczos_ritz_values,
    numerical_rank,
    spectrum,
    spmm,
)
from .models import _cat_matmul, _power_blocks  # shared layer math
from .presets import get_preset, hyperparams_from_preset, spec_for_variant
from .training import TrainReport, train

__all__ = [
    "RankTrace",
    "rank_experiment",
    "write_rank_trace_csv",
    "SpectrumResult",
    "spectrum_experiment",
    "write_spectrum_csv",
    "GridCell",
    "benchmark_grid",
    "write_bench_csv",
    "resolve_split",
]

RANK_ARCHS = ("vanilla_gcn", "snowball", "truncated_krylov")


# --------------------------------------------------------------------------
# rank traces
# --------------------------------------------------------------------------


@dataclass
class RankTrace:
    arch: str
    activation: str
    tolerance: float | None
    depth: int
    seeds: list[int]
    per_rep: np.ndarray  # reps x depth
    params: dict = field(default_factory=dict)

    @property
    def mean(self) -> np.ndarray:
        return self.per_rep.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.per_rep.std(axis=0, ddof=1) if self.per_rep.shape[0] > 1 else np.zeros(self.depth)

    def csv_rows(self):
        mean, std = self.mean, self.std
        for layer in range(self.depth):
            yield {
                "arch": self.arch,
                "activation": self.activation,
                "layer": layer + 1,
                "mean": repr(float(mean[layer])),
                "std": repr(float(std[layer])),
                "seed": self.params.get("seed", 0),
            }


def _simulate_hidden_ranks(op: SparseMatrix, x: np.ndarray, weights, arch: str,
                           act: str, blocks: int, tol) -> np.ndarray:
    """Forward-only pass recording the numerical rank of each hidden layer."""
    ranks = np.zeros(len(weights))
    if arch == "snowball":
        hiddens = [x]
        for l, w in enumerate(weights):
            h = activation(spmm(op, _cat_matmul(hiddens, w)), act)
            hiddens.append(h)
            ranks[l] = numerical_rank(h, tol)
        return ranks
    h = x
    for l, w in enumerate(weights):
        if arch == "vanilla_gcn":
            h = activation(spmm(op, h @ w), act)
        else:
            h = activation(_cat_matmul(_power_blocks(op, h, blocks), w), act)
        ranks[l] = numerical_rank(h, tol)
    return ranks


def rank_experiment(arch: str, act: str, depth: int = 100, reps: int = 20,
                    seed: int = 0, n_nodes: int = 1000, edge_p: float = 0.01,
                    n_features: int = 500, width: int = 128, blocks: int = 3,
                    tol: float | None = None, jobs: int = 1) -> RankTrace:
    if arch not in RANK_ARCHS:
        raise ShapeError(f"unknown arch {arch!r}")
    rep_seqs = np.random.SeedSequence(seed).spawn(reps)
    per_rep = np.zeros((reps, depth))
    seeds = []
    rep_args = []
    for seq in rep_seqs:
        graph_seed, data_seed = [int(s.generate_state(1)[0]) for s in seq.spawn(2)]
        seeds.append(graph_seed)
        rep_args.append((graph_seed, data_seed))

    def one_rep(args):
        graph_seed, data_seed = args
        graph = erdos_renyi(n_nodes, edge_p, graph_seed)
        op = diffusion(graph, "renormalized_adjacency").matrix
        rng = np.random.Generator(np.random.PCG64(data_seed))
        x = row_normalize(rng.standard_normal((n_nodes, n_features)))
        weights = []
        for l in range(depth):
            fan_in = n_features if l == 0 else width
            if arch == "snowball":
                fan_in = n_features + width * l
            elif arch == "truncated_krylov":
                fan_in = blocks * (n_features if l == 0 else width)
            weights.append(rng.standard_normal((fan_in, width)))
        return _simulate_hidden_ranks(op, x, weights, arch, act, blocks, tol)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for r, ranks in enumerate(pool.map(one_rep, rep_args)):
                per_rep[r] = ranks
    else:
        for r, args in enumerate(rep_args):
            per_rep[r] = one_rep(args)
    return RankTrace(
        arch=arch,
        activation=act,
        tolerance=tol,
        depth=depth,
        seeds=seeds,
        per_rep=per_rep,
        params={
            "n_nodes": n_nodes,
            "edge_p": edge_p,
            "n_features": n_features,
            "width": width,
            "blocks": blocks,
            "reps": reps,
            "seed": seed,
            "feature_normalization": "unit_row_sum",
        },
    )


def write_rank_trace_csv(traces, path) -> None:
    fields = ["arch", "activation", "layer", "mean", "std", "seed"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for trace in traces:
            for row in trace.csv_rows():
                writer.writerow(row)


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------


@dataclass
class SpectrumResult:
    name: str
    method: str
    eigenvalues: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    seed: int


def spectrum_experiment(dataset: Dataset, bins: int = 100,
                        lanczos_steps: int = 2000, seed: int = 0) -> SpectrumResult:
    """Eigenvalues of the dataset's renormalized adjacency, plus a histogram.

    Small operators (N <= 5000) take the dense path; larger ones are
    summarized by the Ritz values of a fully reorthogonalized Lanczos run,
    which approximate the extremal eigenvalues exactly and sample the
    interior of the spectrum.
    """
    op = dataset.operator
    n = op.rows
    if n <= DENSE_EIG_LIMIT:
        method = "dense_full"
        eigs = spectrum(op, "dense_full")
    else:
        method = "lanczos"
        steps = min(lanczos_steps, n)
        eigs = lanczos_ritz_values(op, k=steps, iters=steps, seed=seed, return_all=True)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.clip(eigs, -1.0, 1.0), bins=edges)
    return SpectrumResult(dataset.name, method, eigs, edges, counts, seed)


def write_spectrum_csv(result: SpectrumResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "method", "seed", "bin_lo", "bin_hi", "count"])
        for i in range(result.counts.size):
            writer.writerow(
                [
                    result.name,
                    result.method,
                    result.seed,
                    repr(float(result.bin_edges[i])),
                    repr(float(result.bin_edges[i + 1])),
                    int(result.counts[i]),
                ]
            )


# --------------------------------------------------------------------------
# benchmark grid
# --------------------------------------------------------------------------


@dataclass
class GridCell:
    dataset: str
    variant: str
    split: str
    validation: bool
    report: TrainReport | None
    status: str  # "ok" or "failed: <reason>"


def resolve_split(dataset: Dataset, split_label: str, validation: bool,
                  seed: int) -> Dataset:
    """Attach the requested split: the stored one for "public", otherwise a
    fresh percentage split sampled with the given seed."""
    if split_label == "public":
        return dataset
    if not split_label.endswith("%"):
        raise ShapeError(f"split label must be 'public' or a percentage, got {split_label!r}")
    p = float(split_label[:-1]) / 100.0
    mode = "percent" if validation else "percent_no_validation"
    return dataset.with_split(make_split(dataset.labels, mode, seed, p=p))


def benchmark_grid(datasets: dict, cells, hp_table: dict | None = None,
                   n_runs: int = 10, seed: int = 0, jobs: int = 1,
                   width_cap: int | None = None,
                   max_episodes: int | None = None,
                   patience: int | None = None) -> list[GridCell]:
    """Run the training protocol for each (dataset, variant, split) cell.

    `datasets` maps dataset name to a loaded Dataset; `cells` is an iterable
    of (dataset_name, variant, split_label, validation) tuples. Rows come
    from `hp_table` keyed by (variant, dataset, split) when given, otherwise
    from the built-in presets. Per-cell failures are recorded, not raised.
    """
    results = []
    for ds_name, variant, split_label, validation in cells:
        try:
            if ds_name not in datasets:
                raise ShapeError(f"dataset {ds_name!r} not loaded")
            if hp_table is not None:
                key = (variant, ds_name.lower(), split_label)
                if key not in hp_table:
                    raise ShapeError(f"no hp_table row for {key}")
                row = hp_table[key]
            else:
                row = get_preset(variant, ds_name, split_label, validation)
            if row.anomalous:
                raise ShapeError("preset flagged anomalous; excluded from runs")
            hp = hyperparams_from_preset(row, seed=seed, width_cap=width_cap)
            overrides = {}
            if max_episodes is not None:
                overrides["max_episodes"] = max_episodes
            if patience is not None:
                overrides["patience"] = patience
            if overrides:
                hp = replace(hp, **overrides)
            ds = resolve_split(datasets[ds_name], split_label, validation, seed)
            spec = spec_for_variant(variant, ds.n_features, ds.n_classes, hp)
            report = train(ds, spec, hp, n_runs=n_runs, jobs=jobs,
                           record_wall_time=False)
            results.append(
                GridCell(ds_name, variant, split_label, validation, report, "ok")
            )
        except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
            results.append(
                GridCell(ds_name, variant, split_label, validation, None,
                         f"failed: {exc}")
            )
    return results


def write_bench_csv(cells: list[GridCell], path) -> None:
    fields = ["dataset", "arch", "split", "validation", "mean", "std", "seeds", "status"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for cell in cells:
            row = {
                "dataset": cell.dataset,
                "arch": cell.variant,
                "split": cell.split,
                "validation": int(cell.validation),
                "mean": "" if cell.report is None else repr(cell.report.mean),
                "std": "" if cell.report is None else repr(cell.report.std),
                "seeds": "" if cell.report is None else ";".join(map(str, cell.report.seeds)),
                "status": cell.status,
            }
            writer.writerow(row)
