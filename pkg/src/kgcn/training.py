"""Loss, optimizers, training loop with early stopping, and evaluation.

One "episode" is one full-batch epoch. Runs with a validation set track the
best validation accuracy (ties broken by lower validation loss), stop after
`patience` episodes without improvement, restore the best checkpoint and
report test accuracy. Runs without validation stop once the training loss
has failed to improve by 1e-4 for `patience` episodes and report test
accuracy at the final parameters.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMask, RangeWarning, ShapeError
from .models import ModelParams, ModelSpec, backward, forward, init_params

__all__ = [
    "Hyperparams",
    "RunResult",
    "TrainReport",
    "masked_cross_entropy",
    "OptimizerState",
    "adam_step",
    "rmsprop_step",
    "train_single",
    "train",
    "evaluate",
]

LR_RANGE = (1e-6, 5e-3)
WD_RANGE = (1e-5, 1e-2)
MIN_LOSS_IMPROVEMENT = 1e-4


@dataclass(frozen=True)
class Hyperparams:
    lr: float
    weight_decay: float
    hidden: int
    layers_or_blocks: int
    dropout: float
    optimizer: str = "adam"
    max_episodes: int = 3000
    patience: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.optimizer not in ("adam", "rmsprop"):
            raise ShapeError(f"unknown optimizer {self.optimizer!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ShapeError(f"dropout must be in [0,1), got {self.dropout}")
        if not LR_RANGE[0] <= self.lr <= LR_RANGE[1]:
            warnings.warn(
                f"lr={self.lr:g} outside the documented search range {LR_RANGE}",
                RangeWarning,
                stacklevel=2,
            )
        if not WD_RANGE[0] <= self.weight_decay <= WD_RANGE[1]:
            warnings.warn(
                f"weight_decay={self.weight_decay:g} outside the documented "
                f"search range {WD_RANGE}",
                RangeWarning,
                stacklevel=2,
            )


@dataclass
class RunResult:
    seed: int
    test_accuracy: float
    episodes: int
    best_episode: int
    diverged: bool = False
    best_val_accuracy: float | None = None


@dataclass
class TrainReport:
    accuracies: list[float]
    mean: float
    std: float
    episodes: list[int]
    best_episodes: list[int]
    seeds: list[int]
    diverged: list[bool]
    wall_time_s: float | None

    @classmethod
    def from_runs(cls, runs: list[RunResult], wall_time_s: float | None):
        accs = [r.test_accuracy for r in runs]
        return cls(
            accuracies=accs,
            mean=float(np.mean(accs)),
            std=float(np.std(accs)),
            episodes=[r.episodes for r in runs],
            best_episodes=[r.best_episode for r in runs],
            seeds=[r.seed for r in runs],
            diverged=[r.diverged for r in runs],
            wall_time_s=wall_time_s,
        )

    def to_dict(self) -> dict:
        return {
            "accuracies": self.accuracies,
            "mean": self.mean,
            "std": self.std,
            "episodes": self.episodes,
            "best_episodes": self.best_episodes,
            "seeds": self.seeds,
            "diverged": self.diverged,
            "wall_time_s": self.wall_time_s,
        }


# --------------------------------------------------------------------------
# loss
# --------------------------------------------------------------------------


def masked_cross_entropy(logits: np.ndarray, labels, mask):
    """Mean negative log-likelihood over the masked nodes.

    Returns (loss, grad_logits); the gradient is zero off-mask. Softmax is
    fused here with a log-sum-exp stabilization, so forwards hand over raw
    logits.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise EmptyMask("loss mask is empty")
    sub = logits[mask]
    y = labels[mask]
    shifted = sub - sub.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    denom = exp.sum(axis=1, keepdims=True)
    log_probs = shifted - np.log(denom)
    loss = -float(log_probs[np.arange(y.size), y].mean())
    grad_sub = exp / denom
    grad_sub[np.arange(y.size), y] -= 1.0
    grad_sub /= y.size
    grad = np.zeros_like(logits)
    grad[mask] = grad_sub
    return loss, grad


# --------------------------------------------------------------------------
# optimizers
# --------------------------------------------------------------------------


@dataclass
class OptimizerState:
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: ModelParams) -> "OptimizerState":
        shapes = [w for _, w in params.entries()]
        return cls(
            step=0,
            m=[np.zeros_like(w) for w in shapes],
            v=[np.zeros_like(w) for w in shapes],
        )


def _decayed(param, grad, weight_decay):
    # coupled L2: the decay term joins the gradient before the moments
    return grad if weight_decay == 0.0 else grad + weight_decay * param


def adam_step(params: ModelParams, grads: ModelParams, state: OptimizerState,
              lr: float, weight_decay: float = 0.0, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> None:
    """In-place Adam update with bias correction."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for i, ((_, w), (_, g)) in enumerate(zip(params.entries(), grads.entries())):
        g = _decayed(w, g, weight_decay)
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * (g * g)
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        w -= lr * m_hat / (np.sqrt(v_hat) + eps)


def rmsprop_step(params: ModelParams, grads: ModelParams, state: OptimizerState,
                 lr: float, weight_decay: float = 0.0, alpha: float = 0.99,
                 eps: float = 1e-8) -> None:
    """In-place RMSprop update (square-average form, no momentum)."""
    state.step += 1
    for i, ((_, w), (_, g)) in enumerate(zip(params.entries(), grads.entries())):
        g = _decayed(w, g, weight_decay)
        state.v[i] = alpha * state.v[i] + (1.0 - alpha) * (g * g)
        w -= lr * g / (np.sqrt(state.v[i]) + eps)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def evaluate_logits(logits: np.ndarray, labels, index_set) -> float:
    idx = np.asarray(index_set, dtype=np.int64)
    if idx.size == 0:
        raise EmptyMask("evaluation index set is empty")
    labels = np.asarray(labels, dtype=np.int64)
    pred = np.argmax(logits[idx], axis=1)  # argmax takes the lowest tied class
    return float(np.mean(pred == labels[idx]))


def evaluate(params: ModelParams, spec: ModelSpec, dataset, index_set) -> float:
    """Accuracy of argmax predictions on the given node index set."""
    logits, _ = forward(dataset.operator, dataset.features, params, spec, rng=None)
    return evaluate_logits(logits, dataset.labels, index_set)


# --------------------------------------------------------------------------
# training loop
# --------------------------------------------------------------------------


def train_single(dataset, spec: ModelSpec, hp: Hyperparams, seed: int) -> RunResult:
    """One full training run with the given seed."""
    return _train_run(dataset, spec, hp, seed)[0]


def train_single_params(dataset, spec: ModelSpec, hp: Hyperparams, seed: int) -> ModelParams:
    """The parameters a single run ends with (best checkpoint when tracked)."""
    return _train_run(dataset, spec, hp, seed)[1]


def _train_run(dataset, spec: ModelSpec, hp: Hyperparams, seed: int):
    split = dataset.split
    if split.train_idx.size == 0:
        raise EmptyMask("training split is empty")
    use_val = split.val_idx.size > 0

    seq = np.random.SeedSequence(seed)
    init_seed, dropout_seed = [int(s.generate_state(1)[0]) for s in seq.spawn(2)]
    params = init_params(spec, scheme="glorot_uniform", seed=init_seed)
    state = OptimizerState.for_params(params)
    step = adam_step if hp.optimizer == "adam" else rmsprop_step
    rng = np.random.Generator(np.random.PCG64(dropout_seed))

    best_params = params.copy()
    best_episode = 0
    best_val_acc = -np.inf
    best_val_loss = np.inf
    best_train_loss = np.inf
    stale = 0
    episode = 0

    for episode in range(1, hp.max_episodes + 1):
        train_rng = rng if spec.dropout > 0.0 else None
        logits, tape = forward(dataset.operator, dataset.features, params, spec, train_rng)
        if not np.all(np.isfinite(logits)):
            return RunResult(seed, 0.0, episode, best_episode, diverged=True), params
        loss, grad_logits = masked_cross_entropy(logits, dataset.labels, split.train_idx)
        if not np.isfinite(loss):
            return RunResult(seed, 0.0, episode, best_episode, diverged=True), params
        grads = backward(tape, params, spec, grad_logits)
        step(params, grads, state, lr=hp.lr, weight_decay=hp.weight_decay)

        if use_val:
            eval_logits, _ = forward(
                dataset.operator, dataset.features, params, spec, rng=None
            )
            val_acc = evaluate_logits(eval_logits, dataset.labels, split.val_idx)
            val_loss, _ = masked_cross_entropy(
                eval_logits, dataset.labels, split.val_idx
            )
            improved = val_acc > best_val_acc or (
                val_acc == best_val_acc and val_loss < best_val_loss
            )
            if improved:
                best_val_acc = val_acc
                best_val_loss = val_loss
                best_params = params.copy()
                best_episode = episode
                stale = 0
            else:
                stale += 1
        else:
            if loss < best_train_loss - MIN_LOSS_IMPROVEMENT:
                best_train_loss = loss
                best_episode = episode
                stale = 0
            else:
                stale += 1
        if stale >= hp.patience:
            break

    final = best_params if use_val else params
    test_acc = evaluate(final, spec, dataset, split.test_idx)
    best_val = float(best_val_acc) if use_val else None
    return RunResult(seed, test_acc, episode, best_episode,
                     best_val_accuracy=best_val), final


def train(dataset, spec: ModelSpec, hp: Hyperparams, n_runs: int = 10,
          jobs: int = 1, record_wall_time: bool = True) -> TrainReport:
    """n_runs independent runs with seeds spawned from hp.seed."""
    seeds = [
        int(s.generate_state(1)[0])
        for s in np.random.SeedSequence(hp.seed).spawn(n_runs)
    ]
    t0 = time.monotonic()
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda s: train_single(dataset, spec, hp, s), seeds))
    else:
        runs = [train_single(dataset, spec, hp, s) for s in seeds]
    wall = time.monotonic() - t0 if record_wall_time else None
    return TrainReport.from_runs(runs, wall)
