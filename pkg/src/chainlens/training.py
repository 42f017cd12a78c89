"""Training loop: margin ranking loss, Adam, early stopping, grid search.

One uniform protocol for all five model families: shuffled mini-batches,
one (configurable) negative per positive, Adam with bias correction, and
early stopping on filtered validation hits@10 evaluated every ``eval_every``
epochs.  Training stops once hits@10 fails to strictly improve on
``patience`` consecutive evaluations; the parameters returned are the
checkpoint from the best evaluation, not the last.

Everything is seeded and deterministic: the same config yields the same
trajectory bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import ConfigError, parse_kv_file
from .evaluation import build_filter_index, evaluate
from .models import (
    ModelKind,
    ModelParams,
    apply_constraints,
    batch_loss_and_gradients,
    corrupt_batch,
    init_params,
)

logger = logging.getLogger(__name__)

# Hyperparameter grids for grid_search (6 x 3 = 18 runs).
GRID_DIMS = (16, 32, 64, 256, 512, 1024)
GRID_LEARNING_RATES = (0.0001, 0.001, 0.01)


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 64
    learning_rate: float = 0.001
    margin: float = 1.0
    negatives_per_positive: int = 1
    max_epochs: int = 1000
    eval_every: int = 10
    patience: int = 3
    batch_size: int = 512
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ConfigError("dim must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.margin < 0:
            raise ConfigError("margin must be non-negative")
        if self.negatives_per_positive < 1:
            raise ConfigError("negatives_per_positive must be at least 1")
        if self.max_epochs < 0:
            raise ConfigError("max_epochs must be non-negative")
        if self.eval_every <= 0 or self.patience <= 0 or self.batch_size <= 0:
            raise ConfigError("eval_every, patience, and batch_size must be positive")

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        kv = parse_kv_file(path)
        kwargs: dict = {}
        int_keys = {
            "dim", "negatives_per_positive", "max_epochs", "eval_every",
            "patience", "batch_size", "seed",
        }
        float_keys = {"learning_rate", "margin", "adam_beta1", "adam_beta2", "adam_epsilon"}
        for key, value in kv.items():
            try:
                if key in int_keys:
                    kwargs[key] = int(value)
                elif key in float_keys:
                    kwargs[key] = float(value)
                else:
                    raise ConfigError(f"{path}: unknown training config key {key!r}")
            except ValueError:
                raise ConfigError(f"{path}: bad value for {key!r}: {value!r}") from None
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

def _float_view(arr: np.ndarray) -> np.ndarray:
    # complex blocks update as interleaved (re, im) float pairs
    return arr.view(np.float64) if np.iscomplexobj(arr) else arr


@dataclass
class AdamState:
    step: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        m = {k: np.zeros_like(_float_view(a)) for k, a in params.blocks.items()}
        v = {k: np.zeros_like(_float_view(a)) for k, a in params.blocks.items()}
        return cls(step=0, m=m, v=v)


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    config: TrainConfig,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update, in place, plus constraint projection."""
    state.step += 1
    t = state.step
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_epsilon
    lr = config.learning_rate
    for name, p in params.blocks.items():
        g = _float_view(grads[name])
        pv = _float_view(p)
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        pv -= lr * m_hat / (np.sqrt(v_hat) + eps)
    apply_constraints(params)
    return params, state


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass
class TrainRecord:
    epoch: int
    hits10: float
    mrr: float
    mean_loss: float


@dataclass
class TrainHistory:
    records: list[TrainRecord] = field(default_factory=list)
    stopped_early: bool = False
    best_epoch: int = 0

    def to_csv(self, path: str | Path) -> None:
        lines = ["epoch,hits@10,mrr,loss"]
        for r in self.records:
            lines.append(f"{r.epoch},{r.hits10:.6f},{r.mrr:.6f},{r.mean_loss:.6f}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


EvalFn = Callable[[ModelParams, int], tuple[float, float]]


def train(
    kind: ModelKind,
    train_triples: np.ndarray,
    valid_triples: np.ndarray,
    num_entities: int,
    num_relations: int,
    config: TrainConfig,
    eval_fn: EvalFn | None = None,
) -> tuple[ModelParams, TrainHistory]:
    """Train one model; returns the best-evaluation checkpoint and history.

    ``eval_fn(params, epoch) -> (hits@10, mrr)`` defaults to filtered
    evaluation of the validation triples with train + validation as the
    filter set.  If no evaluation ever runs (max_epochs < eval_every) the
    final parameters are returned.
    """
    train_triples = np.asarray(train_triples, dtype=np.int64)
    valid_triples = np.asarray(valid_triples, dtype=np.int64)
    if train_triples.ndim != 2 or train_triples.shape[1] != 3:
        raise ConfigError("train_triples must be an (M, 3) id array")

    evaluations_enabled = True
    if eval_fn is None:
        if len(valid_triples) == 0:
            evaluations_enabled = False  # plain training run, no early stopping
        else:
            filter_index = build_filter_index([train_triples, valid_triples])

            def eval_fn(params: ModelParams, epoch: int) -> tuple[float, float]:
                report = evaluate(params, valid_triples, filter_index, setting="filtered")
                return report.hits[10], report.mrr

    params = init_params(kind, num_entities, num_relations, config)
    state = AdamState.for_params(params)
    rng = np.random.default_rng([config.seed, 0x5EED])

    history = TrainHistory()
    best_params = params.copy()
    best_epoch = 0
    best_hits = -np.inf
    bad_evals = 0
    mean_loss = 0.0
    k_neg = config.negatives_per_positive

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_triples))
        losses_sum = 0.0
        n_pairs = 0
        for start in range(0, len(order), config.batch_size):
            batch = train_triples[order[start : start + config.batch_size]]
            pos = np.repeat(batch, k_neg, axis=0) if k_neg > 1 else batch
            neg = corrupt_batch(pos, num_entities, rng)
            losses, grads = batch_loss_and_gradients(params, pos, neg, config.margin)
            adam_step(params, grads, state, config)
            losses_sum += float(losses.sum())
            n_pairs += len(losses)
        mean_loss = losses_sum / max(n_pairs, 1)

        if evaluations_enabled and epoch % config.eval_every == 0:
            hits10, mrr = eval_fn(params, epoch)
            history.records.append(TrainRecord(epoch=epoch, hits10=hits10, mrr=mrr, mean_loss=mean_loss))
            logger.info(
                "%s epoch %d: loss %.4f, val hits@10 %.4f, val mrr %.4f",
                kind.value, epoch, mean_loss, hits10, mrr,
            )
            if hits10 > best_hits:
                best_hits = hits10
                best_params = params.copy()
                best_epoch = epoch
                bad_evals = 0
            else:
                bad_evals += 1
                if bad_evals >= config.patience:
                    history.stopped_early = True
                    break

    if not history.records:
        best_params = params
        best_epoch = config.max_epochs
    history.best_epoch = best_epoch
    return best_params, history


@dataclass
class GridResult:
    best_config: TrainConfig
    best_params: ModelParams
    best_history: TrainHistory
    best_mrr: float
    runs: list[tuple[int, float, float]]  # (dim, learning_rate, validation mrr)


def grid_search(
    kind: ModelKind,
    train_triples: np.ndarray,
    valid_triples: np.ndarray,
    num_entities: int,
    num_relations: int,
    base_config: TrainConfig,
    dims: tuple[int, ...] = GRID_DIMS,
    learning_rates: tuple[float, ...] = GRID_LEARNING_RATES,
    configs: list[TrainConfig] | None = None,
) -> GridResult:
    """Train one model per grid point and keep the best by validation MRR.

    The default grid is the cross product of ``dims`` and
    ``learning_rates`` over ``base_config``; pass ``configs`` to enumerate
    explicit configurations instead.  Ties break toward the smaller dim,
    then the smaller learning rate.
    """
    if configs is None:
        if not dims or not learning_rates:
            raise ConfigError("grid_search needs non-empty dims and learning_rates")
        configs = [
            replace(base_config, dim=dim, learning_rate=lr)
            for dim in dims
            for lr in learning_rates
        ]
    if not configs:
        raise ConfigError("grid_search needs at least one configuration")
    valid_triples = np.asarray(valid_triples, dtype=np.int64)
    filter_index = build_filter_index([train_triples, valid_triples])
    best: tuple[float, int, float] | None = None  # (-mrr, dim, lr) for min()
    result: GridResult | None = None
    runs: list[tuple[int, float, float]] = []
    for config in configs:
        params, history = train(
            kind, train_triples, valid_triples, num_entities, num_relations, config
        )
        report = evaluate(params, valid_triples, filter_index, setting="filtered")
        runs.append((config.dim, config.learning_rate, report.mrr))
        logger.info(
            "grid %s dim=%d lr=%g: val mrr %.4f",
            kind.value, config.dim, config.learning_rate, report.mrr,
        )
        key = (-report.mrr, config.dim, config.learning_rate)
        if best is None or key < best:
            best = key
            result = GridResult(
                best_config=config,
                best_params=params,
                best_history=history,
                best_mrr=report.mrr,
                runs=runs,
            )
    assert result is not None
    result.runs = runs
    return result
