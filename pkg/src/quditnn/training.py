"""Minibatch Adam training with validation-based early stopping.

The optimizer minimizes the class-weighted cross entropy of the readout
distribution plus a ridge penalty on all layer weights.  Validation loss is
the weighted cross entropy alone (no ridge), and the returned weights are the
ones from the best validation epoch, not the last.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .data import TAG_TRAIN, TAG_VALIDATION, Dataset
from .errors import NumericalError, ParseError, PreconditionError
from .generators import GeneratorSet, build_generators
from .gradient import CE_CLIP, batch_loss, loss_and_gradient, weighted_cross_entropy
from .metrics import macro_f1
from .model import (
    READOUT_PARITY,
    READOUT_SCHEMES,
    ModelParams,
    forward_batch,
    readout,
)


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 5
    layers: int = 16
    readout: str = READOUT_PARITY
    learning_rate: float = 2e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 256
    max_epochs: int = 300
    patience: int = 20
    min_delta: float = 1e-4
    ridge: float = 1e-4
    init_scale: float = 0.03
    class_weighting: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise PreconditionError(f"dim must be >= 2, got {self.dim}")
        if self.layers < 0:
            raise PreconditionError(f"layers must be >= 0, got {self.layers}")
        if self.readout not in READOUT_SCHEMES:
            raise PreconditionError(f"unknown readout scheme {self.readout!r}")
        if self.batch_size < 1:
            raise PreconditionError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 0:
            raise PreconditionError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.patience < 1:
            raise PreconditionError(f"patience must be >= 1, got {self.patience}")
        if not self.learning_rate > 0:
            raise PreconditionError("learning_rate must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise PreconditionError("adam betas must lie in (0, 1)")
        if not self.adam_eps > 0:
            raise PreconditionError("adam_eps must be positive")
        if not self.init_scale > 0:
            raise PreconditionError("init_scale must be positive")
        if self.ridge < 0 or self.min_delta < 0:
            raise PreconditionError("ridge and min_delta must be non-negative")


@dataclass
class AdamState:
    """First/second moment accumulators; step counts completed updates."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @staticmethod
    def zeros(shape: tuple[int, ...]) -> "AdamState":
        return AdamState(m=np.zeros(shape), v=np.zeros(shape))


def adam_step(
    weights: np.ndarray, gradient: np.ndarray, state: AdamState, config: TrainConfig
) -> np.ndarray:
    """One bias-corrected Adam update; mutates ``state``, returns new weights."""
    state.step += 1
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * gradient
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * gradient**2
    m_hat = state.m / (1.0 - config.beta1**state.step)
    v_hat = state.v / (1.0 - config.beta2**state.step)
    return weights - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)


@dataclass(frozen=True)
class TrainHistory:
    """Per-epoch curves; ``best_epoch`` is 1-based, 0 when no epoch ran."""

    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    val_macro_f1: tuple[float, ...]
    best_epoch: int

    def __len__(self) -> int:
        return len(self.train_loss)


@dataclass(frozen=True)
class TrainResult:
    params: ModelParams
    history: TrainHistory


def cross_entropy(
    q: np.ndarray, y: int, weights: tuple[float, float] = (1.0, 1.0)
) -> float:
    """Single-sample weighted cross entropy -u_y * log(max(q_y, 1e-12))."""
    q_y = float(np.asarray(q, dtype=float)[y])
    return -weights[y] * float(np.log(max(q_y, CE_CLIP)))


def total_loss(
    X: np.ndarray,
    labels: np.ndarray,
    params: ModelParams,
    generators: GeneratorSet,
    ridge: float = 0.0,
    per_class: tuple[float, float] = (1.0, 1.0),
) -> float:
    """Mean weighted cross entropy over the batch plus ridge * sum(w^2)."""
    labels = np.asarray(labels, dtype=int)
    sample_weights = np.asarray(per_class, dtype=float)[labels]
    return batch_loss(
        X, labels, params, generators, sample_weights=sample_weights, ridge=ridge
    )


def class_weights(labels: np.ndarray) -> np.ndarray:
    """Inverse-frequency weights u_c = N / (2 N_c) for binary labels."""
    labels = np.asarray(labels, dtype=int)
    counts = np.bincount(labels, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise PreconditionError("class weighting needs both classes in the train split")
    return len(labels) / (2.0 * counts)


def _validation_scores(
    X: np.ndarray, y: np.ndarray, params: ModelParams, generators: GeneratorSet,
    sample_weights: np.ndarray,
) -> tuple[float, float]:
    probs = forward_batch(X, params, generators)
    q = np.atleast_2d(readout(probs, params.readout))
    loss = weighted_cross_entropy(q, y, sample_weights)
    preds = (q[:, 1] >= 0.5).astype(int)
    return loss, macro_f1(preds, y)


def train(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig,
    generators: GeneratorSet | None = None,
    feature_names: tuple[str, ...] = (),
) -> TrainResult:
    """Fit the qudit classifier; fully determined by the data and config seed.

    One RNG stream drives both the weight init and the per-epoch shuffles, so
    a given (data, config) pair always replays the identical trajectory.
    """
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train, dtype=int)
    X_val = np.asarray(X_val, dtype=float)
    y_val = np.asarray(y_val, dtype=int)
    if generators is None:
        generators = build_generators(config.dim)
    n = X_train.shape[0]
    if n == 0:
        raise PreconditionError("empty training set")

    rng = np.random.default_rng(config.seed)
    n_gen = config.dim * config.dim - 1
    params = ModelParams(
        dim=config.dim,
        layers=config.layers,
        n_features=X_train.shape[1],
        weights=rng.uniform(-config.init_scale, config.init_scale, size=(config.layers, n_gen)),
        readout=config.readout,
        feature_names=tuple(feature_names),
    )

    if config.class_weighting:
        per_class = class_weights(y_train)
    else:
        per_class = np.ones(2)
    sw_train = per_class[y_train]
    sw_val = per_class[y_val]

    state = AdamState.zeros(params.weights.shape)
    train_curve: list[float] = []
    val_curve: list[float] = []
    f1_curve: list[float] = []
    best_epoch = 0
    best_val = np.inf
    best_weights = params.weights

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            rec = loss_and_gradient(
                X_train[idx],
                y_train[idx],
                params,
                generators,
                sample_weights=sw_train[idx],
                ridge=config.ridge,
            )
            if not np.isfinite(rec.loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch starting at {start}"
                )
            params = params.with_weights(
                adam_step(params.weights, rec.gradient, state, config)
            )
            epoch_loss += rec.loss * len(idx)
        train_curve.append(epoch_loss / n)

        val_loss, val_f1 = _validation_scores(X_val, y_val, params, generators, sw_val)
        val_curve.append(val_loss)
        f1_curve.append(val_f1)

        if epoch == 1 or best_val - val_loss > config.min_delta:
            best_epoch = epoch
            best_val = val_loss
            best_weights = params.weights
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break

    history = TrainHistory(
        train_loss=tuple(train_curve),
        val_loss=tuple(val_curve),
        val_macro_f1=tuple(f1_curve),
        best_epoch=best_epoch,
    )
    return TrainResult(params=params.with_weights(best_weights), history=history)


def train_on_dataset(
    ds: Dataset, config: TrainConfig, generators: GeneratorSet | None = None
) -> TrainResult:
    """Train on a split, standardized Dataset's train/validation rows."""
    X_train, y_train = ds.subset(TAG_TRAIN)
    X_val, y_val = ds.subset(TAG_VALIDATION)
    return train(
        X_train, y_train, X_val, y_val, config,
        generators=generators, feature_names=ds.feature_names,
    )


# --- config and history file formats ---------------------------------------

_INT_FIELDS = {"dim", "layers", "batch_size", "max_epochs", "patience", "seed"}
_FLOAT_FIELDS = {
    "learning_rate", "beta1", "beta2", "adam_eps", "min_delta", "ridge", "init_scale",
}
_BOOL_FIELDS = {"class_weighting"}
_STR_FIELDS = {"readout"}

_TRUE_WORDS = {"true", "yes", "on", "1"}
_FALSE_WORDS = {"false", "no", "off", "0"}


def parse_config(text: str, base: TrainConfig | None = None) -> TrainConfig:
    """Parse ``key = value`` lines; '#' comments and blanks are skipped.

    Unknown keys are rejected rather than ignored, so a typo cannot silently
    fall back to a default.
    """
    overrides: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in overrides:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_FIELDS:
                overrides[key] = int(value)
            elif key in _FLOAT_FIELDS:
                overrides[key] = float(value)
            elif key in _BOOL_FIELDS:
                lowered = value.lower()
                if lowered in _TRUE_WORDS:
                    overrides[key] = True
                elif lowered in _FALSE_WORDS:
                    overrides[key] = False
                else:
                    raise ValueError(value)
            elif key in _STR_FIELDS:
                overrides[key] = value
            else:
                raise ParseError(f"line {lineno}: unknown config key {key!r}")
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    return replace(base if base is not None else TrainConfig(), **overrides)


def read_config(path: str | Path, base: TrainConfig | None = None) -> TrainConfig:
    return parse_config(Path(path).read_text(), base=base)


def write_config(config: TrainConfig, path: str | Path) -> None:
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_history_csv(history: TrainHistory, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss", "val_macro_f1"])
        for i in range(len(history)):
            writer.writerow(
                [
                    i + 1,
                    repr(float(history.train_loss[i])),
                    repr(float(history.val_loss[i])),
                    repr(float(history.val_macro_f1[i])),
                ]
            )


def read_history_csv(path: str | Path, best_epoch: int = 0) -> TrainHistory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["epoch", "train_loss", "val_loss", "val_macro_f1"]:
        raise ParseError(f"{path}: not a training history file")
    train_loss = tuple(float(r[1]) for r in rows[1:])
    val_loss = tuple(float(r[2]) for r in rows[1:])
    val_f1 = tuple(float(r[3]) for r in rows[1:])
    return TrainHistory(
        train_loss=train_loss, val_loss=val_loss, val_macro_f1=val_f1, best_epoch=best_epoch
    )
