"""From-scratch classical reference models.

Logistic regression is the interpretability ground truth: its coefficient
magnitudes define the reference feature ranking that the qudit model's
ranking is compared against.  The small dense network is the accuracy
ceiling; it has no native per-feature attribution and never produces a
ranking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import TAG_TRAIN, TAG_VALIDATION, Dataset
from .errors import NumericalError, PreconditionError, StructuralError
from .metrics import RankedFeatureList, macro_f1
from .training import class_weights

LOGREG_FORMAT_VERSION = 1
MLP_FORMAT_VERSION = 1

ACTIVATIONS = ("relu", "tanh")


# --- logistic regression -----------------------------------------------------


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    max_epochs: int = 5000
    grad_tol: float = 1e-6
    class_weighting: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise PreconditionError("learning_rate must be positive")
        if self.l2 < 0:
            raise PreconditionError("l2 must be non-negative")
        if self.max_epochs < 1:
            raise PreconditionError("max_epochs must be >= 1")


@dataclass(frozen=True)
class LogRegModel:
    coefficients: np.ndarray
    intercept: float
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        coefficients = np.asarray(self.coefficients, dtype=float)
        if coefficients.ndim != 1:
            raise StructuralError("coefficients must be a vector")
        if not (np.all(np.isfinite(coefficients)) and np.isfinite(self.intercept)):
            raise StructuralError("parameters must be finite")
        object.__setattr__(self, "coefficients", coefficients)
        self.coefficients.setflags(write=False)

    @property
    def parameter_count(self) -> int:
        return self.coefficients.size + 1

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coefficients + self.intercept

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        p1 = _sigmoid(self.decision_values(X))
        return np.stack([1.0 - p1, p1], axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_values(X) >= 0.0).astype(int)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_loss_and_grad(
    X: np.ndarray,
    y: np.ndarray,
    coefficients: np.ndarray,
    intercept: float,
    l2: float,
    sample_weights: np.ndarray,
) -> tuple[float, np.ndarray, float]:
    """Weighted logistic loss with ridge on coefficients only.

    Returns (loss, d/dcoefficients, d/dintercept); the loss averages over
    samples, so the ridge term is the only part that scales with l2.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    z = X @ coefficients + intercept
    # log(1 + e^-|z|) + max(z, 0) - z*y is the stable binary CE in logits.
    ce = np.logaddexp(0.0, -np.abs(z)) + np.maximum(z, 0.0) - z * y
    loss = float(np.mean(sample_weights * ce)) + l2 * float(coefficients @ coefficients)
    residual = sample_weights * (_sigmoid(z) - y) / n
    grad_coef = X.T @ residual + 2.0 * l2 * coefficients
    grad_intercept = float(residual.sum())
    return loss, grad_coef, grad_intercept


def train_logreg(
    X: np.ndarray,
    y: np.ndarray,
    config: LogRegConfig = LogRegConfig(),
    feature_names: tuple[str, ...] = (),
) -> LogRegModel:
    """Full-batch gradient descent from zero init until the gradient norm
    drops below ``grad_tol`` or ``max_epochs`` is reached."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise StructuralError(f"feature matrix must be 2-D non-empty, got {X.shape}")
    per_class = class_weights(y) if config.class_weighting else np.ones(2)
    sw = per_class[y]
    coef = np.zeros(X.shape[1])
    intercept = 0.0
    for epoch in range(config.max_epochs):
        loss, g_coef, g_int = logreg_loss_and_grad(
            X, y, coef, intercept, config.l2, sw
        )
        if not np.isfinite(loss):
            raise NumericalError(
                f"logistic regression diverged at epoch {epoch} (loss not finite)"
            )
        if np.sqrt(g_coef @ g_coef + g_int * g_int) < config.grad_tol:
            break
        coef = coef - config.learning_rate * g_coef
        intercept = intercept - config.learning_rate * g_int
    return LogRegModel(
        coefficients=coef, intercept=float(intercept), feature_names=tuple(feature_names)
    )


def train_logreg_on_dataset(ds: Dataset, config: LogRegConfig = LogRegConfig()) -> LogRegModel:
    X, y = ds.subset(TAG_TRAIN)
    return train_logreg(X, y, config, feature_names=ds.feature_names)


def logreg_ranking(model: LogRegModel) -> RankedFeatureList:
    """Features sorted by |coefficient| descending, ties by index."""
    return RankedFeatureList.from_scores(
        np.abs(model.coefficients), names=model.feature_names
    )


def save_logreg(model: LogRegModel, path: str | Path) -> None:
    record = {
        "format_version": LOGREG_FORMAT_VERSION,
        "kind": "logistic-regression",
        "feature_names": list(model.feature_names),
        "coefficients": [repr(float(c)) for c in model.coefficients],
        "intercept": repr(float(model.intercept)),
    }
    Path(path).write_text(json.dumps(record, indent=1))


def load_logreg(path: str | Path) -> LogRegModel:
    record = json.loads(Path(path).read_text())
    if record.get("format_version") != LOGREG_FORMAT_VERSION:
        raise StructuralError(
            f"unsupported model format version {record.get('format_version')!r}"
        )
    if record.get("kind") != "logistic-regression":
        raise StructuralError(f"not a logistic regression record: {record.get('kind')!r}")
    return LogRegModel(
        coefficients=np.array([float(c) for c in record["coefficients"]]),
        intercept=float(record["intercept"]),
        feature_names=tuple(record.get("feature_names", ())),
    )


def write_coefficients_csv(model: LogRegModel, path: str | Path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_id", "feature_name", "coefficient"])
        for j, c in enumerate(model.coefficients):
            name = model.feature_names[j] if model.feature_names else f"f{j}"
            writer.writerow([j, name, repr(float(c))])
        writer.writerow([-1, "intercept", repr(float(model.intercept))])


# --- dense network -----------------------------------------------------------


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (48, 24)
    activation: str = "relu"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 256
    max_epochs: int = 300
    patience: int = 20
    min_delta: float = 1e-4
    class_weighting: bool = True
    init_scale: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        hidden = tuple(int(h) for h in self.hidden)
        if not hidden:
            raise StructuralError("at least one hidden layer is required")
        if any(h < 1 for h in hidden):
            raise StructuralError(f"hidden sizes must be >= 1, got {hidden}")
        if self.activation not in ACTIVATIONS:
            raise StructuralError(f"unknown activation {self.activation!r}")
        if self.learning_rate < 0:
            raise PreconditionError("learning_rate must be non-negative")
        if self.batch_size < 1 or self.max_epochs < 0 or self.patience < 1:
            raise PreconditionError("bad optimizer configuration")
        object.__setattr__(self, "hidden", hidden)


@dataclass(frozen=True)
class MlpModel:
    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: str = "relu"

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 3 or sizes[-1] != 2:
            raise StructuralError(f"layer sizes {sizes} must end in 2 outputs")
        weights = tuple(np.asarray(w, dtype=float) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=float) for b in self.biases)
        if len(weights) != len(sizes) - 1 or len(biases) != len(sizes) - 1:
            raise StructuralError("one weight matrix and bias per layer transition")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise StructuralError(
                    f"transition {i}: weight {w.shape}, bias {b.shape} "
                    f"incompatible with sizes {sizes[i]}->{sizes[i + 1]}"
                )
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def logits(self, X: np.ndarray) -> np.ndarray:
        a = np.asarray(X, dtype=float)
        act = _ACT_FUNCS[self.activation][0]
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = act(a @ w + b)
        return a @ self.weights[-1] + self.biases[-1]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.logits(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z):
    return (z > 0.0).astype(float)


def _tanh_grad(z):
    return 1.0 - np.tanh(z) ** 2


_ACT_FUNCS = {"relu": (_relu, _relu_grad), "tanh": (np.tanh, _tanh_grad)}


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _init_mlp(sizes: tuple[int, ...], config: MlpConfig, rng) -> MlpModel:
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = (
            config.init_scale
            if config.init_scale is not None
            else np.sqrt(6.0 / (fan_in + fan_out))
        )
        weights.append(rng.uniform(-scale, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(
        layer_sizes=sizes,
        weights=tuple(weights),
        biases=tuple(biases),
        activation=config.activation,
    )


def _mlp_grads(
    model: MlpModel, X: np.ndarray, y: np.ndarray, sw: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    act, act_grad = _ACT_FUNCS[model.activation]
    pre: list[np.ndarray] = []
    a = X
    acts = [a]
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        z = a @ w + b
        pre.append(z)
        a = act(z)
        acts.append(a)
    logits = a @ model.weights[-1] + model.biases[-1]
    p = _softmax(logits)
    n = X.shape[0]
    q_true = np.clip(p[np.arange(n), y], 1e-12, None)
    loss = float(np.mean(sw * -np.log(q_true)))

    delta = p
    delta[np.arange(n), y] -= 1.0
    delta *= (sw / n)[:, None]
    grads_w: list[np.ndarray] = [None] * len(model.weights)
    grads_b: list[np.ndarray] = [None] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ model.weights[i].T) * act_grad(pre[i - 1])
    return loss, grads_w, grads_b


def train_mlp(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    config: MlpConfig = MlpConfig(),
) -> MlpModel:
    """Adam-trained weighted-CE classifier with early stopping on validation
    loss; returns the best-validation-epoch parameters."""
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train, dtype=int)
    X_val = np.asarray(X_val, dtype=float)
    y_val = np.asarray(y_val, dtype=int)
    n = X_train.shape[0]
    if n == 0:
        raise StructuralError("empty training set")
    sizes = (X_train.shape[1], *config.hidden, 2)
    rng = np.random.default_rng(config.seed)
    model = _init_mlp(sizes, config, rng)

    per_class = class_weights(y_train) if config.class_weighting else np.ones(2)
    sw_train = per_class[y_train]
    sw_val = per_class[y_val]

    flat = list(model.weights) + list(model.biases)
    m = [np.zeros_like(p) for p in flat]
    v = [np.zeros_like(p) for p in flat]
    step = 0
    best_val = np.inf
    best = model
    stall = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, gw, gb = _mlp_grads(model, X_train[idx], y_train[idx], sw_train[idx])
            if not np.isfinite(loss):
                raise NumericalError(
                    f"network training diverged at epoch {epoch}, batch {start}"
                )
            grads = gw + gb
            step += 1
            params = list(model.weights) + list(model.biases)
            new_params = []
            for k, (p, g) in enumerate(zip(params, grads)):
                m[k] = config.beta1 * m[k] + (1 - config.beta1) * g
                v[k] = config.beta2 * v[k] + (1 - config.beta2) * g**2
                m_hat = m[k] / (1 - config.beta1**step)
                v_hat = v[k] / (1 - config.beta2**step)
                new_params.append(
                    p - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
                )
            half = len(model.weights)
            model = MlpModel(
                layer_sizes=sizes,
                weights=tuple(new_params[:half]),
                biases=tuple(new_params[half:]),
                activation=config.activation,
            )
        p_val = model.predict_proba(X_val)
        q_true = np.clip(p_val[np.arange(len(y_val)), y_val], 1e-12, None)
        val_loss = float(np.mean(sw_val * -np.log(q_true)))
        if epoch == 1 or best_val - val_loss > config.min_delta:
            best_val = val_loss
            best = model
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break
    return best


def train_mlp_on_dataset(ds: Dataset, config: MlpConfig = MlpConfig()) -> MlpModel:
    X_train, y_train = ds.subset(TAG_TRAIN)
    X_val, y_val = ds.subset(TAG_VALIDATION)
    return train_mlp(X_train, y_train, X_val, y_val, config)


def evaluate_macro_f1(predictions: np.ndarray, truth: np.ndarray) -> float:
    return macro_f1(predictions, truth)


def save_mlp(model: MlpModel, path: str | Path) -> None:
    record = {
        "format_version": MLP_FORMAT_VERSION,
        "kind": "dense-network",
        "layer_sizes": list(model.layer_sizes),
        "activation": model.activation,
        "weights": [[[repr(float(x)) for x in row] for row in w] for w in model.weights],
        "biases": [[repr(float(x)) for x in b] for b in model.biases],
    }
    Path(path).write_text(json.dumps(record, indent=1))


def load_mlp(path: str | Path) -> MlpModel:
    record = json.loads(Path(path).read_text())
    if record.get("format_version") != MLP_FORMAT_VERSION:
        raise StructuralError(
            f"unsupported model format version {record.get('format_version')!r}"
        )
    if record.get("kind") != "dense-network":
        raise StructuralError(f"not a dense network record: {record.get('kind')!r}")
    return MlpModel(
        layer_sizes=tuple(record["layer_sizes"]),
        weights=tuple(
            np.array([[float(x) for x in row] for row in w]) for w in record["weights"]
        ),
        biases=tuple(np.array([float(x) for x in b]) for b in record["biases"]),
        activation=record["activation"],
    )
