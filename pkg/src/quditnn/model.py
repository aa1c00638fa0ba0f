"""Forward model of the single-qudit classifier.

Each layer co-encodes the input features and that layer's trainable weights in
one Hermitian operator

    H = sum_j 2*arctan(2 * x_j * w_j) * G_j

over the su(d) generator basis, and evolves the state by exp(-i H).  Layers are
applied in order (layer 1 first) to the ground state |0>, the final state is
measured in the computational basis, and the d outcome probabilities are folded
into a binary class distribution by the readout scheme.

Feature j drives generator j (dataset column order matches the generator
enumeration order).  When there are fewer features than generators, the
remaining slots are driven by a constant bias input of 1.0, each with its own
trainable weight per layer; bias slots are excluded from feature importance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateReadoutError, StructuralError
from .generators import GeneratorSet, build_generators
from .linalg import basis_state
from .metrics import RankedFeatureList

READOUT_PARITY = "parity"
READOUT_FIRST_TWO = "first-two"
READOUT_SCHEMES = (READOUT_PARITY, READOUT_FIRST_TWO)

IMPORTANCE_SUM = "sum"
IMPORTANCE_MEAN_ABS = "mean-abs"
IMPORTANCE_MODES = (IMPORTANCE_SUM, IMPORTANCE_MEAN_ABS)

MODEL_FORMAT_VERSION = 1
FIRST_TWO_FLOOR = 1e-9


def remap(z):
    """Bounded nonlinearity applied to feature-weight products: 2*arctan(2z).

    Odd, strictly increasing, and confined to (-pi, pi), so no single generator
    coefficient can wind a rotation past a half turn.
    """
    return 2.0 * np.arctan(2.0 * np.asarray(z, dtype=float))


def remap_grad(z):
    """Derivative of the remap: 4 / (1 + 4 z^2)."""
    z = np.asarray(z, dtype=float)
    return 4.0 / (1.0 + 4.0 * z * z)


@dataclass(frozen=True)
class ModelParams:
    """Architecture plus the trainable weight matrix.

    ``weights`` has shape (layers, n_generators); row l holds layer l's
    coefficients in generator enumeration order.  ``n_features`` of those
    columns are driven by data, the rest by the constant bias input.
    """

    dim: int
    layers: int
    n_features: int
    weights: np.ndarray
    readout: str = READOUT_PARITY
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        n_gen = self.dim * self.dim - 1
        if self.dim < 2:
            raise StructuralError(f"qudit dimension must be >= 2, got {self.dim}")
        if self.layers < 0:
            raise StructuralError(f"layer count must be >= 0, got {self.layers}")
        if not 1 <= self.n_features <= n_gen:
            raise StructuralError(
                f"{self.n_features} features do not fit {n_gen} generators (d={self.dim})"
            )
        if self.readout not in READOUT_SCHEMES:
            raise StructuralError(f"unknown readout scheme {self.readout!r}")
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (self.layers, n_gen):
            raise StructuralError(
                f"weights shape {weights.shape} != (layers={self.layers}, {n_gen})"
            )
        if weights.size and not np.all(np.isfinite(weights)):
            raise StructuralError("weights must be finite")
        object.__setattr__(self, "weights", weights)
        self.weights.setflags(write=False)

    @property
    def n_generators(self) -> int:
        return self.dim * self.dim - 1

    @property
    def parameter_count(self) -> int:
        return self.layers * self.n_generators

    @property
    def bias_slots(self) -> tuple[int, ...]:
        return tuple(range(self.n_features, self.n_generators))

    @property
    def assignment(self) -> dict[int, int]:
        """Feature index -> generator index (identity map, bias slots after)."""
        return {j: j for j in range(self.n_features)}

    def with_weights(self, weights: np.ndarray) -> "ModelParams":
        return replace(self, weights=np.array(weights, dtype=float))


def init_params(
    dim: int,
    layers: int,
    n_features: int,
    seed: int = 0,
    scale: float = 0.03,
    readout: str = READOUT_PARITY,
    feature_names: tuple[str, ...] = (),
) -> ModelParams:
    """Seeded uniform(-scale, scale) weight initialization."""
    rng = np.random.default_rng(seed)
    n_gen = dim * dim - 1
    weights = rng.uniform(-scale, scale, size=(layers, n_gen))
    return ModelParams(
        dim=dim,
        layers=layers,
        n_features=n_features,
        weights=weights,
        readout=readout,
        feature_names=tuple(feature_names),
    )


def pad_features(x: np.ndarray, n_generators: int, n_features: int) -> np.ndarray:
    """Append constant 1.0 bias inputs so every generator slot is driven."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] == n_generators:
        return x
    if x.shape[-1] != n_features:
        raise StructuralError(
            f"feature vector has length {x.shape[-1]}, expected {n_features}"
            f" (or {n_generators} when already padded)"
        )
    pad = np.ones((*x.shape[:-1], n_generators - n_features))
    return np.concatenate([x, pad], axis=-1)


def layer_hamiltonian(
    x: np.ndarray,
    layer_weights: np.ndarray,
    generators: GeneratorSet,
    n_features: int | None = None,
) -> np.ndarray:
    """Assemble one layer's Hermitian operator sum_j remap(x_j w_j) G_j."""
    layer_weights = np.asarray(layer_weights, dtype=float)
    n_gen = len(generators)
    if layer_weights.shape != (n_gen,):
        raise StructuralError(
            f"weight row has shape {layer_weights.shape}, expected ({n_gen},)"
        )
    padded = pad_features(x, n_gen, n_features if n_features is not None else n_gen)
    angles = remap(padded * layer_weights)
    H = np.einsum("...j,jab->...ab", angles, generators.matrices)
    return H[0] if np.asarray(x).ndim == 1 else H


@dataclass(frozen=True)
class ForwardCache:
    """Everything the backward pass reuses from one batch's forward sweep.

    Arrays are stacked over layers and batch: ``states[l]`` is the state
    entering layer l+1, ``eigenvalues``/``eigenvectors`` the per-layer
    Hamiltonian eigensystems, ``unitaries`` the assembled layer unitaries, and
    ``products`` the raw feature-weight products x_j * w_j per layer.
    """

    padded_features: np.ndarray
    products: np.ndarray
    states: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    unitaries: np.ndarray
    probabilities: np.ndarray


def forward_batch(
    X: np.ndarray,
    params: ModelParams,
    generators: GeneratorSet,
    keep_cache: bool = False,
) -> np.ndarray | ForwardCache:
    """Vectorized forward pass over a batch of samples.

    Returns the (batch, d) probability matrix, or the full ``ForwardCache``
    when ``keep_cache`` is set (used by the gradient sweep).
    """
    if generators.dim != params.dim:
        raise StructuralError(
            f"generator set dimension {generators.dim} != model dimension {params.dim}"
        )
    X = np.atleast_2d(np.asarray(X, dtype=float))
    batch = X.shape[0]
    d = params.dim
    L = params.layers
    padded = pad_features(X, params.n_generators, params.n_features)

    psi = np.broadcast_to(basis_state(d), (batch, d)).copy()
    states = np.empty((L + 1, batch, d), dtype=np.complex128) if keep_cache else None
    eigenvalues = np.empty((L, batch, d)) if keep_cache else None
    eigenvectors = np.empty((L, batch, d, d), dtype=np.complex128) if keep_cache else None
    unitaries = np.empty((L, batch, d, d), dtype=np.complex128) if keep_cache else None
    products = padded[None, :, :] * params.weights[:, None, :]
    if keep_cache:
        states[0] = psi

    for l in range(L):
        angles = remap(products[l])
        H = np.einsum("bj,jrs->brs", angles, generators.matrices)
        lam, V = np.linalg.eigh(H)
        phases = np.exp(-1j * lam)
        U = (V * phases[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))
        psi = np.einsum("brs,bs->br", U, psi)
        if keep_cache:
            eigenvalues[l] = lam
            eigenvectors[l] = V
            unitaries[l] = U
            states[l + 1] = psi

    probs = np.abs(psi) ** 2
    if not keep_cache:
        return probs
    return ForwardCache(
        padded_features=padded,
        products=products,
        states=states,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        unitaries=unitaries,
        probabilities=probs,
    )


def forward(x: np.ndarray, params: ModelParams, generators: GeneratorSet) -> np.ndarray:
    """Probability vector over the d basis outcomes for one sample."""
    return forward_batch(x, params, generators)[0]


def readout(probabilities: np.ndarray, scheme: str = READOUT_PARITY) -> np.ndarray:
    """Fold d outcome probabilities into a binary class distribution.

    ``parity`` sums odd basis states into class 1 and sets q0 = 1 - q1;
    ``first-two`` renormalizes p_0, p_1 and fails when their mass vanishes.
    """
    probs = np.atleast_2d(np.asarray(probabilities, dtype=float))
    single = np.asarray(probabilities).ndim == 1
    if scheme == READOUT_PARITY:
        q1 = probs[:, 1::2].sum(axis=1)
        out = np.stack([1.0 - q1, q1], axis=1)
    elif scheme == READOUT_FIRST_TWO:
        mass = probs[:, 0] + probs[:, 1]
        if np.any(mass < FIRST_TWO_FLOOR):
            raise DegenerateReadoutError(
                "first-two readout is degenerate: p0 + p1 below 1e-9"
            )
        out = probs[:, :2] / mass[:, None]
    else:
        raise StructuralError(f"unknown readout scheme {scheme!r}")
    return out[0] if single else out


def readout_jacobian(probabilities: np.ndarray, scheme: str) -> np.ndarray:
    """d(q_c)/d(p_k) for each sample; shape (batch, 2, d)."""
    probs = np.atleast_2d(np.asarray(probabilities, dtype=float))
    batch, d = probs.shape
    jac = np.zeros((batch, 2, d))
    if scheme == READOUT_PARITY:
        jac[:, 0, 1::2] = -1.0
        jac[:, 1, 1::2] = 1.0
    elif scheme == READOUT_FIRST_TWO:
        mass = probs[:, 0] + probs[:, 1]
        jac[:, 0, 0] = probs[:, 1] / mass**2
        jac[:, 0, 1] = -probs[:, 0] / mass**2
        jac[:, 1, 0] = -probs[:, 1] / mass**2
        jac[:, 1, 1] = probs[:, 0] / mass**2
    else:
        raise StructuralError(f"unknown readout scheme {scheme!r}")
    return jac


def sample_shots(
    probabilities: np.ndarray, shots: int, seed: int | np.random.Generator = 0
) -> np.ndarray:
    """Empirical outcome frequencies from a finite number of measurements."""
    if shots < 1:
        raise StructuralError(f"shot count must be >= 1, got {shots}")
    probs = np.asarray(probabilities, dtype=float)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / probs.sum())
    return counts / shots


def feature_importance(params: ModelParams, mode: str = IMPORTANCE_SUM) -> RankedFeatureList:
    """Rank data-driven features by their accumulated weights across layers.

    ``sum`` scores feature j as |sum_l w_j^(l)| (cross-layer cancellation is
    real cancellation to first order in the layer composition); ``mean-abs``
    scores it as the mean absolute weight.  Bias slots are excluded.
    """
    if mode not in IMPORTANCE_MODES:
        raise StructuralError(f"unknown importance mode {mode!r}")
    data_cols = params.weights[:, : params.n_features]
    if mode == IMPORTANCE_SUM:
        scores = np.abs(data_cols.sum(axis=0))
    else:
        scores = np.abs(data_cols).mean(axis=0)
    return RankedFeatureList.from_scores(scores, names=params.feature_names)


def save_model(params: ModelParams, path: str | Path, extra: dict | None = None) -> None:
    """Write the versioned model record; floats round-trip bit-exactly.

    ``extra`` holds caller metadata (e.g. the training seed); its keys may not
    shadow the record's own and are ignored by the loader.
    """
    record = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "qudit-classifier",
        "dim": params.dim,
        "layers": params.layers,
        "n_features": params.n_features,
        "readout": params.readout,
        "assignment": {str(j): j for j in range(params.n_features)},
        "bias_slots": list(params.bias_slots),
        "feature_names": list(params.feature_names),
        "weights": [[repr(float(w)) for w in row] for row in params.weights],
    }
    for key, value in (extra or {}).items():
        if key in record:
            raise StructuralError(f"extra key {key!r} shadows a model record field")
        record[key] = value
    Path(path).write_text(json.dumps(record, indent=1))


def load_model(path: str | Path) -> ModelParams:
    record = json.loads(Path(path).read_text())
    if record.get("format_version") != MODEL_FORMAT_VERSION:
        raise StructuralError(
            f"unsupported model format version {record.get('format_version')!r}"
        )
    if record.get("kind") != "qudit-classifier":
        raise StructuralError(f"not a qudit classifier record: {record.get('kind')!r}")
    weights = np.array([[float(w) for w in row] for row in record["weights"]], dtype=float)
    weights = weights.reshape(record["layers"], record["dim"] ** 2 - 1)
    return ModelParams(
        dim=record["dim"],
        layers=record["layers"],
        n_features=record["n_features"],
        weights=weights,
        readout=record["readout"],
        feature_names=tuple(record.get("feature_names", ())),
    )


def predict_classes(
    X: np.ndarray, params: ModelParams, generators: GeneratorSet
) -> np.ndarray:
    """Hard 0/1 predictions: class 1 when q1 >= 0.5."""
    probs = forward_batch(X, params, generators)
    q = readout(probs, params.readout)
    return (np.atleast_2d(q)[:, 1] >= 0.5).astype(int)


def class_distribution(
    X: np.ndarray, params: ModelParams, generators: GeneratorSet
) -> np.ndarray:
    probs = forward_batch(X, params, generators)
    return readout(probs, params.readout)


def default_generators(params: ModelParams) -> GeneratorSet:
    return build_generators(params.dim)
