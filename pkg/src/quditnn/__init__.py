"""Single-qudit neural-network classifier with built-in feature attribution.

Each layer encodes all features and that layer's trainable weights in one
Hermitian operator over the su(d) generator basis and applies its matrix
exponential to the qudit state.  Because every feature owns a fixed generator
direction, the trained weights themselves rank the features; the package
ships the classical baselines and ranking metrics used to evaluate that
claim on the Taiwan credit-default task.
"""

from .baselines import (
    LogRegConfig,
    LogRegModel,
    MlpConfig,
    MlpModel,
    logreg_ranking,
    train_logreg,
    train_mlp,
)
from .data import (
    Dataset,
    PoisonSpec,
    Standardization,
    load_taiwan,
    poison,
    standardize,
    stratified_split,
)
from .errors import (
    DegenerateReadoutError,
    NumericalError,
    ParseError,
    PreconditionError,
    QuditError,
    SchemaError,
    StructuralError,
)
from .experiments import ExperimentConfig, run_experiment
from .generators import AlgebraReport, GeneratorSet, build_generators, check_algebra
from .gradient import GradientRecord, frechet_expm, loss_and_gradient
from .linalg import EigenDecomposition, apply_unitary, eigh, expm_minus_i
from .metrics import (
    RankedFeatureList,
    edit_distance,
    macro_f1,
    random_wis_baseline,
    wis,
)
from .model import (
    ModelParams,
    feature_importance,
    forward,
    forward_batch,
    init_params,
    layer_hamiltonian,
    load_model,
    readout,
    remap,
    sample_shots,
    save_model,
)
from .training import TrainConfig, TrainHistory, TrainResult, train, train_on_dataset

__version__ = "0.1.0"

__all__ = [
    "AlgebraReport",
    "Dataset",
    "DegenerateReadoutError",
    "EigenDecomposition",
    "ExperimentConfig",
    "GeneratorSet",
    "GradientRecord",
    "LogRegConfig",
    "LogRegModel",
    "MlpConfig",
    "MlpModel",
    "ModelParams",
    "NumericalError",
    "ParseError",
    "PoisonSpec",
    "PreconditionError",
    "QuditError",
    "RankedFeatureList",
    "SchemaError",
    "Standardization",
    "StructuralError",
    "TrainConfig",
    "TrainHistory",
    "TrainResult",
    "apply_unitary",
    "build_generators",
    "check_algebra",
    "edit_distance",
    "eigh",
    "expm_minus_i",
    "feature_importance",
    "forward",
    "forward_batch",
    "frechet_expm",
    "init_params",
    "layer_hamiltonian",
    "load_model",
    "load_taiwan",
    "logreg_ranking",
    "loss_and_gradient",
    "macro_f1",
    "poison",
    "random_wis_baseline",
    "readout",
    "remap",
    "run_experiment",
    "sample_shots",
    "save_model",
    "standardize",
    "stratified_split",
    "train",
    "train_logreg",
    "train_mlp",
    "train_on_dataset",
    "wis",
]
