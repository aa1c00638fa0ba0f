"""Multi-seed experiment protocol and report assembly.

One seed's protocol: stratified split -> standardize -> optional poisoning ->
train the requested model -> test-split macro-F1 -> feature rankings and
ranking metrics.  Reports are JSON dictionaries with a fixed key order and no
timestamps, so identical configs produce byte-identical files.

The qudit model's runs also train a logistic-regression companion on the
identical processed split; its coefficient ranking is the reference for the
edit-distance column and, under poisoning, for the companion WIS column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import (
    LogRegConfig,
    MlpConfig,
    load_logreg,
    load_mlp,
    logreg_ranking,
    save_logreg,
    save_mlp,
    train_logreg,
    train_mlp,
    write_coefficients_csv,
)
from .data import (
    POISON_MODES,
    POISON_TRAIN_AND_TEST,
    TAG_TEST,
    TAG_TRAIN,
    TAG_VALIDATION,
    Dataset,
    PoisonSpec,
    fingerprint,
    load_taiwan,
    poison,
    standardize,
    stratified_split,
)
from .errors import ParseError, PreconditionError, StructuralError
from .generators import build_generators
from .metrics import (
    edit_distance,
    macro_f1,
    random_wis_baseline,
    wis,
    write_ranking_csv,
)
from .model import (
    IMPORTANCE_MODES,
    IMPORTANCE_SUM,
    class_distribution,
    feature_importance,
    load_model,
    save_model,
)
from .training import (
    TrainConfig,
    parse_config,
    train_on_dataset,
    write_history_csv,
)

REPORT_FORMAT_VERSION = 1
MODEL_KINDS = ("qnn", "logreg", "mlp")

POISON_INDEX_STREAM = 104729
POISON_NOISE_STREAM = 7919
RANDOM_WIS_TRIALS = 100_000
RANDOM_WIS_SEED = 0

# Published benchmark values for this protocol, kept for side-by-side report
# rows.  The random-forest row has no implementation in this package; it is
# reference-only.  All other models are reproduced natively.
REFERENCE_RESULTS = {
    "logreg": {
        "parameter_count": 24,
        "clean": {"macro_f1": [0.6010, 0.006]},
        "poisoned": {"macro_f1": [0.579, 0.020], "wis": [0.932, 0.043]},
        "source": "reported",
    },
    "random-forest": {
        "parameter_count": 3927,
        "clean": {"macro_f1": [0.647, 0.008], "edit_distance_vs_logreg": [21.10, 0.99]},
        "poisoned": {"macro_f1": [0.614, 0.027], "wis": [0.953, 0.026]},
        "source": "reported, not reproduced",
    },
    "mlp": {
        "parameter_count": 1853,
        "clean": {"macro_f1": [0.682, 0.011]},
        "source": "reported",
    },
    "qnn": {
        "parameter_count": 384,
        "clean": {"macro_f1": [0.667, 0.015], "edit_distance_vs_logreg": [20.9, 1.85]},
        "poisoned": {"macro_f1": [0.632, 0.040], "wis": [0.853, 0.048]},
        "source": "reported",
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    model: str = "qnn"
    train: TrainConfig = TrainConfig()
    logreg: LogRegConfig = LogRegConfig()
    mlp: MlpConfig = MlpConfig()
    importance_mode: str = IMPORTANCE_SUM
    seeds: tuple[int, ...] = tuple(range(10))
    split_ratios: tuple[float, float, float] = (0.70, 0.15, 0.15)
    poison_count: int = 0
    poison_mode: str = POISON_TRAIN_AND_TEST
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.model not in MODEL_KINDS:
            raise PreconditionError(f"unknown model kind {self.model!r}")
        if self.importance_mode not in IMPORTANCE_MODES:
            raise PreconditionError(f"unknown importance mode {self.importance_mode!r}")
        if self.poison_mode not in POISON_MODES:
            raise PreconditionError(f"unknown poison mode {self.poison_mode!r}")
        if self.poison_count < 0:
            raise PreconditionError("poison_count must be >= 0")
        if not self.seeds:
            raise PreconditionError("at least one seed is required")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "split_ratios", tuple(float(r) for r in self.split_ratios))


# --- experiment config file --------------------------------------------------

_EXP_INT = {"poison_count"}
_EXP_STR = {"model", "dataset", "importance_mode", "poison_mode", "out_dir"}
_LOGREG_KEYS = {
    "logreg_learning_rate": ("learning_rate", float),
    "logreg_l2": ("l2", float),
    "logreg_max_epochs": ("max_epochs", int),
    "logreg_grad_tol": ("grad_tol", float),
    "logreg_class_weighting": ("class_weighting", bool),
}
_MLP_KEYS = {
    "mlp_hidden": ("hidden", "int-list"),
    "mlp_activation": ("activation", str),
    "mlp_learning_rate": ("learning_rate", float),
    "mlp_batch_size": ("batch_size", int),
    "mlp_max_epochs": ("max_epochs", int),
    "mlp_patience": ("patience", int),
    "mlp_min_delta": ("min_delta", float),
    "mlp_class_weighting": ("class_weighting", bool),
}


def parse_seed_list(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ParseError(f"bad seed list {text!r}") from exc
    if not seeds:
        raise ParseError(f"empty seed list {text!r}")
    return seeds


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(value)


def parse_experiment_config(text: str) -> ExperimentConfig:
    """Flat key = value document covering experiment and training fields.

    Training keys appear bare (dim, layers, learning_rate, ...); baseline
    hyperparameters use logreg_/mlp_ prefixes.  Unknown keys are rejected.
    """
    exp: dict[str, object] = {}
    logreg_kw: dict[str, object] = {}
    mlp_kw: dict[str, object] = {}
    train_lines: list[str] = []
    dataset_path: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "dataset":
                dataset_path = value
            elif key == "seeds":
                exp["seeds"] = parse_seed_list(value)
            elif key == "split_ratios":
                parts = [float(p) for p in value.split(",")]
                if len(parts) != 3:
                    raise ValueError(value)
                exp["split_ratios"] = tuple(parts)
            elif key in _EXP_INT:
                exp[key] = int(value)
            elif key in _EXP_STR:
                exp[key] = value
            elif key in _LOGREG_KEYS:
                field, typ = _LOGREG_KEYS[key]
                logreg_kw[field] = _parse_bool(value) if typ is bool else typ(value)
            elif key in _MLP_KEYS:
                field, typ = _MLP_KEYS[key]
                if typ == "int-list":
                    mlp_kw[field] = tuple(int(p) for p in value.split(","))
                elif typ is bool:
                    mlp_kw[field] = _parse_bool(value)
                else:
                    mlp_kw[field] = typ(value)
            else:
                train_lines.append(line)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    if dataset_path is None:
        raise ParseError("config is missing the required 'dataset' key")
    train_config = parse_config("\n".join(train_lines))
    return ExperimentConfig(
        dataset_path=dataset_path,
        train=train_config,
        logreg=LogRegConfig(**logreg_kw),
        mlp=MlpConfig(**mlp_kw),
        **exp,
    )


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    return parse_experiment_config(Path(path).read_text())


def config_echo(config: ExperimentConfig) -> dict:
    """Fully resolved config as plain JSON-ready values, fixed key order."""
    t = config.train
    return {
        "model": config.model,
        "dataset": config.dataset_path,
        "seeds": list(config.seeds),
        "split_ratios": list(config.split_ratios),
        "importance_mode": config.importance_mode,
        "poison_count": config.poison_count,
        "poison_mode": config.poison_mode if config.poison_count else None,
        "train": {
            "dim": t.dim,
            "layers": t.layers,
            "readout": t.readout,
            "learning_rate": t.learning_rate,
            "beta1": t.beta1,
            "beta2": t.beta2,
            "adam_eps": t.adam_eps,
            "batch_size": t.batch_size,
            "max_epochs": t.max_epochs,
            "patience": t.patience,
            "min_delta": t.min_delta,
            "ridge": t.ridge,
            "init_scale": t.init_scale,
            "class_weighting": t.class_weighting,
        },
        "logreg": {
            "learning_rate": config.logreg.learning_rate,
            "l2": config.logreg.l2,
            "max_epochs": config.logreg.max_epochs,
            "grad_tol": config.logreg.grad_tol,
            "class_weighting": config.logreg.class_weighting,
        },
        "mlp": {
            "hidden": list(config.mlp.hidden),
            "activation": config.mlp.activation,
            "learning_rate": config.mlp.learning_rate,
            "batch_size": config.mlp.batch_size,
            "max_epochs": config.mlp.max_epochs,
            "patience": config.mlp.patience,
            "min_delta": config.mlp.min_delta,
            "class_weighting": config.mlp.class_weighting,
        },
    }


# --- per-seed protocol --------------------------------------------------------


def draw_poison_spec(
    n_features: int, count: int, mode: str, seed: int
) -> PoisonSpec:
    """Seed-derived substreams: the index draw and the noise stream are both
    functions of the study seed alone, so reruns reproduce them exactly."""
    index_rng = np.random.default_rng((seed, POISON_INDEX_STREAM))
    indices = tuple(
        sorted(int(i) for i in index_rng.choice(n_features, size=count, replace=False))
    )
    noise_seed = int(np.random.default_rng((seed, POISON_NOISE_STREAM)).integers(2**63))
    return PoisonSpec(indices=indices, seed=noise_seed, mode=mode)


def prepare_seed_dataset(
    raw: Dataset, config: ExperimentConfig, seed: int
) -> tuple[Dataset, PoisonSpec | None]:
    ds = stratified_split(raw, config.split_ratios, seed=seed)
    ds = standardize(ds)
    spec = None
    if config.poison_count:
        if config.poison_count >= ds.n_features:
            raise PreconditionError(
                f"poisoning {config.poison_count} of {ds.n_features} features "
                "leaves no informative set"
            )
        spec = draw_poison_spec(ds.n_features, config.poison_count, config.poison_mode, seed)
        ds = poison(ds, spec)
    return ds, spec


def _check_qnn_capacity(config: ExperimentConfig, n_features: int) -> None:
    n_gen = config.train.dim**2 - 1
    if n_gen < n_features:
        raise PreconditionError(
            f"d={config.train.dim} offers {n_gen} generators, fewer than "
            f"{n_features} features"
        )
    if config.train.layers < 1:
        raise PreconditionError("at least one layer is required for experiments")


def run_seed(
    raw: Dataset,
    config: ExperimentConfig,
    seed: int,
    out_dir: Path | None = None,
    pretrained=None,
) -> dict:
    """Execute one seed end to end and return its report row."""
    ds, spec = prepare_seed_dataset(raw, config, seed)
    X_test, y_test = ds.subset(TAG_TEST)
    row: dict = {"seed": seed}
    ranking = None

    if config.model == "qnn":
        _check_qnn_capacity(config, ds.n_features)
        generators = build_generators(config.train.dim)
        if pretrained is None:
            result = train_on_dataset(ds, replace(config.train, seed=seed), generators)
            params = result.params
            row["epochs_run"] = len(result.history)
            row["best_epoch"] = result.history.best_epoch
            if out_dir is not None:
                save_model(
                    params, out_dir / f"qnn-model-seed{seed}.json", extra={"train_seed": seed}
                )
                write_history_csv(result.history, out_dir / f"qnn-history-seed{seed}.csv")
        else:
            params = pretrained
        q = class_distribution(X_test, params, generators)
        preds = (np.atleast_2d(q)[:, 1] >= 0.5).astype(int)
        row["macro_f1"] = macro_f1(preds, y_test)
        ranking = feature_importance(params, config.importance_mode)
        companion = train_logreg(
            *ds.subset(TAG_TRAIN), config=config.logreg, feature_names=ds.feature_names
        )
        companion_ranking = logreg_ranking(companion)
        row["edit_distance_vs_logreg"] = edit_distance(ranking, companion_ranking)
        if out_dir is not None:
            write_ranking_csv(ranking, out_dir / f"qnn-ranking-seed{seed}.csv")
            write_ranking_csv(companion_ranking, out_dir / f"logreg-ranking-seed{seed}.csv")
        if spec is not None:
            informative = sorted(set(range(ds.n_features)) - set(spec.indices))
            row["poison_indices"] = list(spec.indices)
            row["wis"] = wis(ranking, informative)
            row["logreg_wis"] = wis(companion_ranking, informative)

    elif config.model == "logreg":
        if pretrained is None:
            model = train_logreg(
                *ds.subset(TAG_TRAIN), config=config.logreg, feature_names=ds.feature_names
            )
            if out_dir is not None:
                save_logreg(model, out_dir / f"logreg-model-seed{seed}.json")
                write_coefficients_csv(model, out_dir / f"logreg-coefficients-seed{seed}.csv")
        else:
            model = pretrained
        row["macro_f1"] = macro_f1(model.predict(X_test), y_test)
        ranking = logreg_ranking(model)
        if out_dir is not None:
            write_ranking_csv(ranking, out_dir / f"logreg-ranking-seed{seed}.csv")
        if spec is not None:
            informative = sorted(set(range(ds.n_features)) - set(spec.indices))
            row["poison_indices"] = list(spec.indices)
            row["wis"] = wis(ranking, informative)

    else:
        if pretrained is None:
            X_train, y_train = ds.subset(TAG_TRAIN)
            X_val, y_val = ds.subset(TAG_VALIDATION)
            model = train_mlp(X_train, y_train, X_val, y_val, replace(config.mlp, seed=seed))
            if out_dir is not None:
                save_mlp(model, out_dir / f"mlp-model-seed{seed}.json")
        else:
            model = pretrained
        row["macro_f1"] = macro_f1(model.predict(X_test), y_test)
        if spec is not None:
            row["poison_indices"] = list(spec.indices)

    return row


def _mean_std(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {"mean": mean, "std": std, "n": int(arr.size)}


def parameter_count_for(config: ExperimentConfig, n_features: int) -> int:
    if config.model == "qnn":
        return config.train.layers * (config.train.dim**2 - 1)
    if config.model == "logreg":
        return n_features + 1
    sizes = (n_features, *config.mlp.hidden, 2)
    return sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))


def build_report(
    config: ExperimentConfig,
    raw: Dataset,
    rows: list[dict],
    failures: list[dict],
) -> dict:
    aggregate: dict = {}
    for key in ("macro_f1", "edit_distance_vs_logreg", "wis", "logreg_wis"):
        values = [row[key] for row in rows if key in row]
        if values:
            aggregate[key] = _mean_std([float(v) for v in values])
    report = {
        "format_version": REPORT_FORMAT_VERSION,
        "kind": "metrics-report",
        "model": config.model,
        "dataset": fingerprint(raw),
        "config": config_echo(config),
        "modes": {
            "readout": config.train.readout if config.model == "qnn" else None,
            "importance": config.importance_mode if config.model in ("qnn", "logreg") else None,
            "poison": config.poison_mode if config.poison_count else None,
            "wis_normalization": "top-k scores normalized to unit sum, k = |informative|",
        },
        "parameter_count": parameter_count_for(config, raw.n_features),
        "per_seed": rows,
        "aggregate": aggregate,
        "failures": failures,
        "reference": {
            "note": (
                "Published benchmark values for this protocol; the "
                "random-forest row is reference-only and not reproduced "
                "by this package."
            ),
            "models": REFERENCE_RESULTS,
        },
    }
    if config.poison_count:
        informative_size = raw.n_features - config.poison_count
        report["random_wis_baseline"] = {
            "value": random_wis_baseline(
                raw.n_features,
                range(informative_size),
                trials=RANDOM_WIS_TRIALS,
                seed=RANDOM_WIS_SEED,
            ),
            "trials": RANDOM_WIS_TRIALS,
            "seed": RANDOM_WIS_SEED,
            "k": informative_size,
        }
    return report


def run_experiment(
    config: ExperimentConfig,
    raw: Dataset | None = None,
    save_artifacts: bool = True,
) -> dict:
    """Train and evaluate every seed; per-seed errors become report failures."""
    if raw is None:
        raw = load_taiwan(config.dataset_path)
    out_dir = None
    if save_artifacts and config.out_dir is not None:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    failures: list[dict] = []
    for seed in config.seeds:
        try:
            rows.append(run_seed(raw, config, seed, out_dir=out_dir))
        except Exception as exc:  # noqa: BLE001 - per-seed isolation is the contract
            failures.append({"seed": seed, "error": f"{type(exc).__name__}: {exc}"})
    return build_report(config, raw, rows, failures)


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=1) + "\n")


def load_report(path: str | Path) -> dict:
    report = json.loads(Path(path).read_text())
    if report.get("kind") != "metrics-report":
        raise StructuralError(f"{path}: not a metrics report")
    return report


# --- train/evaluate split into separate commands -------------------------------


def run_train_only(config: ExperimentConfig, raw: Dataset | None = None) -> dict:
    """Train per seed and save model artifacts plus a manifest; no metrics."""
    if raw is None:
        raw = load_taiwan(config.dataset_path)
    if config.out_dir is None:
        raise PreconditionError("training requires an output directory")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    models: dict[str, str] = {}
    failures: list[dict] = []
    for seed in config.seeds:
        try:
            ds, _ = prepare_seed_dataset(raw, config, seed)
            if config.model == "qnn":
                _check_qnn_capacity(config, ds.n_features)
                result = train_on_dataset(ds, replace(config.train, seed=seed))
                name = f"qnn-model-seed{seed}.json"
                save_model(result.params, out_dir / name, extra={"train_seed": seed})
                write_history_csv(result.history, out_dir / f"qnn-history-seed{seed}.csv")
            elif config.model == "logreg":
                model = train_logreg(
                    *ds.subset(TAG_TRAIN), config=config.logreg,
                    feature_names=ds.feature_names,
                )
                name = f"logreg-model-seed{seed}.json"
                save_logreg(model, out_dir / name)
                write_coefficients_csv(model, out_dir / f"logreg-coefficients-seed{seed}.csv")
            else:
                X_train, y_train = ds.subset(TAG_TRAIN)
                X_val, y_val = ds.subset(TAG_VALIDATION)
                model = train_mlp(
                    X_train, y_train, X_val, y_val, replace(config.mlp, seed=seed)
                )
                name = f"mlp-model-seed{seed}.json"
                save_mlp(model, out_dir / name)
            models[str(seed)] = name
        except Exception as exc:  # noqa: BLE001
            failures.append({"seed": seed, "error": f"{type(exc).__name__}: {exc}"})
    manifest = {
        "format_version": REPORT_FORMAT_VERSION,
        "kind": "train-manifest",
        "model": config.model,
        "dataset": fingerprint(raw),
        "config": config_echo(config),
        "models": models,
        "failures": failures,
    }
    Path(out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest


def run_evaluate_saved(
    config: ExperimentConfig, models_dir: str | Path, raw: Dataset | None = None
) -> dict:
    """Evaluate models saved by ``run_train_only`` against the dataset."""
    if raw is None:
        raw = load_taiwan(config.dataset_path)
    models_dir = Path(models_dir)
    manifest_path = models_dir / "manifest.json"
    if not manifest_path.exists():
        raise StructuralError(f"{models_dir}: no manifest.json (run training first)")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("kind") != "train-manifest":
        raise StructuralError(f"{manifest_path}: not a training manifest")
    if manifest["dataset"] != fingerprint(raw):
        raise StructuralError(
            "dataset fingerprint does not match the one the models were trained on"
        )
    if manifest["model"] != config.model:
        raise StructuralError(
            f"manifest holds {manifest['model']!r} models, config requests {config.model!r}"
        )
    loaders = {"qnn": load_model, "logreg": load_logreg, "mlp": load_mlp}
    rows: list[dict] = []
    failures: list[dict] = []
    for seed in config.seeds:
        try:
            name = manifest["models"].get(str(seed))
            if name is None:
                raise StructuralError(f"no saved model for seed {seed}")
            pretrained = loaders[config.model](models_dir / name)
            rows.append(run_seed(raw, config, seed, out_dir=None, pretrained=pretrained))
        except Exception as exc:  # noqa: BLE001
            failures.append({"seed": seed, "error": f"{type(exc).__name__}: {exc}"})
    return build_report(config, raw, rows, failures)


# --- cross-model comparison ---------------------------------------------------


def comparison_rows(reports: list[dict]) -> list[dict]:
    """Side-by-side rows for loaded reports plus the reference constants."""
    if not reports:
        raise PreconditionError("at least one report is required")
    first = reports[0]["dataset"]
    for rep in reports[1:]:
        if rep["dataset"] != first:
            raise StructuralError(
                "reports come from different datasets: "
                f"{rep['dataset']} vs {first}; refusing to merge"
            )
    rows = []
    any_poisoned = False
    for rep in reports:
        poisoned = bool(rep["config"]["poison_count"])
        any_poisoned = any_poisoned or poisoned
        agg = rep["aggregate"]

        def col(key):
            return [agg[key]["mean"], agg[key]["std"]] if key in agg else None

        rows.append(
            {
                "model": rep["model"],
                "source": "reproduced",
                "poisoned": poisoned,
                "parameter_count": rep["parameter_count"],
                "macro_f1": col("macro_f1"),
                "edit_distance_vs_logreg": col("edit_distance_vs_logreg"),
                "wis": col("wis"),
                "seeds_completed": len(rep["per_seed"]),
                "seeds_failed": len(rep["failures"]),
            }
        )
    if len(reports) > 1:
        # comparison context: append the reference constants for the one
        # model this package does not reproduce
        variant = "poisoned" if any_poisoned else "clean"
        ref = REFERENCE_RESULTS["random-forest"]
        block = ref[variant]
        rows.append(
            {
                "model": "random-forest",
                "source": ref["source"],
                "poisoned": any_poisoned,
                "parameter_count": ref["parameter_count"],
                "macro_f1": block.get("macro_f1"),
                "edit_distance_vs_logreg": block.get("edit_distance_vs_logreg"),
                "wis": block.get("wis"),
                "seeds_completed": 0,
                "seeds_failed": 0,
            }
        )
    return rows


def _cell(pair, digits=4) -> str:
    if pair is None:
        return "n/a"
    return f"{pair[0]:.{digits}f} +/- {pair[1]:.{digits}f}"


def render_comparison_text(rows: list[dict]) -> str:
    header = ["model", "source", "params", "macro_f1", "edit_dist_vs_lr", "wis"]
    table = [header]
    for row in rows:
        table.append(
            [
                row["model"],
                row["source"],
                str(row["parameter_count"]),
                _cell(row["macro_f1"]),
                _cell(row["edit_distance_vs_logreg"], digits=2),
                _cell(row["wis"]),
            ]
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = []
    for i, r in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_comparison(rows: list[dict], out_dir: str | Path, dataset: dict) -> dict[str, Path]:
    import csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out_dir / "comparison.json",
        "csv": out_dir / "comparison.csv",
        "txt": out_dir / "comparison.txt",
    }
    record = {"kind": "comparison", "dataset": dataset, "rows": rows}
    paths["json"].write_text(json.dumps(record, indent=1) + "\n")
    with open(paths["csv"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "model", "source", "poisoned", "parameter_count",
                "macro_f1_mean", "macro_f1_std",
                "edit_distance_mean", "edit_distance_std",
                "wis_mean", "wis_std",
                "seeds_completed", "seeds_failed",
            ]
        )
        for row in rows:
            f1 = row["macro_f1"] or ["", ""]
            ed = row["edit_distance_vs_logreg"] or ["", ""]
            w = row["wis"] or ["", ""]
            writer.writerow(
                [
                    row["model"], row["source"], row["poisoned"],
                    row["parameter_count"], f1[0], f1[1], ed[0], ed[1], w[0], w[1],
                    row["seeds_completed"], row["seeds_failed"],
                ]
            )
    paths["txt"].write_text(render_comparison_text(rows))
    return paths
