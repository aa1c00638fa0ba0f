"""Taiwan credit-default dataset ingestion, splitting, scaling, poisoning.

The canonical file is a 25-column CSV (header row, UTF-8): an ID column, 23
feature columns in a fixed documented order, and a binary default label whose
header name is allowed to vary across distributors.  The loader drops ID,
keeps the 23 features in file order, and never one-hot expands the
categorical columns (the model consumes exactly 23 inputs).

A ``Dataset`` is immutable; every transformation returns a new instance.
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, PreconditionError, SchemaError, StructuralError

FEATURE_COLUMNS = (
    "LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE",
    "PAY_0", "PAY_2", "PAY_3", "PAY_4", "PAY_5", "PAY_6",
    "BILL_AMT1", "BILL_AMT2", "BILL_AMT3", "BILL_AMT4", "BILL_AMT5", "BILL_AMT6",
    "PAY_AMT1", "PAY_AMT2", "PAY_AMT3", "PAY_AMT4", "PAY_AMT5", "PAY_AMT6",
)
CANONICAL_LABEL = "default.payment.next.month"

TAG_TRAIN = 0
TAG_VALIDATION = 1
TAG_TEST = 2
TAG_NAMES = ("train", "validation", "test")

POISON_TRAIN_AND_TEST = "train-and-test"
POISON_TEST_ONLY = "test-only"
POISON_MODES = (POISON_TRAIN_AND_TEST, POISON_TEST_ONLY)

CONSTANT_FEATURE_TOL = 1e-12


@dataclass(frozen=True)
class Standardization:
    """Per-feature train-split statistics used to z-score every split."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class PoisonSpec:
    """Columns to replace with seeded standard-normal noise.

    ``train-and-test`` corrupts every row (the model must learn to ignore the
    noise); ``test-only`` leaves train/validation rows clean.
    """

    indices: tuple[int, ...]
    seed: int
    mode: str = POISON_TRAIN_AND_TEST

    def __post_init__(self) -> None:
        if self.mode not in POISON_MODES:
            raise StructuralError(f"unknown poison mode {self.mode!r}")
        indices = tuple(int(i) for i in self.indices)
        if len(set(indices)) != len(indices):
            raise StructuralError(f"duplicate poison indices in {indices}")
        object.__setattr__(self, "indices", indices)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    split_tags: np.ndarray | None = None
    standardization: Standardization | None = None
    poison_spec: PoisonSpec | None = None

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if features.ndim != 2 or features.shape[0] == 0:
            raise StructuralError(f"feature matrix must be 2-D and non-empty, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise StructuralError(
                f"labels shape {labels.shape} != ({features.shape[0]},)"
            )
        if not np.isin(labels, (0, 1)).all():
            raise StructuralError("labels must be 0 or 1")
        if len(self.feature_names) != features.shape[1]:
            raise StructuralError(
                f"{len(self.feature_names)} names for {features.shape[1]} feature columns"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.split_tags is not None:
            tags = np.asarray(self.split_tags, dtype=np.int8)
            if tags.shape != labels.shape:
                raise StructuralError(f"split tags shape {tags.shape} != {labels.shape}")
            object.__setattr__(self, "split_tags", tags)
            self.split_tags.setflags(write=False)
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def mask(self, tag: int) -> np.ndarray:
        if self.split_tags is None:
            raise PreconditionError("dataset has no split tags yet")
        return self.split_tags == tag

    def subset(self, tag: int) -> tuple[np.ndarray, np.ndarray]:
        m = self.mask(tag)
        return self.features[m], self.labels[m]


def _open_text(path: str | Path):
    raw = Path(path).open("rb")
    head = raw.read(2)
    raw.seek(0)
    if head == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


def load_taiwan(path: str | Path) -> Dataset:
    """Read a canonical 25-column CSV (.gz transparently) into a Dataset.

    The first 24 header names must match the documented schema exactly; the
    label column accepts any name.  Cells must be numeric and labels binary.
    """
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        expected = ("ID",) + FEATURE_COLUMNS
        if len(header) != len(expected) + 1:
            raise SchemaError(
                f"{path}: expected {len(expected) + 1} columns, found {len(header)}"
            )
        for pos, (got, want) in enumerate(zip(header, expected)):
            if got.strip() != want:
                raise SchemaError(
                    f"{path}: column {pos + 1} is {got.strip()!r}, expected {want!r}"
                )
        rows: list[list[float]] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                )
            try:
                values = [float(cell) for cell in row[1:-1]]
            except ValueError:
                bad = next(
                    i for i, cell in enumerate(row[1:-1], start=2)
                    if not _is_number(cell)
                )
                raise ParseError(
                    f"{path}: row {lineno}, column {header[bad - 1]!r}: "
                    f"non-numeric value {row[bad - 1]!r}"
                ) from None
            label_cell = row[-1].strip()
            if label_cell not in ("0", "1"):
                raise ParseError(
                    f"{path}: row {lineno}, column {header[-1]!r}: "
                    f"label must be 0 or 1, got {label_cell!r}"
                )
            rows.append(values)
            labels.append(int(label_cell))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return Dataset(
        features=np.array(rows, dtype=float),
        labels=np.array(labels, dtype=int),
        feature_names=FEATURE_COLUMNS,
    )


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def convert_uci_export(src: str | Path, dst: str | Path) -> int:
    """Rewrite the two-header-row UCI spreadsheet export as canonical CSV.

    The export's first row is a generic X1..X23/Y banner and its second row
    holds the real column names (with spaces in the label).  Already-canonical
    files pass through with the label name normalized.  Returns the number of
    data rows written.
    """
    with _open_text(src) as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{src}: empty file")
    first = [c.strip() for c in rows[0]]
    if len(first) >= 3 and first[1] == "X1" and first[-1] == "Y":
        if len(rows) < 2:
            raise SchemaError(f"{src}: banner row without a name row")
        names = [c.strip().replace(" ", "_") for c in rows[1]]
        data = rows[2:]
    else:
        names = first
        data = rows[1:]
    if len(names) != 25:
        raise SchemaError(f"{src}: expected 25 columns, found {len(names)}")
    normalized = ["ID"] + [n.upper() for n in names[1:-1]] + [CANONICAL_LABEL]
    expected = ["ID", *FEATURE_COLUMNS]
    for pos, (got, want) in enumerate(zip(normalized, expected)):
        if got != want:
            raise SchemaError(
                f"{src}: column {pos + 1} is {names[pos]!r}, expected {want!r}"
            )
    with open(dst, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(normalized)
        count = 0
        for row in data:
            if not row:
                continue
            if len(row) != 25:
                raise SchemaError(
                    f"{src}: data row with {len(row)} cells, expected 25"
                )
            writer.writerow([c.strip() for c in row])
            count += 1
    if count == 0:
        raise SchemaError(f"{src}: no data rows")
    return count


def stratified_split(
    ds: Dataset, ratios: tuple[float, float, float] = (0.70, 0.15, 0.15), seed: int = 0
) -> Dataset:
    """Assign train/validation/test tags, stratified by class.

    Within each class, counts follow the largest-remainder rule, so every
    split's class proportion is within one sample of exact stratification.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise PreconditionError(f"ratios must be 3 non-negative numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise PreconditionError(f"ratios must sum to 1, got {sum(ratios)}")
    active = sum(1 for r in ratios if r > 0)
    rng = np.random.default_rng(seed)
    tags = np.empty(ds.n_samples, dtype=np.int8)
    for cls in np.unique(ds.labels):
        members = np.flatnonzero(ds.labels == cls)
        if len(members) < active:
            raise StructuralError(
                f"class {cls} has {len(members)} samples, fewer than the "
                f"{active} non-empty splits"
            )
        exact = np.array(ratios) * len(members)
        counts = np.floor(exact).astype(int)
        remainder = exact - counts
        for slot in np.argsort(-remainder, kind="stable")[: len(members) - counts.sum()]:
            counts[slot] += 1
        order = rng.permutation(members)
        bounds = np.cumsum(counts)
        tags[order[: bounds[0]]] = TAG_TRAIN
        tags[order[bounds[0] : bounds[1]]] = TAG_VALIDATION
        tags[order[bounds[1] :]] = TAG_TEST
    return replace(ds, split_tags=tags)


def standardize(ds: Dataset) -> Dataset:
    """Z-score all rows using train-split statistics only."""
    if ds.split_tags is None:
        raise PreconditionError("standardize requires split tags")
    train = ds.features[ds.mask(TAG_TRAIN)]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    flat = np.flatnonzero(std < CONSTANT_FEATURE_TOL)
    if flat.size:
        raise StructuralError(
            f"feature {ds.feature_names[flat[0]]!r} is constant on the train split"
        )
    return replace(
        ds,
        features=(ds.features - mean) / std,
        standardization=Standardization(mean=mean, std=std),
    )


def poison(ds: Dataset, spec: PoisonSpec) -> Dataset:
    """Replace the chosen standardized columns with seeded N(0, 1) noise."""
    if ds.standardization is None:
        raise PreconditionError("poison requires standardized features")
    for idx in spec.indices:
        if not 0 <= idx < ds.n_features:
            raise StructuralError(
                f"poison index {idx} out of range for {ds.n_features} features"
            )
    if not spec.indices:
        return replace(ds, poison_spec=spec)
    if spec.mode == POISON_TRAIN_AND_TEST:
        affected = np.arange(ds.n_samples)
    else:
        affected = np.flatnonzero(ds.mask(TAG_TEST))
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((len(affected), len(spec.indices)))
    features = ds.features.copy()
    cols = np.array(sorted(spec.indices))
    features[np.ix_(affected, cols)] = noise
    return replace(ds, features=features, poison_spec=spec)


def fingerprint(ds: Dataset) -> dict:
    """Attribution record for reports: size, positives, feature-name hash."""
    digest = hashlib.sha256(",".join(ds.feature_names).encode()).hexdigest()
    return {
        "rows": int(ds.n_samples),
        "positives": int(ds.labels.sum()),
        "n_features": int(ds.n_features),
        "feature_names_sha256": digest,
    }


def write_canonical_csv(ds: Dataset, path: str | Path) -> None:
    """Audit echo of a raw (unstandardized) dataset in canonical layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ID", *ds.feature_names, CANONICAL_LABEL])
        for i in range(ds.n_samples):
            cells = [f"{v:g}" for v in ds.features[i]]
            writer.writerow([i + 1, *cells, int(ds.labels[i])])
