"""Shared fixtures: generator sets, toy datasets, and a synthetic canonical CSV.

The two-feature toys deliberately live away from the origin.  At d=2 the
circuit output is an exact even function of the feature vector whenever the
features drive only off-diagonal generators (conjugation by the diagonal
generator flips their signs while fixing |0>), so any class rule symmetric
under x -> -x is structurally unlearnable.  Off-origin constructions avoid
that trap and are solvable to macro-F1 1.0.
"""

from __future__ import annotations

import csv
import gzip
from pathlib import Path

import numpy as np
import pytest

from quditnn.data import CANONICAL_LABEL, FEATURE_COLUMNS, Dataset, load_taiwan
from quditnn.generators import build_generators

DATA_PATH = Path(__file__).resolve().parent.parent / "data" / "UCI_Credit_Card.csv.gz"

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture(scope="session")
def gens2():
    return build_generators(2)


@pytest.fixture(scope="session")
def gens3():
    return build_generators(3)


@pytest.fixture(scope="session")
def gens5():
    return build_generators(5)


@pytest.fixture(scope="session")
def taiwan():
    return load_taiwan(DATA_PATH)


def make_separable_toy(n: int = 240, seed: int = 7) -> tuple[np.ndarray, np.ndarray]:
    """Linearly separable 2-feature set with rule x0 > 1 and a margin gap.

    All feature values are positive, so the rule is not symmetric under
    x -> -x (see module docstring).
    """
    rng = np.random.default_rng(seed)
    x0 = np.where(
        rng.random(n) < 0.5,
        rng.uniform(0.2, 0.8, n),
        rng.uniform(1.2, 1.8, n),
    )
    x1 = rng.uniform(0.1, 0.9, n)
    X = np.column_stack([x0, x1])
    y = (x0 > 1.0).astype(int)
    return X, y


def make_xor_toy(n: int = 400, seed: int = 11) -> tuple[np.ndarray, np.ndarray]:
    """Sign-XOR labels: inseparable by any linear rule through standardized data."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 2))
    X += 0.3 * np.sign(X)
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
    return X, y


@pytest.fixture
def separable_toy():
    return make_separable_toy()


@pytest.fixture
def xor_toy():
    return make_xor_toy()


def synthetic_canonical_rows(n: int, seed: int = 0) -> tuple[list[list[int]], list[int]]:
    """Integer-valued rows in the canonical 23-feature schema.

    The label leans on LIMIT_BAL and AGE so small training runs have signal;
    both classes are guaranteed nonempty.
    """
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for i in range(n):
        limit = int(rng.integers(10_000, 500_000))
        age = int(rng.integers(21, 70))
        pays = rng.integers(-1, 5, size=6)
        bills = rng.integers(0, 100_000, size=6)
        amts = rng.integers(0, 50_000, size=6)
        score = -limit / 250_000 + (age - 45) / 25 + 0.4 * pays[0] + rng.normal(0, 0.8)
        label = int(score > 0)
        features = [
            limit,
            int(rng.integers(1, 3)),
            int(rng.integers(1, 5)),
            int(rng.integers(1, 4)),
            age,
            *[int(p) for p in pays],
            *[int(b) for b in bills],
            *[int(a) for a in amts],
        ]
        rows.append(features)
        labels.append(label)
    labels[0], labels[1] = 0, 1
    return rows, labels


def write_canonical_file(path: Path, n: int = 160, seed: int = 0, compress: bool = False) -> None:
    rows, labels = synthetic_canonical_rows(n, seed)
    opener = gzip.open if compress else open
    with opener(path, "wt", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["ID", *FEATURE_COLUMNS, CANONICAL_LABEL])
        for i, (features, label) in enumerate(zip(rows, labels), start=1):
            writer.writerow([i, *features, label])


@pytest.fixture
def tiny_csv(tmp_path):
    path = tmp_path / "tiny.csv"
    write_canonical_file(path, n=160, seed=0)
    return path


@pytest.fixture
def tiny_dataset(tiny_csv) -> Dataset:
    return load_taiwan(tiny_csv)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (raw + raw.conj().T) / 2.0
