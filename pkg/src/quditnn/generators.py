"""Construction of the d²−1 traceless Hermitian generators of su(d).

The basis comes in three families: real symmetric off-diagonal matrices,
purely imaginary antisymmetric off-diagonal matrices, and real diagonal
matrices.  For d=2 this reproduces the Pauli matrices, for d=3 the Gell-Mann
matrices.  The enumeration order is fixed and load-bearing (the classifier
assigns dataset features to generators by position):

    for j in 0..d-2:
        for k in j+1..d-1:
            emit symmetric(j, k), then antisymmetric(j, k)
    for l in 1..d-1:
        emit diagonal(l)

where diagonal(l) carries sqrt(2/(l(l+1))) on entries (0,0)..(l-1,l-1) and
-l*sqrt(2/(l(l+1))) at (l,l).  All generators are Hilbert-Schmidt orthogonal
with Tr(G_i G_j) = 2 δ_ij.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError

KIND_SYMMETRIC = "symmetric-real"
KIND_ANTISYMMETRIC = "antisymmetric-imag"
KIND_DIAGONAL = "diagonal"


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered, immutable basis of su(d).

    ``matrices`` is the (d²−1, d, d) complex stack in enumeration order;
    ``kinds`` and ``indices`` carry per-generator metadata: the (j, k) pair for
    off-diagonal generators, the level (l,) for diagonal ones.
    """

    dim: int
    matrices: np.ndarray
    kinds: tuple[str, ...]
    indices: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        self.matrices.setflags(write=False)

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]

    @property
    def n_generators(self) -> int:
        return self.dim * self.dim - 1


def build_generators(dim: int) -> GeneratorSet:
    """Build the su(d) basis in canonical enumeration order."""
    if dim < 2:
        raise StructuralError(f"generator construction needs dimension >= 2, got {dim}")

    matrices: list[np.ndarray] = []
    kinds: list[str] = []
    indices: list[tuple[int, ...]] = []

    for j in range(dim - 1):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=np.complex128)
            sym[j, k] = 1.0
            sym[k, j] = 1.0
            matrices.append(sym)
            kinds.append(KIND_SYMMETRIC)
            indices.append((j, k))

            anti = np.zeros((dim, dim), dtype=np.complex128)
            anti[j, k] = -1.0j
            anti[k, j] = 1.0j
            matrices.append(anti)
            kinds.append(KIND_ANTISYMMETRIC)
            indices.append((j, k))

    for level in range(1, dim):
        value = np.sqrt(2.0 / (level * (level + 1)))
        diag = np.zeros((dim, dim), dtype=np.complex128)
        for j in range(level):
            diag[j, j] = value
        diag[level, level] = -level * value
        matrices.append(diag)
        kinds.append(KIND_DIAGONAL)
        indices.append((level,))

    return GeneratorSet(
        dim=dim,
        matrices=np.stack(matrices),
        kinds=tuple(kinds),
        indices=tuple(indices),
    )


@dataclass(frozen=True)
class AlgebraReport:
    """Diagnostics from brute-force verification of the basis."""

    dim: int
    count: int
    count_symmetric: int
    count_antisymmetric: int
    count_diagonal: int
    max_abs_trace: float
    max_offdiagonal_overlap: float
    max_normalization_deviation: float
    normalization_constant: float

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "count": self.count,
            "count_symmetric": self.count_symmetric,
            "count_antisymmetric": self.count_antisymmetric,
            "count_diagonal": self.count_diagonal,
            "max_abs_trace": self.max_abs_trace,
            "max_offdiagonal_overlap": self.max_offdiagonal_overlap,
            "max_normalization_deviation": self.max_normalization_deviation,
            "normalization_constant": self.normalization_constant,
        }


def check_algebra(generators: GeneratorSet) -> AlgebraReport:
    """Measure traces and pairwise Hilbert-Schmidt overlaps of the basis.

    The overlap matrix Tr(G_i G_j) is computed over all pairs; the report
    carries the worst deviations from tracelessness, orthogonality, and the
    common normalization Tr(G²) = 2.
    """
    mats = generators.matrices
    traces = np.abs(np.trace(mats, axis1=-2, axis2=-1))
    # Tr(G_i G_j) for all pairs; generators are Hermitian so no adjoint needed.
    overlaps = np.real(np.einsum("iab,jba->ij", mats, mats))
    off = overlaps - np.diag(np.diag(overlaps))
    return AlgebraReport(
        dim=generators.dim,
        count=len(generators),
        count_symmetric=generators.kinds.count(KIND_SYMMETRIC),
        count_antisymmetric=generators.kinds.count(KIND_ANTISYMMETRIC),
        count_diagonal=generators.kinds.count(KIND_DIAGONAL),
        max_abs_trace=float(np.max(traces)),
        max_offdiagonal_overlap=float(np.max(np.abs(off))),
        max_normalization_deviation=float(np.max(np.abs(np.diag(overlaps) - 2.0))),
        normalization_constant=2.0,
    )
