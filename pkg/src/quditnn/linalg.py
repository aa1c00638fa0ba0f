"""Dense complex linear algebra for small qudit systems.

All arrays are double precision: matrices are ``(d, d)`` complex128, states are
``(d,)`` complex128 unit vectors.  Functions accept stacked inputs
(``(..., d, d)`` / ``(..., d)``) wherever the model's vectorized passes need
them.  Matrix exponentials of Hermitian inputs go through the eigendecomposition
so that the backward pass can reuse the same factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError, StructuralError

HERMITICITY_RTOL = 1e-10
HERMITICITY_ATOL_NORM = 1e-12
UNITARITY_ATOL = 1e-8


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Frobenius distance to the adjoint, relative to the matrix norm.

    Falls back to the absolute distance when the matrix norm is below
    ``HERMITICITY_ATOL_NORM`` (near-zero matrices have no meaningful scale).
    """
    matrix = np.asarray(matrix)
    defect = np.linalg.norm(matrix - np.conj(np.swapaxes(matrix, -1, -2)), axis=(-2, -1))
    norm = np.linalg.norm(matrix, axis=(-2, -1))
    scale = np.where(norm < HERMITICITY_ATOL_NORM, 1.0, norm)
    return float(np.max(defect / scale))


def require_hermitian(matrix: np.ndarray, rtol: float = HERMITICITY_RTOL) -> None:
    defect = hermiticity_defect(matrix)
    if defect > rtol:
        raise PreconditionError(
            f"matrix is not Hermitian: relative defect {defect:.3e} exceeds {rtol:.1e}"
        )


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigensystem of a Hermitian matrix (stacked along leading axes if any).

    ``eigenvalues`` are real and ascending, ``eigenvectors`` holds the
    orthonormal eigenvectors as columns, so ``V @ diag(w) @ V.conj().T``
    reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[-1]


def eigh(matrix: np.ndarray, rtol: float = HERMITICITY_RTOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is validated against ``rtol`` and then symmetrized as
    ``(H + H†)/2`` to absorb rounding from Hamiltonian assembly before being
    handed to LAPACK.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape[-1] != matrix.shape[-2]:
        raise StructuralError(f"expected a square matrix, got shape {matrix.shape}")
    require_hermitian(matrix, rtol=rtol)
    sym = (matrix + np.conj(np.swapaxes(matrix, -1, -2))) / 2.0
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails at d<=64
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def unitary_from_decomposition(decomp: EigenDecomposition) -> np.ndarray:
    """Assemble exp(-i H) = V diag(exp(-i w)) V† from an eigensystem of H."""
    phases = np.exp(-1j * decomp.eigenvalues)
    vectors = decomp.eigenvectors
    return (vectors * phases[..., None, :]) @ np.conj(np.swapaxes(vectors, -1, -2))


def expm_minus_i(matrix: np.ndarray, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """Unitary exp(-i H) for Hermitian H."""
    return unitary_from_decomposition(eigh(matrix, rtol=rtol))


def unitarity_defect(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix)
    dim = matrix.shape[-1]
    gram = np.conj(np.swapaxes(matrix, -1, -2)) @ matrix
    return float(np.max(np.linalg.norm(gram - np.eye(dim), axis=(-2, -1))))


def basis_state(dim: int, index: int = 0) -> np.ndarray:
    """Computational basis state |index> of a d-level system."""
    if dim < 1:
        raise StructuralError(f"dimension must be positive, got {dim}")
    if not 0 <= index < dim:
        raise StructuralError(f"basis index {index} out of range for dimension {dim}")
    state = np.zeros(dim, dtype=np.complex128)
    state[index] = 1.0
    return state


def state_norm_defect(state: np.ndarray) -> float:
    return float(np.max(np.abs(np.sum(np.abs(np.asarray(state)) ** 2, axis=-1) - 1.0)))


def apply_unitary(unitary: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Apply a unitary to a normalized state, validating both inputs.

    The model's hot loops use raw matmuls; this checked entry point is the
    public contract for single applications.
    """
    unitary = np.asarray(unitary, dtype=np.complex128)
    state = np.asarray(state, dtype=np.complex128)
    if unitary.ndim != 2 or unitary.shape[0] != unitary.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {unitary.shape}")
    if state.shape != (unitary.shape[1],):
        raise StructuralError(
            f"dimension mismatch: matrix {unitary.shape} cannot act on state {state.shape}"
        )
    if unitarity_defect(unitary) > UNITARITY_ATOL:
        raise PreconditionError("matrix is not unitary within 1e-8")
    if state_norm_defect(state) > 1e-10:
        raise PreconditionError("state is not normalized within 1e-10")
    return unitary @ state
