import numpy as np
import pytest

from conftest import PAULI_X, PAULI_Y, PAULI_Z
from quditnn.errors import StructuralError
from quditnn.generators import (
    KIND_ANTISYMMETRIC,
    KIND_DIAGONAL,
    KIND_SYMMETRIC,
    build_generators,
    check_algebra,
)

GM1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
GM2 = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex)
GM3 = np.array([[1, 0, 0], [0, -1, 0], [0, 0, 0]], dtype=complex)
GM4 = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex)
GM5 = np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex)
GM6 = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
GM7 = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex)
GM8 = np.array([[1, 0, 0], [0, 1, 0], [0, 0, -2]], dtype=complex) / np.sqrt(3.0)


def test_d2_is_pauli_in_order(gens2):
    assert len(gens2) == 3
    assert np.array_equal(gens2[0], PAULI_X)
    assert np.array_equal(gens2[1], PAULI_Y)
    assert np.array_equal(gens2[2], PAULI_Z)
    assert gens2.kinds == (KIND_SYMMETRIC, KIND_ANTISYMMETRIC, KIND_DIAGONAL)


def test_d3_is_gell_mann_reordered(gens3):
    # pair loop first (interleaved real/imag), diagonals last
    expected = [GM1, GM2, GM4, GM5, GM6, GM7, GM3, GM8]
    assert len(gens3) == 8
    for got, want in zip(gens3.matrices, expected):
        assert np.allclose(got, want, atol=1e-15)


def test_d5_family_counts(gens5):
    assert len(gens5) == 24
    assert gens5.kinds.count(KIND_SYMMETRIC) == 10
    assert gens5.kinds.count(KIND_ANTISYMMETRIC) == 10
    assert gens5.kinds.count(KIND_DIAGONAL) == 4


@pytest.mark.parametrize("dim", range(2, 17))
def test_count_and_orthogonality(dim):
    gs = build_generators(dim)
    assert len(gs) == dim * dim - 1
    report = check_algebra(gs)
    assert report.max_abs_trace < 1e-14
    assert report.max_offdiagonal_overlap < 1e-12
    assert report.max_normalization_deviation < 1e-12
    assert report.normalization_constant == 2.0


@pytest.mark.parametrize("dim", [2, 3, 5, 8])
def test_generators_exactly_hermitian(dim):
    gs = build_generators(dim)
    for G in gs.matrices:
        assert np.array_equal(G, G.conj().T)


def test_nonzero_entry_counts(gens5):
    for G, kind, idx in zip(gens5.matrices, gens5.kinds, gens5.indices):
        nonzero = int(np.count_nonzero(G))
        if kind == KIND_DIAGONAL:
            assert nonzero == idx[0] + 1
        else:
            assert nonzero == 2


@pytest.mark.parametrize("dim", [2, 3, 5, 8])
def test_diagonal_form_shift_equivalence(dim):
    """The zero-based diagonal recipe (factor sqrt(2/((l+1)(l+2))), levels
    0..d-2) and the one-based recipe used here coincide under l -> l+1."""
    gs = build_generators(dim)
    diagonals = [G for G, k in zip(gs.matrices, gs.kinds) if k == KIND_DIAGONAL]
    for l0 in range(dim - 1):
        value = np.sqrt(2.0 / ((l0 + 1) * (l0 + 2)))
        alt = np.zeros((dim, dim), dtype=complex)
        for j in range(l0 + 1):
            alt[j, j] = value
        alt[l0 + 1, l0 + 1] = -(l0 + 1) * value
        assert np.array_equal(alt, diagonals[l0])


def test_rejects_dim_below_two():
    with pytest.raises(StructuralError):
        build_generators(1)


def test_matrices_are_write_protected(gens5):
    with pytest.raises(ValueError):
        gens5.matrices[0, 0, 0] = 1.0
