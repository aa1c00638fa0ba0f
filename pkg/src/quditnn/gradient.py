"""Reverse-mode gradients through the layered matrix exponentials.

The loss touches the weights only through per-layer unitaries exp(-i H_l), so
one backward sweep per batch suffices: propagate a co-state through the
adjoint unitaries and contract it with the exponential's directional
derivative at each layer.

The directional derivative uses the eigendecomposition H = V diag(lam) V^
(cached by the forward pass):

    Dexp(-iH)[E] = V (Phi o (V^ E V)) V^

where Phi_ab = (e^{-i lam_a} - e^{-i lam_b}) / (lam_a - lam_b) and the
diagonal / near-degenerate entries take the limit -i e^{-i (lam_a+lam_b)/2}.
Eigenvalue pairs closer than 1e-9 (relative to the spectral radius) use the
limit branch; the quotient loses all significant digits there while the limit
is exact to O(delta^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError, StructuralError
from .generators import GeneratorSet
from .linalg import hermiticity_defect, HERMITICITY_RTOL
from .model import (
    ForwardCache,
    ModelParams,
    forward_batch,
    readout,
    readout_jacobian,
    remap_grad,
)

DEGENERACY_EPS = 1e-9
CE_CLIP = 1e-12


def phi_matrix(eigenvalues: np.ndarray) -> np.ndarray:
    """First divided differences of z -> exp(-i z) on the spectrum.

    Accepts stacked spectra of shape (..., d) and returns (..., d, d).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    diff = lam[..., :, None] - lam[..., None, :]
    scale = np.maximum(1.0, np.max(np.abs(lam), axis=-1, keepdims=True))
    eps = DEGENERACY_EPS * scale[..., None]
    phases = np.exp(-1j * lam)
    numer = phases[..., :, None] - phases[..., None, :]
    limit = -1j * np.exp(-0.5j * (lam[..., :, None] + lam[..., None, :]))
    near = np.abs(diff) < eps
    safe = np.where(near, 1.0, diff)
    return np.where(near, limit, numer / safe)


def frechet_expm(
    eigenvalues: np.ndarray, eigenvectors: np.ndarray, direction: np.ndarray
) -> np.ndarray:
    """Directional derivative of H -> exp(-iH) along a Hermitian direction."""
    direction = np.asarray(direction, dtype=np.complex128)
    defect = hermiticity_defect(direction)
    if defect > HERMITICITY_RTOL:
        raise PreconditionError(
            f"direction is not Hermitian (relative defect {defect:.3e})"
        )
    V = np.asarray(eigenvectors)
    Vh = np.conj(np.swapaxes(V, -1, -2))
    inner = Vh @ direction @ V
    return V @ (phi_matrix(eigenvalues) * inner) @ Vh


@dataclass(frozen=True)
class GradientRecord:
    """One batch's loss, weight gradient, and the cached forward sweep."""

    loss: float
    gradient: np.ndarray
    class_scores: np.ndarray
    probabilities: np.ndarray
    cache: ForwardCache


def weighted_cross_entropy(
    class_scores: np.ndarray, labels: np.ndarray, sample_weights: np.ndarray
) -> float:
    """Mean over the batch of w_b * (-log q_{y_b}), clipped at 1e-12."""
    q_true = np.clip(class_scores[np.arange(len(labels)), labels], CE_CLIP, None)
    return float(np.mean(sample_weights * -np.log(q_true)))


def loss_and_gradient(
    X: np.ndarray,
    labels: np.ndarray,
    params: ModelParams,
    generators: GeneratorSet,
    sample_weights: np.ndarray | None = None,
    ridge: float = 0.0,
) -> GradientRecord:
    """Weighted cross-entropy plus ridge penalty, with its weight gradient.

    ``sample_weights`` defaults to all-ones; class balancing passes the
    per-sample class weight here.  The ridge term penalizes every weight,
    bias slots included, so weights on frozen (all-zero) feature columns
    still receive the shrinkage gradient 2*ridge*w.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = np.asarray(labels, dtype=int)
    batch = X.shape[0]
    if batch == 0:
        raise StructuralError("empty batch")
    if labels.shape != (batch,):
        raise StructuralError(f"labels shape {labels.shape} != ({batch},)")
    if sample_weights is None:
        sample_weights = np.ones(batch)
    else:
        sample_weights = np.asarray(sample_weights, dtype=float)
        if sample_weights.shape != (batch,):
            raise StructuralError(
                f"sample_weights shape {sample_weights.shape} != ({batch},)"
            )

    cache: ForwardCache = forward_batch(X, params, generators, keep_cache=True)
    q = np.atleast_2d(readout(cache.probabilities, params.readout))
    per_sample = -np.log(np.clip(q[np.arange(batch), labels], CE_CLIP, None))
    bad = np.flatnonzero(~np.isfinite(per_sample))
    if bad.size:
        raise NumericalError(f"non-finite loss at sample index {bad[0]}")
    data_loss = float(np.mean(sample_weights * per_sample))

    # dl/dq: only the true-class column is touched; the clip zeroes the
    # gradient exactly where the loss plateaus.
    q_true = q[np.arange(batch), labels]
    g_q = np.zeros_like(q)
    live = q_true > CE_CLIP
    g_q[np.arange(batch), labels] = np.where(
        live, -sample_weights / (batch * np.maximum(q_true, CE_CLIP)), 0.0
    )
    g_p = np.einsum("bc,bck->bk", g_q, readout_jacobian(cache.probabilities, params.readout))

    grad = np.zeros_like(params.weights)
    co_state = g_p * cache.states[params.layers]
    G = generators.matrices
    for l in range(params.layers - 1, -1, -1):
        V = cache.eigenvectors[l]
        conj_V = np.conj(V)
        a = np.einsum("bra,br->ba", conj_V, co_state)
        b = np.einsum("bra,br->ba", conj_V, cache.states[l])
        K = np.conj(a)[:, :, None] * phi_matrix(cache.eigenvalues[l]) * b[:, None, :]
        M = conj_V @ K @ np.swapaxes(V, -1, -2)
        raw = np.einsum("jrs,brs->bj", G, M)
        chain = remap_grad(cache.products[l]) * cache.padded_features
        grad[l] = (2.0 * np.real(raw) * chain).sum(axis=0)
        if l:
            co_state = np.einsum("bsr,bs->br", np.conj(cache.unitaries[l]), co_state)

    loss = data_loss
    if ridge:
        loss += ridge * float(np.sum(params.weights**2))
        grad += 2.0 * ridge * params.weights
    return GradientRecord(
        loss=float(loss),
        gradient=grad,
        class_scores=q,
        probabilities=cache.probabilities,
        cache=cache,
    )


def batch_loss(
    X: np.ndarray,
    labels: np.ndarray,
    params: ModelParams,
    generators: GeneratorSet,
    sample_weights: np.ndarray | None = None,
    ridge: float = 0.0,
) -> float:
    """Loss alone, via the plain forward pass (used by finite differencing)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = np.asarray(labels, dtype=int)
    if sample_weights is None:
        sample_weights = np.ones(X.shape[0])
    probs = forward_batch(X, params, generators)
    q = np.atleast_2d(readout(probs, params.readout))
    loss = weighted_cross_entropy(q, labels, np.asarray(sample_weights, dtype=float))
    if ridge:
        loss += ridge * float(np.sum(params.weights**2))
    return loss
