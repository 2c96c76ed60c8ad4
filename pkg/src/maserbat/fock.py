"""Dense linear algebra over the truncated cavity space and the cavity-qubit joint space.

States are plain complex numpy arrays. A battery state is a dim x dim density
matrix over Fock levels 0..dim-1. The joint space uses the qubit-fastest index
convention: joint index = 2n + s with n the Fock level and s in {0 = ground,
1 = excited}. With that ordering the joint state is np.kron(rho_B, rho_q) and
the qubit partial trace is a stride-2 sum.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ValidationError

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10


class Spectrum(NamedTuple):
    """Eigendecomposition with eigenvalues sorted descending.

    eigenvectors[:, k] is the eigenvector for eigenvalues[k].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def vacuum_state(dim: int) -> np.ndarray:
    if dim < 1:
        raise ValidationError(f"dimension must be positive, got {dim}")
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def number_state(dim: int, n: int) -> np.ndarray:
    """Density matrix of the Fock state |n> in a dim-level space."""
    if not 0 <= n < dim:
        raise ValidationError(f"level {n} outside 0..{dim - 1}")
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[n, n] = 1.0
    return rho


def validate_density_matrix(rho: np.ndarray, check_psd: bool = True) -> None:
    """Raise ValidationError unless rho is a square, Hermitian, unit-trace,
    positive-semidefinite matrix within the package tolerances.

    The positivity check costs a full eigendecomposition, so hot paths call
    this once at their boundary rather than per step.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm > HERMITICITY_ATOL:
        raise ValidationError(f"not Hermitian: max asymmetry {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise ValidationError(f"trace {tr} differs from 1 beyond {TRACE_ATOL}")
    if check_psd:
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < -PSD_ATOL:
            raise ValidationError(f"not positive semidefinite: min eigenvalue {lo:.3e}")


def validate_qubit_matrix(rho_q: np.ndarray) -> None:
    rho_q = np.asarray(rho_q)
    if rho_q.shape != (2, 2):
        raise ValidationError(f"qubit matrix must be 2x2, got shape {rho_q.shape}")
    if np.max(np.abs(rho_q - rho_q.conj().T)) > HERMITICITY_ATOL:
        raise ValidationError("qubit matrix not Hermitian")
    if abs(np.trace(rho_q) - 1.0) > TRACE_ATOL:
        raise ValidationError("qubit matrix trace differs from 1")


def tensor_with_qubit(rho_B: np.ndarray, rho_q: np.ndarray) -> np.ndarray:
    """Joint state rho_B (x) rho_q in the qubit-fastest ordering.

    entry[(2n+s), (2n'+s')] = rho_B[n, n'] * rho_q[s, s'].
    """
    validate_density_matrix(rho_B)
    validate_qubit_matrix(rho_q)
    return np.kron(rho_B, rho_q)


def partial_trace_qubit(rho: np.ndarray) -> np.ndarray:
    """Trace out the qubit of a joint state in the qubit-fastest ordering."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"joint state must be square, got shape {rho.shape}")
    if rho.shape[0] % 2 != 0:
        raise ValidationError(f"joint dimension {rho.shape[0]} is not even")
    return rho[0::2, 0::2] + rho[1::2, 1::2]


def hermitian_eigendecomposition(rho: np.ndarray) -> Spectrum:
    """Eigenvalues (descending) and matching eigenvectors of a Hermitian matrix.

    numpy's eigh returns ascending order; reversing gives a deterministic
    descending order with ties left in eigh's ordering.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_ATOL:
        raise ValidationError("matrix not Hermitian")
    vals, vecs = np.linalg.eigh(rho)
    return Spectrum(vals[::-1].copy(), vecs[:, ::-1].copy())


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2). For Hermitian rho this is the squared Frobenius norm."""
    return float(np.vdot(rho, rho).real)
