"""Qubit preparation, coupling constants and single Jaynes-Cummings collisions.

A collision couples the cavity to one fresh qubit through
U = exp(-i g (a sigma_+ + a' sigma_-)) with the interaction time absorbed
into g. U is block diagonal: |0,g> is left alone and each 2-plane
span{|n+1,g>, |n,e>} is rotated by the Rabi half-angle theta_n = g*sqrt(n+1)
as cos(theta_n)*I - i*sin(theta_n)*swap. Tracing the qubit out turns one
collision into a channel whose action only mixes matrix elements one step
along each axis, so a collision costs O(dim^2) instead of a dense
O(dim^3) exponential.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import TruncationOverflowError, ValidationError
from .fock import validate_qubit_matrix

TOP_LEVEL_COUNT = 5
TOP_LEVEL_LIMIT = 1e-8


@dataclass(frozen=True)
class QubitParams:
    """Qubit preparation: ground weight q and real coherency c, both in [0,1]."""

    c: float
    q: float

    def __post_init__(self):
        if not (0.0 <= self.c <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValidationError(f"qubit params out of [0,1]: c={self.c}, q={self.q}")


@dataclass(frozen=True)
class Coupling:
    """Coupling g = Q*pi/sqrt(m + epsilon); epsilon = 0 is the fine-tuned case."""

    Q: int
    m: int
    epsilon: float
    g: float


def coupling_value(Q: int, m: int, epsilon: float = 0.0) -> Coupling:
    if Q < 1 or m < 1:
        raise ValidationError(f"Q and m must be positive integers, got Q={Q}, m={m}")
    if not (-0.5 < epsilon <= 0.5):
        raise ValidationError(f"epsilon must lie in (-0.5, 0.5], got {epsilon}")
    g = Q * np.pi / np.sqrt(m + epsilon)
    return Coupling(Q=int(Q), m=int(m), epsilon=float(epsilon), g=float(g))


@dataclass(frozen=True)
class CollisionUnitary:
    """Rabi half-angles of one collision: theta[n] = g*sqrt(n+1), n = 0..dim-2."""

    dim: int
    theta: np.ndarray


def collision_unitary(dim: int, g: float) -> CollisionUnitary:
    if dim < 2:
        raise ValidationError(f"need at least 2 Fock levels, got {dim}")
    if g <= 0:
        raise ValidationError(f"coupling must be positive, got {g}")
    theta = g * np.sqrt(np.arange(1, dim, dtype=np.float64))
    theta.setflags(write=False)
    return CollisionUnitary(dim=int(dim), theta=theta)


def build_qubit_state(params: QubitParams) -> np.ndarray:
    """2x2 density matrix [[q, r], [r, 1-q]] with r = c*sqrt(q(1-q)), basis (g, e)."""
    c, q = params.c, params.q
    r = c * np.sqrt(q * (1.0 - q))
    return np.array([[q, r], [r, 1.0 - q]], dtype=np.complex128)


class CollisionCoefficients(NamedTuple):
    """Per-(unitary, qubit) channel coefficients, reusable across collisions.

    The channel output is
      out[n,n'] = A[n,n']*rho[n,n'] + B[n,n']*rho[n+1,n'+1] + C[n,n']*rho[n-1,n'-1]
                + D[n,n']*rho[n,n'-1] + E[n,n']*rho[n-1,n']
                + F[n,n']*rho[n,n'+1] + G[n,n']*rho[n+1,n']
    with out-of-range shifts dropped.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray


def _cs_vectors(dim: int, theta: np.ndarray):
    # Cg[n], Sg[n] rotate |n,g> (block n-1); Ce[n], Se[n] rotate |n,e> (block n).
    # |0,g> is untouched (Cg[0]=1, Sg[0]=0) and the block that would couple
    # |dim-1,e> past the truncation is replaced by the identity (Ce[-1]=1, Se[-1]=0).
    Cg = np.ones(dim)
    Sg = np.zeros(dim)
    Cg[1:] = np.cos(theta)
    Sg[1:] = np.sin(theta)
    Ce = np.ones(dim)
    Se = np.zeros(dim)
    Ce[:-1] = np.cos(theta)
    Se[:-1] = np.sin(theta)
    return Cg, Sg, Ce, Se


def collision_coefficients(U: CollisionUnitary, rho_q: np.ndarray) -> CollisionCoefficients:
    """Precompute the seven coefficient matrices of the collision channel."""
    validate_qubit_matrix(rho_q)
    Cg, Sg, Ce, Se = _cs_vectors(U.dim, U.theta)
    qgg, qge = rho_q[0, 0], rho_q[0, 1]
    qeg, qee = rho_q[1, 0], rho_q[1, 1]
    A = qgg * np.outer(Cg, Cg) + qee * np.outer(Ce, Ce)
    B = qgg * np.outer(Se, Se)
    C = qee * np.outer(Sg, Sg)
    D = 1j * qge * np.outer(Cg, Sg)
    E = -1j * qeg * np.outer(Sg, Cg)
    F = 1j * qeg * np.outer(Ce, Se)
    G = -1j * qge * np.outer(Se, Ce)
    return CollisionCoefficients(
        *(np.ascontiguousarray(x, dtype=np.complex128) for x in (A, B, C, D, E, F, G))
    )


@njit(cache=True)
def _collide(rho, A, B, C, D, E, F, G, out):
    n = rho.shape[0]
    for i in range(n):
        for j in range(n):
            acc = A[i, j] * rho[i, j]
            if i + 1 < n and j + 1 < n:
                acc += B[i, j] * rho[i + 1, j + 1]
            if i >= 1 and j >= 1:
                acc += C[i, j] * rho[i - 1, j - 1]
            if j >= 1:
                acc += D[i, j] * rho[i, j - 1]
            if i >= 1:
                acc += E[i, j] * rho[i - 1, j]
            if j + 1 < n:
                acc += F[i, j] * rho[i, j + 1]
            if i + 1 < n:
                acc += G[i, j] * rho[i + 1, j]
            out[i, j] = acc
    # re-symmetrize: 1e5 sequential applications would otherwise accumulate
    # floating-point asymmetry
    for i in range(n):
        for j in range(i + 1):
            v = 0.5 * (out[i, j] + np.conj(out[j, i]))
            out[i, j] = v
            out[j, i] = np.conj(v)


def top_level_population(rho: np.ndarray, count: int = TOP_LEVEL_COUNT) -> float:
    """Total population in the highest `count` Fock levels."""
    return float(np.sum(np.real(np.diag(rho))[-count:]))


def apply_collision(
    rho_B: np.ndarray,
    rho_q: np.ndarray,
    U: CollisionUnitary,
    truncation_guard: bool = True,
) -> np.ndarray:
    """One collision: partial trace of U (rho_B (x) rho_q) U' over the qubit.

    With truncation_guard on (the default, and always on inside protocol
    runs), raises TruncationOverflowError when the top five Fock levels hold
    more than 1e-8 of the population after the collision. Oracle comparisons
    on random dense states disable the guard.
    """
    rho_B = np.ascontiguousarray(rho_B, dtype=np.complex128)
    if rho_B.shape != (U.dim, U.dim):
        raise ValidationError(
            f"state shape {rho_B.shape} does not match unitary dim {U.dim}"
        )
    co = collision_coefficients(U, rho_q)
    out = np.empty_like(rho_B)
    _collide(rho_B, *co, out)
    if truncation_guard:
        top = top_level_population(out)
        if top > TOP_LEVEL_LIMIT:
            raise TruncationOverflowError(
                f"top {TOP_LEVEL_COUNT} Fock levels hold {top:.3e} > {TOP_LEVEL_LIMIT:.0e}"
                " of the population; enlarge the truncation",
                top_population=top,
            )
    return out


def chamber_boundaries(m: int, n_c: int) -> list:
    """Trapping-chamber level ranges [(0, m-1), (m, 4m-1), (4m, 16m-1), ...].

    Fine-tuned coupling g = pi/sqrt(m) makes the Rabi angle at the top of
    each range a multiple of pi, sealing it off. Chambers are generated while
    they start below the truncation n_c; the boundary level m itself belongs
    to the second chamber so that the ranges partition the levels.
    """
    if m < 1:
        raise ValidationError(f"m must be a positive integer, got {m}")
    if n_c < 1:
        raise ValidationError(f"truncation must be positive, got {n_c}")
    chambers = [(0, m - 1)]
    lo = m
    while lo < n_c:
        hi = 4 * lo - 1
        chambers.append((lo, hi))
        lo = hi + 1
    return chambers
