"""Figures of merit: energy, ergotropy, purity, populations, Wigner function.

Energies are in units of the cavity frequency (omega = 1) with the ground
level at zero, so the Fock level index is the level energy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ValidationError
from .fock import HERMITICITY_ATOL

ERGOTROPY_CLAMP = 1e-10


def energy(rho: np.ndarray) -> float:
    """Mean photon number sum_n n*rho[n,n]."""
    pops = np.real(np.diag(rho))
    return float(pops @ np.arange(pops.size))


def passive_energy(rho: np.ndarray) -> float:
    """Energy after the optimal work extraction.

    The passive state pairs eigenvalues sorted descending with levels
    ascending; only the spectrum matters.
    """
    vals = np.linalg.eigvalsh(rho)  # ascending
    return float(vals[::-1] @ np.arange(vals.size))


def ergotropy(rho: np.ndarray) -> float:
    """Maximal unitarily extractable work, energy minus passive energy."""
    w = energy(rho) - passive_energy(rho)
    if -ERGOTROPY_CLAMP <= w < 0.0:
        return 0.0
    return w


def populations(rho: np.ndarray) -> np.ndarray:
    """Diagonal of the state, as real probabilities."""
    return np.real(np.diag(rho)).copy()


def cotangent_populations(q: float, m: int, dim: int | None = None) -> np.ndarray:
    """Populations of the coherent-pumping steady state below the chamber edge.

    Level ratios follow p_n / p_{n-1} = ((1-q)/q) * cot^2(pi*sqrt(n)/(2*sqrt(m)))
    for n < m; the result is normalized and zero at and above level m. The
    cumulative products are formed in log space, which keeps extreme q values
    from overflowing.
    """
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must lie strictly inside (0, 1), got {q}")
    if m < 2:
        raise ValidationError(f"m must be at least 2, got {m}")
    out_dim = m if dim is None else int(dim)
    if out_dim < m:
        raise ValidationError(f"dim {out_dim} cannot hold the m={m} support")
    n = np.arange(1, m)
    cot = 1.0 / np.tan(np.pi * np.sqrt(n) / (2.0 * np.sqrt(m)))
    log_ratios = np.log((1.0 - q) / q) + 2.0 * np.log(cot)
    log_p = np.concatenate(([0.0], np.cumsum(log_ratios)))
    log_p -= log_p.max()
    p = np.exp(log_p)
    probs = np.zeros(out_dim)
    probs[:m] = p / p.sum()
    return probs


@dataclass(frozen=True)
class WignerGrid:
    """W(x, p) sampled on a cartesian grid; values[i, j] = W(x_values[i], p_values[j])."""

    x_values: np.ndarray
    p_values: np.ndarray
    values: np.ndarray


@njit(cache=True)
def _wigner_kernel(rho, xs, ps, out):
    # Iterative ascent through the Fock matrix elements per grid point. Row m
    # holds the displaced-overlap terms <m|D(2a)|n> up one row at a time; the
    # pair of work rows keeps memory flat regardless of the cutoff.
    dim = rho.shape[0]
    row0 = np.empty(dim, dtype=np.complex128)
    row1 = np.empty(dim, dtype=np.complex128)
    sq = np.sqrt(np.arange(dim).astype(np.float64))
    inv_pi = 1.0 / np.pi
    for ix in range(xs.size):
        x = xs[ix]
        for jp in range(ps.size):
            p = ps[jp]
            a2 = complex(np.sqrt(2.0) * x, np.sqrt(2.0) * p)  # 2*alpha
            row0[0] = np.exp(-(x * x + p * p)) * inv_pi
            w = rho[0, 0].real * row0[0].real
            for n in range(1, dim):
                row0[n] = a2 * row0[n - 1] / sq[n]
                w += 2.0 * (rho[0, n] * row0[n]).real
            for m in range(1, dim):
                row1[m] = (np.conj(a2) * row0[m] - sq[m] * row0[m - 1]) / sq[m]
                w += (rho[m, m] * row1[m]).real
                for n in range(m + 1, dim):
                    row1[n] = (a2 * row1[n - 1] - sq[m] * row0[n - 1]) / sq[n]
                    w += 2.0 * (rho[m, n] * row1[n]).real
                row0, row1 = row1, row0
            out[ix, jp] = w


def wigner(rho: np.ndarray, x_values, p_values) -> WignerGrid:
    """Wigner function with the unit-integral convention.

    integral W dx dp = 1 and the vacuum gives W(x,p) = exp(-x^2-p^2)/pi, so
    the vacuum peak is 1/pi and the single photon dips to -1/pi at the origin.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"state must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_ATOL:
        raise ValidationError("state not Hermitian")
    xs = np.ascontiguousarray(x_values, dtype=np.float64)
    ps = np.ascontiguousarray(p_values, dtype=np.float64)
    if xs.ndim != 1 or ps.ndim != 1 or xs.size == 0 or ps.size == 0:
        raise ValidationError("x_values and p_values must be non-empty 1d arrays")
    values = np.empty((xs.size, ps.size), dtype=np.float64)
    _wigner_kernel(rho, xs, ps, values)
    return WignerGrid(x_values=xs, p_values=ps, values=values)
