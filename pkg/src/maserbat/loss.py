"""Composite charging loss: ergotropy-coherency-population product plus stability penalty.

The first term rewards a large final ergotropy W while favouring excited
(low q) and weakly coherent (low c) qubit streams, normalized so it is
bounded by the smallest of the three factors. The second term penalizes
terminal energy drift: the sum of absolute backward differences of the
energy over the trailing window of collisions, weighted by lambda.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Coupling, QubitParams
from .errors import ValidationError
from .metrics import ergotropy
from .protocol import BatchSpec, ProtocolSpec, run_protocol


@dataclass(frozen=True)
class LossConfig:
    """lam is the stability weight (the JSON key is "lambda"); eta_fraction the
    trailing fraction of the n_qubits collisions inside the penalty window."""

    lam: float
    eta_fraction: float
    n_qubits: int

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError(f"lambda must be nonnegative, got {self.lam}")
        if not 0.0 < self.eta_fraction <= 1.0:
            raise ValidationError(f"eta_fraction must lie in (0, 1], got {self.eta_fraction}")
        if self.n_qubits < 1:
            raise ValidationError(f"n_qubits must be positive, got {self.n_qubits}")
        if math.floor(self.eta_fraction * self.n_qubits) < 1:
            raise ValidationError(
                f"penalty window floor({self.eta_fraction} * {self.n_qubits}) is empty"
            )


@dataclass(frozen=True)
class ParamVector:
    """Ordered (c, q) pairs, one per batch, all batches of size b."""

    pairs: tuple
    b: int

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((float(c), float(q)) for c, q in self.pairs))
        if not self.pairs:
            raise ValidationError("ParamVector needs at least one (c, q) pair")
        if self.b < 1:
            raise ValidationError(f"batch size must be positive, got {self.b}")
        for c, q in self.pairs:
            if not (0.0 <= c <= 1.0 and 0.0 <= q <= 1.0):
                raise ValidationError(f"parameters out of [0,1]: ({c}, {q})")

    def to_vector(self) -> np.ndarray:
        """Flatten to (c1, q1, c2, q2, ...) for the optimizer."""
        return np.array([v for pair in self.pairs for v in pair])

    @classmethod
    def from_vector(cls, vec, b: int) -> "ParamVector":
        vec = np.asarray(vec, dtype=float)
        if vec.size % 2 != 0:
            raise ValidationError(f"parameter vector length {vec.size} is odd")
        return cls(pairs=tuple(zip(vec[0::2], vec[1::2])), b=int(b))


def penalty_window(config: LossConfig) -> int:
    """Number of trailing collisions inside the stability window, ceil(eta * n)."""
    return math.ceil(config.eta_fraction * config.n_qubits)


def stability_penalty(energies, config: LossConfig) -> float:
    """Sum of |E_k - E_{k-1}| over the trailing window. lambda is NOT applied
    here; evaluate_loss scales it."""
    energies = np.asarray(energies, dtype=float)
    if len(energies) != config.n_qubits + 1:
        raise ValidationError(
            f"expected {config.n_qubits + 1} energies (one per collision plus the "
            f"initial state), got {len(energies)}"
        )
    window = penalty_window(config)
    if window < 1:
        raise ValidationError("stability window is empty")
    return float(np.abs(np.diff(energies))[-window:].sum())


def composite_term(W: float, c_bar: float, q_bar: float) -> float:
    """First loss term, -(W (1-c)(1-q)) / (W + (1-c) + (1-q)).

    All three factors are nonnegative, so the denominator vanishes only when
    every factor is zero; the term is defined as 0 there (the numerator
    vanishes faster along any path).
    """
    fc = 1.0 - c_bar
    fq = 1.0 - q_bar
    denom = W + fc + fq
    if denom == 0.0:
        return 0.0
    return -(W * fc * fq) / denom


def mean_params(params: ParamVector, batch_sizes=None):
    """Batch-size weighted means (c_bar, q_bar).

    ParamVector carries one common batch size, so the default is the plain
    arithmetic mean; explicit batch_sizes cover unequal batches.
    """
    pairs = np.asarray(params.pairs, dtype=float)
    if batch_sizes is None:
        weights = np.full(len(pairs), float(params.b))
    else:
        weights = np.asarray(batch_sizes, dtype=float)
        if weights.size != len(pairs) or np.any(weights <= 0):
            raise ValidationError("batch_sizes must be positive, one per pair")
    weights = weights / weights.sum()
    c_bar, q_bar = weights @ pairs
    return float(c_bar), float(q_bar)


def evaluate_loss(
    params: ParamVector, coupling: Coupling, n_c: int, config: LossConfig
) -> tuple:
    """Loss of a parameter vector, along with the trajectory that produced it.

    Runs len(pairs) batches of b collisions from the vacuum (which must total
    config.n_qubits), takes W as the final ergotropy and adds the
    lambda-weighted stability penalty.
    """
    total = len(params.pairs) * params.b
    if total != config.n_qubits:
        raise ValidationError(
            f"{len(params.pairs)} batches of {params.b} give {total} collisions, "
            f"config expects {config.n_qubits}"
        )
    batches = [BatchSpec(b=params.b, params=QubitParams(c=c, q=q)) for c, q in params.pairs]
    spec = ProtocolSpec(
        coupling=coupling, n_c=n_c, batches=batches, metric_stride=config.n_qubits
    )
    traj = run_protocol(spec)
    W = ergotropy(traj.final_state)
    c_bar, q_bar = mean_params(params)
    loss = composite_term(W, c_bar, q_bar) + config.lam * stability_penalty(
        traj.energies, config
    )
    return float(loss), traj


@dataclass(frozen=True)
class LossObjective:
    """Picklable vector-in, scalar-out wrapper around evaluate_loss.

    The optimizer works on flat vectors (c1, q1, c2, q2, ...); worker
    processes need the objective to survive pickling, so this is a frozen
    dataclass rather than a closure.
    """

    coupling: Coupling
    n_c: int
    config: LossConfig
    b: int

    def __call__(self, vec) -> float:
        params = ParamVector.from_vector(vec, self.b)
        loss, _ = evaluate_loss(params, self.coupling, self.n_c, self.config)
        return loss
