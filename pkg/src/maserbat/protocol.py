"""Charging schedules: batches of identical qubits fired at a vacuum-initialized cavity.

A protocol is an ordered list of batches, each sending b copies of one qubit
preparation. Energy is recorded after every collision; ergotropy and purity
(which need a full eigendecomposition) are sampled every metric_stride
collisions, at batch boundaries and at the end. Batch boundaries are always
sampled so that extending a finished trajectory reproduces a single longer
run bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    TOP_LEVEL_COUNT,
    TOP_LEVEL_LIMIT,
    Coupling,
    QubitParams,
    _collide,
    build_qubit_state,
    collision_coefficients,
    collision_unitary,
    top_level_population,
)
from .errors import TruncationOverflowError, ValidationError
from .fock import purity, vacuum_state, validate_density_matrix
from .metrics import energy, ergotropy


@dataclass(frozen=True)
class BatchSpec:
    b: int
    params: QubitParams

    def __post_init__(self):
        if self.b < 1:
            raise ValidationError(f"batch size must be at least 1, got {self.b}")


@dataclass(frozen=True)
class ProtocolSpec:
    coupling: Coupling
    n_c: int
    batches: list
    metric_stride: int = 100

    def __post_init__(self):
        if not self.batches:
            raise ValidationError("protocol needs at least one batch")
        if self.metric_stride < 1:
            raise ValidationError(f"metric_stride must be positive, got {self.metric_stride}")
        # the truncation must hold at least the first two chambers
        if self.n_c < 4 * self.coupling.m:
            raise ValidationError(
                f"truncation {self.n_c} smaller than 4m = {4 * self.coupling.m}"
            )

    @property
    def total_collisions(self) -> int:
        return sum(batch.b for batch in self.batches)


@dataclass
class Trajectory:
    """Per-collision energies plus strided ergotropy/purity samples.

    energies[k] is the energy after k collisions (index 0 is the initial
    state). sampled_k lists the collision counts at which ergotropies and
    purities were evaluated. top_level_max is the largest population seen in
    the top Fock levels over the run, the truncation monitor's high-water mark.
    """

    energies: np.ndarray
    sampled_k: np.ndarray
    ergotropies: np.ndarray
    purities: np.ndarray
    final_state: np.ndarray
    top_level_max: float = 0.0


def trajectory_from_state(state: np.ndarray) -> Trajectory:
    """Zero-collision trajectory anchored at an arbitrary valid state.

    Lets extend_protocol continue from states other than the vacuum.
    """
    validate_density_matrix(state)
    state = np.ascontiguousarray(state, dtype=np.complex128)
    return Trajectory(
        energies=np.array([energy(state)]),
        sampled_k=np.array([0], dtype=np.int64),
        ergotropies=np.array([ergotropy(state)]),
        purities=np.array([purity(state)]),
        final_state=state.copy(),
        top_level_max=top_level_population(state),
    )


def _simulate(rho, spec: ProtocolSpec, batches, k_start: int, k_final: int):
    """Advance rho through `batches`, collision counter starting at k_start.

    Returns (rho, energies, sampled_k, ergotropies, purities, top_max) where
    energies holds one entry per collision performed here.
    """
    U = collision_unitary(spec.n_c, spec.coupling.g)
    levels = np.arange(spec.n_c, dtype=np.float64)
    buf = np.empty_like(rho)
    energies = []
    sampled_k = []
    ergotropies = []
    purities = []
    top_max = 0.0
    k = k_start
    for batch in batches:
        co = collision_coefficients(U, build_qubit_state(batch.params))
        batch_end = k + batch.b
        for _ in range(batch.b):
            _collide(rho, *co, buf)
            rho, buf = buf, rho
            k += 1
            pops = np.real(np.diag(rho))
            energies.append(float(pops @ levels))
            top = float(pops[-TOP_LEVEL_COUNT:].sum())
            if top > top_max:
                top_max = top
            if top > TOP_LEVEL_LIMIT:
                raise TruncationOverflowError(
                    f"collision {k}: top {TOP_LEVEL_COUNT} Fock levels hold "
                    f"{top:.3e} > {TOP_LEVEL_LIMIT:.0e} of the population",
                    collision=k,
                    top_population=top,
                )
            if k % spec.metric_stride == 0 or k == batch_end or k == k_final:
                sampled_k.append(k)
                ergotropies.append(ergotropy(rho))
                purities.append(purity(rho))
    return rho, energies, sampled_k, ergotropies, purities, top_max


def run_protocol(spec: ProtocolSpec) -> Trajectory:
    """Run the full schedule from the vacuum."""
    rho = vacuum_state(spec.n_c)
    k_final = spec.total_collisions
    first = [energy(rho)]
    rho, energies, sampled_k, ergotropies, purities, top_max = _simulate(
        rho, spec, spec.batches, 0, k_final
    )
    return Trajectory(
        energies=np.array(first + energies),
        sampled_k=np.array([0] + sampled_k, dtype=np.int64),
        ergotropies=np.array([0.0] + ergotropies),
        purities=np.array([1.0] + purities),
        final_state=rho,
        top_level_max=top_max,
    )


def extend_protocol(traj: Trajectory, extra: BatchSpec, spec: ProtocolSpec) -> Trajectory:
    """Continue a finished trajectory with one more batch.

    Running A followed by B in one protocol and extending run(A) by B produce
    bitwise identical trajectories: the collision counter continues globally,
    so the stride sampling pattern is unchanged, and batch ends are sampled
    points in both.
    """
    dim = traj.final_state.shape[0]
    if dim != spec.n_c:
        raise ValidationError(f"state dimension {dim} does not match spec n_c {spec.n_c}")
    k_start = len(traj.energies) - 1
    rho = traj.final_state.copy()
    rho, energies, sampled_k, ergotropies, purities, top_max = _simulate(
        rho, spec, [extra], k_start, k_start + extra.b
    )
    return Trajectory(
        energies=np.concatenate([traj.energies, energies]),
        sampled_k=np.concatenate([traj.sampled_k, np.asarray(sampled_k, dtype=np.int64)]),
        ergotropies=np.concatenate([traj.ergotropies, ergotropies]),
        purities=np.concatenate([traj.purities, purities]),
        final_state=rho,
        top_level_max=max(traj.top_level_max, top_max),
    )


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with header k,energy,ergotropy,purity; unsampled cells stay empty."""
    sampled = {int(k): i for i, k in enumerate(traj.sampled_k)}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("k,energy,ergotropy,purity\n")
        for k, e in enumerate(traj.energies):
            i = sampled.get(k)
            if i is None:
                fh.write(f"{k},{_fmt(e)},,\n")
            else:
                fh.write(f"{k},{_fmt(e)},{_fmt(traj.ergotropies[i])},{_fmt(traj.purities[i])}\n")


def write_populations_csv(rho: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("n,prob\n")
        for n, prob in enumerate(np.real(np.diag(rho))):
            fh.write(f"{n},{_fmt(prob)}\n")


def state_to_json(rho: np.ndarray) -> dict:
    """Row-major [re, im] pairs plus the dimension."""
    entries = [[float(v.real), float(v.imag)] for v in rho.ravel()]
    return {"dim": int(rho.shape[0]), "entries": entries}


def write_state_json(rho: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_json(rho), fh)
        fh.write("\n")


def load_state_json(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    dim = int(doc["dim"])
    flat = np.array([complex(re, im) for re, im in doc["entries"]])
    if flat.size != dim * dim:
        raise ValidationError(f"state file has {flat.size} entries for dim {dim}")
    return flat.reshape(dim, dim)
