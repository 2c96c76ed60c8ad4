import numpy as np
import pytest

from maserbat import (
    BatchSpec,
    ProtocolSpec,
    QubitParams,
    ValidationError,
    coupling_value,
    energy,
    extend_protocol,
    load_state_json,
    run_protocol,
    trajectory_from_state,
    vacuum_state,
    write_populations_csv,
    write_state_json,
    write_trajectory_csv,
)
from oracles import random_density_matrix

CPL4 = coupling_value(1, 4)


def small_spec(batches, n_c=16, stride=25):
    return ProtocolSpec(coupling=CPL4, n_c=n_c, batches=batches, metric_stride=stride)


def test_spec_validation():
    with pytest.raises(ValidationError):
        BatchSpec(b=0, params=QubitParams(0, 0))
    with pytest.raises(ValidationError):
        small_spec([])
    with pytest.raises(ValidationError):
        small_spec([BatchSpec(b=1, params=QubitParams(0, 0))], stride=0)
    with pytest.raises(ValidationError):
        small_spec([BatchSpec(b=1, params=QubitParams(0, 0))], n_c=15)
    spec = small_spec([BatchSpec(b=3, params=QubitParams(0, 0)), BatchSpec(b=4, params=QubitParams(1, 1))])
    assert spec.total_collisions == 7


def test_vacuum_start_row():
    traj = run_protocol(small_spec([BatchSpec(b=10, params=QubitParams(0.5, 0.2))]))
    assert traj.energies[0] == 0.0
    assert traj.sampled_k[0] == 0
    assert traj.ergotropies[0] == 0.0
    assert traj.purities[0] == 1.0


def test_deterministic_bitwise():
    spec = small_spec([BatchSpec(b=120, params=QubitParams(0.7, 0.3))])
    a = run_protocol(spec)
    b = run_protocol(spec)
    assert np.array_equal(a.energies, b.energies)
    assert np.array_equal(a.final_state, b.final_state)
    assert np.array_equal(a.ergotropies, b.ergotropies)


def test_ground_stream_stays_vacuum():
    traj = run_protocol(small_spec([BatchSpec(b=50, params=QubitParams(0, 1))]))
    assert np.all(traj.energies == 0.0)
    assert np.array_equal(traj.final_state, vacuum_state(16))
    assert np.all(traj.purities == 1.0)


def test_incoherent_excited_charging_is_monotone():
    traj = run_protocol(small_spec([BatchSpec(b=300, params=QubitParams(0, 0))]))
    assert np.all(np.diff(traj.energies) >= -1e-12)
    assert traj.energies[-1] > 1.0


def test_fine_tuned_energy_stays_in_first_chamber():
    # theta_3 is an exact multiple of pi, so energy cannot pass m-1 = 3
    traj = run_protocol(small_spec([BatchSpec(b=500, params=QubitParams(1, 0.5))], stride=100))
    assert np.max(traj.energies) <= 3.0 + 1e-8


def test_lengths_and_sampling():
    spec = small_spec(
        [BatchSpec(b=30, params=QubitParams(0.2, 0.4)), BatchSpec(b=47, params=QubitParams(0.8, 0.1))],
        stride=25,
    )
    traj = run_protocol(spec)
    assert len(traj.energies) == 78
    ks = traj.sampled_k.tolist()
    assert ks == sorted(set(ks))
    assert ks[0] == 0 and ks[-1] == 77
    assert 30 in ks  # batch boundary
    for k in (25, 50, 75):
        assert k in ks
    assert len(traj.ergotropies) == len(ks) == len(traj.purities)
    assert traj.top_level_max < 1e-8


def test_extend_matches_single_run():
    b1 = BatchSpec(b=40, params=QubitParams(0.3, 0.1))
    b2 = BatchSpec(b=55, params=QubitParams(0.6, 0.2))
    full = run_protocol(small_spec([b1, b2], stride=30))
    part = run_protocol(small_spec([b1], stride=30))
    ext = extend_protocol(part, b2, small_spec([b1, b2], stride=30))
    assert np.array_equal(full.energies, ext.energies)
    assert np.array_equal(full.sampled_k, ext.sampled_k)
    assert np.array_equal(full.ergotropies, ext.ergotropies)
    assert np.array_equal(full.purities, ext.purities)
    assert np.array_equal(full.final_state, ext.final_state)


def test_extend_by_ground_qubits_appends_unchanged_energy():
    base = run_protocol(small_spec([BatchSpec(b=20, params=QubitParams(0, 1))]))
    ext = extend_protocol(base, BatchSpec(b=5, params=QubitParams(0, 1)), small_spec([BatchSpec(b=1, params=QubitParams(0, 1))]))
    assert np.all(ext.energies == 0.0)
    assert len(ext.energies) == 26


def test_extend_dimension_mismatch():
    base = run_protocol(small_spec([BatchSpec(b=5, params=QubitParams(0, 0))]))
    wrong = ProtocolSpec(coupling=CPL4, n_c=20, batches=[BatchSpec(b=1, params=QubitParams(0, 0))])
    with pytest.raises(ValidationError):
        extend_protocol(base, BatchSpec(b=1, params=QubitParams(0, 0)), wrong)


def test_trajectory_from_state_anchors_extension():
    rng = np.random.default_rng(30)
    rho = np.zeros((16, 16), dtype=complex)
    rho[:3, :3] = random_density_matrix(rng, 3)  # trapped below the m=4 boundary
    base = trajectory_from_state(rho)
    assert base.energies[0] == pytest.approx(energy(rho))
    assert base.sampled_k.tolist() == [0]
    ext = extend_protocol(base, BatchSpec(b=12, params=QubitParams(0.5, 0.5)), small_spec([BatchSpec(b=1, params=QubitParams(0, 0))]))
    assert len(ext.energies) == 13
    assert abs(np.trace(ext.final_state).real - 1.0) < 1e-10


def test_trajectory_csv_layout(tmp_path):
    spec = small_spec([BatchSpec(b=60, params=QubitParams(0.4, 0.2))], stride=25)
    traj = run_protocol(spec)
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,energy,ergotropy,purity"
    assert len(lines) == 62
    row0 = lines[1].split(",")
    assert row0 == ["0", "0", "0", "1"]
    row7 = lines[8].split(",")
    assert row7[0] == "7" and row7[2] == "" and row7[3] == ""
    assert float(row7[1]) == traj.energies[7]  # 17 significant digits round-trip
    row25 = lines[26].split(",")
    assert float(row25[2]) == traj.ergotropies[1]
    assert float(row25[3]) == traj.purities[1]
    row_last = lines[-1].split(",")
    assert row_last[0] == "60" and row_last[2] != ""


def test_populations_csv(tmp_path):
    traj = run_protocol(small_spec([BatchSpec(b=10, params=QubitParams(0, 0))]))
    path = tmp_path / "populations.csv"
    write_populations_csv(traj.final_state, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,prob"
    assert len(lines) == 17
    probs = [float(line.split(",")[1]) for line in lines[1:]]
    assert sum(probs) == pytest.approx(1.0, abs=1e-10)
    # 17 significant digits reload to the exact doubles
    assert np.array_equal(probs, np.real(np.diag(traj.final_state)))


def test_state_json_roundtrip(tmp_path):
    rng = np.random.default_rng(31)
    rho = random_density_matrix(rng, 9)
    path = tmp_path / "state.json"
    write_state_json(rho, path)
    back = load_state_json(path)
    assert back.shape == (9, 9)
    assert np.array_equal(back, rho)


def test_state_json_rejects_bad_length(tmp_path):
    path = tmp_path / "state.json"
    path.write_text('{"dim": 3, "entries": [[1.0, 0.0]]}')
    with pytest.raises(ValidationError):
        load_state_json(path)


def test_overflow_reports_collision_index():
    from maserbat import TruncationOverflowError

    spec = ProtocolSpec(
        coupling=coupling_value(1, 1, 0.4),
        n_c=6,
        batches=[BatchSpec(b=100, params=QubitParams(0, 0))],
        metric_stride=10,
    )
    with pytest.raises(TruncationOverflowError) as err:
        run_protocol(spec)
    assert err.value.collision is not None and err.value.collision >= 1
