"""Command line front end.

One JSON config describes a run; --preset substitutes a named built-in
config and --config overrides or replaces it. Outputs are CSV and JSON files
written atomically (temp file then rename), with floats at full double
precision. Exit codes: 0 success, 1 configuration or validation error,
2 numerical failure (truncation overflow or a failed optimization).
"""
from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import presets
from .dynamics import (
    QubitParams,
    build_qubit_state,
    chamber_boundaries,
    collision_coefficients,
    collision_unitary,
    coupling_value,
    _collide,
    TOP_LEVEL_COUNT,
    TOP_LEVEL_LIMIT,
)
from .errors import (
    OptimizationError,
    TruncationOverflowError,
    ValidationError,
)
from .fock import vacuum_state
from .loss import (
    LossConfig,
    LossObjective,
    ParamVector,
    evaluate_loss,
    stability_penalty,
)
from .metrics import wigner
from .optimize import OptOptions, multi_restart
from .protocol import (
    BatchSpec,
    ProtocolSpec,
    run_protocol,
    write_populations_csv,
    write_state_json,
    write_trajectory_csv,
)

MODES = ("simulate", "optimize", "sweep", "wigner", "chambers")

DEFAULT_WIGNER_GRID = {
    "x_min": -8.0, "x_max": 8.0, "x_num": 161,
    "p_min": -8.0, "p_max": 8.0, "p_num": 161,
}


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _atomic(path: Path, writer) -> None:
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


def _write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _require(config: dict, key: str):
    if key not in config:
        raise ValidationError(f"config key {key!r} is required for mode {config.get('mode')!r}")
    return config[key]


# ---------------------------------------------------------------- builders

def build_coupling(config: dict):
    sec = _require(config, "coupling")
    if not isinstance(sec, dict):
        raise ValidationError("coupling must be an object with Q, m, epsilon")
    try:
        return coupling_value(int(sec["Q"]), int(sec["m"]), float(sec.get("epsilon", 0.0)))
    except KeyError as exc:
        raise ValidationError(f"coupling section is missing {exc}") from exc


def build_batches(config: dict) -> list:
    raw = _require(config, "batches")
    if not isinstance(raw, list):
        raise ValidationError("batches must be a list of {b, c, q} objects")
    out = []
    for entry in raw:
        try:
            out.append(
                BatchSpec(
                    b=int(entry["b"]),
                    params=QubitParams(c=float(entry["c"]), q=float(entry["q"])),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"batch entry {entry!r} is missing {exc}") from exc
    return out


def build_protocol_spec(config: dict) -> ProtocolSpec:
    return ProtocolSpec(
        coupling=build_coupling(config),
        n_c=int(_require(config, "n_c")),
        batches=build_batches(config),
        metric_stride=int(config.get("stride", 100)),
    )


def build_loss_config(config: dict, lam=None) -> LossConfig:
    sec = config.get("loss", {})
    if lam is None:
        if "lambda" not in sec:
            raise ValidationError("loss.lambda is required")
        lam = sec["lambda"]
    return LossConfig(
        lam=float(lam),
        eta_fraction=float(sec.get("eta_fraction", 0.2)),
        n_qubits=int(sec.get("n_qubits", 1000)),
    )


def build_opt_batches(config: dict):
    """Optimize-mode batches are {b, count} groups; returns (b, n_pairs)."""
    raw = _require(config, "batches")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("optimize batches must be a non-empty list of {b, count}")
    sizes = set()
    n_pairs = 0
    for entry in raw:
        try:
            sizes.add(int(entry["b"]))
            count = int(entry.get("count", 1))
        except KeyError as exc:
            raise ValidationError(f"optimize batch entry {entry!r} is missing {exc}") from exc
        if count < 1:
            raise ValidationError(f"batch count must be positive, got {count}")
        n_pairs += count
    if len(sizes) != 1:
        raise ValidationError(f"all optimized batches must share one size, got {sorted(sizes)}")
    return sizes.pop(), n_pairs


def build_opt_options(config: dict) -> OptOptions:
    sec = config.get("optimizer", {})
    return OptOptions(
        fd_step=float(sec.get("fd_step", 1e-3)),
        max_iterations=int(sec.get("max_iterations", 200)),
        loss_tolerance=float(sec.get("loss_tolerance", 1e-8)),
        step_tolerance=float(sec.get("step_tolerance", 1e-8)),
        restarts=int(sec.get("restarts", 8)),
        seed=int(sec.get("seed", 0)),
    )


# ---------------------------------------------------------------- commands

def cmd_simulate(config: dict, outdir: Path) -> None:
    spec = build_protocol_spec(config)
    traj = run_protocol(spec)
    _atomic(outdir / "trajectory.csv", lambda p: write_trajectory_csv(traj, p))
    _atomic(outdir / "populations.csv", lambda p: write_populations_csv(traj.final_state, p))
    _atomic(outdir / "final_state.json", lambda p: write_state_json(traj.final_state, p))
    summary = {
        "mode": "simulate",
        "collisions": int(len(traj.energies) - 1),
        "final_energy": float(traj.energies[-1]),
        "final_ergotropy": float(traj.ergotropies[-1]),
        "final_purity": float(traj.purities[-1]),
        "top_level_max": float(traj.top_level_max),
        "config": config,
    }
    _atomic(outdir / "summary.json", lambda p: _write_json(summary, p))


def _selftest_objective(vec) -> float:
    # convex bowl with its minimum at 0.3 per coordinate
    v = np.asarray(vec, dtype=float)
    return float(np.sum((v - 0.3) ** 2))


def _optimize_core(config: dict, jobs: int) -> dict:
    opts = build_opt_options(config)
    if config.get("objective", "loss") == "selftest":
        result = multi_restart(_selftest_objective, 2, opts, jobs=jobs)
        return {"result": result, "selftest": True}
    coupling = build_coupling(config)
    n_c = int(_require(config, "n_c"))
    b, n_pairs = build_opt_batches(config)
    lcfg = build_loss_config(config)
    if b * n_pairs != lcfg.n_qubits:
        raise ValidationError(
            f"batches give {b * n_pairs} collisions but loss.n_qubits is {lcfg.n_qubits}"
        )
    objective = LossObjective(coupling=coupling, n_c=n_c, config=lcfg, b=b)
    result = multi_restart(objective, 2 * n_pairs, opts, jobs=jobs)
    best = ParamVector.from_vector(result.best_params, b)
    loss_val, traj = evaluate_loss(best, coupling, n_c, lcfg)
    penalty = stability_penalty(traj.energies, lcfg)
    return {
        "result": result,
        "selftest": False,
        "best": best,
        "loss": loss_val,
        "trajectory": traj,
        "penalty": penalty,
        "final_ergotropy": float(traj.ergotropies[-1]),
    }


def _optimum_doc(core: dict, config: dict) -> dict:
    result = core["result"]
    doc = {
        "params": [float(v) for v in result.best_params],
        "loss": float(result.best_loss),
        "loss_history": [float(v) for v in result.loss_history],
        "restart_losses": [float(v) for v in result.restart_losses],
        "evaluations": int(result.evaluations),
        "reason": result.reason,
        "config": config,
    }
    if not core["selftest"]:
        doc["pairs"] = [[c, q] for c, q in core["best"].pairs]
        doc["b"] = core["best"].b
        doc["penalty"] = float(core["penalty"])
        doc["final_ergotropy"] = core["final_ergotropy"]
    return doc


def cmd_optimize(config: dict, outdir: Path, jobs: int) -> None:
    core = _optimize_core(config, jobs)
    _atomic(outdir / "optimum.json", lambda p: _write_json(_optimum_doc(core, config), p))
    if not core["selftest"]:
        _atomic(outdir / "trajectory.csv", lambda p: write_trajectory_csv(core["trajectory"], p))


def cmd_sweep(config: dict, outdir: Path, jobs: int) -> None:
    sec = config.get("sweep", {})
    raw = sec.get("lambdas")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("sweep.lambdas must be a non-empty list")
    try:
        lambdas = [float(v) for v in raw]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"sweep.lambdas entries must be numbers: {exc}") from exc
    if config.get("objective", "loss") == "selftest":
        raise ValidationError("sweep requires the charging loss objective")
    rows = []
    n_pairs = None
    for lam in lambdas:
        sub = copy.deepcopy(config)
        sub["mode"] = "optimize"
        sub.setdefault("loss", {})["lambda"] = float(lam)
        core = _optimize_core(sub, jobs)
        subdir = outdir / f"lam_{_fmt(lam)}"
        subdir.mkdir(parents=True, exist_ok=True)
        _atomic(subdir / "optimum.json", lambda p, c=core, s=sub: _write_json(_optimum_doc(c, s), p))
        _atomic(subdir / "trajectory.csv", lambda p, c=core: write_trajectory_csv(c["trajectory"], p))
        pairs = core["best"].pairs
        n_pairs = len(pairs)
        row = [float(lam)]
        for c, q in pairs:
            row.extend([c, q])
        row.extend([core["loss"], core["final_ergotropy"], core["penalty"]])
        rows.append(row)

    def write_csv(path):
        cols = ["lambda"]
        for i in range(n_pairs):
            cols.extend([f"c_{i}", f"q_{i}"])
        cols.extend(["loss", "final_ergotropy", "penalty"])
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    _atomic(outdir / "sweep.csv", write_csv)


def cmd_chambers(config: dict, outdir: Path) -> None:
    spec = build_protocol_spec(config)
    bounds = chamber_boundaries(spec.coupling.m, spec.n_c)
    watched = [(lo, hi) for lo, hi in bounds if hi + 1 < spec.n_c]
    U = collision_unitary(spec.n_c, spec.coupling.g)
    rho = vacuum_state(spec.n_c)
    buf = np.empty_like(rho)
    max_above = [0.0] * len(watched)
    levels = np.arange(spec.n_c, dtype=np.float64)
    k = 0
    for batch in spec.batches:
        co = collision_coefficients(U, build_qubit_state(batch.params))
        for _ in range(batch.b):
            _collide(rho, *co, buf)
            rho, buf = buf, rho
            k += 1
            pops = np.real(np.diag(rho))
            top = float(pops[-TOP_LEVEL_COUNT:].sum())
            if top > TOP_LEVEL_LIMIT:
                raise TruncationOverflowError(
                    f"collision {k}: top {TOP_LEVEL_COUNT} Fock levels hold {top:.3e}",
                    collision=k,
                    top_population=top,
                )
            for i, (_, hi) in enumerate(watched):
                above = float(pops[hi + 1:].sum())
                if above > max_above[i]:
                    max_above[i] = above
    doc = {
        "mode": "chambers",
        "m": spec.coupling.m,
        "boundaries": [[lo, hi] for lo, hi in bounds],
        "watched_boundaries": [hi for _, hi in watched],
        "max_population_above": max_above,
        "trapped": [v <= 1e-10 for v in max_above],
        "collisions": k,
        "final_energy": float(np.real(np.diag(rho)) @ levels),
        "config": config,
    }
    _atomic(outdir / "chambers.json", lambda p: _write_json(doc, p))


def cmd_wigner(config: dict, outdir: Path) -> None:
    n_c = int(_require(config, "n_c"))
    raw_batches = config.get("batches") or []
    if raw_batches:
        traj = run_protocol(build_protocol_spec(config))
        state = traj.final_state
    else:
        state = vacuum_state(n_c)
    grid = {**DEFAULT_WIGNER_GRID, **config.get("wigner", {})}
    xs = np.linspace(float(grid["x_min"]), float(grid["x_max"]), int(grid["x_num"]))
    ps = np.linspace(float(grid["p_min"]), float(grid["p_max"]), int(grid["p_num"]))
    wg = wigner(state, xs, ps)

    def write_csv(path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("," + ",".join(_fmt(p) for p in wg.p_values) + "\n")
            for i, x in enumerate(wg.x_values):
                fh.write(_fmt(x) + "," + ",".join(_fmt(v) for v in wg.values[i]) + "\n")

    dx = float(xs[1] - xs[0]) if xs.size > 1 else None
    dp = float(ps[1] - ps[0]) if ps.size > 1 else None
    riemann = float(wg.values.sum() * dx * dp) if dx and dp else None
    meta = {
        "mode": "wigner",
        "grid": {k: (int(v) if k.endswith("num") else float(v)) for k, v in grid.items()},
        "dx": dx,
        "dp": dp,
        "riemann_sum": riemann,
        "min_value": float(wg.values.min()),
        "max_value": float(wg.values.max()),
        "config": config,
    }
    _atomic(outdir / "wigner.csv", write_csv)
    _atomic(outdir / "wigner_meta.json", lambda p: _write_json(meta, p))


# ---------------------------------------------------------------- driver

def resolve_config(args) -> dict:
    config: dict = {}
    if args.preset:
        try:
            config = presets.get_preset(args.preset)
        except KeyError as exc:
            raise ValidationError(str(exc.args[0])) from exc
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValidationError("config file must hold a JSON object")
        # output files from a previous run carry the resolved config inside
        inner = doc.get("config")
        if isinstance(inner, dict) and "mode" in inner:
            doc = inner
        config.update(doc)
    if not config:
        raise ValidationError("provide --config <file> and/or --preset <name>")
    if args.seed is not None:
        config.setdefault("optimizer", {})["seed"] = int(args.seed)
    if args.out is not None:
        config["output_dir"] = args.out
    return config


def resolve_jobs(args) -> int:
    if args.jobs is not None:
        jobs = args.jobs
    else:
        raw = os.environ.get("MASERBAT_THREADS", "1")
        try:
            jobs = int(raw)
        except ValueError as exc:
            raise ValidationError(f"MASERBAT_THREADS must be an integer, got {raw!r}") from exc
    if jobs < 1:
        raise ValidationError(f"jobs must be at least 1, got {jobs}")
    return jobs


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maserbat",
        description="Micromaser quantum battery simulator and optimizer.",
    )
    parser.add_argument("--config", help="JSON config (a previous summary.json also works)")
    parser.add_argument("--preset", help="named built-in config; see README for the list")
    parser.add_argument("--jobs", type=int, help="worker processes (default MASERBAT_THREADS or 1)")
    parser.add_argument("--seed", type=int, help="override optimizer.seed")
    parser.add_argument("--out", help="output directory, overrides config output_dir")
    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        jobs = resolve_jobs(args)
        mode = config.get("mode")
        if mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
        outdir = Path(config.get("output_dir", "maserbat_out"))
        outdir.mkdir(parents=True, exist_ok=True)
    except ValidationError as exc:
        print(f"maserbat: error: {exc}", file=sys.stderr)
        return 1
    try:
        if mode == "simulate":
            cmd_simulate(config, outdir)
        elif mode == "optimize":
            cmd_optimize(config, outdir, jobs)
        elif mode == "sweep":
            cmd_sweep(config, outdir, jobs)
        elif mode == "wigner":
            cmd_wigner(config, outdir)
        else:
            cmd_chambers(config, outdir)
    except ValidationError as exc:
        print(f"maserbat: error: {exc}", file=sys.stderr)
        return 1
    except (TruncationOverflowError, OptimizationError) as exc:
        print(f"maserbat: numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
