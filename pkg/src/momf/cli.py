"""Command-line front end: configured optimization runs, the benchmark
harness, and oracle-front exports.

Commands:
    run    execute configured trials, writing per-trial observation CSVs
    bench  run algorithms x trials, emit hv_trace.csv / report.json /
           fidelity_hist.csv (recomputable offline with --from-logs)
    front  sample a problem's empirical Pareto front at target fidelity

The ``MOMF_OUT_DIR`` environment variable overrides the configured output
directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import bench as bench_mod
from . import engine, gp, problems
from .engine import ALGORITHMS, Dataset, IterationInfo, LoopConfig, Observation, TrialRecord

_CONFIG_KEYS = {
    "problem": str,
    "algorithm": (str, list),
    "cost_coefficient": (int, float),
    "total_budget": (int, float, dict),
    "trials": int,
    "seed": int,
    "seeds": list,
    "init_count": (int, dict),
    "mc_samples": int,
    "restarts": int,
    "candidate_pool": int,
    "fid_obj": str,
    "max_iterations": (int, dict, type(None)),
    "output_dir": str,
    "threshold": (int, float),
    "bins": int,
    "trace_points": int,
    "trace_seed": int,
    "oracle_points": int,
    "oracle_seed": int,
}

_DEFAULTS = {
    "trials": 10,
    "seed": 0,
    "init_count": 5,
    "mc_samples": 128,
    "restarts": 10,
    "candidate_pool": 1024,
    "fid_obj": "linear",
    "max_iterations": None,
    "output_dir": "momf_out",
    "threshold": 0.9,
    "bins": 10,
    "trace_points": 10_000,
    "trace_seed": 0,
    "oracle_points": 10_000,
    "oracle_seed": 0,
}


class ConfigError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{float(v):.9g}"


def _round9(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        expected = _CONFIG_KEYS[key]
        if not isinstance(value, expected):
            raise ConfigError(f"{path}: field {key!r} has wrong type {type(value).__name__}")
    for key in ("problem", "algorithm", "total_budget"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required field {key!r}")
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    if cfg["problem"] not in problems.PROBLEM_NAMES:
        raise ConfigError(f"{path}: field 'problem' names unknown problem {cfg['problem']!r}")
    algorithms = cfg["algorithm"] if isinstance(cfg["algorithm"], list) else [cfg["algorithm"]]
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ConfigError(f"{path}: field 'algorithm' names unknown algorithm {alg!r}")
    cfg["algorithm"] = algorithms
    if isinstance(cfg["total_budget"], dict):
        missing = [alg for alg in algorithms if alg not in cfg["total_budget"]]
        if missing:
            raise ConfigError(f"{path}: field 'total_budget' lacks entries for {missing}")
    if cfg["fid_obj"] not in ("linear", "tanh"):
        raise ConfigError(f"{path}: field 'fid_obj' must be 'linear' or 'tanh'")
    if "seeds" in raw and len(raw["seeds"]) != cfg["trials"]:
        raise ConfigError(f"{path}: field 'seeds' must list one seed per trial")
    return cfg


def _per_alg(value, alg: str, default=None):
    if isinstance(value, dict):
        return value.get(alg, default)
    return value


def _trial_seed(cfg: dict, index: int) -> int:
    if "seeds" in cfg:
        return int(cfg["seeds"][index])
    return int(np.random.SeedSequence((cfg["seed"], index)).generate_state(1)[0])


def _loop_config(cfg: dict, alg: str, seed: int) -> LoopConfig:
    return LoopConfig(
        algorithm=alg,
        total_budget=float(_per_alg(cfg["total_budget"], alg)),
        init_count=int(_per_alg(cfg["init_count"], alg, _DEFAULTS["init_count"])),
        mc_samples=cfg["mc_samples"],
        restarts=cfg["restarts"],
        candidate_pool=cfg["candidate_pool"],
        fid_obj=cfg["fid_obj"],
        seed=seed,
        max_iterations=_per_alg(cfg["max_iterations"], alg, None),
    )


def _out_dir(cfg: dict) -> Path:
    out = os.environ.get("MOMF_OUT_DIR") or cfg["output_dir"]
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def write_observations(path: Path, trial_index: int, record: TrialRecord, problem) -> None:
    d = problem.input_dim
    k = problem.objective_count
    header = (
        ["trial", "iter"]
        + [f"x{i + 1}" for i in range(d)]
        + ["s"]
        + [f"y{i + 1}" for i in range(k)]
        + ["cost", "cum_cost"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for obs in record.dataset.observations:
            writer.writerow(
                [trial_index, obs.iteration]
                + [_fmt(v) for v in obs.x]
                + [_fmt(obs.s)]
                + [_fmt(v) for v in obs.y_raw]
                + [_fmt(obs.cost), _fmt(obs.cumulative_cost)]
            )


def read_observations(path: Path, problem) -> tuple[int, Dataset]:
    d = problem.input_dim
    k = problem.objective_count
    data = Dataset()
    trial_index = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = 2 + d + 1 + k + 2
        if len(header) != expected:
            raise ConfigError(f"{path}: unexpected observation column count")
        for row in reader:
            trial_index = int(row[0])
            x = np.array([float(v) for v in row[2 : 2 + d]])
            s = float(row[2 + d])
            y_raw = np.array([float(v) for v in row[3 + d : 3 + d + k]])
            cost = float(row[3 + d + k])
            cum = float(row[4 + d + k])
            data.append(
                Observation(x, s, y_raw, problem.normalize(y_raw), cost, cum, int(row[1]))
            )
    return trial_index, data


def write_params(path: Path, record: TrialRecord) -> None:
    payload = []
    for info in record.iterations:
        payload.append(
            {
                "index": info.index,
                "x": list(info.x),
                "s": info.s,
                "acq_value": info.acq_value,
                "cost": info.cost,
                "cum_cost": info.cumulative_cost,
                "gp": [
                    {
                        "lengthscales": list(fp.kernel.lengthscales),
                        "signal_variance": fp.kernel.signal_variance,
                        "noise_variance": fp.kernel.noise_variance,
                        "y_shift": fp.y_shift,
                        "y_scale": fp.y_scale,
                    }
                    for fp in info.gp_params
                ],
            }
        )
    path.write_text(json.dumps(_round9(payload), indent=1))


def read_params(path: Path) -> list[IterationInfo]:
    items = json.loads(path.read_text())
    infos = []
    for item in items:
        fitted = tuple(
            engine.FittedParams(
                gp.KernelParams(
                    np.array(entry["lengthscales"]),
                    entry["signal_variance"],
                    entry["noise_variance"],
                ),
                entry["y_shift"],
                entry["y_scale"],
            )
            for entry in item["gp"]
        )
        infos.append(
            IterationInfo(
                item["index"],
                np.array(item["x"]),
                item["s"],
                item["acq_value"],
                item["cost"],
                item["cum_cost"],
                fitted,
            )
        )
    return infos


def load_trial(out: Path, prefix: str, problem, cfg: dict, alg: str, seed: int) -> TrialRecord:
    _, dataset = read_observations(out / f"{prefix}_observations.csv", problem)
    iterations = read_params(out / f"{prefix}_params.json")
    return TrialRecord(problem.name, _loop_config(cfg, alg, seed), dataset, iterations)


# ---------------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------------

def _run_trial_job(args: tuple) -> dict:
    cfg, alg, trial_index, out_dir = args
    seed = _trial_seed(cfg, trial_index)
    problem = problems.get_problem(cfg["problem"], cfg.get("cost_coefficient"))
    t0 = time.time()
    prefix = f"{alg}_trial_{trial_index:03d}"
    entry = {
        "trial": trial_index,
        "algorithm": alg,
        "seed": seed,
        "observations": f"{prefix}_observations.csv",
        "params": f"{prefix}_params.json",
    }
    try:
        record = engine.run(problem, _loop_config(cfg, alg, seed))
        out = Path(out_dir)
        write_observations(out / entry["observations"], trial_index, record, problem)
        write_params(out / entry["params"], record)
        entry["status"] = "ok"
        entry["iterations"] = len(record.iterations)
    except Exception as exc:  # noqa: BLE001 - reported in manifest
        entry["status"] = f"failed: {exc}"
    entry["wall_time"] = round(time.time() - t0, 3)
    return entry


def _execute_trials(cfg: dict, out: Path, jobs: int) -> list[dict]:
    tasks = [
        (cfg, alg, t, str(out))
        for alg in cfg["algorithm"]
        for t in range(cfg["trials"])
    ]
    if jobs <= 1:
        return [_run_trial_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_trial_job, tasks))


def _write_manifest(out: Path, cfg: dict, entries: list[dict]) -> None:
    manifest = {
        "version": __version__,
        "config": {k: v for k, v in cfg.items()},
        "trials": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_run(config_path: str, jobs: int = 1, seed: int | None = None) -> int:
    cfg = load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
        cfg.pop("seeds", None)
    out = _out_dir(cfg)
    entries = _execute_trials(cfg, out, jobs)
    _write_manifest(out, cfg, entries)
    failed = [e for e in entries if e["status"] != "ok"]
    for e in failed:
        print(f"trial {e['trial']} ({e['algorithm']}): {e['status']}", file=sys.stderr)
    print(f"wrote {len(entries) - len(failed)} trial logs to {out}")
    return 1 if failed else 0


def _compute_bench_outputs(cfg: dict, out: Path, entries: list[dict]) -> int:
    problem = problems.get_problem(cfg["problem"], cfg.get("cost_coefficient"))
    oracle = problems.oracle_front(problem, cfg["oracle_points"], cfg["oracle_seed"])
    traces: dict[str, list[bench_mod.HvTrace]] = {}
    fidelities: dict[str, list[np.ndarray]] = {}
    trace_rows = []
    ok_entries = [e for e in entries if e["status"] == "ok"]
    for entry in ok_entries:
        alg = entry["algorithm"]
        prefix = f"{alg}_trial_{entry['trial']:03d}"
        record = load_trial(out, prefix, problem, cfg, alg, entry["seed"])
        trace = bench_mod.hv_trace(record, problem, oracle, cfg["trace_points"], cfg["trace_seed"])
        traces.setdefault(alg, []).append(trace)
        stats = bench_mod.fidelity_stats(record, cfg["bins"])
        fidelities.setdefault(alg, []).append(
            np.array([o.s for o in record.dataset.observations if o.iteration >= 1])
        )
        for c, f in zip(trace.costs, trace.fractions):
            trace_rows.append([alg, entry["trial"], _fmt(c), _fmt(f)])
    if not traces:
        print("no successful trials to aggregate", file=sys.stderr)
        return 1
    baseline = "sf-ehvi" if "sf-ehvi" in traces else next(iter(traces))
    report = bench_mod.aggregate(
        traces,
        cfg["threshold"],
        baseline=baseline,
        fidelities=fidelities,
        bins=cfg["bins"],
    )
    with open(out / "hv_trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "trial", "cum_cost", "hv_fraction"])
        writer.writerows(trace_rows)
    with open(out / "fidelity_hist.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "bin_low", "bin_high", "count"])
        for alg, counts in report.fidelity_hist.items():
            for i, count in enumerate(counts):
                writer.writerow(
                    [alg, _fmt(report.fidelity_edges[i]), _fmt(report.fidelity_edges[i + 1]), int(count)]
                )
    payload = {
        "problem": cfg["problem"],
        "threshold": report.threshold,
        "baseline": report.baseline,
        "oracle_hypervolume": float(oracle.hypervolume),
        "cost_to_threshold": {
            alg: [v if v is None else float(v) for v in vals]
            for alg, vals in report.cost_to_threshold.items()
        },
        "mean_cost_to_threshold": {
            alg: ("not reached" if v is None else float(v))
            for alg, v in report.mean_cost_to_threshold.items()
        },
        "mean_trace_cost_to_threshold": {
            alg: ("not reached" if v is None else float(v))
            for alg, v in report.mean_trace_cost_to_threshold.items()
        },
        "reduction_factors": {
            alg: (v if v is not None else None)
            for alg, v in report.reduction_factors.items()
        },
        "mean_fidelity": report.fidelity_mean,
        "final_mean_hv_fraction": {
            alg: float(report.mean_traces[alg][-1]) for alg in report.mean_traces
        },
    }
    (out / "report.json").write_text(json.dumps(_round9(payload), indent=1))
    for alg, factor in report.reduction_factors.items():
        shown = "n/a (threshold not reached)" if factor is None else f"{factor:.2f}"
        print(f"{alg}: cost-reduction factor vs {baseline}: {shown}")
    return 0


def cmd_bench(config_path: str, jobs: int = 1, from_logs: bool = False, seed: int | None = None) -> int:
    cfg = load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
        cfg.pop("seeds", None)
    out = _out_dir(cfg)
    if from_logs:
        manifest_path = out / "manifest.json"
        if not manifest_path.exists():
            print(f"--from-logs: no manifest at {manifest_path}", file=sys.stderr)
            return 2
        manifest = json.loads(manifest_path.read_text())
        cfg = dict(_DEFAULTS)
        cfg.update(manifest["config"])
        entries = manifest["trials"]
    else:
        entries = _execute_trials(cfg, out, jobs)
        _write_manifest(out, cfg, entries)
        failed = [e for e in entries if e["status"] != "ok"]
        for e in failed:
            print(f"trial {e['trial']} ({e['algorithm']}): {e['status']}", file=sys.stderr)
    return _compute_bench_outputs(cfg, out, entries)


def cmd_front(problem_name: str, n: int, seed: int, out_dir: str | None = None) -> int:
    try:
        problem = problems.get_problem(problem_name)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return 2
    if n < 1000:
        print(f"front requires n >= 1000 samples, got {n}", file=sys.stderr)
        return 2
    oracle = problems.oracle_front(problem, n, seed)
    out = Path(os.environ.get("MOMF_OUT_DIR") or out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "oracle_front.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"y{i + 1}" for i in range(problem.objective_count)])
        for row in oracle.front.points:
            writer.writerow([_fmt(v) for v in row])
    print(f"hypervolume: {oracle.hypervolume:.9g}")
    print(f"wrote {len(oracle.front.points)} front points to {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="momf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute configured optimization trials")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=None)

    p_bench = sub.add_parser("bench", help="run the benchmark study")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--from-logs", action="store_true")

    p_front = sub.add_parser("front", help="sample an empirical Pareto front")
    p_front.add_argument("problem")
    p_front.add_argument("--n", type=int, default=10_000)
    p_front.add_argument("--seed", type=int, default=0)
    p_front.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.jobs, args.seed)
        if args.command == "bench":
            return cmd_bench(args.config, args.jobs, args.from_logs, args.seed)
        if args.command == "front":
            return cmd_front(args.problem, args.n, args.seed, args.out)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
