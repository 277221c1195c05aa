"""Command-line front end.

Every subcommand writes its artifacts into a run directory (--out)
together with the resolved configuration and a manifest, so a run can be
reproduced from the directory alone.  Exit codes: 0 success, 1 stage
failure (one machine-parsable line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from . import braid as braid_sim
from . import teleport as teleport_sim
from .dag import LatencyModel, build_dag, parallelism_profile
from .estimator import (
    WorkloadFamily,
    calibrate,
    estimate,
    favorability_sweep,
    find_crossover,
    modeled_estimate,
)
from .ir import ParseError, parse_qasm, serialize_qasm, synth_workload
from .layout import extract_interactions, grid_dims, naive_placement, place
from .qec import (
    Encoding,
    QecConfig,
    choose_distance,
    code_params,
    factory_plan,
    required_logical_rate,
)

CONFIG_ENV = "SCQEC_CONFIG"


def load_config(args) -> QecConfig:
    """Layer: built-in defaults < config file < command-line overrides."""
    path = args.config or os.environ.get(CONFIG_ENV)
    config = QecConfig.from_json(path) if path else QecConfig()
    overrides = {}
    for name in ("threshold", "suppression_prefactor", "syndrome_cycle_seconds"):
        value = getattr(args, name.replace("_", "-").replace("-", "_"), None)
        if value is not None:
            overrides[name] = value
    if overrides:
        config = QecConfig(**{**config.to_dict(), **overrides})
    return config


def write_run(out: Path, args, config: QecConfig, artifacts: dict[str, str]):
    out.mkdir(parents=True, exist_ok=True)
    for name, content in artifacts.items():
        (out / name).write_text(content)
    (out / "config.resolved.json").write_text(
        json.dumps(config.to_dict(), indent=2) + "\n"
    )
    manifest = {
        "version": __version__,
        "command": args.command,
        "args": {k: v for k, v in vars(args).items()
                 if k not in ("func", "command") and v is not None},
        "artifacts": sorted(artifacts) + ["config.resolved.json"],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def read_circuit(path: str):
    return parse_qasm(Path(path).read_text())


def prepare(circuit, p_P: float, config: QecConfig):
    """Shared front half of the pipeline: distance, DAG, factory plan."""
    p_L = required_logical_rate(len(circuit.ops))
    d = choose_distance(p_P, p_L, config)
    dag = build_dag(circuit, LatencyModel.for_distance(d))
    plan = factory_plan(parallelism_profile(dag), config)
    return d, dag, plan


def cmd_parse(args, config):
    circuit = read_circuit(args.input)
    dag = build_dag(circuit, LatencyModel.for_distance(3))
    profile = parallelism_profile(dag)
    summary = {
        "num_qubits": circuit.num_qubits,
        "num_ops": len(circuit.ops),
        "t_count": profile.t_count,
        "twoq_count": profile.twoq_count,
        "parallelism_factor": round(profile.parallelism_factor, 4),
        "critical_path_d3": dag.critical_path_length,
    }
    print(json.dumps(summary, indent=2))
    if args.out:
        write_run(Path(args.out), args, config,
                  {"summary.json": json.dumps(summary, indent=2) + "\n"})


def cmd_synth(args, config):
    circuit = synth_workload(args.qubits, args.ops, args.parallelism,
                             args.t_fraction, args.seed)
    text = serialize_qasm(circuit)
    out = Path(args.out)
    write_run(out, args, config, {"circuit.qasm": text})
    print(out / "circuit.qasm")


def cmd_place(args, config):
    circuit = read_circuit(args.input)
    _, _, plan = prepare(circuit, args.p_phys, config)
    graph = extract_interactions(circuit, plan)
    dims = grid_dims(len(graph.vertices))
    placement = place(graph, dims, seed=args.seed)
    write_run(Path(args.out), args, config,
              {"placement.json": placement.to_json()})
    print(f"placed {len(graph.vertices)} tiles on {dims[0]}x{dims[1]} grid")


def cmd_braid(args, config):
    circuit = read_circuit(args.input)
    d, dag, plan = prepare(circuit, args.p_phys, config)
    graph = extract_interactions(circuit, plan)
    dims = grid_dims(len(graph.vertices))
    placement = (place(graph, dims, seed=args.seed) if args.policy >= 2
                 else naive_placement(graph, dims))
    params = code_params(Encoding.DOUBLE_DEFECT, d, plan, config)
    sched = braid_sim.simulate(dag, placement, params, policy=args.policy)
    stats = sched.stats_row()
    stats.update({"policy": args.policy, "d": d})
    buf = [",".join(stats.keys()), ",".join(str(v) for v in stats.values())]
    write_run(Path(args.out), args, config, {
        "schedule.json": sched.events_json(),
        "stats.csv": "\n".join(buf) + "\n",
        "gantt.csv": sched.gantt_csv(),
    })
    print(f"policy {args.policy}: {sched.schedule_length} cycles, "
          f"utilization {sched.utilization:.4f}")


def cmd_teleport(args, config):
    circuit = read_circuit(args.input)
    _, dag, _ = prepare(circuit, args.p_phys, config)
    layout = teleport_sim.SimdLayout(num_regions=args.regions)
    simd = teleport_sim.schedule_simd(dag, layout)
    windows = ([float(w) for w in args.windows.split(",")] if args.windows
               else [0, 1, 2, 4, 8, 16, 32, 64, 128, math.inf])
    rows = teleport_sim.sweep_window(simd, windows, layout)
    lines = ["W,epr_high_water,schedule_length,stall_cycles"]
    for row in rows:
        lines.append("{W},{epr_high_water},{schedule_length},{stall_cycles}"
                     .format(**row))
    write_run(Path(args.out), args, config,
              {"window_sweep.csv": "\n".join(lines) + "\n"})
    for line in lines:
        print(line)


def cmd_estimate(args, config):
    circuit = read_circuit(args.input)
    encodings = ([Encoding(args.encoding)] if args.encoding
                 else list(Encoding))
    results = {}
    for enc in encodings:
        est = estimate(circuit, enc, args.p_phys, config, seed=args.seed,
                       policy=args.policy)
        results[enc.value] = {
            "d": est.d,
            "cycles": est.cycles,
            "physical_qubits": est.physical_qubits,
            "wall_time_seconds": est.wall_time_seconds,
            "spacetime": est.spacetime,
            "detail": est.detail,
        }
    text = json.dumps(results, indent=2, default=str)
    write_run(Path(args.out), args, config, {"estimate.json": text + "\n"})
    print(text)


def cmd_crossover(args, config):
    family = WorkloadFamily("cli", args.parallelism, seed=args.seed)
    point = find_crossover(family, args.p_phys, config)
    payload = (
        {"crossover_ops": point.op_count, "ratio": point.ratio_at_point}
        if point else {"crossover_ops": None}
    )
    text = json.dumps({"parallelism": args.parallelism,
                       "p_phys": args.p_phys, **payload}, indent=2)
    write_run(Path(args.out), args, config, {"crossover.json": text + "\n"})
    print(text)


def cmd_scaling(args, config):
    family = WorkloadFamily("cli", args.parallelism, seed=args.seed)
    calib = calibrate(family, args.p_phys, config)
    lo, hi, k = args.min_ops, args.max_ops, args.points
    if not (0 < lo < hi) or k < 2:
        raise ValueError("need 0 < min-ops < max-ops and >= 2 points")
    sizes = [lo * (hi / lo) ** (i / (k - 1)) for i in range(k)]
    lines = ["ops,dd_spacetime,planar_spacetime,ratio"]
    for n in sizes:
        dd = modeled_estimate(family, Encoding.DOUBLE_DEFECT, n,
                              args.p_phys, calib, config)
        pl = modeled_estimate(family, Encoding.PLANAR, n,
                              args.p_phys, calib, config)
        lines.append(f"{round(n)},{dd.spacetime:.6e},{pl.spacetime:.6e},"
                     f"{dd.spacetime / pl.spacetime:.6f}")
    write_run(Path(args.out), args, config,
              {"scaling.csv": "\n".join(lines) + "\n"})
    print("\n".join(lines))


def _sweep_cell(packed):
    family, p_P, config_dict = packed
    config = QecConfig(**config_dict)
    calib = calibrate(family, p_P, config)
    point = find_crossover(family, p_P, config, calib=calib)
    return {
        "family": family.name,
        "parallelism": family.parallelism,
        "p_P": p_P,
        "crossover_ops": point.op_count if point else "",
        "ratio": round(point.ratio_at_point, 6) if point else "",
    }


def cmd_sweep(args, config):
    p_grid = [float(p) for p in args.p_grid.split(",")]
    pars = [float(p) for p in args.parallelism.split(",")]
    families = [WorkloadFamily(f"par{p:g}", p, seed=args.seed) for p in pars]
    if args.jobs > 1:
        cells = [(f, p, config.to_dict()) for f in families for p in p_grid]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))
        result_csv = _rows_to_csv(rows)
    else:
        result = favorability_sweep(p_grid, families, config)
        if result.failures:
            raise RuntimeError(f"{len(result.failures)} sweep cells failed: "
                               f"{result.failures[0]['error']}")
        result_csv = result.to_csv()
    write_run(Path(args.out), args, config, {"boundary.csv": result_csv})
    print(result_csv, end="")


def _rows_to_csv(rows):
    import io
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["family", "parallelism", "p_P",
                                        "crossover_ops", "ratio"])
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scqec",
        description="surface-code communication simulation and resource "
                    "estimation",
    )
    parser.add_argument("--config", help="QEC config JSON (or $SCQEC_CONFIG)")
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--suppression-prefactor", type=float,
                        dest="suppression_prefactor")
    parser.add_argument("--syndrome-cycle-seconds", type=float,
                        dest="syndrome_cycle_seconds")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default="run"):
        p.add_argument("--out", default=out_default, help="run directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--p-phys", type=float, default=1e-5,
                       dest="p_phys", help="physical error rate")

    p = sub.add_parser("parse", help="validate a circuit and print a summary")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("synth", help="generate a synthetic workload")
    common(p)
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--ops", type=int, required=True)
    p.add_argument("--parallelism", type=float, required=True)
    p.add_argument("--t-fraction", type=float, default=0.05,
                   dest="t_fraction")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("place", help="optimize qubit-to-tile placement")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("braid", help="simulate double-defect braid schedule")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--policy", type=int, default=6, choices=range(7))
    p.set_defaults(func=cmd_braid)

    p = sub.add_parser("teleport", help="simulate planar EPR windowing")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--regions", type=int, default=4)
    p.add_argument("--windows", help="comma-separated window sizes")
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("estimate", help="space-time resource estimate")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--encoding", choices=[e.value for e in Encoding])
    p.add_argument("--policy", type=int, default=6, choices=range(7))
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("crossover", help="favorability crossover op count")
    common(p)
    p.add_argument("--parallelism", type=float, required=True)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("scaling", help="modeled spacetime vs op count")
    common(p)
    p.add_argument("--parallelism", type=float, required=True)
    p.add_argument("--min-ops", type=float, default=1e2, dest="min_ops")
    p.add_argument("--max-ops", type=float, default=1e9, dest="max_ops")
    p.add_argument("--points", type=int, default=13)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("sweep", help="favorability boundary over a p_P grid")
    common(p)
    p.add_argument("--p-grid", required=True, dest="p_grid",
                   help="comma-separated physical error rates")
    p.add_argument("--parallelism", required=True,
                   help="comma-separated parallelism factors")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        args.func(args, config)
    except (ParseError, ValueError, OSError, RuntimeError,
            braid_sim.SimulationStall) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
