"""Space-time resource estimation and planar vs. double-defect favorability.

The full pipeline (error budget, distance selection, placement, the
encoding-specific simulator) yields absolute qubit and wall-time costs.
Crossover search bisects the double-defect/planar spacetime ratio over a
workload family's op count; beyond desk-scale sizes the simulators are
replaced by a contention model calibrated on small runs (the fit and its
residuals are part of the output).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import braid as braid_sim
from . import teleport as teleport_sim
from .dag import LatencyModel, build_dag, parallelism_profile
from .ir import LogicalCircuit, synth_workload
from .layout import extract_interactions, grid_dims, naive_placement, place
from .qec import (
    Encoding,
    FactoryPlan,
    QecConfig,
    choose_distance,
    factory_plan,
    required_logical_rate,
    tile_footprint,
)


@dataclass(frozen=True)
class ResourceEstimate:
    encoding: Encoding
    d: int
    cycles: int
    physical_qubits: int
    wall_time_seconds: float
    spacetime: float
    detail: dict = field(default_factory=dict, compare=False)


def physical_qubit_count(encoding: Encoding, data_tiles: int, plan: FactoryPlan,
                         d: int, config: QecConfig) -> int:
    """Tile accounting: data + factories + channel overhead, times footprint."""
    channel = math.ceil(config.channel_overhead_fraction * data_tiles)
    tiles = data_tiles + plan.factory_tiles(encoding) + channel
    return tiles * tile_footprint(encoding, d, config)


def _finish(encoding, d, cycles, data_tiles, plan, config, detail):
    qubits = physical_qubit_count(encoding, data_tiles, plan, d, config)
    wall = cycles * d * config.syndrome_cycle_seconds
    return ResourceEstimate(
        encoding=encoding,
        d=d,
        cycles=cycles,
        physical_qubits=qubits,
        wall_time_seconds=wall,
        spacetime=qubits * wall,
        detail=detail,
    )


def estimate(circuit: LogicalCircuit, encoding: Encoding, p_P: float,
             config: QecConfig = QecConfig(), seed: int = 0, policy: int = 6,
             simd_layout: teleport_sim.SimdLayout | None = None,
             check_invariants: bool = True) -> ResourceEstimate:
    """End-to-end estimate for one circuit on one encoding."""
    p_L = required_logical_rate(len(circuit.ops))
    d = choose_distance(p_P, p_L, config)
    dag = build_dag(circuit, LatencyModel.for_distance(d))
    profile = parallelism_profile(dag)
    plan = factory_plan(profile, config)

    if encoding is Encoding.DOUBLE_DEFECT:
        graph = extract_interactions(circuit, plan)
        dims = grid_dims(len(graph.vertices))
        placement = (
            place(graph, dims, seed=seed) if policy >= 2
            else naive_placement(graph, dims)
        )
        from .qec import code_params
        params = code_params(encoding, d, plan, config)
        sched = braid_sim.simulate(dag, placement, params, policy=policy,
                                   check_invariants=check_invariants)
        cycles = sched.schedule_length
        detail = {
            "policy": policy,
            "utilization": sched.utilization,
            "drops": sched.drops,
            "critical_path": sched.critical_path_length,
        }
    else:
        layout = simd_layout or teleport_sim.SimdLayout()
        simd = teleport_sim.schedule_simd(dag, layout)
        window, ts = teleport_sim.tune_window(simd, layout)
        cycles = ts.schedule_length
        detail = {
            "window": window,
            "epr_high_water": ts.epr_high_water,
            "stall_cycles": ts.stall_cycles,
            "compute_cycles": simd.schedule_length,
            "num_levels": simd.num_levels,
            "teleports": len(simd.teleports),
            "parallelism": profile.parallelism_factor,
        }
    return _finish(encoding, d, cycles, circuit.num_qubits, plan, config, detail)


@dataclass(frozen=True)
class WorkloadFamily:
    """Synthetic circuits scaled by op count at fixed parallelism.

    base_qubits is a machine-scale constant shared across families
    (parallelism is a program property); the qubit count then grows with
    the square root of op count past the reference size, standing in for
    larger problem instances.
    """

    name: str
    parallelism: float
    t_fraction: float = 0.05
    seed: int = 1
    ref_ops: int = 2000
    base_qubits: int = 144

    def __post_init__(self):
        need = 2 * math.ceil(self.parallelism) + 4
        if self.base_qubits < need:
            raise ValueError(
                f"base_qubits {self.base_qubits} too small for "
                f"parallelism {self.parallelism} (need >= {need})"
            )

    def num_qubits(self, total_ops: float) -> int:
        scaled = round(self.base_qubits * math.sqrt(total_ops / self.ref_ops))
        return max(self.base_qubits, scaled)

    def circuit(self, total_ops: int) -> LogicalCircuit:
        return synth_workload(
            self.num_qubits(total_ops), total_ops, self.parallelism,
            self.t_fraction, self.seed,
        )


@dataclass(frozen=True)
class CalibratedModel:
    """Cycle-cost coefficients fit on small simulated runs.

    Double-defect cycles extrapolate per op-unit (2d+3), keeping the
    congestion level observed at calibration scale baked into the
    coefficient.  Planar communication extrapolates per schedule level:
    the fitted per-level stall cost plus a diameter term -- each level's
    unhidden EPR transit residual grows with the swap-mesh diameter
    (sqrt of the machine's qubit count) past the calibration point.
    """

    family: str
    p_P: float
    sizes: tuple[int, ...]
    par_fit: float  # measured parallelism factor at calibration
    q_fit: int  # machine qubits at the largest calibration size
    dd_cycles_per_op_unit: float  # braid cycles / (ops * (2d+3))
    pl_compute_per_op: float
    pl_comm_per_level: float
    diameter_coeff: float
    s_swap: int
    dd_residual: float  # max relative deviation across calibration sizes
    pl_residual: float

    def dd_cycles(self, total_ops: float, d: int) -> float:
        return self.dd_cycles_per_op_unit * total_ops * (2 * d + 3)

    def pl_cycles(self, total_ops: float, num_qubits: int) -> float:
        levels = total_ops / self.par_fit
        comm = self.pl_comm_per_level + self.diameter_coeff * self.s_swap * max(
            0.0, math.sqrt(num_qubits) - math.sqrt(self.q_fit)
        )
        return self.pl_compute_per_op * total_ops + levels * comm


def calibrate(family: WorkloadFamily, p_P: float,
              config: QecConfig = QecConfig(),
              sizes: tuple[int, ...] = (1000, 2000, 4000),
              diameter_coeff: float = 0.1) -> CalibratedModel:
    layout = teleport_sim.SimdLayout()
    dd_units, pl_comp, pl_comm = [], [], []
    par_fit, q_fit = 1.0, family.base_qubits
    for n in sizes:
        circuit = family.circuit(n)
        dd = estimate(circuit, Encoding.DOUBLE_DEFECT, p_P, config,
                      check_invariants=False)
        pl = estimate(circuit, Encoding.PLANAR, p_P, config,
                      simd_layout=layout)
        dd_units.append(dd.cycles / (n * (2 * dd.d + 3)))
        pl_comp.append(pl.detail["compute_cycles"] / n)
        comm = pl.cycles - pl.detail["compute_cycles"]
        pl_comm.append(comm / max(1, pl.detail["num_levels"]))
        par_fit = pl.detail["parallelism"]
        q_fit = circuit.num_qubits

    def spread(xs):
        m = sum(xs) / len(xs)
        return max(abs(x - m) / m for x in xs) if m else 0.0

    return CalibratedModel(
        family=family.name,
        p_P=p_P,
        sizes=sizes,
        par_fit=par_fit,
        q_fit=q_fit,
        dd_cycles_per_op_unit=sum(dd_units) / len(dd_units),
        pl_compute_per_op=sum(pl_comp) / len(pl_comp),
        pl_comm_per_level=sum(pl_comm) / len(pl_comm),
        diameter_coeff=diameter_coeff,
        s_swap=layout.s_swap,
        dd_residual=spread(dd_units),
        pl_residual=spread(pl_comp),
    )


def modeled_estimate(family: WorkloadFamily, encoding: Encoding,
                     total_ops: float, p_P: float, calib: CalibratedModel,
                     config: QecConfig = QecConfig()) -> ResourceEstimate:
    """Estimate from the calibrated model (no simulation)."""
    p_L = required_logical_rate(max(1, round(total_ops)))
    d = choose_distance(p_P, p_L, config)
    q = family.num_qubits(total_ops)
    profile_stub = _profile_stub(q, total_ops)
    plan = factory_plan(profile_stub, config)
    if encoding is Encoding.DOUBLE_DEFECT:
        cycles = calib.dd_cycles(total_ops, d)
    else:
        cycles = calib.pl_cycles(total_ops, q)
    return _finish(encoding, d, round(cycles), q, plan, config,
                   {"model": "calibrated", "residual": calib.dd_residual
                    if encoding is Encoding.DOUBLE_DEFECT else calib.pl_residual})


def _profile_stub(num_qubits: int, total_ops: float):
    from .dag import ParallelismProfile
    return ParallelismProfile(
        parallelism_factor=1.0,
        total_ops=round(total_ops),
        t_count=0,
        twoq_count=0,
        num_qubits=num_qubits,
    )


def spacetime_ratio(family: WorkloadFamily, total_ops: float, p_P: float,
                    calib: CalibratedModel, config: QecConfig = QecConfig(),
                    max_sim_ops: int = 4000) -> float:
    """Double-defect / planar spacetime ratio at one op count."""
    if total_ops <= max_sim_ops:
        circuit = family.circuit(round(total_ops))
        dd = estimate(circuit, Encoding.DOUBLE_DEFECT, p_P, config,
                      check_invariants=False)
        pl = estimate(circuit, Encoding.PLANAR, p_P, config)
    else:
        dd = modeled_estimate(family, Encoding.DOUBLE_DEFECT, total_ops,
                              p_P, calib, config)
        pl = modeled_estimate(family, Encoding.PLANAR, total_ops,
                              p_P, calib, config)
    return dd.spacetime / pl.spacetime


@dataclass(frozen=True)
class CrossoverPoint:
    family: str
    parallelism: float
    p_P: float
    op_count: int
    ratio_at_point: float


def find_crossover(family: WorkloadFamily, p_P: float,
                   config: QecConfig = QecConfig(),
                   lo: float = 1e2, hi: float = 1e12,
                   max_iter: int = 40, max_sim_ops: int = 4000,
                   calib: CalibratedModel | None = None) -> CrossoverPoint | None:
    """Boundary op count past which the double-defect encoding stays cheaper.

    The ratio curve can dip below one at desk-scale sizes (startup
    effects), so the bracket is the rightmost descending sign change on a
    log grid, refined by bisection.  None if the ratio never ends below
    one or never rises above it.
    """
    if calib is None:
        calib = calibrate(family, p_P, config)

    def f(n: float) -> float:
        return spacetime_ratio(family, n, p_P, calib, config, max_sim_ops) - 1

    grid = [lo * (hi / lo) ** (i / 10) for i in range(11)]
    vals = [f(n) for n in grid]
    bracket = None
    for i in range(10):
        if vals[i] > 0 >= vals[i + 1]:
            bracket = i
    if bracket is None:
        return None
    a, b = math.log10(grid[bracket]), math.log10(grid[bracket + 1])
    fa = vals[bracket]
    for _ in range(max_iter):
        m = (a + b) / 2
        fm = f(10 ** m)
        if fm == 0 or (b - a) < 1e-4:
            a = b = m
            break
        if (fa > 0) == (fm > 0):
            a, fa = m, fm
        else:
            b = m
    n = 10 ** ((a + b) / 2)
    return CrossoverPoint(
        family=family.name,
        parallelism=family.parallelism,
        p_P=p_P,
        op_count=round(n),
        ratio_at_point=f(n) + 1,
    )


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[dict, ...]
    failures: tuple[dict, ...] = ()

    def to_csv(self) -> str:
        import csv as _csv
        import io
        buf = io.StringIO()
        w = _csv.DictWriter(buf, fieldnames=["family", "parallelism", "p_P",
                                             "crossover_ops", "ratio"])
        w.writeheader()
        for row in self.rows:
            w.writerow(row)
        return buf.getvalue()


def favorability_sweep(p_P_grid: list[float], families: list[WorkloadFamily],
                       config: QecConfig = QecConfig(),
                       max_sim_ops: int = 4000) -> SweepResult:
    """Per family and per p_P, the crossover op count (the boundary curve)."""
    rows, failures = [], []
    for family in families:
        for p_P in p_P_grid:
            try:
                calib = calibrate(family, p_P, config)
                point = find_crossover(family, p_P, config,
                                       max_sim_ops=max_sim_ops, calib=calib)
            except Exception as e:  # record and keep sweeping
                failures.append({"family": family.name, "p_P": p_P,
                                 "error": str(e)})
                continue
            rows.append({
                "family": family.name,
                "parallelism": family.parallelism,
                "p_P": p_P,
                "crossover_ops": point.op_count if point else "",
                "ratio": round(point.ratio_at_point, 6) if point else "",
            })
    return SweepResult(rows=tuple(rows), failures=tuple(failures))
