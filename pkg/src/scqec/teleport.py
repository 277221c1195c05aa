"""Multi-SIMD planar-code simulation with windowed EPR distribution.

Ops are list-scheduled level by level into SIMD regions (one op kind per
region-cycle).  Moving a qubit between regions, or feeding a T op a magic
state, costs one teleportation, which consumes an EPR pair that must be
distributed over the swap mesh ahead of time.  The look-ahead window W
controls how early each pair is launched: W=0 launches at the point of
use (maximal stalls, minimal live pairs), W=inf launches everything up
front (zero stalls, maximal live pairs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .dag import DepDag, asap_levels

FACTORY_REGION = -1


@dataclass(frozen=True)
class SimdLayout:
    """Checkerboard of k SIMD regions plus a shared ancilla-factory region."""

    num_regions: int = 4
    region_capacity: int | None = None
    hops_per_region_edge: int = 4
    s_swap: int = 2  # cycles per swap hop
    l_tp: int = 2  # teleport completion latency once the EPR has arrived

    def __post_init__(self):
        if self.num_regions < 1:
            raise ValueError("need at least one SIMD region")

    def region_coord(self, region: int) -> tuple[int, int]:
        if region == FACTORY_REGION:
            return (-1, 0)
        cols = max(1, math.isqrt(self.num_regions))
        return (region // cols, region % cols)

    def hop_distance(self, src: int, dst: int) -> int:
        a, b = self.region_coord(src), self.region_coord(dst)
        return (abs(a[0] - b[0]) + abs(a[1] - b[1])) * self.hops_per_region_edge

    def channel_path(self, src: int, dst: int) -> list[tuple]:
        """Region-grid edges crossed by a dimension-ordered route.

        The factory strip borders the whole top row, so factory traffic
        enters through the destination's own column rather than funnelling
        through a single corner edge.
        """
        (r, c), (r2, c2) = self.region_coord(src), self.region_coord(dst)
        if src == FACTORY_REGION:
            c = c2
        edges = []
        while c != c2:
            step = 1 if c2 > c else -1
            edges.append(((r, min(c, c + step)), (r, max(c, c + step))))
            c += step
        while r != r2:
            step = 1 if r2 > r else -1
            edges.append(((min(r, r + step), c), (max(r, r + step), c)))
            r += step
        return edges


class EprState(Enum):
    PLANNED = "planned"
    IN_FLIGHT = "in_flight"
    DELIVERED = "delivered"
    CONSUMED = "consumed"


@dataclass(frozen=True)
class Teleport:
    id: int
    op_id: int
    src_region: int
    dst_region: int
    needed_at: int
    qubit: int | None = None  # None for magic-state deliveries


@dataclass(frozen=True)
class EprRequest:
    teleport_id: int
    src_region: int
    dst_region: int
    needed_at: int
    launch_at: int
    arrival: int
    consumed_at: int
    state: EprState = EprState.CONSUMED


@dataclass(frozen=True)
class SimdSchedule:
    op_start: dict[int, int]
    teleports: tuple[Teleport, ...]
    num_levels: int
    schedule_length: int  # compute-only, before EPR logistics


@dataclass(frozen=True)
class TeleportSchedule:
    schedule_length: int
    epr_high_water: int
    stall_cycles: int
    channel_busy: dict[tuple, int] = field(default_factory=dict)
    requests: tuple[EprRequest, ...] = ()


def schedule_simd(dag: DepDag, layout: SimdLayout = SimdLayout()) -> SimdSchedule:
    """List-schedule DAG levels into SIMD regions and emit teleports.

    Within a level, ops of one kind form a batch; a batch lands in the
    region where most of its qubits already live.  Each region runs one
    batch per sub-cycle, so a level costs as many cycles as the busiest
    region's batch count (capacity splits included).
    """
    k = layout.num_regions
    cap = layout.region_capacity
    levels = asap_levels(dag)
    num_levels = max(levels) + 1 if levels else 0
    by_level: list[list] = [[] for _ in range(num_levels)]
    for op in dag.circuit.ops:
        by_level[levels[op.id]].append(op)

    qubit_region = {q: q % k for q in range(dag.circuit.num_qubits)}
    op_start: dict[int, int] = {}
    teleports: list[Teleport] = []
    t = 0
    for ops in by_level:
        batches: dict[object, list] = {}
        for op in ops:
            batches.setdefault(op.kind, []).append(op)
        # Largest batches pick their region first.
        ordered = sorted(
            batches.values(), key=lambda b: (-len(b), b[0].id)
        )
        region_load = [0] * k
        level_cycles = 1
        for batch in ordered:
            votes = [0] * k
            for op in batch:
                for q in op.operands:
                    votes[qubit_region[q]] += 1
            region = max(range(k), key=lambda r: (votes[r], -region_load[r], -r))
            sub_batches = (
                [batch] if cap is None
                else [batch[i:i + cap] for i in range(0, len(batch), cap)]
            )
            for sub in sub_batches:
                slot = region_load[region]
                region_load[region] += 1
                level_cycles = max(level_cycles, region_load[region])
                start = t + slot
                for op in sub:
                    op_start[op.id] = start
                    for q in op.operands:
                        if qubit_region[q] != region:
                            teleports.append(Teleport(
                                len(teleports), op.id,
                                qubit_region[q], region, start, qubit=q,
                            ))
                            qubit_region[q] = region
                    if op.kind.consumes_magic_state:
                        teleports.append(Teleport(
                            len(teleports), op.id,
                            FACTORY_REGION, region, start,
                        ))
        t += level_cycles
    return SimdSchedule(
        op_start=op_start,
        teleports=tuple(teleports),
        num_levels=num_levels,
        schedule_length=t,
    )


def _transit_times(teleports, launches: dict[int, int],
                   layout: SimdLayout) -> tuple[dict[int, int], dict[tuple, int]]:
    """FIFO channel simulation; returns arrival time per teleport.

    Each channel is a pipelined swap chain: it admits a new pair every
    s_swap cycles and delivers it hops*s_swap cycles later.  Teleports are
    served in needed_at order (ties by id), so the queueing order is
    window-independent and the arrivals are monotone in W.
    """
    edge_time = layout.hops_per_region_edge * layout.s_swap
    link_free: dict[tuple, int] = {}
    busy: dict[tuple, int] = {}
    arrivals: dict[int, int] = {}
    for tp in sorted(teleports, key=lambda tp: (tp.needed_at, tp.id)):
        time = launches[tp.id]
        for edge in layout.channel_path(tp.src_region, tp.dst_region):
            start = max(time, link_free.get(edge, 0))
            link_free[edge] = start + layout.s_swap
            busy[edge] = busy.get(edge, 0) + layout.s_swap
            time = start + edge_time
        arrivals[tp.id] = time
    return arrivals, busy


def plan_epr_distribution(schedule: SimdSchedule, window: float,
                          layout: SimdLayout = SimdLayout()
                          ) -> tuple[list[EprRequest], TeleportSchedule]:
    """Plan EPR launches for a look-ahead window and re-time the schedule.

    The baseline is the full-prefetch plan (everything launched at cycle
    0); its unavoidable transit delays are folded into per-teleport
    deadlines so that window=inf reports zero stall cycles by definition.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    teleports = schedule.teleports
    order = sorted(teleports, key=lambda tp: (tp.needed_at, tp.id))

    ref_arrivals, _ = _transit_times(
        teleports, {tp.id: 0 for tp in teleports}, layout
    )
    deadline: dict[int, int] = {}
    shift = 0
    for tp in order:
        dl = tp.needed_at + shift
        stall = max(0, ref_arrivals[tp.id] - dl)
        shift += stall
        deadline[tp.id] = dl + stall
    base_length = schedule.schedule_length + shift

    # Launch relative to the folded deadline, not the raw needed_at, so a
    # small window still bites when reference queueing has spread the
    # deadlines out.
    launches = {
        tp.id: 0 if math.isinf(window) else max(0, deadline[tp.id] - int(window))
        for tp in teleports
    }
    arrivals, busy = _transit_times(teleports, launches, layout)
    requests: list[EprRequest] = []
    extra = 0
    stall_total = 0
    for tp in order:
        dl = deadline[tp.id] + extra
        stall = max(0, arrivals[tp.id] - dl)
        extra += stall
        stall_total += stall
        requests.append(EprRequest(
            teleport_id=tp.id,
            src_region=tp.src_region,
            dst_region=tp.dst_region,
            needed_at=tp.needed_at,
            launch_at=launches[tp.id],
            arrival=arrivals[tp.id],
            consumed_at=dl + stall + layout.l_tp,
        ))

    high_water = _max_overlap(
        [(r.launch_at, r.consumed_at) for r in requests]
    )
    return requests, TeleportSchedule(
        schedule_length=base_length + extra,
        epr_high_water=high_water,
        stall_cycles=stall_total,
        channel_busy=busy,
        requests=tuple(requests),
    )


def _max_overlap(intervals: list[tuple[int, int]]) -> int:
    events = []
    for start, end in intervals:
        events.append((start, 1))
        events.append((end, -1))
    events.sort()
    cur = best = 0
    for _, delta in events:
        cur += delta
        best = max(best, cur)
    return best


def sweep_window(schedule: SimdSchedule, windows: list[float],
                 layout: SimdLayout = SimdLayout()) -> list[dict]:
    """Evaluate EPR logistics across a list of look-ahead windows."""
    if not windows:
        raise ValueError("window list must be non-empty")
    rows = []
    for w in windows:
        _, ts = plan_epr_distribution(schedule, w, layout)
        rows.append({
            "W": w,
            "epr_high_water": ts.epr_high_water,
            "schedule_length": ts.schedule_length,
            "stall_cycles": ts.stall_cycles,
        })
    return rows


def tune_window(schedule: SimdSchedule, layout: SimdLayout = SimdLayout(),
                inflation: float = 1.05) -> tuple[float, TeleportSchedule]:
    """Smallest power-of-two window whose schedule is within ``inflation``
    of the full-prefetch length."""
    _, ref = plan_epr_distribution(schedule, math.inf, layout)
    limit = ref.schedule_length * inflation
    w = 1.0
    while w <= max(2.0, 4.0 * ref.schedule_length):
        _, ts = plan_epr_distribution(schedule, w, layout)
        if ts.schedule_length <= limit:
            return w, ts
        w *= 2
    return math.inf, ref
