"""Circuit-switched braid simulation on the tiled double-defect mesh.

Tile corners form a router grid; a braid claims every router and link on
its route for the whole hold period (code distance d cycles), so two open
braids can never share a resource.  The simulator runs a per-cycle loop:
release expired braids, refresh the ready queue from the dependency DAG,
order it by the selected priority policy, and greedily open as many
braids as fit.  The result is a static schedule with stats.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .dag import DepDag, LatencyModel
from .ir import OpKind
from .layout import Placement
from .qec import CodeParams

Router = tuple[int, int]
Link = tuple[Router, Router]


class BraidEventKind(Enum):
    OPEN_BRAID = "open_braid"
    CLOSE_BRAID = "close_braid"
    INIT_ANCILLA = "init_ancilla"
    STABILIZE = "stabilize"
    MEASURE_ANCILLA = "measure_ancilla"


class RouteMode(Enum):
    DIMENSION_ORDERED = "xy"
    ADAPTIVE = "adaptive"


class SimulationStall(RuntimeError):
    """No forward progress for an extended period; schedule abandoned."""


def _link(a: Router, b: Router) -> Link:
    return (a, b) if a <= b else (b, a)


class RouterMesh:
    """Claim state for the (rows+1) x (cols+1) router grid of a tile mesh."""

    def __init__(self, tile_rows: int, tile_cols: int):
        self.rows = tile_rows + 1
        self.cols = tile_cols + 1
        self.router_claim: dict[Router, int] = {}
        self.link_claim: dict[Link, int] = {}

    @property
    def num_links(self) -> int:
        return self.rows * (self.cols - 1) + (self.rows - 1) * self.cols

    def neighbors(self, node: Router):
        r, c = node
        if c + 1 < self.cols:
            yield (r, c + 1)
        if c - 1 >= 0:
            yield (r, c - 1)
        if r + 1 < self.rows:
            yield (r + 1, c)
        if r - 1 >= 0:
            yield (r - 1, c)

    def path_free(self, path: list[Router]) -> bool:
        for node in path:
            if node in self.router_claim:
                return False
        for a, b in zip(path, path[1:]):
            if _link(a, b) in self.link_claim:
                return False
        return True

    def claim(self, path: list[Router], braid_id: int):
        for node in path:
            assert node not in self.router_claim
            self.router_claim[node] = braid_id
        for a, b in zip(path, path[1:]):
            link = _link(a, b)
            assert link not in self.link_claim
            self.link_claim[link] = braid_id

    def release(self, path: list[Router]):
        for node in path:
            del self.router_claim[node]
        for a, b in zip(path, path[1:]):
            del self.link_claim[_link(a, b)]


def manhattan(a: Router, b: Router) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def route(mesh: RouterMesh, src: Router, dst: Router,
          mode: RouteMode = RouteMode.DIMENSION_ORDERED) -> list[Router] | None:
    """Find a free route, or None if blocked.

    Dimension-ordered routing walks columns first, then rows, and fails if
    anything on that one path is claimed.  Adaptive routing BFS-searches
    the free subgraph and accepts any path up to twice the Manhattan
    distance.
    """
    if src == dst:
        raise ValueError("src and dst routers must differ")
    if mode is RouteMode.DIMENSION_ORDERED:
        path = [src]
        r, c = src
        step = 1 if dst[1] > c else -1
        while c != dst[1]:
            c += step
            path.append((r, c))
        step = 1 if dst[0] > r else -1
        while r != dst[0]:
            r += step
            path.append((r, c))
        return path if mesh.path_free(path) else None

    # BFS over unclaimed routers/links gives the shortest free path.
    if src in mesh.router_claim or dst in mesh.router_claim:
        return None
    prev: dict[Router, Router] = {src: src}
    q = deque([src])
    while q:
        node = q.popleft()
        if node == dst:
            break
        for nxt in mesh.neighbors(node):
            if nxt in prev or nxt in mesh.router_claim:
                continue
            if _link(node, nxt) in mesh.link_claim:
                continue
            prev[nxt] = node
            q.append(nxt)
    if dst not in prev:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    path.reverse()
    if len(path) - 1 > 2 * manhattan(src, dst):
        return None
    return path


@dataclass(frozen=True)
class Timeouts:
    t_adapt: int
    t_drop: int

    @classmethod
    def for_distance(cls, d: int) -> "Timeouts":
        return cls(t_adapt=2 * d, t_drop=8 * d)


@dataclass
class _LocalStage:
    kind: BraidEventKind
    duration: int


@dataclass
class _BraidStage:
    src: Router | None  # None: pick a magic-state factory at open time
    dst: Router


def tile_attach(tile: tuple[int, int]) -> Router:
    """Braids attach at the north-west corner router of a tile."""
    return tile


def expand_op_stages(op, placement: Placement, d: int,
                     latency: LatencyModel) -> list[_LocalStage | _BraidStage]:
    """Per-op event sequence.

    CNOT: init ancilla, braid (d cycles), stabilize, braid (d cycles),
    measure -- 2d+3 cycles total.  T: one braid from a factory plus a
    measurement.  Single-qubit ops are purely local.
    """
    if op.kind is OpKind.CNOT:
        a = tile_attach(placement.pos[op.operands[0]])
        b = tile_attach(placement.pos[op.operands[1]])
        return [
            _LocalStage(BraidEventKind.INIT_ANCILLA, 1),
            _BraidStage(a, b),
            _LocalStage(BraidEventKind.STABILIZE, 1),
            _BraidStage(a, b),
            _LocalStage(BraidEventKind.MEASURE_ANCILLA, 1),
        ]
    if op.kind is OpKind.T:
        dst = tile_attach(placement.pos[op.operands[0]])
        return [
            _BraidStage(None, dst),
            _LocalStage(BraidEventKind.MEASURE_ANCILLA, 1),
        ]
    return [_LocalStage(BraidEventKind.STABILIZE, latency[op.kind])]


@dataclass(frozen=True)
class QueueItem:
    """A braid eligible for scheduling this cycle (or, in tests, a close)."""

    op_id: int
    is_closing: bool
    criticality: int
    length: int
    seq: int


def policy_order(queue: list[QueueItem], policy: int) -> list[QueueItem]:
    """Order a braid queue according to priority policy 0-6."""
    if policy not in range(7):
        raise ValueError(f"unknown policy {policy}")
    if policy in (0, 1, 2):
        return sorted(queue, key=lambda it: (it.seq, it.op_id))
    if policy == 3:
        return sorted(queue, key=lambda it: (-it.criticality, it.seq, it.op_id))
    if policy == 4:
        return sorted(queue, key=lambda it: (-it.length, it.seq, it.op_id))
    if policy == 5:
        return sorted(queue, key=lambda it: (not it.is_closing, it.seq, it.op_id))
    max_crit = max((it.criticality for it in queue), default=0)

    def key6(it: QueueItem):
        length = it.length if it.criticality == max_crit else -it.length
        return (not it.is_closing, -it.criticality, length, it.op_id)

    return sorted(queue, key=key6)


@dataclass
class BraidSpan:
    op_id: int
    opened_at: int
    closed_at: int
    route: list[Router]

    @property
    def links(self) -> list[Link]:
        return [_link(a, b) for a, b in zip(self.route, self.route[1:])]


@dataclass
class BraidSchedule:
    policy: int
    schedule_length: int
    critical_path_length: int
    utilization: float
    drops: int
    adaptive_reroutes: int
    num_links: int
    link_busy: dict[Link, int]
    events: list[tuple[int, str, int, list[Router] | None]]
    spans: list[BraidSpan]
    op_end: dict[int, int] = field(default_factory=dict)

    def open_braids_at(self, cycle: int) -> list[BraidSpan]:
        return [s for s in self.spans if s.opened_at <= cycle < s.closed_at]

    def events_json(self) -> str:
        return json.dumps(
            {
                "policy": self.policy,
                "schedule_length": self.schedule_length,
                "events": [
                    {"cycle": c, "kind": k, "op": op,
                     "route": [list(n) for n in r] if r else None}
                    for c, k, op, r in self.events
                ],
            },
            indent=2,
        )

    def stats_row(self) -> dict:
        return {
            "policy": self.policy,
            "schedule_length": self.schedule_length,
            "critical_path": self.critical_path_length,
            "utilization": round(self.utilization, 6),
            "drops": self.drops,
        }

    def gantt_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["op", "open", "close", "links"])
        for s in self.spans:
            links = ";".join(
                f"{a[0]},{a[1]}-{b[0]},{b[1]}" for a, b in s.links
            )
            w.writerow([s.op_id, s.opened_at, s.closed_at, links])
        return buf.getvalue()


class _OpState:
    __slots__ = ("op", "stages", "idx", "remaining", "waiting_braid",
                 "wait_cycles", "seq", "route", "end_cycle", "started")

    def __init__(self, op, stages):
        self.op = op
        self.stages = stages
        self.idx = -1
        self.remaining = 0
        self.waiting_braid = False
        self.wait_cycles = 0
        self.seq = op.id
        self.route: list[Router] | None = None
        self.end_cycle: int | None = None
        self.started = False


def simulate(dag: DepDag, placement: Placement, params: CodeParams,
             policy: int = 6, timeouts: Timeouts | None = None,
             check_invariants: bool = True,
             magic_period: int | None = None) -> BraidSchedule:
    """Run the cycle loop and return the resulting static schedule."""
    if policy not in range(7):
        raise ValueError(f"unknown policy {policy}")
    d = params.d
    if timeouts is None:
        timeouts = Timeouts.for_distance(d)
    if magic_period is None:
        magic_period = 2 * d + 3
    latency = LatencyModel.for_distance(d)
    mesh = RouterMesh(placement.rows, placement.cols)

    states = {
        op.id: _OpState(op, expand_op_stages(op, placement, d, latency))
        for op in dag.circuit.ops
    }
    unmet = {op_id: len(p) for op_id, p in dag.preds.items()}
    pending = deque(sorted(op_id for op_id, n in unmet.items() if n == 0))
    incomplete = set(states)
    active: set[int] = set()
    min_alive = 0  # lazy pointer to the lowest incomplete op id (policy 0)

    factories = sorted(placement.factory_tiles.items())
    factory_attach = [tile_attach(t) for _, t in factories]
    factory_ready = [0] * len(factories)

    events: list[tuple[int, str, int, list[Router] | None]] = []
    spans: list[BraidSpan] = []
    open_spans: dict[int, BraidSpan] = {}
    link_busy: dict[Link, int] = {}
    total_busy = 0
    drops = 0
    adaptive_reroutes = 0
    next_seq = len(states)
    t = 0
    last_progress = 0
    stall_limit = 10 * timeouts.t_drop

    def advance(st: _OpState, now: int) -> bool:
        """Move to the next stage; True if something changed."""
        nonlocal last_progress
        st.idx += 1
        if st.idx >= len(st.stages):
            st.end_cycle = now
            incomplete.discard(st.op.id)
            active.discard(st.op.id)
            for succ in dag.succs[st.op.id]:
                unmet[succ] -= 1
                if unmet[succ] == 0:
                    pending.append(succ)
            last_progress = now
            return True
        stage = st.stages[st.idx]
        if isinstance(stage, _LocalStage):
            st.remaining = stage.duration
            events.append((now, stage.kind.value, st.op.id, None))
        else:
            st.waiting_braid = True
            st.wait_cycles = 0
        last_progress = now
        return True

    while incomplete:
        if t - last_progress > stall_limit:
            raise SimulationStall(
                f"no progress since cycle {last_progress} (now {t}); "
                f"policy={policy} open_braids={len(open_spans)}"
            )

        # 1. Finish stages whose timers expired; release braid claims.
        for op_id in sorted(active):
            st = states[op_id]
            if st.waiting_braid or st.remaining > 0:
                continue
            if st.route is not None:
                mesh.release(st.route)
                span = open_spans.pop(op_id)
                span.closed_at = t
                events.append((t, BraidEventKind.CLOSE_BRAID.value, op_id,
                               st.route))
                st.route = None
            advance(st, t)

        # 2. Admit newly-ready ops (policy 0 keeps strict program order).
        if policy == 0:
            while min_alive not in incomplete and min_alive < len(states):
                min_alive += 1
        admitted = []
        while pending:
            op_id = pending.popleft()
            if policy == 0 and op_id != min_alive:
                admitted.append(op_id)
                continue
            st = states[op_id]
            st.started = True
            active.add(op_id)
            advance(st, t)
        pending.extend(admitted)

        # 3. Collect braid candidates and order them by policy.
        queue: list[QueueItem] = []
        for op_id in sorted(active):
            st = states[op_id]
            if not st.waiting_braid:
                continue
            stage = st.stages[st.idx]
            if stage.src is None:
                avail = [i for i, r in enumerate(factory_ready) if r <= t]
                if not avail:
                    continue  # no magic state anywhere yet
                length = min(manhattan(factory_attach[i], stage.dst)
                             for i in avail)
            else:
                length = manhattan(stage.src, stage.dst)
            queue.append(QueueItem(op_id, False, dag.criticality[op_id],
                                   length, st.seq))

        # 4. Greedily open braids in priority order.
        for item in policy_order(queue, policy):
            st = states[item.op_id]
            stage = st.stages[st.idx]
            if stage.src is None:
                avail = sorted(
                    (i for i, r in enumerate(factory_ready) if r <= t),
                    key=lambda i: (manhattan(factory_attach[i], stage.dst), i),
                )
                if not avail:
                    continue
                fac = avail[0]
                src = factory_attach[fac]
            else:
                src, fac = stage.src, None
            mode = (RouteMode.ADAPTIVE if st.wait_cycles >= timeouts.t_adapt
                    else RouteMode.DIMENSION_ORDERED)
            if src == stage.dst:
                # Factory sits at the operand's own corner: zero-length braid.
                path = None if stage.dst in mesh.router_claim else [stage.dst]
            else:
                path = route(mesh, src, stage.dst, mode)
            if path is None:
                st.wait_cycles += 1
                if st.wait_cycles >= timeouts.t_drop:
                    drops += 1
                    st.wait_cycles = 0
                    st.seq = next_seq
                    next_seq += 1
                continue
            if mode is RouteMode.ADAPTIVE:
                adaptive_reroutes += 1
            if fac is not None:
                factory_ready[fac] = t + magic_period
            mesh.claim(path, item.op_id)
            st.route = path
            st.remaining = d
            st.waiting_braid = False
            span = BraidSpan(item.op_id, t, -1, path)
            open_spans[item.op_id] = span
            spans.append(span)
            events.append((t, BraidEventKind.OPEN_BRAID.value, item.op_id,
                           path))
            last_progress = t

        # 5. Invariant check and accounting, then tick timers.
        if check_invariants:
            seen_links: set[Link] = set()
            seen_routers: set[Router] = set()
            for span in open_spans.values():
                for link in span.links:
                    assert link not in seen_links, "braids share a link"
                    seen_links.add(link)
                for node in span.route:
                    assert node not in seen_routers, "braids share a router"
                    seen_routers.add(node)
            assert seen_links == set(mesh.link_claim)
            assert seen_routers == set(mesh.router_claim)

        for span in open_spans.values():
            for link in span.links:
                link_busy[link] = link_busy.get(link, 0) + 1
                total_busy += 1
        for op_id in active:
            st = states[op_id]
            if not st.waiting_braid and st.remaining > 0:
                st.remaining -= 1
        t += 1

    schedule_length = max((st.end_cycle for st in states.values()), default=0)
    utilization = (
        total_busy / (mesh.num_links * schedule_length)
        if schedule_length else 0.0
    )
    return BraidSchedule(
        policy=policy,
        schedule_length=schedule_length,
        critical_path_length=dag.critical_path_length,
        utilization=utilization,
        drops=drops,
        adaptive_reroutes=adaptive_reroutes,
        num_links=mesh.num_links,
        link_busy=link_busy,
        events=events,
        spans=spans,
        op_end={op_id: st.end_cycle for op_id, st in states.items()},
    )
