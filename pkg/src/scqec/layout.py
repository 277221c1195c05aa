"""Qubit-to-tile placement by recursive bisection.

Logical qubits (and factory super-vertices) are placed on a 2D tile grid
so that heavily-interacting pairs end up close, minimizing the summed
interaction-weighted Manhattan distance.  The bisection uses a single-pass
move-based refinement over a random initial cut, best of R restarts.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .ir import LogicalCircuit, OpKind
from .qec import FactoryPlan


@dataclass(frozen=True)
class InteractionGraph:
    """Symmetric weighted graph over qubit ids and factory super-vertices.

    Qubits are 0..n-1; factories are n..n+f-1 (see ``factory_vertices``).
    """

    num_qubits: int
    num_factories: int
    weights: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def vertices(self) -> list[int]:
        return list(range(self.num_qubits + self.num_factories))

    @property
    def factory_vertices(self) -> set[int]:
        return set(range(self.num_qubits, self.num_qubits + self.num_factories))

    def weight(self, u: int, v: int) -> int:
        return self.weights.get((min(u, v), max(u, v)), 0)


def extract_interactions(circuit: LogicalCircuit, plan: FactoryPlan) -> InteractionGraph:
    """Count 2-qubit interactions, plus qubit-to-factory T interactions.

    Each qubit's T traffic is charged to one factory, chosen round-robin
    by qubit id, so factories spread across the grid halves.
    """
    n = circuit.num_qubits
    nf = plan.magic_factories
    weights: dict[tuple[int, int], int] = {}

    def bump(u: int, v: int):
        key = (min(u, v), max(u, v))
        weights[key] = weights.get(key, 0) + 1

    for op in circuit.ops:
        if op.kind is OpKind.CNOT:
            bump(op.operands[0], op.operands[1])
        elif op.kind is OpKind.T:
            bump(op.operands[0], n + op.operands[0] % nf)
    return InteractionGraph(num_qubits=n, num_factories=nf, weights=weights)


@dataclass(frozen=True)
class Placement:
    rows: int
    cols: int
    pos: dict[int, tuple[int, int]]
    factory_tiles: dict[int, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.pos.values())) != len(self.pos):
            raise ValueError("placement must be injective")
        for r, c in self.pos.values():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError("tile out of grid")

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": [self.rows, self.cols],
                "assignments": {str(v): list(rc) for v, rc in self.pos.items()},
                "factories": {str(v): list(rc) for v, rc in self.factory_tiles.items()},
            },
            indent=2,
        )


def grid_dims(num_tiles: int) -> tuple[int, int]:
    """Squarest grid with at least num_tiles cells."""
    rows = max(1, math.isqrt(num_tiles))
    cols = math.ceil(num_tiles / rows)
    return rows, cols


def placement_cost(graph: InteractionGraph, placement: Placement) -> int:
    """Sum over edges of weight * Manhattan distance."""
    total = 0
    for (u, v), w in graph.weights.items():
        try:
            ru, cu = placement.pos[u]
            rv, cv = placement.pos[v]
        except KeyError as e:
            raise ValueError(f"vertex {e.args[0]} is not placed") from None
        total += w * (abs(ru - rv) + abs(cu - cv))
    return total


def _cut_weight(graph: InteractionGraph, side: dict[int, int]) -> int:
    return sum(
        w for (u, v), w in graph.weights.items()
        if u in side and v in side and side[u] != side[v]
    )


def _bisect(graph: InteractionGraph, vertices: list[int], size0: int,
            rng: random.Random) -> tuple[list[int], list[int]]:
    """Split vertices into parts of size (size0, rest) minimizing crossing weight.

    Random initial cut refined by a single pass of best-gain moves; the
    best prefix that restores the exact target sizes is kept.
    """
    n = len(vertices)
    size1 = n - size0
    if size0 == 0 or size1 == 0:
        return (list(vertices), []) if size1 == 0 else ([], list(vertices))

    order = list(vertices)
    rng.shuffle(order)
    side = {v: (0 if i < size0 else 1) for i, v in enumerate(order)}

    # Adjacency restricted to this vertex subset.
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in vertices}
    vset = set(vertices)
    for (u, v), w in graph.weights.items():
        if u in vset and v in vset:
            adj[u].append((v, w))
            adj[v].append((u, w))

    def gain(v: int) -> int:
        g = 0
        for u, w in adj[v]:
            g += w if side[u] != side[v] else -w
        return g

    counts = [size0, size1]
    locked: set[int] = set()
    moves: list[tuple[int, int, int]] = []  # (vertex, cumulative gain, |part0|)
    cum = 0
    # Allow one unit of imbalance during the pass; the best prefix with
    # exact balance is selected afterwards.
    for _ in range(n):
        best_v, best_g = None, None
        for v in vertices:
            if v in locked:
                continue
            s = side[v]
            if counts[1 - s] + 1 > max(size0, size1) + 1:
                continue
            g = gain(v)
            if best_g is None or g > best_g:
                best_v, best_g = v, g
        if best_v is None:
            break
        s = side[best_v]
        side[best_v] = 1 - s
        counts[s] -= 1
        counts[1 - s] += 1
        locked.add(best_v)
        cum += best_g
        moves.append((best_v, cum, counts[0]))

    # Roll back to the best balanced prefix.
    best_idx, best_cum = -1, 0
    for i, (_, c, c0) in enumerate(moves):
        if c0 == size0 and c > best_cum:
            best_idx, best_cum = i, c
    for v, _, _ in moves[best_idx + 1:][::-1]:
        side[v] = 1 - side[v]

    part0 = [v for v in vertices if side[v] == 0]
    part1 = [v for v in vertices if side[v] == 1]
    return part0, part1


def _place_region(graph: InteractionGraph, vertices: list[int],
                  r0: int, r1: int, c0: int, c1: int,
                  pos: dict[int, tuple[int, int]], rng: random.Random):
    if not vertices:
        return
    if r1 - r0 == 1 and c1 - c0 == 1:
        pos[vertices[0]] = (r0, c0)
        return
    # Split along the longer grid dimension.
    if (c1 - c0) >= (r1 - r0):
        cm = (c0 + c1) // 2
        area0, area1 = (r1 - r0) * (cm - c0), (r1 - r0) * (c1 - cm)
        n = len(vertices)
        size0 = min(area0, max(n - area1, round(n * area0 / (area0 + area1))))
        part0, part1 = _bisect(graph, vertices, size0, rng)
        _place_region(graph, part0, r0, r1, c0, cm, pos, rng)
        _place_region(graph, part1, r0, r1, cm, c1, pos, rng)
    else:
        rm = (r0 + r1) // 2
        area0, area1 = (rm - r0) * (c1 - c0), (r1 - rm) * (c1 - c0)
        n = len(vertices)
        size0 = min(area0, max(n - area1, round(n * area0 / (area0 + area1))))
        part0, part1 = _bisect(graph, vertices, size0, rng)
        _place_region(graph, part0, r0, rm, c0, c1, pos, rng)
        _place_region(graph, part1, rm, r1, c0, c1, pos, rng)


def place(graph: InteractionGraph, dims: tuple[int, int] | None = None,
          seed: int = 0, restarts: int = 8) -> Placement:
    """Recursive-bisection placement, best of ``restarts`` random starts.

    Factory super-vertices participate in the bisection, then get pinned
    to the nearest grid-boundary tile by swapping occupants.
    """
    vertices = graph.vertices
    if dims is None:
        dims = grid_dims(len(vertices))
    rows, cols = dims
    if rows * cols < len(vertices):
        raise ValueError(
            f"grid {rows}x{cols} too small for {len(vertices)} vertices"
        )

    best: tuple[int, dict[int, tuple[int, int]]] | None = None
    for r in range(restarts):
        rng = random.Random(f"{seed}:{r}")
        pos: dict[int, tuple[int, int]] = {}
        _place_region(graph, vertices, 0, rows, 0, cols, pos, rng)
        cost = placement_cost(graph, Placement(rows, cols, pos))
        if best is None or cost < best[0]:
            best = (cost, pos)
    pos = dict(best[1])

    # Pin factories to boundary tiles (swap with whatever sits there).
    occupant = {rc: v for v, rc in pos.items()}
    for f in sorted(graph.factory_vertices):
        fr, fc = pos[f]
        boundary = min(
            (
                (r, c)
                for r in range(rows)
                for c in range(cols)
                if r in (0, rows - 1) or c in (0, cols - 1)
            ),
            key=lambda rc: (abs(rc[0] - fr) + abs(rc[1] - fc), rc),
        )
        if boundary != (fr, fc):
            other = occupant.get(boundary)
            if other is not None and other in graph.factory_vertices:
                continue  # already a factory there; leave both in place
            pos[f] = boundary
            occupant[boundary] = f
            del occupant[(fr, fc)]
            if other is not None:
                pos[other] = (fr, fc)
                occupant[(fr, fc)] = other

    factory_tiles = {f: pos[f] for f in graph.factory_vertices}
    return Placement(rows, cols, pos, factory_tiles)


def naive_placement(graph: InteractionGraph, dims: tuple[int, int] | None = None) -> Placement:
    """Row-major placement in vertex-id order (the unoptimized baseline)."""
    vertices = graph.vertices
    if dims is None:
        dims = grid_dims(len(vertices))
    rows, cols = dims
    if rows * cols < len(vertices):
        raise ValueError("grid too small")
    pos = {v: (i // cols, i % cols) for i, v in enumerate(sorted(vertices))}
    factory_tiles = {f: pos[f] for f in graph.factory_vertices}
    return Placement(rows, cols, pos, factory_tiles)
