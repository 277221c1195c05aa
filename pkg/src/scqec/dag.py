"""Dependency DAG over a logical circuit, with criticality metrics.

An edge runs from each op to the next op (in program order) touching one
of its operands -- last-writer dependencies, no commutation analysis.
Criticality is the longest latency-weighted path from a node to any sink.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .ir import LogicalCircuit, OpKind


@dataclass(frozen=True)
class LatencyModel:
    """Per-kind op latencies in logical cycles, for a given code distance."""

    cycles: dict[OpKind, int]

    def __getitem__(self, kind: OpKind) -> int:
        return self.cycles[kind]

    @classmethod
    def for_distance(cls, d: int) -> "LatencyModel":
        oneq = math.ceil((2 * d + 2) / 10)  # single-qubit ops run 10x faster
        return cls(
            {
                OpKind.H: oneq,
                OpKind.X: oneq,
                OpKind.Z: oneq,
                OpKind.S: oneq,
                OpKind.T: d + 1,
                OpKind.CNOT: 2 * d + 3,
                OpKind.MEASURE: 1,
                OpKind.PREPARE: 1,
            }
        )


@dataclass(frozen=True)
class DepDag:
    circuit: LogicalCircuit
    edges: tuple[tuple[int, int], ...]
    criticality: tuple[int, ...]
    critical_path_length: int
    preds: dict[int, tuple[int, ...]] = field(repr=False, default_factory=dict)
    succs: dict[int, tuple[int, ...]] = field(repr=False, default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return len(self.circuit.ops)

    def to_json(self) -> str:
        return json.dumps(
            {
                "nodes": [
                    {
                        "id": op.id,
                        "kind": op.kind.name,
                        "operands": list(op.operands),
                        "criticality": self.criticality[op.id],
                    }
                    for op in self.circuit.ops
                ],
                "edges": [list(e) for e in self.edges],
                "critical_path_length": self.critical_path_length,
            },
            indent=2,
        )


def build_dag(circuit: LogicalCircuit, latency_model: LatencyModel) -> DepDag:
    """Build last-writer dependency edges and latency-weighted criticality."""
    last_toucher: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    preds: dict[int, list[int]] = {op.id: [] for op in circuit.ops}
    succs: dict[int, list[int]] = {op.id: [] for op in circuit.ops}
    for op in circuit.ops:
        dep_ids = {last_toucher[q] for q in op.operands if q in last_toucher}
        for dep in sorted(dep_ids):
            edges.append((dep, op.id))
            preds[op.id].append(dep)
            succs[dep].append(op.id)
        for q in op.operands:
            last_toucher[q] = op.id

    # Ops are in topological order by construction; sweep in reverse.
    criticality = [0] * len(circuit.ops)
    for op in reversed(circuit.ops):
        tail = max((criticality[s] for s in succs[op.id]), default=0)
        criticality[op.id] = latency_model[op.kind] + tail
    cpl = max(criticality, default=0)
    return DepDag(
        circuit=circuit,
        edges=tuple(edges),
        criticality=tuple(criticality),
        critical_path_length=cpl,
        preds={k: tuple(v) for k, v in preds.items()},
        succs={k: tuple(v) for k, v in succs.items()},
    )


@dataclass(frozen=True)
class ParallelismProfile:
    parallelism_factor: float
    total_ops: int
    t_count: int
    twoq_count: int
    num_qubits: int


def asap_levels(dag: DepDag) -> list[int]:
    """ASAP level of each op under unbounded resources (unit level depth)."""
    levels = [0] * dag.num_nodes
    for op in dag.circuit.ops:
        levels[op.id] = max(
            (levels[p] + 1 for p in dag.preds[op.id]), default=0
        )
    return levels


def parallelism_profile(dag: DepDag) -> ParallelismProfile:
    levels = asap_levels(dag)
    num_levels = max(levels) + 1 if levels else 1
    total = dag.num_nodes
    return ParallelismProfile(
        parallelism_factor=total / num_levels if total else 1.0,
        total_ops=total,
        t_count=dag.circuit.t_count,
        twoq_count=dag.circuit.twoq_count,
        num_qubits=dag.circuit.num_qubits,
    )
