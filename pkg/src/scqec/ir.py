"""Logical circuit representation: a flat list of typed operations.

Circuits are read from a small line-oriented assembly format (see
``parse_qasm``), or generated synthetically with a target parallelism
profile (see ``synth_workload``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum


class OpKind(Enum):
    H = "h"
    X = "x"
    Z = "z"
    S = "s"
    T = "t"
    CNOT = "cnot"
    MEASURE = "measure"
    PREPARE = "prepare"

    @property
    def arity(self) -> int:
        return 2 if self is OpKind.CNOT else 1

    @property
    def consumes_magic_state(self) -> bool:
        return self is OpKind.T


class ParseError(ValueError):
    """Malformed circuit text. Carries the 1-based source line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LogicalOp:
    id: int
    kind: OpKind
    operands: tuple[int, ...]

    def __post_init__(self):
        if len(self.operands) != self.kind.arity:
            raise ValueError(
                f"{self.kind.name} takes {self.kind.arity} operand(s), "
                f"got {len(self.operands)}"
            )
        if self.kind is OpKind.CNOT and self.operands[0] == self.operands[1]:
            raise ValueError("CNOT operands must be distinct")


@dataclass(frozen=True)
class LogicalCircuit:
    num_qubits: int
    ops: tuple[LogicalOp, ...]

    def __post_init__(self):
        for op in self.ops:
            for q in op.operands:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"op {op.id}: operand q{q} out of range")
        ids = [op.id for op in self.ops]
        if ids != list(range(len(ids))):
            raise ValueError("op ids must be dense and in order")

    @property
    def t_count(self) -> int:
        return sum(1 for op in self.ops if op.kind is OpKind.T)

    @property
    def twoq_count(self) -> int:
        return sum(1 for op in self.ops if op.kind.arity == 2)


def parse_qasm(text: str) -> LogicalCircuit:
    """Parse circuit text into a :class:`LogicalCircuit`.

    Format: first non-comment line is ``qubits N``; each following line is
    one operation, e.g. ``cnot q0 q1`` or ``t q3``. ``#`` starts a comment
    and gate names are case-insensitive.
    """
    num_qubits = None
    ops: list[LogicalOp] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.lower().split()
        if tokens[0] == "qubits":
            if num_qubits is not None:
                raise ParseError("duplicate qubits declaration", lineno)
            if len(tokens) != 2:
                raise ParseError("expected: qubits <N>", lineno)
            try:
                num_qubits = int(tokens[1])
            except ValueError:
                raise ParseError(f"bad qubit count {tokens[1]!r}", lineno) from None
            if num_qubits <= 0:
                raise ParseError("qubit count must be positive", lineno)
            continue
        if num_qubits is None:
            raise ParseError("missing qubits declaration", lineno)
        try:
            kind = OpKind(tokens[0])
        except ValueError:
            raise ParseError(f"unknown gate {tokens[0]!r}", lineno) from None
        operands = []
        for tok in tokens[1:]:
            if not tok.startswith("q"):
                raise ParseError(f"bad operand {tok!r}", lineno)
            try:
                operands.append(int(tok[1:]))
            except ValueError:
                raise ParseError(f"bad operand {tok!r}", lineno) from None
        if len(operands) != kind.arity:
            raise ParseError(
                f"{kind.name.lower()} takes {kind.arity} operand(s)", lineno
            )
        for q in operands:
            if not 0 <= q < num_qubits:
                raise ParseError(f"operand q{q} out of range", lineno)
        if kind is OpKind.CNOT and operands[0] == operands[1]:
            raise ParseError("cnot operands must be distinct", lineno)
        ops.append(LogicalOp(len(ops), kind, tuple(operands)))
    if num_qubits is None:
        raise ParseError("empty program", 1)
    return LogicalCircuit(num_qubits, tuple(ops))


def serialize_qasm(circuit: LogicalCircuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    for op in circuit.ops:
        operands = " ".join(f"q{q}" for q in op.operands)
        lines.append(f"{op.kind.value} {operands}")
    return "\n".join(lines) + "\n"


def synth_workload(
    num_qubits: int,
    total_ops: int,
    target_parallelism: float,
    t_fraction: float,
    seed: int,
    cnot_fraction: float = 0.4,
) -> LogicalCircuit:
    """Generate a random circuit whose ideal-parallelism profile hits a target.

    Construction is layered: ops are split into levels of near-equal width
    (widths nonincreasing so every level can anchor on the previous one),
    and each op past level 0 touches one qubit written by the previous
    level, pinning its ASAP level.  Deterministic for a fixed seed.
    """
    if total_ops < 1:
        raise ValueError("total_ops must be >= 1")
    if not 0 <= t_fraction <= 1:
        raise ValueError("t_fraction must be in [0, 1]")
    if target_parallelism < 1 or target_parallelism > num_qubits:
        raise ValueError(
            f"target parallelism {target_parallelism} infeasible for "
            f"{num_qubits} qubits"
        )
    rng = random.Random(seed)

    num_levels = max(1, round(total_ops / target_parallelism))
    num_levels = min(num_levels, total_ops)
    base, extra = divmod(total_ops, num_levels)
    widths = [base + 1] * extra + [base] * (num_levels - extra)
    if widths[0] > num_qubits:
        raise ValueError("level width exceeds qubit count; lower parallelism")

    ops: list[LogicalOp] = []
    prev_written: list[int] = []
    for level, width in enumerate(widths):
        anchors = list(prev_written)
        rng.shuffle(anchors)
        anchor_set = set(anchors)
        used: set[int] = set()
        written: list[int] = []
        for _ in range(width):
            if level == 0:
                free = [q for q in range(num_qubits) if q not in used]
                a = rng.choice(free)
            else:
                a = anchors.pop()
                while a in used:
                    a = anchors.pop()
                anchor_set.discard(a)
            used.add(a)
            if rng.random() < t_fraction:
                kind = OpKind.T
                operands = (a,)
            elif rng.random() < cnot_fraction:
                # Partners must not steal qubits still needed as anchors.
                partners = [
                    q
                    for q in range(num_qubits)
                    if q != a and q not in used and q not in anchor_set
                ]
                if partners:
                    b = rng.choice(partners)
                    used.add(b)
                    written.append(b)
                    kind = OpKind.CNOT
                    operands = (a, b)
                else:
                    kind = rng.choice((OpKind.H, OpKind.X, OpKind.Z, OpKind.S))
                    operands = (a,)
            else:
                kind = rng.choice((OpKind.H, OpKind.X, OpKind.Z, OpKind.S))
                operands = (a,)
            written.append(a)
            ops.append(LogicalOp(len(ops), kind, operands))
        prev_written = written
    return LogicalCircuit(num_qubits, tuple(ops))
