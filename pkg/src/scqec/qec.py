"""Code-distance selection and physical footprint sizing.

Maps an application's size and the device error rate to a code distance,
then to per-tile physical qubit counts and ancilla-factory provisioning
for the planar and double-defect encodings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from enum import Enum

from .dag import ParallelismProfile


class Encoding(Enum):
    PLANAR = "planar"
    DOUBLE_DEFECT = "double_defect"


class UncorrectableTechnologyError(ValueError):
    """Physical error rate at or above threshold: no distance suffices."""


@dataclass(frozen=True)
class QecConfig:
    """Tunable constants of the error-suppression and footprint models."""

    suppression_prefactor: float = 0.03  # A in A * (p/p_th)^ceil(d/2)
    threshold: float = 1e-2  # p_th
    dd_tile_multiplier: float = 2.0  # double-defect tile vs planar, equal d
    syndrome_cycle_seconds: float = 1e-6
    ancilla_ratio: int = 4  # data tiles per ancilla tile (1:4)
    factory_size_tiles: int = 12
    channel_overhead_fraction: float = 0.25

    @classmethod
    def from_json(cls, path: str) -> "QecConfig":
        with open(path) as f:
            data = json.load(f)
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ErrorBudget:
    total_logical_ops: int
    success_target: float
    p_L: float
    p_P: float

    def __post_init__(self):
        if not 0 < self.p_P < 1:
            raise ValueError("p_P must be in (0, 1)")
        if not 0 < self.p_L < 1:
            raise ValueError("p_L must be in (0, 1)")


@dataclass(frozen=True)
class CodeParams:
    encoding: Encoding
    d: int
    physical_qubits_per_tile: int
    syndrome_cycle_seconds: float
    factory_tiles_magic: int
    factory_tiles_epr: int
    ancilla_to_data_ratio: float = 1 / 4

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError("code distance must be an odd integer >= 3")


def required_logical_rate(total_logical_ops: int, success_target: float = 0.5) -> float:
    """Per-operation logical error rate needed to meet the success target."""
    if total_logical_ops < 1:
        raise ValueError("total_logical_ops must be >= 1")
    if not 0 < success_target < 1:
        raise ValueError("success_target must be in (0, 1)")
    return (1 - success_target) / total_logical_ops


def model_logical_rate(p_P: float, d: int, config: QecConfig = QecConfig()) -> float:
    """Modeled per-operation logical error rate at distance d."""
    if d < 3 or d % 2 == 0:
        raise ValueError("code distance must be an odd integer >= 3")
    return config.suppression_prefactor * (p_P / config.threshold) ** math.ceil(d / 2)


def choose_distance(p_P: float, p_L: float, config: QecConfig = QecConfig(),
                    max_distance: int = 501) -> int:
    """Smallest odd d >= 3 whose modeled logical rate is at most p_L."""
    if p_P >= config.threshold:
        raise UncorrectableTechnologyError(
            f"p_P={p_P:g} at or above threshold {config.threshold:g}"
        )
    d = 3
    while d <= max_distance:
        if model_logical_rate(p_P, d, config) <= p_L:
            return d
        d += 2
    raise UncorrectableTechnologyError(
        f"no distance <= {max_distance} reaches p_L={p_L:g} at p_P={p_P:g}"
    )


def tile_footprint(encoding: Encoding, d: int, config: QecConfig = QecConfig()) -> int:
    """Physical qubits in one logical tile at distance d."""
    if d < 3 or d % 2 == 0:
        raise ValueError("code distance must be an odd integer >= 3")
    planar = (2 * d - 1) ** 2
    if encoding is Encoding.PLANAR:
        return planar
    return math.ceil(config.dd_tile_multiplier * planar)


@dataclass(frozen=True)
class FactoryPlan:
    data_tiles: int
    magic_factories: int
    epr_factories: int
    factory_size_tiles: int
    ancilla_ratio: int

    @property
    def magic_factory_tiles(self) -> int:
        return self.magic_factories * self.factory_size_tiles

    @property
    def epr_factory_tiles(self) -> int:
        return self.epr_factories * self.factory_size_tiles

    def factory_tiles(self, encoding: Encoding) -> int:
        if encoding is Encoding.PLANAR:
            return self.magic_factory_tiles + self.epr_factory_tiles
        return self.magic_factory_tiles


def factory_plan(profile: ParallelismProfile, config: QecConfig = QecConfig()) -> FactoryPlan:
    """Size ancilla factories from the data footprint at the 1:4 ratio.

    The ancilla tile budget is data_tiles / ancilla_ratio; each factory
    occupies factory_size_tiles of it, with a floor of one factory.
    """
    data_tiles = profile.num_qubits
    budget = data_tiles / config.ancilla_ratio
    n = max(1, math.ceil(budget / config.factory_size_tiles))
    return FactoryPlan(
        data_tiles=data_tiles,
        magic_factories=n,
        epr_factories=n,
        factory_size_tiles=config.factory_size_tiles,
        ancilla_ratio=config.ancilla_ratio,
    )


def code_params(encoding: Encoding, d: int, plan: FactoryPlan,
                config: QecConfig = QecConfig()) -> CodeParams:
    return CodeParams(
        encoding=encoding,
        d=d,
        physical_qubits_per_tile=tile_footprint(encoding, d, config),
        syndrome_cycle_seconds=config.syndrome_cycle_seconds,
        factory_tiles_magic=plan.magic_factory_tiles,
        factory_tiles_epr=plan.epr_factory_tiles if encoding is Encoding.PLANAR else 0,
        ancilla_to_data_ratio=1 / config.ancilla_ratio,
    )
