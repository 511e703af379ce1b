"""Run configuration for experiments and the command line, loaded with msgspec."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import msgspec

from ncycle_entropic.core.types import OutputFormat
from ncycle_entropic.engine.activation import ActivationGrid


class RunConfig(msgspec.Struct, kw_only=True):
    """
    TOML-backed settings shared by every command.

    Command-line flags override file values through `with_overrides`;
    unset flags (None) leave the file value alone.
    """

    # Tolerances
    construction_tol: float = 1e-12
    data_tol: float = 1e-9
    violation_tol: float = 1e-9
    disturbance_tol: float = 1e-9

    # Activation grid
    v_max: float = 0.5
    v_min: float = 1e-8
    grid_points: int = 64
    refine: bool = True
    deep_tail: bool = True

    # Scenario
    n: int = 4
    d: int = 2
    epsilon: float = 0.9
    depolarize: bool = True
    conjecture: bool = False

    # Experiment sizes
    trials: int = 1000
    min_nonlocal: int = 100
    seed: int = 2024
    workers: int = 1

    output_format: OutputFormat = "table"

    def __post_init__(self) -> None:
        if self.n < 3:
            msg = f"n must be at least 3, got {self.n}"
            raise ValueError(msg)
        if self.d < 2:
            msg = f"d must be at least 2, got {self.d}"
            raise ValueError(msg)
        if not 0.0 <= self.epsilon <= 1.0:
            msg = f"epsilon must lie in [0, 1], got {self.epsilon}"
            raise ValueError(msg)
        if self.trials < 1 or self.workers < 1:
            msg = "trials and workers must be positive"
            raise ValueError(msg)
        if self.min_nonlocal < 0:
            msg = f"min_nonlocal must not be negative, got {self.min_nonlocal}"
            raise ValueError(msg)
        for name in ("construction_tol", "data_tol", "violation_tol", "disturbance_tol"):
            if getattr(self, name) <= 0.0:
                msg = f"{name} must be positive"
                raise ValueError(msg)

    @classmethod
    def from_toml(cls, path: str | Path) -> RunConfig:
        """Load configuration from a TOML file path."""
        with Path(path).open("rb") as f:
            return msgspec.toml.decode(f.read(), type=cls)

    def with_overrides(self, **overrides: Any) -> RunConfig:
        """Copy with every non-None override applied, validated again."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        merged = msgspec.structs.asdict(self) | changes
        return msgspec.convert(merged, type=RunConfig)

    def grid(self) -> ActivationGrid:
        return ActivationGrid(
            v_max=self.v_max,
            v_min=self.v_min,
            points=self.grid_points,
            refine=self.refine,
            deep_tail=self.deep_tail,
        )
