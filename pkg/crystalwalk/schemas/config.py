"""
Pydantic schema for run configuration files
"""

import json
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from crystalwalk.core.errors import ConfigError
from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import GeometryParams, LatticeKind
from crystalwalk.models.walk import U64_MAX, WalkMode
from crystalwalk.services import kernels


class OutputPaths(BaseModel):
    """Optional output files"""

    model_config = ConfigDict(extra="forbid")

    trajectory: Optional[str] = Field(None, description="Trajectory CSV")
    summary: Optional[str] = Field(None, description="Walk or asymptotics JSON")
    report: Optional[str] = Field(None, description="Verification report JSON")


class RunConfig(BaseModel):
    """
    Model and run parameters

    `horizontal` rows follow the table layout: [i][j'] on ice, [i][j][k']
    on graphite. Omitted rows default to uniform ones.
    """

    model_config = ConfigDict(extra="forbid")

    lattice: LatticeKind = LatticeKind.ICE
    a: float = Field(1.0, gt=0, description="Intra-sheet bond length")
    h: float = Field(1.0, gt=0, description="Inter-sheet spacing")
    p: float = Field(0.2, ge=0, le=1, description="Vertical-jump probability")
    alpha: float = Field(0.5, gt=0, lt=1, description="Upward share of vertical jumps")
    horizontal: Optional[List] = Field(None, description="Horizontal probability rows")
    steps: int = Field(10_000, ge=0, description="Steps per path")
    replicates: int = Field(100_000, ge=2, description="Independent paths in a batch")
    seed: Optional[int] = Field(None, ge=0, le=U64_MAX)
    mode: WalkMode = WalkMode.SUMMARY
    outputs: OutputPaths = Field(default_factory=OutputPaths)

    @model_validator(mode="after")
    def check_rows(self) -> "RunConfig":
        """Row shape must match the lattice; sums and ranges are checked by to_table"""
        if self.horizontal is None:
            return self
        expected = (2, 3) if self.lattice is LatticeKind.ICE else (2, 2, 3)
        try:
            shape = np.shape(np.asarray(self.horizontal, dtype=float))
        except (TypeError, ValueError):
            raise ValueError("horizontal rows must be numbers")
        if shape != expected:
            raise ValueError(f"horizontal must have shape {expected} for the {self.lattice.value} lattice, got {shape}")
        return self

    def to_table(self) -> TransitionTable:
        """
        Build and validate the transition table

        Raises:
            NormalizationError: Row sum differs from its target
            RangeError: Entry outside its admissible range
        """
        geometry = GeometryParams(a=self.a, h=self.h)
        if self.horizontal is None:
            table = TransitionTable.symmetric(self.lattice, p=self.p, alpha=self.alpha, geometry=geometry)
        else:
            table = TransitionTable(
                kind=self.lattice, p=self.p, alpha=self.alpha, horizontal=self.horizontal, geometry=geometry
            )
        kernels.validate(table)
        return table

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        """
        Read a JSON config file

        Raises:
            ConfigError: File missing or not JSON
            pydantic.ValidationError: Unknown key or constraint violated
        """
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e.strerror}")
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"{path} is not valid JSON: {e.msg} at line {e.lineno}")
        if not isinstance(raw, dict):
            raise ConfigError("config", f"{path} must hold a JSON object")
        return cls.model_validate(raw)
