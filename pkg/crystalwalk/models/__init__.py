"""
Domain models: lattice states, transition tables, walk records, asymptotic summaries
"""

from crystalwalk.models.kernel import IncrementAtom, SignMoments, TransitionTable
from crystalwalk.models.lattice import GeometryParams, LatticeKind, LatticeState, MoveLabel, VertexClass
from crystalwalk.models.summary import AsymptoticSummary, DerivedRates
from crystalwalk.models.walk import (
    BatchStatistics,
    CheckpointSample,
    MartingaleLedger,
    RngSpec,
    WalkMode,
    WalkRecord,
)

__all__ = [
    "LatticeKind",
    "MoveLabel",
    "GeometryParams",
    "VertexClass",
    "LatticeState",
    "TransitionTable",
    "IncrementAtom",
    "SignMoments",
    "DerivedRates",
    "AsymptoticSummary",
    "WalkMode",
    "RngSpec",
    "MartingaleLedger",
    "WalkRecord",
    "CheckpointSample",
    "BatchStatistics",
]
