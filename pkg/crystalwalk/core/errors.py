"""
Exception hierarchy
"""

from typing import Any, Optional


class CrystalWalkError(Exception):
    """Base class for all package errors"""


class LatticeError(CrystalWalkError):
    """Lattice state or move problem"""


class StructuralError(LatticeError):
    """Stored vertex class disagrees with the embedded coordinates"""


class DomainError(LatticeError):
    """Argument outside the domain of an operation"""


class TableError(CrystalWalkError):
    """Transition table violates its invariants"""


class NormalizationError(TableError):
    """A probability row does not sum to its required total"""

    def __init__(self, row: str, residual: float, expected: float):
        self.row = row
        self.residual = residual
        self.expected = expected
        super().__init__(f"row {row} sums to {expected + residual!r}, expected {expected!r} (residual {residual:.3g})")


class RangeError(TableError):
    """A probability or share lies outside its admissible range"""

    def __init__(self, field: str, value: float, constraint: str):
        self.field = field
        self.value = value
        self.constraint = constraint
        super().__init__(f"{field}={value!r} violates {constraint}")


class ConfigError(CrystalWalkError):
    """Malformed run configuration"""

    def __init__(self, key: str, constraint: str, value: Optional[Any] = None):
        self.key = key
        self.constraint = constraint
        self.value = value
        super().__init__(f"config key '{key}': {constraint}")
