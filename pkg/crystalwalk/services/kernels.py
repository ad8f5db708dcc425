"""
Transition-table validation and exact one-step moments per vertex class
"""

import logging
import math
from typing import List, Optional

import numpy as np

from crystalwalk.core.errors import NormalizationError, RangeError
from crystalwalk.models.kernel import IncrementAtom, SignMoments, TransitionTable
from crystalwalk.models.lattice import LatticeKind, LatticeState, MoveLabel, VertexClass
from crystalwalk.services.lattice import HORIZONTAL_DIRECTIONS, admissible_moves, apply_move, vertex_classes

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12


def _check_probability(field: str, value: float) -> None:
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise RangeError(field, value, "0 <= value <= 1")


def validate(table: TransitionTable) -> None:
    """
    Check every probability range and row normalization of a table

    Args:
        table: Table to check

    Raises:
        RangeError: Entry outside [0, 1] or alpha outside (0, 1)
        NormalizationError: Row sum differs from its target by more than 1e-12
    """
    _check_probability("p", table.p)
    if not math.isfinite(table.alpha) or not 0.0 < table.alpha < 1.0:
        raise RangeError("alpha", table.alpha, "0 < alpha < 1")

    for vc in vertex_classes(table.kind):
        row = table.row(vc)
        name = f"{vc.i}" if table.kind is LatticeKind.ICE else f"(i={vc.i}, j={vc.j})"
        for direction, value in enumerate(row):
            _check_probability(f"horizontal[{name}][{direction}]", value)
        expected = 1.0 - table.p if table.vertical_allowed(vc) else 1.0
        residual = math.fsum(row) - expected
        if abs(residual) > NORMALIZATION_TOL:
            raise NormalizationError(name, residual, expected)


def displacement(table: TransitionTable, vertex_class: VertexClass, move: MoveLabel) -> np.ndarray:
    """Real increment of `move` taken from a vertex of `vertex_class`"""
    geometry = table.geometry
    if move is MoveLabel.UP:
        return np.array([0.0, 0.0, geometry.h])
    if move is MoveLabel.DOWN:
        return np.array([0.0, 0.0, -geometry.h])
    ux, uy = HORIZONTAL_DIRECTIONS[move.direction]
    sign = vertex_class.i_sign
    return np.array([sign * geometry.a * ux, sign * geometry.a * uy, 0.0])


def move_probability(table: TransitionTable, vertex_class: VertexClass, move: MoveLabel) -> float:
    if move is MoveLabel.UP:
        return table.alpha * table.p if table.vertical_allowed(vertex_class) else 0.0
    if move is MoveLabel.DOWN:
        return (1.0 - table.alpha) * table.p if table.vertical_allowed(vertex_class) else 0.0
    return table.row(vertex_class)[move.direction]


def increment_distribution(table: TransitionTable, vertex_class: VertexClass) -> List[IncrementAtom]:
    """
    Support of the increment law given the current class

    Atoms come in the fixed order Up, Down, H0, H1, H2; moves with zero
    probability are left out.
    """
    here = LatticeState(vertex_class=vertex_class)
    atoms = []
    for move in admissible_moves(vertex_class, table.kind):
        prob = move_probability(table, vertex_class, move)
        if prob <= 0.0:
            continue
        atoms.append(
            IncrementAtom(
                move=move,
                displacement=displacement(table, vertex_class, move),
                probability=prob,
                class_after=apply_move(here, move, table.kind).vertex_class,
            )
        )
    return atoms


def conditional_mean(table: TransitionTable, vertex_class: VertexClass) -> np.ndarray:
    """E[xi' | class] by brute force over the atoms"""
    mean = np.zeros(3)
    for atom in increment_distribution(table, vertex_class):
        mean += atom.probability * atom.displacement
    return mean


def conditional_second_moment(table: TransitionTable, vertex_class: VertexClass) -> np.ndarray:
    """E[xi' xi'^T | class] by brute force over the atoms"""
    second = np.zeros((3, 3))
    for atom in increment_distribution(table, vertex_class):
        second += atom.probability * np.outer(atom.displacement, atom.displacement)
    return second


def conditional_covariance(table: TransitionTable, vertex_class: VertexClass) -> np.ndarray:
    mean = conditional_mean(table, vertex_class)
    return conditional_second_moment(table, vertex_class) - np.outer(mean, mean)


def sign_moments(table: TransitionTable, vertex_class: VertexClass) -> SignMoments:
    """Conditional moments of the next class signs, jointly with the increment"""
    size = len(vertex_class.signs)
    mean = np.zeros(size)
    second = np.zeros((size, size))
    cross = np.zeros((3, size))
    for atom in increment_distribution(table, vertex_class):
        s = np.array(atom.class_after.signs, dtype=float)
        mean += atom.probability * s
        second += atom.probability * np.outer(s, s)
        cross += atom.probability * np.outer(atom.displacement, s)
    return SignMoments(mean=mean, second=second, cross=cross)


def random_table(
    kind: LatticeKind, rng: np.random.Generator, p: Optional[float] = None, alpha: Optional[float] = None
) -> TransitionTable:
    """
    Draw a valid table with Dirichlet horizontal rows

    Args:
        kind: Lattice structure
        rng: Source of randomness
        p: Fixed vertical probability, drawn uniformly when omitted
        alpha: Fixed upward share, drawn uniformly in (0, 1) when omitted

    Returns:
        A table that passes `validate`
    """
    if p is None:
        p = float(rng.uniform(0.0, 1.0))
    if alpha is None:
        alpha = float(rng.uniform(0.01, 0.99))

    def row(total: float) -> List[float]:
        shares = rng.dirichlet(np.ones(3))
        values = [float(total * s) for s in shares[:2]]
        # last entry absorbs rounding so the row sums to `total` exactly enough
        values.append(max(0.0, total - values[0] - values[1]))
        return values

    if kind is LatticeKind.ICE:
        rows = [row(1.0 - p), row(1.0 - p)]
    else:
        rows = [[row(1.0 - p), row(1.0)], [row(1.0 - p), row(1.0)]]
    geometry = {"a": float(rng.uniform(0.5, 2.0)), "h": float(rng.uniform(0.5, 2.0))}
    table = TransitionTable(kind=kind, p=p, alpha=alpha, horizontal=rows, geometry=geometry)
    validate(table)
    return table
