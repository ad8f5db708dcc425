"""
Tests for lattice states, moves and coordinates
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from crystalwalk.core.errors import DomainError, StructuralError
from crystalwalk.models.lattice import GeometryParams, LatticeKind, LatticeState, MoveLabel, VertexClass
from crystalwalk.services.lattice import (
    admissible_moves,
    altitude_index,
    apply_move,
    class_from_position,
    classify,
    inverse_move,
    origin,
    position,
    sign_variables,
    vertex_classes,
)

UNIT = GeometryParams()


def _neighbors(state: LatticeState, kind: LatticeKind):
    for move in admissible_moves(state.vertex_class, kind):
        yield move, apply_move(state, move, kind)


class TestVertexClass:
    def test_ice_signs(self):
        assert VertexClass(i=0).signs == (1,)
        assert VertexClass(i=1).signs == (-1,)

    def test_graphite_signs_multiply(self):
        for vc in vertex_classes(LatticeKind.GRAPHITE):
            i, j, k = vc.signs
            assert k == i * j

    def test_table_order(self):
        labels = [vc.label for vc in vertex_classes(LatticeKind.GRAPHITE)]
        assert labels == ["V_{0,0}", "V_{1,0}", "V_{0,1}", "V_{1,1}"]
        assert [vc.index for vc in vertex_classes(LatticeKind.GRAPHITE)] == [0, 1, 2, 3]

    def test_ice_class_has_no_j_sign(self):
        with pytest.raises(AttributeError):
            VertexClass(i=0).j_sign

    def test_rejects_bad_bits(self):
        with pytest.raises(ValidationError):
            VertexClass(i=2)


class TestOrigin:
    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_origin_at_zero(self, kind):
        state = origin(kind)
        assert np.allclose(position(state, UNIT, kind), 0.0)
        assert state.vertex_class.signs[0] == 1

    def test_graphite_origin_can_jump(self):
        assert origin(LatticeKind.GRAPHITE).vertex_class.j == 0


class TestMoves:
    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_neighbor_distances(self, kind):
        geometry = GeometryParams(a=1.7, h=0.6)
        for vc in vertex_classes(kind):
            state = LatticeState(cell_k=3, cell_l=-2, sheet_n=5, vertex_class=vc)
            here = position(state, geometry, kind)
            for move, there in _neighbors(state, kind):
                step = position(there, geometry, kind) - here
                if move.is_vertical:
                    assert np.allclose(step[:2], 0.0)
                    assert math.isclose(abs(step[2]), geometry.h)
                else:
                    assert math.isclose(step[2], 0.0, abs_tol=1e-12)
                    assert math.isclose(np.hypot(step[0], step[1]), geometry.a)

    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_inverse_moves_return(self, kind):
        for vc in vertex_classes(kind):
            state = LatticeState(cell_k=-4, cell_l=7, sheet_n=-1, vertex_class=vc)
            for move, there in _neighbors(state, kind):
                assert apply_move(there, inverse_move(move), kind) == state

    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_horizontal_moves_flip_color(self, kind):
        for vc in vertex_classes(kind):
            state = LatticeState(vertex_class=vc)
            for direction in range(3):
                there = apply_move(state, MoveLabel.horizontal(direction), kind)
                assert there.vertex_class.i == 1 - vc.i

    def test_ice_vertical_keeps_class(self):
        state = LatticeState(vertex_class=VertexClass(i=1))
        up = apply_move(state, MoveLabel.UP, LatticeKind.ICE)
        assert up.vertex_class == state.vertex_class
        assert up.sheet_n == 1

    def test_graphite_vertical_alternates_height(self):
        kind = LatticeKind.GRAPHITE
        state = origin(kind)
        heights = [altitude_index(state, kind)]
        for _ in range(4):
            state = apply_move(state, MoveLabel.UP, kind)
            heights.append(altitude_index(state, kind))
        assert heights == [0, 1, 2, 3, 4]

    def test_graphite_j1_cannot_jump(self):
        kind = LatticeKind.GRAPHITE
        state = LatticeState(vertex_class=VertexClass(i=0, j=1))
        assert admissible_moves(state.vertex_class, kind) == (MoveLabel.H0, MoveLabel.H1, MoveLabel.H2)
        with pytest.raises(DomainError):
            apply_move(state, MoveLabel.UP, kind)

    def test_graphite_horizontal_flips_j(self):
        kind = LatticeKind.GRAPHITE
        there = apply_move(origin(kind), MoveLabel.H0, kind)
        assert there.vertex_class == VertexClass(i=1, j=1)

    def test_kind_mismatch(self):
        with pytest.raises(StructuralError):
            apply_move(origin(LatticeKind.ICE), MoveLabel.H0, LatticeKind.GRAPHITE)


class TestClassification:
    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_position_roundtrip(self, kind):
        geometry = GeometryParams(a=0.7, h=2.1)
        for vc in vertex_classes(kind):
            state = LatticeState(cell_k=-5, cell_l=9, sheet_n=3, vertex_class=vc)
            assert class_from_position(position(state, geometry, kind), geometry, kind) == state

    def test_off_lattice_point(self):
        with pytest.raises(StructuralError):
            class_from_position((0.5, 0.0, 0.0), UNIT, LatticeKind.ICE)

    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_classify_with_coordinate_check(self, kind):
        for vc in vertex_classes(kind):
            state = LatticeState(cell_k=2, cell_l=-3, sheet_n=-4, vertex_class=vc)
            assert classify(state, kind, verify_coordinates=True) == vc

    def test_classify_kind_mismatch(self):
        with pytest.raises(StructuralError):
            classify(LatticeState(vertex_class=VertexClass(i=0)), LatticeKind.GRAPHITE)

    def test_sign_variables(self):
        assert sign_variables(VertexClass(i=1, j=1)) == (-1, -1, 1)

    def test_index_overflow_rejected(self):
        with pytest.raises(ValidationError):
            LatticeState(cell_k=1 << 62, vertex_class=VertexClass(i=0))
