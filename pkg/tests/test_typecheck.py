"""
타입 검사 테스트
식/명령 규칙, 진단 위치, 컨텍스트 병합, 프리셋 회로의 수락/거부
"""
import json

import pytest

from conftest import circuit_path, preset
from corpus import psi_source, square_source
from ir import Assign, Const, If, InputDecl, Op, Seq, Skip, Var, compile_source, load_circuit
from model_core import MsgBound, PlainBound, Sort
from schemes import BgvCipherBound, build_model
from typecheck import (
    Diagnosis, Type, TypingContext, budget_bits, check_program, context_report, initial_context,
    join_types, merge_contexts, subtype, type_cmd, type_expr,
)


def _compile(model, source):
    return compile_source(source, modulus=model.params.t)


def _cipher(model, inf, sup, eps, level=None):
    level = model.params.top_level if level is None else level
    return Type(Sort.CIPHER, BgvCipherBound(inf, sup, eps, level))


class TestTypeExpr:
    def test_var_and_const(self, bgv_model):
        ctx = TypingContext({'x': _cipher(bgv_model, 0, 1, 10)})
        assert type_expr(bgv_model, ctx, Var('x')) == ctx['x']
        assert type_expr(bgv_model, ctx, Const(3)) == Type(Sort.MSG, MsgBound(3))
        plain = type_expr(bgv_model, ctx, Const(3, Sort.PLAIN))
        assert plain.sort == Sort.PLAIN
        assert plain.bound == PlainBound(3, 3)

    def test_undefined_variable_is_sort_error(self, bgv_model):
        result = type_expr(bgv_model, {}, Var('nope'))
        assert isinstance(result, Diagnosis)
        assert result.kind == 'sort'

    def test_add_joins_intervals(self, bgv_model):
        ctx = {'a': _cipher(bgv_model, 0, 1, 10), 'b': _cipher(bgv_model, 1, 3, 20)}
        ty = type_expr(bgv_model, ctx, Op('add', (Var('a'), Var('b'))))
        assert ty.sort == Sort.CIPHER
        assert (ty.bound.inf, ty.bound.sup) == (1, 4)
        assert ty.bound.eps == 30

    def test_value_overflow(self, bgv_model):
        ctx = {'a': _cipher(bgv_model, 7, 7, 10)}
        result = type_expr(bgv_model, ctx, Op('add', (Var('a'), Var('a'))))
        assert isinstance(result, Diagnosis)
        assert result.kind == 'value'
        assert result.operator == 'add'

    def test_level_mismatch(self, bgv_model):
        top = bgv_model.params.top_level
        ctx = {'a': _cipher(bgv_model, 0, 1, 10, top), 'b': _cipher(bgv_model, 0, 1, 10, top - 1)}
        result = type_expr(bgv_model, ctx, Op('mul', (Var('a'), Var('b'))))
        assert result.kind == 'level'

    def test_sort_mismatch(self, bgv_model):
        ctx = {'a': _cipher(bgv_model, 0, 1, 10)}
        result = type_expr(bgv_model, ctx, Op('add', (Var('a'), Const(1))))
        assert result.kind == 'sort'

    def test_unknown_operator(self, bgv_model):
        result = type_expr(bgv_model, {}, Op('rotate', (Const(1),)))
        assert result.kind == 'sort'
        assert result.operator == 'rotate'

    def test_scalar_of_unknown_message(self, bgv_model):
        ctx = {'m': Type(Sort.MSG, MsgBound()), 'a': _cipher(bgv_model, 0, 1, 10)}
        result = type_expr(bgv_model, ctx, Op('scalar', (Var('m'), Var('a'))))
        assert result.kind == 'value'


class TestSubtyping:
    def test_smaller_interval_and_noise_is_subtype(self, bgv_model):
        small = _cipher(bgv_model, 0, 1, 10)
        big = _cipher(bgv_model, -1, 2, 20)
        assert subtype(small, big)
        assert not subtype(big, small)

    def test_different_levels_are_incomparable(self, bgv_model):
        top = bgv_model.params.top_level
        assert not subtype(_cipher(bgv_model, 0, 1, 10, top), _cipher(bgv_model, 0, 1, 10, top - 1))
        assert join_types(_cipher(bgv_model, 0, 1, 10, top), _cipher(bgv_model, 0, 1, 10, top - 1)) is None

    def test_different_sorts(self, bgv_model):
        assert not subtype(Type(Sort.MSG, MsgBound(1)), _cipher(bgv_model, 1, 1, 1))


class TestCommands:
    def test_merge_contexts(self, bgv_model):
        top = bgv_model.params.top_level
        g1 = TypingContext({'y': _cipher(bgv_model, 0, 1, 10), 'w': _cipher(bgv_model, 0, 0, 5, top)})
        g2 = TypingContext({'y': _cipher(bgv_model, -1, 0, 20), 'z': _cipher(bgv_model, 0, 0, 1),
                            'w': _cipher(bgv_model, 0, 0, 5, top - 1)})
        merged = merge_contexts(g1, g2)
        assert list(merged) == ['y']
        assert merged['y'] == _cipher(bgv_model, -1, 1, 20)

    def test_dynamic_if_merges_branches(self, bgv_model):
        ctx = TypingContext({'m': Type(Sort.MSG, MsgBound()), 'a': _cipher(bgv_model, 0, 1, 10)})
        cmd = If(Var('m'),
                 Assign('y', Op('add', (Var('a'), Var('a')))),
                 Seq((Assign('y', Var('a')), Assign('z', Var('a')))))
        result = type_cmd(bgv_model, ctx, cmd)
        assert isinstance(result, TypingContext)
        assert 'z' not in result
        assert result['y'].bound.sup == 2
        assert result['y'].bound.eps == 20

    def test_cipher_guard_is_rejected(self, bgv_model):
        ctx = TypingContext({'a': _cipher(bgv_model, 0, 1, 10)})
        result = type_cmd(bgv_model, ctx, If(Var('a'), Skip(), Skip()))
        assert result.kind == 'sort'
        assert result.var == 'if'
        assert result.index == 0

    def test_skip_keeps_context(self, bgv_model):
        ctx = TypingContext({'a': _cipher(bgv_model, 0, 1, 10)})
        assert type_cmd(bgv_model, ctx, Skip()) == ctx

    def test_failure_index_counts_assignments(self, bgv_model):
        program = _compile(bgv_model, "X := cipher_init[7]\nx := X[0]\ny := x (+) x\nz := y (+) y\n")
        result = check_program(bgv_model, program)
        assert result.kind == 'value'
        assert result.var == 'y'
        assert result.index == 1
        assert result.position[0] == 3


class TestInitialContext:
    def test_input_hull_types(self, bgv_model):
        ctx = initial_context(bgv_model, [InputDecl('A[0]', 'cipher', 1, 1, 3),
                                          InputDecl('A[1]', 'cipher', 3, 1, 3),
                                          InputDecl('P[0]', 'plain', 2, 2, 2)])
        assert ctx['A[0]'] == ctx['A[1]']
        assert ctx['A[0]'].bound.eps == bgv_model.params.fresh_noise
        assert ctx['A[0]'].bound.level == bgv_model.params.top_level
        assert ctx['P[0]'].sort == Sort.PLAIN

    def test_out_of_range_input(self, bgv_model):
        result = initial_context(bgv_model, [InputDecl('X[0]', 'cipher', 8, 8, 8)])
        assert isinstance(result, Diagnosis)
        assert result.kind == 'value'
        assert result.var == 'X[0]'

    def test_lower_edge_is_allowed(self, bgv_model):
        ctx = initial_context(bgv_model, [InputDecl('X[0]', 'cipher', -8, -8, 7)])
        assert isinstance(ctx, TypingContext)


class TestPresets:
    @pytest.mark.parametrize('k, accepted', [(1, True), (2, True), (3, True), (4, False), (5, False)])
    def test_square_chain_on_square_preset(self, k, accepted):
        model = build_model(preset('bgv_square'))
        result = check_program(model, _compile(model, square_source(k)))
        assert isinstance(result, TypingContext) is accepted

    def test_square16_diagnosis(self):
        model = build_model(preset('bgv_square'))
        result = check_program(model, _compile(model, load_circuit(circuit_path('square16'))))
        assert result.kind == 'noise'
        assert result.operator == 'mul'
        assert result.var == 'c5'
        assert result.index == 4
        assert result.budget_bits < 0

    def test_psi_generous_accepts(self):
        model = build_model(preset('psi_generous'))
        assert isinstance(check_program(model, _compile(model, load_circuit(circuit_path('psi')))), TypingContext)
        assert isinstance(check_program(model, _compile(model, psi_source([1, 3, 5], [2, 3]))), TypingContext)

    def test_psi_tight_rejects_longer_set(self):
        model = build_model(preset('psi_tight'))
        result = check_program(model, _compile(model, load_circuit(circuit_path('psi_len4'))))
        assert isinstance(result, Diagnosis)
        assert result.kind == 'noise'

    def test_tfhe_addition_chain(self):
        model = build_model(preset('tfhe_small'))
        result = check_program(model, _compile(model, load_circuit(circuit_path('tfhe_add16'))))
        assert result.kind == 'value'
        assert result.operator == 'add'
        assert result.index == 16

    def test_check_needs_no_secret(self):
        model = build_model(preset('bgv_square'))
        assert model.secret is None
        check_program(model, _compile(model, square_source(3)))


class TestReports:
    def test_budget_bits(self, bgv_model):
        ty = _cipher(bgv_model, 0, 1, bgv_model.params.fresh_noise)
        assert budget_bits(bgv_model, ty) > 0
        assert budget_bits(bgv_model, Type(Sort.MSG, MsgBound(1))) is None

    def test_context_report(self, bgv_model):
        program = _compile(bgv_model, "X := cipher_init[1]\nc := X[0] (*) X[0]\nm := 3\n")
        ctx = check_program(bgv_model, program)
        rows = {row['var']: row for row in context_report(bgv_model, ctx)}
        assert rows['c']['sort'] == 'cipher'
        assert rows['c']['budget_bits'] < rows['X[0]']['budget_bits']

    def test_diagnosis_json(self, bgv_model):
        program = _compile(bgv_model, "X := cipher_init[7]\ny := X[0] (+) X[0]\n")
        payload = json.loads(check_program(bgv_model, program).to_json())
        assert payload['kind'] == 'value'
        assert payload['var'] == 'y'
        assert payload['line'] == 2
        assert payload['statement'] == 0
