"""
네이티브/메시지 의미 테스트
"""
import json

import numpy as np
import pytest

from conftest import circuit_path, preset
from corpus import psi_source, square_source
from ir import Assign, Const, Op, Var, compile_source, load_circuit, parse, seq
from model_core import MissingSecretError, MsgBound, Sort
from schemes import BgvCipherBound, build_model
from semantics import (
    EvalTrace, StuckError, check_message_equivalence, check_semantic_safety, check_well_formed,
    eval_msg, eval_native, eval_surface_msg, interp_substitution, prepare_inputs,
)
from typecheck import Type, TypingContext, check_program, initial_context, type_cmd


def _compile(model, source):
    return compile_source(source, modulus=model.params.t)


def _run(model, program, seed=11):
    gamma = prepare_inputs(model, program, np.random.default_rng(seed))
    return gamma, eval_native(model, gamma, program.body)


class TestNative:
    def test_square_chain_decrypts(self, bgv_keyed):
        program = _compile(bgv_keyed, square_source(3, value=-1))
        _, out = _run(bgv_keyed, program)
        assert bgv_keyed.interp(out['c4']) == 1
        assert bgv_keyed.interp(out['c2']) == 1

    def test_messages_pass_through(self, bgv_keyed):
        cmd = seq(Assign('m', Const(5)), Assign('p', Const(3, Sort.PLAIN)))
        out = eval_native(bgv_keyed, {}, cmd)
        assert out['m'] == 5
        assert bgv_keyed.interp(out['p']) == 3

    def test_undefined_variable_is_stuck(self, bgv_keyed):
        with pytest.raises(StuckError):
            eval_native(bgv_keyed, {}, Assign('y', Var('x')))

    def test_runtime_sort_mismatch_is_stuck(self, bgv_keyed, rng):
        gamma = {'a': bgv_keyed.make_input(1, 'cipher', rng)}
        with pytest.raises(StuckError):
            eval_native(bgv_keyed, gamma, Assign('y', Op('add', (Var('a'), Const(1)))))

    def test_modswitch_at_bottom_is_stuck(self, bgv_keyed, rng):
        gamma = {'a': bgv_keyed.encrypt(1, level=0, rng=rng)}
        with pytest.raises(StuckError):
            eval_native(bgv_keyed, gamma, Assign('y', Op('modswitch', (Var('a'),))))

    def test_trace_records_each_assignment(self, bgv_keyed):
        program = _compile(bgv_keyed, square_source(2))
        gamma = prepare_inputs(bgv_keyed, program, np.random.default_rng(3))
        trace = EvalTrace()
        eval_native(bgv_keyed, gamma, program.body, trace)
        assert len(trace) == 3
        records = [json.loads(line) for line in trace.to_json_lines().splitlines()]
        assert [r['var'] for r in records] == ['c1', 'c2', 'c3']
        assert [r['index'] for r in records] == [0, 1, 2]
        assert records[2]['measured']['eps'] is not None

    def test_trace_without_secret_has_no_measurement(self, bgv_model):
        trace = EvalTrace()
        eval_native(bgv_model, {}, Assign('m', Const(2)), trace)
        assert trace.records[0]['measured'] is None


class TestMessage:
    def test_noise_management_is_identity(self, bgv_model):
        cmd = seq(Assign('y', Op('modswitch', (Var('x'),))), Assign('z', Op('mul', (Var('y'), Var('y')))))
        out = eval_msg(bgv_model, {'x': 3}, cmd)
        assert out['y'] == 3
        assert out['z'] == -7

    def test_surface_interpreter_matches_lowering(self):
        model = build_model(preset('bgv_general'))
        source = load_circuit(circuit_path('fibonacci'))
        program = _compile(model, source)
        lowered = eval_msg(model, program.input_values(), program.body)
        surface = eval_surface_msg(model, parse(source))
        for name in ('a', 'b', 'c'):
            assert lowered[name] == surface[name]
        assert surface['b'] == 34

    def test_surface_interpreter_overrides_inputs(self):
        model = build_model(preset('psi_generous'))
        source = psi_source([1, 3], [3, 5])
        assert eval_surface_msg(model, parse(source))['result'] == 0
        assert eval_surface_msg(model, parse(source), {'B[0]': 4})['result'] != 0

    def test_surface_loop_budget(self, bgv_model):
        with pytest.raises(StuckError):
            eval_surface_msg(bgv_model, parse("i := 0\nwhile 0 < 1:\n    i := i + 1\n"))


class TestEquivalence:
    def test_psi_intersection_decrypts_to_zero(self):
        model = build_model(preset('psi_generous'), seed=5)
        for source, empty in ((psi_source([1, 3], [3, 5]), False), (psi_source([1, 3], [5, 7]), True)):
            program = _compile(model, source)
            ctx = check_program(model, program)
            assert isinstance(ctx, TypingContext)
            gamma, out = _run(model, program)
            assert (model.interp(out['result']) != 0) is empty
            assert check_semantic_safety(model, ctx, out)

    @pytest.mark.parametrize('selector, expected', [(0, 2), (1, 5)])
    def test_cmux_with_known_selector_is_safe(self, tfhe_keyed, rng, selector, expected):
        source = f"S := rgsw_init[{selector}]\nX := rlwe_init[5, 2]\npicked := cmux(S[0], X[0], X[1])\n"
        program = _compile(tfhe_keyed, source)
        ctx = check_program(tfhe_keyed, program)
        assert isinstance(ctx, TypingContext)
        out = eval_native(tfhe_keyed, prepare_inputs(tfhe_keyed, program, rng), program.body)
        assert tfhe_keyed.interp(out['picked']) == expected
        assert check_semantic_safety(tfhe_keyed, ctx, out)

    @pytest.mark.parametrize('fixture', ['bgv_keyed', 'bfv_keyed'])
    def test_large_plaintext_addition_is_safe(self, request, rng, fixture):
        model = request.getfixturevalue(fixture)
        cmd = Assign('y', Op('add', (Var('x'), Const(7, Sort.PLAIN))))
        for _ in range(20):
            ct = model.encrypt(-1, rng=rng)
            # 측정한 입력 경계에서 시작해 여유 없이 검사
            final = type_cmd(model, TypingContext({'x': Type(Sort.CIPHER, model.bound_of(ct))}), cmd)
            assert isinstance(final, TypingContext)
            out = eval_native(model, {'x': ct}, cmd)
            assert model.interp(out['y']) == 6
            assert check_semantic_safety(model, final, out)

    def test_message_equivalence_on_square(self, bgv_keyed):
        program = _compile(bgv_keyed, square_source(3, value=-1))
        ctx = initial_context(bgv_keyed, program.inputs)
        gamma = prepare_inputs(bgv_keyed, program, np.random.default_rng(2))
        verdict = check_message_equivalence(bgv_keyed, ctx, gamma, program.body)
        assert verdict.holds
        assert verdict.details['checked'] >= 4

    def test_message_equivalence_on_bfv(self, bfv_keyed, rng):
        program = _compile(bfv_keyed, "X := cipher_init[1, 3]\ny := X[0] (*) X[1]\nz := y (+) X[0]\n")
        ctx = initial_context(bfv_keyed, program.inputs)
        gamma = prepare_inputs(bfv_keyed, program, rng)
        verdict = check_message_equivalence(bfv_keyed, ctx, gamma, program.body)
        assert verdict.holds
        out = eval_native(bfv_keyed, gamma, program.body)
        assert interp_substitution(bfv_keyed, out)['z'] == 4

    def test_tfhe_cmux_and_pbs(self, tfhe_keyed, rng):
        program = _compile(tfhe_keyed, load_circuit(circuit_path('cmux')))
        gamma = prepare_inputs(tfhe_keyed, program, rng)
        out = interp_substitution(tfhe_keyed, eval_native(tfhe_keyed, gamma, program.body))
        expected = eval_msg(tfhe_keyed, interp_substitution(tfhe_keyed, gamma), program.body)
        assert out['picked'] == expected['picked'] == 3

    def test_ill_formed_start_is_reported(self, bgv_keyed, rng):
        top = bgv_keyed.params.top_level
        ctx = TypingContext({'a': Type(Sort.CIPHER, BgvCipherBound(5, 5, 1, top))})
        gamma = {'a': bgv_keyed.make_input(1, 'cipher', rng)}
        verdict = check_well_formed(bgv_keyed, ctx, gamma)
        assert not verdict.holds
        assert verdict.reason == 'ill-formed'

    def test_missing_start_value(self, bgv_keyed):
        ctx = TypingContext({'a': Type(Sort.MSG, MsgBound(1))})
        assert check_well_formed(bgv_keyed, ctx, {}).reason == 'missing'

    def test_equivalence_requires_secret(self, bgv_model):
        with pytest.raises(MissingSecretError):
            check_message_equivalence(bgv_model, TypingContext(), {}, Assign('m', Const(1)))

    def test_safety_violation_detected(self, bgv_keyed, rng):
        top = bgv_keyed.params.top_level
        tight = TypingContext({'a': Type(Sort.CIPHER, BgvCipherBound(1, 1, 1, top))})
        out = {'a': bgv_keyed.make_input(1, 'cipher', rng)}
        verdict = check_semantic_safety(bgv_keyed, tight, out)
        assert not verdict.holds
        assert verdict.details['violations'][0]['var'] == 'a'
