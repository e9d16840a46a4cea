"""
코퍼스 회로 생성기 테스트
"""
import pytest

from conftest import BGV_SMALL, circuit_path, preset
from corpus import (
    RandomCircuitGenerator, chain_source, cmux_source, corpus_sources, exponent_source, matrix_filter_source,
    pir_source, psi_source, shipped_circuits, square_source, tfhe_addition_source,
)
from ir import Const, Op, compile_source, count_statements, load_circuit, statements
from model_core import Sort
from schemes import build_model
from semantics import eval_msg
from typecheck import Diagnosis, TypingContext, check_program


@pytest.fixture(scope='module')
def general():
    return build_model(preset('bgv_general'))


def _messages(model, source):
    program = compile_source(source, modulus=model.params.t)
    return eval_msg(model, program.input_values(), program.body)


class TestSources:
    def test_square_matches_shipped_file(self):
        assert compile_source(square_source(4), 16) == compile_source(load_circuit(circuit_path('square16')), 16)

    def test_tfhe_addition_matches_shipped_file(self):
        shipped = compile_source(load_circuit(circuit_path('tfhe_add16')), 16)
        assert compile_source(tfhe_addition_source(16), 16) == shipped
        assert count_statements(shipped.body) == 17

    def test_cmux_matches_shipped_file(self):
        assert compile_source(cmux_source(1, 3, 5), 16) == compile_source(load_circuit(circuit_path('cmux')), 16)

    def test_chain_shapes(self):
        cc = compile_source(chain_source(3), 16)
        pc = compile_source(chain_source(3, plain=True), 16)
        assert len(cc.inputs) == 4
        assert len(pc.inputs) == 1
        assert count_statements(cc.body) == count_statements(pc.body) == 4
        last = statements(pc.body)[-1].expr
        assert isinstance(last, Op) and last.args[1] == Const(1, Sort.PLAIN)

    def test_exponent(self, general):
        assert _messages(general, exponent_source(5))['y'] == 32

    def test_pir_selects_entry(self, general):
        assert _messages(general, pir_source([5, 7, 11, 13], 2))['answer'] == 11

    def test_matrix_filter(self, general):
        out = _messages(general, matrix_filter_source([[1, 2, 0], [0, 1, 3], [2, 1, 1]], [[1, 0], [0, 1]]))
        assert [out[f"C[{i}]"] for i in range(4)] == [2, 5, 1, 2]

    def test_psi_result(self, general):
        assert _messages(general, psi_source([1, 3, 6], [6, 5]))['result'] == 0
        assert _messages(general, psi_source([1, 3, 6], [7, 5]))['result'] != 0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            exponent_source(0)
        with pytest.raises(ValueError):
            psi_source([1], [2, 3], [2])
        with pytest.raises(ValueError):
            matrix_filter_source([[1, 2], [3, 4]], [[1, 2, 3]])


class TestCollections:
    def test_corpus_compiles(self, general):
        sources = corpus_sources()
        assert {'psi', 'square16', 'chain_cc', 'chain_pc', 'pir', 'matrix_filter'} <= set(sources)
        for source in sources.values():
            compile_source(source, general.params.t)

    def test_shipped_circuits(self):
        circuits = shipped_circuits()
        assert {'psi', 'psi_len4', 'square16', 'tfhe_add16', 'cmux'} <= set(circuits)

    def test_shipped_circuits_missing_directory(self, tmp_path):
        assert shipped_circuits(str(tmp_path / 'none')) == {}


class TestRandomCircuits:
    def test_deterministic(self):
        assert RandomCircuitGenerator(seed=3).generate_many(5) == RandomCircuitGenerator(seed=3).generate_many(5)
        assert RandomCircuitGenerator(seed=3).generate() != RandomCircuitGenerator(seed=4).generate()

    def test_without_modswitch(self):
        for source in RandomCircuitGenerator(seed=5, modswitch=False).generate_many(20):
            assert 'modswitch' not in source

    def test_without_plain(self):
        for source in RandomCircuitGenerator(seed=5, plain=False).generate_many(20):
            assert 'plain(' not in source

    def test_generated_circuits_check(self):
        model = build_model(BGV_SMALL)
        gen = RandomCircuitGenerator(seed=8, max_statements=12, max_depth=3, modswitch=True)
        for source in gen.generate_many(30):
            program = compile_source(source, model.params.t)
            assert count_statements(program.body) <= 12 + len(program.inputs)
            assert isinstance(check_program(model, program), (TypingContext, Diagnosis))
