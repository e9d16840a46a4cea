"""파서, 출력기, 하강, SSA 테스트"""
import pytest

import corpus
from conftest import circuit_path
from ir import (
    Assign, Const, If, IlaSyntaxError, LoweringError, Op, Seq, SsaError, Var, compile_source, count_ops,
    count_statements, format_program, format_surface, load_circuit, parse, seq, statements, to_ssa,
)
from model_core import Sort


def test_parse_and_format_round_trip():
    for name, source in corpus.corpus_sources().items():
        program = parse(source)
        assert parse(format_surface(program)) == program, name


def test_shipped_circuits_parse():
    for name, source in corpus.shipped_circuits().items():
        assert parse(source).statements, name


@pytest.mark.parametrize('source, line', [
    ("x := 1\n  y := 2\n", 2),
    ("x := foo(1)\n", 1),
    ("x := 1\ny := modswitch(x, x)\n", 2),
    ("x := $\n", 1),
    ("while 1 < 2\n    x := 1\n", 1),
])
def test_syntax_errors_carry_line(source, line):
    with pytest.raises(IlaSyntaxError) as info:
        parse(source)
    assert info.value.line == line


def test_psi_lowering():
    program = compile_source(corpus.psi_source([1, 3], [3, 5]), 2147483647)
    assert program.input_names == ['A[0]', 'A[1]', 'B[0]', 'B[1]', 'R[0]', 'R[1]']
    a0 = program.inputs[0]
    assert (a0.variant, a0.value, a0.inf, a0.sup) == ('cipher', 1, 1, 3)
    result_defs = [s for s in statements(program.body) if isinstance(s, Assign) and s.var == 'result']
    # 초기 대입 1 번과 내부 루프 2x2 번
    assert len(result_defs) == 5
    assert Assign('t2', Op('scalar', (Const(-1), Var('t1')))) in statements(program.body)


def test_matrix_inputs_and_indexed_targets():
    source = corpus.matrix_filter_source([[1, 2, 0], [0, 1, 3], [2, 1, 1]], [[1, 0], [0, 1]])
    program = compile_source(source, 257)
    assert len([d for d in program.inputs if d.variant == 'cipher']) == 9
    assert len([d for d in program.inputs if d.variant == 'plain']) == 4
    targets = [s.var for s in statements(program.body) if isinstance(s, Assign) and s.var.startswith('C[')]
    assert targets == ['C[0]', 'C[1]', 'C[2]', 'C[3]']
    first = next(s for s in statements(program.body) if isinstance(s, Assign) and s.var == 's')
    assert Var('M[1]') in first.expr.args[1].args


def test_loop_counter_is_not_reduced_modulo_t():
    source = "X := cipher_init[1]\nx := X[0]\ni := 0\nwhile i < 12:\n    x := x (+) X[0]\n    i := i + 1\n"
    for modulus in (None, 16):
        body = compile_source(source, modulus).body
        assert sum(1 for s in statements(body) if s.var == 'x') == 13
    counters = [s.expr for s in statements(compile_source(source, 16).body) if s.var == 'i']
    assert counters[-1] == Const(-4)


def test_index_above_half_modulus():
    program = compile_source(corpus.chain_source(9), 16)
    last = list(statements(program.body))[-1]
    assert last.expr == Op('mul', (Var('acc'), Var('X[9]')))
    with pytest.raises(LoweringError):
        compile_source("X := cipher_init[1, 2]\ny := X[16]\n", 16)


def test_plain_constant_reduced_on_emit():
    program = compile_source("X := cipher_init[1]\nn := 9\ny := X[0] (+) plain(n)\n", 16)
    assign = list(statements(program.body))[-1]
    assert assign.expr.args[1] == Const(-7, Sort.PLAIN)


def test_lowering_errors():
    with pytest.raises(LoweringError):
        compile_source("X := cipher_init[1]\nwhile X[0] < 3:\n    y := X[0]\n")
    with pytest.raises(LoweringError):
        compile_source("X := cipher_init[1, 2]\ny := X[2]\n")
    with pytest.raises(LoweringError):
        compile_source("X := cipher_init[1, 2]\ny := X[0][1]\n")
    with pytest.raises(LoweringError):
        compile_source("X := cipher_init[1]\ny := X\n")
    with pytest.raises(LoweringError):
        compile_source("X := cipher_init[1]\nx := X[0]\ny := x (*) plain(x)\n")
    with pytest.raises(LoweringError):
        compile_source("i := 0\nwhile i < 5:\n    X := cipher_init[1]\n    i := i + 1\n")


def test_constant_if_is_resolved_and_dynamic_if_kept():
    source = "X := cipher_init[1]\nk := 2\nif k == 2:\n    y := X[0]\nelse:\n    y := X[0] (*) X[0]\n"
    body = compile_source(source, 16).body
    assert Assign('y', Var('X[0]')) in statements(body)

    dynamic = "X := cipher_init[1]\nx := X[0]\nif x < 1:\n    y := x\nelse:\n    skip\n"
    last = statements(compile_source(dynamic, 16).body)[-1]
    assert isinstance(last, If)
    assert last.cond == Op('lt', (Var('x'), Const(1)))


def test_plain_constants():
    body = compile_source("X := cipher_init[1]\ny := X[0] (*) plain(20)\n", 16).body
    assert body.expr == Op('mul', (Var('X[0]'), Const(4, Sort.PLAIN)))


def test_format_program_recompiles_to_same_body():
    for name in ('psi', 'pir', 'matrix_filter', 'fibonacci'):
        source = load_circuit(circuit_path(name))
        program = compile_source(source, 257)
        again = compile_source(format_program(program), 257)
        assert again.body == program.body, name
        assert again.inputs == program.inputs, name


def test_seq_flattens():
    a, b, c = Assign('a', Const(1)), Assign('b', Const(2)), Assign('c', Const(3))
    assert seq(a, seq(b, c)) == Seq((a, b, c))
    assert seq(a) == a
    assert count_statements(seq(a, If(Const(1), b, c))) == 4


def test_to_ssa_versions_reassigned_names():
    source = "X := cipher_init[1]\nx := X[0]\nx := x (*) x\nc2 := x\nc2 := c2 (*) c2\ny := c2\n"
    program = compile_source(source, 16)
    ssa = to_ssa(program.body, program.input_names)
    assert [d.var for d in ssa.definitions] == ['x1', 'x2', 'c2_1', 'c2_2', 'y']
    assert ssa.definitions[1].expr == Op('mul', (Var('x1'), Var('x1')))
    assert ssa.final_names == {'x': 'x2', 'c2': 'c2_2', 'y': 'y'}
    assert ssa.inputs == ('X[0]',)
    back = statements(ssa.to_cmd())
    assert back[1] == Assign('x', Op('mul', (Var('x1'), Var('x1'))))
    assert back[-1] == Assign('y', Var('c2'))


def test_to_ssa_errors():
    with pytest.raises(SsaError):
        to_ssa(Assign('y', Var('z')), inputs=['X[0]'])
    with pytest.raises(SsaError):
        to_ssa(If(Const(1), Assign('a', Const(1)), Assign('a', Const(2))))


def test_count_ops():
    expr = Op('mul', (Op('modswitch', (Var('a'),)), Op('modswitch', (Var('a'),))))
    assert count_ops(expr, 'modswitch') == 2
    assert count_ops(expr, 'mul') == 1
