"""
명령줄 인터페이스 테스트 (종료 코드와 JSON 출력)
"""
import json

import pytest

import main
from conftest import circuit_path, preset_path
from corpus import square_source


def _run(capsys, *argv):
    code = main.main(list(argv))
    return code, capsys.readouterr().out


def _json(out):
    return json.loads(out.strip().splitlines()[-1])


@pytest.fixture
def small_tfhe(tmp_path):
    path = tmp_path / 'tfhe.json'
    path.write_text(json.dumps({'scheme': 'tfhe', 't': 16, 'probe_p': [2, 3, 4]}), encoding='utf-8')
    return str(path)


class TestCheck:
    def test_accepted(self, capsys):
        code, out = _run(capsys, 'check', '--scheme', preset_path('psi_generous'),
                         '--circuit', circuit_path('psi'), '--json')
        assert code == main.EXIT_OK
        doc = _json(out)
        assert doc['verdict'] == 'well-typed'
        assert 'result' in {row['var'] for row in doc['types']}

    def test_rejected_with_diagnosis(self, capsys):
        code, out = _run(capsys, 'check', '--scheme', preset_path('bgv_square'),
                         '--circuit', circuit_path('square16'), '--json')
        assert code == main.EXIT_REJECTED
        doc = _json(out)
        assert doc['kind'] == 'noise'
        assert doc['var'] == 'c5'

    def test_tfhe_overflow(self, capsys):
        code, out = _run(capsys, 'check', '--scheme', preset_path('tfhe_small'),
                         '--circuit', circuit_path('tfhe_add16'), '--json')
        assert code == main.EXIT_REJECTED
        assert _json(out)['statement'] == 16

    def test_human_output(self, capsys):
        code, out = _run(capsys, 'check', '--scheme', preset_path('psi_tight'), '--circuit', circuit_path('psi_len4'))
        assert code == main.EXIT_REJECTED
        assert '[noise]' in out


class TestRun:
    def test_native_run(self, capsys):
        code, out = _run(capsys, 'run', '--scheme', preset_path('psi_generous'),
                         '--circuit', circuit_path('psi'), '--seed', '3', '--json')
        assert code == main.EXIT_OK
        assert _json(out)['outputs']['result'] == 0

    def test_trace(self, capsys):
        code, out = _run(capsys, 'run', '--scheme', preset_path('bgv_square'),
                         '--circuit', circuit_path('square16'), '--trace')
        assert code == main.EXIT_OK
        records = [json.loads(line) for line in out.strip().splitlines()]
        assert [r['var'] for r in records] == ['c1', 'c2', 'c3', 'c4', 'c5']

    def test_message_run(self, capsys):
        code, out = _run(capsys, 'run-msg', '--scheme', preset_path('bgv_general'),
                         '--circuit', circuit_path('fibonacci'), '--json')
        assert code == main.EXIT_OK
        assert _json(out)['outputs']['b'] == 34


class TestInferMs:
    def test_writes_rewritten_circuit(self, capsys, tmp_path):
        target = tmp_path / 'square16_ms.ila'
        code, _ = _run(capsys, 'infer-ms', '--scheme', preset_path('bgv_square'),
                       '--circuit', circuit_path('square16'), '--out', str(target))
        assert code == main.EXIT_OK
        text = target.read_text(encoding='utf-8')
        assert 'modswitch(c2)' in text
        code, _ = _run(capsys, 'check', '--scheme', preset_path('bgv_square'), '--circuit', str(target))
        assert code == main.EXIT_OK

    def test_json_report(self, capsys):
        code, out = _run(capsys, 'infer-ms', '--scheme', preset_path('bgv_square'),
                         '--circuit', circuit_path('square16'), '--json')
        assert code == main.EXIT_OK
        doc = _json(out)
        assert doc['rewrites'][0]['kind'] == 'switch'
        assert 'modswitch' in doc['program']

    def test_chain_exhausted(self, capsys, tmp_path):
        circuit = tmp_path / 'square128.ila'
        circuit.write_text(square_source(7), encoding='utf-8')
        code, out = _run(capsys, 'infer-ms', '--scheme', preset_path('bgv_square'), '--circuit', str(circuit), '--json')
        assert code == main.EXIT_REJECTED
        assert _json(out)['verdict'] == 'failed'


class TestProbes:
    def test_tfhe_overflow_probe(self, capsys, small_tfhe, tmp_path):
        csv = tmp_path / 'tfhe.csv'
        code, out = _run(capsys, 'tfhe-overflow-probe', '--scheme', small_tfhe, '--json', '--csv', str(csv))
        assert code == main.EXIT_OK
        rows = _json(out)['rows']
        assert [r['first_rejected'] for r in rows] == [4, 8, 16]
        assert csv.exists()

    def test_depth_probe(self, capsys):
        code, out = _run(capsys, 'depth-probe', '--scheme', preset_path('bgv_depth'), '--trials', '1', '--json')
        assert code == main.EXIT_OK
        rows = _json(out)['rows']
        assert all(r['d_static'] <= r['d_max'] for r in rows)
        assert all(r['d_pc'] >= r['d_cc'] for r in rows)

    def test_axiom_check(self, capsys):
        code, out = _run(capsys, 'axiom-check', '--scheme', preset_path('tfhe_small'), '--trials', '20', '--json')
        assert code == main.EXIT_OK
        assert _json(out)['passed'] is True

    def test_probe_on_wrong_scheme(self, capsys, small_tfhe):
        code, _ = _run(capsys, 'depth-probe', '--scheme', small_tfhe)
        assert code == main.EXIT_ERROR


class TestErrors:
    def test_missing_scheme_file(self, capsys, tmp_path):
        code, _ = _run(capsys, 'check', '--scheme', str(tmp_path / 'none.json'), '--circuit', circuit_path('psi'))
        assert code == main.EXIT_ERROR

    def test_missing_circuit_argument(self, capsys):
        code, _ = _run(capsys, 'check', '--scheme', preset_path('bgv_square'))
        assert code == main.EXIT_ERROR

    def test_unknown_command(self, capsys):
        code, _ = _run(capsys, 'explode', '--scheme', preset_path('bgv_square'))
        assert code == main.EXIT_ERROR

    def test_syntax_error(self, capsys, tmp_path):
        circuit = tmp_path / 'bad.ila'
        circuit.write_text("x := (1 (+)\n", encoding='utf-8')
        code, out = _run(capsys, 'check', '--scheme', preset_path('bgv_square'), '--circuit', str(circuit))
        assert code == main.EXIT_ERROR
        assert '오류' in out
