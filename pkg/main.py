"""
ILA 정적 잡음 검사기
메인 실행 파일

    python main.py check --scheme presets/bgv_square.json --circuit circuits/square16.ila
    python main.py depth-probe --scheme presets/bgv_depth.json --csv depth.csv

종료 코드: 0 = 통과, 2 = 거부 (Diagnosis 또는 추론 실패), 1 = 사용법/내부 오류
"""
import argparse
import json
import logging
import sys
import traceback
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from colorama import Fore, Style, init

import config
from ir import compile_source, format_core_expr, format_program, load_circuit
from model_core import IlaError, Sort
from msinfer import InferenceFailure, infer_program, level_report
from probes import ProbeRunner
from refscheme import INSECURE, centered
from schemes import bits, load_model, load_scheme_config
from semantics import EvalTrace, eval_msg, eval_native, prepare_inputs
from typecheck import Diagnosis, check_program, context_report

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2

COMMANDS = ('check', 'run', 'run-msg', 'infer-ms', 'depth-probe', 'tfhe-overflow-probe', 'axiom-check')
_NEEDS_CIRCUIT = ('check', 'run', 'run-msg', 'infer-ms')


def print_header(title: str):
    """프로그램 헤더 출력"""
    print(f"\n{Fore.CYAN}{'='*100}")
    print(f"{title:^100}")
    print(f"{'='*100}{Style.RESET_ALL}\n")


def print_insecure_warning():
    if INSECURE:
        print(f"{Fore.YELLOW}⚠️  내장 토이 RLWE 스킴은 안전하지 않습니다. 검증용으로만 사용하세요.{Style.RESET_ALL}")


def print_context(rows: List[Dict]):
    """
    변수별 최종 타입을 출력합니다.

    Args:
        rows: context_report 결과
    """
    print(f"{'변수':<20} {'정렬':<8} {'구간':>24} {'잡음':>14} {'레벨':>6} {'남은 예산(비트)':>16}")
    print("-" * 100)
    for row in rows:
        bound = row['bound']
        interval = f"[{bound.get('inf', '')}, {bound.get('sup', '')}]" if 'inf' in bound else str(bound.get('value', '⊤'))
        eps = bound.get('eps')
        eps_text = f"2^{bits(Fraction(eps)):.2f}" if eps is not None else '-'
        level = bound.get('level', '-')
        budget = row['budget_bits']
        if budget is None:
            color, budget_text = Fore.WHITE, '-'
        else:
            color = Fore.GREEN if budget >= 10 else (Fore.YELLOW if budget >= 0 else Fore.RED)
            budget_text = f"{budget:.2f}"
        print(f"{color}{row['var']:<20} {row['sort']:<8} {interval:>24} {eps_text:>14} {str(level):>6} {budget_text:>16}{Style.RESET_ALL}")


def print_diagnosis(diagnosis: Diagnosis):
    print(f"{Fore.RED}❌ 타입 검사 실패: {diagnosis.describe()}{Style.RESET_ALL}")
    if diagnosis.budget_bits is not None:
        print(f"{Fore.RED}   남은 잡음 예산: {diagnosis.budget_bits:.2f} 비트{Style.RESET_ALL}")


def print_table(df: pd.DataFrame, title: str):
    """프로브 표 출력"""
    print(f"\n{Fore.GREEN}{'='*100}")
    print(f"{title:^100}")
    print(f"{'='*100}{Style.RESET_ALL}\n")
    print(df.to_string(index=False))
    print()


def _emit_json(document):
    print(json.dumps(document, ensure_ascii=False, default=str))


def _compile(args, model):
    source = load_circuit(args.circuit)
    return compile_source(source, model.params.t)


def _export(df: pd.DataFrame, args):
    if args.csv:
        df.to_csv(args.csv, index=False)
        if not args.json:
            print(f"{Fore.YELLOW}CSV 저장: {args.csv}{Style.RESET_ALL}")


# ========== 명령 ==========

def cmd_check(args) -> int:
    """정적 타입 검사 (비밀 매개변수 없이)"""
    model = load_model(args.scheme)
    program = _compile(args, model)
    result = check_program(model, program)
    if isinstance(result, Diagnosis):
        if args.json:
            print(result.to_json())
        else:
            print_header('ILA 타입 검사')
            print_diagnosis(result)
        return EXIT_REJECTED

    rows = context_report(model, result)
    if args.json:
        _emit_json({'verdict': 'well-typed', 'scheme': model.name, 'types': rows})
    else:
        print_header('ILA 타입 검사')
        print_context(rows)
        print(f"\n{Fore.GREEN}✅ 타입 검사 통과 ({len(rows)}개 변수){Style.RESET_ALL}\n")
    return EXIT_OK


def cmd_run(args) -> int:
    """토이 스킴으로 네이티브 실행 (오라클 모드)"""
    model = load_model(args.scheme, seed=args.seed)
    program = _compile(args, model)
    gamma = prepare_inputs(model, program, np.random.default_rng(args.seed))
    trace = EvalTrace() if args.trace else None
    out = eval_native(model, gamma, program.body, trace)
    assigned = {name: model.interp(value) for name, value in out.items() if name not in gamma}

    if args.trace:
        print(trace.to_json_lines())
    if args.json:
        _emit_json({'mode': 'native', 'seed': args.seed, 'outputs': assigned})
    elif not args.trace:
        print_header('네이티브 실행 결과')
        print_insecure_warning()
        _print_outputs(model, out, assigned)
    return EXIT_OK


def _print_outputs(model, out: Dict, assigned: Dict[str, int]):
    print(f"{'변수':<20} {'복호화 값':>12} {'측정 잡음':>14}")
    print("-" * 50)
    for name, message in assigned.items():
        noise = '-'
        if model.has_secret and model.sort_of(out[name]) == Sort.CIPHER:
            eps = getattr(model.bound_of(out[name]), 'eps', None)
            noise = f"2^{bits(eps):.2f}" if eps is not None else '-'
        print(f"{name:<20} {message:>12} {noise:>14}")
    print()


def cmd_run_msg(args) -> int:
    """메시지 의미로 실행"""
    model = load_model(args.scheme)
    program = _compile(args, model)
    start = {decl.name: centered(decl.value, model.params.t) for decl in program.inputs}
    out = eval_msg(model, start, program.body)
    assigned = {name: value for name, value in out.items() if name not in start}
    if args.json:
        _emit_json({'mode': 'message', 'outputs': assigned})
    else:
        print_header('메시지 의미 실행 결과')
        print(f"{'변수':<20} {'메시지':>12}")
        print("-" * 34)
        for name, value in assigned.items():
            print(f"{name:<20} {value:>12}")
        print()
    return EXIT_OK


def cmd_infer_ms(args) -> int:
    """modswitch 자동 삽입"""
    model = load_model(args.scheme)
    program = _compile(args, model)
    try:
        rewritten, rewrites, ctx = infer_program(model, program)
    except InferenceFailure as e:
        if args.json:
            _emit_json({'verdict': 'failed', 'reason': str(e),
                        'rewrites': [r.to_dict() for r in e.rewrites],
                        'diagnosis': e.diagnosis.to_dict() if e.diagnosis else None})
        else:
            print_header('modswitch 추론')
            print(f"{Fore.RED}❌ 추론 실패: {e}{Style.RESET_ALL}")
            if e.diagnosis:
                print_diagnosis(e.diagnosis)
        return EXIT_REJECTED

    text = format_program(rewritten)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as fh:
            fh.write(text)

    levels = level_report(model, ctx)
    if args.json:
        _emit_json({'verdict': 'well-typed', 'rewrites': [r.to_dict() for r in rewrites],
                    'levels': levels, 'program': None if args.out else text})
        return EXIT_OK

    print_header('modswitch 추론')
    if rewrites:
        print(f"{'변수':<16} {'종류':<8} {'삽입':>6}  {'변경 후'}")
        print("-" * 100)
        for r in rewrites:
            print(f"{r.var:<16} {r.kind:<8} {r.inserted:>6}  {format_core_expr(r.after)[0]}")
    else:
        print(f"{Fore.GREEN}원본 프로그램이 이미 타입 검사를 통과합니다.{Style.RESET_ALL}")
    print(f"\n{Fore.GREEN}✅ 삽입된 modswitch: {sum(r.inserted for r in rewrites)}개{Style.RESET_ALL}")
    final = {name: level for name, level in levels.items() if level is not None}
    if final:
        print("최종 레벨: " + ', '.join(f"{k}={v}" for k, v in final.items()))
    if args.out:
        print(f"{Fore.YELLOW}변환된 회로 저장: {args.out}{Style.RESET_ALL}\n")
    else:
        print()
        print(text)
    return EXIT_OK


def cmd_depth_probe(args) -> int:
    """q 비트 수별 정적 깊이와 오라클 깊이"""
    cfg = load_scheme_config(args.scheme)
    if str(cfg.get('scheme', '')).lower() not in ('bgv', 'bfv'):
        raise IlaError("depth-probe 는 BGV 또는 BFV 스킴에서만 동작합니다")
    runner = ProbeRunner(seed=args.seed, trials=args.trials or config.DEPTH_PROBE_TRIALS, verbose=not args.json)
    bits_list = cfg.get('probe_bits', config.DEPTH_PROBE_BITS)
    if not args.json:
        print_header(f"곱셈 깊이 프로브 ({cfg['scheme'].upper()}, t={cfg['t']}, d={cfg.get('d')})")
        print_insecure_warning()
    depth = runner.depth_probe(cfg, bits_list)
    pc = runner.plain_cipher_probe(cfg, bits_list)
    table = depth.merge(pc, on='q_bits')
    _export(table, args)
    if args.json:
        _emit_json({'scheme': cfg['scheme'], 'rows': table.to_dict(orient='records')})
    else:
        print_table(table, '곱셈 깊이 (D_static ≤ D_max, D_pc ≥ D_cc)')
    return EXIT_OK if (table['d_static'] <= table['d_max']).all() else EXIT_REJECTED


def cmd_tfhe_overflow_probe(args) -> int:
    """TFHE 덧셈 체인 값 넘침 검출 시점과 시간"""
    cfg = load_scheme_config(args.scheme)
    if str(cfg.get('scheme', '')).lower() != 'tfhe':
        raise IlaError("tfhe-overflow-probe 는 TFHE 스킴에서만 동작합니다")
    runner = ProbeRunner(seed=args.seed, verbose=not args.json)
    if not args.json:
        print_header('TFHE 값 넘침 프로브')
    table = runner.tfhe_overflow_probe(cfg, cfg.get('probe_p'))
    _export(table, args)
    if args.json:
        _emit_json({'rows': table.to_dict(orient='records')})
    else:
        print_table(table, '첫 거부 덧셈 번호 (기대값 t = 2^p), dynamic 은 시뮬레이션 평가기')
    return EXIT_OK if (table['first_rejected'] == table['t']).all() else EXIT_REJECTED


def cmd_axiom_check(args) -> int:
    """모델 공리 표본 검사"""
    model = load_model(args.scheme, seed=args.seed)
    samples = args.trials or config.DEFAULT_TRIALS
    runner = ProbeRunner(seed=args.seed, verbose=not args.json)
    if not args.json:
        print_header(f"모델 공리 검사 ({model.name}, 연산자별 {samples}개 표본)")
    table = runner.axiom_check(model, samples)
    _export(table, args)
    passed = bool(table['holds'].all())
    if args.json:
        _emit_json({'scheme': model.name, 'passed': passed, 'rows': table.to_dict(orient='records')})
    else:
        print_table(table.drop(columns=['example']), '가환성 / 하향 닫힘')
        color = Fore.GREEN if passed else Fore.RED
        print(f"{color}{'✅ 모든 연산자 통과' if passed else '❌ 공리 위반 발견'}{Style.RESET_ALL}\n")
    return EXIT_OK if passed else EXIT_REJECTED


HANDLERS = {
    'check': cmd_check,
    'run': cmd_run,
    'run-msg': cmd_run_msg,
    'infer-ms': cmd_infer_ms,
    'depth-probe': cmd_depth_probe,
    'tfhe-overflow-probe': cmd_tfhe_overflow_probe,
    'axiom-check': cmd_axiom_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ila', description='FHE 회로 정적 잡음/값 넘침 검사기')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--scheme', required=True, help='스킴 JSON 경로')
    parser.add_argument('--circuit', help='.ila 회로 경로')
    parser.add_argument('--seed', type=int, default=config.DEFAULT_SEED)
    parser.add_argument('--trials', type=int, default=None)
    parser.add_argument('--json', action='store_true', help='JSON 출력')
    parser.add_argument('--trace', action='store_true', help='run: 대입별 측정 경계를 JSON 줄로 출력')
    parser.add_argument('--out', help='infer-ms: 변환된 회로를 쓸 경로')
    parser.add_argument('--csv', help='프로브 표를 CSV 로 저장')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수"""
    init(autoreset=True, strip=not config.COLOR_ENABLED)
    logging.basicConfig(level=getattr(logging, config.LOG_LEVEL, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR

    if args.command in _NEEDS_CIRCUIT and not args.circuit:
        print(f"{Fore.RED}{args.command} 명령에는 --circuit 이 필요합니다{Style.RESET_ALL}")
        return EXIT_ERROR

    try:
        return HANDLERS[args.command](args)
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}사용자에 의해 중단되었습니다.{Style.RESET_ALL}")
        return EXIT_ERROR
    except (IlaError, OSError) as e:
        print(f"{Fore.RED}오류: {e}{Style.RESET_ALL}")
        return EXIT_ERROR
    except Exception as e:
        print(f"{Fore.RED}예상하지 못한 오류: {e}{Style.RESET_ALL}")
        traceback.print_exc()
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
