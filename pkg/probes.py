"""
실험 프로브 모듈
정적 검사기와 토이 스킴 오라클을 나란히 돌려 표를 만듭니다.
- 곱셈 깊이 프로브: q 비트 수별 정적 깊이 D_static 과 오라클 깊이 D_max
- 평문-암호문 곱과 암호문-암호문 곱의 깊이 비교
- TFHE 값 넘침 검출 시점과 시간
- modswitch 추론 전후의 c1^(2^k) 최대 k
- 모델 공리 검사와 일부러 틀린 경계 함수(음성 대조군)
- 임의 회로 건전성 캠페인
"""
import copy
import dataclasses
import statistics
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from colorama import Fore, Style

import config
import corpus
from ir import CoreProgram, compile_source, statements
from model_core import (
    BoundsFailure, MsgBound, OperatorSpec, SchemeModel, Sort, check_commutativity,
    check_downwards_closed,
)
from msinfer import InferenceFailure, infer_program
from schemes import TfheModel, build_model, with_keys
from semantics import (
    StuckError, check_message_equivalence, check_semantic_safety, eval_expr_msg, eval_expr_native,
    eval_native, interp_substitution, prepare_inputs,
)
from typecheck import Diagnosis, check_program, initial_context


def _median_time(fn: Callable[[], Any], runs: int) -> float:
    """fn 을 runs 번 실행한 시간의 중앙값 (ms)"""
    samples = []
    for _ in range(max(1, runs)):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1000)
    return statistics.median(samples)


def _with_bits(cfg: Dict, bits: int) -> Dict:
    out = {k: v for k, v in cfg.items() if k != 'modulus_chain'}
    out['modulus_bits'] = [bits]
    return out


class ProbeRunner:
    """실험 프로브 실행기"""

    def __init__(self, seed: int = config.DEFAULT_SEED, trials: int = config.DEPTH_PROBE_TRIALS,
                 timing_runs: int = config.TIMING_RUNS, verbose: bool = False):
        """
        초기화

        Args:
            seed: 키 생성과 암호화 난수 시드
            trials: 오라클 반복 횟수 (D_max 는 시행별 최솟값)
            timing_runs: 시간 측정 반복 횟수 (중앙값)
            verbose: 진행 상황 출력 여부
        """
        self.seed = seed
        self.trials = trials
        self.timing_runs = timing_runs
        self.verbose = verbose

    def _progress(self, message: str, color: str = Fore.YELLOW):
        if self.verbose:
            print(f"{color}{message}{Style.RESET_ALL}")

    # ========== 곱셈 깊이 ==========

    @staticmethod
    def chain_program(model: SchemeModel, n: int, plain: bool = False) -> CoreProgram:
        return compile_source(corpus.chain_source(n, plain), model.params.t)

    def static_depth(self, model: SchemeModel, n_max: int = config.DEPTH_PROBE_MAX, plain: bool = False) -> int:
        """타입 검사기가 받아들이는 최대 연속 곱셈 횟수"""
        result = check_program(model, self.chain_program(model, n_max, plain))
        if not isinstance(result, Diagnosis):
            return n_max
        # 문장 0 은 acc := X[0], 문장 i 는 i 번째 곱셈
        return max(0, (result.index or 0) - 1)

    def oracle_depth(self, model: SchemeModel, n_max: int = config.DEPTH_PROBE_MAX, plain: bool = False) -> int:
        """
        토이 스킴에서 복호화가 처음 틀리기 전까지의 곱셈 횟수 (시행별 최솟값).

        Args:
            model: 비밀 매개변수가 없어도 됨 (시드로 키를 만듦)
            n_max: 최대 곱셈 횟수
            plain: 평문 상수 곱 체인 여부

        Returns:
            D_max
        """
        program = self.chain_program(model, n_max, plain)
        depths = []
        for trial in range(self.trials):
            keyed = with_keys(model, self.seed + trial)
            rng = np.random.default_rng(self.seed + 1000 + trial)
            gamma = prepare_inputs(keyed, program, rng)
            messages = interp_substitution(keyed, gamma)
            depth = n_max
            for i, stmt in enumerate(statements(program.body)):
                gamma[stmt.var] = eval_expr_native(keyed, gamma, stmt.expr, stmt.pos)
                messages[stmt.var] = eval_expr_msg(keyed, messages, stmt.expr, stmt.pos)
                if keyed.interp(gamma[stmt.var]) != messages[stmt.var]:
                    depth = max(0, i - 1)
                    break
            depths.append(depth)
        return min(depths)

    def depth_probe(self, cfg: Dict, bits_list: Optional[Sequence[int]] = None,
                    n_max: int = config.DEPTH_PROBE_MAX) -> pd.DataFrame:
        """
        q 비트 수별 D_static 과 D_max 를 비교합니다 (BGV, BFV).

        Args:
            cfg: 스킴 설정 (modulus 는 비트 수마다 단일 모듈러스로 바뀜)
            bits_list: q 비트 수 목록
            n_max: 최대 곱셈 횟수

        Returns:
            q_bits, d_static, d_max, gap 열을 가진 DataFrame
        """
        rows = []
        for bits in bits_list or config.DEPTH_PROBE_BITS:
            model = build_model(_with_bits(cfg, bits))
            d_static = self.static_depth(model, n_max)
            d_max = self.oracle_depth(model, n_max)
            rows.append({'q_bits': bits, 'd_static': d_static, 'd_max': d_max, 'gap': d_max - d_static})
            self._progress(f"  q={bits}비트: D_static={d_static}, D_max={d_max}")
        return pd.DataFrame(rows, columns=['q_bits', 'd_static', 'd_max', 'gap'])

    def plain_cipher_probe(self, cfg: Dict, bits_list: Optional[Sequence[int]] = None,
                           n_max: int = config.DEPTH_PROBE_MAX) -> pd.DataFrame:
        """q 비트 수별 암호문-암호문 곱 깊이 D_cc 와 평문-암호문 곱 깊이 D_pc"""
        rows = []
        for bits in bits_list or config.DEPTH_PROBE_BITS:
            model = build_model(_with_bits(cfg, bits))
            d_cc = self.static_depth(model, n_max)
            d_pc = self.static_depth(model, n_max, plain=True)
            rows.append({'q_bits': bits, 'd_cc': d_cc, 'd_pc': d_pc})
            self._progress(f"  q={bits}비트: D_cc={d_cc}, D_pc={d_pc}")
        return pd.DataFrame(rows, columns=['q_bits', 'd_cc', 'd_pc'])

    # ========== TFHE 값 넘침 ==========

    def tfhe_overflow_probe(self, cfg: Dict, p_values: Optional[Sequence[int]] = None) -> pd.DataFrame:
        """
        t = 2^p 에서 -t/2 부터 평문 1 을 t 번 더하는 회로로
        정적 검사기가 몇 번째 덧셈에서 값 넘침을 잡는지와 걸린 시간을 잽니다.
        dynamic_ms 는 시뮬레이션 TFHE 평가기로 같은 회로를 실행해 첫 순환을 찾는 시간입니다.

        Returns:
            p, t, first_rejected, kind, static_ms, dynamic_first_wrong, dynamic_ms 열의 DataFrame
        """
        rows = []
        for p in p_values or config.TFHE_PROBE_BITS:
            t = 2 ** p
            model = build_model(dict(cfg, scheme='tfhe', t=t))
            program = compile_source(corpus.tfhe_addition_source(t), t)
            result = check_program(model, program)
            first = result.index if isinstance(result, Diagnosis) else None
            kind = result.kind if isinstance(result, Diagnosis) else None
            static_ms = _median_time(lambda: check_program(model, program), self.timing_runs)

            keyed = with_keys(model, self.seed)
            outcome: Dict[str, Optional[int]] = {'first_wrong': None}

            def dynamic():
                rng = np.random.default_rng(self.seed)
                gamma = prepare_inputs(keyed, program, rng)
                outcome['first_wrong'] = None
                start = -(t // 2)
                for i, stmt in enumerate(statements(program.body)):
                    gamma[stmt.var] = eval_expr_native(keyed, gamma, stmt.expr, stmt.pos)
                    if i > 0 and keyed.interp(gamma[stmt.var]) != start + i:
                        outcome['first_wrong'] = i
                        return

            dynamic_ms = _median_time(dynamic, self.timing_runs)
            rows.append({'p': p, 't': t, 'first_rejected': first, 'kind': kind, 'static_ms': round(static_ms, 3),
                         'dynamic_first_wrong': outcome['first_wrong'], 'dynamic_ms': round(dynamic_ms, 3)})
            self._progress(f"  p={p}: {first}번째 덧셈에서 거부 ({static_ms:.2f}ms, 시뮬레이션 {dynamic_ms:.2f}ms)")
        return pd.DataFrame(rows, columns=['p', 't', 'first_rejected', 'kind', 'static_ms',
                                           'dynamic_first_wrong', 'dynamic_ms'])

    # ========== modswitch 추론 이득 ==========

    def ms_gain_probe(self, cfg: Dict, k_max: int = 8) -> pd.DataFrame:
        """c1^(2^k) 계열에서 추론 전후 타입 검사 통과 여부"""
        model = build_model(cfg)
        rows = []
        for k in range(1, k_max + 1):
            program = compile_source(corpus.square_source(k), model.params.t)
            original_ok = not isinstance(check_program(model, program), Diagnosis)
            switches, inferred_ok, reason = 0, original_ok, ''
            if not original_ok:
                try:
                    _, rewrites, _ = infer_program(model, program)
                    switches = sum(r.inserted for r in rewrites)
                    inferred_ok = True
                except InferenceFailure as e:
                    inferred_ok, reason = False, str(e)
            rows.append({'k': k, 'multiplies': k, 'original_ok': original_ok, 'inferred_ok': inferred_ok,
                         'switches': switches, 'reason': reason})
            self._progress(f"  k={k}: 원본 {'통과' if original_ok else '거부'}, 추론 후 {'통과' if inferred_ok else '거부'}")
        return pd.DataFrame(rows, columns=['k', 'multiplies', 'original_ok', 'inferred_ok', 'switches', 'reason'])

    @staticmethod
    def max_k(table: pd.DataFrame, column: str) -> int:
        """처음 거부되기 전까지의 최대 k (모두 거부면 0)"""
        best = 0
        for _, row in table.sort_values('k').iterrows():
            if not row[column]:
                break
            best = int(row['k'])
        return best

    # ========== 공리 검사 ==========

    def axiom_check(self, model: SchemeModel, samples: int = 1000) -> pd.DataFrame:
        """
        모든 연산자에 대해 가환성과 하향 닫힘을 표본 검사합니다.

        Args:
            model: 비밀 매개변수를 가진 스킴 모델
            samples: 연산자별 표본 수

        Returns:
            operator, samples, defined, commutativity_failures, downwards_failures, holds 열의 DataFrame
        """
        model.require_secret()
        sampler = _ArgumentSampler(model, np.random.default_rng(self.seed))
        rows = []
        for name in sorted(model.operators):
            op = model.operators[name]
            defined = comm_fail = down_fail = 0
            example = None
            for _ in range(samples):
                args = sampler.arguments(op)
                verdict = check_commutativity(model, op, args)
                if verdict.reason != 'undefined':
                    defined += 1
                if not verdict:
                    comm_fail += 1
                    example = example or verdict.reason
                exact = [model.bound_of(a) for a in args]
                wide = [sampler.widen(b) for b in exact]
                if not check_downwards_closed(model, op, wide, exact):
                    down_fail += 1
            rows.append({'operator': name, 'samples': samples, 'defined': defined,
                         'commutativity_failures': comm_fail, 'downwards_failures': down_fail,
                         'holds': comm_fail == 0 and down_fail == 0, 'example': example or ''})
            self._progress(f"  {name}: 정의됨 {defined}/{samples}, 가환성 실패 {comm_fail}, 하향 닫힘 실패 {down_fail}")
        return pd.DataFrame(rows, columns=['operator', 'samples', 'defined', 'commutativity_failures',
                                           'downwards_failures', 'holds', 'example'])

    # ========== 건전성 캠페인 ==========

    def soundness_campaign(self, cfg: Dict, count: int = 100, max_statements: int = 40,
                           max_depth: int = 8) -> Dict[str, int]:
        """
        임의 직선 회로를 검사하고 토이 스킴으로 실행해 정적 결과와 비교합니다.

        Returns:
            circuits, well_typed, rejected, safety_violations, equivalence_violations,
            false_negatives, stuck 를 담은 딕셔너리
        """
        model = build_model(cfg)
        keyed = with_keys(model, self.seed)
        generator = corpus.RandomCircuitGenerator(self.seed, max_statements, max_depth,
                                                  modswitch='modswitch' in model.operators)
        summary = {'circuits': 0, 'well_typed': 0, 'rejected': 0, 'safety_violations': 0,
                   'equivalence_violations': 0, 'false_negatives': 0, 'stuck': 0}
        rng = np.random.default_rng(self.seed + 7)
        for i in range(count):
            program = compile_source(generator.generate(), model.params.t)
            summary['circuits'] += 1
            ctx0 = initial_context(model, program.inputs)
            result = check_program(model, program)
            try:
                gamma = prepare_inputs(keyed, program, rng)
                out = eval_native(keyed, gamma, program.body)
            except StuckError as e:
                self._progress(f"  회로 {i}: 실행이 막힘 ({e})", Fore.LIGHTBLACK_EX)
                summary['stuck'] += 1
                continue
            if isinstance(result, Diagnosis) or isinstance(ctx0, Diagnosis):
                summary['rejected'] += 1
                continue
            summary['well_typed'] += 1
            if not check_semantic_safety(keyed, result, out):
                summary['safety_violations'] += 1
            verdict = check_message_equivalence(keyed, ctx0, gamma, program.body)
            if not verdict:
                summary['equivalence_violations'] += 1
                if verdict.reason == 'mismatch':
                    summary['false_negatives'] += 1
            if self.verbose and (i + 1) % 50 == 0:
                self._progress(f"  {i + 1}/{count} 회로 검사")
        return summary


# ========== 표본 추출 ==========

_TFHE_KINDS = {
    'add': [('LWE', 'LWE'), ('RLWE', 'RLWE')],
    'intprod': [('RGSW', 'RGSW')],
    'extprod': [('RGSW', 'LWE'), ('RGSW', 'RLWE')],
    'pbs': [('RGSW', 'LWE')],
    'cmux': [('RGSW', 'RLWE', 'RLWE')],
}


class _ArgumentSampler:
    """연산자 시그니처에 맞는 네이티브 인자를 뽑습니다."""

    def __init__(self, model: SchemeModel, rng: np.random.Generator):
        self.model = model
        self.rng = rng
        self.t = model.params.t
        self.tfhe = isinstance(model, TfheModel)

    def message(self, spread: Optional[int] = None) -> int:
        lo, hi = -(self.t // 2), self.t - self.t // 2 - 1
        if spread is not None:
            lo, hi = max(lo, -spread), min(hi, spread)
        return int(self.rng.integers(lo, hi + 1))

    def cipher(self, kind: Optional[str] = None, level: Optional[int] = None):
        model, rng = self.model, self.rng
        value = self.message(3)
        if self.tfhe:
            if kind == 'RGSW' and rng.random() < 0.7:
                value = int(rng.integers(0, 2))
            variant = {'LWE': 'lwe', 'RLWE': 'rlwe', 'RGSW': 'rgsw'}[kind or 'LWE']
            ct = model.make_input(value, variant, rng)
            if rng.random() < 0.3:
                ct = model.native_add(ct, ct) if kind != 'RGSW' else ct
            return ct
        ct = model.encrypt(value, level=level, rng=rng)
        if rng.random() < 0.3:
            ct = model.native_mul(ct, model.encrypt(self.message(2), level=level, rng=rng))
        return ct

    def arguments(self, op: OperatorSpec) -> List:
        inputs, _ = op.signatures[int(self.rng.integers(len(op.signatures)))]
        kinds = None
        if self.tfhe and op.name in _TFHE_KINDS:
            options = _TFHE_KINDS[op.name]
            kinds = options[int(self.rng.integers(len(options)))]
        level = None
        if not self.tfhe and hasattr(self.model.params, 'top_level'):
            level = int(self.rng.integers(0, self.model.params.top_level + 1))
        args = []
        cipher_index = 0
        for i, sort in enumerate(inputs):
            if sort == Sort.CIPHER:
                kind = kinds[min(cipher_index, len(kinds) - 1)] if kinds else None
                args.append(self.cipher(kind, level))
                cipher_index += 1
            elif sort == Sort.PLAIN:
                args.append(self.model.encode(self.message(3)))
            else:
                args.append(self.message(3) if op.name == 'scalar' and i == 0 else self.message())
        return args

    def widen(self, bound):
        """bound 이상인 경계를 하나 만듭니다."""
        rng = self.rng
        if isinstance(bound, MsgBound):
            return bound if rng.random() < 0.5 else MsgBound()
        changes = {'inf': bound.inf - int(rng.integers(0, 3)), 'sup': bound.sup + int(rng.integers(0, 3))}
        if hasattr(bound, 'eps'):
            changes['eps'] = bound.eps * Fraction(int(rng.integers(100, 300)), 100)
        return dataclasses.replace(bound, **changes)


def mutated_model(model: SchemeModel, operator: str = 'add', factor: int = 100) -> SchemeModel:
    """
    잡음 상한을 factor 배 줄인 (의도적으로 틀린) 경계 함수를 가진 모델 사본.
    공리 검사 하네스의 음성 대조군으로 씁니다.
    """
    original = model.operators[operator]

    def shrunk(*bounds):
        result = original.bounds(*bounds)
        if isinstance(result, BoundsFailure) or not hasattr(result, 'eps'):
            return result
        return dataclasses.replace(result, eps=max(Fraction(1), result.eps / factor))

    mutant = copy.copy(model)
    mutant.operators = dict(model.operators)
    mutant.operators[operator] = dataclasses.replace(original, bounds=shrunk)
    return mutant
