"""
회로 코퍼스 모듈
PSI, 제곱 계열 c1^(2^k), 곱셈 체인, 거듭제곱, 피보나치, PIR, 행렬 필터,
TFHE 덧셈 체인 등 표면 언어 회로 소스를 만들고,
건전성 검사용 임의 직선 회로 생성기를 제공합니다.
"""
import logging
import os
from typing import Dict, List, Optional, Sequence

import numpy as np

import config

logger = logging.getLogger(__name__)


def _literal(values: Sequence[int]) -> str:
    return '[' + ', '.join(str(int(v)) for v in values) + ']'


def _matrix_literal(rows: Sequence[Sequence[int]]) -> str:
    return '[' + ', '.join(_literal(r) for r in rows) + ']'


# ========== 논문 예제 계열 ==========

def psi_source(a_values: Sequence[int], b_values: Sequence[int], r_values: Optional[Sequence[int]] = None) -> str:
    """
    비공개 집합 교집합 회로.
    result 는 모든 (a - b) 와 무작위 마스크의 곱이며, 교집합이 있으면 0 으로 복호화됩니다.

    Args:
        a_values: 집합 A
        b_values: 집합 B
        r_values: B 원소별 마스크 (0 이 아닌 값, 기본값 2, 3, 2, 3, ...)

    Returns:
        표면 언어 소스
    """
    if r_values is None:
        r_values = [2 + (j % 2) for j in range(len(b_values))]
    if len(r_values) != len(b_values):
        raise ValueError("마스크 R 의 길이는 B 와 같아야 합니다")
    return '\n'.join([
        "# 비공개 집합 교집합 (PSI)",
        f"A := cipher_init{_literal(a_values)}",
        f"B := cipher_init{_literal(b_values)}",
        f"R := cipher_init{_literal(r_values)}",
        f"len_A := {len(a_values)}",
        f"len_B := {len(b_values)}",
        "result := R[0]",
        "j := 0",
        "while j < len_B:",
        "    t1 := B[j]",
        "    t2 := scalar(-1, t1)",
        "    t4 := R[j]",
        "    i := 0",
        "    while i < len_A:",
        "        t5 := A[i]",
        "        t6 := t5 (+) t2",
        "        t7 := result (*) t6",
        "        result := t7 (*) t4",
        "        i := i + 1",
        "    j := j + 1",
        "",
    ])


def square_source(k: int, value: int = 1) -> str:
    """c1^(2^k): c2 = c1 ⊗ c1, c3 = c2 ⊗ c2, ..."""
    lines = [f"# c1^{2 ** k}", f"X := cipher_init[{value}]", "c1 := X[0]"]
    for i in range(2, k + 2):
        lines.append(f"c{i} := c{i - 1} (*) c{i - 1}")
    return '\n'.join(lines) + '\n'


def chain_source(n: int, plain: bool = False, value: int = 1) -> str:
    """
    새 암호문(또는 평문 상수)을 차례로 곱하는 선형 체인 (루프 없이 전개된 형태).
    값은 모두 value 이므로 값 구간은 커지지 않고 잡음만 자랍니다.
    """
    kind = 'plain' if plain else 'cipher'
    lines = [f"# {kind}-cipher 곱셈 체인 ({n}회)"]
    if plain:
        lines += [f"X := cipher_init[{value}]", "acc := X[0]"]
        lines += [f"acc := acc (*) plain({value})" for _ in range(n)]
    else:
        lines += [f"X := cipher_init{_literal([value] * (n + 1))}", "acc := X[0]"]
        lines += [f"acc := acc (*) X[{i}]" for i in range(1, n + 1)]
    return '\n'.join(lines) + '\n'


def exponent_source(power: int, value: int = 2) -> str:
    """x^power 를 반복 곱으로 계산 (곱셈 깊이 대용)"""
    if power < 1:
        raise ValueError("power 는 1 이상이어야 합니다")
    return '\n'.join([
        f"# x^{power}",
        f"X := cipher_init[{value}]",
        "x := X[0]",
        "y := x",
        f"n := {power}",
        "i := 1",
        "while i < n:",
        "    y := y (*) x",
        "    i := i + 1",
        "",
    ])


def fibonacci_source(n: int, seeds: Sequence[int] = (0, 1)) -> str:
    """암호화된 피보나치 수열 (덧셈 깊이 대용)"""
    return '\n'.join([
        f"# 피보나치 {n}항",
        f"F := cipher_init{_literal(seeds)}",
        "a := F[0]",
        "b := F[1]",
        f"n := {n}",
        "i := 0",
        "while i < n:",
        "    c := a (+) b",
        "    a := b",
        "    b := c",
        "    i := i + 1",
        "",
    ])


def pir_source(database: Sequence[int], index: int) -> str:
    """평문 데이터베이스와 암호화된 원-핫 질의의 내적"""
    query = [1 if i == index else 0 for i in range(len(database))]
    return '\n'.join([
        "# 비공개 정보 검색 (PIR)",
        f"D := plain_init{_literal(database)}",
        f"Q := cipher_init{_literal(query)}",
        f"n := {len(database)}",
        "answer := Q[0] (*) D[0]",
        "i := 1",
        "while i < n:",
        "    answer := answer (+) Q[i] (*) D[i]",
        "    i := i + 1",
        "",
    ])


def matrix_filter_source(image: Sequence[Sequence[int]], kernel: Sequence[Sequence[int]]) -> str:
    """
    암호화된 행렬에 평문 2x2 필터를 적용합니다 (valid 합성곱).
    출력 C[i*cols + j] 에 결과를 씁니다.
    """
    rows, cols = len(image), len(image[0])
    if len(kernel) != 2 or len(kernel[0]) != 2:
        raise ValueError("필터는 2x2 여야 합니다")
    out_rows, out_cols = rows - 1, cols - 1
    return '\n'.join([
        "# 행렬 필터",
        f"M := cipher_init{_matrix_literal(image)}",
        f"K := plain_init{_matrix_literal(kernel)}",
        f"rows := {out_rows}",
        f"cols := {out_cols}",
        "i := 0",
        "while i < rows:",
        "    j := 0",
        "    while j < cols:",
        "        s := M[i][j] (*) K[0][0] (+) M[i][j + 1] (*) K[0][1]",
        "        s := s (+) M[i + 1][j] (*) K[1][0] (+) M[i + 1][j + 1] (*) K[1][1]",
        "        C[i * cols + j] := s",
        "        j := j + 1",
        "    i := i + 1",
        "",
    ])


def tfhe_addition_source(t: int, additions: Optional[int] = None) -> str:
    """
    가장 작은 값 -t/2 에서 시작해 평문 1 을 계속 더하는 TFHE 덧셈 체인.
    t-1 번째 덧셈까지는 값이 [-t/2, t/2) 안에 있고 t 번째 덧셈에서 넘칩니다.
    루프 카운터가 mod t 로 접히지 않도록 전개된 형태로 씁니다.
    """
    additions = t if additions is None else additions
    lines = [f"# TFHE 덧셈 체인 (t={t})", f"X := cipher_init[{-(t // 2)}]", "x := X[0]"]
    lines += ["x := x (+) plain(1)"] * additions
    return '\n'.join(lines) + '\n'


def cmux_source(selector: int, on_true: int, on_false: int) -> str:
    """TFHE cmux 와 pbs 를 쓰는 작은 선택 회로"""
    return '\n'.join([
        "# cmux 선택",
        f"S := rgsw_init[{selector}]",
        f"V := rlwe_init[{on_true}, {on_false}]",
        "L := cipher_init[0]",
        "picked := cmux(S[0], V[0], V[1])",
        "fresh := pbs(S[0], L[0])",
        "",
    ])


# ========== 이름별 코퍼스 ==========

def corpus_sources() -> Dict[str, str]:
    """기본 인자로 만든 이름별 회로 소스"""
    return {
        'psi': psi_source([1, 3, 6], [6, 5]),
        'psi_disjoint': psi_source([1, 3, 6], [7, 5]),
        'square16': square_source(4),
        'chain_cc': chain_source(4),
        'chain_pc': chain_source(4, plain=True),
        'exponent': exponent_source(5),
        'fibonacci': fibonacci_source(8),
        'pir': pir_source([5, 7, 11, 13], 2),
        'matrix_filter': matrix_filter_source([[1, 2, 0], [0, 1, 3], [2, 1, 1]], [[1, 0], [0, 1]]),
    }


def shipped_circuits(directory: Optional[str] = None) -> Dict[str, str]:
    """circuits/ 디렉터리의 .ila 파일 (이름 → 소스)"""
    directory = directory or config.CIRCUIT_DIR
    out = {}
    if not os.path.isdir(directory):
        return out
    for fname in sorted(os.listdir(directory)):
        if fname.endswith('.ila'):
            with open(os.path.join(directory, fname), 'r', encoding='utf-8') as fh:
                out[fname[:-4]] = fh.read()
    return out


# ========== 임의 회로 ==========

class RandomCircuitGenerator:
    """
    건전성 검사용 임의 직선 회로 생성기.
    변수마다 곱셈 깊이와 레벨 차이를 추적해 max_depth 를 넘지 않게 하고,
    modswitch 를 쓰는 경우 이항 연산 전에 낮은 쪽 레벨로 맞춥니다.
    """

    def __init__(self, seed: int = config.DEFAULT_SEED, max_statements: int = 40, max_depth: int = 8,
                 value_range: int = 2, modswitch: bool = False, plain: bool = True):
        """
        초기화

        Args:
            seed: 난수 시드
            max_statements: 최대 대입문 수
            max_depth: 최대 곱셈 깊이
            value_range: 입력 값 범위 [-value_range, value_range]
            modswitch: modswitch 사용 여부 (BGV)
            plain: 평문 상수 피연산자 사용 여부
        """
        self.rng = np.random.default_rng(seed)
        self.max_statements = max_statements
        self.max_depth = max_depth
        self.value_range = value_range
        self.modswitch = modswitch
        self.plain = plain

    def _value(self) -> int:
        return int(self.rng.integers(-self.value_range, self.value_range + 1))

    def _operand(self, name: str, drop: int) -> str:
        for _ in range(drop):
            name = f"modswitch({name})"
        return name

    def generate(self, n_inputs: Optional[int] = None) -> str:
        """회로 하나를 만듭니다."""
        rng = self.rng
        n_inputs = n_inputs or int(rng.integers(2, 5))
        values = [self._value() for _ in range(n_inputs)]
        lines = [f"X := cipher_init{_literal(values)}"]
        # 이름 → (곱셈 깊이, 내려간 레벨 수)
        vars_: Dict[str, tuple] = {}
        for i in range(n_inputs):
            lines.append(f"x{i} := X[{i}]")
            vars_[f"x{i}"] = (0, 0)

        n_stmts = int(rng.integers(1, max(2, self.max_statements - n_inputs) + 1))
        for k in range(n_stmts):
            names = list(vars_)
            target = f"v{k}" if rng.random() < 0.8 or k == 0 else names[int(rng.integers(len(names)))]
            a = names[int(rng.integers(len(names)))]
            b = names[int(rng.integers(len(names)))]
            (da, la), (db, lb) = vars_[a], vars_[b]
            low = max(la, lb)
            choice = rng.random()
            if self.modswitch and choice < 0.1:
                expr, info = f"modswitch({a})", (da, la + 1)
            elif choice < 0.35:
                expr = f"{self._operand(a, low - la)} (+) {self._operand(b, low - lb)}"
                info = (max(da, db), low)
            elif choice < 0.5:
                n = int(rng.integers(-2, 3))
                expr, info = f"scalar({n}, {a})", (da, la)
            elif choice < 0.65 and self.plain:
                expr, info = f"{a} (*) plain({self._value()})", (da + 1, la)
            elif choice < 0.75 and self.plain:
                expr, info = f"{a} (+) plain({self._value()})", (da, la)
            else:
                depth = max(da, db) + 1
                if depth > self.max_depth:
                    expr = f"{self._operand(a, low - la)} (+) {self._operand(b, low - lb)}"
                    info = (max(da, db), low)
                else:
                    expr = f"{self._operand(a, low - la)} (*) {self._operand(b, low - lb)}"
                    info = (depth, low)
            if info[0] > self.max_depth:
                expr, info = a, vars_[a]
            lines.append(f"{target} := {expr}")
            vars_[target] = info
        return '\n'.join(lines) + '\n'

    def generate_many(self, count: int) -> List[str]:
        return [self.generate() for _ in range(count)]
