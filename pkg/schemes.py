"""
스킴 모델 모듈
BGV, BFV, TFHE 를 ILA 모델로 인스턴스화합니다.
공개 매개변수, 암호문 경계 포셋, 잡음 추정기, 연산자별 부분 경계 함수와
토이 스킴(refscheme)을 이용한 네이티브 의미를 묶습니다.
"""
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
import refscheme
from model_core import (
    BoundsFailure, IlaError, MsgBound, OperatorSpec, Ordering, PlainBound, SchemeModel,
    Sort, SortMismatchError, UnknownOperatorError, combine_orderings, interval_ordering,
    scalar_ordering, to_fraction,
)
from refscheme import Plaintext, TfheKind, TfheSimCipher, ToyCiphertext, centered

logger = logging.getLogger(__name__)

M, P, C = Sort.MSG, Sort.PLAIN, Sort.CIPHER


class ParamsError(IlaError):
    """잘못된 스킴 매개변수 파일"""


class EstimatorError(IlaError):
    """단조성을 만족하지 않거나 알 수 없는 잡음 추정기"""


# ========== 매개변수 ==========

def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def next_modulus(bits: int, t: int) -> int:
    """2^bits 이상이면서 q ≡ 1 (mod t) 인 가장 작은 홀수 q"""
    base = 1 << bits
    q = base - base % t + 1
    if q < base:
        q += t
    if q % 2 == 0:
        q += t
    return q


@dataclass(frozen=True)
class BgvParams:
    """
    BGV 공개 매개변수.
    moduli 는 오름차순 (moduli[ω] = q_ω, 레벨 0 이 가장 작음) 입니다.
    """
    t: int
    d: int
    moduli: Tuple[int, ...]
    error_width: int = config.ERROR_WIDTH
    relin_base_bits: int = config.RELIN_BASE_BITS

    def __post_init__(self):
        object.__setattr__(self, 'moduli', tuple(int(q) for q in self.moduli))
        if self.t < 2:
            raise ParamsError(f"평문 모듈러스 t 는 2 이상이어야 합니다: {self.t}")
        if not _is_power_of_two(self.d):
            raise ParamsError(f"환 차수 d 는 2 의 거듭제곱이어야 합니다: {self.d}")
        if not self.moduli:
            raise ParamsError("모듈러스 체인이 비어 있습니다")
        for lower, upper in zip(self.moduli, self.moduli[1:]):
            if lower >= upper:
                raise ParamsError("모듈러스 체인은 엄격히 증가해야 합니다")
        for q in self.moduli:
            if q % 2 == 0 or q % self.t != 1:
                raise ParamsError(f"q={q} 는 홀수이고 q ≡ 1 (mod t) 이어야 합니다")

    @property
    def top_level(self) -> int:
        return len(self.moduli) - 1

    def kappa(self, level: int) -> Fraction:
        return Fraction(self.moduli[level], 2)

    @property
    def fresh_noise(self) -> Fraction:
        return Fraction(refscheme.fresh_noise_bound(self.t, self.d, self.error_width))

    @property
    def default_rounding(self) -> Fraction:
        """모듈러스 전환 반올림 잔차의 ℓ1 최악 상한 (t+1)·d·(d+1)/2"""
        return Fraction((self.t + 1) * self.d * (self.d + 1), 2)

    def to_dict(self) -> Dict:
        return {
            't': self.t, 'd': self.d,
            'modulus_chain': list(reversed(self.moduli)),
            'modulus_bits': [q.bit_length() for q in reversed(self.moduli)],
            'error_width': self.error_width,
        }


@dataclass(frozen=True)
class BfvParams:
    """BFV 공개 매개변수 (단일 모듈러스 q, 상대 잡음)"""
    t: int
    d: int
    q: int
    error_width: int = config.ERROR_WIDTH
    relin_base_bits: int = config.RELIN_BASE_BITS

    def __post_init__(self):
        if self.t < 2:
            raise ParamsError(f"평문 모듈러스 t 는 2 이상이어야 합니다: {self.t}")
        if not _is_power_of_two(self.d):
            raise ParamsError(f"환 차수 d 는 2 의 거듭제곱이어야 합니다: {self.d}")
        if self.q % 2 == 0 or self.q % self.t != 1:
            raise ParamsError(f"q={self.q} 는 홀수이고 q ≡ 1 (mod t) 이어야 합니다")

    @property
    def moduli(self) -> Tuple[int, ...]:
        return (self.q,)

    @property
    def fresh_noise(self) -> Fraction:
        return Fraction(refscheme.fresh_noise_bound(self.t, self.d, self.error_width), self.q)

    def to_dict(self) -> Dict:
        return {'t': self.t, 'd': self.d, 'q': self.q, 'modulus_bits': self.q.bit_length()}


@dataclass(frozen=True)
class TfheParams:
    """TFHE 시뮬레이터 공개 매개변수"""
    t: int
    q: int = config.TFHE_Q
    fresh_noise: int = config.TFHE_FRESH_NOISE

    def __post_init__(self):
        if self.t < 1:
            raise ParamsError(f"평문 모듈러스 t 는 1 이상이어야 합니다: {self.t}")
        if self.q <= 2 * self.t:
            raise ParamsError(f"q={self.q} 가 t={self.t} 에 비해 너무 작습니다")
        if self.fresh_noise < 1:
            raise ParamsError("fresh_noise 는 1 이상이어야 합니다")

    def to_dict(self) -> Dict:
        return {'t': self.t, 'q': self.q, 'fresh_noise': self.fresh_noise}


@dataclass(frozen=True)
class TfheKeys:
    """TFHE 시뮬레이터의 비밀 매개변수 (참값을 읽는 권한과 시드만 가짐)"""
    params: TfheParams
    seed: int


# ========== 암호문 경계 ==========

def _check_interval(inf: Fraction, sup: Fraction):
    if inf > sup:
        raise ValueError(f"잘못된 구간: inf={inf} > sup={sup}")


@dataclass(frozen=True)
class BgvCipherBound:
    """BGV 암호문 경계 (inf, sup, ε, ω). 레벨이 다르면 비교할 수 없습니다."""
    inf: Fraction
    sup: Fraction
    eps: Fraction
    level: int

    def __post_init__(self):
        for name in ('inf', 'sup', 'eps'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        _check_interval(self.inf, self.sup)
        if self.eps < 1:
            raise ValueError(f"BGV 잡음 경계는 1 이상이어야 합니다: {self.eps}")

    @property
    def sort(self) -> Sort:
        return Sort.CIPHER

    def compare(self, other: 'BgvCipherBound') -> Ordering:
        if self.level != other.level:
            return Ordering.INCOMPARABLE
        return combine_orderings([
            interval_ordering(self.inf, self.sup, other.inf, other.sup),
            scalar_ordering(self.eps, other.eps),
        ])

    def join(self, other: 'BgvCipherBound') -> Optional['BgvCipherBound']:
        """최소 상계. 레벨이 다르면 없음(None)"""
        if self.level != other.level:
            return None
        return BgvCipherBound(min(self.inf, other.inf), max(self.sup, other.sup),
                              max(self.eps, other.eps), self.level)

    def to_dict(self) -> Dict:
        return {'sort': 'cipher', 'inf': str(self.inf), 'sup': str(self.sup),
                'eps': str(self.eps), 'level': self.level}


@dataclass(frozen=True)
class BfvCipherBound:
    """BFV 암호문 경계 (inf, sup, ε), ε 는 q 에 대한 상대 잡음"""
    inf: Fraction
    sup: Fraction
    eps: Fraction

    def __post_init__(self):
        for name in ('inf', 'sup', 'eps'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        _check_interval(self.inf, self.sup)
        if self.eps < 0:
            raise ValueError(f"잡음 경계는 음수일 수 없습니다: {self.eps}")

    @property
    def sort(self) -> Sort:
        return Sort.CIPHER

    def compare(self, other: 'BfvCipherBound') -> Ordering:
        return combine_orderings([
            interval_ordering(self.inf, self.sup, other.inf, other.sup),
            scalar_ordering(self.eps, other.eps),
        ])

    def join(self, other: 'BfvCipherBound') -> 'BfvCipherBound':
        return BfvCipherBound(min(self.inf, other.inf), max(self.sup, other.sup), max(self.eps, other.eps))

    def to_dict(self) -> Dict:
        return {'sort': 'cipher', 'inf': str(self.inf), 'sup': str(self.sup), 'eps': str(self.eps)}


@dataclass(frozen=True)
class TfheCipherBound:
    """TFHE 암호문 경계 (id, inf, sup, ε). 종류가 다르면 비교할 수 없습니다."""
    kind: TfheKind
    inf: Fraction
    sup: Fraction
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'kind', TfheKind(self.kind))
        for name in ('inf', 'sup', 'eps'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        _check_interval(self.inf, self.sup)
        if self.eps < 0:
            raise ValueError(f"잡음 경계는 음수일 수 없습니다: {self.eps}")

    @property
    def sort(self) -> Sort:
        return Sort.CIPHER

    def compare(self, other: 'TfheCipherBound') -> Ordering:
        if self.kind != other.kind:
            return Ordering.INCOMPARABLE
        return combine_orderings([
            interval_ordering(self.inf, self.sup, other.inf, other.sup),
            scalar_ordering(self.eps, other.eps),
        ])

    def join(self, other: 'TfheCipherBound') -> Optional['TfheCipherBound']:
        if self.kind != other.kind:
            return None
        return TfheCipherBound(self.kind, min(self.inf, other.inf), max(self.sup, other.sup),
                               max(self.eps, other.eps))

    def to_dict(self) -> Dict:
        return {'sort': 'cipher', 'kind': self.kind.name, 'inf': str(self.inf),
                'sup': str(self.sup), 'eps': str(self.eps)}


# ========== 잡음 추정기 ==========

Binary = Callable[[Fraction, Fraction], Fraction]
Unary = Callable[[Fraction], Fraction]

ESTIMATOR_NAMES = ('worst_case', 'scaled_worst_case', 'custom_table')
_SAMPLE_GRID = [Fraction(v) for v in (1, 2, 3, 5, 8, 13, 100, 1000, 2 ** 20)]


def _product(a: Fraction, b: Fraction) -> Fraction:
    return a * b


def _sum(a: Fraction, b: Fraction) -> Fraction:
    return a + b


class NoiseEstimator:
    """
    잡음 성장 추정 함수 묶음.
    f: 암호문×암호문 곱, g: 평문×암호문 곱, add: 덧셈,
    b_r: 모듈러스 전환 반올림 상수 (None 이면 매개변수 기본값),
    f_prime, g_ext, g_prime, eps_b: TFHE 의 ⊠, ⊡(LWE), ⊡(RLWE), 부트스트래핑 잡음.
    """

    def __init__(self, name: str, f: Binary, g: Optional[Unary] = None, add: Binary = _sum,
                 b_r: Optional[Fraction] = None, f_prime: Binary = _product,
                 g_ext: Binary = _product, g_prime: Binary = _product,
                 eps_b: Optional[Fraction] = None):
        """
        초기화

        Args:
            name: 추정기 이름
            f: 암호문 곱 잡음 함수
            g: 평문 곱 잡음 함수 (None 이면 사용 시 오류)
            add: 덧셈 잡음 함수
            b_r: 반올림 상수
            f_prime: RGSW 내부 곱 잡음 함수
            g_ext: RGSW×LWE 외부 곱 잡음 함수
            g_prime: RGSW×RLWE 외부 곱 잡음 함수
            eps_b: 부트스트래핑 후 잡음
        """
        self.name = name
        self._f = f
        self._g = g
        self._add = add
        self.b_r = None if b_r is None else to_fraction(b_r)
        self._f_prime = f_prime
        self._g_ext = g_ext
        self._g_prime = g_prime
        self.eps_b = Fraction(config.TFHE_FRESH_NOISE) if eps_b is None else to_fraction(eps_b)

    def f(self, e1, e2) -> Fraction:
        return self._f(to_fraction(e1), to_fraction(e2))

    def g(self, e) -> Fraction:
        if self._g is None:
            raise EstimatorError(f"{self.name}: 평문 곱 상수 c_pc 가 정해지지 않았습니다")
        return self._g(to_fraction(e))

    def add(self, e1, e2) -> Fraction:
        return self._add(to_fraction(e1), to_fraction(e2))

    def f_prime(self, e1, e2) -> Fraction:
        return self._f_prime(to_fraction(e1), to_fraction(e2))

    def g_ext(self, e1, e2) -> Fraction:
        return self._g_ext(to_fraction(e1), to_fraction(e2))

    def g_prime(self, e1, e2) -> Fraction:
        return self._g_prime(to_fraction(e1), to_fraction(e2))

    def check_monotone(self):
        """표본 격자에서 각 함수의 단조성을 확인합니다."""
        grid = _SAMPLE_GRID
        binaries = {'f': self.f, 'add': self.add, 'f_prime': self.f_prime,
                    'g_ext': self.g_ext, 'g_prime': self.g_prime}
        for label, fn in binaries.items():
            values = {(a, b): fn(a, b) for a, b in product(grid, grid)}
            for (a, b), v in values.items():
                for (c, e), w in values.items():
                    if a <= c and b <= e and v > w:
                        raise EstimatorError(
                            f"{self.name}: {label}({a},{b})={v} > {label}({c},{e})={w} 이므로 단조가 아닙니다")
        if self._g is not None:
            outputs = [self.g(a) for a in grid]
            for lower, upper in zip(outputs, outputs[1:]):
                if lower > upper:
                    raise EstimatorError(f"{self.name}: g 가 단조가 아닙니다")


def _table_lookup(points: List[Tuple[Fraction, Fraction, Fraction]]) -> Binary:
    """(ε1, ε2) 를 지배하는 표 항목 중 최소값, 표를 벗어나면 최대값·ε1·ε2"""
    top = max(v for _, _, v in points)

    def lookup(e1: Fraction, e2: Fraction) -> Fraction:
        candidates = [v for a, b, v in points if a >= e1 and b >= e2]
        if candidates:
            return min(candidates)
        return top * e1 * e2
    return lookup


def _parse_table(raw) -> List[Tuple[Fraction, Fraction, Fraction]]:
    points = []
    for entry in raw:
        if len(entry) != 3:
            raise EstimatorError(f"표 항목은 [ε1, ε2, f] 형식이어야 합니다: {entry}")
        points.append(tuple(to_fraction(x) for x in entry))
    if not points:
        raise EstimatorError("custom_table 추정기에 표가 비어 있습니다")
    for a, b, v in points:
        for c, e, w in points:
            if a <= c and b <= e and v > w:
                raise EstimatorError(f"표가 단조가 아닙니다: f({a},{b})={v} > f({c},{e})={w}")
    return points


def make_estimator(name: str, options: Optional[Dict] = None) -> NoiseEstimator:
    """
    이름과 옵션으로 잡음 추정기를 만들고 단조성을 검증합니다.

    Args:
        name: worst_case, scaled_worst_case, custom_table 중 하나
        options: c_pc (또는 t, d), scale, table, b_r, eps_b

    Returns:
        NoiseEstimator
    """
    options = dict(options or {})
    key = name.replace('-', '_')
    if key not in ESTIMATOR_NAMES:
        raise EstimatorError(f"알 수 없는 추정기: {name} (가능: {', '.join(ESTIMATOR_NAMES)})")

    c_pc = options.get('c_pc')
    if c_pc is None and 't' in options and 'd' in options:
        c_pc = int(options['t']) * int(options['d'])
    g = None
    if c_pc is not None:
        c_pc = to_fraction(c_pc)
        if c_pc < 0:
            raise EstimatorError("c_pc 는 음수일 수 없습니다")
        g = lambda e: c_pc * e

    if key == 'worst_case':
        f = _product
    elif key == 'scaled_worst_case':
        scale = to_fraction(options.get('scale', 2))
        if scale < 1:
            raise EstimatorError(f"scale 은 1 이상이어야 합니다: {scale}")
        f = lambda a, b: scale * a * b
    else:
        if 'table' not in options:
            raise EstimatorError("custom_table 추정기에는 table 옵션이 필요합니다")
        f = _table_lookup(_parse_table(options['table']))

    estimator = NoiseEstimator(key, f, g=g, b_r=options.get('b_r'), eps_b=options.get('eps_b'))
    estimator.check_monotone()
    return estimator


# ========== 공통 경계 도우미 ==========

def _value_failure(op: str, inf: Fraction, sup: Fraction, t: int) -> Optional[BoundsFailure]:
    """
    값 구간이 [-t/2, t/2) 안에 있는지 확인합니다.
    -t/2 는 중심 대표값으로 표현되므로 하한은 닫혀 있고 상한만 열려 있습니다.
    """
    low, high = Fraction(-t, 2), Fraction(t, 2)
    if inf < low:
        return BoundsFailure('value', op, '값 하한이 -t/2 보다 작습니다', inf, low)
    if sup >= high:
        return BoundsFailure('value', op, '값 상한이 t/2 이상입니다', sup, high)
    return None


def _noise_failure(op: str, eps: Fraction, threshold: Fraction) -> Optional[BoundsFailure]:
    if eps > threshold:
        return BoundsFailure('noise', op, '잡음 한계를 초과했습니다', eps, threshold)
    return None


def _sort_failure(op: str, bounds: Sequence[Any]) -> BoundsFailure:
    sorts = ', '.join(b.sort.value for b in bounds)
    return BoundsFailure('sort', op, f'허용되지 않는 정렬 조합: ({sorts})')


def _interval_product(b1, b2) -> Tuple[Fraction, Fraction]:
    corners = [b1.inf * b2.inf, b1.inf * b2.sup, b1.sup * b2.inf, b1.sup * b2.sup]
    return min(corners), max(corners)


def _interval_scale(n: int, b) -> Tuple[Fraction, Fraction]:
    return min(n * b.inf, n * b.sup), max(n * b.inf, n * b.sup)


def _plain_magnitude(b: PlainBound) -> Fraction:
    """평문이 잔차 상수항에 더하는 최대 ℓ1 기여 max(|inf|, |sup|)"""
    return max(abs(b.inf), abs(b.sup))


def _msg_binary(fn: Callable[[int, int], int]):
    def bounds(b1: MsgBound, b2: MsgBound) -> MsgBound:
        if b1.known and b2.known:
            return MsgBound(fn(b1.value, b2.value))
        return MsgBound()
    return bounds


def _plain_values(bounds: Sequence[Any]) -> bool:
    return all(isinstance(b, PlainBound) for b in bounds)


def bits(value: Fraction) -> float:
    """양의 유리수의 log2 (큰 정수 안전)"""
    if value <= 0:
        return float('-inf')
    return math.log2(value.numerator) - math.log2(value.denominator)


# ========== BGV 경계 함수 ==========

def bgv_add_bounds(b1, b2, params: BgvParams, est: NoiseEstimator):
    """⊕ 의 BGV 경계 함수"""
    if isinstance(b1, MsgBound) and isinstance(b2, MsgBound):
        return _msg_binary(lambda a, b: centered(a + b, params.t))(b1, b2)
    if isinstance(b1, MsgBound) or isinstance(b2, MsgBound):
        return _sort_failure('add', [b1, b2])
    inf, sup = b1.inf + b2.inf, b1.sup + b2.sup
    failure = _value_failure('add', inf, sup, params.t)
    if failure:
        return failure
    if _plain_values([b1, b2]):
        return PlainBound(inf, sup)
    ciphers = [b for b in (b1, b2) if isinstance(b, BgvCipherBound)]
    if len(ciphers) == 2:
        if b1.level != b2.level:
            return BoundsFailure('level', 'add', '두 암호문의 레벨이 다릅니다', b1.level, b2.level)
        eps = est.add(b1.eps, b2.eps)
    else:
        plain = b1 if isinstance(b1, PlainBound) else b2
        eps = ciphers[0].eps + _plain_magnitude(plain)
    level = ciphers[0].level
    return _noise_failure('add', eps, params.kappa(level)) or BgvCipherBound(inf, sup, eps, level)


def bgv_mul_bounds(b1, b2, params: BgvParams, est: NoiseEstimator):
    """⊗ 의 BGV 경계 함수"""
    if isinstance(b1, MsgBound) and isinstance(b2, MsgBound):
        return _msg_binary(lambda a, b: centered(a * b, params.t))(b1, b2)
    if isinstance(b1, MsgBound) or isinstance(b2, MsgBound):
        return _sort_failure('mul', [b1, b2])
    inf, sup = _interval_product(b1, b2)
    failure = _value_failure('mul', inf, sup, params.t)
    if failure:
        return failure
    if _plain_values([b1, b2]):
        return PlainBound(inf, sup)
    if isinstance(b1, BgvCipherBound) and isinstance(b2, BgvCipherBound):
        if b1.level != b2.level:
            return BoundsFailure('level', 'mul', '두 암호문의 레벨이 다릅니다', b1.level, b2.level)
        eps = est.f(b1.eps, b2.eps)
        level = b1.level
    else:
        cipher = b1 if isinstance(b1, BgvCipherBound) else b2
        eps = est.g(cipher.eps)
        level = cipher.level
    return _noise_failure('mul', eps, params.kappa(level)) or BgvCipherBound(inf, sup, eps, level)


def bgv_scalar_bounds(n: MsgBound, b, params: BgvParams, est: NoiseEstimator):
    """스칼라 곱 n×x 의 BGV 경계 함수 (n 은 정적으로 알려진 메시지)"""
    if not isinstance(n, MsgBound):
        return _sort_failure('scalar', [n, b])
    if isinstance(b, MsgBound):
        return _msg_binary(_msg_scalar(params.t))(n, b)
    if not n.known:
        return BoundsFailure('value', 'scalar', '스칼라 값을 정적으로 알 수 없습니다')
    inf, sup = _interval_scale(n.value, b)
    failure = _value_failure('scalar', inf, sup, params.t)
    if failure:
        return failure
    if isinstance(b, PlainBound):
        return PlainBound(inf, sup)
    eps = max(Fraction(1), abs(n.value) * b.eps)
    return _noise_failure('scalar', eps, params.kappa(b.level)) or BgvCipherBound(inf, sup, eps, b.level)


def bgv_modswitch_bounds(b, params: BgvParams, est: NoiseEstimator):
    """모듈러스 전환의 BGV 경계 함수: ε' = (q_{ω-1}/q_ω)·ε + B_r"""
    if not isinstance(b, BgvCipherBound):
        return _sort_failure('modswitch', [b])
    if b.level <= 0:
        return BoundsFailure('level', 'modswitch', '모듈러스 체인이 소진되었습니다 (chain exhausted)', b.level, 1)
    level = b.level - 1
    b_r = est.b_r if est.b_r is not None else params.default_rounding
    eps = Fraction(params.moduli[level], params.moduli[b.level]) * b.eps + b_r
    return _noise_failure('modswitch', eps, params.kappa(level)) or BgvCipherBound(b.inf, b.sup, eps, level)


# ========== BFV 경계 함수 ==========

def bfv_bounds(op: str, args: Sequence[Any], params: BfvParams, est: NoiseEstimator):
    """
    BFV 경계 함수. 잡음은 q 에 대한 상대값이며 임계값은 1/2 입니다.
    추정기는 절대 잡음에 작용하므로 q 를 곱했다가 다시 나눕니다.

    Args:
        op: add, mul, scalar 중 하나
        args: 인자 경계
        params: BFV 매개변수
        est: 잡음 추정기

    Returns:
        경계 또는 BoundsFailure
    """
    q, t = params.q, params.t
    threshold = Fraction(1, 2)
    if op == 'modswitch':
        raise UnknownOperatorError("BFV 모델에는 modswitch 연산자가 없습니다")
    if op == 'scalar':
        n, b = args
        if not isinstance(n, MsgBound):
            return _sort_failure(op, args)
        if isinstance(b, MsgBound):
            return _msg_binary(_msg_scalar(t))(n, b)
        if not n.known:
            return BoundsFailure('value', op, '스칼라 값을 정적으로 알 수 없습니다')
        inf, sup = _interval_scale(n.value, b)
        failure = _value_failure(op, inf, sup, t)
        if failure:
            return failure
        if isinstance(b, PlainBound):
            return PlainBound(inf, sup)
        eps = abs(n.value) * b.eps
        return _noise_failure(op, eps, threshold) or BfvCipherBound(inf, sup, eps)

    b1, b2 = args
    if isinstance(b1, MsgBound) and isinstance(b2, MsgBound):
        fn = (lambda a, b: centered(a + b, t)) if op == 'add' else (lambda a, b: centered(a * b, t))
        return _msg_binary(fn)(b1, b2)
    if isinstance(b1, MsgBound) or isinstance(b2, MsgBound):
        return _sort_failure(op, args)
    if op == 'add':
        inf, sup = b1.inf + b2.inf, b1.sup + b2.sup
    else:
        inf, sup = _interval_product(b1, b2)
    failure = _value_failure(op, inf, sup, t)
    if failure:
        return failure
    if _plain_values(args):
        return PlainBound(inf, sup)
    both = isinstance(b1, BfvCipherBound) and isinstance(b2, BfvCipherBound)
    if op == 'add' and both:
        eps = est.add(b1.eps * q, b2.eps * q) / q
    elif op == 'add':
        cipher, plain = (b1, b2) if isinstance(b1, BfvCipherBound) else (b2, b1)
        eps = cipher.eps + _plain_magnitude(plain) / q
    elif both:
        eps = est.f(b1.eps * q, b2.eps * q) / q
    else:
        cipher = b1 if isinstance(b1, BfvCipherBound) else b2
        eps = est.g(cipher.eps * q) / q
    return _noise_failure(op, eps, threshold) or BfvCipherBound(inf, sup, eps)


# ========== TFHE 경계 함수 ==========

_ADDITIVE = (TfheKind.LWE, TfheKind.RLWE)


def _kind_failure(op: str, bound, allowed: Sequence[TfheKind]) -> Optional[BoundsFailure]:
    if not isinstance(bound, TfheCipherBound) or bound.kind not in allowed:
        got = bound.kind.name if isinstance(bound, TfheCipherBound) else bound.sort.value
        names = '/'.join(k.name for k in allowed)
        return BoundsFailure('sort', op, f'{names} 암호문이 필요하지만 {got} 을(를) 받았습니다')
    return None


def tfhe_bounds(op: str, args: Sequence[Any], params: TfheParams, est: NoiseEstimator):
    """
    TFHE 경계 함수. ⊕ 의 잡음 한계는 q/(2t), 나머지는 q/t 입니다.

    Args:
        op: add, mul, scalar, intprod, extprod, pbs, cmux 중 하나
        args: 인자 경계
        params: TFHE 매개변수
        est: 잡음 추정기

    Returns:
        경계 또는 BoundsFailure
    """
    t = params.t
    add_limit = Fraction(params.q, 2 * t)
    limit = Fraction(params.q, t)

    if op in ('add', 'mul') and all(isinstance(b, MsgBound) for b in args):
        fn = (lambda a, b: centered(a + b, t)) if op == 'add' else (lambda a, b: centered(a * b, t))
        return _msg_binary(fn)(*args)
    if any(isinstance(b, MsgBound) for b in args) and op != 'scalar':
        return _sort_failure(op, args)

    if op == 'add':
        b1, b2 = args
        inf, sup = b1.inf + b2.inf, b1.sup + b2.sup
        failure = _value_failure(op, inf, sup, t)
        if failure:
            return failure
        if _plain_values(args):
            return PlainBound(inf, sup)
        ciphers = [b for b in args if not isinstance(b, PlainBound)]
        for c in ciphers:
            failure = _kind_failure(op, c, _ADDITIVE)
            if failure:
                return failure
        if len(ciphers) == 2:
            kind, eps = max(b1.kind, b2.kind), est.add(b1.eps, b2.eps)
        else:
            kind, eps = ciphers[0].kind, ciphers[0].eps
        return _noise_failure(op, eps, add_limit) or TfheCipherBound(kind, inf, sup, eps)

    if op == 'mul':
        if not _plain_values(args):
            return _sort_failure(op, args)
        inf, sup = _interval_product(*args)
        return _value_failure(op, inf, sup, t) or PlainBound(inf, sup)

    if op == 'scalar':
        n, b = args
        if not isinstance(n, MsgBound):
            return _sort_failure(op, args)
        if isinstance(b, MsgBound):
            return _msg_binary(_msg_scalar(t))(n, b)
        if not n.known:
            return BoundsFailure('value', op, '스칼라 값을 정적으로 알 수 없습니다')
        inf, sup = _interval_scale(n.value, b)
        failure = _value_failure(op, inf, sup, t)
        if failure:
            return failure
        if isinstance(b, PlainBound):
            return PlainBound(inf, sup)
        eps = abs(n.value) * b.eps
        return _noise_failure(op, eps, limit) or TfheCipherBound(b.kind, inf, sup, eps)

    if op == 'intprod':
        b1, b2 = args
        failure = _kind_failure(op, b1, (TfheKind.RGSW,)) or _kind_failure(op, b2, (TfheKind.RGSW,))
        if failure:
            return failure
        inf, sup = _interval_product(b1, b2)
        eps = est.f_prime(b1.eps, b2.eps)
        return (_value_failure(op, inf, sup, t) or _noise_failure(op, eps, limit)
                or TfheCipherBound(TfheKind.RGSW, inf, sup, eps))

    if op == 'extprod':
        g, x = args
        failure = _kind_failure(op, g, (TfheKind.RGSW,)) or _kind_failure(op, x, _ADDITIVE)
        if failure:
            return failure
        inf, sup = _interval_product(g, x)
        grow = est.g_ext if x.kind == TfheKind.LWE else est.g_prime
        eps = grow(g.eps, x.eps)
        return (_value_failure(op, inf, sup, t) or _noise_failure(op, eps, limit)
                or TfheCipherBound(TfheKind.RLWE, inf, sup, eps))

    if op == 'pbs':
        lut, x = args
        failure = _kind_failure(op, lut, (TfheKind.RGSW,)) or _kind_failure(op, x, (TfheKind.LWE,))
        if failure:
            return failure
        failure = _value_failure(op, lut.inf, lut.sup, t)
        if failure:
            return failure
        half = Fraction(t, 2)
        magnitude = max(abs(x.inf), abs(x.sup))
        if magnitude > half:
            return BoundsFailure('value', op, '부트스트래핑 입력이 t/2 를 넘습니다', magnitude, half)
        return TfheCipherBound(TfheKind.LWE, x.inf, x.sup, est.eps_b)

    if op == 'cmux':
        sel, x1, x0 = args
        failure = _kind_failure(op, sel, (TfheKind.RGSW,))
        if failure:
            return failure
        if sel.inf < 0 or sel.sup > 1:
            return BoundsFailure('value', op, '선택자는 0 또는 1 이어야 합니다', sel.sup, 1)
        failure = _kind_failure(op, x1, _ADDITIVE) or _kind_failure(op, x0, _ADDITIVE)
        if failure:
            return failure
        # x0 ⊕ sel ⊡ (x1 ⊖ x0): 결과 값은 두 입력 구간의 합집합 안에 있음
        diff_kind = max(x1.kind, x0.kind)
        grow = est.g_ext if diff_kind == TfheKind.LWE else est.g_prime
        ext_eps = grow(sel.eps, est.add(x1.eps, x0.eps))
        failure = _noise_failure(op, ext_eps, limit)
        if failure:
            return failure
        inf, sup = min(x1.inf, x0.inf), max(x1.sup, x0.sup)
        eps = est.add(ext_eps, x0.eps)
        return (_value_failure(op, inf, sup, t) or _noise_failure(op, eps, add_limit)
                or TfheCipherBound(TfheKind.RLWE, inf, sup, eps))

    raise UnknownOperatorError(f"TFHE 모델에 없는 연산자: {op}")


# ========== 공통 메시지 연산자 ==========

def _message_operators(t: int) -> Dict[str, OperatorSpec]:
    """true, lt, eq 메시지 연산자"""
    def lt(a: int, b: int) -> int:
        return 1 if a < b else 0

    def eq(a: int, b: int) -> int:
        return 1 if a == b else 0

    return {
        'true': OperatorSpec('true', (((), M),), native=lambda: 1,
                             bounds=lambda: MsgBound(1), message=lambda: 1),
        'lt': OperatorSpec('lt', (((M, M), M),), native=lt, bounds=_msg_binary(lt), message=lt),
        'eq': OperatorSpec('eq', (((M, M), M),), native=eq, bounds=_msg_binary(eq), message=eq),
    }


def _msg_add(t: int):
    return lambda a, b: centered(a + b, t)


def _msg_mul(t: int):
    return lambda a, b: centered(a * b, t)


def _msg_scalar(t: int):
    return lambda n, m: centered(n * m, t)


def _check_msg(value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise SortMismatchError(f"메시지가 아닌 값: {type(value).__name__}")
    return int(value)


# ========== 스킴 모델 ==========

class RingModel(SchemeModel):
    """BGV 와 BFV 가 공유하는 토이 RLWE 기반 모델"""
    cipher_bound_type = None

    def __init__(self, params, estimator: NoiseEstimator, secret=None):
        """
        초기화

        Args:
            params: 공개 매개변수
            estimator: 잡음 추정기
            secret: refscheme.KeyMaterial (정적 모드에서는 None)
        """
        self.estimator = estimator
        super().__init__(params, secret)

    # 값 영역

    def sort_of(self, value) -> Sort:
        if isinstance(value, ToyCiphertext):
            return C
        if isinstance(value, Plaintext):
            return P
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return M
        raise SortMismatchError(f"{self.name} 모델의 값이 아닙니다: {type(value).__name__}")

    def encode(self, message: int) -> Plaintext:
        return refscheme.encode(centered(int(message), self.params.t), self.params.t, self.params.d)

    def decode(self, value: Plaintext) -> int:
        return refscheme.decode(value)

    def decrypt(self, value: ToyCiphertext) -> int:
        return refscheme.decode(refscheme.decrypt(self.require_secret(), value))

    def plain_bound(self, value: Plaintext) -> PlainBound:
        m = self.decode(value)
        return PlainBound(m, m)

    def noise_l1(self, value: ToyCiphertext) -> Fraction:
        return refscheme.eval_noise_l1(self.require_secret(), value)

    def encrypt(self, message: int, level: Optional[int] = None, rng=None) -> ToyCiphertext:
        return refscheme.encrypt(self.require_secret(), self.encode(message), level, rng)

    # 네이티브 연산

    def native_add(self, a, b):
        if isinstance(a, ToyCiphertext) and isinstance(b, ToyCiphertext):
            return refscheme.hom_add(a, b)
        if isinstance(a, Plaintext) and isinstance(b, ToyCiphertext):
            a, b = b, a
        if isinstance(a, ToyCiphertext):
            return refscheme.hom_add_plain(a, b)
        if isinstance(a, Plaintext):
            return Plaintext(a.poly + b.poly)
        return centered(_check_msg(a) + _check_msg(b), self.params.t)

    def native_mul(self, a, b):
        if isinstance(a, ToyCiphertext) and isinstance(b, ToyCiphertext):
            keys = self.require_secret()
            return refscheme.relinearize(keys, refscheme.hom_mul(a, b))
        if isinstance(a, Plaintext) and isinstance(b, ToyCiphertext):
            a, b = b, a
        if isinstance(a, ToyCiphertext):
            return refscheme.hom_mul_plain(a, b)
        if isinstance(a, Plaintext):
            return Plaintext(a.poly * b.poly)
        return centered(_check_msg(a) * _check_msg(b), self.params.t)

    def native_scalar(self, n, x):
        n = _check_msg(n)
        if self.sort_of(x) == M:
            return centered(n * int(x), self.params.t)
        if isinstance(x, ToyCiphertext):
            return refscheme.hom_scalar(x, n)
        return Plaintext(x.poly * n)

    def ring_operators(self, add_bounds, mul_bounds, scalar_bounds) -> Dict[str, OperatorSpec]:
        t = self.params.t
        binary = (((P, P), P), ((P, C), C), ((C, P), C), ((C, C), C), ((M, M), M))
        ops = {
            'add': OperatorSpec('add', binary, self.native_add, add_bounds, _msg_add(t)),
            'mul': OperatorSpec('mul', binary, self.native_mul, mul_bounds, _msg_mul(t)),
            'scalar': OperatorSpec('scalar', (((M, C), C), ((M, P), P), ((M, M), M)), self.native_scalar,
                                   scalar_bounds, _msg_scalar(t)),
        }
        ops.update(_message_operators(t))
        return ops

    # 입력

    def input_bound(self, values: Sequence[int], variant: str = 'cipher'):
        raise NotImplementedError

    def make_input(self, value: int, variant: str, rng):
        """선언된 입력 값을 네이티브 값으로 만듭니다."""
        if variant == 'plain':
            return self.encode(value)
        if variant != 'cipher':
            raise SortMismatchError(f"{self.name} 모델은 {variant} 입력을 지원하지 않습니다")
        return self.encrypt(value, rng=rng)


class BgvModel(RingModel):
    """레벨이 있는 BGV 모델 (modswitch 를 잡음 관리 연산으로 가짐)"""
    name = 'bgv'
    cipher_bound_type = BgvCipherBound

    def build_operators(self) -> Dict[str, OperatorSpec]:
        p, est = self.params, self.estimator
        ops = self.ring_operators(
            lambda a, b: bgv_add_bounds(a, b, p, est),
            lambda a, b: bgv_mul_bounds(a, b, p, est),
            lambda n, b: bgv_scalar_bounds(n, b, p, est),
        )
        ops['modswitch'] = OperatorSpec(
            'modswitch', (((C,), C),),
            native=lambda ct: refscheme.hom_modswitch(ct, p),
            bounds=lambda b: bgv_modswitch_bounds(b, p, est),
            message=lambda m: m,
            noise_management=True,
        )
        return ops

    def cipher_bound(self, value: ToyCiphertext) -> BgvCipherBound:
        m = self.decrypt(value)
        eps = max(Fraction(1), self.noise_l1(value))
        return BgvCipherBound(m, m, eps, value.level)

    def noise_threshold(self, bound: BgvCipherBound) -> Fraction:
        return self.params.kappa(bound.level)

    def level_of(self, bound) -> Optional[int]:
        return bound.level if isinstance(bound, BgvCipherBound) else None

    def input_bound(self, values: Sequence[int], variant: str = 'cipher'):
        inf, sup = min(values), max(values)
        if variant == 'plain':
            return PlainBound(inf, sup)
        if variant != 'cipher':
            raise SortMismatchError(f"BGV 모델은 {variant} 입력을 지원하지 않습니다")
        return BgvCipherBound(inf, sup, self.params.fresh_noise, self.params.top_level)


class BfvModel(RingModel):
    """단일 모듈러스 BFV 모델 (잡음 관리 연산 없음)"""
    name = 'bfv'
    cipher_bound_type = BfvCipherBound

    def build_operators(self) -> Dict[str, OperatorSpec]:
        p, est = self.params, self.estimator
        return self.ring_operators(
            lambda a, b: bfv_bounds('add', [a, b], p, est),
            lambda a, b: bfv_bounds('mul', [a, b], p, est),
            lambda n, b: bfv_bounds('scalar', [n, b], p, est),
        )

    def cipher_bound(self, value: ToyCiphertext) -> BfvCipherBound:
        m = self.decrypt(value)
        return BfvCipherBound(m, m, self.noise_l1(value) / self.params.q)

    def noise_threshold(self, bound: BfvCipherBound) -> Fraction:
        return Fraction(1, 2)

    def level_of(self, bound) -> Optional[int]:
        return None

    def input_bound(self, values: Sequence[int], variant: str = 'cipher'):
        inf, sup = min(values), max(values)
        if variant == 'plain':
            return PlainBound(inf, sup)
        if variant != 'cipher':
            raise SortMismatchError(f"BFV 모델은 {variant} 입력을 지원하지 않습니다")
        return BfvCipherBound(inf, sup, self.params.fresh_noise)


_TFHE_VARIANTS = {'cipher': TfheKind.LWE, 'lwe': TfheKind.LWE, 'rlwe': TfheKind.RLWE, 'rgsw': TfheKind.RGSW}


class TfheModel(SchemeModel):
    """시뮬레이션 TFHE 모델 (잡음 관리는 pbs 로만 이루어짐)"""
    name = 'tfhe'

    def __init__(self, params: TfheParams, estimator: NoiseEstimator, secret: Optional[TfheKeys] = None):
        """
        초기화

        Args:
            params: TFHE 매개변수
            estimator: 잡음 추정기
            secret: TfheKeys (정적 모드에서는 None)
        """
        self.estimator = estimator
        super().__init__(params, secret)

    def build_operators(self) -> Dict[str, OperatorSpec]:
        p, est, t = self.params, self.estimator, self.params.t

        def bounds_of(op):
            return lambda *args: tfhe_bounds(op, list(args), p, est)

        def cmux_message(sel, x1, x0):
            return x1 if sel == 1 else x0

        binary = (((P, P), P), ((P, C), C), ((C, P), C), ((C, C), C), ((M, M), M))
        ops = {
            'add': OperatorSpec('add', binary, self.native_add, bounds_of('add'), _msg_add(t)),
            'mul': OperatorSpec('mul', (((P, P), P), ((M, M), M)), self.native_mul,
                                bounds_of('mul'), _msg_mul(t)),
            'scalar': OperatorSpec('scalar', (((M, C), C), ((M, P), P), ((M, M), M)), self.native_scalar,
                                   bounds_of('scalar'), _msg_scalar(t)),
            'intprod': OperatorSpec('intprod', (((C, C), C),), self.native_tfhe('intprod'),
                                    bounds_of('intprod'), _msg_mul(t)),
            'extprod': OperatorSpec('extprod', (((C, C), C),), self.native_tfhe('extprod'),
                                    bounds_of('extprod'), _msg_mul(t)),
            'pbs': OperatorSpec('pbs', (((C, C), C),), self.native_tfhe('pbs'),
                                bounds_of('pbs'), lambda lut, x: x, noise_management=True),
            'cmux': OperatorSpec('cmux', (((C, C, C), C),), self.native_tfhe('cmux'),
                                 bounds_of('cmux'), cmux_message),
        }
        ops.update(_message_operators(t))
        return ops

    def native_tfhe(self, op: str):
        return lambda *args: refscheme.tfhe_sim_eval(op, list(args), self.estimator)

    def native_add(self, a, b):
        if isinstance(a, TfheSimCipher) or isinstance(b, TfheSimCipher):
            return refscheme.tfhe_sim_eval('add', [a, b], self.estimator)
        if isinstance(a, Plaintext):
            return Plaintext(a.poly + b.poly)
        return centered(_check_msg(a) + _check_msg(b), self.params.t)

    def native_mul(self, a, b):
        if isinstance(a, Plaintext):
            return Plaintext(a.poly * b.poly)
        return centered(_check_msg(a) * _check_msg(b), self.params.t)

    def native_scalar(self, n, x):
        n = _check_msg(n)
        if self.sort_of(x) == M:
            return centered(n * int(x), self.params.t)
        if isinstance(x, TfheSimCipher):
            return refscheme.tfhe_sim_eval('scalar', [n, x], self.estimator)
        return Plaintext(x.poly * n)

    def sort_of(self, value) -> Sort:
        if isinstance(value, TfheSimCipher):
            return C
        if isinstance(value, Plaintext):
            return P
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return M
        raise SortMismatchError(f"TFHE 모델의 값이 아닙니다: {type(value).__name__}")

    def encode(self, message: int) -> Plaintext:
        return refscheme.encode(centered(int(message), self.params.t), self.params.t, 1)

    def decode(self, value: Plaintext) -> int:
        return refscheme.decode(value)

    def decrypt(self, value: TfheSimCipher) -> int:
        self.require_secret()
        return value.decrypted

    def plain_bound(self, value: Plaintext) -> PlainBound:
        m = self.decode(value)
        return PlainBound(m, m)

    def cipher_bound(self, value: TfheSimCipher) -> TfheCipherBound:
        m = value.decrypted
        return TfheCipherBound(value.kind, m, m, value.noise)

    def noise_threshold(self, bound: TfheCipherBound) -> Fraction:
        return Fraction(self.params.q, self.params.t)

    def level_of(self, bound) -> Optional[int]:
        return None

    def input_bound(self, values: Sequence[int], variant: str = 'cipher'):
        inf, sup = min(values), max(values)
        if variant == 'plain':
            return PlainBound(inf, sup)
        if variant not in _TFHE_VARIANTS:
            raise SortMismatchError(f"TFHE 모델이 모르는 입력 종류: {variant}")
        return TfheCipherBound(_TFHE_VARIANTS[variant], inf, sup, self.params.fresh_noise)

    def make_input(self, value: int, variant: str, rng):
        if variant == 'plain':
            return self.encode(value)
        if variant not in _TFHE_VARIANTS:
            raise SortMismatchError(f"TFHE 모델이 모르는 입력 종류: {variant}")
        self.require_secret()
        return refscheme.tfhe_encrypt(value, _TFHE_VARIANTS[variant], self.params, rng)


# ========== 불러오기 ==========

def _chain_from(cfg: Dict, t: int) -> Tuple[int, ...]:
    if 'modulus_chain' in cfg:
        chain = [int(q) for q in cfg['modulus_chain']]
    elif 'modulus_bits' in cfg:
        bits_list = cfg['modulus_bits']
        bits_list = bits_list if isinstance(bits_list, list) else [bits_list]
        chain = [next_modulus(int(b), t) for b in bits_list]
    else:
        raise ParamsError("modulus_chain 또는 modulus_bits 가 필요합니다")
    if len(chain) > 1 and chain[0] < chain[-1]:
        raise ParamsError("modulus_chain 은 [q_L, ..., q_0] 순서(내림차순)로 적어야 합니다")
    return tuple(reversed(chain))


def build_model(cfg: Dict, seed: Optional[int] = None) -> SchemeModel:
    """
    설정 딕셔너리로 스킴 모델을 만듭니다.

    Args:
        cfg: scheme, t, d, modulus_chain/modulus_bits, estimator 등을 담은 설정
        seed: 주어지면 키를 생성해 비밀 매개변수를 가진 모델을 만듭니다

    Returns:
        SchemeModel
    """
    scheme = str(cfg.get('scheme', '')).lower()
    if 't' not in cfg:
        raise ParamsError("평문 모듈러스 t 가 필요합니다")
    t = int(cfg['t'])
    est_cfg = cfg.get('estimator', {}) or {}
    if isinstance(est_cfg, str):
        est_cfg = {'name': est_cfg}
    options = dict(est_cfg.get('options', {}) or {})
    est_name = est_cfg.get('name', config.DEFAULT_ESTIMATOR)
    if seed is None and cfg.get('seed') is not None and cfg.get('with_keys'):
        seed = int(cfg['seed'])

    try:
        if scheme == 'bgv':
            params = BgvParams(t=t, d=int(cfg.get('d', 16)), moduli=_chain_from(cfg, t),
                               error_width=int(cfg.get('error_width', config.ERROR_WIDTH)))
            options.setdefault('t', t)
            options.setdefault('d', params.d)
            estimator = make_estimator(est_name, options)
            keys = None if seed is None else refscheme.keygen(params, seed)
            model = BgvModel(params, estimator, keys)
        elif scheme == 'bfv':
            moduli = _chain_from(cfg, t)
            params = BfvParams(t=t, d=int(cfg.get('d', 16)), q=moduli[-1],
                               error_width=int(cfg.get('error_width', config.ERROR_WIDTH)))
            options.setdefault('t', t)
            options.setdefault('d', params.d)
            estimator = make_estimator(est_name, options)
            keys = None if seed is None else refscheme.keygen(params, seed)
            model = BfvModel(params, estimator, keys)
        elif scheme == 'tfhe':
            params = TfheParams(t=t, q=int(cfg.get('q', config.TFHE_Q)),
                                fresh_noise=int(cfg.get('fresh_noise', config.TFHE_FRESH_NOISE)))
            options.setdefault('eps_b', params.fresh_noise)
            estimator = make_estimator(est_name, options)
            keys = None if seed is None else TfheKeys(params, seed)
            model = TfheModel(params, estimator, keys)
        else:
            raise ParamsError(f"알 수 없는 스킴: {cfg.get('scheme')} (bgv, bfv, tfhe 중 하나)")
    except (TypeError, ValueError) as e:
        raise ParamsError(f"잘못된 스킴 매개변수: {e}") from e

    logger.debug(f"스킴 모델 생성: {model.name} {params.to_dict()} 추정기={estimator.name}")
    return model


def load_scheme_config(path: str) -> Dict:
    """스킴 JSON 파일을 읽습니다."""
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            return json.load(fh)
    except FileNotFoundError as e:
        raise ParamsError(f"스킴 파일을 찾을 수 없습니다: {path}") from e
    except json.JSONDecodeError as e:
        raise ParamsError(f"스킴 파일 JSON 오류 ({path}): {e}") from e


def load_model(source: Union[str, Dict], seed: Optional[int] = None) -> SchemeModel:
    """파일 경로 또는 설정 딕셔너리로 스킴 모델을 불러옵니다."""
    cfg = load_scheme_config(source) if isinstance(source, str) else source
    return build_model(cfg, seed)


def with_keys(model: SchemeModel, seed: int) -> SchemeModel:
    """같은 공개 매개변수와 추정기로 비밀 매개변수를 가진 모델을 만듭니다."""
    if isinstance(model, TfheModel):
        return TfheModel(model.params, model.estimator, TfheKeys(model.params, seed))
    keys = refscheme.keygen(model.params, seed)
    return type(model)(model.params, model.estimator, keys)
