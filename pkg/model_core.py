"""
ILA 모델 핵심 모듈
정렬(sort), 경계 포셋, 연산자 삼중항, 스킴 모델 인터페이스와
모델 타당성 공리(가환성, 하향 닫힘) 검사기를 정의합니다.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple


class IlaError(Exception):
    """ILA 도구 전체의 기본 예외"""


class SortMismatchError(IlaError):
    """정렬이 맞지 않는 인자 또는 경계 비교"""


class MissingSecretError(IlaError):
    """비밀 매개변수가 필요한 작업을 정적 모드에서 요청함"""


class IncomparableBoundsError(IlaError):
    """포셋에서 비교할 수 없는 경계"""


class UnknownOperatorError(IlaError):
    """모델에 등록되지 않은 연산자"""


class Sort(Enum):
    """값의 세 가지 정렬"""
    MSG = 'msg'
    PLAIN = 'plain'
    CIPHER = 'cipher'


class Ordering(Enum):
    """경계 비교 결과"""
    LE = 'LE'
    GE = 'GE'
    EQ = 'EQ'
    INCOMPARABLE = 'INCOMPARABLE'


def to_fraction(value) -> Fraction:
    """정수, 문자열, Fraction 을 정확한 유리수로 변환합니다."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("부동소수점 경계는 허용되지 않습니다")
    return Fraction(value)


def combine_orderings(orderings: Sequence[Ordering]) -> Ordering:
    """
    성분별 비교 결과를 곱 순서로 합칩니다.

    Args:
        orderings: 성분별 비교 결과

    Returns:
        전체 비교 결과
    """
    if any(o == Ordering.INCOMPARABLE for o in orderings):
        return Ordering.INCOMPARABLE
    non_eq = {o for o in orderings if o != Ordering.EQ}
    if not non_eq:
        return Ordering.EQ
    if len(non_eq) == 1:
        return non_eq.pop()
    return Ordering.INCOMPARABLE


def interval_ordering(inf1: Fraction, sup1: Fraction, inf2: Fraction, sup2: Fraction) -> Ordering:
    """구간 포함 관계: [inf1, sup1] ⊆ [inf2, sup2] 이면 LE"""
    if inf1 == inf2 and sup1 == sup2:
        return Ordering.EQ
    if inf2 <= inf1 and sup1 <= sup2:
        return Ordering.LE
    if inf1 <= inf2 and sup2 <= sup1:
        return Ordering.GE
    return Ordering.INCOMPARABLE


def scalar_ordering(a: Fraction, b: Fraction) -> Ordering:
    if a == b:
        return Ordering.EQ
    return Ordering.LE if a < b else Ordering.GE


@dataclass(frozen=True)
class MsgBound:
    """
    메시지 정렬의 경계.
    value 가 None 이면 아무 정보도 없는 최상위 경계이고,
    정수이면 정적으로 알려진 상수 메시지입니다 (상수 ⊑ 최상위).
    """
    value: Optional[int] = None

    @property
    def sort(self) -> Sort:
        return Sort.MSG

    @property
    def known(self) -> bool:
        return self.value is not None

    def compare(self, other: 'MsgBound') -> Ordering:
        if self.value == other.value:
            return Ordering.EQ
        if other.value is None:
            return Ordering.LE
        if self.value is None:
            return Ordering.GE
        return Ordering.INCOMPARABLE

    def join(self, other: 'MsgBound') -> 'MsgBound':
        return self if self.value == other.value else MsgBound()

    def to_dict(self) -> Dict:
        return {'sort': 'msg', 'value': self.value}


@dataclass(frozen=True)
class PlainBound:
    """평문 경계 (inf, sup)"""
    inf: Fraction
    sup: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'inf', to_fraction(self.inf))
        object.__setattr__(self, 'sup', to_fraction(self.sup))
        if self.inf > self.sup:
            raise ValueError(f"잘못된 구간: inf={self.inf} > sup={self.sup}")

    @property
    def sort(self) -> Sort:
        return Sort.PLAIN

    def compare(self, other: 'PlainBound') -> Ordering:
        return interval_ordering(self.inf, self.sup, other.inf, other.sup)

    def join(self, other: 'PlainBound') -> 'PlainBound':
        return PlainBound(min(self.inf, other.inf), max(self.sup, other.sup))

    def to_dict(self) -> Dict:
        return {'sort': 'plain', 'inf': str(self.inf), 'sup': str(self.sup)}


Bound = Any  # MsgBound | PlainBound | 스킴별 암호문 경계


def compare_bounds(a: Bound, b: Bound) -> Ordering:
    """
    같은 정렬의 두 경계를 비교합니다.

    Args:
        a: 첫 번째 경계
        b: 두 번째 경계

    Returns:
        LE, GE, EQ, INCOMPARABLE 중 하나
    """
    if a.sort != b.sort or type(a) is not type(b):
        raise SortMismatchError(f"정렬이 다른 경계는 비교할 수 없습니다: {a.sort.value} vs {b.sort.value}")
    return a.compare(b)


def bound_le(a: Bound, b: Bound) -> bool:
    """a ≤ b 여부 (정렬이 다르면 False)"""
    try:
        return compare_bounds(a, b) in (Ordering.LE, Ordering.EQ)
    except SortMismatchError:
        return False


@dataclass(frozen=True)
class BoundsFailure:
    """
    경계 함수가 정의되지 않는 이유.
    kind 는 noise, value, level, sort 중 하나입니다.
    """
    kind: str
    operator: str
    reason: str
    measured: Any = None
    threshold: Any = None

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind,
            'operator': self.operator,
            'reason': self.reason,
            'measured': None if self.measured is None else str(self.measured),
            'threshold': None if self.threshold is None else str(self.threshold),
        }


Signature = Tuple[Tuple[Sort, ...], Sort]


@dataclass(frozen=True)
class OperatorSpec:
    """
    연산자 삼중항: 네이티브 의미, 부분 경계 함수, 메시지 의미.

    Args:
        name: 연산자 이름
        signatures: 허용되는 (입력 정렬들 → 출력 정렬) 목록
        native: 값에 대한 네이티브 의미
        bounds: 경계에 대한 부분 함수 (정의되지 않으면 BoundsFailure)
        message: 메시지에 대한 의미
        noise_management: 메시지 수준에서 항등인 잡음 관리 연산 여부
    """
    name: str
    signatures: Tuple[Signature, ...]
    native: Callable[..., Any]
    bounds: Callable[..., Any]
    message: Callable[..., Any]
    noise_management: bool = False

    def __post_init__(self):
        arities = {len(inputs) for inputs, _ in self.signatures}
        if len(arities) != 1:
            raise ValueError(f"{self.name}: 시그니처의 인자 수가 일치하지 않습니다")

    @property
    def arity(self) -> int:
        return len(self.signatures[0][0])

    def result_sort(self, arg_sorts: Sequence[Sort]) -> Optional[Sort]:
        """인자 정렬에 맞는 출력 정렬 (없으면 None)"""
        for inputs, output in self.signatures:
            if tuple(arg_sorts) == inputs:
                return output
        return None


class SchemeModel:
    """
    ILA 모델의 공통 인터페이스.
    공개 매개변수 pp 만으로 정적 검사가 가능하며, 비밀 매개변수 sp 는
    암호문 경계 측정과 해석(복호화)에만 사용됩니다.
    """
    name = 'abstract'

    def __init__(self, params, secret=None):
        """
        초기화

        Args:
            params: 공개 매개변수
            secret: 비밀 매개변수 (정적 모드에서는 None)
        """
        self.params = params
        self.secret = secret
        if secret is not None and self.topub(secret) != params:
            raise ValueError("비밀 매개변수가 공개 매개변수와 일치하지 않습니다")
        self.operators: Dict[str, OperatorSpec] = self.build_operators()

    def topub(self, secret):
        return secret.params

    def build_operators(self) -> Dict[str, OperatorSpec]:
        raise NotImplementedError

    @property
    def has_secret(self) -> bool:
        return self.secret is not None

    def require_secret(self):
        if self.secret is None:
            raise MissingSecretError(f"{self.name}: 비밀 매개변수가 필요한 작업입니다")
        return self.secret

    def operator(self, name: str) -> OperatorSpec:
        if name not in self.operators:
            raise UnknownOperatorError(f"{self.name} 모델에 없는 연산자: {name}")
        return self.operators[name]

    # 정렬별 값 영역

    def sort_of(self, value) -> Sort:
        raise NotImplementedError

    def plain_bound(self, value) -> PlainBound:
        raise NotImplementedError

    def cipher_bound(self, value) -> Bound:
        raise NotImplementedError

    def decode(self, value) -> int:
        raise NotImplementedError

    def decrypt(self, value) -> int:
        raise NotImplementedError

    def encode(self, message: int):
        raise NotImplementedError

    def bound_of(self, value) -> Bound:
        """|v| 를 계산합니다. 암호문은 비밀 매개변수가 필요합니다."""
        sort = self.sort_of(value)
        if sort == Sort.MSG:
            return MsgBound(value)
        if sort == Sort.PLAIN:
            return self.plain_bound(value)
        self.require_secret()
        return self.cipher_bound(value)

    def interp(self, value) -> int:
        """interp 사상: 메시지는 항등, 평문은 디코딩, 암호문은 복호화"""
        sort = self.sort_of(value)
        if sort == Sort.MSG:
            return value
        if sort == Sort.PLAIN:
            return self.decode(value)
        self.require_secret()
        return self.decrypt(value)

    def true_value(self):
        return self.operator('true').native()

    def message_true(self):
        return self.operator('true').message()


@dataclass
class Verdict:
    """공리 검사 결과"""
    holds: bool
    reason: str = ''
    details: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds


def _apply_bounds(op: OperatorSpec, bounds: Sequence[Bound]):
    return op.bounds(*bounds)


def check_commutativity(model: SchemeModel, op: OperatorSpec, args: List[Any]) -> Verdict:
    """
    가환성 공리를 한 인자 묶음에서 검사합니다.
    경계 함수가 정의되면 (a) 네이티브 결과의 경계가 b 이하이고
    (b) 결과의 해석이 인자 해석에 메시지 연산을 적용한 값과 같아야 합니다.

    Args:
        model: 비밀 매개변수를 가진 스킴 모델
        op: 검사할 연산자
        args: 네이티브 인자 값

    Returns:
        Verdict
    """
    model.require_secret()
    sorts = [model.sort_of(a) for a in args]
    if op.result_sort(sorts) is None:
        raise SortMismatchError(f"{op.name}: 인자 정렬 {[s.value for s in sorts]} 이(가) 맞지 않습니다")

    arg_bounds = [model.bound_of(a) for a in args]
    expected = _apply_bounds(op, arg_bounds)
    if isinstance(expected, BoundsFailure):
        return Verdict(True, 'undefined', {'failure': expected.to_dict()})

    result = op.native(*args)
    measured = model.bound_of(result)
    if not bound_le(measured, expected):
        return Verdict(False, 'bound', {'measured': measured, 'expected': expected})

    got = model.interp(result)
    want = op.message(*[model.interp(a) for a in args])
    if got != want:
        return Verdict(False, 'interp', {'native': got, 'message': want})
    return Verdict(True, 'ok', {'measured': measured, 'expected': expected})


def check_downwards_closed(model: SchemeModel, op: OperatorSpec,
                           bounds: List[Bound], smaller: List[Bound]) -> Verdict:
    """
    하향 닫힘 공리를 검사합니다.

    Args:
        model: 스킴 모델 (공개 매개변수만 사용)
        op: 검사할 연산자
        bounds: 큰 경계들
        smaller: 점별로 더 작은 경계들

    Returns:
        Verdict
    """
    if len(bounds) != len(smaller):
        raise SortMismatchError(f"{op.name}: 인자 수가 다릅니다")
    for big, small in zip(bounds, smaller):
        if compare_bounds(small, big) not in (Ordering.LE, Ordering.EQ):
            raise IncomparableBoundsError(f"{op.name}: {small} 는 {big} 이하가 아닙니다")

    big_result = _apply_bounds(op, bounds)
    if isinstance(big_result, BoundsFailure):
        return Verdict(True, 'undefined')
    small_result = _apply_bounds(op, smaller)
    if isinstance(small_result, BoundsFailure):
        return Verdict(False, 'smaller undefined', {'failure': small_result.to_dict()})
    if not bound_le(small_result, big_result):
        return Verdict(False, 'not monotone', {'small': small_result, 'big': big_result})
    return Verdict(True, 'ok')
