"""
ILA 타입 검사 모듈
부분 타입, 식/명령 타입 규칙, 컨텍스트 병합을 구현합니다.
비밀 매개변수 없이 공개 매개변수만으로 잡음 초과와 값 순환을 검출하며,
거부 시에는 원인 조건 하나를 담은 Diagnosis 를 돌려줍니다.
"""
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

from ir import Assign, Const, CoreCmd, CoreExpr, CoreProgram, If, InputDecl, Position, Seq, Skip, Var
from model_core import (
    BoundsFailure, Bound, MsgBound, Ordering, SchemeModel, Sort, SortMismatchError,
    UnknownOperatorError, compare_bounds,
)
from schemes import bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Type:
    """정렬과 경계의 쌍"""
    sort: Sort
    bound: Bound

    def __post_init__(self):
        if self.bound.sort != self.sort:
            raise SortMismatchError(f"경계 정렬 {self.bound.sort.value} 이(가) 타입 정렬 {self.sort.value} 과 다릅니다")

    def to_dict(self) -> Dict:
        return self.bound.to_dict()


class TypingContext:
    """
    변수 → 타입의 순서 있는 사상.
    extend 는 새 컨텍스트를 돌려주는 함수형 갱신입니다.
    """

    def __init__(self, entries: Optional[Dict[str, Type]] = None):
        """
        초기화

        Args:
            entries: 초기 항목
        """
        self._entries: Dict[str, Type] = dict(entries or {})

    def extend(self, name: str, ty: Type) -> 'TypingContext':
        entries = dict(self._entries)
        entries[name] = ty
        return TypingContext(entries)

    def lookup(self, name: str) -> Optional[Type]:
        return self._entries.get(name)

    def __getitem__(self, name: str) -> Type:
        return self._entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, TypingContext) and self._entries == other._entries

    def items(self):
        return self._entries.items()

    def as_dict(self) -> Dict[str, Type]:
        return dict(self._entries)

    def to_dict(self) -> Dict[str, Dict]:
        return {name: ty.to_dict() for name, ty in self._entries.items()}

    def __repr__(self) -> str:
        inner = ', '.join(f"{k}: {v.sort.value}{v.bound.to_dict()}" for k, v in self._entries.items())
        return f"TypingContext({{{inner}}})"


@dataclass(frozen=True)
class Diagnosis:
    """
    타입 검사 거부 사유.
    kind 는 noise, value, level, sort 중 하나이며 원인 조건은 하나뿐입니다.
    budget_bits 는 실패 지점의 남은 잡음 예산 log2(κ) - log2(ε) 입니다 (음수면 초과).
    """
    kind: str
    operator: Optional[str]
    reason: str
    var: Optional[str] = None
    position: Position = None
    index: Optional[int] = None
    measured: Any = None
    threshold: Any = None
    budget_bits: Optional[float] = None

    @classmethod
    def from_failure(cls, failure: BoundsFailure) -> 'Diagnosis':
        budget = None
        if failure.kind == 'noise' and failure.measured is not None:
            budget = bits(Fraction(failure.threshold)) - bits(Fraction(failure.measured))
        return cls(failure.kind, failure.operator, failure.reason,
                   measured=failure.measured, threshold=failure.threshold, budget_bits=budget)

    def at(self, var: Optional[str], position: Position, index: Optional[int]) -> 'Diagnosis':
        """실패한 문장 위치를 채웁니다 (이미 있으면 유지)."""
        if self.var is not None:
            return self
        return Diagnosis(self.kind, self.operator, self.reason, var, position, index,
                         self.measured, self.threshold, self.budget_bits)

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind,
            'operator': self.operator,
            'reason': self.reason,
            'var': self.var,
            'line': self.position[0] if self.position else None,
            'col': self.position[1] if self.position else None,
            'statement': self.index,
            'measured': None if self.measured is None else str(self.measured),
            'threshold': None if self.threshold is None else str(self.threshold),
            'budget_bits': None if self.budget_bits is None else round(self.budget_bits, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    def describe(self) -> str:
        where = f"{self.position[0]}행 " if self.position else ''
        target = f"{self.var} := ... " if self.var else ''
        text = f"{where}{target}[{self.kind}] {self.operator or '-'}: {self.reason}"
        if self.measured is not None:
            text += f" (측정 {self.measured}, 한계 {self.threshold})"
        return text


def subtype(a: Type, b: Type) -> bool:
    """a ≤ b: 같은 정렬이고 경계가 LE 또는 EQ"""
    if a.sort != b.sort:
        return False
    try:
        return compare_bounds(a.bound, b.bound) in (Ordering.LE, Ordering.EQ)
    except SortMismatchError:
        return False


def join_types(a: Type, b: Type) -> Optional[Type]:
    """두 타입의 최소 상계 (없으면 None)"""
    if a.sort != b.sort or type(a.bound) is not type(b.bound):
        return None
    bound = a.bound.join(b.bound)
    return None if bound is None else Type(a.sort, bound)


def budget_bits(model: SchemeModel, ty: Type) -> Optional[float]:
    """암호문 타입의 남은 잡음 예산 (비트)"""
    if ty.sort != Sort.CIPHER:
        return None
    return bits(Fraction(model.noise_threshold(ty.bound))) - bits(ty.bound.eps)


# ========== 식 ==========

def _lookup(env, name: str) -> Optional[Type]:
    return env.lookup(name) if isinstance(env, TypingContext) else env.get(name)


def type_expr(model: SchemeModel, ctx: Union[TypingContext, Dict[str, Type]], expr: CoreExpr) -> Union[Type, Diagnosis]:
    """
    식의 타입을 계산합니다 (var, const, op 규칙, 부분 타입은 사용처에서 암묵 적용).

    Args:
        model: 스킴 모델 (공개 매개변수만 사용)
        ctx: 타입 컨텍스트
        expr: 코어 식

    Returns:
        Type 또는 Diagnosis
    """
    if isinstance(expr, Var):
        ty = _lookup(ctx, expr.name)
        if ty is None:
            return Diagnosis('sort', None, f"정의되지 않은 변수: {expr.name}")
        return ty
    if isinstance(expr, Const):
        if expr.sort == Sort.MSG:
            return Type(Sort.MSG, MsgBound(expr.value))
        return Type(Sort.PLAIN, model.bound_of(model.encode(expr.value)))

    try:
        op = model.operator(expr.name)
    except UnknownOperatorError as e:
        return Diagnosis('sort', expr.name, str(e))
    arg_types = []
    for arg in expr.args:
        ty = type_expr(model, ctx, arg)
        if isinstance(ty, Diagnosis):
            return ty
        arg_types.append(ty)
    sorts = [ty.sort for ty in arg_types]
    result_sort = op.result_sort(sorts)
    if result_sort is None:
        names = ', '.join(s.value for s in sorts)
        return Diagnosis('sort', op.name, f"인자 정렬 ({names}) 에 맞는 시그니처가 없습니다")
    bound = op.bounds(*[ty.bound for ty in arg_types])
    if isinstance(bound, BoundsFailure):
        return Diagnosis.from_failure(bound)
    return Type(result_sort, bound)


# ========== 명령 ==========

def merge_contexts(g1: TypingContext, g2: TypingContext) -> TypingContext:
    """
    Γ1 ⊓ Γ2: 양쪽에 있고 정렬이 같은 변수만 남기고, 각 경계는 최소 상계로 합칩니다.
    레벨(또는 TFHE 종류)이 다른 암호문 변수는 버립니다.
    """
    merged: Dict[str, Type] = {}
    for name, ty in g1.items():
        other = g2.lookup(name)
        if other is None:
            continue
        joined = join_types(ty, other)
        if joined is not None:
            merged[name] = joined
    return TypingContext(merged)


class _Checker:
    """컨텍스트를 내부 dict 로 갱신하며 명령을 검사합니다."""

    def __init__(self, model: SchemeModel):
        self.model = model
        self.index = 0

    def run(self, env: Dict[str, Type], cmd: CoreCmd) -> Optional[Diagnosis]:
        if isinstance(cmd, Skip):
            return None
        if isinstance(cmd, Assign):
            index = self.index
            self.index += 1
            ty = type_expr(self.model, env, cmd.expr)
            if isinstance(ty, Diagnosis):
                return ty.at(cmd.var, cmd.pos, index)
            env[cmd.var] = ty
            return None
        if isinstance(cmd, Seq):
            for c in cmd.cmds:
                failure = self.run(env, c)
                if failure:
                    return failure
            return None
        if isinstance(cmd, If):
            index = self.index
            self.index += 1
            guard = type_expr(self.model, env, cmd.cond)
            if isinstance(guard, Diagnosis):
                return guard.at('if', cmd.pos, index)
            if guard.sort != Sort.MSG:
                return Diagnosis('sort', 'if', f"조건식은 msg 정렬이어야 합니다 ({guard.sort.value})",
                                 'if', cmd.pos, index)
            then_env, else_env = dict(env), dict(env)
            failure = self.run(then_env, cmd.then) or self.run(else_env, cmd.orelse)
            if failure:
                return failure
            merged = merge_contexts(TypingContext(then_env), TypingContext(else_env))
            env.clear()
            env.update(merged.as_dict())
            return None
        raise TypeError(f"알 수 없는 명령: {cmd!r}")


def type_cmd(model: SchemeModel, ctx: TypingContext, cmd: CoreCmd) -> Union[TypingContext, Diagnosis]:
    """
    명령의 타입을 검사합니다 (Assgn, skip, seq, ite 규칙).

    Args:
        model: 스킴 모델
        ctx: 시작 컨텍스트
        cmd: 코어 명령

    Returns:
        최종 TypingContext 또는 Diagnosis
    """
    env = ctx.as_dict()
    failure = _Checker(model).run(env, cmd)
    if failure:
        logger.debug(f"타입 검사 거부: {failure.describe()}")
        return failure
    return TypingContext(env)


def initial_context(model: SchemeModel, inputs: Sequence[InputDecl]) -> Union[TypingContext, Diagnosis]:
    """
    입력 선언으로 시작 컨텍스트를 만듭니다.
    값 구간이 [-t/2, t/2) 를 벗어나면 value Diagnosis 를 돌려줍니다.
    """
    t = model.params.t
    low, high = Fraction(-t, 2), Fraction(t, 2)
    entries: Dict[str, Type] = {}
    for decl in inputs:
        if decl.inf < low or decl.sup >= high:
            return Diagnosis('value', decl.variant, f"입력 값 구간 [{decl.inf}, {decl.sup}] 이 [-t/2, t/2) 를 벗어납니다",
                             var=decl.name, measured=decl.sup if decl.sup >= high else decl.inf,
                             threshold=high if decl.sup >= high else low)
        try:
            bound = model.input_bound([decl.inf, decl.sup], decl.variant)
        except SortMismatchError as e:
            return Diagnosis('sort', decl.variant, str(e), var=decl.name)
        entries[decl.name] = Type(bound.sort, bound)
    return TypingContext(entries)


def check_program(model: SchemeModel, program: CoreProgram) -> Union[TypingContext, Diagnosis]:
    """입력 선언과 본문을 함께 검사합니다."""
    ctx = initial_context(model, program.inputs)
    if isinstance(ctx, Diagnosis):
        return ctx
    return type_cmd(model, ctx, program.body)


def context_report(model: SchemeModel, ctx: TypingContext) -> List[Dict]:
    """변수별 최종 타입과 남은 잡음 예산"""
    rows = []
    for name, ty in ctx.items():
        budget = budget_bits(model, ty)
        row = {'var': name, 'sort': ty.sort.value, 'bound': ty.to_dict(),
               'budget_bits': None if budget is None else round(budget, 3)}
        rows.append(row)
    return rows
