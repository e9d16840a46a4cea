"""
ILA 의미론 모듈
네이티브(동형) 빅스텝 인터프리터와 메시지(평문) 인터프리터,
표면 프로그램용 메시지 인터프리터, 그리고 메시지 동치/의미 안전성 검사를 제공합니다.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

import config
from ir import (
    Assign, AssignStmt, BinOp, Call, Const, CoreCmd, CoreExpr, CoreProgram, If, IfStmt, IndexExpr,
    InitExpr, Name, Neg, Num, Position, Seq, Skip, SkipStmt, SurfaceExpr, SurfaceProgram, Var,
    TRUE_MESSAGE, WhileStmt, element_name,
)
from model_core import IlaError, SchemeModel, Sort, Verdict, bound_le
from refscheme import DegreeError, KindMismatchError, LevelMismatchError, centered
from typecheck import TypingContext

logger = logging.getLogger(__name__)

Substitution = Dict[str, Any]


class StuckError(IlaError):
    """실행이 막힌 상태 (정의되지 않은 변수, 실행 시 정렬 불일치 등)"""

    def __init__(self, message: str, position: Position = None):
        where = f"{position[0]}행: " if position else ''
        super().__init__(where + message)
        self.position = position


@dataclass
class EvalTrace:
    """오라클 모드에서 실행된 대입마다 측정한 값 경계"""
    records: List[Dict] = field(default_factory=list)

    def add(self, index: int, var: str, sort: Sort, bound, position: Position):
        self.records.append({
            'index': index,
            'var': var,
            'line': position[0] if position else None,
            'sort': sort.value,
            'measured': bound.to_dict() if bound is not None else None,
        })

    def __len__(self) -> int:
        return len(self.records)

    def to_json_lines(self) -> str:
        return '\n'.join(json.dumps(r, ensure_ascii=False) for r in self.records)


# ========== 네이티브 의미 ==========

_RUNTIME_ERRORS = (LevelMismatchError, DegreeError, KindMismatchError)


def eval_expr_native(model: SchemeModel, gamma: Substitution, expr: CoreExpr, position: Position = None):
    if isinstance(expr, Var):
        if expr.name not in gamma:
            raise StuckError(f"정의되지 않은 변수: {expr.name}", position)
        return gamma[expr.name]
    if isinstance(expr, Const):
        return expr.value if expr.sort == Sort.MSG else model.encode(expr.value)
    op = model.operator(expr.name)
    args = [eval_expr_native(model, gamma, a, position) for a in expr.args]
    sorts = [model.sort_of(a) for a in args]
    if op.result_sort(sorts) is None:
        names = ', '.join(s.value for s in sorts)
        raise StuckError(f"{op.name}: 실행 시 인자 정렬 ({names}) 이(가) 맞지 않습니다", position)
    try:
        return op.native(*args)
    except _RUNTIME_ERRORS as e:
        raise StuckError(f"{op.name}: {e}", position) from e


class _NativeRunner:
    def __init__(self, model: SchemeModel, trace: Optional[EvalTrace]):
        self.model = model
        self.trace = trace
        self.true = model.true_value()
        self.index = 0

    def run(self, gamma: Substitution, cmd: CoreCmd):
        if isinstance(cmd, Skip):
            return
        if isinstance(cmd, Assign):
            value = eval_expr_native(self.model, gamma, cmd.expr, cmd.pos)
            gamma[cmd.var] = value
            if self.trace is not None:
                bound = self.model.bound_of(value) if self.model.has_secret else None
                self.trace.add(self.index, cmd.var, self.model.sort_of(value), bound, cmd.pos)
            self.index += 1
        elif isinstance(cmd, Seq):
            for c in cmd.cmds:
                self.run(gamma, c)
        elif isinstance(cmd, If):
            guard = eval_expr_native(self.model, gamma, cmd.cond, cmd.pos)
            if self.model.sort_of(guard) != Sort.MSG:
                raise StuckError("조건식 값이 메시지가 아닙니다", cmd.pos)
            self.run(gamma, cmd.then if guard == self.true else cmd.orelse)
        else:
            raise StuckError(f"알 수 없는 명령: {cmd!r}")


def eval_native(model: SchemeModel, gamma: Substitution, cmd: CoreCmd,
                trace: Optional[EvalTrace] = None) -> Substitution:
    """
    네이티브 빅스텝 의미로 명령을 실행합니다.

    Args:
        model: 스킴 모델 (암호문 곱에는 평가 키가 필요)
        gamma: 시작 대입
        cmd: 코어 명령
        trace: 주어지면 대입마다 측정 경계를 기록 (오라클 모드)

    Returns:
        최종 대입
    """
    out = dict(gamma)
    _NativeRunner(model, trace).run(out, cmd)
    return out


# ========== 메시지 의미 ==========

def eval_expr_msg(model: SchemeModel, gamma: Substitution, expr: CoreExpr, position: Position = None) -> int:
    if isinstance(expr, Var):
        if expr.name not in gamma:
            raise StuckError(f"정의되지 않은 변수: {expr.name}", position)
        return gamma[expr.name]
    if isinstance(expr, Const):
        if expr.sort == Sort.MSG:
            return expr.value
        return model.decode(model.encode(expr.value))
    op = model.operator(expr.name)
    return op.message(*[eval_expr_msg(model, gamma, a, position) for a in expr.args])


def _run_msg(model: SchemeModel, gamma: Substitution, cmd: CoreCmd, true: int):
    if isinstance(cmd, Assign):
        gamma[cmd.var] = eval_expr_msg(model, gamma, cmd.expr, cmd.pos)
    elif isinstance(cmd, Seq):
        for c in cmd.cmds:
            _run_msg(model, gamma, c, true)
    elif isinstance(cmd, If):
        guard = eval_expr_msg(model, gamma, cmd.cond, cmd.pos)
        _run_msg(model, gamma, cmd.then if guard == true else cmd.orelse, true)


def eval_msg(model: SchemeModel, gamma: Substitution, cmd: CoreCmd) -> Substitution:
    """
    메시지 의미로 명령을 실행합니다. 잡음 관리 연산은 항등으로 해석됩니다.

    Args:
        model: 스킴 모델 (비밀 매개변수는 사용하지 않음)
        gamma: 메시지 대입
        cmd: 코어 명령

    Returns:
        최종 메시지 대입
    """
    out = dict(gamma)
    _run_msg(model, out, cmd, model.message_true())
    return out


def interp_substitution(model: SchemeModel, gamma: Substitution) -> Substitution:
    """interp^sp_Γ(γ): 각 값을 메시지로 해석합니다."""
    return {name: model.interp(value) for name, value in gamma.items()}


def prepare_inputs(model: SchemeModel, program: CoreProgram, rng: Optional[np.random.Generator] = None,
                   values: Optional[Dict[str, int]] = None) -> Substitution:
    """
    입력 선언을 네이티브 값으로 만듭니다 (암호화에는 비밀 매개변수가 필요).

    Args:
        model: 스킴 모델
        program: 코어 프로그램
        rng: 암호화 난수 생성기
        values: 선언된 데모 값 대신 쓸 입력 값

    Returns:
        시작 대입
    """
    rng = rng if rng is not None else np.random.default_rng(config.DEFAULT_SEED)
    values = values or {}
    gamma: Substitution = {}
    for decl in program.inputs:
        gamma[decl.name] = model.make_input(values.get(decl.name, decl.value), decl.variant, rng)
    return gamma


# ========== 동치와 안전성 ==========

def check_well_formed(model: SchemeModel, ctx: TypingContext, gamma: Substitution) -> Verdict:
    """Γ ⊨ γ: 각 값의 측정 경계가 타입 경계 이하인지 확인합니다."""
    model.require_secret()
    for name, ty in ctx.items():
        if name not in gamma:
            return Verdict(False, 'missing', {'var': name})
        measured = model.bound_of(gamma[name])
        if not bound_le(measured, ty.bound):
            return Verdict(False, 'ill-formed', {'var': name, 'measured': measured, 'expected': ty.bound})
    return Verdict(True, 'ok')


def check_message_equivalence(model: SchemeModel, ctx: TypingContext, gamma: Substitution,
                              cmd: CoreCmd, msg_cmd: Optional[CoreCmd] = None) -> Verdict:
    """
    네이티브 실행 결과의 해석과 메시지 실행 결과가 같은지 검사합니다.

    Args:
        model: 비밀 매개변수를 가진 스킴 모델
        ctx: 시작 타입 컨텍스트
        gamma: 시작 네이티브 대입
        cmd: 네이티브로 실행할 명령
        msg_cmd: 메시지로 실행할 명령 (기본값: cmd, modswitch 추론 전 원본을 줄 때 사용)

    Returns:
        Verdict (details 에 불일치 변수 목록)
    """
    model.require_secret()
    formed = check_well_formed(model, ctx, gamma)
    if not formed:
        return formed
    native_out = eval_native(model, gamma, cmd)
    msg_out = eval_msg(model, interp_substitution(model, gamma), msg_cmd if msg_cmd is not None else cmd)

    mismatches = []
    for name, value in native_out.items():
        got = model.interp(value)
        if name in msg_out and msg_out[name] != got:
            mismatches.append({'var': name, 'native': got, 'message': msg_out[name]})
    if mismatches:
        return Verdict(False, 'mismatch', {'mismatches': mismatches})
    return Verdict(True, 'ok', {'checked': len(native_out)})


def check_semantic_safety(model: SchemeModel, final_ctx: TypingContext, gamma_out: Substitution) -> Verdict:
    """실행 후 값의 측정 경계가 최종 정적 타입 경계 이하인지 검사합니다."""
    violations = []
    for name, ty in final_ctx.items():
        if name not in gamma_out:
            continue
        measured = model.bound_of(gamma_out[name])
        if not bound_le(measured, ty.bound):
            violations.append({'var': name, 'measured': measured.to_dict(), 'static': ty.to_dict()})
    if violations:
        return Verdict(False, 'bound', {'violations': violations})
    return Verdict(True, 'ok')


# ========== 표면 메시지 인터프리터 ==========

class _SurfaceInterpreter:
    """
    루프를 그대로 실행하는 메시지 수준 표면 인터프리터.
    리터럴과 정적 이름만으로 계산되는 값(루프 카운터, 인덱스)은 정수 그대로 두고,
    입력에 의존하는 값만 메시지 연산(mod t)으로 계산합니다.
    """

    _BINARY = {'(+)': 'add', '+': 'add', '(*)': 'mul', '*': 'mul', '<': 'lt', '==': 'eq'}
    _STATIC = {'add': lambda a, b: a + b, 'mul': lambda a, b: a * b, 'scalar': lambda a, b: a * b,
               'lt': lambda a, b: int(a < b), 'eq': lambda a, b: int(a == b)}

    def __init__(self, model: SchemeModel, inputs: Dict[str, int], budget: int):
        self.model = model
        self.t = model.params.t
        self.inputs = inputs
        self.budget = budget
        self.steps = 0
        self.shapes: Dict[str, tuple] = {}
        self.static: Set[str] = set()
        self.dynamic_depth = 0
        self.true = model.message_true()

    def apply(self, name: str, args: Sequence[Tuple[int, bool]]) -> Tuple[int, bool]:
        if name in self._STATIC and all(s for _, s in args):
            return self._STATIC[name](*[v for v, _ in args]), True
        values = [centered(v, self.t) if s else v for v, s in args]
        return self.model.operator(name).message(*values), False

    def element(self, name: str, indices: Sequence[SurfaceExpr], env: Substitution, pos: Position) -> str:
        values = [self.expr(i, env)[0] for i in indices]
        if name in self.shapes:
            length, cols = self.shapes[name]
            flat = values[0] * cols + values[1] if len(values) == 2 else values[0]
            if not 0 <= flat < length:
                raise StuckError(f"{name}: 인덱스 범위를 벗어났습니다", pos)
            return element_name(name, flat)
        return element_name(name, values[0])

    def expr(self, e: SurfaceExpr, env: Substitution) -> Tuple[int, bool]:
        """(값, 정적 여부)"""
        if isinstance(e, Num):
            return e.value, True
        if isinstance(e, Name):
            if e.name not in env:
                raise StuckError(f"정의되지 않은 변수: {e.name}", e.pos)
            return env[e.name], e.name in self.static
        if isinstance(e, IndexExpr):
            key = self.element(e.name, e.indices, env, e.pos)
            if key not in env:
                raise StuckError(f"정의되지 않은 원소: {key}", e.pos)
            return env[key], key in self.static
        if isinstance(e, Neg):
            return self.apply('scalar', [(-1, True), self.expr(e.operand, env)])
        if isinstance(e, BinOp):
            left, right = self.expr(e.left, env), self.expr(e.right, env)
            if e.op == '-':
                return self.apply('add', [left, self.apply('scalar', [(-1, True), right])])
            return self.apply(self._BINARY[e.op], [left, right])
        if isinstance(e, Call):
            if e.func == 'true':
                return TRUE_MESSAGE, True
            args = [self.expr(a, env) for a in e.args]
            if e.func == 'plain':
                return centered(args[0][0], self.t), False
            return self.apply(e.func, args)
        raise StuckError(f"식으로 쓸 수 없는 선언: {e!r}", getattr(e, 'pos', None))

    def guard(self, cond: SurfaceExpr, env: Substitution) -> Tuple[bool, bool]:
        value, static = self.expr(cond, env)
        return value == (TRUE_MESSAGE if static else self.true), static

    def block(self, stmts, env: Substitution):
        for stmt in stmts:
            if isinstance(stmt, SkipStmt):
                continue
            if isinstance(stmt, AssignStmt):
                self.assign(stmt, env)
            elif isinstance(stmt, WhileStmt):
                while self.guard(stmt.cond, env)[0]:
                    self.block(stmt.body, env)
                    self.steps += 1
                    if self.steps > self.budget:
                        raise StuckError("반복 한도를 초과했습니다", stmt.pos)
            elif isinstance(stmt, IfStmt):
                taken, static = self.guard(stmt.cond, env)
                # 실행 시간 분기 안의 대입은 메시지 값이 됨
                self.dynamic_depth += 0 if static else 1
                self.block(stmt.then if taken else stmt.orelse, env)
                self.dynamic_depth -= 0 if static else 1

    def assign(self, stmt: AssignStmt, env: Substitution):
        if isinstance(stmt.value, InitExpr):
            values = stmt.value.flat()
            cols = len(stmt.value.values[0]) if stmt.value.is_matrix else None
            self.shapes[stmt.target] = (len(values), cols)
            for i, v in enumerate(values):
                key = element_name(stmt.target, i)
                env[key] = centered(self.inputs.get(key, v), self.t)
                self.static.discard(key)
            return
        key = self.element(stmt.target, stmt.indices, env, stmt.pos) if stmt.indices else stmt.target
        value, static = self.expr(stmt.value, env)
        if static and not self.dynamic_depth:
            env[key] = value
            self.static.add(key)
        else:
            env[key] = centered(value, self.t) if static else value
            self.static.discard(key)


def eval_surface_msg(model: SchemeModel, program: SurfaceProgram,
                     inputs: Optional[Dict[str, int]] = None) -> Substitution:
    """
    표면 프로그램을 루프 그대로 메시지 수준에서 실행합니다.

    Args:
        model: 스킴 모델 (메시지 연산만 사용)
        program: 표면 프로그램
        inputs: 선언 값 대신 쓸 입력 값 (원소 이름 → 메시지)

    Returns:
        최종 메시지 대입 (벡터 원소는 A[0] 형태의 이름)
    """
    env: Substitution = {}
    interpreter = _SurfaceInterpreter(model, inputs or {}, config.UNROLL_BUDGET)
    interpreter.block(program.statements, env)
    t = model.params.t
    return {k: centered(v, t) if k in interpreter.static else v for k, v in env.items()}
