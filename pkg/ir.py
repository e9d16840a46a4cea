"""
ILA 중간 표현 모듈
표면 언어(.ila) 파서와 출력기, 루프 없는 코어 명령으로의 하강(lowering),
그리고 정적 단일 대입(SSA) 변환을 제공합니다.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import config
from model_core import IlaError, Sort
from refscheme import centered

logger = logging.getLogger(__name__)

Position = Optional[Tuple[int, int]]

TRUE_MESSAGE = 1

# 이름 있는 연산자와 인자 수
NAMED_OPS = {
    'modswitch': 1, 'scalar': 2, 'extprod': 2, 'intprod': 2, 'pbs': 2, 'cmux': 3,
    'true': 0, 'lt': 2, 'eq': 2, 'add': 2, 'mul': 2, 'plain': 1,
}
INIT_VARIANTS = {'cipher_init': 'cipher', 'plain_init': 'plain', 'rlwe_init': 'rlwe', 'rgsw_init': 'rgsw'}
KEYWORDS = {'while', 'if', 'else', 'skip'}


class IlaSyntaxError(IlaError):
    """.ila 소스의 구문 오류 (행, 열 포함)"""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}행 {col}열: {message}")
        self.line = line
        self.col = col


class LoweringError(IlaError):
    """표면 프로그램을 코어 명령으로 하강할 수 없음"""


class SsaError(IlaError):
    """SSA 변환 실패 (정의 전 사용, if 문 포함 등)"""


# ========== 표면 AST ==========

@dataclass(frozen=True)
class Num:
    value: int
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Name:
    name: str
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IndexExpr:
    name: str
    indices: Tuple['SurfaceExpr', ...]
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple['SurfaceExpr', ...]
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    """이항 연산. op 는 (+), (*), +, -, *, <, == 중 하나"""
    op: str
    left: 'SurfaceExpr'
    right: 'SurfaceExpr'
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: 'SurfaceExpr'
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class InitExpr:
    """cipher_init/plain_init/rlwe_init/rgsw_init 선언. values 는 중첩 튜플"""
    variant: str
    values: Tuple
    pos: Position = field(default=None, compare=False, repr=False)

    @property
    def keyword(self) -> str:
        return next(k for k, v in INIT_VARIANTS.items() if v == self.variant)

    @property
    def is_matrix(self) -> bool:
        return bool(self.values) and isinstance(self.values[0], tuple)

    def flat(self) -> List[int]:
        if self.is_matrix:
            return [v for row in self.values for v in row]
        return list(self.values)


SurfaceExpr = Union[Num, Name, IndexExpr, Call, BinOp, Neg, InitExpr]


@dataclass(frozen=True)
class AssignStmt:
    target: str
    indices: Tuple[SurfaceExpr, ...]
    value: SurfaceExpr
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class WhileStmt:
    cond: SurfaceExpr
    body: Tuple['SurfaceStmt', ...]
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IfStmt:
    cond: SurfaceExpr
    then: Tuple['SurfaceStmt', ...]
    orelse: Tuple['SurfaceStmt', ...] = ()
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SkipStmt:
    pos: Position = field(default=None, compare=False, repr=False)


SurfaceStmt = Union[AssignStmt, WhileStmt, IfStmt, SkipStmt]


@dataclass(frozen=True)
class SurfaceProgram:
    statements: Tuple[SurfaceStmt, ...]


# ========== 코어 AST ==========

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    """메시지 또는 평문 상수 (암호문 상수는 허용하지 않음)"""
    value: int
    sort: Sort = Sort.MSG

    def __post_init__(self):
        if self.sort == Sort.CIPHER:
            raise LoweringError("암호문 상수는 프로그램에 쓸 수 없습니다")


@dataclass(frozen=True)
class Op:
    name: str
    args: Tuple['CoreExpr', ...] = ()


CoreExpr = Union[Var, Const, Op]


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: CoreExpr
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    """n 항 순차 합성 (오른쪽 중첩 이항 순차와 동치)"""
    cmds: Tuple['CoreCmd', ...]


@dataclass(frozen=True)
class If:
    cond: CoreExpr
    then: 'CoreCmd'
    orelse: 'CoreCmd'
    pos: Position = field(default=None, compare=False, repr=False)


CoreCmd = Union[Skip, Assign, Seq, If]


@dataclass(frozen=True)
class InputDecl:
    """
    프로그램 입력 원소 하나.
    inf/sup 는 같은 선언에 나열된 값들의 구간 껍질입니다.
    """
    name: str
    variant: str
    value: int
    inf: int
    sup: int

    @property
    def base(self) -> str:
        return self.name.split('[', 1)[0]


@dataclass(frozen=True)
class CoreProgram:
    inputs: Tuple[InputDecl, ...]
    body: CoreCmd

    @property
    def input_names(self) -> List[str]:
        return [decl.name for decl in self.inputs]

    def input_values(self) -> Dict[str, int]:
        return {decl.name: decl.value for decl in self.inputs}


def seq(*cmds: CoreCmd) -> CoreCmd:
    """Seq 를 평탄화하고 skip 을 제거합니다."""
    flat = []
    for cmd in cmds:
        if isinstance(cmd, Seq):
            flat.extend(c for c in cmd.cmds if not isinstance(c, Skip))
        elif not isinstance(cmd, Skip):
            flat.append(cmd)
    if not flat:
        return Skip()
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def statements(cmd: CoreCmd) -> List[CoreCmd]:
    """최상위 순차 문장 목록"""
    if isinstance(cmd, Seq):
        return list(cmd.cmds)
    if isinstance(cmd, Skip):
        return []
    return [cmd]


def count_statements(cmd: CoreCmd) -> int:
    if isinstance(cmd, Assign):
        return 1
    if isinstance(cmd, Seq):
        return sum(count_statements(c) for c in cmd.cmds)
    if isinstance(cmd, If):
        return 1 + count_statements(cmd.then) + count_statements(cmd.orelse)
    return 0


def free_vars(expr: CoreExpr) -> Set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Op):
        names = set()
        for arg in expr.args:
            names |= free_vars(arg)
        return names
    return set()


def assigned_vars(cmd: CoreCmd) -> List[str]:
    """명령이 대입하는 변수 (처음 등장 순서)"""
    seen: List[str] = []
    if isinstance(cmd, Assign):
        seen.append(cmd.var)
    elif isinstance(cmd, Seq):
        for c in cmd.cmds:
            seen.extend(v for v in assigned_vars(c) if v not in seen)
    elif isinstance(cmd, If):
        for c in (cmd.then, cmd.orelse):
            seen.extend(v for v in assigned_vars(c) if v not in seen)
    return seen


def rename_expr(expr: CoreExpr, mapping: Dict[str, str]) -> CoreExpr:
    if isinstance(expr, Var):
        return Var(mapping.get(expr.name, expr.name))
    if isinstance(expr, Op):
        return Op(expr.name, tuple(rename_expr(a, mapping) for a in expr.args))
    return expr


def count_ops(expr: CoreExpr, name: str) -> int:
    if isinstance(expr, Op):
        return (expr.name == name) + sum(count_ops(a, name) for a in expr.args)
    return 0


# ========== 토크나이저 ==========

@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, OP, NEWLINE, INDENT, DEDENT, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\(\+\)|\(\*\)|:=|==|[-+*<=()\[\],:])
""", re.VERBOSE)


def tokenize(source: str) -> List[Token]:
    """들여쓰기 기반 토큰 목록을 만듭니다."""
    tokens: List[Token] = []
    indents = [0]
    last_line = 0
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.expandtabs(4).rstrip()
        stripped = line.lstrip()
        if not stripped or stripped.startswith('#'):
            continue
        last_line = lineno
        indent = len(line) - len(stripped)
        if indent > indents[-1]:
            indents.append(indent)
            tokens.append(Token('INDENT', '', lineno, 1))
        while indent < indents[-1]:
            indents.pop()
            tokens.append(Token('DEDENT', '', lineno, 1))
        if indent != indents[-1]:
            raise IlaSyntaxError("들여쓰기가 바깥 블록과 맞지 않습니다", lineno, indent + 1)

        pos = indent
        while pos < len(line):
            match = _TOKEN_RE.match(line, pos)
            if not match:
                raise IlaSyntaxError(f"알 수 없는 문자 {line[pos]!r}", lineno, pos + 1)
            kind = match.lastgroup
            if kind == 'int':
                tokens.append(Token('INT', match.group(), lineno, pos + 1))
            elif kind == 'name':
                tokens.append(Token('NAME', match.group(), lineno, pos + 1))
            elif kind == 'op':
                tokens.append(Token('OP', match.group(), lineno, pos + 1))
            pos = match.end()
        tokens.append(Token('NEWLINE', '', lineno, len(line) + 1))

    end_line = last_line + 1
    for _ in indents[1:]:
        tokens.append(Token('DEDENT', '', end_line, 1))
    tokens.append(Token('EOF', '', end_line, 1))
    return tokens


# ========== 파서 ==========

class Parser:
    """재귀 하강 파서"""

    def __init__(self, source: str):
        """
        초기화

        Args:
            source: .ila 소스 텍스트
        """
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        if tok.kind != 'EOF':
            self.index += 1
        return tok

    def at_end_of_input(self) -> bool:
        return all(t.kind in ('NEWLINE', 'DEDENT', 'EOF') for t in self.tokens[self.index:])

    def error(self, expected: str) -> IlaSyntaxError:
        tok = self.current
        if self.at_end_of_input():
            found = '입력 끝'
        elif tok.kind == 'NEWLINE':
            found = '줄 끝'
        else:
            found = repr(tok.text) if tok.text else tok.kind
        return IlaSyntaxError(f"{expected} 이(가) 필요하지만 {found} 을(를) 만났습니다", tok.line, tok.col)

    def check(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.current
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        if not self.check(kind, text):
            raise self.error(text or kind)
        return self.advance()

    def parse_program(self) -> SurfaceProgram:
        stmts = []
        while not self.check('EOF'):
            stmts.append(self.parse_statement())
        return SurfaceProgram(tuple(stmts))

    def parse_block(self) -> Tuple[SurfaceStmt, ...]:
        self.expect('NEWLINE')
        self.expect('INDENT')
        stmts = []
        while not self.check('DEDENT') and not self.check('EOF'):
            stmts.append(self.parse_statement())
        self.expect('DEDENT')
        return tuple(stmts)

    def parse_statement(self) -> SurfaceStmt:
        tok = self.current
        pos = (tok.line, tok.col)
        if self.check('NAME', 'while'):
            self.advance()
            cond = self.parse_expr()
            self.expect('OP', ':')
            return WhileStmt(cond, self.parse_block(), pos)
        if self.check('NAME', 'if'):
            self.advance()
            cond = self.parse_expr()
            self.expect('OP', ':')
            then = self.parse_block()
            orelse: Tuple[SurfaceStmt, ...] = ()
            if self.check('NAME', 'else'):
                self.advance()
                self.expect('OP', ':')
                orelse = self.parse_block()
            return IfStmt(cond, then, orelse, pos)
        if self.check('NAME', 'skip'):
            self.advance()
            self.expect('NEWLINE')
            return SkipStmt(pos)

        if tok.kind != 'NAME' or tok.text in KEYWORDS:
            raise self.error('문장')
        target = self.advance().text
        indices = self.parse_indices()
        if not (self.check('OP', ':=') or self.check('OP', '=')):
            raise self.error(':=')
        self.advance()
        value = self.parse_expr()
        self.expect('NEWLINE')
        return AssignStmt(target, indices, value, pos)

    def parse_indices(self) -> Tuple[SurfaceExpr, ...]:
        indices = []
        while self.check('OP', '['):
            self.advance()
            indices.append(self.parse_expr())
            self.expect('OP', ']')
        return tuple(indices)

    def parse_expr(self) -> SurfaceExpr:
        left = self.parse_additive()
        if self.check('OP', '<') or self.check('OP', '=='):
            tok = self.advance()
            right = self.parse_additive()
            return BinOp(tok.text, left, right, (tok.line, tok.col))
        return left

    def parse_additive(self) -> SurfaceExpr:
        left = self.parse_multiplicative()
        while self.current.kind == 'OP' and self.current.text in ('(+)', '+', '-'):
            tok = self.advance()
            left = BinOp(tok.text, left, self.parse_multiplicative(), (tok.line, tok.col))
        return left

    def parse_multiplicative(self) -> SurfaceExpr:
        left = self.parse_unary()
        while self.current.kind == 'OP' and self.current.text in ('(*)', '*'):
            tok = self.advance()
            left = BinOp(tok.text, left, self.parse_unary(), (tok.line, tok.col))
        return left

    def parse_unary(self) -> SurfaceExpr:
        if self.check('OP', '-'):
            tok = self.advance()
            operand = self.parse_unary()
            if isinstance(operand, Num):
                return Num(-operand.value, (tok.line, tok.col))
            return Neg(operand, (tok.line, tok.col))
        return self.parse_atom()

    def parse_atom(self) -> SurfaceExpr:
        tok = self.current
        pos = (tok.line, tok.col)
        if tok.kind == 'INT':
            self.advance()
            return Num(int(tok.text), pos)
        if self.check('OP', '('):
            self.advance()
            inner = self.parse_expr()
            self.expect('OP', ')')
            return inner
        if tok.kind != 'NAME' or tok.text in KEYWORDS:
            raise self.error('식')
        name = self.advance().text
        if name in INIT_VARIANTS:
            return InitExpr(INIT_VARIANTS[name], self.parse_literal(), pos)
        if self.check('OP', '('):
            if name not in NAMED_OPS:
                raise IlaSyntaxError(f"알 수 없는 연산자: {name}", tok.line, tok.col)
            self.advance()
            args = []
            if not self.check('OP', ')'):
                args.append(self.parse_expr())
                while self.check('OP', ','):
                    self.advance()
                    args.append(self.parse_expr())
            self.expect('OP', ')')
            if len(args) != NAMED_OPS[name]:
                raise IlaSyntaxError(
                    f"{name} 은(는) 인자 {NAMED_OPS[name]}개가 필요합니다 ({len(args)}개 받음)", tok.line, tok.col)
            return Call(name, tuple(args), pos)
        indices = self.parse_indices()
        if indices:
            return IndexExpr(name, indices, pos)
        return Name(name, pos)

    def parse_literal(self) -> Tuple:
        self.expect('OP', '[')
        items = []
        if not self.check('OP', ']'):
            items.append(self.parse_literal_item())
            while self.check('OP', ','):
                self.advance()
                items.append(self.parse_literal_item())
        self.expect('OP', ']')
        nested = [isinstance(i, tuple) for i in items]
        if any(nested) and not all(nested):
            raise self.error('같은 깊이의 리터럴')
        if items and all(nested) and len({len(i) for i in items}) != 1:
            raise self.error('같은 길이의 행')
        return tuple(items)

    def parse_literal_item(self):
        if self.check('OP', '['):
            inner = self.parse_literal()
            if inner and isinstance(inner[0], tuple):
                raise self.error('2차원 이하의 리터럴')
            return inner
        sign = 1
        if self.check('OP', '-'):
            self.advance()
            sign = -1
        return sign * int(self.expect('INT').text)


def parse(source: str) -> SurfaceProgram:
    """
    .ila 소스를 표면 프로그램으로 파싱합니다.

    Args:
        source: 소스 텍스트

    Returns:
        SurfaceProgram
    """
    return Parser(source).parse_program()


# ========== 출력기 ==========

_PRECEDENCE = {'<': 0, '==': 0, '(+)': 1, '+': 1, '-': 1, '(*)': 2, '*': 2}


def _wrap(text: str, inner: int, outer: int, right: bool) -> str:
    if inner < outer or (right and inner == outer):
        return f"({text})"
    return text


def _literal_text(values: Tuple) -> str:
    return '[' + ', '.join(_literal_text(v) if isinstance(v, tuple) else str(v) for v in values) + ']'


def format_surface_expr(expr: SurfaceExpr) -> Tuple[str, int]:
    """(텍스트, 우선순위) 를 돌려줍니다."""
    if isinstance(expr, Num):
        return str(expr.value), 3
    if isinstance(expr, Name):
        return expr.name, 3
    if isinstance(expr, IndexExpr):
        return expr.name + ''.join(f"[{format_surface_expr(i)[0]}]" for i in expr.indices), 3
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(format_surface_expr(a)[0] for a in expr.args)})", 3
    if isinstance(expr, InitExpr):
        return expr.keyword + _literal_text(expr.values), 3
    if isinstance(expr, Neg):
        text, prec = format_surface_expr(expr.operand)
        return '-' + (text if prec == 3 and not text.startswith('-') else f"({text})"), 3
    prec = _PRECEDENCE[expr.op]
    left, lp = format_surface_expr(expr.left)
    right, rp = format_surface_expr(expr.right)
    if prec == 0:
        return f"{_wrap(left, lp, 1, False)} {expr.op} {_wrap(right, rp, 1, False)}", 0
    return f"{_wrap(left, lp, prec, False)} {expr.op} {_wrap(right, rp, prec, True)}", prec


def format_surface(program: SurfaceProgram) -> str:
    """표면 프로그램을 parse 가 되돌릴 수 있는 소스로 출력합니다."""
    lines: List[str] = []

    def emit(stmts: Sequence[SurfaceStmt], depth: int):
        pad = '    ' * depth
        for stmt in stmts:
            if isinstance(stmt, AssignStmt):
                target = stmt.target + ''.join(f"[{format_surface_expr(i)[0]}]" for i in stmt.indices)
                lines.append(f"{pad}{target} := {format_surface_expr(stmt.value)[0]}")
            elif isinstance(stmt, WhileStmt):
                lines.append(f"{pad}while {format_surface_expr(stmt.cond)[0]}:")
                emit(stmt.body or (SkipStmt(),), depth + 1)
            elif isinstance(stmt, IfStmt):
                lines.append(f"{pad}if {format_surface_expr(stmt.cond)[0]}:")
                emit(stmt.then or (SkipStmt(),), depth + 1)
                if stmt.orelse:
                    lines.append(f"{pad}else:")
                    emit(stmt.orelse, depth + 1)
            else:
                lines.append(f"{pad}skip")

    emit(program.statements, 0)
    return '\n'.join(lines) + '\n'


_CORE_INFIX = {'add': ('(+)', 1), 'mul': ('(*)', 2)}


def format_core_expr(expr: CoreExpr) -> Tuple[str, int]:
    if isinstance(expr, Var):
        return expr.name, 3
    if isinstance(expr, Const):
        if expr.sort == Sort.PLAIN:
            return f"plain({expr.value})", 3
        return str(expr.value), 3
    if expr.name in _CORE_INFIX:
        symbol, prec = _CORE_INFIX[expr.name]
        left, lp = format_core_expr(expr.args[0])
        right, rp = format_core_expr(expr.args[1])
        return f"{_wrap(left, lp, prec, False)} {symbol} {_wrap(right, rp, prec, True)}", prec
    return f"{expr.name}({', '.join(format_core_expr(a)[0] for a in expr.args)})", 3


def format_core(cmd: CoreCmd, depth: int = 0) -> List[str]:
    pad = '    ' * depth
    if isinstance(cmd, Assign):
        return [f"{pad}{cmd.var} := {format_core_expr(cmd.expr)[0]}"]
    if isinstance(cmd, Seq):
        return [line for c in cmd.cmds for line in format_core(c, depth)]
    if isinstance(cmd, If):
        lines = [f"{pad}if {format_core_expr(cmd.cond)[0]}:"]
        lines += format_core(cmd.then, depth + 1) or [f"{pad}    skip"]
        lines.append(f"{pad}else:")
        lines += format_core(cmd.orelse, depth + 1) or [f"{pad}    skip"]
        return lines
    return []


def format_program(program: CoreProgram) -> str:
    """코어 프로그램을 다시 하강할 수 있는 .ila 텍스트로 출력합니다."""
    lines: List[str] = []
    groups: Dict[Tuple[str, str], List[int]] = {}
    for decl in program.inputs:
        groups.setdefault((decl.base, decl.variant), []).append(decl.value)
    for (base, variant), values in groups.items():
        keyword = next(k for k, v in INIT_VARIANTS.items() if v == variant)
        lines.append(f"{base} := {keyword}{_literal_text(tuple(values))}")
    lines += format_core(program.body)
    return '\n'.join(lines) + '\n'


# ========== 하강 ==========

def element_name(base: str, index: int) -> str:
    return f"{base}[{index}]"


class Lowerer:
    """
    표면 프로그램을 루프 없는 코어 프로그램으로 전개합니다.
    리터럴과 상수 이름만으로 계산되는 식(루프 카운터, 인덱스)은 정수 그대로 접고,
    코어 상수로 내보낼 때만 평문 모듈러스로 환원합니다.
    """

    def __init__(self, modulus: Optional[int] = None, budget: Optional[int] = None):
        """
        초기화

        Args:
            modulus: 내보내는 메시지 상수를 환원할 평문 모듈러스 (None 이면 정수 그대로)
            budget: 최대 코어 문장 수
        """
        self.modulus = modulus
        self.budget = config.UNROLL_BUDGET if budget is None else budget
        self.inputs: List[InputDecl] = []
        self.shapes: Dict[str, Tuple[int, Optional[int]]] = {}
        self.emitted = 0

    def reduce(self, value: int) -> int:
        return centered(value, self.modulus) if self.modulus else value

    def fail(self, message: str, pos: Position) -> LoweringError:
        where = f"{pos[0]}행: " if pos else ''
        return LoweringError(where + message)

    # 상수 접기

    def fold(self, expr: SurfaceExpr, consts: Dict[str, int]) -> Optional[int]:
        if isinstance(expr, Num):
            return expr.value
        if isinstance(expr, Name):
            return consts.get(expr.name)
        if isinstance(expr, IndexExpr):
            try:
                return consts.get(self.resolve(expr.name, expr.indices, consts, expr.pos))
            except LoweringError:
                return None
        if isinstance(expr, Neg):
            inner = self.fold(expr.operand, consts)
            return None if inner is None else -inner
        if isinstance(expr, BinOp):
            left, right = self.fold(expr.left, consts), self.fold(expr.right, consts)
            if left is None or right is None:
                return None
            return self.apply_msg(expr.op, left, right)
        if isinstance(expr, Call):
            if expr.func == 'true':
                return TRUE_MESSAGE
            if expr.func not in ('lt', 'eq', 'add', 'mul', 'scalar'):
                return None
            args = [self.fold(a, consts) for a in expr.args]
            if any(a is None for a in args):
                return None
            symbol = {'lt': '<', 'eq': '==', 'add': '+', 'mul': '*', 'scalar': '*'}[expr.func]
            return self.apply_msg(symbol, *args)
        return None

    def apply_msg(self, op: str, left: int, right: int) -> int:
        if op == '<':
            return int(left < right)
        if op == '==':
            return int(left == right)
        if op in ('+', '(+)'):
            return left + right
        if op == '-':
            return left - right
        return left * right

    # 벡터 인덱스

    def resolve(self, base: str, indices: Sequence[SurfaceExpr], consts: Dict[str, int], pos: Position) -> str:
        values = []
        for idx in indices:
            value = self.fold(idx, consts)
            if value is None:
                raise self.fail(f"{base} 의 인덱스가 상수가 아닙니다", pos)
            values.append(value)
        if base not in self.shapes:
            if len(values) != 1:
                raise self.fail(f"선언되지 않은 {base} 에 다차원 인덱스를 쓸 수 없습니다", pos)
            if values[0] < 0:
                raise self.fail(f"{base}[{values[0]}]: 인덱스 범위를 벗어났습니다", pos)
            return element_name(base, values[0])
        length, cols = self.shapes[base]
        if len(values) == 2:
            if cols is None:
                raise self.fail(f"{base} 은(는) 벡터이므로 이중 인덱스를 쓸 수 없습니다", pos)
            row, col = values
            rows = length // cols
            if not (0 <= row < rows and 0 <= col < cols):
                raise self.fail(f"{base}[{row}][{col}]: 인덱스 범위를 벗어났습니다 ({rows}x{cols})", pos)
            flat = row * cols + col
        elif len(values) == 1:
            flat = values[0]
            if not 0 <= flat < length:
                raise self.fail(f"{base}[{flat}]: 인덱스 범위를 벗어났습니다 (길이 {length})", pos)
        else:
            raise self.fail(f"{base}: 인덱스는 최대 2개입니다", pos)
        return element_name(base, flat)

    # 식

    def lower_expr(self, expr: SurfaceExpr, consts: Dict[str, int]) -> CoreExpr:
        folded = self.fold(expr, consts)
        if folded is not None and not isinstance(expr, InitExpr):
            return Const(self.reduce(folded), Sort.MSG)
        if isinstance(expr, Name):
            if expr.name in self.shapes:
                raise self.fail(f"벡터 {expr.name} 을(를) 스칼라로 쓸 수 없습니다", expr.pos)
            return Var(expr.name)
        if isinstance(expr, IndexExpr):
            return Var(self.resolve(expr.name, expr.indices, consts, expr.pos))
        if isinstance(expr, Neg):
            return Op('scalar', (Const(self.reduce(-1)), self.lower_expr(expr.operand, consts)))
        if isinstance(expr, BinOp):
            left = self.lower_expr(expr.left, consts)
            right = self.lower_expr(expr.right, consts)
            if expr.op in ('(+)', '+'):
                return Op('add', (left, right))
            if expr.op in ('(*)', '*'):
                return Op('mul', (left, right))
            if expr.op == '-':
                return Op('add', (left, Op('scalar', (Const(self.reduce(-1)), right))))
            return Op('lt' if expr.op == '<' else 'eq', (left, right))
        if isinstance(expr, Call):
            if expr.func == 'plain':
                value = self.fold(expr.args[0], consts)
                if value is None:
                    raise self.fail("plain(...) 의 인자는 메시지 상수여야 합니다", expr.pos)
                return Const(self.reduce(value), Sort.PLAIN)
            return Op(expr.func, tuple(self.lower_expr(a, consts) for a in expr.args))
        if isinstance(expr, InitExpr):
            raise self.fail(f"{expr.keyword} 는 대입문의 오른쪽에만 올 수 있습니다", expr.pos)
        raise self.fail(f"하강할 수 없는 식: {expr!r}", None)

    # 문장

    def emit(self, out: List[CoreCmd], cmd: CoreCmd, pos: Position):
        self.emitted += 1
        if self.emitted > self.budget:
            raise self.fail(f"전개 한도 {self.budget} 문장을 초과했습니다 (unroll budget exceeded)", pos)
        out.append(cmd)

    def declare(self, stmt: AssignStmt, init: InitExpr, top: bool):
        if not top:
            raise self.fail("입력 선언은 최상위에서만 할 수 있습니다", stmt.pos)
        if stmt.indices:
            raise self.fail("입력 선언의 대상에는 인덱스를 쓸 수 없습니다", stmt.pos)
        if stmt.target in self.shapes:
            raise self.fail(f"{stmt.target} 이(가) 이미 선언되었습니다", stmt.pos)
        values = init.flat()
        if not values:
            raise self.fail(f"{stmt.target}: 빈 입력 선언입니다", stmt.pos)
        cols = len(init.values[0]) if init.is_matrix else None
        self.shapes[stmt.target] = (len(values), cols)
        inf, sup = min(values), max(values)
        for i, value in enumerate(values):
            self.inputs.append(InputDecl(element_name(stmt.target, i), init.variant, value, inf, sup))

    def lower_block(self, stmts: Sequence[SurfaceStmt], consts: Dict[str, int], top: bool) -> List[CoreCmd]:
        out: List[CoreCmd] = []
        for stmt in stmts:
            if isinstance(stmt, SkipStmt):
                continue
            if isinstance(stmt, AssignStmt):
                self.lower_assign(stmt, consts, top, out)
            elif isinstance(stmt, WhileStmt):
                self.lower_while(stmt, consts, out)
            elif isinstance(stmt, IfStmt):
                self.lower_if(stmt, consts, out)
        return out

    def lower_assign(self, stmt: AssignStmt, consts: Dict[str, int], top: bool, out: List[CoreCmd]):
        if isinstance(stmt.value, InitExpr):
            self.declare(stmt, stmt.value, top)
            return
        if stmt.indices:
            target = self.resolve(stmt.target, stmt.indices, consts, stmt.pos)
        elif stmt.target in self.shapes:
            raise self.fail(f"벡터 {stmt.target} 전체에 대입할 수 없습니다", stmt.pos)
        else:
            target = stmt.target
        folded = self.fold(stmt.value, consts)
        if folded is not None:
            consts[target] = folded
            self.emit(out, Assign(target, Const(self.reduce(folded), Sort.MSG), stmt.pos), stmt.pos)
            return
        consts.pop(target, None)
        self.emit(out, Assign(target, self.lower_expr(stmt.value, consts), stmt.pos), stmt.pos)

    def lower_while(self, stmt: WhileStmt, consts: Dict[str, int], out: List[CoreCmd]):
        iterations = 0
        while True:
            guard = self.fold(stmt.cond, consts)
            if guard is None:
                raise self.fail("반복 조건이 상수가 아닙니다 (non-constant bound)", stmt.pos)
            if guard != TRUE_MESSAGE:
                return
            out.extend(self.lower_block(stmt.body, consts, False))
            iterations += 1
            if iterations > self.budget:
                raise self.fail(f"반복 횟수가 전개 한도 {self.budget} 를 넘었습니다 (unroll budget exceeded)",
                                stmt.pos)

    def lower_if(self, stmt: IfStmt, consts: Dict[str, int], out: List[CoreCmd]):
        guard = self.fold(stmt.cond, consts)
        if guard is not None:
            out.extend(self.lower_block(stmt.then if guard == TRUE_MESSAGE else stmt.orelse, consts, False))
            return
        cond = self.lower_expr(stmt.cond, consts)
        then_consts, else_consts = dict(consts), dict(consts)
        then_cmd = seq(*self.lower_block(stmt.then, then_consts, False))
        else_cmd = seq(*self.lower_block(stmt.orelse, else_consts, False))
        merged = {k: v for k, v in then_consts.items() if else_consts.get(k) == v}
        consts.clear()
        consts.update(merged)
        self.emit(out, If(cond, then_cmd, else_cmd, stmt.pos), stmt.pos)

    def lower(self, program: SurfaceProgram) -> CoreProgram:
        body = self.lower_block(program.statements, {}, True)
        logger.debug(f"하강 완료: 입력 {len(self.inputs)}개, 코어 문장 {self.emitted}개")
        return CoreProgram(tuple(self.inputs), seq(*body))


def lower(program: SurfaceProgram, modulus: Optional[int] = None, budget: Optional[int] = None) -> CoreProgram:
    """
    표면 프로그램을 루프 없는 코어 프로그램으로 하강합니다.

    Args:
        program: 표면 프로그램
        modulus: 코어 상수를 환원할 평문 모듈러스
        budget: 전개 한도 (기본값: config.UNROLL_BUDGET)

    Returns:
        CoreProgram
    """
    return Lowerer(modulus, budget).lower(program)


def compile_source(source: str, modulus: Optional[int] = None, budget: Optional[int] = None) -> CoreProgram:
    return lower(parse(source), modulus, budget)


def load_circuit(path: str) -> str:
    with open(path, 'r', encoding='utf-8') as fh:
        return fh.read()


# ========== SSA ==========

@dataclass(frozen=True)
class Definition:
    var: str
    expr: CoreExpr
    origin: str
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SsaProgram:
    """단일 대입 정의 목록. final 은 원래 이름 → 마지막 SSA 이름"""
    definitions: Tuple[Definition, ...]
    inputs: Tuple[str, ...]
    final: Tuple[Tuple[str, str], ...]

    @property
    def root(self) -> Optional[str]:
        return self.definitions[-1].var if self.definitions else None

    @property
    def final_names(self) -> Dict[str, str]:
        return dict(self.final)

    def definition(self, var: str) -> Definition:
        for d in self.definitions:
            if d.var == var:
                return d
        raise KeyError(var)

    def to_cmd(self) -> CoreCmd:
        """마지막 버전을 원래 이름으로 되돌린 일반 코어 명령"""
        back = {ssa: orig for orig, ssa in self.final}
        return seq(*[Assign(back.get(d.var, d.var), rename_expr(d.expr, back), d.pos) for d in self.definitions])

    def replace(self, var: str, expr: CoreExpr) -> 'SsaProgram':
        defs = tuple(Definition(d.var, expr, d.origin, d.pos) if d.var == var else d for d in self.definitions)
        return SsaProgram(defs, self.inputs, self.final)


_SANITIZE_RE = re.compile(r'[^A-Za-z0-9_]')


def _sanitize(name: str) -> str:
    cleaned = _SANITIZE_RE.sub('_', name).rstrip('_')
    return cleaned or 'v'


def _flatten(cmd: CoreCmd) -> List[Assign]:
    if isinstance(cmd, Skip):
        return []
    if isinstance(cmd, Seq):
        return [a for c in cmd.cmds for a in _flatten(c)]
    if isinstance(cmd, If):
        raise SsaError("if 문이 있는 명령은 SSA 로 바꿀 수 없습니다 (분기별로 처리하세요)")
    return [cmd]


def to_ssa(cmd: CoreCmd, inputs: Optional[Iterable[str]] = None) -> SsaProgram:
    """
    루프와 분기가 없는 코어 명령을 SSA 로 바꿉니다.
    한 번만 대입되고 입력과 겹치지 않는 변수는 이름을 유지하고,
    나머지는 x1, x2, ... 처럼 버전을 붙입니다.

    Args:
        cmd: 코어 명령
        inputs: 외부에서 정의된 입력 이름 (None 이면 자유 변수를 모두 입력으로 간주)

    Returns:
        SsaProgram
    """
    assigns = _flatten(cmd)
    known = None if inputs is None else list(inputs)
    counts: Dict[str, int] = {}
    for a in assigns:
        counts[a.var] = counts.get(a.var, 0) + 1

    reserved: Set[str] = set(counts) | set(known or ())
    for a in assigns:
        reserved |= free_vars(a.expr)

    current: Dict[str, str] = {}
    versions: Dict[str, int] = {}
    free: List[str] = []
    defs: List[Definition] = []

    def fresh(name: str) -> str:
        base = _sanitize(name)
        if counts[name] == 1 and base == name and name not in free:
            return name
        sep = '_' if base[-1].isdigit() else ''
        while True:
            versions[name] = versions.get(name, 0) + 1
            candidate = f"{base}{sep}{versions[name]}"
            if candidate not in reserved:
                reserved.add(candidate)
                return candidate

    for a in assigns:
        for name in sorted(free_vars(a.expr)):
            if name in current or name in free:
                continue
            if known is not None and name not in known:
                raise SsaError(f"정의되기 전에 사용된 변수: {name}")
            free.append(name)
        if known is not None and a.var in known and a.var not in free:
            free.append(a.var)
        expr = rename_expr(a.expr, current)
        current[a.var] = fresh(a.var)
        defs.append(Definition(current[a.var], expr, a.var, a.pos))

    ordered = free + [n for n in (known or ()) if n not in free]
    return SsaProgram(tuple(defs), tuple(ordered), tuple(current.items()))
