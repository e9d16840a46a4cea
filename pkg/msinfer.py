"""
모듈러스 전환 추론 모듈
SSA 프로그램에서 잡음 초과로 거부된 정의를 찾아 곱셈 깊이 트리(MD tree)를 만들고,
양의 곱셈 깊이가 가장 작은 노드의 부모 피연산자에 modswitch 를 넣습니다.
바뀐 레벨은 MSLevel 로 이후 정의에 전파하고, 매 단계 타입 검사기로 검증합니다.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from ir import (
    Const, CoreCmd, CoreExpr, CoreProgram, Definition, If, Op, Skip, SsaProgram, Var,
    count_ops, format_core_expr, seq, statements, to_ssa,
)
from model_core import IlaError, SchemeModel, Sort, UnknownOperatorError
from typecheck import Diagnosis, TypingContext, initial_context, merge_contexts, type_cmd, type_expr

logger = logging.getLogger(__name__)

MULTIPLICATIVE_OPS = {'mul', 'intprod', 'extprod'}
MODSWITCH = 'modswitch'

DefList = Dict[str, CoreExpr]


class InferenceFailure(IlaError):
    """전환 배치가 타입 검사를 통과하지 못함. attempt 는 마지막으로 시도한 프로그램"""

    def __init__(self, message: str, attempt: Optional[SsaProgram] = None,
                 rewrites: Optional[List['Rewrite']] = None, diagnosis: Optional[Diagnosis] = None):
        super().__init__(message)
        self.attempt = attempt
        self.rewrites = rewrites or []
        self.diagnosis = diagnosis


@dataclass(frozen=True)
class Rewrite:
    """정의 하나의 변경 기록 (kind: switch 또는 level)"""
    var: str
    kind: str
    before: CoreExpr
    after: CoreExpr
    inserted: int

    def to_dict(self) -> Dict:
        return {
            'var': self.var,
            'kind': self.kind,
            'before': format_core_expr(self.before)[0],
            'after': format_core_expr(self.after)[0],
            'inserted': self.inserted,
        }


@dataclass
class InferenceResult:
    program: SsaProgram
    rewrites: List[Rewrite]
    context: TypingContext
    rounds: int = 0

    @property
    def inserted(self) -> int:
        return sum(r.inserted for r in self.rewrites)

    @property
    def changed(self) -> bool:
        return bool(self.rewrites)


# ========== 정의 목록과 정렬 ==========

def build_deflist(program: SsaProgram) -> DefList:
    """SSA 정의를 순서대로 담은 변수 → 식 사전"""
    return {d.var: d.expr for d in program.definitions}


def infer_sorts(defs: DefList, gamma0: TypingContext, model: SchemeModel) -> Dict[str, Sort]:
    """
    경계 검사 없이 시그니처만으로 각 변수의 정렬을 구합니다.
    잡음 초과로 거부된 프로그램도 끝까지 정렬을 알 수 있어야 MD 트리를 만들 수 있습니다.
    """
    sorts = {name: ty.sort for name, ty in gamma0.items()}

    def sort_of(expr: CoreExpr) -> Optional[Sort]:
        if isinstance(expr, Var):
            return sorts.get(expr.name)
        if isinstance(expr, Const):
            return expr.sort
        try:
            op = model.operator(expr.name)
        except UnknownOperatorError:
            return None
        args = [sort_of(a) for a in expr.args]
        if any(s is None for s in args):
            return None
        return op.result_sort(args)

    for var, expr in defs.items():
        sort = sort_of(expr)
        if sort is not None:
            sorts[var] = sort
    return sorts


# ========== 곱셈 피연산자 ==========

def _is_cipher(name: str, sorts: Optional[Dict[str, Sort]]) -> bool:
    return sorts is None or sorts.get(name) == Sort.CIPHER


def _mulop_sites(expr: CoreExpr, site: str, defs: DefList, sorts: Optional[Dict[str, Sort]],
                 multiplicative: bool, seen: Set[str]) -> List[Tuple[str, str]]:
    """(피연산자 변수, 그 변수가 곱셈 피연산자로 직접 나타나는 정의) 쌍"""
    if isinstance(expr, Const):
        return []
    if isinstance(expr, Var):
        if not _is_cipher(expr.name, sorts):
            return []
        if multiplicative:
            return [(expr.name, site)]
        # 덧셈 피연산자는 정의를 따라 펼칩니다
        if expr.name not in defs or expr.name in seen:
            return []
        return _mulop_sites(defs[expr.name], expr.name, defs, sorts, False, seen | {expr.name})
    inner = multiplicative or expr.name in MULTIPLICATIVE_OPS
    pairs = []
    for arg in expr.args:
        pairs.extend(_mulop_sites(arg, site, defs, sorts, inner, seen))
    return pairs


def _dedupe(pairs: Sequence[Tuple[str, str]]) -> List[Tuple[str, str]]:
    out, names = [], set()
    for name, site in pairs:
        if name not in names:
            names.add(name)
            out.append((name, site))
    return out


def mulops(expr: CoreExpr, defs: DefList, sorts: Optional[Dict[str, Sort]] = None,
           site: Optional[str] = None) -> List[str]:
    """
    식에서 곱셈 피연산자로 쓰이는 암호문 변수 목록 (중복 없음, 등장 순서).
    덧셈 피연산자는 정의를 따라 재귀적으로 펼치고, 평문/메시지 피연산자는 뺍니다.

    Args:
        expr: 코어 식
        defs: 정의 목록
        sorts: 변수 정렬 (None 이면 모든 변수를 암호문으로 간주)
        site: expr 를 정의하는 변수 이름

    Returns:
        변수 이름 목록
    """
    return [name for name, _ in _dedupe(_mulop_sites(expr, site or '', defs, sorts, False, set()))]


# ========== MD 트리 ==========

@dataclass(eq=False)
class MDTree:
    """
    곱셈 깊이 트리의 노드. 같은 변수의 노드는 공유하므로 실제로는 DAG 입니다.
    sites[i] 는 children[i] 가 곱셈 피연산자로 직접 쓰인 정의입니다.
    """
    var: str
    children: List['MDTree'] = field(default_factory=list)
    sites: List[str] = field(default_factory=list)
    depth: int = 0

    def walk(self) -> Iterator[Tuple['MDTree', Optional['MDTree'], Optional[str]]]:
        """전위 순회 (노드, 부모, 자리), 각 (노드, 자리) 쌍은 한 번만"""
        stack: List[Tuple[MDTree, Optional[MDTree], Optional[str]]] = [(self, None, None)]
        seen_nodes: Set[str] = set()
        seen_edges: Set[Tuple[str, Optional[str]]] = set()
        while stack:
            node, parent, site = stack.pop()
            if (node.var, site) in seen_edges:
                continue
            seen_edges.add((node.var, site))
            yield node, parent, site
            if node.var in seen_nodes:
                continue
            seen_nodes.add(node.var)
            for child, child_site in reversed(list(zip(node.children, node.sites))):
                stack.append((child, node, child_site))

    def leaves(self) -> List[str]:
        return sorted({node.var for node, _, _ in self.walk() if not node.children})

    def to_dict(self) -> Dict:
        return {'var': self.var, 'depth': self.depth, 'children': [c.to_dict() for c in self.children]}


def build_mdtree(node: str, defs: DefList, sorts: Optional[Dict[str, Sort]] = None) -> MDTree:
    """
    node 를 뿌리로 하는 MD 트리를 만듭니다.
    깊이는 뿌리에서 잎까지의 최대 거리이며, 곱셈 피연산자가 없는 정의와 입력은 깊이 0 인 잎입니다.
    """
    memo: Dict[str, MDTree] = {}

    def build(var: str) -> MDTree:
        if var in memo:
            return memo[var]
        tree = MDTree(var)
        memo[var] = tree
        if var in defs:
            for child_var, site in _dedupe(_mulop_sites(defs[var], var, defs, sorts, False, {var})):
                child = build(child_var)
                tree.children.append(child)
                tree.sites.append(site)
        tree.depth = 1 + max(c.depth for c in tree.children) if tree.children else 0
        return tree

    return build(node)


# ========== 레벨 맞추기 ==========

def _wrap(expr: CoreExpr, times: int) -> CoreExpr:
    for _ in range(times):
        expr = Op(MODSWITCH, (expr,))
    return expr


def _equalize(expr: CoreExpr, env: Dict, model: SchemeModel) -> Tuple[CoreExpr, Optional[int]]:
    if isinstance(expr, Var):
        ty = env.get(expr.name)
        if ty is None or ty.sort != Sort.CIPHER:
            return expr, None
        return expr, model.level_of(ty.bound)
    if isinstance(expr, Const):
        return expr, None
    parts = [_equalize(a, env, model) for a in expr.args]
    levels = [lvl for _, lvl in parts if lvl is not None]
    if expr.name == MODSWITCH:
        inner, lvl = parts[0]
        return Op(MODSWITCH, (inner,)), None if lvl is None else lvl - 1
    if not levels:
        return Op(expr.name, tuple(p for p, _ in parts)), None
    target = min(levels)
    args = tuple(_wrap(p, lvl - target) if lvl is not None else p for p, lvl in parts)
    return Op(expr.name, args), target


def mslevel(var: str, rhs: CoreExpr, env, model: SchemeModel) -> CoreExpr:
    """
    정의의 모든 암호문 피연산자를 그 중 최소 레벨에 맞춥니다.
    높은 레벨 피연산자를 필요한 만큼 modswitch 로 감쌉니다.

    Args:
        var: 정의되는 변수 (오류 메시지용)
        rhs: 정의 식
        env: 피연산자 타입이 들어 있는 컨텍스트
        model: 스킴 모델

    Returns:
        레벨을 맞춘 식
    """
    env = env.as_dict() if isinstance(env, TypingContext) else env
    rewritten, level = _equalize(rhs, env, model)
    if level is not None and level < 0:
        raise InferenceFailure(f"{var}: 필요한 레벨이 0 보다 낮습니다 (chain exhausted)")
    return rewritten


# ========== 추론 ==========

def _replace_var(expr: CoreExpr, name: str) -> Tuple[CoreExpr, int]:
    """곱셈 위치의 name 을 modswitch(name) 으로 바꿉니다."""
    def go(e: CoreExpr, multiplicative: bool) -> Tuple[CoreExpr, int]:
        if isinstance(e, Var):
            if multiplicative and e.name == name:
                return Op(MODSWITCH, (e,)), 1
            return e, 0
        if isinstance(e, Const):
            return e, 0
        inner = multiplicative or e.name in MULTIPLICATIVE_OPS
        count, args = 0, []
        for a in e.args:
            new, n = go(a, inner)
            args.append(new)
            count += n
        return Op(e.name, tuple(args)), count

    return go(expr, False)


def _count_switches(expr: CoreExpr) -> int:
    return count_ops(expr, MODSWITCH)


class _Inference:
    """한 SSA 프로그램에 대한 반복 추론 상태"""

    def __init__(self, program: SsaProgram, gamma0: TypingContext, model: SchemeModel):
        self.model = model
        self.gamma0 = gamma0
        self.definitions = list(program.definitions)
        self.program = program
        self.rewrites: List[Rewrite] = []
        self.applied: Set[Tuple[str, str]] = set()
        self.index = {d.var: i for i, d in enumerate(self.definitions)}
        chain = len(getattr(model.params, 'moduli', ()))
        mults = sum(count_ops(d.expr, op) for d in self.definitions for op in MULTIPLICATIVE_OPS)
        self.limit = chain * mults

    def current(self) -> SsaProgram:
        return SsaProgram(tuple(self.definitions), self.program.inputs, self.program.final)

    def fail(self, message: str, diagnosis: Optional[Diagnosis] = None) -> InferenceFailure:
        logger.debug(f"추론 실패: {message}")
        return InferenceFailure(message, self.current(), list(self.rewrites), diagnosis)

    def propagate(self) -> Tuple[Optional[Diagnosis], Dict]:
        """모든 정의에 MSLevel 을 적용하며 처음부터 다시 검사합니다."""
        env = self.gamma0.as_dict()
        for i, d in enumerate(self.definitions):
            rhs = mslevel(d.var, d.expr, env, self.model)
            if rhs != d.expr:
                added = _count_switches(rhs) - _count_switches(d.expr)
                self.rewrites.append(Rewrite(d.var, 'level', d.expr, rhs, added))
                self.definitions[i] = Definition(d.var, rhs, d.origin, d.pos)
            ty = type_expr(self.model, env, rhs)
            if isinstance(ty, Diagnosis):
                return ty.at(d.var, d.pos, i), env
            env[d.var] = ty
        return None, env

    def candidates(self, root: str) -> List[Tuple[MDTree, str]]:
        defs = {d.var: d.expr for d in self.definitions}
        sorts = infer_sorts(defs, self.gamma0, self.model)
        tree = build_mdtree(root, defs, sorts)
        found = []
        for node, parent, site in tree.walk():
            if parent is None or node.depth <= 0 or (node.var, site) in self.applied:
                continue
            found.append((node, site))
        found.sort(key=lambda pair: (pair[0].depth, self.index.get(pair[0].var, -1), self.index.get(pair[1], -1)))
        return found

    def switch(self, node: MDTree, site: str) -> int:
        i = self.index[site]
        d = self.definitions[i]
        rhs, count = _replace_var(d.expr, node.var)
        self.applied.add((node.var, site))
        if count:
            self.definitions[i] = Definition(d.var, rhs, d.origin, d.pos)
            self.rewrites.append(Rewrite(d.var, 'switch', d.expr, rhs, count))
            logger.debug(f"{site}: {node.var} (깊이 {node.depth}) 피연산자에 modswitch 삽입")
        return i

    def run(self) -> InferenceResult:
        diagnosis, env = self.propagate()
        rounds = 0
        while diagnosis is not None:
            if diagnosis.kind == 'level':
                raise self.fail(f"모듈러스 체인이 소진되었습니다 (chain exhausted): {diagnosis.describe()}", diagnosis)
            if diagnosis.kind != 'noise' or diagnosis.var not in self.index:
                raise self.fail(f"모듈러스 전환으로 고칠 수 없는 거부입니다: {diagnosis.describe()}", diagnosis)
            choices = self.candidates(diagnosis.var)
            if not choices:
                raise self.fail(f"{diagnosis.var}: 전환할 곱셈 깊이 노드가 남아 있지 않습니다", diagnosis)
            node, site = choices[0]
            site_index = self.switch(node, site)
            rounds += 1
            diagnosis, env = self.propagate()
            inserted = sum(r.inserted for r in self.rewrites)
            if self.limit and inserted > self.limit:
                raise self.fail(f"삽입한 전환 수 {inserted} 가 한도 {self.limit} 를 넘었습니다", diagnosis)
            if diagnosis is not None and diagnosis.index is not None and diagnosis.index <= site_index:
                if diagnosis.kind == 'level':
                    raise self.fail(f"모듈러스 체인이 소진되었습니다 (chain exhausted): {diagnosis.describe()}", diagnosis)
                raise self.fail(f"{site}: 전환을 넣은 정의가 타입 검사를 통과하지 못했습니다", diagnosis)
        return InferenceResult(self.current(), list(self.rewrites), TypingContext(env), rounds)


def infer_modswitch(program: SsaProgram, gamma0: TypingContext, model: SchemeModel) -> InferenceResult:
    """
    거부된 SSA 프로그램에 modswitch 를 넣어 타입 검사를 통과하게 만듭니다.
    이미 통과하는 프로그램은 그대로 돌려줍니다.

    Args:
        program: 루프와 분기가 없는 SSA 프로그램
        gamma0: 입력 컨텍스트
        model: modswitch 를 지원하는 스킴 모델 (BGV)

    Returns:
        InferenceResult

    Raises:
        InferenceFailure: 체인 소진, 후보 소진, 재검사 실패
    """
    try:
        model.operator(MODSWITCH)
    except UnknownOperatorError:
        raise InferenceFailure(f"{type(model).__name__} 모델에는 modswitch 연산자가 없습니다", program)
    return _Inference(program, gamma0, model).run()


# ========== 분기 포함 명령 ==========

def _segments(cmd: CoreCmd) -> List[CoreCmd]:
    """최상위 문장을 직선 구간과 if 문으로 나눕니다."""
    out: List[CoreCmd] = []
    run: List[CoreCmd] = []
    for stmt in statements(cmd):
        if isinstance(stmt, If):
            if run:
                out.append(seq(*run))
                run = []
            out.append(stmt)
        elif not isinstance(stmt, Skip):
            run.append(stmt)
    if run:
        out.append(seq(*run))
    return out


def infer_cmd(model: SchemeModel, ctx: TypingContext, cmd: CoreCmd) -> Tuple[CoreCmd, List[Rewrite], TypingContext]:
    """
    분기가 있을 수 있는 명령에 대해 구간별, 분기별로 추론합니다.
    분기 조건을 넘나드는 배치는 하지 않습니다.
    """
    rewrites: List[Rewrite] = []
    out: List[CoreCmd] = []
    for segment in _segments(cmd):
        if isinstance(segment, If):
            then_cmd, then_log, then_ctx = infer_cmd(model, ctx, segment.then)
            else_cmd, else_log, else_ctx = infer_cmd(model, ctx, segment.orelse)
            rewrites.extend(then_log + else_log)
            out.append(If(segment.cond, then_cmd, else_cmd, segment.pos))
            ctx = merge_contexts(then_ctx, else_ctx)
            continue
        ssa = to_ssa(segment, list(ctx))
        result = infer_modswitch(ssa, ctx, model)
        rewrites.extend(result.rewrites)
        rewritten = result.program.to_cmd()
        out.append(rewritten)
        checked = type_cmd(model, ctx, rewritten)
        if isinstance(checked, Diagnosis):
            raise InferenceFailure(f"변환된 구간이 타입 검사를 통과하지 못했습니다: {checked.describe()}",
                                   result.program, rewrites, checked)
        ctx = checked
    return seq(*out), rewrites, ctx


def infer_program(model: SchemeModel, program: CoreProgram) -> Tuple[CoreProgram, List[Rewrite], TypingContext]:
    """입력 선언이 있는 코어 프로그램 전체에 대한 추론 드라이버"""
    ctx = initial_context(model, program.inputs)
    if isinstance(ctx, Diagnosis):
        raise InferenceFailure(f"입력 선언이 거부되었습니다: {ctx.describe()}", diagnosis=ctx)
    body, rewrites, final = infer_cmd(model, ctx, program.body)
    return CoreProgram(program.inputs, body), rewrites, final


def switch_count(program: SsaProgram) -> int:
    return sum(_count_switches(d.expr) for d in program.definitions)


def level_report(model: SchemeModel, ctx: TypingContext, names: Optional[Sequence[str]] = None) -> Dict[str, Optional[int]]:
    """변수별 최종 레벨"""
    keys = names if names is not None else list(ctx)
    return {name: model.level_of(ctx[name].bound) for name in keys if name in ctx}
