"""
토이 RLWE 스킴 모듈 (INSECURE - 보안성 없음)
Z_q[x]/(x^d+1) 위의 교과서식 BGV 스킴, 비밀키 잡음 오라클,
그리고 TFHE 값/잡음 시뮬레이터를 제공합니다.
"""
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from math import isqrt
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from model_core import IlaError

INSECURE = True  # 모든 인터페이스에 표시되는 경고 플래그


class LevelMismatchError(IlaError):
    """레벨이 다른 암호문 연산 또는 모듈러스 체인 소진"""


class DegreeError(IlaError):
    """허용되지 않는 암호문 차수"""


class KindMismatchError(IlaError):
    """TFHE 암호문 종류(id) 규칙 위반"""


def centered(x: int, q: int) -> int:
    """정수를 중심 대표값으로 환원합니다."""
    return (x + q // 2) % q - q // 2


def centered_array(arr: np.ndarray, q: int) -> np.ndarray:
    return (arr + q // 2) % q - q // 2


def ceil_sqrt(n: int) -> int:
    return 0 if n <= 0 else isqrt(n - 1) + 1


def poly_mul(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    """x^d+1 로 환원하는 음순환 다항식 곱 (정확한 정수 연산)"""
    acc = np.zeros(2 * d, dtype=object)
    for i in range(d):
        if a[i]:
            acc[i:i + d] += a[i] * b
    return acc[:d] - acc[d:]


def _as_object_array(values) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = [int(v) for v in values]
    return arr


class RingElem:
    """Z_q[x]/(x^d+1) 의 원소 (계수는 중심 대표값)"""
    __slots__ = ('coeffs', 'q')

    def __init__(self, coeffs, q: int):
        arr = coeffs if isinstance(coeffs, np.ndarray) and coeffs.dtype == object else _as_object_array(coeffs)
        self.coeffs = centered_array(arr, q)
        self.q = q

    @classmethod
    def zero(cls, d: int, q: int) -> 'RingElem':
        return cls(np.zeros(d, dtype=object), q)

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def _check(self, other: 'RingElem'):
        if self.q != other.q or self.d != other.d:
            raise ValueError(f"다른 환의 원소끼리 연산할 수 없습니다: q={self.q} vs q={other.q}")

    def __add__(self, other: 'RingElem') -> 'RingElem':
        self._check(other)
        return RingElem(self.coeffs + other.coeffs, self.q)

    def __sub__(self, other: 'RingElem') -> 'RingElem':
        self._check(other)
        return RingElem(self.coeffs - other.coeffs, self.q)

    def __neg__(self) -> 'RingElem':
        return RingElem(-self.coeffs, self.q)

    def __mul__(self, other) -> 'RingElem':
        if isinstance(other, RingElem):
            self._check(other)
            return RingElem(poly_mul(self.coeffs, other.coeffs, self.d), self.q)
        return RingElem(self.coeffs * int(other), self.q)

    __rmul__ = __mul__

    def mod(self, q: int) -> 'RingElem':
        """같은 중심 대표값을 다른 모듈러스로 옮깁니다 (작은 원소용)."""
        return RingElem(self.coeffs.copy(), q)

    def norm_inf(self) -> int:
        return max(abs(int(c)) for c in self.coeffs)

    def norm_l1(self) -> int:
        return sum(abs(int(c)) for c in self.coeffs)

    def tolist(self) -> List[int]:
        return [int(c) for c in self.coeffs]

    def __eq__(self, other) -> bool:
        return isinstance(other, RingElem) and self.q == other.q and self.tolist() == other.tolist()

    def __repr__(self) -> str:
        return f"RingElem(q={self.q}, coeffs={self.tolist()})"


@dataclass(frozen=True)
class Plaintext:
    """평문: Z_t[x]/(x^d+1) 의 원소. 메시지 스칼라는 상수항에 인코딩됩니다."""
    poly: RingElem

    @property
    def t(self) -> int:
        return self.poly.q


def encode(message: int, t: int, d: int) -> Plaintext:
    coeffs = [0] * d
    coeffs[0] = message
    return Plaintext(RingElem(coeffs, t))


def decode(plaintext: Plaintext) -> int:
    return int(plaintext.poly.coeffs[0])


@dataclass(frozen=True)
class ToyCiphertext:
    """레벨 ω 의 모듈러스 q_ω 위 다항식 튜플 (길이 2 또는 3)"""
    parts: Tuple[RingElem, ...]
    level: int

    @property
    def q(self) -> int:
        return self.parts[0].q

    @property
    def degree(self) -> int:
        return len(self.parts)


@dataclass(frozen=True)
class KeyMaterial:
    """
    토이 키 묶음 (INSECURE).
    평가 키는 잡음이 없는 가젯 키이므로 재선형화가 정확합니다.
    """
    params: Any
    sk: RingElem
    pk: Tuple[Tuple[RingElem, RingElem], ...]
    evk: Tuple[Tuple[Tuple[RingElem, RingElem], ...], ...]
    seed: int
    error_width: int

    def secret_at(self, q: int) -> RingElem:
        return self.sk.mod(q)

    def to_debug_dict(self) -> dict:
        """디버그용 JSON 내보내기 (INSECURE: 비밀키 포함)"""
        return {
            'insecure': True,
            'seed': self.seed,
            'sk': self.sk.tolist(),
            'pk': [[b.tolist(), a.tolist()] for b, a in self.pk],
        }


def sample_cbd(rng: np.random.Generator, d: int, eta: int) -> List[int]:
    """중심 이항분포 표본"""
    return [int(x) - eta for x in rng.binomial(2 * eta, 0.5, size=d)]


def sample_uniform(rng: np.random.Generator, d: int, q: int) -> List[int]:
    """[0, q) 균등 표본 (64비트를 넘는 q 지원)"""
    nwords = q.bit_length() // 32 + 3
    words = rng.integers(0, 2 ** 32, size=(d, nwords), dtype=np.uint64)
    coeffs = []
    for row in words:
        value = 0
        for w in row:
            value = (value << 32) | int(w)
        coeffs.append(value % q)
    return coeffs


def gadget_digits(q: int, base_bits: int) -> int:
    return -(-q.bit_length() // base_bits)


def fresh_noise_bound(t: int, d: int, eta: int) -> int:
    """
    새 암호문 잔차의 ℓ1 노름 상한 ε_fresh.
    잔차 계수의 분산 η(d+1)/2 에 대해 d·2σ 를 사용합니다.
    """
    variance = (eta * (d + 1) + 1) // 2
    return t // 2 + 2 * t * d * ceil_sqrt(variance)


def keygen(params, seed: int) -> KeyMaterial:
    """
    키를 생성합니다. 같은 시드는 같은 키를 만듭니다.

    Args:
        params: t, d, moduli, error_width, relin_base_bits 를 가진 매개변수
        seed: 난수 시드

    Returns:
        KeyMaterial
    """
    rng = np.random.default_rng(seed)
    d, t = params.d, params.t
    eta = params.error_width
    top = params.moduli[-1]
    sk = RingElem(sample_cbd(rng, d, 1), top)

    pk = []
    evk = []
    for q in params.moduli:
        s = sk.mod(q)
        a = RingElem(sample_uniform(rng, d, q), q)
        e = RingElem(sample_cbd(rng, d, eta), q)
        pk.append((-(a * s) + e * t, a))

        s2 = s * s
        level_keys = []
        base = 1 << params.relin_base_bits
        for i in range(gadget_digits(q, params.relin_base_bits)):
            ai = RingElem(sample_uniform(rng, d, q), q)
            level_keys.append((-(ai * s) + s2 * pow(base, i, q), ai))
        evk.append(tuple(level_keys))

    return KeyMaterial(params=params, sk=sk, pk=tuple(pk), evk=tuple(evk), seed=seed, error_width=eta)


def _lift_plain(plaintext: Plaintext, q: int) -> RingElem:
    return RingElem(plaintext.poly.coeffs.copy(), q)


def encrypt(keys: KeyMaterial, plaintext: Plaintext, level: Optional[int] = None,
            rng: Optional[np.random.Generator] = None) -> ToyCiphertext:
    """
    공개키 암호화: c0 = b·u + t·e1 + m, c1 = a·u + t·e2

    Args:
        keys: 키 묶음 (공개키만 사용)
        plaintext: 평문
        level: 암호화 레벨 (기본값: 최상위)
        rng: 난수 생성기

    Returns:
        ToyCiphertext
    """
    params = keys.params
    level = len(params.moduli) - 1 if level is None else level
    rng = rng if rng is not None else np.random.default_rng(keys.seed + 1)
    q = params.moduli[level]
    d, t, eta = params.d, params.t, keys.error_width
    b, a = keys.pk[level]
    u = RingElem(sample_cbd(rng, d, 1), q)
    e1 = RingElem(sample_cbd(rng, d, eta), q)
    e2 = RingElem(sample_cbd(rng, d, eta), q)
    c0 = b * u + e1 * t + _lift_plain(plaintext, q)
    c1 = a * u + e2 * t
    return ToyCiphertext((c0, c1), level)


def decryption_residual(keys: KeyMaterial, ct: ToyCiphertext) -> RingElem:
    """c0 + c1·s + c2·s² (mod q_ω, 중심 대표값) = m + t·e"""
    s = keys.secret_at(ct.q)
    acc = ct.parts[0]
    power = s
    for part in ct.parts[1:]:
        acc = acc + part * power
        power = power * s
    return acc


def decrypt(keys: KeyMaterial, ct: ToyCiphertext) -> Plaintext:
    """복호화. 잡음이 q_ω/2 를 넘은 암호문은 의미 없는 값을 돌려줍니다."""
    residual = decryption_residual(keys, ct)
    return Plaintext(RingElem(residual.coeffs.copy(), keys.params.t))


def eval_noise(keys: KeyMaterial, ct: ToyCiphertext) -> Fraction:
    """복호화 잔차의 무한 노름"""
    return Fraction(decryption_residual(keys, ct).norm_inf())


def eval_noise_l1(keys: KeyMaterial, ct: ToyCiphertext) -> Fraction:
    """복호화 잔차의 ℓ1 노름 (암호문 경계 측정에 사용)"""
    return Fraction(decryption_residual(keys, ct).norm_l1())


def _check_levels(c1: ToyCiphertext, c2: ToyCiphertext):
    if c1.level != c2.level:
        raise LevelMismatchError(f"레벨이 다릅니다: {c1.level} vs {c2.level}")


def hom_add(c1: ToyCiphertext, c2: ToyCiphertext) -> ToyCiphertext:
    _check_levels(c1, c2)
    n = max(c1.degree, c2.degree)
    zero = RingElem.zero(c1.parts[0].d, c1.q)
    parts = []
    for i in range(n):
        a = c1.parts[i] if i < c1.degree else zero
        b = c2.parts[i] if i < c2.degree else zero
        parts.append(a + b)
    return ToyCiphertext(tuple(parts), c1.level)


def hom_add_plain(ct: ToyCiphertext, plaintext: Plaintext) -> ToyCiphertext:
    parts = list(ct.parts)
    parts[0] = parts[0] + _lift_plain(plaintext, ct.q)
    return ToyCiphertext(tuple(parts), ct.level)


def hom_mul(c1: ToyCiphertext, c2: ToyCiphertext) -> ToyCiphertext:
    """텐서곱. 차수 2 입력만 받아 차수 3 암호문을 만듭니다."""
    _check_levels(c1, c2)
    if c1.degree != 2 or c2.degree != 2:
        raise DegreeError("hom_mul 은 차수 2 암호문만 받습니다 (먼저 재선형화하세요)")
    a0, a1 = c1.parts
    b0, b1 = c2.parts
    return ToyCiphertext((a0 * b0, a0 * b1 + a1 * b0, a1 * b1), c1.level)


def relinearize(keys: KeyMaterial, ct: ToyCiphertext) -> ToyCiphertext:
    """가젯 분해(밑 2^w)로 차수 3 암호문을 차수 2 로 줄입니다."""
    if ct.degree == 2:
        return ct
    if ct.degree != 3:
        raise DegreeError(f"재선형화할 수 없는 차수: {ct.degree}")
    q = ct.q
    base_bits = keys.params.relin_base_bits
    mask = (1 << base_bits) - 1
    c0, c1, c2 = ct.parts
    remaining = c2.coeffs % q
    for b_i, a_i in keys.evk[ct.level]:
        digit = RingElem(remaining & mask, q)
        remaining = remaining >> base_bits
        c0 = c0 + digit * b_i
        c1 = c1 + digit * a_i
    return ToyCiphertext((c0, c1), ct.level)


def hom_mul_plain(ct: ToyCiphertext, plaintext: Plaintext) -> ToyCiphertext:
    p = _lift_plain(plaintext, ct.q)
    return ToyCiphertext(tuple(part * p for part in ct.parts), ct.level)


def hom_scalar(ct: ToyCiphertext, n: int) -> ToyCiphertext:
    return ToyCiphertext(tuple(part * n for part in ct.parts), ct.level)


def hom_modswitch(ct: ToyCiphertext, params) -> ToyCiphertext:
    """
    q_ω 에서 q_{ω-1} 로 모듈러스를 바꿉니다.
    각 계수를 q_{ω-1}/q_ω 배로 반올림한 뒤 t 로 나눈 나머지가 같아지도록 보정합니다.
    """
    if ct.level <= 0:
        raise LevelMismatchError("모듈러스 체인이 소진되었습니다 (chain exhausted)")
    q = params.moduli[ct.level]
    q_next = params.moduli[ct.level - 1]
    t = params.t
    parts = []
    for part in ct.parts:
        c = part.coeffs
        rounded = (2 * q_next * c + q) // (2 * q)
        correction = centered_array(c - rounded, t)
        parts.append(RingElem(rounded + correction, q_next))
    return ToyCiphertext(tuple(parts), ct.level - 1)


# TFHE 시뮬레이터

class TfheKind(IntEnum):
    """TFHE 암호문 종류 (LWE < RLWE < RGSW)"""
    LWE = 0
    RLWE = 1
    RGSW = 2


@dataclass(frozen=True)
class TfheSimCipher:
    """참 정수값과 잡음 카운터를 가진 시뮬레이션 암호문"""
    kind: TfheKind
    value: int
    noise: Fraction
    t: int

    @property
    def wrapped(self) -> bool:
        """값이 [-t/2, t/2) 를 벗어났는지 여부"""
        return not (Fraction(-self.t, 2) <= self.value < Fraction(self.t, 2))

    @property
    def decrypted(self) -> int:
        return centered(self.value, self.t)


def tfhe_encrypt(value: int, kind: TfheKind, params, rng: np.random.Generator) -> TfheSimCipher:
    noise = Fraction(int(rng.integers(1, params.fresh_noise + 1)))
    return TfheSimCipher(TfheKind(kind), int(value), noise, params.t)


def _require_kind(op: str, ct: TfheSimCipher, allowed: Sequence[TfheKind]):
    if not isinstance(ct, TfheSimCipher) or ct.kind not in allowed:
        got = ct.kind.name if isinstance(ct, TfheSimCipher) else type(ct).__name__
        raise KindMismatchError(f"{op}: 허용되지 않는 암호문 종류 {got}")


def tfhe_sim_eval(op: str, args: Sequence[Any], estimator) -> TfheSimCipher:
    """
    TFHE 연산 하나를 시뮬레이션합니다. 값은 참 정수로, 잡음은 추정기로 갱신합니다.

    Args:
        op: add, scalar, extprod, intprod, pbs, cmux 중 하나
        args: 인자 (TfheSimCipher, Plaintext, 또는 정수)
        estimator: add, f_prime, g_ext, g_prime, eps_b 를 가진 잡음 추정기

    Returns:
        TfheSimCipher
    """
    additive = (TfheKind.LWE, TfheKind.RLWE)
    if op == 'add':
        a, b = args
        if isinstance(a, Plaintext):
            a, b = b, a
        if isinstance(b, Plaintext):
            _require_kind(op, a, additive)
            return TfheSimCipher(a.kind, a.value + decode(b), a.noise, a.t)
        _require_kind(op, a, additive)
        _require_kind(op, b, additive)
        return TfheSimCipher(max(a.kind, b.kind), a.value + b.value, estimator.add(a.noise, b.noise), a.t)
    if op == 'scalar':
        n, ct = args
        return TfheSimCipher(ct.kind, n * ct.value, abs(n * ct.noise), ct.t)
    if op == 'intprod':
        a, b = args
        _require_kind(op, a, (TfheKind.RGSW,))
        _require_kind(op, b, (TfheKind.RGSW,))
        return TfheSimCipher(TfheKind.RGSW, a.value * b.value, estimator.f_prime(a.noise, b.noise), a.t)
    if op == 'extprod':
        g, ct = args
        _require_kind(op, g, (TfheKind.RGSW,))
        _require_kind(op, ct, additive)
        grow = estimator.g_ext if ct.kind == TfheKind.LWE else estimator.g_prime
        return TfheSimCipher(TfheKind.RLWE, g.value * ct.value, grow(g.noise, ct.noise), ct.t)
    if op == 'pbs':
        lut, ct = args
        _require_kind(op, lut, (TfheKind.RGSW,))
        _require_kind(op, ct, (TfheKind.LWE,))
        return TfheSimCipher(TfheKind.LWE, ct.decrypted, estimator.eps_b, ct.t)
    if op == 'cmux':
        sel, x1, x0 = args
        _require_kind(op, x1, additive)
        _require_kind(op, x0, additive)
        diff = TfheSimCipher(max(x1.kind, x0.kind), x1.value - x0.value,
                             estimator.add(x1.noise, x0.noise), x1.t)
        ext = tfhe_sim_eval('extprod', [sel, diff], estimator)
        return TfheSimCipher(TfheKind.RLWE, x0.value + ext.value, estimator.add(ext.noise, x0.noise), x0.t)
    raise KindMismatchError(f"알 수 없는 TFHE 연산: {op}")
