"""토이 RLWE 스킴과 TFHE 시뮬레이터 테스트"""
from fractions import Fraction

import numpy as np
import pytest

import refscheme
from refscheme import (
    DegreeError, LevelMismatchError, TfheKind, centered, ceil_sqrt, decode, decrypt, encode, encrypt,
    eval_noise, eval_noise_l1, fresh_noise_bound, hom_add, hom_modswitch, hom_mul, keygen, poly_mul,
    relinearize,
)
from schemes import BgvParams, make_estimator, next_modulus


class _TFHE_PARAMS:
    t, fresh_noise = 16, 1024


def _params(t=16, d=8, bits=(30, 50, 70)):
    return BgvParams(t=t, d=d, moduli=tuple(next_modulus(b, t) for b in bits))


def test_centered_range():
    assert centered(7, 16) == 7
    assert centered(8, 16) == -8
    assert centered(-9, 16) == 7
    assert centered(2, 5) == 2
    assert centered(3, 5) == -2


def test_ceil_sqrt():
    assert [ceil_sqrt(n) for n in (0, 1, 2, 4, 5, 9, 10)] == [0, 1, 2, 2, 3, 3, 4]


def test_poly_mul_is_negacyclic():
    d = 4
    x = np.array([0, 1, 0, 0], dtype=object)
    x3 = np.array([0, 0, 0, 1], dtype=object)
    # x · x^3 = x^4 = -1
    assert list(poly_mul(x, x3, d)) == [-1, 0, 0, 0]


def test_fresh_noise_bound_matches_formula():
    # t//2 + 2·t·d·ceil_sqrt((η(d+1)+1)//2)
    assert fresh_noise_bound(16, 16, 1) == 8 + 2 * 16 * 16 * 3
    assert fresh_noise_bound(16, 8, 1) == 8 + 2 * 16 * 8 * 3


def test_keygen_is_deterministic():
    params = _params()
    assert keygen(params, 3).sk == keygen(params, 3).sk


@pytest.mark.parametrize('message', [-8, -1, 0, 1, 5, 7])
def test_encrypt_decrypt(message):
    params = _params()
    keys = keygen(params, 1)
    ct = encrypt(keys, encode(message, params.t, params.d), rng=np.random.default_rng(message + 100))
    assert ct.level == params.top_level
    assert decode(decrypt(keys, ct)) == message


def test_fresh_noise_within_bound():
    params = _params()
    keys = keygen(params, 2)
    rng = np.random.default_rng(5)
    for _ in range(50):
        ct = encrypt(keys, encode(int(rng.integers(-8, 8)), params.t, params.d), rng=rng)
        assert eval_noise_l1(keys, ct) <= params.fresh_noise
        assert eval_noise(keys, ct) <= eval_noise_l1(keys, ct)


def test_add_and_mul_with_relinearization():
    params = _params()
    keys = keygen(params, 4)
    rng = np.random.default_rng(9)
    a = encrypt(keys, encode(3, params.t, params.d), rng=rng)
    b = encrypt(keys, encode(-2, params.t, params.d), rng=rng)
    assert decode(decrypt(keys, hom_add(a, b))) == 1

    product = hom_mul(a, b)
    assert product.degree == 3
    relin = relinearize(keys, product)
    assert relin.degree == 2
    assert decode(decrypt(keys, relin)) == -6
    # 잡음 없는 평가 키이므로 재선형화는 잡음을 바꾸지 않습니다
    assert eval_noise_l1(keys, relin) == eval_noise_l1(keys, product)
    assert eval_noise_l1(keys, relin) <= eval_noise_l1(keys, a) * eval_noise_l1(keys, b)


def test_hom_mul_rejects_degree_three():
    params = _params()
    keys = keygen(params, 4)
    a = encrypt(keys, encode(1, params.t, params.d))
    with pytest.raises(DegreeError):
        hom_mul(hom_mul(a, a), a)


def test_level_mismatch():
    params = _params()
    keys = keygen(params, 4)
    top = encrypt(keys, encode(1, params.t, params.d))
    low = encrypt(keys, encode(1, params.t, params.d), level=0)
    with pytest.raises(LevelMismatchError):
        hom_add(top, low)


def test_modswitch_preserves_message_and_bounds_noise():
    params = _params()
    keys = keygen(params, 6)
    rng = np.random.default_rng(11)
    for message in (-7, 0, 3):
        ct = encrypt(keys, encode(message, params.t, params.d), rng=rng)
        switched = hom_modswitch(ct, params)
        assert switched.level == ct.level - 1
        assert switched.q == params.moduli[ct.level - 1]
        assert decode(decrypt(keys, switched)) == message
        ratio = Fraction(params.moduli[ct.level - 1], params.moduli[ct.level])
        assert eval_noise_l1(keys, switched) <= ratio * eval_noise_l1(keys, ct) + params.default_rounding


def test_modswitch_at_level_zero_raises():
    params = _params()
    keys = keygen(params, 6)
    ct = encrypt(keys, encode(1, params.t, params.d), level=0)
    with pytest.raises(LevelMismatchError):
        hom_modswitch(ct, params)


def test_tfhe_sim_add_and_wrap():
    est = make_estimator('worst_case', {'eps_b': 1024})
    rng = np.random.default_rng(0)
    a = refscheme.tfhe_encrypt(7, TfheKind.LWE, _TFHE_PARAMS, rng)
    b = refscheme.tfhe_encrypt(1, TfheKind.LWE, _TFHE_PARAMS, rng)
    total = refscheme.tfhe_sim_eval('add', [a, b], est)
    assert total.value == 8
    assert total.wrapped
    assert total.decrypted == -8
    assert total.noise == a.noise + b.noise


def test_tfhe_sim_pbs_resets_noise_and_checks_kind():
    est = make_estimator('worst_case', {'eps_b': 64})
    rng = np.random.default_rng(0)
    lut = refscheme.tfhe_encrypt(0, TfheKind.RGSW, _TFHE_PARAMS, rng)
    x = refscheme.tfhe_encrypt(3, TfheKind.LWE, _TFHE_PARAMS, rng)
    out = refscheme.tfhe_sim_eval('pbs', [lut, x], est)
    assert out.kind == TfheKind.LWE and out.value == 3 and out.noise == 64
    with pytest.raises(refscheme.KindMismatchError):
        refscheme.tfhe_sim_eval('pbs', [x, x], est)


@pytest.mark.parametrize('selector, expected', [(0, 2), (1, 5)])
def test_tfhe_sim_cmux_selects_through_difference(selector, expected):
    est = make_estimator('worst_case', {'eps_b': 64})
    rng = np.random.default_rng(0)
    sel = refscheme.tfhe_encrypt(selector, TfheKind.RGSW, _TFHE_PARAMS, rng)
    x1 = refscheme.tfhe_encrypt(5, TfheKind.RLWE, _TFHE_PARAMS, rng)
    x0 = refscheme.tfhe_encrypt(2, TfheKind.RLWE, _TFHE_PARAMS, rng)
    out = refscheme.tfhe_sim_eval('cmux', [sel, x1, x0], est)
    assert out.kind == TfheKind.RLWE
    assert out.value == expected
    assert out.noise == sel.noise * (x1.noise + x0.noise) + x0.noise
    with pytest.raises(refscheme.KindMismatchError):
        refscheme.tfhe_sim_eval('cmux', [sel, sel, x0], est)
