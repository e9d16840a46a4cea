"""경계 격자, 비교, 공리 검사 테스트"""
from fractions import Fraction

import pytest

from model_core import (
    IncomparableBoundsError, MsgBound, Ordering, PlainBound, SortMismatchError, bound_le,
    check_commutativity, check_downwards_closed, combine_orderings, compare_bounds, to_fraction,
)
from probes import mutated_model
from schemes import BgvCipherBound


def test_to_fraction_rejects_float():
    assert to_fraction('3/4') == Fraction(3, 4)
    with pytest.raises(TypeError):
        to_fraction(0.5)


def test_combine_orderings():
    assert combine_orderings([Ordering.EQ, Ordering.EQ]) == Ordering.EQ
    assert combine_orderings([Ordering.LE, Ordering.EQ]) == Ordering.LE
    assert combine_orderings([Ordering.LE, Ordering.GE]) == Ordering.INCOMPARABLE


def test_msg_bound_lattice():
    top = MsgBound()
    assert compare_bounds(MsgBound(3), top) == Ordering.LE
    assert compare_bounds(top, MsgBound(3)) == Ordering.GE
    assert compare_bounds(MsgBound(3), MsgBound(4)) == Ordering.INCOMPARABLE
    assert MsgBound(3).join(MsgBound(4)) == top
    assert MsgBound(3).join(MsgBound(3)) == MsgBound(3)


def test_cipher_bound_product_order():
    a = BgvCipherBound(0, 1, 10, 2)
    assert compare_bounds(a, BgvCipherBound(-1, 1, 20, 2)) == Ordering.LE
    assert compare_bounds(a, BgvCipherBound(0, 1, 5, 2)) == Ordering.GE
    assert compare_bounds(a, BgvCipherBound(0, 2, 5, 2)) == Ordering.INCOMPARABLE
    # 레벨이 다르면 비교할 수 없습니다
    assert compare_bounds(a, BgvCipherBound(-5, 5, 100, 1)) == Ordering.INCOMPARABLE
    assert a.join(BgvCipherBound(1, 3, 4, 2)) == BgvCipherBound(0, 3, 10, 2)
    assert a.join(BgvCipherBound(0, 1, 10, 1)) is None


def test_compare_different_sorts():
    with pytest.raises(SortMismatchError):
        compare_bounds(PlainBound(0, 1), MsgBound(1))
    assert not bound_le(PlainBound(0, 1), MsgBound(1))


def test_commutativity_holds_on_bgv(bgv_keyed, rng):
    add, mul = bgv_keyed.operator('add'), bgv_keyed.operator('mul')
    for _ in range(20):
        a = bgv_keyed.encrypt(int(rng.integers(-2, 3)), rng=rng)
        b = bgv_keyed.encrypt(int(rng.integers(-2, 3)), rng=rng)
        assert check_commutativity(bgv_keyed, add, [a, b])
        assert check_commutativity(bgv_keyed, mul, [a, b])
        assert check_commutativity(bgv_keyed, mul, [bgv_keyed.encode(3), a])


def test_commutativity_vacuous_when_undefined(bgv_keyed, rng):
    a = bgv_keyed.encrypt(7, rng=rng)
    verdict = check_commutativity(bgv_keyed, bgv_keyed.operator('add'), [a, a])
    assert verdict and verdict.reason == 'undefined'


def test_commutativity_sort_mismatch(bgv_keyed, rng):
    a = bgv_keyed.encrypt(1, rng=rng)
    with pytest.raises(SortMismatchError):
        check_commutativity(bgv_keyed, bgv_keyed.operator('modswitch'), [3])
    with pytest.raises(SortMismatchError):
        check_commutativity(bgv_keyed, bgv_keyed.operator('scalar'), [a, a])


def test_modswitch_commutes(bgv_keyed, rng):
    op = bgv_keyed.operator('modswitch')
    for m in (-5, 0, 6):
        verdict = check_commutativity(bgv_keyed, op, [bgv_keyed.encrypt(m, rng=rng)])
        assert verdict and verdict.reason == 'ok'


def test_downwards_closed(bgv_model):
    mul = bgv_model.operator('mul')
    top = bgv_model.params.top_level
    big = [BgvCipherBound(-2, 2, 1000, top), BgvCipherBound(-1, 3, 1000, top)]
    small = [BgvCipherBound(0, 1, 10, top), BgvCipherBound(1, 1, 500, top)]
    assert check_downwards_closed(bgv_model, mul, big, small)
    undefined = [BgvCipherBound(-7, 7, 1000, top), BgvCipherBound(-7, 7, 1000, top)]
    assert check_downwards_closed(bgv_model, mul, undefined, small).reason == 'undefined'
    with pytest.raises(IncomparableBoundsError):
        check_downwards_closed(bgv_model, mul, small, big)


def test_mutated_bounds_are_caught(bgv_keyed, rng):
    mutant = mutated_model(bgv_keyed, 'add')
    op = mutant.operator('add')
    failures = 0
    for _ in range(10):
        a = bgv_keyed.encrypt(1, rng=rng)
        b = bgv_keyed.encrypt(2, rng=rng)
        if not check_commutativity(mutant, op, [a, b]):
            failures += 1
    assert failures > 0
    # 원본 모델은 그대로입니다
    assert bgv_keyed.operator('add') is not op
