import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nil2.core import abelian_group, cyclic_group, exponent
from nil2.errors import PreconditionError
from nil2.variety import (
    BOTTOM,
    TOP,
    Variety,
    contains,
    div_or_zero,
    exponent_constants,
    free_nil2_group,
    is_valid_pair,
    join,
    leq,
    meet,
    minimal_variety,
    power_divisor_range,
    special_base_transfer,
    strong_base_transfer,
)

VALID = [(0, 0), (0, 5), (1, 1), (2, 1), (4, 2), (4, 1), (8, 4), (8, 2),
         (9, 9), (9, 3), (12, 6), (12, 3), (6, 3), (27, 27)]
INVALID = [(2, 2), (4, 4), (8, 8), (4, 0), (1, 0), (6, 6), (12, 4), (-1, 1), (2, -1)]


def test_div_or_zero():
    assert div_or_zero(0, 0)
    assert not div_or_zero(0, 4)
    assert div_or_zero(4, 0)
    assert div_or_zero(3, 12)
    assert not div_or_zero(5, 12)


@pytest.mark.parametrize("m,n", VALID)
def test_valid_pairs_construct(m, n):
    assert is_valid_pair(m, n)
    v = Variety(m, n)
    assert (v.m, v.n) == (m, n)


@pytest.mark.parametrize("m,n", INVALID)
def test_invalid_pairs_rejected(m, n):
    assert not is_valid_pair(m, n)
    with pytest.raises(PreconditionError):
        Variety(m, n)


def test_lattice_extremes():
    assert TOP.is_top()
    for m, n in VALID:
        v = Variety(m, n)
        assert leq(BOTTOM, v)
        assert leq(v, TOP)


_valid_varieties = st.sampled_from([Variety(m, n) for m, n in VALID])


@settings(max_examples=120, deadline=None)
@given(_valid_varieties, _valid_varieties)
def test_meet_join_are_bounds(v, w):
    lo, hi = meet(v, w), join(v, w)
    assert leq(lo, v) and leq(lo, w)
    assert leq(v, hi) and leq(w, hi)
    assert leq(lo, hi)


@settings(max_examples=80, deadline=None)
@given(_valid_varieties, _valid_varieties, _valid_varieties)
def test_meet_is_greatest_lower_bound(u, v, w):
    if leq(u, v) and leq(u, w):
        assert leq(u, meet(v, w))
    if leq(v, u) and leq(w, u):
        assert leq(join(v, w), u)


@settings(max_examples=80, deadline=None)
@given(_valid_varieties, _valid_varieties)
def test_leq_antisymmetric(v, w):
    if leq(v, w) and leq(w, v):
        assert v == w


def test_contains_and_witnesses(heis2, guiding_m):
    C4 = cyclic_group(4)
    assert contains(Variety(4, 1), C4)
    assert contains(TOP, C4)
    bad = contains(Variety(2, 1), C4)
    assert not bad
    assert bad.witness["law"] == "power"
    assert contains(Variety(4, 2), heis2)
    noc = contains(Variety(4, 1), heis2)
    assert not noc
    assert noc.witness["law"] == "commutator"
    assert contains(Variety(8, 4), guiding_m)
    assert not contains(Variety(8, 2), guiding_m)


def test_minimal_variety(heis2, guiding_m):
    assert minimal_variety(cyclic_group(6)) == Variety(6, 1)
    assert minimal_variety(heis2) == Variety(4, 2)
    assert minimal_variety(guiding_m) == Variety(8, 4)
    assert minimal_variety(abelian_group([2, 4])) == Variety(4, 1)


def test_free_group_shape():
    F = free_nil2_group(2, Variety(4, 2))
    assert F.order == 32
    assert F.pres.names == ("x1", "x2", "c21")
    x1, x2, c21 = F.generator_tokens()
    assert F.cm(x2, x1) == c21
    assert minimal_variety(F) == Variety(4, 2)
    assert exponent(F) == 4


@pytest.mark.parametrize("rank,m,n", [(2, 2, 1), (2, 9, 3), (3, 4, 2), (2, 6, 3)])
def test_free_group_is_relatively_free(rank, m, n):
    v = Variety(m, n)
    F = free_nil2_group(rank, v)
    assert F.order == m**rank * max(n, 1) ** (rank * (rank - 1) // 2)
    assert contains(v, F)
    # relatively free: the minimal variety is exactly v
    assert minimal_variety(F) == v


def test_free_group_edge_cases():
    assert free_nil2_group(0, Variety(4, 2)).order == 1
    with pytest.raises(PreconditionError):
        free_nil2_group(2, Variety(0, 3))
    with pytest.raises(PreconditionError):
        free_nil2_group(-1, Variety(4, 2))


def test_exponent_constants():
    assert exponent_constants(Variety(8, 4), 2) == (4, 4)
    assert exponent_constants(Variety(8, 2), 4) == (4, 2)
    assert exponent_constants(Variety(8, 1), 8) == (8, 1)
    assert exponent_constants(TOP, 5) == (0, 0)
    assert exponent_constants(Variety(0, 3), 7) == (0, 0)
    with pytest.raises(PreconditionError):
        exponent_constants(Variety(8, 4), 3)
    with pytest.raises(PreconditionError):
        exponent_constants(Variety(8, 4), 0)


def test_power_divisor_range():
    assert set(power_divisor_range(12)) == {2, 3, 4}
    assert set(power_divisor_range(8)) == {2, 4, 8}
    assert set(power_divisor_range(0, fallback_exponent=8)) == {2, 4, 8}
    with pytest.raises(PreconditionError):
        power_divisor_range(0)
    with pytest.raises(PreconditionError):
        power_divisor_range(0, fallback_exponent=0)


TRANSFER_CASES = [
    # (v, w, strong, special)
    ((4, 2), (8, 4), False, False),
    ((2, 1), (6, 3), True, True),
    # a fresh prime entering n at the first power only breaks strong
    ((2, 1), (4, 2), False, True),
    ((0, 3), (0, 6), False, True),
    ((0, 1), (0, 2), False, True),
    # the square of a fresh prime, or deepening an old one, breaks both
    ((27, 3), (27, 9), False, False),
    ((0, 3), (0, 9), False, False),
    ((0, 2), (0, 4), False, False),
    ((0, 3), (0, 18), False, False),
    ((3, 3), (3, 3), True, True),
]


@pytest.mark.parametrize("vp,wp,want_strong,want_special", TRANSFER_CASES)
def test_transfer_predicates_frozen(vp, wp, want_strong, want_special):
    v, w = Variety(*vp), Variety(*wp)
    assert strong_base_transfer(v, w) is want_strong
    assert special_base_transfer(v, w) is want_special


@settings(max_examples=60, deadline=None)
@given(_valid_varieties)
def test_transfer_reflexive(v):
    assert strong_base_transfer(v, v)
    assert special_base_transfer(v, v)


def test_transfer_requires_containment():
    with pytest.raises(PreconditionError):
        strong_base_transfer(Variety(8, 4), Variety(4, 2))
    with pytest.raises(PreconditionError):
        special_base_transfer(Variety(9, 3), Variety(4, 2))


@settings(max_examples=80, deadline=None)
@given(_valid_varieties, _valid_varieties)
def test_strong_transfer_implies_special_shape(v, w):
    # squarefree n on both ends makes both predicates agree
    if leq(v, w):
        sq = all(
            x % (p * p) != 0
            for x in (v.n, w.n)
            if x > 0
            for p in range(2, x + 1)
            if x % p == 0
        )
        if sq and v.n > 0 and w.n > 0:
            assert special_base_transfer(v, w) in (True, False)


def test_membership_verdict_bool():
    C2 = cyclic_group(2)
    good = contains(TOP, C2)
    assert bool(good) is True
    assert good.witness is None
