import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    all_exps,
    brute_center,
    brute_closure,
    brute_order,
    naive_comm,
    naive_inv,
    naive_mul,
    naive_pow,
    token_of,
)
from nil2.core import (
    DirectProduct,
    Homomorphism,
    PcGroup,
    PcPresentation,
    Subgroup,
    abelian_group,
    center,
    central_product,
    cyclic_group,
    direct_product,
    element_order,
    exponent,
    generating_set,
    identity_homomorphism,
    intersection,
    quotient,
    rebuild_as_pcgroup,
    subgroup_closure,
    trivial_group,
    trivial_subgroup,
    verbal_subgroups,
)
from nil2.errors import PresentationError


def _pres_cases():
    yield "C4", PcPresentation(("g",), (4,))
    yield "C2xC6", PcPresentation(("a", "b"), (2, 6))
    yield "H8", PcPresentation(
        ("x", "y", "c"), (2, 2, 2), {}, {(1, 0): ((2, 1),)}
    )
    yield "H27", PcPresentation(
        ("x", "y", "c"), (3, 3, 3), {}, {(1, 0): ((2, 1),)}
    )
    yield "M64", PcPresentation(
        ("x", "y", "c"), (4, 4, 4), {}, {(1, 0): ((2, 1),)}
    )
    # power tail feeding the same letter a commutator lands on
    yield "PT64", PcPresentation(
        ("x", "y", "z", "c"),
        (4, 4, 2, 2),
        {2: ((3, 1),)},
        {(1, 0): ((3, 1),)},
    )


CASES = list(_pres_cases())


@pytest.fixture(params=CASES, ids=[name for name, _ in CASES])
def case(request):
    name, pres = request.param
    return pres, PcGroup(pres, name=name)


def test_mul_matches_naive_collection(case):
    pres, G = case
    exps = list(all_exps(pres))
    for ea in exps:
        ta = token_of(pres, ea)
        for eb in exps:
            want = token_of(pres, naive_mul(pres, ea, eb))
            assert G.mul(ta, token_of(pres, eb)) == want


def test_inv_matches_naive_collection(case):
    pres, G = case
    for ea in all_exps(pres):
        want = token_of(pres, naive_inv(pres, ea))
        assert G.inv(token_of(pres, ea)) == want


@pytest.mark.parametrize("s", [-5, -1, 0, 2, 3, 7])
def test_pow_matches_naive_collection(case, s):
    pres, G = case
    for ea in all_exps(pres):
        want = token_of(pres, naive_pow(pres, ea, s))
        assert G.pw(token_of(pres, ea), s) == want


def test_comm_matches_naive_collection(case):
    pres, G = case
    exps = list(all_exps(pres))
    step = 3 if len(exps) > 32 else 1  # sample large cases
    for ea in exps[::step]:
        ta = token_of(pres, ea)
        for eb in exps[::step]:
            want = token_of(pres, naive_comm(pres, ea, eb))
            assert G.cm(ta, token_of(pres, eb)) == want


def test_encode_decode_roundtrip(case):
    pres, G = case
    toks = np.sort(np.asarray(G.all_tokens()))
    assert np.array_equal(G.encode(G.decode(toks)), toks)
    for ea in all_exps(pres):
        assert G.exps_of(token_of(pres, ea)) == ea


def test_vector_ops_match_scalar(case, rng):
    _, G = case
    toks = np.asarray(G.all_tokens())
    a = toks[rng.integers(0, len(toks), size=200)]
    b = toks[rng.integers(0, len(toks), size=200)]
    assert np.array_equal(
        G.mul_many(a, b), [G.mul(int(x), int(y)) for x, y in zip(a, b)]
    )
    assert np.array_equal(G.inv_many(a), [G.inv(int(x)) for x in a])
    assert np.array_equal(G.pow_many(a, 5), [G.pw(int(x), 5) for x in a])
    assert np.array_equal(
        G.comm_many(a, b), [G.cm(int(x), int(y)) for x, y in zip(a, b)]
    )


def test_group_laws(case, rng):
    _, G = case
    toks = np.asarray(G.all_tokens())
    e = G.identity_token
    a = toks[rng.integers(0, len(toks), size=100)]
    b = toks[rng.integers(0, len(toks), size=100)]
    c = toks[rng.integers(0, len(toks), size=100)]
    ab = G.mul_many(a, b)
    bc = G.mul_many(b, c)
    assert np.array_equal(G.mul_many(ab, c), G.mul_many(a, bc))
    assert np.array_equal(G.mul_many(a, np.asarray([e])), a)
    assert np.all(G.mul_many(a, G.inv_many(a)) == e)


def test_class_two_commutator_laws(case, rng):
    _, G = case
    toks = np.asarray(G.all_tokens())
    a = toks[rng.integers(0, len(toks), size=80)]
    b = toks[rng.integers(0, len(toks), size=80)]
    c = toks[rng.integers(0, len(toks), size=80)]
    k = G.comm_many(a, b)
    # commutators are central
    assert np.all(G.comm_many(k, c) == G.identity_token)
    # bilinearity: [ab, c] = [a,c][b,c]
    lhs = G.comm_many(G.mul_many(a, b), c)
    rhs = G.mul_many(G.comm_many(a, c), G.comm_many(b, c))
    assert np.array_equal(lhs, rhs)
    # [a^s, b] = [a, b]^s
    lhs = G.comm_many(G.pow_many(a, 3), b)
    assert np.array_equal(lhs, G.pow_many(G.comm_many(a, b), 3))


def test_describe_token_words(case):
    _, G = case
    assert G.describe_token(G.identity_token).partition(":")[2] == "e"
    for g, name in zip(G.generator_tokens(), G.pres.names):
        if g == G.identity_token:
            continue
        word = G.describe_token(int(g)).partition(":")[2]
        assert word == name
    x, y = G.generator_tokens()[0], G.generator_tokens()[-1]
    if x != y and x != G.identity_token and y != G.identity_token:
        word = G.describe_token(G.mul(x, y))
        assert "*" in word


def test_presentation_validation():
    with pytest.raises(PresentationError):
        PcPresentation(("a",), (2, 2))
    with pytest.raises(PresentationError):
        PcPresentation(("a", "a"), (2, 2))
    with pytest.raises(PresentationError):
        PcPresentation(("a",), (0,))
    with pytest.raises(PresentationError):
        # power tail must point at later letters
        PcPresentation(("a", "b"), (2, 2), {1: ((0, 1),)})
    with pytest.raises(PresentationError):
        # commutator keys are (later, earlier)
        PcPresentation(("a", "b"), (2, 2), {}, {(0, 1): ((0, 1),)})


def test_group_rejects_class_three():
    # [y, x] = x is not a class-2 relation
    pres = PcPresentation(("x", "y"), (4, 2), {}, {(1, 0): ((0, 1),)})
    with pytest.raises(PresentationError):
        PcGroup(pres)


def test_subgroup_closure_matches_bfs(case, rng):
    pres, G = case
    toks = np.asarray(G.all_tokens())
    mul = lambda a, b: G.mul(a, b)
    for _ in range(6):
        gens = [int(t) for t in toks[rng.integers(0, len(toks), size=2)]]
        H = subgroup_closure(G, gens)
        want = brute_closure(mul, int(G.identity_token), gens)
        assert set(int(t) for t in H.elements) == want
        assert H.order == len(want)
        assert bool(np.all(H.contains(np.asarray(sorted(want)))))


def test_center_matches_brute(case):
    pres, G = case
    toks = [int(t) for t in G.all_tokens()]
    want = brute_center(toks, lambda a, b: G.mul(a, b))
    Z = center(G)
    assert set(int(t) for t in Z.elements) == want


def test_element_order_and_exponent(case):
    pres, G = case
    orders = []
    for t in G.all_tokens():
        n = brute_order(lambda a, b: G.mul(a, b), int(G.identity_token), int(t)) if t != G.identity_token else 1
        assert element_order(G.element(int(t))) == n
        orders.append(n)
    assert exponent(G) == math.lcm(*orders)


def test_quotient_by_center(guiding_m):
    G = guiding_m
    Z = center(G)
    assert Z.order == 4
    Q, proj = quotient(G, Z)
    assert Q.order == 16
    assert exponent(Q) == 4
    toks = np.sort(np.asarray(G.all_tokens()))
    a = np.repeat(toks, 4)[: 4 * len(toks)]
    b = np.tile(toks, 4)[: 4 * len(toks)]
    lhs = proj(G.mul_many(a, b))
    rhs = Q.mul_many(proj(a), proj(b))
    assert np.array_equal(lhs, rhs)
    # quotient by the derived subgroup kills every commutator
    for x in toks[:16]:
        for y in toks[:16]:
            assert Q.cm(proj.apply_one(int(x)), proj.apply_one(int(y))) == Q.identity_token


def test_direct_product_ops(heis2):
    A = heis2
    B = cyclic_group(4)
    P = direct_product(A, B)
    assert P.order == A.order * B.order
    assert len(P.generator_tokens()) == len(A.generator_tokens()) + len(
        B.generator_tokens()
    )
    assert exponent(P) == math.lcm(exponent(A), exponent(B))
    embA, embB = P.embed_left(), P.embed_right()
    for a in A.all_tokens():
        for b in B.all_tokens():
            x = P.mul(embA.apply_one(int(a)), embB.apply_one(int(b)))
            y = P.mul(embB.apply_one(int(b)), embA.apply_one(int(a)))
            assert x == y  # factors commute inside the product


def test_central_product_glues(guiding_m):
    A = cyclic_group(4)
    B = cyclic_group(4)
    g = A.generator_tokens()[0]
    h = B.generator_tokens()[0]
    iso = {A.identity_token: B.identity_token, A.pw(g, 2): B.pw(h, 2)}
    K, ea, eb = central_product(A, B, iso)
    assert K.order == 8
    assert ea.is_injective() and eb.is_injective()
    common = intersection(ea.image_subgroup(), eb.image_subgroup())
    assert common.order == 2
    # the glued element has one image through either side
    assert ea.apply_one(A.pw(g, 2)) == eb.apply_one(B.pw(h, 2))


def test_rebuild_subgroup_as_group(guiding_m):
    G = guiding_m
    x, y, c = G.generator_tokens()
    S = subgroup_closure(G, [G.pw(x, 2), G.pw(y, 2)])
    R, emb = rebuild_as_pcgroup(G, S, name="R")
    assert R.order == S.order == 4
    assert emb.is_injective()
    imgs = set(int(emb.apply_one(int(t))) for t in R.all_tokens())
    assert imgs == set(int(t) for t in S.elements)
    whole = subgroup_closure(G, [x, y])
    R2, emb2 = rebuild_as_pcgroup(G, whole, name="W")
    assert R2.order == G.order
    assert emb2.is_injective()


def test_verbal_subgroups_against_brute(case):
    pres, G = case
    n = 2
    toks = [int(t) for t in G.all_tokens()]
    mul = lambda a, b: G.mul(a, b)
    powers = [G.pw(t, n) for t in toks]
    comms = [G.cm(a, b) for a in toks for b in toks]
    Gn, Gp, GnGp = verbal_subgroups(G, n)
    assert set(int(t) for t in Gn.elements) == brute_closure(mul, int(G.identity_token), powers)
    assert set(int(t) for t in Gp.elements) == brute_closure(mul, int(G.identity_token), comms)
    both = brute_closure(mul, int(G.identity_token), powers + comms)
    assert set(int(t) for t in GnGp.elements) == both


def test_verbal_subgroup_zero_convention(heis2):
    Gn, Gp, GnGp = verbal_subgroups(heis2, 0)
    assert Gn.order == 1
    assert GnGp.order == Gp.order


def test_homomorphism_verifies_and_maps(guiding_m):
    G = guiding_m
    x, y, c = G.generator_tokens()
    B = abelian_group([4, 4])
    u, v = B.generator_tokens()
    # abelianization: send x, y to the two letters
    f = Homomorphism(G, B, {x: u, y: v, c: B.identity_token})
    toks = np.sort(np.asarray(G.all_tokens()))
    a = np.repeat(toks[:32], 2)
    b = np.tile(toks[:32], 2)
    assert np.array_equal(f(G.mul_many(a, b)), B.mul_many(f(a), f(b)))
    with pytest.raises(Exception):
        # c has order 4, the image must respect [y, x] = c
        Homomorphism(G, B, {x: u, y: v, c: u})


def test_identity_homomorphism(heis2):
    f = identity_homomorphism(heis2)
    toks = np.asarray(heis2.all_tokens())
    assert np.array_equal(f(toks), toks)


def test_generating_set_small(guiding_m):
    G = guiding_m
    S = subgroup_closure(G, list(G.generator_tokens()[:2]))
    gens = generating_set(S)
    back = subgroup_closure(G, gens)
    assert back.order == S.order
    assert len(gens) <= 3


def test_trivial_cases():
    T = trivial_group()
    assert T.order == 1
    assert exponent(T) == 1
    C = cyclic_group(12)
    S = trivial_subgroup(C)
    assert S.order == 1
    assert abelian_group([1, 1]).order == 1


@st.composite
def _abelian_pair(draw):
    orders = tuple(
        draw(st.sampled_from([2, 3, 4, 5, 8]))
        for _ in range(draw(st.integers(1, 3)))
    )
    pres = PcPresentation(tuple(f"a{i}" for i in range(len(orders))), orders)
    ea = tuple(draw(st.integers(0, o - 1)) for o in orders)
    eb = tuple(draw(st.integers(0, o - 1)) for o in orders)
    return pres, ea, eb


@settings(max_examples=40, deadline=None)
@given(_abelian_pair())
def test_hypothesis_abelian_mul(data):
    pres, ea, eb = data
    G = PcGroup(pres, skip_checks=True)
    want = tuple((a + b) % o for a, b, o in zip(ea, eb, pres.orders))
    assert G.mul(token_of(pres, ea), token_of(pres, eb)) == token_of(pres, want)
    assert naive_mul(pres, ea, eb) == want


@settings(max_examples=25, deadline=None)
@given(st.integers(-12, 12))
def test_hypothesis_heisenberg_power_formula(s):
    # (xy)^s = x^s y^s c^(s choose 2) in the free object on two letters
    pres = PcPresentation(("x", "y", "c"), (8, 8, 8), {}, {(1, 0): ((2, 1),)})
    G = PcGroup(pres, skip_checks=True)
    x, y, c = G.generator_tokens()
    xy = G.mul(x, y)
    lhs = G.pw(xy, s)
    rhs = G.mul(G.mul(G.pw(x, s), G.pw(y, s)), G.pw(c, s * (s - 1) // 2))
    assert lhs == rhs
