"""Decision procedures for amalgams of finite class-2 nilpotent groups.

check_strong and check_weak decide embeddability of an amalgam inside a
variety (m,n), dominion computes the closure obstruction of a subgroup,
the adjoin_* operations decide root feasibility, and is_strong_base /
is_special_base classify amalgamation bases.  Every predicate here has a
brute-force twin in coproduct.py; the test suite plays them against each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .variety import (
    Variety,
    contains,
    div_or_zero,
    exponent_constants,
    is_valid_pair,
    join,
    leq,
    minimal_variety,
    power_divisor_range,
)
from .core import (
    FiniteGroup,
    GroupElement,
    Homomorphism,
    PcGroup,
    PcPresentation,
    Subgroup,
    abelian_group,
    center,
    central_product,
    check_budget,
    direct_product,
    divisors,
    element_order,
    exponent,
    factorize,
    max_elements,
    generating_set,
    identity_homomorphism,
    omega,
    power_subgroup,
    prime_power_divisors,
    quotient,
    rebuild_as_pcgroup,
    subgroup_closure,
    trivial_group,
    verbal_subgroups,
    with_generators,
    _tok,
)
from .abelian import abelian_special_base, abelian_strong_base, invariant_factors


@dataclass(frozen=True)
class Verdict:
    """Boolean answer plus a witness dict that re-verifies the failure."""

    holds: bool
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True, eq=False)
class Amalgam:
    A: FiniteGroup
    B: FiniteGroup
    D: FiniteGroup
    phiA: Homomorphism
    phiB: Homomorphism
    name: str = "amalgam"

    def __post_init__(self):
        if self.phiA.domain is not self.D or self.phiA.codomain is not self.A:
            raise PreconditionError(
                "left embedding must map the core into the left factor", witness={}
            )
        if self.phiB.domain is not self.D or self.phiB.codomain is not self.B:
            raise PreconditionError(
                "right embedding must map the core into the right factor", witness={}
            )
        if not self.phiA.is_injective() or not self.phiB.is_injective():
            raise PreconditionError("core embeddings must be injective", witness={})


def special_amalgam(K: FiniteGroup, S: Subgroup, name: str = "special") -> Amalgam:
    """The amalgam (K, K; S) with both embeddings the inclusion of S."""
    if S.owner is not K:
        raise PreconditionError("subgroup belongs to a different group", witness={})
    src = S if len(S.gen_tokens) else with_generators(S)
    D, emb = rebuild_as_pcgroup(K, src, name + "_core")
    return Amalgam(K, K, D, emb, emb, name=name)


def _require(v: Variety, G: FiniteGroup, role: str) -> None:
    verdict = contains(v, G)
    if not verdict:
        raise PreconditionError(
            f"{role} is not a member of {v}", witness=verdict.witness
        )


def _central_class_reps(G: FiniteGroup, toks: np.ndarray, Z: Subgroup) -> np.ndarray:
    """Least member of the Z-coset of each token (aligned with toks)."""
    check_budget(len(toks) * Z.order, "centre coset reduction")
    grid = np.asarray(
        G.mul_many(np.repeat(toks, Z.order), np.tile(Z.elements, len(toks)))
    )
    return grid.reshape(len(toks), Z.order).min(axis=1)


def _token_powers(G: FiniteGroup, t: int, L: int) -> np.ndarray:
    out = np.empty(L, dtype=np.int64)
    out[0] = G.identity_token
    for i in range(1, L):
        out[i] = G.mul(int(out[i - 1]), t)
    return out


def _joint_exponent(*groups) -> int:
    E = 1
    for G in groups:
        E = math.lcm(E, exponent(G))
    return E


class _AmalgamView:
    """Shared tables for one (amalgam, variety) pair."""

    def __init__(self, am: Amalgam, v: Variety):
        self.am = am
        self.v = v
        _require(v, am.A, "left factor")
        _require(v, am.B, "right factor")
        _require(v, am.D, "core")
        self.d_toks = np.sort(np.asarray(am.D.all_tokens(), dtype=np.int64))
        self.a_of_d = np.asarray(am.phiA(self.d_toks), dtype=np.int64)
        self.b_of_d = np.asarray(am.phiB(self.d_toks), dtype=np.int64)
        self.a_toks = np.sort(np.asarray(am.A.all_tokens(), dtype=np.int64))
        self.b_toks = np.sort(np.asarray(am.B.all_tokens(), dtype=np.int64))
        self.ZA = center(am.A)
        self.ZB = center(am.B)
        self.powA, self.primeA, self.bothA = verbal_subgroups(am.A, v.n)
        self.powB, self.primeB, self.bothB = verbal_subgroups(am.B, v.n)
        self.pullA = self._pull(self.a_toks, self.a_of_d)
        self.pullB = self._pull(self.b_toks, self.b_of_d)
        self._cache: dict = {}

    def _pull(self, toks: np.ndarray, image: np.ndarray) -> np.ndarray:
        arr = np.full(int(toks[-1]) + 1, -1, dtype=np.int64)
        arr[image] = self.d_toks
        return arr

    def _side(self, side: str):
        if side == "A":
            return self.am.A, self.a_toks, self.a_of_d, self.bothA, self.ZA
        return self.am.B, self.b_toks, self.b_of_d, self.bothB, self.ZB

    def classes(self, side: str):
        key = ("cls", side)
        if key not in self._cache:
            G, toks, _, _, Z = self._side(side)
            cls = _central_class_reps(G, toks, Z)
            self._cache[key] = (cls, np.unique(cls))
        return self._cache[key]

    def g_table(self) -> np.ndarray:
        # [a-class index, core index] -> [a, phiA(d)] in A
        if "g" not in self._cache:
            _, uniq = self.classes("A")
            nd = len(self.d_toks)
            check_budget(len(uniq) * nd, "commutator table")
            raw = np.asarray(
                self.am.A.comm_many(
                    np.repeat(uniq, nd), np.tile(self.a_of_d, len(uniq))
                ),
                dtype=np.int64,
            ).reshape(len(uniq), nd)
            self._cache["g"] = raw
        return self._cache["g"]

    def f_table(self) -> np.ndarray:
        # [core index, b-class index] -> [phiB(d), b] in B
        if "f" not in self._cache:
            _, uniq = self.classes("B")
            nd = len(self.d_toks)
            check_budget(len(uniq) * nd, "commutator table")
            raw = np.asarray(
                self.am.B.comm_many(
                    np.repeat(self.b_of_d, len(uniq)), np.tile(uniq, nd)
                ),
                dtype=np.int64,
            ).reshape(nd, len(uniq))
            self._cache["f"] = raw
        return self._cache["f"]

    def admissible(self, side: str, q: int):
        """Class-reduced solutions of phi(d) in a^q * (power-commutator part).

        Returns (class index, core index, witness token) arrays sorted by
        (witness, core token); one witness per (class, core) key.
        """
        G, toks, of_d, both, _ = self._side(side)
        cls, uniq = self.classes(side)
        ipowq = np.asarray(G.inv_many(G.pow_many(toks, q)))
        ci, di, wi = [], [], []
        for d_idx, target in enumerate(of_d):
            mask = both.contains(
                np.asarray(G.mul_many(ipowq, np.asarray([int(target)])))
            )
            if not mask.any():
                continue
            crs = cls[mask]
            ucr, first = np.unique(crs, return_index=True)
            ci.append(np.searchsorted(uniq, ucr))
            di.append(np.full(len(ucr), d_idx, dtype=np.int64))
            wi.append(toks[mask][first])
        if not ci:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, empty
        ci = np.concatenate(ci)
        di = np.concatenate(di)
        wi = np.concatenate(wi)
        order = np.lexsort((self.d_toks[di], wi))
        return ci[order], di[order], wi[order]


# ---------------------------------------------------------------------------
# strong embeddability


def _core_centrality_failure(view: _AmalgamView):
    for side, own, other_Z, own_img, other_img in (
        ("A", view.bothA, view.ZB, view.a_of_d, view.b_of_d),
        ("B", view.bothB, view.ZA, view.b_of_d, view.a_of_d),
    ):
        bad = own.contains(own_img) & ~other_Z.contains(other_img)
        if bad.any():
            i = int(np.argmax(bad))
            return {
                "condition": "core-centrality",
                "side": side,
                "d": int(view.d_toks[i]),
                "image": int(own_img[i]),
                "other_image": int(other_img[i]),
            }
    return None


def _strong_conflict(view: _AmalgamView, q: int):
    cia, dia, wa = view.admissible("A", q)
    cib, dib, wb = view.admissible("B", q)
    if not len(wa) or not len(wb):
        return None
    g = view.g_table()
    f = view.f_table()
    pg = view.pullA[g]
    pf = view.pullB[f]
    check_budget(len(wa) * len(wb), "strong cross scan")
    left = pf[dia[:, None], cib[None, :]]
    right = pg[cia[:, None], dib[None, :]]
    bad = (left < 0) | (right < 0) | (left != right)
    if not bad.any():
        return None
    i, j = divmod(int(np.argmax(bad)), bad.shape[1])
    return {
        "condition": "cross-commutator",
        "q": q,
        "a": int(wa[i]),
        "delta": int(view.d_toks[dia[i]]),
        "b": int(wb[j]),
        "delta_prime": int(view.d_toks[dib[j]]),
        "left": int(f[dia[i], cib[j]]),
        "right": int(g[cia[i], dib[j]]),
    }


def check_strong(am: Amalgam, v: Variety) -> Verdict:
    """Strong embeddability of the amalgam in (m,n).

    True iff the core meets each factor's power-commutator part centrally
    on the other side, and for every prime-power q the commutators of
    core-congruent q-th power pairs agree across the core identification.
    """
    view = _AmalgamView(am, v)
    bad = _core_centrality_failure(view)
    if bad is not None:
        return Verdict(False, bad)
    for q in power_divisor_range(v.n, _joint_exponent(am.A, am.B)):
        w = _strong_conflict(view, q)
        if w is not None:
            return Verdict(False, w)
    return Verdict(True, {})


# ---------------------------------------------------------------------------
# weak embeddability


def _pair_subgroup(A: FiniteGroup, B: FiniteGroup, stride: int, pa, pb):
    """Closure of the given token pairs inside A x B, as parallel arrays."""
    ident = A.identity_token * stride + B.identity_token
    keys = np.unique(np.asarray(pa, dtype=np.int64) * stride + np.asarray(pb))
    gens = keys[keys != ident]
    ga, gb = gens // stride, gens % stride
    known = np.asarray([ident], dtype=np.int64)
    fa = np.asarray([A.identity_token], dtype=np.int64)
    fb = np.asarray([B.identity_token], dtype=np.int64)
    while len(fa) and len(gens):
        acc = []
        for t in range(len(ga)):
            na = np.asarray(A.mul_many(fa, np.asarray([int(ga[t])])))
            nb = np.asarray(B.mul_many(fb, np.asarray([int(gb[t])])))
            acc.append(na * stride + nb)
        cand = np.unique(np.concatenate(acc))
        new = cand[~np.isin(cand, known)]
        known = np.union1d(known, new)
        check_budget(len(known), "pair subgroup closure")
        fa, fb = new // stride, new % stride
    return known // stride, known % stride


def check_weak(am: Amalgam, v: Variety, qmode: str = "all") -> Verdict:
    """Weak embeddability of the amalgam in (m,n).

    Condition (1) is the centrality half of check_strong.  Condition (2)
    pools the commutator value pairs over every divisor q of n, closes
    them into a subgroup W of A' x B' (the pool is inverse-closed, so
    products realize every finite combination), and demands that a pair
    of W meeting either core image meets both and is identified.

    qmode "prime_powers" restricts q to prime powers; the default "all"
    keeps every divisor.  Both ranges fall back to the prime-power
    divisors of the joint exponent when n = 0.
    """
    if qmode not in ("all", "prime_powers"):
        raise ValueError("qmode must be 'all' or 'prime_powers'")
    view = _AmalgamView(am, v)
    bad = _core_centrality_failure(view)
    if bad is not None:
        return Verdict(False, bad)
    if v.n > 0:
        qs = divisors(v.n) if qmode == "all" else prime_power_divisors(v.n)
    else:
        qs = power_divisor_range(0, _joint_exponent(am.A, am.B))
    g = view.g_table()
    f = view.f_table()
    pa, pb = [], []
    for q in qs:
        cia, dia, wa = view.admissible("A", q)
        cib, dib, wb = view.admissible("B", q)
        if not len(wa) or not len(wb):
            continue
        check_budget(len(wa) * len(wb), "weak pair pool")
        pa.append(g[cia[:, None], dib[None, :]].ravel())
        pb.append(f[dia[:, None], cib[None, :]].ravel())
    if not pa:
        return Verdict(True, {})
    check_budget(view.primeA.order * view.primeB.order, "pair subgroup")
    stride = int(view.b_toks[-1]) + 1
    uA, uB = _pair_subgroup(
        am.A, am.B, stride, np.concatenate(pa), np.concatenate(pb)
    )
    inA = view.pullA[uA] >= 0
    inB = view.pullB[uB] >= 0
    same = np.zeros(len(uA), dtype=bool)
    hit = inA & inB
    same[hit] = view.pullA[uA[hit]] == view.pullB[uB[hit]]
    bad_mask = (inA | inB) & ~(hit & same)
    if bad_mask.any():
        i = int(np.argmax(bad_mask))
        return Verdict(
            False,
            {
                "condition": "pair-identification",
                "left": int(uA[i]),
                "right": int(uB[i]),
                "left_in_core": bool(inA[i]),
                "right_in_core": bool(inB[i]),
            },
        )
    return Verdict(True, {})


# ---------------------------------------------------------------------------
# structured special cases of the strong criterion


def _power_class_witnesses(G, toks, cls, S: Subgroup, q: int) -> np.ndarray:
    mask = S.contains(np.asarray(G.pow_many(toks, q)))
    if not mask.any():
        return np.empty(0, dtype=np.int64)
    _, first = np.unique(cls[mask], return_index=True)
    return np.sort(toks[mask][first])


def check_strong_special_case(am: Amalgam, v: Variety, mode: str = "cocentral") -> Verdict:
    """Strong embeddability under a structural hypothesis on the right factor.

    mode "cocentral" assumes B is generated by the core image together
    with Z(B); mode "central_core" assumes the core image lies inside
    Z(B).  The hypothesis is verified and its violation is an error, not
    a False verdict.  Must agree with check_strong where it applies.
    """
    if mode not in ("cocentral", "central_core"):
        raise ValueError("mode must be 'cocentral' or 'central_core'")
    view = _AmalgamView(am, v)
    A, B = am.A, am.B
    clsA, _ = view.classes("A")
    if v.n > 0:
        qs = divisors(v.n)
    else:
        qs = power_divisor_range(0, _joint_exponent(A, B))
    SA = subgroup_closure(
        A, [int(t) for t in view.a_of_d] + [int(t) for t in view.bothA.gen_tokens]
    )
    if mode == "cocentral":
        zgens = generating_set(view.ZB)
        gen = subgroup_closure(B, [int(t) for t in view.b_of_d] + zgens)
        if gen.order != B.order:
            raise PreconditionError(
                "core image and centre do not generate the right factor",
                witness={"generated": gen.order, "order": B.order},
            )
        Bn = power_subgroup(B, v.n)
        bad = Bn.contains(view.b_of_d) & ~view.ZA.contains(view.a_of_d)
        if bad.any():
            i = int(np.argmax(bad))
            return Verdict(
                False,
                {
                    "condition": "1",
                    "d": int(view.d_toks[i]),
                    "image": int(view.b_of_d[i]),
                    "other_image": int(view.a_of_d[i]),
                },
            )
        for q in qs:
            wa = _power_class_witnesses(A, view.a_toks, clsA, SA, q)
            if not len(wa):
                continue
            TB = subgroup_closure(
                B,
                [B.pw(int(z), q) for z in zgens]
                + [int(t) for t in Bn.gen_tokens],
            )
            for d_idx in np.flatnonzero(TB.contains(view.b_of_d)):
                comm = np.asarray(
                    A.comm_many(wa, np.asarray([int(view.a_of_d[d_idx])]))
                )
                off = comm != A.identity_token
                if off.any():
                    i = int(np.argmax(off))
                    return Verdict(
                        False,
                        {
                            "condition": "2",
                            "q": q,
                            "a": int(wa[i]),
                            "delta_prime": int(view.d_toks[d_idx]),
                            "commutator": int(comm[i]),
                        },
                    )
        return Verdict(True, {})
    # central_core
    off_core = ~view.ZB.contains(view.b_of_d)
    if off_core.any():
        i = int(np.argmax(off_core))
        raise PreconditionError(
            "core image is not central in the right factor",
            witness={"d": int(view.d_toks[i]), "image": int(view.b_of_d[i])},
        )
    bad = view.bothB.contains(view.b_of_d) & ~view.ZA.contains(view.a_of_d)
    if bad.any():
        i = int(np.argmax(bad))
        return Verdict(
            False,
            {
                "condition": "1",
                "d": int(view.d_toks[i]),
                "image": int(view.b_of_d[i]),
                "other_image": int(view.a_of_d[i]),
            },
        )
    ipow_cache: dict[int, np.ndarray] = {}
    for q in qs:
        wa = _power_class_witnesses(A, view.a_toks, clsA, SA, q)
        if not len(wa):
            continue
        if q not in ipow_cache:
            ipow_cache[q] = np.asarray(B.inv_many(B.pow_many(view.b_toks, q)))
        ipowq = ipow_cache[q]
        for d_idx, target in enumerate(view.b_of_d):
            reach = view.bothB.contains(
                np.asarray(B.mul_many(ipowq, np.asarray([int(target)])))
            )
            if not reach.any():
                continue
            comm = np.asarray(
                A.comm_many(wa, np.asarray([int(view.a_of_d[d_idx])]))
            )
            off = comm != A.identity_token
            if off.any():
                i = int(np.argmax(off))
                return Verdict(
                    False,
                    {
                        "condition": "2",
                        "q": q,
                        "a": int(wa[i]),
                        "delta_prime": int(view.d_toks[d_idx]),
                        "commutator": int(comm[i]),
                    },
                )
    return Verdict(True, {})


# ---------------------------------------------------------------------------
# dominions


def _perturbation_spot_check(G, H: Subgroup, adm: np.ndarray, q: int, rng) -> None:
    # membership of [x,y]^q in H survives translating x, y by H
    k = min(4, len(adm))
    if k == 0 or H.order == 0:
        return
    xs = rng.choice(adm, size=k)
    ys = rng.choice(adm, size=k)
    h1 = rng.choice(H.elements, size=k)
    h2 = rng.choice(H.elements, size=k)
    for x, y, a, b in zip(xs, ys, h1, h2):
        lhs = H.contains_one(G.pw(G.cm(int(x), int(y)), q))
        rhs = H.contains_one(
            G.pw(G.cm(G.mul(int(x), int(a)), G.mul(int(y), int(b))), q)
        )
        assert lhs == rhs, "perturbation by subgroup elements changed membership"


def dominion(G: FiniteGroup, H: Subgroup, v: Variety) -> Subgroup:
    """Smallest subgroup containing H that is an equalizer-closure in (m,n).

    Generated by H together with [a,b]^q over prime-power divisors q of n
    (of exp(G) when n = 0) and all a, b whose q-th powers fall in
    H*(G^nG'); one pass suffices, the added commutators close it.
    """
    if H.owner is not G:
        raise PreconditionError("subgroup belongs to a different group", witness={})
    _require(v, G, "ambient group")
    _, _, both = verbal_subgroups(G, v.n)
    hg = [int(t) for t in H.gen_tokens] if len(H.gen_tokens) else generating_set(H)
    env = subgroup_closure(G, hg + [int(t) for t in both.gen_tokens])
    toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
    cls = _central_class_reps(G, toks, center(G))
    rng = np.random.default_rng(0)
    extra: list[int] = []
    for q in power_divisor_range(v.n, exponent(G)):
        mask = env.contains(np.asarray(G.pow_many(toks, q)))
        if not mask.any():
            continue
        adm = toks[mask]
        _, first = np.unique(cls[mask], return_index=True)
        wit = adm[first]
        check_budget(len(wit) * len(wit), "dominion pair scan")
        vals = np.asarray(
            G.pow_many(
                G.comm_many(np.repeat(wit, len(wit)), np.tile(wit, len(wit))), q
            )
        )
        for t in np.unique(vals):
            if int(t) != G.identity_token:
                extra.append(int(t))
        _perturbation_spot_check(G, H, adm, q, rng)
    return subgroup_closure(G, hg + extra)


# ---------------------------------------------------------------------------
# root adjunction


def _root_pre(G, v: Variety, q: int):
    _require(v, G, "group")
    if q < 1 or not div_or_zero(q, v.n):
        raise PreconditionError(
            "root index must divide the power-law exponent",
            witness={"q": q, "n": v.n},
        )


def can_adjoin_root(G: FiniteGroup, x, q: int, v: Variety) -> Verdict:
    """Is there an overgroup K in (m,n) with x a q-th power modulo K^nK'?

    True iff x^zeta = e and every g whose q-th power is congruent to a
    power of x modulo G^nG' commutes with x.  The witness always carries
    the exact_root_available flag: qn | m means the root can be taken on
    the nose rather than modulo commutators.
    """
    x = _tok(x)
    _root_pre(G, v, q)
    flag = bool(div_or_zero(q * v.n, v.m))
    _, zeta = exponent_constants(v, q)
    if zeta and G.pw(x, zeta) != G.identity_token:
        return Verdict(
            False,
            {
                "condition": "exponent",
                "zeta": zeta,
                "power": int(G.pw(x, zeta)),
                "exact_root_available": flag,
            },
        )
    _, _, both = verbal_subgroups(G, v.n)
    Q, proj = quotient(G, both)
    L = math.lcm(exponent(Q), v.n // q) if v.n else exponent(Q)
    xpow = _token_powers(Q, proj.apply_one(x), L)
    reps = np.sort(np.asarray(Q.all_tokens(), dtype=np.int64))
    gq = np.asarray(Q.pow_many(reps, q), dtype=np.int64)
    solvable = np.isin(gq, np.unique(xpow))
    cand = reps[solvable]
    if len(cand):
        comm = np.asarray(G.comm_many(cand, np.asarray([x])))
        bad = comm != G.identity_token
        if bad.any():
            i = int(np.argmax(bad))
            return Verdict(
                False,
                {
                    "condition": "commutation",
                    "q": q,
                    "g": int(cand[i]),
                    "alpha": int(np.argmax(xpow == gq[solvable][i])),
                    "commutator": int(comm[i]),
                    "exact_root_available": flag,
                },
            )
    return Verdict(True, {"exact_root_available": flag})


def can_adjoin_two_roots(G: FiniteGroup, x, y, q: int, v: Variety) -> Verdict:
    """Joint q-th roots of x and y modulo commutators in one overgroup.

    Beyond the exponent bound, solutions g1, g2 of the two power
    congruences whose middle exponents agree modulo n/q must satisfy
    [g1,x][g2,y] = e.
    """
    x, y = _tok(x), _tok(y)
    _root_pre(G, v, q)
    flag = bool(div_or_zero(q * v.n, v.m))
    _, zeta = exponent_constants(v, q)
    if zeta:
        for label, t in (("x", x), ("y", y)):
            if G.pw(t, zeta) != G.identity_token:
                return Verdict(
                    False,
                    {
                        "condition": "exponent",
                        "element": label,
                        "zeta": zeta,
                        "power": int(G.pw(t, zeta)),
                        "exact_root_available": flag,
                    },
                )
    _, _, both = verbal_subgroups(G, v.n)
    Q, proj = quotient(G, both)
    expQ = exponent(Q)
    rmod = v.n // q if v.n else expQ
    L = math.lcm(expQ, rmod)
    xp = _token_powers(Q, proj.apply_one(x), L)
    yp = _token_powers(Q, proj.apply_one(y), L)
    check_budget(L * L, "congruence grid")
    grid = np.asarray(
        Q.mul_many(np.repeat(xp, L), np.tile(yp, L)), dtype=np.int64
    )
    reps = np.sort(np.asarray(Q.all_tokens(), dtype=np.int64))
    gq = np.asarray(Q.pow_many(reps, q), dtype=np.int64)
    check_budget(len(reps) * L * L, "congruence match")
    M = (grid[None, :] == gq[:, None]).reshape(len(reps), L, L)
    beta_res = M.any(axis=1).reshape(len(reps), L // rmod, rmod).any(axis=1)
    gamma_res = M.any(axis=2).reshape(len(reps), L // rmod, rmod).any(axis=1)
    cx = np.asarray(G.comm_many(reps, np.asarray([x])))
    cy = np.asarray(G.comm_many(reps, np.asarray([y])))
    idx = np.arange(L * L)
    betas = idx % L
    gammas = idx // L
    for rho in range(rmod):
        sel1 = beta_res[:, rho]
        sel2 = gamma_res[:, rho]
        if not sel1.any() or not sel2.any():
            continue
        v1 = np.unique(cx[sel1])
        v2 = np.unique(cy[sel2])
        if len(v1) == 1 and len(v2) == 1 and G.mul(int(v1[0]), int(v2[0])) == G.identity_token:
            continue
        for g1 in reps[sel1]:
            c1 = G.cm(int(g1), x)
            for g2 in reps[sel2]:
                if G.mul(c1, G.cm(int(g2), y)) == G.identity_token:
                    continue
                r1 = int(np.searchsorted(reps, g1))
                r2 = int(np.searchsorted(reps, g2))
                cell1 = int(
                    np.flatnonzero((grid == gq[r1]) & (betas % rmod == rho))[0]
                )
                cell2 = int(
                    np.flatnonzero((grid == gq[r2]) & (gammas % rmod == rho))[0]
                )
                return Verdict(
                    False,
                    {
                        "condition": "commutation",
                        "q": q,
                        "g1": int(g1),
                        "g2": int(g2),
                        "alpha": cell1 // L,
                        "beta": cell1 % L,
                        "gamma": cell2 // L,
                        "delta": cell2 % L,
                        "exact_root_available": flag,
                    },
                )
    return Verdict(True, {"exact_root_available": flag})


# ---------------------------------------------------------------------------
# strong amalgamation bases


def is_strong_base(G: FiniteGroup, v: Variety) -> Verdict:
    """Is G a strong amalgamation base of (m,n)?

    (a) the beta-torsion of Z(G) must be exactly G^nG'; (b) every g
    outside G^qG' of exponent dividing zeta must admit h with h^q
    congruent to a power of g modulo G^nG' and [h,g] != e.  Weak and
    strong bases coincide, so this one check serves both readings.
    """
    _require(v, G, "group")
    Z = center(G)
    _, _, both = verbal_subgroups(G, v.n)
    beta, _ = exponent_constants(v, 1)
    Om = omega(Z, beta)
    if not np.array_equal(Om.elements, both.elements):
        sym = np.setxor1d(Om.elements, both.elements)
        return Verdict(
            False, {"condition": "a", "beta": beta, "token": int(sym[0])}
        )
    Q, _ = quotient(G, both)
    reps = np.sort(np.asarray(Q.all_tokens(), dtype=np.int64))
    expQ = exponent(Q)
    for q in power_divisor_range(v.n, exponent(G)):
        _, zeta = exponent_constants(v, q)
        qboth = verbal_subgroups(G, q)[2]
        esc = qboth.contains(reps)
        if zeta:
            esc |= np.asarray(G.pow_many(reps, zeta)) != G.identity_token
        cand = reps[~esc]
        if not len(cand):
            continue
        hq = np.asarray(Q.pow_many(reps, q), dtype=np.int64)
        for g in cand:
            cyc = np.unique(_token_powers(Q, int(g), expQ))
            sols = reps[np.isin(hq, cyc)]
            if len(sols):
                comm = np.asarray(G.comm_many(sols, np.asarray([int(g)])))
                if (comm != G.identity_token).any():
                    continue
            return Verdict(False, {"condition": "b", "q": q, "g": int(g)})
    return Verdict(True, {})


# ---------------------------------------------------------------------------
# special amalgamation bases (absolute closure)


def _special_pair_escapes(G, grid, solv, gwit, Kx, Ky, x, y, rmod):
    # does some matching-residue solution pair have [g1,x][g2,y] != e
    L = grid.shape[0]
    for rho in range(rmod):
        part1 = solv[:, rho::rmod]
        part2 = solv[rho::rmod, :]
        if not part1.any() or not part2.any():
            continue
        V1: set[int] = set()
        for t in np.unique(grid[:, rho::rmod][part1]):
            base = G.cm(int(gwit[int(t)]), x)
            V1.update(int(u) for u in G.mul_many(Kx, np.asarray([base])))
            if len(V1) > 1:
                break
        V2: set[int] = set()
        for t in np.unique(grid[rho::rmod, :][part2]):
            base = G.cm(int(gwit[int(t)]), y)
            V2.update(int(u) for u in G.mul_many(Ky, np.asarray([base])))
            if len(V2) > 1:
                break
        if len(V1) > 1 or len(V2) > 1:
            return True
        if G.mul(next(iter(V1)), next(iter(V2))) != G.identity_token:
            return True
    return False


def is_special_base(G: FiniteGroup, v: Variety) -> Verdict:
    """Is G absolutely closed in (m,n) (equal to its dominion everywhere)?

    Each ordered pair of G^nG'-classes (x, y) must satisfy, for every
    prime-power q | n except q = n: one of x, y has exponent past zeta,
    or some matching-residue congruence solution pair fails to commute,
    or the two congruence systems admit residues differing by one.
    """
    _require(v, G, "group")
    n = v.n
    _, _, both = verbal_subgroups(G, n)
    Q, _ = quotient(G, both)
    reps = np.sort(np.asarray(Q.all_tokens(), dtype=np.int64))
    expQ = exponent(Q)
    qs = [q for q in power_divisor_range(n, exponent(G)) if n == 0 or q != n]
    for q in qs:
        _, zeta = exponent_constants(v, q)
        rmod = n // q if n else expQ
        L = math.lcm(expQ, rmod)
        gq = np.asarray(Q.pow_many(reps, q), dtype=np.int64)
        solvset, fidx = np.unique(gq, return_index=True)
        gwit = np.full(int(reps[-1]) + 1, -1, dtype=np.int64)
        gwit[solvset] = reps[fidx]
        kerq = reps[gq == Q.identity_token]
        if zeta:
            live = reps[np.asarray(G.pow_many(reps, zeta)) == G.identity_token]
        else:
            live = reps
        if not len(live):
            continue
        nl = len(live)
        check_budget(nl * L, "power table")
        P = np.empty((nl, L), dtype=np.int64)
        P[:, 0] = Q.identity_token
        for a in range(1, L):
            P[:, a] = Q.mul_many(P[:, a - 1], live)
        x_is_power = np.isin(live, solvset)
        cell = L * L
        check_budget(cell, "congruence grid")
        ychunk = max(1, min(nl, max_elements() // cell))
        for xi in range(nl):
            if x_is_power[xi]:
                # cells (1,0): residues 0 and 1 are solvable against any y
                continue
            x = int(live[xi])
            Kx = None
            for lo in range(0, nl, ychunk):
                hi = min(nl, lo + ychunk)
                cy = hi - lo
                Afull = np.broadcast_to(P[xi][None, :, None], (cy, L, L)).ravel()
                Bfull = np.broadcast_to(P[lo:hi, None, :], (cy, L, L)).ravel()
                grid = np.asarray(Q.mul_many(Afull, Bfull), dtype=np.int64).reshape(
                    cy, L, L
                )
                solv = np.isin(grid, solvset)
                R1 = solv.any(axis=1).reshape(cy, L // rmod, rmod).any(axis=1)
                R2 = solv.any(axis=2).reshape(cy, L // rmod, rmod).any(axis=1)
                cok = (R1 & np.roll(R2, -1, axis=1)).any(axis=1)
                if cok.all():
                    continue
                if Kx is None:
                    Kx = np.unique(np.asarray(G.comm_many(kerq, np.asarray([x]))))
                for yj in np.flatnonzero(~cok):
                    y = int(live[lo + yj])
                    Ky = np.unique(np.asarray(G.comm_many(kerq, np.asarray([y]))))
                    if _special_pair_escapes(
                        G, grid[yj], solv[yj], gwit, Kx, Ky, x, y, rmod
                    ):
                        continue
                    return Verdict(False, {"q": q, "x": x, "y": y})
    return Verdict(True, {})


# ---------------------------------------------------------------------------
# the filter of embeddable varieties


def embeddability_filter_generator(am: Amalgam, kind: str):
    """Principal generator of the varieties where the amalgam embeds.

    Scans the finite divisor sublattice spanned by the joint exponent,
    then extends by the periodicity of the criteria in m and n.  Returns
    the generating variety, or the string "empty".
    """
    if kind not in ("weak", "strong"):
        raise ValueError("kind must be 'weak' or 'strong'")
    checker = check_weak if kind == "weak" else check_strong
    E = _joint_exponent(am.A, am.B)
    base = join(minimal_variety(am.A), minimal_variety(am.B))
    axis = sorted(set(divisors(E)) | {0})
    members = []
    for m in axis:
        for n in axis:
            if not is_valid_pair(m, n):
                continue
            w = Variety(m, n)
            if not leq(base, w):
                continue
            if checker(am, w):
                members.append(w)
    if not members:
        return "empty"
    gn = 0
    for w in members:
        gn = math.gcd(gn, w.n)
    if gn == 0:
        return Variety(0, 0)
    L = math.lcm(E, gn)
    gen = Variety(L, gn) if is_valid_pair(L, gn) else Variety(2 * L, gn)
    for w in members:
        assert leq(gen, w), "generator must sit below every member"
    return gen


# ---------------------------------------------------------------------------
# prescribed power-commutator part


def _invariant_normal_form(factors) -> list[int]:
    primes: dict[int, list[int]] = {}
    for d in factors:
        for p, e in factorize(int(d)).items():
            primes.setdefault(p, []).append(e)
    if not primes:
        return []
    width = max(len(v) for v in primes.values())
    chain = [1] * width
    for p, es in primes.items():
        for i, e in enumerate(sorted(es, reverse=True)):
            chain[width - 1 - i] *= p**e
    return [c for c in chain if c > 1]


def _two_generator_piece(d: int) -> PcGroup:
    pres = PcPresentation(
        ("u", "v", "w"), (d, d, d), {}, {(1, 0): ((2, 1),)}
    )
    return PcGroup(pres, name=f"E{d}")


def _metacyclic_piece(p: int, a: int, i: int) -> PcGroup:
    # u of order p^(a+i) via u^(p^i) = w; [u,v] = w = u^(p^i)
    pres = PcPresentation(
        ("v", "u", "w"),
        (p**a, p**i, p**a),
        {1: ((2, 1),)},
        {(1, 0): ((2, 1),)},
    )
    return PcGroup(pres, name=f"M{p}_{a}_{i}")


def construct_with_center(target_factors, v: Variety) -> FiniteGroup:
    """A member of (m,n) whose power-commutator part realizes the target.

    For m > 0 the output also has centre equal to that part.  Built one
    cyclic summand at a time: a two-generator piece when the summand
    exponent stays within n, a split metacyclic piece above it.
    """
    facs = [int(d) for d in target_factors]
    if any(d < 1 for d in facs):
        raise PreconditionError("cyclic factors must be positive", witness={})
    facs = [d for d in facs if d > 1]
    m, n = v.m, v.n
    if not facs:
        return trivial_group()
    if m == 0:
        if n == 0:
            pieces = [_two_generator_piece(d) for d in facs]
            G = pieces[0]
            for piece in pieces[1:]:
                G = direct_product(G, piece)
        else:
            G = abelian_group([n * d for d in facs])
        _require(v, G, "constructed group")
        _, _, both = verbal_subgroups(G, n)
        part = rebuild_as_pcgroup(G, with_generators(both), "V")[0]
        got = invariant_factors(part).factors
        assert got == _invariant_normal_form(facs), "power-commutator part mismatch"
        return G
    beta = exponent_constants(v, 1)[0]
    lead = math.lcm(*facs)
    if beta % lead != 0:
        raise PreconditionError(
            "target exponent exceeds lcm(m/n, n)",
            witness={"exponent": lead, "bound": beta},
        )
    pieces = []
    for d in facs:
        for p, i in factorize(d).items():
            a = 0
            nn = n
            while nn % p == 0:
                nn //= p
                a += 1
            b = 0
            mm = m
            while mm % p == 0:
                mm //= p
                b += 1
            b -= a
            if i <= a:
                if p == 2 and b < 1:
                    raise PreconditionError(
                        "even summand within n needs spare exponent in m",
                        witness={"p": p, "i": i, "a": a, "b": b},
                    )
                pieces.append(_two_generator_piece(p**i))
            else:
                if b < i:
                    raise PreconditionError(
                        "summand beyond n needs ord_p(m) >= ord_p(n) + i",
                        witness={"p": p, "i": i, "a": a, "b": b},
                    )
                pieces.append(_metacyclic_piece(p, a, i))
    G = pieces[0]
    for piece in pieces[1:]:
        G = direct_product(G, piece)
    _require(v, G, "constructed group")
    Z = center(G)
    _, _, both = verbal_subgroups(G, n)
    assert np.array_equal(Z.elements, both.elements), "centre must equal the part"
    got = invariant_factors(rebuild_as_pcgroup(G, with_generators(Z), "Z")[0]).factors
    assert got == _invariant_normal_form(facs), "centre has the wrong invariants"
    return G


# ---------------------------------------------------------------------------
# realizing a central element as a commutator of fresh centralizing elements


@dataclass(frozen=True, eq=False)
class CentralCommutatorRealization:
    group: FiniteGroup
    r1: GroupElement
    r2: GroupElement
    embedding: Homomorphism

    def __iter__(self):
        yield self.group
        yield self.r1
        yield self.r2


def adjoin_commutator_realization(G: FiniteGroup, g, v: Variety) -> CentralCommutatorRealization:
    """Extend G so the given central element becomes [r1, r2].

    r1, r2 are fresh elements centralizing the image of G; the extension
    is the central product of G with a two-generator group glued along
    <g> = <[r1,r2]>.
    """
    g = _tok(g)
    _require(v, G, "group")
    if not center(G).contains_one(g):
        raise PreconditionError("element is not central", witness={"g": int(g)})
    if v.n > 0 and G.pw(g, v.n) != G.identity_token:
        raise PreconditionError(
            "element exponent must divide n", witness={"g": int(g), "n": v.n}
        )
    q = element_order(G.element(g))
    if q == 1:
        e = G.element(G.identity_token)
        return CentralCommutatorRealization(G, e, e, identity_homomorphism(G))
    pres = PcPresentation(("r", "s", "w"), (q, q, q), {}, {(1, 0): ((2, 1),)})
    H = PcGroup(pres, name="R")
    ell0, ell1, w = H.generator_tokens()
    iso = {G.pw(g, j): H.pw(w, j) for j in range(1, q)}
    K, embG, embH = central_product(G, H, iso)
    r1 = K.element(embH.apply_one(ell1))
    r2 = K.element(embH.apply_one(ell0))
    assert K.cm(r1.token, r2.token) == embG.apply_one(g)
    for t in G.generator_tokens():
        img = embG.apply_one(int(t))
        assert K.cm(r1.token, img) == K.identity_token
        assert K.cm(r2.token, img) == K.identity_token
    _require(v, K, "extension")
    return CentralCommutatorRealization(K, r1, r2, embG)


# ---------------------------------------------------------------------------
# sampled identity behind the root criteria


def verify_root_commutator_identity(
    K: FiniteGroup, v: Variety, x, y, q: int, trials: int = 10, seed: int = 0
):
    """Spot-check [r,s]^(q(c-b)) = [g1,x][g2,y] when roots r, s exist.

    r, s are q-th roots of x, y modulo K^nK'; (a,b) and (c,d) run over
    all exponent pairs solving the two power congruences for sampled g1,
    g2.  Returns None when no root pair exists (hypothesis not met).
    """
    x, y = _tok(x), _tok(y)
    _require(v, K, "group")
    _, _, both = verbal_subgroups(K, v.n)
    toks = np.sort(np.asarray(K.all_tokens(), dtype=np.int64))
    ipowq = np.asarray(K.inv_many(K.pow_many(toks, q)))

    def root_of(t):
        mask = both.contains(np.asarray(K.mul_many(ipowq, np.asarray([t]))))
        return int(toks[np.argmax(mask)]) if mask.any() else None

    r = root_of(x)
    s = root_of(y)
    if r is None or s is None:
        return None
    Q, proj = quotient(K, both)
    L = math.lcm(exponent(Q), v.n // q) if v.n else exponent(Q)
    xp = _token_powers(Q, proj.apply_one(x), L)
    yp = _token_powers(Q, proj.apply_one(y), L)
    grid = np.asarray(Q.mul_many(np.repeat(xp, L), np.tile(yp, L)), dtype=np.int64)
    base = K.cm(r, s)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        g1, g2 = (int(t) for t in rng.choice(toks, size=2))
        t1 = int(np.asarray(Q.pow_many(np.asarray([proj.apply_one(g1)]), q))[0])
        t2 = int(np.asarray(Q.pow_many(np.asarray([proj.apply_one(g2)]), q))[0])
        cells1 = np.flatnonzero(grid == t1)
        cells2 = np.flatnonzero(grid == t2)
        if not len(cells1) or not len(cells2):
            continue
        rhs = K.mul(K.cm(g1, x), K.cm(g2, y))
        for c1 in cells1:
            b = int(c1) % L
            for c2 in cells2:
                c = int(c2) // L
                if K.pw(base, q * (c - b)) != rhs:
                    return False
    return True


__all__ = [
    "Amalgam",
    "CentralCommutatorRealization",
    "Verdict",
    "abelian_special_base",
    "abelian_strong_base",
    "adjoin_commutator_realization",
    "can_adjoin_root",
    "can_adjoin_two_roots",
    "check_strong",
    "check_strong_special_case",
    "check_weak",
    "construct_with_center",
    "dominion",
    "embeddability_filter_generator",
    "is_special_base",
    "is_strong_base",
    "special_amalgam",
    "verify_root_commutator_identity",
]
