"""Finite coproducts in the exponent varieties, and the oracles built on them.

The coproduct of two class <= 2 groups G and K inside the variety (m,n)
has a normal form g*k*t where t lives in the tensor square
(G/G^nG') (x) (K/K^nK').  Realizing that normal form directly gives an
exact finite model, which is the ground truth for every embeddability,
dominion, and root-adjunction criterion elsewhere in the package.
"""

from __future__ import annotations

import numpy as np

from .abelian import TensorGrid, section_finab
from .core import (
    FiniteGroup,
    Homomorphism,
    QuotientGroup,
    Subgroup,
    _as_token_array,
    _tok,
    binom2,
    check_budget,
    cyclic_group,
    element_order,
    generating_set,
    intersection,
    normal_closure,
    quotient,
    subgroup_closure,
    verbal_subgroups,
)
from .errors import Nil2Error, PreconditionError
from .variety import Variety, contains


def _require_member(v: Variety, G: FiniteGroup, role: str) -> None:
    verdict = contains(v, G)
    if not verdict:
        raise PreconditionError(
            f"{role} does not lie in the variety {v}", witness=verdict.witness
        )


# ---------------------------------------------------------------------------
# the coproduct group


class CoproductGroup(FiniteGroup):
    """G coproduct K in the variety (m,n), on tokens (g, k, t).

    Token layout: (gi * |K| + ki) * |T| + ti over dense factor indices,
    so sparse-token factors (quotients, nested coproducts) work.  The
    t part is a token of the tensor grid group T; the mixing term of the
    product realizes the commutator [k, g] of the two injected factors.
    The orientation sign of that term is not hard-coded: construction
    tries both and locks the one passing the associativity and
    commutator-orientation checks.
    """

    def __init__(self, G: FiniteGroup, K: FiniteGroup, v: Variety, name: str | None = None):
        _require_member(v, G, "left factor")
        _require_member(v, K, "right factor")
        self.left = G
        self.right = K
        self.variety = v
        self.name = name or f"{getattr(G, 'name', 'G')}*{getattr(K, 'name', 'K')}"

        _, _, gboth = verbal_subgroups(G, v.n)
        _, _, kboth = verbal_subgroups(K, v.n)
        fa_g, self._qg, projg = section_finab(G, gboth)
        fa_k, self._qk, projk = section_finab(K, kboth)
        self._grid = TensorGrid(fa_g, fa_k)
        self.cartesian = self._grid
        self.T = self._grid.group

        self._gtoks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
        self._ktoks = np.sort(np.asarray(K.all_tokens(), dtype=np.int64))
        self._ng = int(G.order)
        self._nk = int(K.order)
        self._nt = int(self.T.order)
        self.order = self._ng * self._nk * self._nt
        check_budget(self.order, "coproduct construction")

        # coordinate row of the class of each factor element, aligned with
        # the dense index into the sorted token list
        self._gcoords = fa_g.to_coords(projg(self._gtoks))
        self._kcoords = fa_k.to_coords(projk(self._ktoks))

        self._gid = int(np.searchsorted(self._gtoks, G.identity_token))
        self._kid = int(np.searchsorted(self._ktoks, K.identity_token))
        self.identity_token = self._join(
            np.asarray([self._gid]), np.asarray([self._kid]),
            np.asarray([self.T.identity_token]),
        )[0]

        self._sign = 0
        self._lock_sign()

        self.inject_left = self._build_injection(side="left")
        self.inject_right = self._build_injection(side="right")

    # -- token plumbing

    def _split(self, tokens):
        t = _as_token_array(tokens)
        gi, rem = np.divmod(t, self._nk * self._nt)
        ki, ti = np.divmod(rem, self._nt)
        return gi, ki, ti

    def _join(self, gi, ki, ti):
        return (gi * self._nk + ki) * self._nt + ti

    def _gidx(self, raw):
        return np.searchsorted(self._gtoks, np.asarray(raw, dtype=np.int64))

    def _kidx(self, raw):
        return np.searchsorted(self._ktoks, np.asarray(raw, dtype=np.int64))

    @staticmethod
    def _align(a, b):
        a = _as_token_array(a)
        b = _as_token_array(b)
        if len(a) == 1 and len(b) > 1:
            a = np.broadcast_to(a, b.shape)
        elif len(b) == 1 and len(a) > 1:
            b = np.broadcast_to(b, a.shape)
        return a, b

    # -- arithmetic

    def _mix(self, gi, ki):
        """Token of the mixing element for right g-part gi, left k-part ki."""
        raw = self._grid.bilinear(self._gcoords[gi], self._kcoords[ki])
        if self._sign < 0:
            raw = self.T.inv_many(raw)
        return raw

    def mul_many(self, a, b):
        a, b = self._align(a, b)
        g1, k1, t1 = self._split(a)
        g2, k2, t2 = self._split(b)
        gg = self._gidx(self.left.mul_many(self._gtoks[g1], self._gtoks[g2]))
        kk = self._kidx(self.right.mul_many(self._ktoks[k1], self._ktoks[k2]))
        tt = self.T.mul_many(self.T.mul_many(t1, t2), self._mix(g2, k1))
        return self._join(gg, kk, tt)

    def pow_many(self, a, s: int):
        gi, ki, ti = self._split(a)
        gg = self._gidx(self.left.pow_many(self._gtoks[gi], s))
        kk = self._kidx(self.right.pow_many(self._ktoks[ki], s))
        # x^s = (g^s, k^s, s*t + C(s,2)*mix(g,k)); exact integer binomial
        tt = self.T.mul_many(
            self.T.pow_many(ti, s), self.T.pow_many(self._mix(gi, ki), binom2(s))
        )
        return self._join(gg, kk, tt)

    def inv_many(self, a):
        return self.pow_many(a, -1)

    def comm_many(self, a, b):
        a, b = self._align(a, b)
        ab = self.mul_many(a, b)
        ba = self.mul_many(b, a)
        return self.mul_many(self.inv_many(ba), ab)

    def generator_tokens(self):
        return self._gen_tokens

    def all_tokens(self):
        return np.arange(self.order, dtype=np.int64)

    def describe_token(self, token: int) -> str:
        gi, ki, ti = self._split(np.asarray([token]))
        g = self.left.describe_token(int(self._gtoks[gi[0]]))
        k = self.right.describe_token(int(self._ktoks[ki[0]]))
        return f"({g}|{k}|t{int(ti[0])})"

    # -- construction-time verification

    def _iota_token(self, side: str, raw: int) -> int:
        if side == "left":
            gi = np.asarray([int(np.searchsorted(self._gtoks, raw))])
            ki = np.asarray([self._kid])
        else:
            gi = np.asarray([self._gid])
            ki = np.asarray([int(np.searchsorted(self._ktoks, raw))])
        return int(self._join(gi, ki, np.asarray([self.T.identity_token]))[0])

    def _lock_sign(self):
        lgens = list(self.left.generator_tokens())
        rgens = list(self.right.generator_tokens())
        rng = np.random.default_rng(0)
        sample = rng.integers(0, self.order, size=(48, 3))
        for cand in (-1, +1):
            self._sign = cand
            if self._sign_consistent(lgens, rgens, sample):
                self._gen_tokens = tuple(
                    self._iota_token("left", g) for g in lgens
                ) + tuple(self._iota_token("right", k) for k in rgens)
                return
        raise Nil2Error("no orientation of the mixing term is consistent")

    def _sign_consistent(self, lgens, rgens, sample) -> bool:
        # commutator of the injected generators must be the raw tensor token
        for g in lgens:
            ig = self._iota_token("left", g)
            gi = np.asarray([int(np.searchsorted(self._gtoks, g))])
            for k in rgens:
                ik = self._iota_token("right", k)
                ki = np.asarray([int(np.searchsorted(self._ktoks, k))])
                want = int(self._grid.bilinear(self._gcoords[gi], self._kcoords[ki])[0])
                have = self.cm(ig, ik)
                gi0, ki0, ti0 = self._split(np.asarray([have]))
                if int(gi0[0]) != self._gid or int(ki0[0]) != self._kid:
                    return False
                if int(ti0[0]) != want:
                    return False
                # injections must behave as homomorphisms around the mix
                if self.mul(ig, ik) != self._join(
                    gi, ki, np.asarray([self.T.identity_token])
                )[0]:
                    return False
        x, y, z = sample[:, 0], sample[:, 1], sample[:, 2]
        if not np.array_equal(
            self.mul_many(self.mul_many(x, y), z),
            self.mul_many(x, self.mul_many(y, z)),
        ):
            return False
        return True

    def _build_injection(self, side: str) -> Homomorphism:
        factor = self.left if side == "left" else self.right
        toks = self._gtoks if side == "left" else self._ktoks
        arr = np.zeros(int(toks[-1]) + 1, dtype=np.int64)
        dense = np.arange(len(toks), dtype=np.int64)
        if side == "left":
            comp = self._join(dense, np.full_like(dense, self._kid),
                              np.full_like(dense, self.T.identity_token))
        else:
            comp = self._join(np.full_like(dense, self._gid), dense,
                              np.full_like(dense, self.T.identity_token))
        arr[toks] = comp
        gi = {int(g): int(arr[int(g)]) for g in factor.generator_tokens()}
        return Homomorphism(factor, self, gi, _premapped=arr, verify=True)


def coproduct_mn(G: FiniteGroup, K: FiniteGroup, v: Variety,
                 name: str | None = None) -> CoproductGroup:
    """Coproduct of G and K in the variety, with verified injections."""
    return CoproductGroup(G, K, v, name=name)


# ---------------------------------------------------------------------------
# universal property


def factor_through(cp: CoproductGroup, f: Homomorphism, h: Homomorphism) -> Homomorphism:
    """The unique map out of the coproduct agreeing with f and h.

    Sends (g,k,t) to f(g)*h(k)*phi(t) where phi images an elementary
    tensor class(g) (x) class(k) to [f(g), h(k)].
    """
    if f.domain is not cp.left or h.domain is not cp.right:
        raise PreconditionError("maps do not start at the coproduct factors", witness={})
    M = f.codomain
    if h.codomain is not M:
        raise PreconditionError("maps land in different groups", witness={})

    grid = cp._grid
    # images of the elementary tensors; the grid order bound is exactly the
    # variety law the target must satisfy for the map to be well-defined
    basis_imgs = []
    for (i, j, d) in grid.pairs:
        bg = int(grid.left.basis[i])   # a class representative token in G
        bk = int(grid.right.basis[j])
        cb = M.cm(f.apply_one(bg), h.apply_one(bk))
        if M.pw(cb, d) != M.identity_token:
            raise PreconditionError(
                "target violates the variety law needed by the cartesian",
                witness={"pair": (i, j), "order": d},
            )
        basis_imgs.append(cb)

    nt = cp._nt
    exps = cp.T.decode(np.arange(nt, dtype=np.int64))
    mid = np.full(nt, M.identity_token, dtype=np.int64)
    for pos, cb in enumerate(basis_imgs):
        col = exps[:, pos]
        for c in range(1, int(grid.pairs[pos][2])):
            sel = col == c
            if sel.any():
                pw = M.pw(cb, c)
                mid[sel] = np.asarray(M.mul_many(mid[sel], np.asarray([pw])))

    all_t = np.arange(cp.order, dtype=np.int64)
    gi, ki, ti = cp._split(all_t)
    img = M.mul_many(
        M.mul_many(f(cp._gtoks[gi]), h(cp._ktoks[ki])), mid[ti]
    )
    arr = np.zeros(cp.order, dtype=np.int64)
    arr[all_t] = img
    gen_imgs = {}
    for g in cp.left.generator_tokens():
        gen_imgs[cp._iota_token("left", int(g))] = f.apply_one(int(g))
    for k in cp.right.generator_tokens():
        gen_imgs[cp._iota_token("right", int(k))] = h.apply_one(int(k))
    psi = Homomorphism(cp, M, gen_imgs, _premapped=arr, verify=True)

    if not np.array_equal(psi(cp.inject_left(cp._gtoks)), f(cp._gtoks)):
        raise Nil2Error("factored map disagrees with the left injection")
    if not np.array_equal(psi(cp.inject_right(cp._ktoks)), h(cp._ktoks)):
        raise Nil2Error("factored map disagrees with the right injection")
    return psi


# ---------------------------------------------------------------------------
# amalgamated coproducts


class AmalgamatedCoproduct:
    """Pushout of an amalgam over its core inside the variety.

    Quotient of the plain coproduct by the normal closure of the relators
    identifying the two embedded copies of the core; carries the base
    coproduct, the quotient group, and the canonical maps from both
    factors and the core.
    """

    def __init__(self, am, v: Variety):
        _require_member(v, am.A, "left factor")
        _require_member(v, am.B, "right factor")
        _require_member(v, am.D, "core")
        self.amalgam = am
        self.variety = v
        cp = coproduct_mn(am.A, am.B, v)
        self.base = cp
        rel = []
        for d in am.D.generator_tokens():
            ta = cp.inject_left.apply_one(am.phiA.apply_one(int(d)))
            tb = cp.inject_right.apply_one(am.phiB.apply_one(int(d)))
            rel.append(cp.mul(ta, cp.inv(tb)))
        self.relator_closure = normal_closure(cp, rel)
        self.group, self.proj = quotient(cp, self.relator_closure)
        self.muA = self.proj.compose(cp.inject_left)
        self.muB = self.proj.compose(cp.inject_right)
        self.muD = self.muA.compose(am.phiA)
        other = self.muB.compose(am.phiB)
        dtoks = np.sort(np.asarray(am.D.all_tokens(), dtype=np.int64))
        if not np.array_equal(self.muD(dtoks), other(dtoks)):
            raise Nil2Error("canonical maps disagree on the core")
        verdict = contains(v, self.group)
        if not verdict:
            raise Nil2Error(
                f"amalgamated coproduct left the variety: {verdict.witness}"
            )


def amalgamated_coproduct(am, v: Variety) -> AmalgamatedCoproduct:
    return AmalgamatedCoproduct(am, v)


# ---------------------------------------------------------------------------
# oracles


def oracle_weak(am, v: Variety) -> bool:
    """Ground truth for weak embeddability: both canonical maps injective."""
    ac = AmalgamatedCoproduct(am, v)
    return ac.muA.is_injective() and ac.muB.is_injective()


def oracle_strong(am, v: Variety) -> bool:
    """Ground truth for strong embeddability: weak plus exact core overlap."""
    ac = AmalgamatedCoproduct(am, v)
    if not (ac.muA.is_injective() and ac.muB.is_injective()):
        return False
    overlap = intersection(ac.muA.image_subgroup(), ac.muB.image_subgroup())
    core = ac.muD.image_subgroup()
    return np.array_equal(overlap.elements, core.elements)


def oracle_dominion(G: FiniteGroup, H: Subgroup, v: Variety) -> Subgroup:
    """Ground truth dominion of H in G over the variety.

    Amalgamates two copies of G over H and pulls the image overlap back
    through the first canonical map; cross-checked against the equalizer
    of the two maps, which must be the same set.
    """
    _require_member(v, G, "group")
    if H.owner is not G:
        raise PreconditionError("subgroup belongs to a different group", witness={})
    cp = coproduct_mn(G, G, v)
    hgens = list(H.gen_tokens) if H.gen_tokens else generating_set(H)
    rel = []
    for htok in hgens:
        ta = cp.inject_left.apply_one(int(htok))
        tb = cp.inject_right.apply_one(int(htok))
        rel.append(cp.mul(ta, cp.inv(tb)))
    N = normal_closure(cp, rel)
    _, proj = quotient(cp, N)
    psi1 = proj.compose(cp.inject_left)
    psi2 = proj.compose(cp.inject_right)
    gtoks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
    im1 = psi1(gtoks)
    pullback = gtoks[psi2.image_subgroup().contains(im1)]
    equalizer = gtoks[im1 == psi2(gtoks)]
    if not np.array_equal(pullback, equalizer):
        raise Nil2Error("dominion pullback and equalizer disagree")
    dom = Subgroup(G, (), pullback)
    closed = subgroup_closure(G, [int(t) for t in pullback])
    if not np.array_equal(closed.elements, dom.elements):
        raise Nil2Error("dominion element set is not a subgroup")
    if not np.all(dom.contains(H.elements)):
        raise Nil2Error("dominion lost part of the subgroup")
    return dom


def _root_cyclic_order(G: FiniteGroup, x: int, q: int, v: Variety) -> int:
    # any q-th root of x in an (m,n)-overgroup has order dividing m when
    # m > 0, and dividing q*ord(x) always
    if v.m > 0:
        return v.m
    return q * element_order(G.element(x))


def oracle_adjoin_root(G: FiniteGroup, x, q: int, v: Variety) -> bool:
    """Ground truth for root adjunction: the universal overgroup candidate
    (coproduct with a cyclic group, one relator) keeps G intact iff some
    overgroup in the variety contains a q-th root of x."""
    _require_member(v, G, "group")
    if q < 1:
        raise PreconditionError("root degree must be >= 1", witness={"q": q})
    xt = _tok(x)
    N = _root_cyclic_order(G, xt, q, v)
    Z = cyclic_group(N, name="R")
    cp = coproduct_mn(G, Z, v)
    t = cp.inject_right.apply_one(Z.generator_tokens()[0])
    gx = cp.inject_left.apply_one(xt)
    rel = [cp.mul(cp.pw(t, q), cp.inv(gx))]
    Ncl = normal_closure(cp, rel)
    _, proj = quotient(cp, Ncl)
    return proj.compose(cp.inject_left).is_injective()


def oracle_adjoin_two_roots(G: FiniteGroup, x, y, q: int, v: Variety) -> bool:
    """Ground truth for simultaneous adjunction of q-th roots of x and y,
    via the coproduct with two cyclic groups and both relators at once."""
    _require_member(v, G, "group")
    if q < 1:
        raise PreconditionError("root degree must be >= 1", witness={"q": q})
    xt, yt = _tok(x), _tok(y)
    Z1 = cyclic_group(_root_cyclic_order(G, xt, q, v), name="R1")
    Z2 = cyclic_group(_root_cyclic_order(G, yt, q, v), name="R2")
    cp1 = coproduct_mn(G, Z1, v)
    cp2 = coproduct_mn(cp1, Z2, v)
    into = cp2.inject_left
    emb_g = into.compose(cp1.inject_left)
    t1 = into.apply_one(cp1.inject_right.apply_one(Z1.generator_tokens()[0]))
    t2 = cp2.inject_right.apply_one(Z2.generator_tokens()[0])
    rel = [
        cp2.mul(cp2.pw(t1, q), cp2.inv(emb_g.apply_one(xt))),
        cp2.mul(cp2.pw(t2, q), cp2.inv(emb_g.apply_one(yt))),
    ]
    Ncl = normal_closure(cp2, rel)
    _, proj = quotient(cp2, Ncl)
    return proj.compose(emb_g).is_injective()
