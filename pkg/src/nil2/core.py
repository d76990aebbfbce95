"""Finite groups of nilpotency class at most 2.

Groups are given by polycyclic presentations: generators g_1..g_k with
orders r_i, power relations g_i^{r_i} = tail, and commutator relations
g_j g_i = g_i g_j * [g_j, g_i] for j > i.  Every element has a unique
normal form g_1^{e_1} ... g_k^{e_k} with 0 <= e_i < r_i, stored as a
dense mixed-radix token in [0, |G|).  All group arithmetic is exposed
both element-wise and as vectorized operations on token arrays.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import PreconditionError, PresentationError, ResourceLimitError

DEFAULT_MAX_ELEMENTS = 2**20
VECTOR_LIMIT = 2**24  # int64 arithmetic stays overflow-free below this order
HARD_LIMIT = 2**62
SLOW_CAP_DEFAULT = 4096
_ASSOC_SAMPLE = 10_000
_EXHAUSTIVE_CAP = 4096


def max_elements() -> int:
    raw = os.environ.get("NIL2_MAX_ELEMENTS", "")
    try:
        return int(raw) if raw else DEFAULT_MAX_ELEMENTS
    except ValueError:
        return DEFAULT_MAX_ELEMENTS


def slow_cap() -> int:
    raw = os.environ.get("NIL2_SLOW_CAP", "")
    try:
        return int(raw) if raw else SLOW_CAP_DEFAULT
    except ValueError:
        return SLOW_CAP_DEFAULT


def check_budget(needed: int, what: str = "construction") -> None:
    budget = max_elements()
    if needed > budget:
        raise ResourceLimitError(
            f"{what} needs {needed} elements, budget is {budget} "
            f"(raise NIL2_MAX_ELEMENTS to override)",
            needed=needed,
            budget=budget,
        )


# ---------------------------------------------------------------------------
# small integer utilities


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n >= 1 as {p: multiplicity}."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n >= 1."""
    ds = [1]
    for p, a in factorize(n).items():
        ds = [d * p**i for d in ds for i in range(a + 1)]
    return sorted(ds)


def prime_power_divisors(n: int) -> list[int]:
    """All p^i > 1 dividing n, sorted."""
    return sorted(p**i for p, a in factorize(n).items() for i in range(1, a + 1))


def binom2(s: int) -> int:
    return s * (s - 1) // 2


def _as_token_array(tokens, dtype=None):
    if isinstance(tokens, np.ndarray):
        return tokens.reshape(-1)
    if isinstance(tokens, GroupElement):
        return np.asarray([tokens.token])
    if np.isscalar(tokens):
        return np.asarray([int(tokens)])
    vals = [_tok(x) for x in tokens]
    return np.asarray(vals, dtype=dtype) if dtype else np.asarray(vals)


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class PcPresentation:
    """Polycyclic data: generator names, orders, and relation tails.

    power_tails[i] gives g_i^{orders[i]} as ((pos, exp), ...) with every
    pos > i; comm_tails[(j, i)] with j > i gives [g_j, g_i] the same way
    (any positions).  Omitted entries mean the trivial tail.
    """

    names: tuple[str, ...]
    orders: tuple[int, ...]
    power_tails: dict[int, tuple[tuple[int, int], ...]] = field(default_factory=dict)
    comm_tails: dict[tuple[int, int], tuple[tuple[int, int], ...]] = field(
        default_factory=dict
    )

    def __post_init__(self):
        k = len(self.names)
        if len(self.orders) != k:
            raise PresentationError("names and orders length mismatch")
        if len(set(self.names)) != k:
            raise PresentationError("duplicate generator names")
        for r in self.orders:
            if r < 1:
                raise PresentationError("generator orders must be >= 1")
        for i, tail in self.power_tails.items():
            if not (0 <= i < k):
                raise PresentationError(f"power tail index {i} out of range")
            for pos, _ in tail:
                if not (i < pos < k):
                    raise PresentationError(
                        f"power tail of generator {i} touches position {pos}; "
                        "tails must use later generators only"
                    )
        for (j, i), tail in self.comm_tails.items():
            if not (0 <= i < j < k):
                raise PresentationError(f"commutator key {(j, i)} must have j > i")
            for pos, _ in tail:
                if not (0 <= pos < k):
                    raise PresentationError("commutator tail position out of range")

    @property
    def ngens(self) -> int:
        return len(self.names)

    def order(self) -> int:
        return math.prod(self.orders)

    def tail_support(self) -> set[int]:
        """Generator positions appearing in any nontrivial tail."""
        seen: set[int] = set()
        for i, tail in self.power_tails.items():
            for pos, ex in tail:
                if ex % self.orders[pos] != 0:
                    seen.add(pos)
        for _, tail in self.comm_tails.items():
            for pos, ex in tail:
                if ex % self.orders[pos] != 0:
                    seen.add(pos)
        return seen

    def noncentral_positions(self) -> set[int]:
        """Positions occurring in some nontrivial commutator relation."""
        out: set[int] = set()
        for (j, i), tail in self.comm_tails.items():
            if any(ex % self.orders[pos] != 0 for pos, ex in tail):
                out.add(j)
                out.add(i)
        return out

    def is_inert(self) -> bool:
        """True when every tail letter is central in the presented group.

        This is the shape the closed-form collection formulas need: tail
        letters never spawn new commutators during a reduction pass.
        """
        return not (self.tail_support() & self.noncentral_positions())


def _tail_vector(tail, k):
    v = np.zeros(k, dtype=np.int64)
    for pos, ex in tail:
        v[pos] += ex
    return v


# ---------------------------------------------------------------------------
# elements


class GroupElement:
    """Thin wrapper around (group, token) with operator sugar."""

    __slots__ = ("group", "token")

    def __init__(self, group: "FiniteGroup", token: int):
        self.group = group
        self.token = int(token)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if other.group is not self.group:
            raise ValueError("elements of different groups")
        return GroupElement(self.group, self.group.mul(self.token, other.token))

    def __pow__(self, s: int) -> "GroupElement":
        return GroupElement(self.group, self.group.pw(self.token, s))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group.inv(self.token))

    def comm(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.group, self.group.cm(self.token, other.token))

    def order(self) -> int:
        return element_order(self)

    def is_identity(self) -> bool:
        return self.token == self.group.identity_token

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupElement)
            and other.group is self.group
            and other.token == self.token
        )

    def __hash__(self) -> int:
        return hash((id(self.group), self.token))

    def __repr__(self) -> str:
        return f"<{self.group.describe_token(self.token)}>"


def _tok(x) -> int:
    return x.token if isinstance(x, GroupElement) else int(x)


# ---------------------------------------------------------------------------
# abstract group interface


class FiniteGroup:
    """Common interface: dense integer tokens plus vectorized arithmetic.

    Subclasses implement mul_many/inv_many/pow_many/comm_many on token
    arrays and expose order, identity_token and generator_tokens.
    Scalar convenience wrappers live here.
    """

    order: int
    identity_token: int

    def mul_many(self, a, b):
        raise NotImplementedError

    def inv_many(self, a):
        raise NotImplementedError

    def pow_many(self, a, s):
        raise NotImplementedError

    def comm_many(self, a, b):
        raise NotImplementedError

    def generator_tokens(self) -> tuple[int, ...]:
        raise NotImplementedError

    def all_tokens(self) -> np.ndarray:
        raise NotImplementedError

    def describe_token(self, token: int) -> str:
        return f"t{token}"

    # scalar wrappers

    def mul(self, a, b) -> int:
        return int(self.mul_many(np.asarray([_tok(a)]), np.asarray([_tok(b)]))[0])

    def inv(self, a) -> int:
        return int(self.inv_many(np.asarray([_tok(a)]))[0])

    def pw(self, a, s: int) -> int:
        return int(self.pow_many(np.asarray([_tok(a)]), s)[0])

    def cm(self, a, b) -> int:
        return int(self.comm_many(np.asarray([_tok(a)]), np.asarray([_tok(b)]))[0])

    def element(self, token) -> GroupElement:
        return GroupElement(self, _tok(token))

    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_token)

    def generators(self) -> list[GroupElement]:
        return [GroupElement(self, t) for t in self.generator_tokens()]

    def conj_many(self, a, b):
        """a^b = b^-1 a b, vectorized."""
        a = _as_token_array(a)
        b = _as_token_array(b)
        if len(b) == 1 and len(a) > 1:
            b = np.broadcast_to(b, a.shape)
        return self.mul_many(self.mul_many(self.inv_many(b), a), b)


# ---------------------------------------------------------------------------
# the concrete pc-group


class PcGroup(FiniteGroup):
    """Group realized from a PcPresentation.

    Inert presentations use closed-form collection on exponent vectors;
    everything else goes through a word collector with a hard size cap.
    Construction always re-verifies the defining relations, centrality
    of all tail letters, the class-2 law, and associativity (through the
    generator-triple criterion up to 4096 elements, sampled above).
    """

    def __init__(self, pres: PcPresentation, name: str = "G", skip_checks: bool = False):
        self.pres = pres
        self.name = name
        self.orders_arr = np.asarray(pres.orders, dtype=np.int64)
        self.order = pres.order()
        if self.order >= HARD_LIMIT:
            raise ResourceLimitError(
                f"group order {self.order} exceeds the 2^62 token limit"
            )
        check_budget(self.order, f"group {name}")
        self.identity_token = 0
        k = pres.ngens
        self._k = k
        # mixed-radix place values: token = sum exps[i] * place[i]
        place = np.ones(k, dtype=object)
        for i in range(k - 2, -1, -1):
            place[i] = place[i + 1] * pres.orders[i + 1]
        self._exact = self.order > VECTOR_LIMIT
        self._dtype = object if self._exact else np.int64
        self._place = place if self._exact else place.astype(np.int64)
        self._fast = pres.is_inert()
        if self._fast:
            self._setup_fast()
        else:
            self._setup_slow()
        self._gen_tokens = tuple(
            int(self._place[i]) if pres.orders[i] > 1 else 0 for i in range(k)
        )
        if not skip_checks:
            self._verify_construction()

    # -- encoding

    def decode(self, tokens) -> np.ndarray:
        """Token array -> (N, k) exponent matrix."""
        t = np.asarray(tokens, dtype=self._dtype).reshape(-1)
        out = np.zeros((t.shape[0], self._k), dtype=self._dtype)
        rem = t.copy()
        for i in range(self._k):
            out[:, i] = rem // self._place[i]
            rem = rem % self._place[i]
        return out

    def encode(self, exps) -> np.ndarray:
        E = np.asarray(exps, dtype=self._dtype)
        return (E * self._place[None, :]).sum(axis=1)

    def exps_of(self, token) -> tuple[int, ...]:
        return tuple(int(v) for v in self.decode([_tok(token)])[0])

    def from_exps(self, exps) -> int:
        E = np.asarray([list(exps)], dtype=self._dtype)
        kernels.reduce_exps(E, self.orders_arr.astype(self._dtype), self._pt_matrix, int(self.order))
        return int(self.encode(E)[0])

    def describe_token(self, token: int) -> str:
        exps = self.exps_of(token)
        parts = [
            f"{self.pres.names[i]}^{e}" if e != 1 else self.pres.names[i]
            for i, e in enumerate(exps)
            if e != 0
        ]
        return f"{self.name}:" + ("*".join(parts) if parts else "e")

    # -- fast path

    def _setup_fast(self):
        k = self._k
        pres = self.pres
        self._pt_matrix = np.zeros((k, k), dtype=np.int64)
        for i, tail in pres.power_tails.items():
            self._pt_matrix[i] += _tail_vector(tail, k)
        ct_j, ct_i, ct_rows = [], [], []
        for (j, i), tail in sorted(pres.comm_tails.items()):
            v = _tail_vector(tail, k)
            if (v % self.orders_arr != 0).any():
                ct_j.append(j)
                ct_i.append(i)
                ct_rows.append(v)
        self._ct_j = np.asarray(ct_j, dtype=np.int64)
        self._ct_i = np.asarray(ct_i, dtype=np.int64)
        self._ct_rows = (
            np.asarray(ct_rows, dtype=np.int64)
            if ct_rows
            else np.zeros((0, k), dtype=np.int64)
        )

    def _reduce(self, E):
        kernels.reduce_exps(E, self.orders_arr.astype(self._dtype), self._pt_matrix, int(self.order))
        return E

    @staticmethod
    def _align(a, b):
        a = np.asarray(a).reshape(-1)
        b = np.asarray(b).reshape(-1)
        if len(b) == 1 and len(a) > 1:
            b = np.broadcast_to(b, a.shape)
        elif len(a) == 1 and len(b) > 1:
            a = np.broadcast_to(a, b.shape)
        return a, b

    def mul_many(self, a, b):
        if not self._fast:
            return self._slow_mul_many(a, b)
        a, b = self._align(a, b)
        X = self.decode(a)
        Y = self.decode(b)
        E = X + Y
        if self._ct_j.shape[0]:
            kernels.accum_mul(E, X, Y, self._ct_j, self._ct_i, self._ct_rows, int(self.order))
        return self.encode(self._reduce(E))

    def pow_many(self, a, s: int):
        if not self._fast:
            return self._slow_pow_many(a, s)
        X = self.decode(np.asarray(a).reshape(-1))
        M = int(self.order)
        sm = s % M
        E = X * (sm if self._exact else np.int64(sm))
        if self._ct_j.shape[0]:
            cb = binom2(s) % M  # exact integer binomial, then reduced
            kernels.accum_pow(E, X, cb, self._ct_j, self._ct_i, self._ct_rows, M)
        return self.encode(self._reduce(E))

    def inv_many(self, a):
        if not self._fast:
            return self._slow_inv_many(a)
        return self.pow_many(a, -1)

    def comm_many(self, a, b):
        if not self._fast:
            return self._slow_comm_many(a, b)
        a, b = self._align(a, b)
        X = self.decode(a)
        Y = self.decode(b)
        E = np.zeros_like(X)
        if self._ct_j.shape[0]:
            kernels.accum_comm(E, X, Y, self._ct_j, self._ct_i, self._ct_rows, int(self.order))
        return self.encode(self._reduce(E))

    # -- slow path: run-based collector over the raw presentation

    def _collect_runs(self, runs):
        """Normalize a list of (gen, exp) runs to an exponent vector.

        Tails are spliced in place: g^e -> g^r' tail^q at the run's own
        position, and a transposition u v -> v u [u,v] puts the
        commutator word right after the pair.  [u^a, v^b] = [u,v]^(ab)
        is used, which is exact in class <= 2; the class-2 law is
        checked after construction so other input cannot slip through.
        """
        pres = self.pres
        ptails = self._ptail_words
        ctails = self._ctail_words
        guard = 0
        while True:
            guard += 1
            if guard > 10_000_000:
                raise PresentationError("collector failed to terminate")
            merged: list[tuple[int, int]] = []
            for g, e in runs:
                if merged and merged[-1][0] == g:
                    merged[-1] = (g, merged[-1][1] + e)
                else:
                    merged.append((g, e))
            runs = [(g, e) for g, e in merged if e % pres.orders[g] != 0]
            out = []
            spliced = False
            for idx, (g, e) in enumerate(runs):
                q, rr = divmod(e, pres.orders[g])
                if q:
                    if rr:
                        out.append((g, rr))
                    for pos, ex in ptails.get(g, []):
                        out.append((pos, ex * q))
                    out.extend(runs[idx + 1 :])
                    spliced = True
                    break
                out.append((g, e))
            runs = out
            if spliced:
                continue
            swapped = False
            for idx in range(len(runs) - 1):
                (g1, e1), (g2, e2) = runs[idx], runs[idx + 1]
                if g1 > g2:
                    extra = [
                        (pos, ex * e1 * e2) for pos, ex in ctails.get((g1, g2), [])
                    ]
                    runs = runs[:idx] + [(g2, e2), (g1, e1)] + extra + runs[idx + 2 :]
                    swapped = True
                    break
            if not swapped:
                break
        v = [0] * self._k
        for g, e in runs:
            v[g] = e % pres.orders[g]
        return v

    def _setup_slow(self):
        cap = slow_cap()
        if self.order > cap:
            raise ResourceLimitError(
                f"non-inert presentation of order {self.order} exceeds the "
                f"collector cap {cap} (set NIL2_SLOW_CAP to raise it)",
                needed=self.order,
                budget=cap,
            )
        k = self._k
        pres = self.pres
        self._pt_matrix = np.zeros((k, k), dtype=np.int64)  # unused on this path

        def live(tail):
            return [(pos, ex) for pos, ex in tail if ex % pres.orders[pos] != 0]

        self._ptail_words = {i: live(t) for i, t in pres.power_tails.items()}
        self._ctail_words = {ji: live(t) for ji, t in pres.comm_tails.items()}
        M = self.order
        exps_list = []
        for token in range(M):
            rem = token
            v = []
            for i in range(k):
                v.append(rem // int(self._place[i]))
                rem = rem % int(self._place[i])
            exps_list.append(v)
        self._exps_list = exps_list
        gen_cols = np.zeros((k, M), dtype=np.int64)
        for g in range(k):
            for token in range(M):
                runs = [(i, e) for i, e in enumerate(exps_list[token]) if e] + [(g, 1)]
                w = self._collect_runs(runs)
                gen_cols[g, token] = sum(w[i] * int(self._place[i]) for i in range(k))
        self._gen_cols = gen_cols
        inv_tab = np.zeros(M, dtype=np.int64)
        for token in range(M):
            runs = [(i, -e) for i, e in reversed(list(enumerate(exps_list[token]))) if e]
            w = self._collect_runs(runs)
            inv_tab[token] = sum(w[i] * int(self._place[i]) for i in range(k))
        self._inv_tab = inv_tab

    def _slow_apply_gen_power(self, tokens, g, e):
        e %= self.pres.orders[g]
        col = self._gen_cols[g]
        out = np.asarray(tokens, dtype=np.int64).copy()
        for _ in range(e):
            out = col[out]
        return out

    def _slow_mul_many(self, a, b):
        a, b = self._align(a, b)
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = np.empty_like(a)
        # group rows by the right factor and fold its normal word
        order_idx = np.argsort(b, kind="stable")
        bs = b[order_idx]
        starts = np.flatnonzero(np.r_[True, bs[1:] != bs[:-1]]) if len(bs) else []
        for s_i, start in enumerate(starts):
            stop = starts[s_i + 1] if s_i + 1 < len(starts) else len(bs)
            token_b = int(bs[start])
            rows = order_idx[start:stop]
            acc = a[rows]
            for g, e in enumerate(self._exps_list[token_b]):
                if e:
                    acc = self._slow_apply_gen_power(acc, g, e)
            out[rows] = acc
        return out

    def _slow_inv_many(self, a):
        return self._inv_tab[np.asarray(a, dtype=np.int64).reshape(-1)]

    def _slow_pow_many(self, a, s: int):
        a = np.asarray(a, dtype=np.int64).reshape(-1)
        e = s % self.order  # element orders divide the group order
        result = np.full_like(a, self.identity_token)
        base = a.copy()
        while e:
            if e & 1:
                result = self._slow_mul_many(result, base)
            base = self._slow_mul_many(base, base)
            e >>= 1
        return result

    def _slow_comm_many(self, a, b):
        a, b = self._align(a, b)
        ia = self._slow_inv_many(a)
        ib = self._slow_inv_many(b)
        return self._slow_mul_many(self._slow_mul_many(ia, ib), self._slow_mul_many(a, b))

    # -- interface bits

    def generator_tokens(self) -> tuple[int, ...]:
        return self._gen_tokens

    def all_tokens(self) -> np.ndarray:
        if self._exact:
            return np.arange(self.order, dtype=object)
        return np.arange(self.order, dtype=np.int64)

    # -- construction self-checks

    def _verify_construction(self):
        k = self._k
        pres = self.pres
        gens = list(self._gen_tokens)
        e_tok = self.identity_token

        def word_token(tail):
            t = e_tok
            for pos, ex in tail:
                t = self.mul(t, self.pw(gens[pos], ex))
            return t

        for i in range(k):
            if self.pw(gens[i], pres.orders[i]) != word_token(pres.power_tails.get(i, ())):
                raise PresentationError(f"power relation for generator {i} fails")
        for j in range(k):
            for i in range(j):
                if self.cm(gens[j], gens[i]) != word_token(pres.comm_tails.get((j, i), ())):
                    raise PresentationError(f"commutator relation {(j, i)} fails")
        if self._fast:
            # the closed-form path relies on tail letters being central
            for pos in pres.tail_support():
                for q in range(k):
                    if self.cm(gens[pos], gens[q]) != e_tok:
                        raise PresentationError(
                            f"tail letter {pres.names[pos]} is not central; "
                            "the closed-form product would be wrong"
                        )
        # class-2 law on generator triples
        for a in range(k):
            for b in range(k):
                c_ab = self.cm(gens[a], gens[b])
                for c in range(k):
                    if self.cm(c_ab, gens[c]) != e_tok:
                        raise PresentationError("presented group is not class <= 2")
        if self.order <= _EXHAUSTIVE_CAP:
            sweep = self.all_tokens()
        else:
            rng = random.Random(7)
            sweep = np.asarray(
                [rng.randrange(self.order) for _ in range(512)], dtype=self._dtype
            )
        if not np.all(self.mul_many(sweep, np.asarray([e_tok])) == sweep):
            raise PresentationError("identity law fails")
        if not np.all(self.mul_many(sweep, self.inv_many(sweep)) == e_tok):
            raise PresentationError("inverse law fails")
        # (x*a)*b == x*(a*b) for all x and generators a, b: right extension
        # closes this to full associativity
        if self.order <= _EXHAUSTIVE_CAP:
            xs = self.all_tokens()
            for a in gens:
                xa = self.mul_many(xs, np.asarray([a]))
                for b in gens:
                    left = self.mul_many(xa, np.asarray([b]))
                    right = self.mul_many(xs, np.asarray([self.mul(a, b)]))
                    if not np.all(left == right):
                        raise PresentationError("associativity fails on generator pairs")
        else:
            rng = random.Random(11)
            draws = [
                np.asarray([rng.randrange(self.order) for _ in range(_ASSOC_SAMPLE)], dtype=self._dtype)
                for _ in range(3)
            ]
            xs, ys, zs = draws
            if not np.all(
                self.mul_many(self.mul_many(xs, ys), zs)
                == self.mul_many(xs, self.mul_many(ys, zs))
            ):
                raise PresentationError("associativity fails on sampled triples")


# ---------------------------------------------------------------------------
# canned constructions


def trivial_group(name: str = "1") -> PcGroup:
    return PcGroup(PcPresentation(names=("e0",), orders=(1,)), name=name)


def cyclic_group(n: int, name: str | None = None) -> PcGroup:
    return PcGroup(
        PcPresentation(names=("g",), orders=(max(n, 1),)),
        name=name or f"C{n}",
    )


def abelian_group(factors, name: str | None = None) -> PcGroup:
    """Direct sum of cyclic groups of the given orders."""
    factors = [int(d) for d in factors if int(d) > 1] or [1]
    names = tuple(f"a{i}" for i in range(len(factors)))
    return PcGroup(
        PcPresentation(names=names, orders=tuple(factors)),
        name=name or "A" + "x".join(str(d) for d in factors),
    )


# ---------------------------------------------------------------------------
# subgroups


class Subgroup:
    """Subgroup of a FiniteGroup, stored as a sorted token array."""

    def __init__(self, owner: FiniteGroup, gen_tokens, elements: np.ndarray):
        self.owner = owner
        self.gen_tokens = tuple(int(_tok(g)) for g in gen_tokens)
        self.elements = np.asarray(elements)
        self.order = int(len(self.elements))

    def contains(self, tokens) -> np.ndarray:
        t = _as_token_array(tokens)
        idx = np.clip(np.searchsorted(self.elements, t), 0, self.order - 1)
        return self.elements[idx] == t

    def contains_one(self, x) -> bool:
        return bool(self.contains(np.asarray([_tok(x)]))[0])

    def dense_index(self, tokens) -> np.ndarray:
        """Position of each token within this subgroup's element list."""
        t = _as_token_array(tokens)
        idx = np.searchsorted(self.elements, t)
        if not np.all(self.elements[np.clip(idx, 0, self.order - 1)] == t):
            raise ValueError("token not in subgroup")
        return idx

    def is_abelian(self) -> bool:
        G = self.owner
        gens = self.gen_tokens or tuple(int(t) for t in self.elements)
        arr = np.asarray(gens)
        for g in gens:
            if not np.all(G.comm_many(arr, np.asarray([g])) == G.identity_token):
                return False
        return True

    def __repr__(self):
        return f"Subgroup(order={self.order})"


def subgroup_closure(G: FiniteGroup, gens) -> Subgroup:
    """Closure of the given elements under multiplication.

    Breadth-first: each round multiplies only the new frontier by the
    generating set, so total work is |H| * len(gens).
    """
    gen_tokens = [_tok(g) for g in gens]
    garr = np.asarray(sorted(set(gen_tokens) | {G.identity_token}))
    elems = garr.copy()
    frontier = garr.copy()
    while len(frontier):
        prod = G.mul_many(np.repeat(frontier, len(garr)), np.tile(garr, len(frontier)))
        prod = np.unique(prod)
        mask = ~np.isin(prod, elems)
        frontier = prod[mask]
        if len(frontier):
            elems = np.unique(np.concatenate([elems, frontier]))
            check_budget(len(elems), "subgroup closure")
    return Subgroup(G, gen_tokens, elems)


def full_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, G.generator_tokens(), np.sort(G.all_tokens()))


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (), np.asarray([G.identity_token]))


def intersection(H: Subgroup, K: Subgroup) -> Subgroup:
    if H.owner is not K.owner:
        raise ValueError("subgroups of different groups")
    elems = np.intersect1d(H.elements, K.elements)
    return Subgroup(H.owner, (), elems)


def generating_set(H: Subgroup) -> list[int]:
    """Small generating set extracted greedily from the element list."""
    G = H.owner
    have = trivial_subgroup(G)
    gens: list[int] = []
    while have.order < H.order:
        fresh = H.elements[~have.contains(H.elements)]
        gens.append(int(fresh[0]))
        have = subgroup_closure(G, gens)
    return gens


def with_generators(H: Subgroup) -> Subgroup:
    if H.gen_tokens:
        return H
    return Subgroup(H.owner, generating_set(H), H.elements)


def normal_closure(G: FiniteGroup, gens) -> Subgroup:
    """Smallest normal subgroup containing the given elements.

    In class <= 2 the closure of S together with all [s, g] over the
    group's generators is already normal; that shape is used and then
    re-verified by conjugating the element list.
    """
    seed = [_tok(g) for g in gens]
    ggens = list(G.generator_tokens())
    extra = []
    for s in seed:
        for g in ggens:
            c = G.cm(s, g)
            if c != G.identity_token:
                extra.append(c)
    H = subgroup_closure(G, seed + extra)
    for g in ggens:
        conj = np.asarray(G.conj_many(H.elements, np.asarray([g])))
        if not np.all(H.contains(conj)):
            raise PreconditionError(
                "normal closure shortcut failed; group is not class <= 2",
                witness={"generator": int(g)},
            )
    # gen_tokens must actually generate (QuotientGroup builds cosets from them)
    return Subgroup(G, tuple(seed) + tuple(extra), H.elements)


def center(G: FiniteGroup) -> Subgroup:
    toks = np.sort(G.all_tokens())
    mask = np.ones(len(toks), dtype=bool)
    for g in G.generator_tokens():
        mask &= G.comm_many(toks, np.asarray([g])) == G.identity_token
    return Subgroup(G, (), toks[mask])


def centralizer(G: FiniteGroup, S: Subgroup) -> Subgroup:
    toks = np.sort(G.all_tokens())
    mask = np.ones(len(toks), dtype=bool)
    sgens = S.gen_tokens or tuple(int(t) for t in S.elements)
    for g in sgens:
        mask &= G.comm_many(toks, np.asarray([g])) == G.identity_token
    return Subgroup(G, (), toks[mask])


def is_abelian(G: FiniteGroup) -> bool:
    gens = np.asarray(G.generator_tokens())
    for g in G.generator_tokens():
        if not np.all(G.comm_many(gens, np.asarray([g])) == G.identity_token):
            return False
    return True


def element_order(x: GroupElement) -> int:
    """Order via prime-ladder descent from x^|G| = e."""
    G = x.group
    t = G.order
    while True:
        for p in factorize(t) if t > 1 else ():
            if G.pw(x.token, t // p) == G.identity_token:
                t //= p
                break
        else:
            return t


def exponent(G: FiniteGroup) -> int:
    """Least t with x^t = e for all x, by prime-ladder descent."""
    toks = G.all_tokens()
    t = G.order
    while True:
        for p in factorize(t) if t > 1 else ():
            if np.all(G.pow_many(toks, t // p) == G.identity_token):
                t //= p
                break
        else:
            return t


# ---------------------------------------------------------------------------
# words


def collect(word, G: FiniteGroup) -> GroupElement:
    """Evaluate a word given as signed 1-based generator indices."""
    gens = G.generator_tokens()
    t = G.identity_token
    for idx in word:
        if idx == 0 or abs(idx) > len(gens):
            raise ValueError(f"generator index {idx} out of range")
        g = gens[abs(idx) - 1]
        t = G.mul(t, G.inv(g) if idx < 0 else g)
    return GroupElement(G, t)


# ---------------------------------------------------------------------------
# quotients


class QuotientGroup(FiniteGroup):
    """G/N with canonical representatives: least token in each coset.

    Label propagation runs in index space over the parent's sorted token
    list, so parents with sparse tokens (nested quotients) work too.
    """

    def __init__(self, G: FiniteGroup, N: Subgroup, name: str | None = None):
        if N.owner is not G:
            raise ValueError("subgroup belongs to a different group")
        for g in G.generator_tokens():
            conj = G.conj_many(N.elements, np.asarray([g]))
            if not np.all(np.sort(np.asarray(conj)) == N.elements):
                raise PreconditionError(
                    "subgroup is not normal", witness={"generator": int(g)}
                )
        self.parent = G
        self.normal = N
        self.name = name or f"{getattr(G, 'name', 'G')}/N"
        toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
        self._toks = toks
        M = len(toks)
        ngens = list(N.gen_tokens) if N.gen_tokens else generating_set(N)
        perms = []
        for n in ngens:
            moved = np.asarray(G.mul_many(toks, np.asarray([n])), dtype=np.int64)
            perms.append(np.searchsorted(toks, moved))
        labels0 = np.arange(M, dtype=np.int64)
        if perms:
            labels = kernels.min_label_fixpoint(labels0, np.asarray(perms, dtype=np.int64))
        else:
            labels = labels0
        self._labels = labels  # parent index -> index of least coset member
        rep_idx = np.unique(labels)
        self._reps = toks[rep_idx]
        self.order = int(len(rep_idx))
        if self.order * N.order != G.order:
            raise PreconditionError(
                "coset count mismatch; generating data for N is inconsistent",
                witness={"cosets": self.order, "sub_order": N.order, "group": G.order},
            )
        self.identity_token = self.project_one(G.identity_token)
        self._gen_tokens = tuple(self.project_one(g) for g in G.generator_tokens())

    def project(self, tokens):
        t = np.asarray(tokens, dtype=np.int64).reshape(-1)
        return self._toks[self._labels[np.searchsorted(self._toks, t)]]

    def project_one(self, x) -> int:
        return int(self.project(np.asarray([_tok(x)]))[0])

    def mul_many(self, a, b):
        return self.project(self.parent.mul_many(a, b))

    def inv_many(self, a):
        return self.project(self.parent.inv_many(a))

    def pow_many(self, a, s):
        return self.project(self.parent.pow_many(a, s))

    def comm_many(self, a, b):
        return self.project(self.parent.comm_many(a, b))

    def generator_tokens(self):
        return self._gen_tokens

    def all_tokens(self):
        return self._reps.copy()

    def describe_token(self, token: int) -> str:
        return self.parent.describe_token(token) + "N"


def quotient(G: FiniteGroup, N: Subgroup):
    """Quotient group together with the canonical projection."""
    Q = QuotientGroup(G, N)
    toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
    arr = np.zeros(int(toks[-1]) + 1, dtype=np.int64)
    arr[toks] = Q.project(toks)
    proj = Homomorphism(
        G,
        Q,
        {int(g): Q.project_one(g) for g in G.generator_tokens()},
        _premapped=arr,
        verify=False,
    )
    return Q, proj


# ---------------------------------------------------------------------------
# products


class DirectProduct(FiniteGroup):
    """G x K with token = tG * |K| + tK."""

    def __init__(self, G: FiniteGroup, K: FiniteGroup, name: str | None = None):
        check_budget(G.order * K.order, "direct product")
        self.left = G
        self.right = K
        self.order = G.order * K.order
        if self.order >= HARD_LIMIT:
            raise ResourceLimitError("direct product exceeds the token limit")
        # dense product tokens need dense factor tokens
        self._lt = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
        self._rt = np.sort(np.asarray(K.all_tokens(), dtype=np.int64))
        self._dense = bool(
            self._lt[0] == 0 and self._lt[-1] == G.order - 1
            and self._rt[0] == 0 and self._rt[-1] == K.order - 1
        )
        self.identity_token = self._join_one(G.identity_token, K.identity_token)
        self.name = name or f"{getattr(G, 'name', 'G')}x{getattr(K, 'name', 'K')}"
        self._gen_tokens = tuple(
            self._join_one(int(g), K.identity_token) for g in G.generator_tokens()
        ) + tuple(
            self._join_one(G.identity_token, int(kk)) for kk in K.generator_tokens()
        )

    def _factor_index(self, toks, side):
        if self._dense:
            return np.asarray(toks, dtype=np.int64)
        table = self._lt if side == 0 else self._rt
        return np.searchsorted(table, np.asarray(toks, dtype=np.int64))

    def split(self, tokens):
        t = np.asarray(tokens, dtype=np.int64).reshape(-1)
        li = t // self.right.order
        ri = t % self.right.order
        if self._dense:
            return li, ri
        return self._lt[li], self._rt[ri]

    def join(self, tg, tk):
        li = self._factor_index(np.asarray(tg).reshape(-1), 0)
        ri = self._factor_index(np.asarray(tk).reshape(-1), 1)
        return li * self.right.order + ri

    def _join_one(self, tg, tk) -> int:
        return int(self.join(np.asarray([tg]), np.asarray([tk]))[0])

    def mul_many(self, a, b):
        ag, ak = self.split(a)
        bg, bk = self.split(b)
        return self.join(self.left.mul_many(ag, bg), self.right.mul_many(ak, bk))

    def inv_many(self, a):
        ag, ak = self.split(a)
        return self.join(self.left.inv_many(ag), self.right.inv_many(ak))

    def pow_many(self, a, s):
        ag, ak = self.split(a)
        return self.join(self.left.pow_many(ag, s), self.right.pow_many(ak, s))

    def comm_many(self, a, b):
        ag, ak = self.split(a)
        bg, bk = self.split(b)
        return self.join(self.left.comm_many(ag, bg), self.right.comm_many(ak, bk))

    def generator_tokens(self):
        return self._gen_tokens

    def all_tokens(self):
        return np.arange(self.order, dtype=np.int64)

    def describe_token(self, token):
        tg, tk = self.split(np.asarray([token]))
        return (
            f"({self.left.describe_token(int(tg[0]))},"
            f"{self.right.describe_token(int(tk[0]))})"
        )

    def embed_left(self) -> "Homomorphism":
        return Homomorphism(
            self.left,
            self,
            {
                int(g): self._join_one(int(g), self.right.identity_token)
                for g in self.left.generator_tokens()
            },
        )

    def embed_right(self) -> "Homomorphism":
        return Homomorphism(
            self.right,
            self,
            {
                int(kk): self._join_one(self.left.identity_token, int(kk))
                for kk in self.right.generator_tokens()
            },
        )


def direct_product(G: FiniteGroup, K: FiniteGroup) -> DirectProduct:
    return DirectProduct(G, K)


# ---------------------------------------------------------------------------
# homomorphisms


class Homomorphism:
    """Map between finite groups, stored as a full token table.

    Built from generator images by mirroring a breadth-first closure of
    the domain, then verified on every (element, generator) pair.
    """

    def __init__(self, domain: FiniteGroup, codomain: FiniteGroup, gen_images: dict,
                 _premapped: np.ndarray | None = None, verify: bool = True):
        self.domain = domain
        self.codomain = codomain
        self.gen_images = {int(_tok(k)): int(_tok(v)) for k, v in gen_images.items()}
        if _premapped is not None:
            self._table = _premapped
        else:
            self._table = self._materialize()
        if verify:
            self._verify()

    def _materialize(self) -> np.ndarray:
        G, H = self.domain, self.codomain
        toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
        size = int(toks[-1]) + 1
        if size > 2**26:
            raise ResourceLimitError(
                "homomorphism table would be too large", needed=size, budget=2**26
            )
        table: dict[int, int] = {G.identity_token: H.identity_token}
        frontier = [G.identity_token]
        pairs = list(self.gen_images.items())
        while frontier:
            nxt = []
            src = np.asarray(frontier)
            src_img = np.asarray([table[int(t)] for t in frontier])
            for g, h in pairs:
                prod = G.mul_many(src, np.asarray([g]))
                img = H.mul_many(src_img, np.asarray([h]))
                for t, m in zip(prod, img):
                    t = int(t)
                    if t not in table:
                        table[t] = int(m)
                        nxt.append(t)
                    elif table[t] != int(m):
                        raise PreconditionError(
                            "generator images are inconsistent on the domain",
                            witness={"token": t},
                        )
            frontier = nxt
        if len(table) != G.order:
            raise PreconditionError(
                "generator images do not reach the whole domain",
                witness={"reached": len(table), "order": G.order},
            )
        arr = np.zeros(size, dtype=np.int64)
        for t, m in table.items():
            arr[t] = m
        return arr

    def _verify(self):
        G, H = self.domain, self.codomain
        toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
        imgs = self(toks)
        for g, h in self.gen_images.items():
            lhs = self(np.asarray(G.mul_many(toks, np.asarray([g])), dtype=np.int64))
            rhs = H.mul_many(imgs, np.asarray([h]))
            if not np.all(lhs == rhs):
                raise PreconditionError(
                    "map is not a homomorphism", witness={"generator": int(g)}
                )

    def __call__(self, tokens):
        t = np.asarray(tokens, dtype=np.int64).reshape(-1)
        return self._table[t]

    def apply_one(self, x) -> int:
        return int(self._table[_tok(x)])

    def image_subgroup(self) -> Subgroup:
        imgs = np.unique(self(np.sort(np.asarray(self.domain.all_tokens(), dtype=np.int64))))
        return Subgroup(self.codomain, tuple(self.gen_images.values()), imgs)

    def kernel_subgroup(self) -> Subgroup:
        toks = np.sort(np.asarray(self.domain.all_tokens(), dtype=np.int64))
        ker = toks[self(toks) == self.codomain.identity_token]
        return Subgroup(self.domain, (), ker)

    def is_injective(self) -> bool:
        toks = np.sort(np.asarray(self.domain.all_tokens(), dtype=np.int64))
        return len(np.unique(self(toks))) == self.domain.order

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """self after inner."""
        if inner.codomain is not self.domain:
            raise ValueError("composition domain mismatch")
        gi = {g: int(self._table[h]) for g, h in inner.gen_images.items()}
        toks = np.sort(np.asarray(inner.domain.all_tokens(), dtype=np.int64))
        arr = np.zeros(int(toks[-1]) + 1, dtype=np.int64)
        arr[toks] = self(inner(toks))
        return Homomorphism(inner.domain, self.codomain, gi, _premapped=arr, verify=False)


def identity_homomorphism(G: FiniteGroup) -> Homomorphism:
    toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
    arr = np.zeros(int(toks[-1]) + 1, dtype=np.int64)
    arr[toks] = toks
    return Homomorphism(
        G, G, {int(g): int(g) for g in G.generator_tokens()}, _premapped=arr, verify=False
    )


# ---------------------------------------------------------------------------
# verbal subgroups and friends


def verbal_subgroups(G: FiniteGroup, n: int):
    """(G^n, G', G^n G') with the convention G^0 = {e}.

    G^n is generated by g^n over the generators plus [g, h]^n and
    [g, h]^(n choose 2): expanding (product)^n shows those suffice in
    class <= 2, and the containment is re-verified on the elements
    (exhaustively at small order, on a sample above).
    """
    gens = list(G.generator_tokens())
    cgens = []
    for i, a in enumerate(gens):
        for b in gens[:i]:
            c = G.cm(a, b)
            if c != G.identity_token:
                cgens.append(c)
    Gprime = subgroup_closure(G, cgens) if cgens else trivial_subgroup(G)
    if n == 0:
        Gn = trivial_subgroup(G)
    else:
        seeds = [G.pw(g, n) for g in gens]
        seeds += [G.pw(c, n) for c in cgens]
        seeds += [G.pw(c, binom2(n)) for c in cgens]
        seeds = [t for t in seeds if t != G.identity_token]
        Gn = subgroup_closure(G, seeds) if seeds else trivial_subgroup(G)
    if Gn.order > 1 or Gprime.order > 1:
        both = subgroup_closure(G, list(Gn.gen_tokens) + list(Gprime.gen_tokens))
    else:
        both = trivial_subgroup(G)
    _assert_verbal(G, n, Gn, Gprime, both)
    return Gn, Gprime, both


def _assert_verbal(G, n, Gn, Gprime, both):
    # n-th powers of every element must land in G^n (one vectorized pass)
    toks = np.sort(G.all_tokens())
    if n != 0 and not np.all(Gn.contains(np.asarray(G.pow_many(toks, n)))):
        raise PreconditionError("n-th power escaped G^n", witness={"n": n})
    if G.order <= 64:
        sub = toks
    else:
        rng = random.Random(13)
        sub = toks[sorted(rng.sample(range(len(toks)), 64))]
    comm = G.comm_many(np.repeat(sub, len(sub)), np.tile(sub, len(sub)))
    if not np.all(Gprime.contains(np.asarray(comm))):
        raise PreconditionError("commutator escaped G'", witness={})
    if not np.all(both.contains(Gn.elements)) or not np.all(both.contains(Gprime.elements)):
        raise PreconditionError("G^n G' does not contain its parts", witness={})


def power_subgroup(G: FiniteGroup, n: int) -> Subgroup:
    return verbal_subgroups(G, n)[0]


def omega(S: Subgroup, beta: int) -> Subgroup:
    """Elements of the abelian subgroup S killed by beta (all of S if 0)."""
    if not with_generators(S).is_abelian():
        raise PreconditionError("omega needs an abelian subgroup", witness={})
    G = S.owner
    if beta == 0:
        return Subgroup(G, (), S.elements.copy())
    mask = np.asarray(G.pow_many(S.elements, beta)) == G.identity_token
    return Subgroup(G, (), S.elements[mask])


# ---------------------------------------------------------------------------
# central products


def central_product(A: FiniteGroup, B: FiniteGroup, iso: dict):
    """Glue A and B along a central subgroup.

    iso maps tokens of a central subgroup of A to tokens of a central
    subgroup of B.  Returns (K, embed_A, embed_B) with K = (A x B)/N for
    N = {(z, iso(z)^-1)}.  Both embeddings are verified injective and
    their images intersect exactly in the glued subgroup.
    """
    P = DirectProduct(A, B)
    zA = center(A)
    zB = center(B)
    pairs = [(int(_tok(a)), int(_tok(b))) for a, b in iso.items()]
    for a, b in pairs:
        if not zA.contains_one(a) or not zB.contains_one(b):
            raise PreconditionError(
                "glued elements must be central on both sides",
                witness={"a": a, "b": b},
            )
    n_gens = [P._join_one(a, B.inv(b)) for a, b in pairs]
    N = subgroup_closure(P, n_gens)
    DA = subgroup_closure(A, [a for a, _ in pairs])
    DB = subgroup_closure(B, [b for _, b in pairs])
    if N.order != DA.order or DA.order != DB.order:
        raise PreconditionError(
            "iso does not define an isomorphism of the glued subgroups",
            witness={"N": N.order, "A_side": DA.order, "B_side": DB.order},
        )
    K, proj = quotient(P, N)
    embA = Homomorphism(
        A, K,
        {int(g): K.project_one(P._join_one(int(g), B.identity_token)) for g in A.generator_tokens()},
    )
    embB = Homomorphism(
        B, K,
        {int(g): K.project_one(P._join_one(A.identity_token, int(g))) for g in B.generator_tokens()},
    )
    if not embA.is_injective() or not embB.is_injective():
        raise PreconditionError("central product embeddings are not injective", witness={})
    inter = intersection(embA.image_subgroup(), embB.image_subgroup())
    glued = subgroup_closure(K, [embA.apply_one(a) for a, _ in pairs])
    if inter.order != glued.order or not np.all(inter.elements == glued.elements):
        raise PreconditionError(
            "central product images intersect beyond the glued subgroup",
            witness={"intersection": inter.order, "glued": glued.order},
        )
    return K, embA, embB


# ---------------------------------------------------------------------------
# homomorphism extension


def extend_homomorphism(A: FiniteGroup, U: Subgroup, phi_map, codomain, coset_images):
    """Extend a partial map on the subgroup U to all of A.

    phi_map: dict token-of-U -> token-of-codomain (a homomorphism on U).
    coset_images: list of (a, h) pairs adjoined one at a time; together
    with U they must generate A.  Named failures:
      (a) an image breaks a commutator constraint against U,
      (b) a power of a new generator lands in the current subgroup but
          its image power disagrees,
      (c) a commutator of a new generator against the current subgroup
          leaves that subgroup, so the datum is not closed.
    """
    H = codomain
    cur_sub = U
    cur_map = {int(_tok(k)): int(_tok(v)) for k, v in phi_map.items()}
    if set(cur_map) != {int(t) for t in U.elements}:
        raise PreconditionError("phi_map must cover exactly U", witness={})
    for a, h in coset_images:
        a = _tok(a)
        h = _tok(h)
        t = 1
        acc = a
        while not cur_sub.contains_one(acc):
            acc = A.mul(acc, a)
            t += 1
        if H.pw(h, t) != cur_map[int(acc)]:
            raise PreconditionError(
                "condition (b): power of the new generator lands in the "
                "subgroup but its image power disagrees",
                witness={"a": int(a), "t": t},
            )
        for u in cur_sub.elements:
            cu = A.cm(int(a), int(u))
            if not cur_sub.contains_one(cu):
                raise PreconditionError(
                    "condition (c): commutator with the subgroup leaves the "
                    "subgroup; extension datum is not closed",
                    witness={"a": int(a), "u": int(u)},
                )
            if H.cm(h, cur_map[int(u)]) != cur_map[int(cu)]:
                raise PreconditionError(
                    "condition (a): image fails the commutator constraint",
                    witness={"a": int(a), "u": int(u)},
                )
        new_map = dict(cur_map)
        pow_a = A.identity_token
        pow_h = H.identity_token
        for _ in range(1, t):
            pow_a = A.mul(pow_a, a)
            pow_h = H.mul(pow_h, h)
            for u in cur_sub.elements:
                x = A.mul(int(u), pow_a)
                y = H.mul(cur_map[int(u)], pow_h)
                if x in new_map and new_map[x] != y:
                    raise PreconditionError(
                        "condition (b): coset images collide",
                        witness={"token": int(x)},
                    )
                new_map[x] = y
        cur_map = new_map
        cur_sub = Subgroup(A, tuple(cur_sub.gen_tokens) + (int(a),),
                           np.asarray(sorted(cur_map)))
        if cur_sub.order != subgroup_closure(A, cur_sub.gen_tokens).order:
            raise PreconditionError(
                "extension bookkeeping lost cosets", witness={"order": cur_sub.order}
            )
    if cur_sub.order != A.order:
        raise PreconditionError(
            "coset_images do not generate the whole group over U",
            witness={"reached": cur_sub.order, "order": A.order},
        )
    toks = np.sort(np.asarray(A.all_tokens(), dtype=np.int64))
    arr = np.zeros(int(toks[-1]) + 1, dtype=np.int64)
    for x, y in cur_map.items():
        arr[x] = y
    gi = {int(g): int(arr[int(g)]) for g in A.generator_tokens()}
    return Homomorphism(A, H, gi, _premapped=arr)


# ---------------------------------------------------------------------------
# primary decomposition


def primary_decomposition(G: FiniteGroup):
    """Split a finite nilpotent group into its Sylow subgroups.

    Returns [(p, G_p, embedding)] with G_p rebuilt as a standalone
    PcGroup.  Each embedding is verified injective with image exactly
    the p-part, and the part orders are verified to multiply to |G|.
    """
    N = G.order
    if N == 1:
        return []
    fac = sorted(factorize(N).items())
    if len(fac) == 1 and isinstance(G, PcGroup):
        return [(fac[0][0], G, identity_homomorphism(G))]
    out = []
    toks = np.sort(np.asarray(G.all_tokens(), dtype=np.int64))
    for p, a in fac:
        pa = p**a
        part = toks[np.asarray(G.pow_many(toks, pa)) == G.identity_token]
        if len(part) != pa:
            raise PreconditionError(
                "p-part has the wrong size; group is not nilpotent",
                witness={"p": p, "found": int(len(part)), "expected": pa},
            )
        sub = Subgroup(G, generating_set(Subgroup(G, (), part)), part)
        Gp, emb = rebuild_as_pcgroup(G, sub, name=f"{getattr(G, 'name', 'G')}_{p}")
        out.append((p, Gp, emb))
    total = math.prod(Gp.order for _, Gp, _ in out)
    if total != N:
        raise PreconditionError("primary parts do not multiply to |G|", witness={})
    return out


def rebuild_as_pcgroup(G: FiniteGroup, S: Subgroup, name: str = "S"):
    """Realize a subgroup as a standalone PcGroup plus an embedding back.

    Letters are the subgroup's generators, extended by commutators until
    each [l_j, l_i] lies in the span of the letters after j; relative
    orders and tails are then read off the chain.  The embedding is
    verified at the end, so a bad chain cannot slip through.
    """
    letters = [int(g) for g in S.gen_tokens if int(g) != G.identity_token]

    def span_from(i):
        if i >= len(letters):
            return trivial_subgroup(G)
        return subgroup_closure(G, letters[i:])

    changed = True
    while changed:
        changed = False
        for j in range(len(letters)):
            sp = span_from(j + 1)
            for i in range(j):
                c = G.cm(letters[j], letters[i])
                if c != G.identity_token and not sp.contains_one(c):
                    letters.append(c)
                    changed = True
                    break
            if changed:
                break
    # drop letters that add nothing over their suffix
    for i in range(len(letters) - 1, -1, -1):
        rest = letters[i + 1 :]
        sp = subgroup_closure(G, rest) if rest else trivial_subgroup(G)
        if sp.contains_one(letters[i]):
            del letters[i]
    k = len(letters)

    def express_over(start, target):
        """Greedy normal form of target over letters[start:]."""
        word = []
        cur = target
        for j in range(start, k):
            lj = letters[j]
            sp_rest = span_from(j + 1)
            step = G.inv(lj)
            e = 0
            acc = cur
            while not sp_rest.contains_one(acc):
                acc = G.mul(step, acc)
                e += 1
                if e > G.order:
                    raise PreconditionError(
                        "letters do not form a polycyclic chain",
                        witness={"letter": int(lj)},
                    )
            if e:
                word.append((j, e))
            cur = acc
        if cur != G.identity_token:
            raise PreconditionError("expression residue is nontrivial", witness={})
        return word

    rel_orders = []
    power_words: dict[int, tuple] = {}
    comm_words: dict[tuple[int, int], tuple] = {}
    for i, g in enumerate(letters):
        sp = span_from(i + 1)
        t = 1
        acc = g
        while not sp.contains_one(acc):
            acc = G.mul(acc, g)
            t += 1
            if t > G.order:
                raise PreconditionError("relative order runaway", witness={})
        rel_orders.append(t)
        w = express_over(i + 1, acc)
        if w:
            power_words[i] = tuple(w)
    for j in range(k):
        for i in range(j):
            c = G.cm(letters[j], letters[i])
            if c == G.identity_token:
                continue
            comm_words[(j, i)] = tuple(express_over(j + 1, c))
    pres = PcPresentation(
        names=tuple(f"s{i}" for i in range(k)) or ("e0",),
        orders=tuple(rel_orders) or (1,),
        power_tails=power_words,
        comm_tails=comm_words,
    )
    Gp = PcGroup(pres, name=name)
    if Gp.order != S.order:
        raise PreconditionError(
            "rebuilt group has the wrong order",
            witness={"built": Gp.order, "subgroup": S.order},
        )
    emb = Homomorphism(
        Gp, G,
        {int(Gp.generator_tokens()[i]): int(letters[i]) for i in range(k)},
    )
    if not emb.is_injective():
        raise PreconditionError("rebuilt embedding is not injective", witness={})
    img = emb.image_subgroup()
    if img.order != S.order or not np.all(img.elements == np.asarray(S.elements)):
        raise PreconditionError("rebuilt image mismatch", witness={})
    return Gp, emb
