"""The lattice of exponent/commutator-exponent varieties.

A pair (m, n) stands for the class the laws x^m = e and [x, y]^n = e
cut out of the class-2 groups, with 0 meaning no constraint.  Validity
requires n to divide m / gcd(2, m) (automatic when m = 0): without the
halving at 2 the power law would force a smaller commutator exponent
than declared.  Containment is divisibility in both coordinates, so
(0, 0) is the whole class and (1, 1) the trivial variety.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FiniteGroup,
    PcGroup,
    PcPresentation,
    check_budget,
    exponent,
    factorize,
    prime_power_divisors,
)
from .errors import PreconditionError


def div_or_zero(a: int, b: int) -> bool:
    """a divides b, with 0 dividing only 0 (and everything dividing 0)."""
    if a == 0:
        return b == 0
    return b % a == 0


@dataclass(frozen=True, order=True)
class Variety:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise PreconditionError(
                "variety parameters must be nonnegative",
                witness={"m": self.m, "n": self.n},
            )
        if self.m > 0 and not div_or_zero(self.n, self.m // math.gcd(2, self.m)):
            raise PreconditionError(
                "invalid variety: n must divide m / gcd(2, m)",
                witness={"m": self.m, "n": self.n},
            )

    def __repr__(self):
        return f"({self.m},{self.n})"

    def is_top(self) -> bool:
        return self.m == 0 and self.n == 0


TOP = Variety(0, 0)
BOTTOM = Variety(1, 1)


def is_valid_pair(m: int, n: int) -> bool:
    if m < 0 or n < 0:
        return False
    if m == 0:
        return True
    return div_or_zero(n, m // math.gcd(2, m))


def leq(v: Variety, w: Variety) -> bool:
    """v is contained in w: both laws of w are consequences of v's."""
    return div_or_zero(v.m, w.m) and div_or_zero(v.n, w.n)


def meet(v: Variety, w: Variety) -> Variety:
    return Variety(math.gcd(v.m, w.m), math.gcd(v.n, w.n))


def join(v: Variety, w: Variety) -> Variety:
    return Variety(math.lcm(v.m, w.m), math.lcm(v.n, w.n))


# ---------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class MembershipVerdict:
    holds: bool
    witness: dict | None = None

    def __bool__(self):
        return self.holds


def contains(v: Variety, G: FiniteGroup) -> MembershipVerdict:
    """Does G satisfy both laws of v?  Witness is the first violation in
    token order (an element for the power law, a pair for the other)."""
    toks = np.sort(G.all_tokens())
    if v.m != 0:
        bad = np.asarray(G.pow_many(toks, v.m)) != G.identity_token
        if bad.any():
            t = int(toks[int(np.argmax(bad))])
            return MembershipVerdict(
                False,
                {"law": "power", "token": t, "element": G.describe_token(t)},
            )
    if v.n != 0:
        # commutators are bilinear here, so generator pairs decide the law
        gens = G.generator_tokens()
        for j, gj in enumerate(gens):
            for i, gi in enumerate(gens[:j]):
                c = G.cm(gj, gi)
                if G.pw(c, v.n) != G.identity_token:
                    return MembershipVerdict(
                        False,
                        {
                            "law": "commutator",
                            "pair": (int(gj), int(gi)),
                            "element": G.describe_token(c),
                        },
                    )
    return MembershipVerdict(True)


def minimal_variety(G: FiniteGroup) -> Variety:
    """Smallest variety containing G: exponents of G and of G'."""
    m = exponent(G)
    gens = list(G.generator_tokens())
    n = 1
    for j, gj in enumerate(gens):
        for gi in gens[:j]:
            c = G.element(G.cm(gj, gi))
            n = math.lcm(n, c.order())
    v = Variety(m, n)
    if not contains(v, G):
        raise PreconditionError("minimal variety computation broke", witness={})
    return v


# ---------------------------------------------------------------------------
# derived constants


def exponent_constants(v: Variety, q: int) -> tuple[int, int]:
    """(beta, zeta) for the variety and a power divisor q.

    beta = lcm(m/n, n) bounds the center's relevant torsion; zeta =
    lcm(m/q, n) is the order every q-th root candidate must respect.
    Both collapse to 0 (no constraint) whenever the inputs let them.
    """
    m, n = v.m, v.n
    if m == 0 and n == 0:
        beta = 0
    else:
        beta = math.lcm(m // n, n) if n else 0
    if q < 1:
        raise PreconditionError("q must be >= 1", witness={"q": q})
    if m > 0 and m % q != 0:
        raise PreconditionError("q must divide m", witness={"m": m, "q": q})
    zeta = math.lcm(m // q, n)
    return beta, zeta


def power_divisor_range(n: int, fallback_exponent: int | None = None) -> list[int]:
    """Prime powers q > 1 dividing n, or dividing the fallback when n = 0."""
    if n > 0:
        return prime_power_divisors(n)
    if fallback_exponent is None or fallback_exponent == 0:
        raise PreconditionError(
            "n = 0 needs a finite exponent to bound the power range", witness={}
        )
    return prime_power_divisors(fallback_exponent)


# ---------------------------------------------------------------------------
# relatively free groups


def free_nil2_group(rank: int, v: Variety, name: str | None = None) -> PcGroup:
    """Relatively free group of the variety on the given rank.

    Finite only when m > 0, with order m^rank * n^C(rank, 2); generator
    letters come first, commutator letters [x_j, x_i] after.
    """
    m, n = v.m, v.n
    if m == 0:
        raise PreconditionError(
            "relatively free group is infinite when m = 0", witness={"variety": str(v)}
        )
    nn = n if n > 0 else m // math.gcd(2, m)
    if rank < 0:
        raise PreconditionError("rank must be >= 0", witness={"rank": rank})
    if rank == 0 or m == 1:
        from .core import trivial_group

        return trivial_group(name or "F0")
    names = tuple(f"x{i+1}" for i in range(rank)) + tuple(
        f"c{j+1}{i+1}" for j in range(rank) for i in range(j)
    )
    orders = (m,) * rank + (nn,) * (rank * (rank - 1) // 2)
    check_budget(math.prod(orders), "relatively free group")
    comm_tails = {}
    pos = rank
    for j in range(rank):
        for i in range(j):
            comm_tails[(j, i)] = ((pos, 1),)
            pos += 1
    pres = PcPresentation(names=names, orders=orders, comm_tails=comm_tails)
    G = PcGroup(pres, name=name or f"F{rank}{v}")
    ver = contains(v, G)
    if not ver:
        raise PreconditionError(
            "free group construction left the variety", witness=ver.witness or {}
        )
    return G


# ---------------------------------------------------------------------------
# transfer of base properties along containment


def _ordp(x: int, p: int):
    if x == 0:
        return math.inf
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


def _transfer_primes(v: Variety, w: Variety) -> list[int]:
    ps: set[int] = set()
    for x in (v.m, v.n, w.m, w.n):
        if x > 0:
            ps.update(factorize(x))
    # one prime dividing none of the data represents all the others
    generic = 2
    while generic in ps:
        generic = _next_prime(generic)
    ps.add(generic)
    return sorted(ps)


def _next_prime(p: int) -> int:
    q = p + 1
    while any(q % d == 0 for d in range(2, int(q**0.5) + 1)):
        q += 1
    return q


def strong_base_transfer(v: Variety, w: Variety) -> bool:
    """Does strong-base-ness always carry from v up to w?

    Valuation test per prime: nothing at p, or n carries the whole m at
    p, or both coordinates agree at p across the two varieties.
    """
    if not leq(v, w):
        raise PreconditionError(
            "transfer needs v contained in w", witness={"v": str(v), "w": str(w)}
        )
    for p in _transfer_primes(v, w):
        an, am = _ordp(v.n, p), _ordp(v.m, p)
        bn, bm = _ordp(w.n, p), _ordp(w.m, p)
        if an == 0 and bn == 0:
            continue
        if an == am:
            continue
        if an == bn and am == bm:
            continue
        return False
    return True


def special_base_transfer(v: Variety, w: Variety) -> bool:
    """Like strong_base_transfer for the special property; the square
    of a prime entering n is what blocks it."""
    if not leq(v, w):
        raise PreconditionError(
            "transfer needs v contained in w", witness={"v": str(v), "w": str(w)}
        )
    for p in _transfer_primes(v, w):
        an, am = _ordp(v.n, p), _ordp(v.m, p)
        bn, bm = _ordp(w.n, p), _ordp(w.m, p)
        if an <= 1 and bn <= 1:
            continue
        if an == am == bn:
            continue
        if an == bn and am == bm:
            continue
        return False
    return True
