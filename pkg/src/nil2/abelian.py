"""Structure theory for finite abelian groups and sections.

Invariant factor decompositions are extracted with the classical
maximal-order greedy construction (per prime, then glued by CRT) and
re-verified against a full coordinate table, so a wrong basis cannot
survive construction.  A hand-rolled Smith normal form over the
integers backs the matrix-level API and cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FiniteGroup,
    GroupElement,
    PcGroup,
    Subgroup,
    _tok,
    abelian_group,
    check_budget,
    divisors,
    factorize,
    is_abelian,
    quotient,
    subgroup_closure,
    trivial_subgroup,
    with_generators,
)
from .errors import PreconditionError


# ---------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """U @ M @ V = D with D diagonal, d_i | d_{i+1}, U and V unimodular.

    Pivoting picks the smallest nonzero absolute value in the remaining
    block, which keeps entries small without needing clever heuristics.
    """
    A = np.array(M, dtype=object, ndmin=2, copy=True)
    r, c = A.shape
    U = np.eye(r, dtype=object)
    V = np.eye(c, dtype=object)
    t = 0
    while t < min(r, c):
        sub = A[t:, t:]
        nz = [(abs(sub[i, j]), i + t, j + t) for i in range(r - t) for j in range(c - t) if sub[i, j] != 0]
        if not nz:
            break
        _, pi, pj = min(nz)
        if pi != t:
            A[[t, pi]] = A[[pi, t]]
            U[[t, pi]] = U[[pi, t]]
        if pj != t:
            A[:, [t, pj]] = A[:, [pj, t]]
            V[:, [t, pj]] = V[:, [pj, t]]
        done = True
        for i in range(t + 1, r):
            if A[i, t] != 0:
                q = A[i, t] // A[t, t]
                A[i] -= q * A[t]
                U[i] -= q * U[t]
                if A[i, t] != 0:
                    done = False
        for j in range(t + 1, c):
            if A[t, j] != 0:
                q = A[t, j] // A[t, t]
                A[:, j] -= q * A[:, t]
                V[:, j] -= q * V[:, t]
                if A[t, j] != 0:
                    done = False
        if not done:
            continue
        # divisibility: fold any non-multiple into the pivot column
        bad = None
        for i in range(t + 1, r):
            for j in range(t + 1, c):
                if A[i, j] % A[t, t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            A[t] += A[bad]
            U[t] += U[bad]
            continue
        t += 1
    for i in range(min(r, c)):
        if A[i, i] < 0:
            A[i] = -A[i]
            U[i] = -U[i]
    if not np.array_equal(U @ np.array(M, dtype=object, ndmin=2) @ V, A):
        raise AssertionError("smith normal form bookkeeping broke")
    if max(r, c) <= 16 and not (_det_is_unit(U) and _det_is_unit(V)):
        raise AssertionError("smith normal form transforms are not unimodular")
    return U, A, V


def _det_is_unit(M) -> bool:
    a = np.array(M, dtype=object)
    n = a.shape[0]
    # fraction-free Gaussian elimination is overkill at these sizes
    import fractions

    f = [[fractions.Fraction(int(x)) for x in row] for row in a]
    det = fractions.Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if f[i][col] != 0), None)
        if piv is None:
            return False
        if piv != col:
            f[col], f[piv] = f[piv], f[col]
            det = -det
        det *= f[col][col]
        inv = 1 / f[col][col]
        f[col] = [x * inv for x in f[col]]
        for i in range(col + 1, n):
            if f[i][col]:
                coef = f[i][col]
                f[i] = [x - coef * y for x, y in zip(f[i], f[col])]
    return abs(det) == 1


# ---------------------------------------------------------------------------
# invariant factors of abelian groups and sections


def _orders_of(G: FiniteGroup, toks: np.ndarray, t: int) -> np.ndarray:
    """Element orders for every token, one vectorized pass per divisor."""
    ords = np.zeros(len(toks), dtype=np.int64)
    for d in divisors(t):
        if d == 0:
            continue
        hit = (np.asarray(G.pow_many(toks, d)) == G.identity_token) & (ords == 0)
        ords[hit] = d
    if (ords == 0).any():
        raise PreconditionError("element order exceeded the exponent bound", witness={})
    return ords


class FinAb:
    """Finite abelian group seen through an invariant-factor basis.

    factors is the ascending divisibility chain d_1 | d_2 | ... | d_r
    (all > 1); basis[i] has order factors[i] and the group is the direct
    sum of the cyclic pieces.  to_coords/from_coords translate between
    owner tokens and coordinate rows; both directions are verified on
    every element at construction.
    """

    def __init__(self, owner: FiniteGroup, name: str = "A"):
        if not is_abelian(owner):
            raise PreconditionError("FinAb needs an abelian group", witness={})
        self.owner = owner
        self.name = name
        self.order = owner.order
        toks = np.sort(np.asarray(owner.all_tokens()))
        self._toks = toks
        basis, facs = self._extract_basis(owner, toks)
        self.basis = basis
        self.factors = facs
        self._coords_table = self._build_table()
        self._verify()

    @staticmethod
    def _extract_basis(G: FiniteGroup, toks: np.ndarray):
        if G.order == 1:
            return [], []
        t = G.order
        ords = _orders_of(G, toks, t)
        per_prime: dict[int, list[tuple[int, int]]] = {}
        for p in factorize(G.order):
            pa = p ** factorize(G.order)[p]
            mask = np.asarray(G.pow_many(toks, pa)) == G.identity_token
            part = toks[mask]
            part_ords = ords[mask]
            # greedy: largest order first, keep if independent of the span
            order_sort = np.lexsort((part, -part_ords))
            sub = trivial_subgroup(G)
            chosen: list[tuple[int, int]] = []
            for idx in order_sort:
                x = int(part[idx])
                o = int(part_ords[idx])
                if o == 1:
                    break
                if sub.order * o > len(part) or sub.contains_one(x):
                    continue
                grown = subgroup_closure(G, [g for g, _ in chosen] + [x])
                if grown.order == sub.order * o:
                    chosen.append((x, o))
                    sub = grown
                    if sub.order == len(part):
                        break
            if sub.order != len(part):
                raise PreconditionError(
                    "greedy basis extraction stalled", witness={"p": p}
                )
            per_prime[p] = chosen  # descending order of element order
        # CRT-glue aligned ranks into composite invariant factors
        rank = max(len(v) for v in per_prime.values())
        basis: list[int] = []
        facs: list[int] = []
        for i in range(rank):
            tok = G.identity_token
            d = 1
            for p, chosen in per_prime.items():
                if i < len(chosen):
                    x, o = chosen[i]
                    tok = G.mul(tok, x)
                    d *= o
            basis.append(tok)
            facs.append(d)
        basis.reverse()
        facs.reverse()
        return basis, facs

    def _build_table(self):
        G = self.owner
        r = len(self.factors)
        if r == 0:
            return {int(G.identity_token): ()}
        check_budget(self.order, "coordinate table")
        coords = np.zeros((self.order, r), dtype=np.int64)
        reps = np.full(self.order, G.identity_token, dtype=self._toks.dtype)
        block = 1
        for i in range(r - 1, -1, -1):
            d = self.factors[i]
            reps_new = np.empty_like(reps)
            coords_new = coords.copy()
            pw = G.identity_token
            for c in range(d):
                sel = (np.arange(self.order) // block) % d == c
                if c:
                    pw = G.mul(pw, self.basis[i])
                reps_new[sel] = np.asarray(
                    G.mul_many(reps[sel], np.asarray([pw]))
                )
                coords_new[sel, i] = c
            reps = reps_new
            coords = coords_new
            block *= d
        table = {}
        for tok, row in zip(reps, coords):
            tok = int(tok)
            if tok in table:
                raise PreconditionError(
                    "basis does not span freely", witness={"token": tok}
                )
            table[tok] = tuple(int(v) for v in row)
        if len(table) != self.order:
            raise PreconditionError("coordinate table incomplete", witness={})
        return table

    def _verify(self):
        G = self.owner
        for b, d in zip(self.basis, self.factors):
            if G.pw(b, d) != G.identity_token:
                raise PreconditionError("basis order mismatch", witness={"token": b})
            for dd in divisors(d):
                if dd < d and G.pw(b, dd) == G.identity_token:
                    raise PreconditionError("basis order overshoot", witness={"token": b})
        for i in range(len(self.factors) - 1):
            if self.factors[i + 1] % self.factors[i] != 0:
                raise PreconditionError(
                    "invariant factors do not form a divisibility chain",
                    witness={"factors": tuple(self.factors)},
                )
        # round trip on every element
        toks = list(self._coords_table)
        back = self.from_coords(np.asarray([self._coords_table[t] for t in toks], dtype=np.int64).reshape(len(toks), -1))
        if not np.all(np.asarray(back) == np.asarray(toks)):
            raise PreconditionError("coordinate round trip failed", witness={})

    def to_coords(self, tokens) -> np.ndarray:
        t = np.asarray(tokens).reshape(-1)
        r = len(self.factors)
        out = np.zeros((len(t), r), dtype=np.int64)
        for row, tok in enumerate(t):
            out[row] = self._coords_table[int(tok)]
        return out

    def from_coords(self, coords) -> np.ndarray:
        G = self.owner
        C = np.asarray(coords, dtype=np.int64).reshape(-1, len(self.factors)) if len(self.factors) else np.zeros((len(np.atleast_2d(coords)), 0), dtype=np.int64)
        out = np.full(C.shape[0], G.identity_token, dtype=self._toks.dtype)
        for i, d in enumerate(self.factors):
            col = C[:, i] % d
            pw = G.identity_token
            for c in range(1, d):
                pw = G.mul(pw, self.basis[i])
                sel = col == c
                if sel.any():
                    out[sel] = np.asarray(G.mul_many(out[sel], np.asarray([pw])))
        return out

    def exponent(self) -> int:
        return self.factors[-1] if self.factors else 1

    def primary_factors(self, p: int) -> list[int]:
        """p-power parts of the invariant factors, ascending, 1s dropped."""
        out = []
        for d in self.factors:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            if e:
                out.append(p**e)
        return out

    def __repr__(self):
        return f"FinAb({self.factors})"


def invariant_factors(G: FiniteGroup, N: Subgroup | None = None) -> FinAb:
    """Invariant factors of the abelian group G, or of G/N when N given."""
    if N is not None:
        Q, _ = quotient(G, N)
        return FinAb(Q, name=f"{getattr(G, 'name', 'G')}/N")
    return FinAb(G, name=getattr(G, "name", "A"))


def section_finab(G: FiniteGroup, N: Subgroup):
    """(FinAb of G/N, the quotient group, the projection)."""
    Q, proj = quotient(G, N)
    return FinAb(Q), Q, proj


# ---------------------------------------------------------------------------
# tensor product of two finite abelian groups


@dataclass(frozen=True)
class TensorElement:
    grid: "TensorGrid"
    token: int

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if other.grid is not self.grid:
            raise ValueError("elements of different tensor grids")
        g = self.grid.group
        return TensorElement(self.grid, g.mul(self.token, other.token))

    def __neg__(self) -> "TensorElement":
        return TensorElement(self.grid, self.grid.group.inv(self.token))

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + (-other)

    def is_zero(self) -> bool:
        return self.token == self.grid.group.identity_token


class TensorGrid:
    """Tensor product of two finite abelian groups as a gcd grid.

    For factor chains (d_i) and (e_j) the product is the direct sum of
    Z/gcd(d_i, e_j) over all pairs; positions with gcd 1 are dropped.
    bilinear maps coordinate rows of the two sides to grid tokens and is
    verified biadditive on generators at construction.
    """

    def __init__(self, A: FinAb, B: FinAb):
        self.left = A
        self.right = B
        pairs = []
        cyc = []
        for i, d in enumerate(A.factors):
            for j, e in enumerate(B.factors):
                g = math.gcd(d, e)
                if g > 1:
                    pairs.append((i, j, g))
                    cyc.append(g)
        self.pairs = tuple(pairs)
        self.cyclic_factors = tuple(cyc)
        self.group = abelian_group(cyc or [1], name=f"{A.name}(x){B.name}")
        self._verify()

    def bilinear(self, a_coords, b_coords) -> np.ndarray:
        """Grid tokens for rows of coordinates on each side."""
        A = np.asarray(a_coords, dtype=np.int64)
        B = np.asarray(b_coords, dtype=np.int64)
        A = A.reshape(-1, len(self.left.factors)) if len(self.left.factors) else A.reshape(len(np.atleast_2d(A)), 0)
        B = B.reshape(-1, len(self.right.factors)) if len(self.right.factors) else B.reshape(len(np.atleast_2d(B)), 0)
        if A.shape[0] == 1 and B.shape[0] > 1:
            A = np.broadcast_to(A, (B.shape[0], A.shape[1]))
        if B.shape[0] == 1 and A.shape[0] > 1:
            B = np.broadcast_to(B, (A.shape[0], B.shape[1]))
        n = A.shape[0]
        E = np.zeros((n, len(self.pairs)), dtype=np.int64)
        for pos, (i, j, g) in enumerate(self.pairs):
            E[:, pos] = (A[:, i] * B[:, j]) % g
        if not len(self.pairs):
            return np.full(n, self.group.identity_token, dtype=np.int64)
        return np.asarray(self.group.encode(E))

    def element(self, a_coords, b_coords) -> TensorElement:
        return TensorElement(self, int(self.bilinear(a_coords, b_coords)[0]))

    def _verify(self):
        ra = len(self.left.factors)
        rb = len(self.right.factors)
        g = self.group
        # biadditivity on basis rows: (x + x') (x) y == x(x)y + x'(x)y
        for i in range(ra):
            for j in range(rb):
                ei = np.zeros((1, ra), dtype=np.int64)
                ej = np.zeros((1, rb), dtype=np.int64)
                ei[0, i] = 1
                ej[0, j] = 1
                one = int(self.bilinear(ei, ej)[0])
                two = int(self.bilinear(2 * ei, ej)[0])
                if two != g.mul(one, one):
                    raise PreconditionError("tensor map is not biadditive", witness={})
                # order annihilation on each side
                di = self.left.factors[i]
                if int(self.bilinear(di * ei, ej)[0]) != g.identity_token:
                    raise PreconditionError("tensor map ignores left order", witness={})
                ejord = self.right.factors[j]
                if int(self.bilinear(ei, ejord * ej)[0]) != g.identity_token:
                    raise PreconditionError("tensor map ignores right order", witness={})


def tensor_product(A: FinAb, B: FinAb) -> tuple[TensorGrid, "TensorGrid.bilinear"]:
    grid = TensorGrid(A, B)
    return grid, grid.bilinear


# ---------------------------------------------------------------------------
# power congruences


def solve_power_congruence(Q: FiniteGroup, q: int, target) -> list[int]:
    """All x in the abelian group Q with x^q = target, in token order."""
    toks = np.sort(np.asarray(Q.all_tokens()))
    mask = np.asarray(Q.pow_many(toks, q)) == _tok(target)
    return [int(t) for t in toks[mask]]


# ---------------------------------------------------------------------------
# base classification closed forms for abelian groups


def _ordp(x: int, p: int):
    if x == 0:
        return math.inf
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


def _abelian_in_variety(fab: FinAb, m: int) -> bool:
    return m == 0 or (fab.exponent() > 0 and m % fab.exponent() == 0)


def abelian_strong_base(G: FiniteGroup, v) -> bool:
    """Closed-form strong amalgamation base test for abelian groups.

    Works one prime at a time on the invariant factors; the generic
    checker must agree with this on every abelian input, which the test
    suite enforces.
    """
    m, n = v.m, v.n
    fab = G if isinstance(G, FinAb) else FinAb(G)
    if not _abelian_in_variety(fab, m):
        raise PreconditionError(
            "group lies outside the variety", witness={"exponent": fab.exponent()}
        )
    if m == 0 and n == 0:
        return fab.order == 1
    if m == 0:
        # every p-part with p | n must vanish
        for p in factorize(n):
            if fab.primary_factors(p):
                return False
        return True
    for p in factorize(m):
        a = _ordp(n, p)
        if a == 0:
            continue
        b = _ordp(m, p) - a
        pf = fab.primary_factors(p)
        if b < a:
            if pf:
                return False
        else:
            if any(f != p ** (a + b) for f in pf):
                return False
    return True


def abelian_special_base(G: FiniteGroup, v) -> bool:
    """Closed-form special amalgamation base test for abelian groups."""
    m, n = v.m, v.n
    fab = G if isinstance(G, FinAb) else FinAb(G)
    if not _abelian_in_variety(fab, m):
        raise PreconditionError(
            "group lies outside the variety", witness={"exponent": fab.exponent()}
        )
    if m == 0:
        primes = factorize(n) if n > 0 else {p: 1 for p in factorize(max(fab.order, 1))}
        for p in primes:
            a = _ordp(n, p)  # inf when n == 0
            if n > 0 and a <= 1:
                continue
            if len(fab.primary_factors(p)) > 1:
                return False
        return True
    for p in factorize(m):
        a = _ordp(n, p)
        if a <= 1:
            continue
        b = _ordp(m, p) - a
        pf = fab.primary_factors(p)
        if b < a - 1:
            if len(pf) > 1:
                return False
        else:
            off = sum(1 for f in pf if f != p ** (a + b))
            if off > 1:
                return False
    return True
