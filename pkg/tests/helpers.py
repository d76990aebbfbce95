"""Slow reference implementations the package is tested against.

Everything here works from first principles on explicit data: collection
is done block by block on words, closures by breadth-first search over
stored sets, invariant factors via sympy.  None of it shares code with
the package's vectorized paths.
"""

import math
from itertools import product

import numpy as np


# ---------------------------------------------------------------------------
# naive collection on pc presentations


def _merge_blocks(word):
    i = 0
    while i < len(word):
        if word[i][1] == 0:
            del word[i]
            continue
        if i + 1 < len(word) and word[i][0] == word[i + 1][0]:
            word[i][1] += word[i + 1][1]
            del word[i + 1]
            continue
        i += 1


def collect_word(pres, blocks):
    """Collect a word given as (pos, exp) blocks into normal-form exps."""
    orders = pres.orders
    word = [[int(p), int(e)] for p, e in blocks if int(e) != 0]
    guard = 0
    while True:
        guard += 1
        if guard > 200_000:
            raise RuntimeError("collection did not terminate")
        _merge_blocks(word)
        changed = False
        for i, (pos, exp) in enumerate(word):
            if 0 <= exp < orders[pos]:
                continue
            k = exp // orders[pos]
            word[i][1] = exp - k * orders[pos]
            tail = pres.power_tails.get(pos, ())
            ins = []
            if tail:
                one = [[p, e] for p, e in tail]
                rev = [[p, -e] for p, e in reversed(tail)]
                for _ in range(abs(k)):
                    ins.extend(one if k > 0 else rev)
            word[i + 1 : i + 1] = ins
            changed = True
            break
        if changed:
            continue
        for i in range(len(word) - 1):
            j1, e1 = word[i]
            j2, e2 = word[i + 1]
            if j1 > j2:
                word[i], word[i + 1] = [j2, e2], [j1, e1]
                tail = pres.comm_tails.get((j1, j2), ())
                k = e1 * e2
                if tail and k:
                    # commutator values are central, append anywhere
                    word.extend([p, e * k] for p, e in tail)
                changed = True
                break
        if not changed:
            break
    exps = [0] * len(orders)
    for pos, exp in word:
        exps[pos] = exp
    return tuple(exps)


def naive_mul(pres, ea, eb):
    blocks = [(i, e) for i, e in enumerate(ea)] + [(i, e) for i, e in enumerate(eb)]
    return collect_word(pres, blocks)


def naive_inv(pres, ea):
    blocks = [(i, -e) for i, e in reversed(list(enumerate(ea)))]
    return collect_word(pres, blocks)


def naive_pow(pres, ea, s):
    if s < 0:
        return naive_pow(pres, naive_inv(pres, ea), -s)
    acc = tuple([0] * len(pres.orders))
    base = tuple(ea)
    while s:
        if s & 1:
            acc = naive_mul(pres, acc, base)
        base = naive_mul(pres, base, base)
        s >>= 1
    return acc


def naive_comm(pres, ea, eb):
    lhs = naive_mul(pres, naive_inv(pres, ea), naive_inv(pres, eb))
    rhs = naive_mul(pres, ea, eb)
    return naive_mul(pres, lhs, rhs)


def all_exps(pres):
    return product(*(range(o) for o in pres.orders))


def token_of(pres, exps):
    t = 0
    for o, e in zip(pres.orders, exps):
        t = t * o + e
    return t


# ---------------------------------------------------------------------------
# brute-force set machinery


def brute_closure(mul, identity, gens):
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = mul(a, g)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def brute_center(elements, mul):
    return {
        z for z in elements if all(mul(z, g) == mul(g, z) for g in elements)
    }


def brute_order(mul, identity, x):
    n = 1
    acc = x
    while acc != identity:
        acc = mul(acc, x)
        n += 1
    return n


# ---------------------------------------------------------------------------
# arithmetic oracles


def sympy_invariant_factors(M) -> list:
    """Nontrivial invariant factors of Z^n / rows(M), via sympy."""
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form

    S = smith_normal_form(Matrix(M))
    rows, cols = S.shape
    diag = [abs(int(S[i, i])) for i in range(min(rows, cols))]
    return [d for d in diag if d not in (0, 1)]


def tensor_order_formula(factors_a, factors_b) -> int:
    return math.prod(
        math.gcd(int(a), int(b)) for a in factors_a for b in factors_b
    )


def binomial2(n: int) -> int:
    return n * (n - 1) // 2


# ---------------------------------------------------------------------------
# random homomorphisms for universal-property checks


def random_hom(rng, G, H, tries=60):
    """A verified homomorphism G -> H with random generator images."""
    from nil2.core import Homomorphism

    gens = [int(g) for g in G.generator_tokens()]
    toks = np.asarray(H.all_tokens(), dtype=np.int64)
    for _ in range(tries):
        images = {g: int(toks[rng.integers(0, len(toks))]) for g in gens}
        try:
            return Homomorphism(G, H, images)
        except Exception:
            continue
    return Homomorphism(G, H, {g: int(H.identity_token) for g in gens})
