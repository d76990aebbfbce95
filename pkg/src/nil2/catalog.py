"""Named example groups and amalgams with machine-checkable claims.

Each family pins an exact presentation, parameter ranges, and the
verdicts its construction is supposed to produce.  Claims are evaluated
lazily: claim_plan predicts cost from closed-form orders so oversized
instances become explicit skip records instead of silent gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import PreconditionError
from .variety import Variety, free_nil2_group, is_valid_pair
from .core import (
    Homomorphism,
    PcGroup,
    PcPresentation,
    Subgroup,
    abelian_group,
    factorize,
    rebuild_as_pcgroup,
    subgroup_closure,
)
from .amalgam import (
    Amalgam,
    check_strong,
    check_weak,
    dominion,
    is_special_base,
    is_strong_base,
)

DEFAULT_BUDGET = 2**20


def _is_prime(p: int) -> bool:
    return p > 1 and factorize(p) == {p: 1}


def _need(cond: bool, msg: str, params: dict) -> None:
    if not cond:
        raise ValueError(f"{msg} (got {params})")


@dataclass(frozen=True)
class Claim:
    """One expected verdict, with everything needed to re-check it.

    The target pair (m, n) is stored raw so invalid pairs can still be
    planned (they become skip records); variety() materializes it.
    """

    kind: str  # check_strong | check_weak | strong_base | special_base | dominion_contains
    m: int
    n: int
    expected: bool = True
    part: str = ""
    group_part: str = ""
    sub_part: str = ""
    element_desc: str = ""
    note: str = ""

    def variety(self) -> Variety:
        return Variety(self.m, self.n)


@dataclass
class BuiltEntry:
    name: str
    params: dict
    primary: object
    parts: dict = field(default_factory=dict)
    elements: dict = field(default_factory=dict)  # desc -> token in its group part

    def part(self, key: str):
        if key in ("", None):
            return self.primary
        if key not in self.parts:
            raise KeyError(f"{self.name} has no part {key!r}")
        return self.parts[key]


@dataclass(frozen=True)
class PlannedClaim:
    claim: Claim
    status: str  # runnable | skip
    reason: str = ""
    cost: int = 0


@dataclass(frozen=True)
class CatalogFamily:
    name: str
    param_names: tuple
    summary: str
    validate: object  # params -> None (raises ValueError)
    part_orders: object  # params -> dict part -> order
    claims: object  # params -> list[Claim]
    build: object  # params -> BuiltEntry


def _comm_chain(name, letters, orders, comm, powers=None):
    pres = PcPresentation(tuple(letters), tuple(orders), powers or {}, comm)
    return PcGroup(pres, name=name)


# ---------------------------------------------------------------------------
# family constructions


def _guidingex_validate(params):
    _need(not params, "takes no parameters", params)


def _guidingex_orders(params):
    return {"": 80, "M": 64, "A": 4, "B": 16, "D": 2}


def _guidingex_claims(params):
    return [
        Claim("check_strong", 8, 4, True),
        Claim("check_weak", 4, 2, False),
    ]


def _guidingex_build(params):
    M = _comm_chain("M", "xyc", (4, 4, 4), {(1, 0): ((2, 1),)})
    x, y, _ = M.generator_tokens()
    A, _ = rebuild_as_pcgroup(M, subgroup_closure(M, [x]), "A")
    B, _ = rebuild_as_pcgroup(M, subgroup_closure(M, [M.pw(x, 2), y]), "B")
    D = abelian_group([2], name="D")
    d = D.generator_tokens()[0]
    phiA = Homomorphism(D, A, {d: A.pw(A.generator_tokens()[0], 2)})
    phiB = Homomorphism(D, B, {d: B.generator_tokens()[0]})
    am = Amalgam(A, B, D, phiA, phiB, name="guidingex")
    return BuiltEntry("guidingex", {}, am, {"M": M, "A": A, "B": B, "D": D})


def _pab(params, *keys):
    return tuple(int(params[k]) for k in keys)


def _bsmall_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 0 and b > 0, "requires a > 0 and b > 0", params)


def _bsmall_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    return {"": p ** (3 * a + 2 * b)}


def _bsmall_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    out = [Claim("strong_base", p ** (a + b), p**a, True)]
    if b <= a + 1:
        out.append(Claim("strong_base", p ** (a + b), p ** (a + 1), False))
    return out


def _bsmall_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    G = free_nil2_group(2, Variety(p ** (a + b), p**a), name="bsmall")
    return BuiltEntry("bsmall", dict(params), G)


def _bbig_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 0 and b > a + 1, "requires a > 0 and b > a + 1", params)


def _bbig_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    return {"": p ** (3 * a + 2 * b - 1)}


def _bbig_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    return [
        Claim("strong_base", p ** (a + b), p**a, True),
        Claim("strong_base", p ** (a + b), p ** (a + 1), False),
    ]


def _bbig_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    G = _comm_chain(
        "bbig", "xyc", (p ** (a + b), p ** (a + b - 1), p**a), {(1, 0): ((2, 1),)}
    )
    return BuiltEntry("bbig", dict(params), G)


def _firstentryall_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 0 and b > 0, "requires a > 0 and b > 0", params)


def _firstentryall_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    return {"": p ** (3 * a + 3 * b)}


def _firstentryall_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    return [
        Claim("strong_base", p ** (a + b), p**a, True),
        Claim("strong_base", p ** (a + b + 1), p**a, False),
    ]


def _firstentryall_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    # z^(p^b) = [y,x] = c, z central
    G = _comm_chain(
        "firstentryall",
        "xyzc",
        (p ** (a + b), p ** (a + b), p**b, p**a),
        {(1, 0): ((3, 1),)},
        powers={2: ((3, 1),)},
    )
    return BuiltEntry("firstentryall", dict(params), G)


def _notanideal_validate(params):
    (p,) = _pab(params, "p")
    _need(_is_prime(p), "p must be prime", params)


def _notanideal_orders(params):
    (p,) = _pab(params, "p")
    return {"": p**6}


def _notanideal_claims(params):
    (p,) = _pab(params, "p")
    return [
        Claim("strong_base", p**5, 1, True),
        Claim("strong_base", p**3, p, True),
        Claim("strong_base", p**5, p, False,
              note="join of two base varieties need not be one"),
    ]


def _notanideal_build(params):
    (p,) = _pab(params, "p")
    G = abelian_group([p**3, p**3], name="notanideal")
    return BuiltEntry("notanideal", dict(params), G)


def _advanceinboth_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 0 and b >= 0, "requires a > 0 and b >= 0", params)
    _need(p != 2 or b > 0, "p = 2 requires b > 0", params)


def _advanceinboth_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    own = p ** (2 * (1 + b)) if a == 1 else p ** (3 * a + 2 * b - 1)
    return {"": own, "K": p ** (3 * a + 2 * b + 3), "G": own}


def _advanceinboth_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    return [
        Claim("special_base", p ** (a + b), p**a, True),
        Claim("special_base", p ** (a + b + 1), p ** (a + 1), False),
        Claim(
            "dominion_contains", p ** (a + b + 1), p ** (a + 1),
            True,
            group_part="K",
            sub_part="G",
            element_desc="[r,s]^p",
        ),
    ]


def _advanceinboth_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    if a == 1:
        G = abelian_group([p ** (1 + b), p ** (1 + b)], name="advanceinboth")
    else:
        G = _comm_chain(
            "advanceinboth",
            "xyc",
            (p ** (a + b), p ** (a + b), p ** (a - 1)),
            {(1, 0): ((2, 1),)},
        )
    K = free_nil2_group(2, Variety(p ** (a + b + 1), p ** (a + 1)), name="K")
    r, s = K.generator_tokens()[:2]
    sub = subgroup_closure(K, [K.pw(r, p), K.pw(s, p)])
    elem = K.pw(K.cm(r, s), p)
    return BuiltEntry(
        "advanceinboth",
        dict(params),
        G,
        {"K": K, "G": sub},
        {"[r,s]^p": int(elem)},
    )


def _bbigspecial_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 1 and b >= a - 1, "requires a > 1 and b >= a - 1", params)


def _bbigspecial_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    return {"": p ** (2 * (a + b))}


def _bbigspecial_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    return [
        Claim("special_base", p ** (a + b), p**a, True),
        Claim("special_base", p ** (a + b + 1), p**a, False),
    ]


def _bbigspecial_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    G = abelian_group([p ** (a + b), p ** (a + b)], name="bbigspecial")
    return BuiltEntry("bbigspecial", dict(params), G)


def _advancesecondsp_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 1 and b >= 1, "requires a > 1 and b >= 1", params)


def _advancesecondsp_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    return {"": p ** (5 * a + 3 * b - 2)}


def _advancesecondsp_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    return [
        Claim("special_base", p ** (a + b), p**a, True),
        Claim("special_base", p ** (a + b), p ** (a + 1), False),
    ]


def _advancesecondsp_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    # [y,x] = c1, [z,y] = c2, [x,z] = e
    G = _comm_chain(
        "advancesecondsp",
        ("x", "y", "z", "c1", "c2"),
        (p ** (a + b - 1), p ** (a + b), p ** (a + b - 1), p**a, p**a),
        {(1, 0): ((3, 1),), (2, 1): ((4, 1),)},
    )
    return BuiltEntry("advancesecondsp", dict(params), G)


def _bsmallspecial_validate(params):
    p, a, b = _pab(params, "p", "a", "b")
    _need(_is_prime(p), "p must be prime", params)
    _need(a > 1 and b > 1, "requires a > 1 and b > 1", params)


def _bsmallspecial_orders(params):
    p, a, b = _pab(params, "p", "a", "b")
    return {"": p ** (5 * a + 5 * b)}


def _bsmallspecial_claims(params):
    p, a, b = _pab(params, "p", "a", "b")
    return [
        Claim("special_base", p ** (a + b), p**a, True),
        Claim("special_base", p ** (a + b + 1), p**a, False),
    ]


def _bsmallspecial_build(params):
    p, a, b = _pab(params, "p", "a", "b")
    e = p ** (a + b)
    # c1 = [y,x], c2 = [y,z]; r, s centralize everything and supply the
    # commutators as p^b-th powers
    G = _comm_chain(
        "bsmallspecial",
        ("x", "y", "z", "r", "s", "c1", "c2"),
        (e, e, e, p**b, p**b, p**a, p**a),
        {(1, 0): ((5, 1),), (2, 1): ((6, p**a - 1),)},
        powers={3: ((5, 1),), 4: ((6, 1),)},
    )
    return BuiltEntry("bsmallspecial", dict(params), G)


def _newprimesquare_validate(params):
    p, n = _pab(params, "p", "n")
    _need(_is_prime(p), "p must be prime", params)
    _need(n > 0 and math.gcd(p, n) == 1, "requires n > 0 coprime to p", params)


def _newprimesquare_orders(params):
    p, _ = _pab(params, "p", "n")
    return {"": p**2}


def _newprimesquare_claims(params):
    p, n = _pab(params, "p", "n")
    return [
        Claim("special_base", 0, n, True),
        Claim("special_base", 0, p * p * n, False),
    ]


def _newprimesquare_build(params):
    p, _ = _pab(params, "p", "n")
    return BuiltEntry(
        "newprimesquare", dict(params), abelian_group([p, p], name="newprimesquare")
    )


def _oldprime_validate(params):
    p, n = _pab(params, "p", "n")
    _need(_is_prime(p), "p must be prime", params)
    _need(n > 0 and n % p == 0, "requires n > 0 divisible by p", params)


def _ordp(n: int, p: int) -> int:
    a = 0
    while n % p == 0:
        n //= p
        a += 1
    return a


def _oldprime_orders(params):
    p, n = _pab(params, "p", "n")
    a = _ordp(n, p)
    return {"": p**2 if a == 1 else p ** (3 * a - 1)}


def _oldprime_claims(params):
    p, n = _pab(params, "p", "n")
    return [
        Claim("special_base", 0, n, True),
        Claim("special_base", 0, p * n, False),
    ]


def _oldprime_build(params):
    p, n = _pab(params, "p", "n")
    a = _ordp(n, p)
    if a == 1:
        G = abelian_group([p, p], name="oldprime")
    else:
        G = _comm_chain(
            "oldprime", "xyc", (p**a, p**a, p ** (a - 1)), {(1, 0): ((2, 1),)}
        )
    return BuiltEntry("oldprime", dict(params), G)


def _section6_validate(params):
    _need(not params, "takes no parameters", params)


def _section6_orders(params):
    return {"": 64, "F": 4096, "G": 64}


def _section6_claims(params):
    return [
        Claim("special_base", 4, 2, True),
        Claim("special_base", 8, 4, False),
        Claim(
            "dominion_contains", 8, 4,
            True,
            group_part="F",
            sub_part="G",
            element_desc="[b,c]^2",
        ),
    ]


def _section6_build(params):
    G = _comm_chain(
        "section6",
        ("x", "y", "z", "c1", "c2"),
        (4, 2, 2, 2, 2),
        {(1, 0): ((3, 1),), (2, 0): ((4, 1),)},
    )
    F = _comm_chain(
        "F",
        ("a", "b", "c", "d1", "d2", "d3"),
        (4, 4, 4, 4, 4, 4),
        {(1, 0): ((3, 1),), (2, 0): ((4, 1),), (2, 1): ((5, 1),)},
    )
    fa, fb, fc = F.generator_tokens()[:3]
    sub = subgroup_closure(F, [fa, F.pw(fb, 2), F.pw(fc, 2)])
    elem = F.pw(F.cm(fb, fc), 2)
    return BuiltEntry(
        "section6_counterexample",
        {},
        G,
        {"F": F, "G": sub},
        {"[b,c]^2": int(elem)},
    )


FAMILIES = {
    f.name: f
    for f in (
        CatalogFamily(
            "guidingex", (),
            "order-64 ambient with a cyclic-core amalgam separating the"
            " embeddability verdicts of (4,2) and (8,4)",
            _guidingex_validate, _guidingex_orders, _guidingex_claims,
            _guidingex_build,
        ),
        CatalogFamily(
            "bsmall", ("p", "a", "b"),
            "rank-2 relatively free group; strong base exactly up to its"
            " own variety",
            _bsmall_validate, _bsmall_orders, _bsmall_claims, _bsmall_build,
        ),
        CatalogFamily(
            "bbig", ("p", "a", "b"),
            "two-generator group with unequal generator orders; strong base"
            " that dies when n advances",
            _bbig_validate, _bbig_orders, _bbig_claims, _bbig_build,
        ),
        CatalogFamily(
            "firstentryall", ("p", "a", "b"),
            "three-generator group whose central letter is both a power and"
            " a commutator; strong base that dies when m advances",
            _firstentryall_validate, _firstentryall_orders,
            _firstentryall_claims, _firstentryall_build,
        ),
        CatalogFamily(
            "notanideal", ("p",),
            "square of a cyclic p-cube; witnesses that base varieties are"
            " not closed under joins",
            _notanideal_validate, _notanideal_orders, _notanideal_claims,
            _notanideal_build,
        ),
        CatalogFamily(
            "advanceinboth", ("p", "a", "b"),
            "two-generator group, special base that dies when m and n"
            " advance together; carries the root-overgroup dominion pair",
            _advanceinboth_validate, _advanceinboth_orders,
            _advanceinboth_claims, _advanceinboth_build,
        ),
        CatalogFamily(
            "bbigspecial", ("p", "a", "b"),
            "homocyclic abelian square; special base that dies when m"
            " advances",
            _bbigspecial_validate, _bbigspecial_orders, _bbigspecial_claims,
            _bbigspecial_build,
        ),
        CatalogFamily(
            "advancesecondsp", ("p", "a", "b"),
            "three-generator chain with two independent commutators;"
            " special base that dies when n advances",
            _advancesecondsp_validate, _advancesecondsp_orders,
            _advancesecondsp_claims, _advancesecondsp_build,
        ),
        CatalogFamily(
            "bsmallspecial", ("p", "a", "b"),
            "five-generator group whose commutators acquire central roots;"
            " special base that dies when m advances",
            _bsmallspecial_validate, _bsmallspecial_orders,
            _bsmallspecial_claims, _bsmallspecial_build,
        ),
        CatalogFamily(
            "newprimesquare", ("p", "n"),
            "elementary abelian square off the prime support of n;"
            " closed in (0,n), open once p^2 joins n",
            _newprimesquare_validate, _newprimesquare_orders,
            _newprimesquare_claims, _newprimesquare_build,
        ),
        CatalogFamily(
            "oldprime", ("p", "n"),
            "two-generator p-part matched to ord_p(n); closed in (0,n),"
            " open in (0,pn)",
            _oldprime_validate, _oldprime_orders, _oldprime_claims,
            _oldprime_build,
        ),
        CatalogFamily(
            "section6_counterexample", (),
            "exponent-4 group with cyclic central quotient that still fails"
            " absolute closure in (8,4)",
            _section6_validate, _section6_orders, _section6_claims,
            _section6_build,
        ),
    )
}


def catalog_names() -> list[str]:
    return sorted(FAMILIES)


def catalog(name: str, **params) -> BuiltEntry:
    """Build one catalog instance with validated parameters."""
    if name not in FAMILIES:
        raise KeyError(f"unknown catalog entry {name!r}")
    fam = FAMILIES[name]
    extra = set(params) - set(fam.param_names)
    missing = set(fam.param_names) - set(params)
    if extra or missing:
        raise ValueError(
            f"{name} takes parameters {fam.param_names}, got {sorted(params)}"
        )
    fam.validate(params)
    return fam.build(params)


def parse_catalog_ref(text: str):
    """'name', 'name:p=2,a=1,b=1', optionally '.part' -> (name, params, part)."""
    part = None
    head = text
    if "." in text:
        head, part = text.split(".", 1)
    params: dict = {}
    name = head
    if ":" in head:
        name, plist = head.split(":", 1)
        for item in plist.split(","):
            if "=" not in item:
                raise ValueError(f"bad parameter {item!r} in {text!r}")
            k, val = item.split("=", 1)
            params[k.strip()] = int(val)
    return name, params, part


def claim_plan(name: str, params: dict, budget: int = DEFAULT_BUDGET):
    """Claims with skip status, computed without building anything."""
    fam = FAMILIES[name]
    fam.validate(params)
    orders = fam.part_orders(params)
    out = []
    for claim in fam.claims(params):
        if not is_valid_pair(claim.m, claim.n):
            out.append(
                PlannedClaim(
                    claim, "skip",
                    f"({claim.m},{claim.n}) is not a valid variety pair", 0,
                )
            )
            continue
        needed = [claim.part] if claim.kind != "dominion_contains" else [
            claim.group_part, claim.sub_part
        ]
        cost = max(orders[k] for k in needed)
        if cost > budget:
            out.append(
                PlannedClaim(
                    claim, "skip", f"instance order {cost} exceeds budget {budget}",
                    cost,
                )
            )
            continue
        out.append(PlannedClaim(claim, "runnable", "", cost))
    return out


def evaluate_claim(built: BuiltEntry, claim: Claim):
    """(ok, detail) for one claim against a built instance."""
    v = claim.variety()
    if claim.kind in ("check_strong", "check_weak"):
        am = built.part(claim.part)
        if not isinstance(am, Amalgam):
            raise PreconditionError("claim target is not an amalgam", witness={})
        res = check_strong(am, v) if claim.kind == "check_strong" else check_weak(am, v)
        return bool(res) == claim.expected, {"verdict": bool(res), **res.witness}
    if claim.kind in ("strong_base", "special_base"):
        G = built.part(claim.part)
        res = (
            is_strong_base(G, v)
            if claim.kind == "strong_base"
            else is_special_base(G, v)
        )
        return bool(res) == claim.expected, {"verdict": bool(res), **res.witness}
    if claim.kind == "dominion_contains":
        K = built.part(claim.group_part)
        H = built.part(claim.sub_part)
        if not isinstance(H, Subgroup):
            raise PreconditionError("claim subgroup part is wrong", witness={})
        dom = dominion(K, H, v)
        t = built.elements[claim.element_desc]
        ok = bool(dom.contains_one(t)) and not bool(H.contains_one(t))
        return ok == claim.expected, {
            "in_dominion": bool(dom.contains_one(t)),
            "in_subgroup": bool(H.contains_one(t)),
            "dominion_order": dom.order,
        }
    raise ValueError(f"unknown claim kind {claim.kind!r}")


__all__ = [
    "BuiltEntry",
    "Claim",
    "CatalogFamily",
    "DEFAULT_BUDGET",
    "FAMILIES",
    "PlannedClaim",
    "catalog",
    "catalog_names",
    "claim_plan",
    "evaluate_claim",
    "parse_catalog_ref",
]
