"""Command-line interface over named groups, amalgams and the catalog.

Objects come from three places: a text spec file (--spec), a catalog
instance opened with --from, or fully qualified catalog references like
``bsmall:p=2,a=1,b=1``.  Every run prints one report, as lines or as a
single JSON document, and exits 0/1 on true/false verdicts, 2 on usage
errors, 3 on budget refusals, 4 on a cross-check disagreement.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, PresentationError, ResourceLimitError
from .variety import Variety
from .core import Homomorphism, PcGroup, PcPresentation, Subgroup, subgroup_closure
from .amalgam import (
    Amalgam,
    can_adjoin_root,
    can_adjoin_two_roots,
    check_strong,
    check_weak,
    dominion,
    embeddability_filter_generator,
    is_special_base,
    is_strong_base,
)
from .coproduct import (
    oracle_adjoin_root,
    oracle_adjoin_two_roots,
    oracle_dominion,
    oracle_strong,
    oracle_weak,
)
from .catalog import (
    FAMILIES as _FAMILIES,
    catalog as _catalog_build,
    catalog_names as _catalog_names,
    claim_plan as _claim_plan,
    evaluate_claim as _evaluate_claim,
    parse_catalog_ref as _parse_catalog_ref,
)

VERSION = "0.1.0"
LIST_CAP = 1024


class UsageError(Exception):
    pass


class CrossCheckError(Exception):
    pass


class SpecParseError(Exception):
    def __init__(self, path: str, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line
        self.msg = msg


# ---------------------------------------------------------------------------
# spec files


def _parse_word(word: str, index: dict, path: str, lineno: int):
    """'x^2*y' -> [(pos, exp), ...]; 'e' -> []."""
    if word == "e":
        return []
    out = []
    for term in word.split("*"):
        if not term:
            raise SpecParseError(path, lineno, "empty factor in word")
        name, sep, etxt = term.partition("^")
        if sep:
            try:
                exp = int(etxt)
            except ValueError:
                raise SpecParseError(path, lineno, f"bad exponent {etxt!r}")
        else:
            exp = 1
        if name not in index:
            raise SpecParseError(path, lineno, f"unknown generator {name!r}")
        out.append((index[name], exp))
    return out


def _word_tail(pairs):
    acc: dict[int, int] = {}
    for pos, exp in pairs:
        acc[pos] = acc.get(pos, 0) + exp
    return tuple((pos, exp) for pos, exp in sorted(acc.items()) if exp)


def _eval_word(G, word: str, path: str, lineno: int) -> int:
    tokens = {name: tok for name, tok in zip(G.pres.names, G.generator_tokens())}
    positions = {name: name for name in tokens}
    t = G.identity_token
    for name, exp in _parse_word(word, positions, path, lineno):
        t = G.mul(t, G.pw(tokens[name], exp))
    return t


class _GroupBlock:
    def __init__(self, name, lineno):
        self.name = name
        self.lineno = lineno
        self.names: list[str] = []
        self.orders: dict[str, int] = {}
        self.pows: dict[str, tuple] = {}
        self.comms: dict[tuple, tuple] = {}


def _finish_group(blk: _GroupBlock, path: str, lineno: int) -> PcGroup:
    if not blk.names:
        raise SpecParseError(path, lineno, f"group {blk.name} declares no gens")
    missing = [g for g in blk.names if g not in blk.orders]
    if missing:
        raise SpecParseError(path, lineno, f"missing order for {missing[0]!r}")
    index = {g: i for i, g in enumerate(blk.names)}
    power_tails = {index[g]: t for g, t in blk.pows.items()}
    comm_tails = dict(blk.comms)
    try:
        pres = PcPresentation(
            tuple(blk.names),
            tuple(blk.orders[g] for g in blk.names),
            power_tails,
            comm_tails,
        )
        return PcGroup(pres, name=blk.name)
    except (PresentationError, PreconditionError) as e:
        raise SpecParseError(path, lineno, str(e))


def _parse_amalgam_line(toks, namespace, path, lineno):
    # amalgam <name> of <A> <B> core <D> via d->w ... ; d->w ...
    if len(toks) < 9 or toks[2] != "of" or toks[5] != "core" or toks[7] != "via":
        raise SpecParseError(
            path, lineno,
            "expected: amalgam <name> of <A> <B> core <D> via <maps> ; <maps>",
        )
    name = toks[1]
    refs = []
    for ref in (toks[3], toks[4], toks[6]):
        if ref not in namespace or not isinstance(namespace[ref], PcGroup):
            raise SpecParseError(path, lineno, f"unknown group {ref!r}")
        refs.append(namespace[ref])
    A, B, D = refs
    blob = " ".join(toks[8:])
    segments = [s.split() for s in blob.split(";")]
    if len(segments) != 2:
        raise SpecParseError(path, lineno, "maps need exactly one ';' separator")
    d_tokens = {n: t for n, t in zip(D.pres.names, D.generator_tokens())}
    images = []
    for seg, target in zip(segments, (A, B)):
        gm: dict[int, int] = {}
        for item in seg:
            did, sep, word = item.partition("->")
            if not sep:
                raise SpecParseError(path, lineno, f"bad map item {item!r}")
            if did not in d_tokens:
                raise SpecParseError(path, lineno, f"{did!r} is not a generator of {D.name}")
            gm[d_tokens[did]] = _eval_word(target, word, path, lineno)
        left = [n for n in D.pres.names if d_tokens[n] not in gm]
        if left:
            raise SpecParseError(path, lineno, f"no image given for {left[0]!r}")
        images.append(gm)
    try:
        phiA = Homomorphism(D, A, images[0])
        phiB = Homomorphism(D, B, images[1])
        return Amalgam(A, B, D, phiA, phiB, name=name)
    except PreconditionError as e:
        raise SpecParseError(path, lineno, str(e))


def parse_spec(path: str, text: str | None = None) -> dict:
    """Parse a spec file into {name: PcGroup | Amalgam}."""
    if text is None:
        with open(path, "rb") as fh:
            raw = fh.read()
    else:
        raw = text.encode("ascii", "surrogateescape")
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as e:
        line = raw[: e.start].count(b"\n") + 1
        raise SpecParseError(path, line, "non-ASCII byte in spec file")
    namespace: dict = {}
    blk: _GroupBlock | None = None
    for lineno, rawline in enumerate(text.replace("\r\n", "\n").split("\n"), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if blk is None:
            if head == "group":
                if len(toks) != 2:
                    raise SpecParseError(path, lineno, "expected: group <name>")
                if toks[1] in namespace:
                    raise SpecParseError(path, lineno, f"duplicate name {toks[1]!r}")
                blk = _GroupBlock(toks[1], lineno)
            elif head == "amalgam":
                am = _parse_amalgam_line(toks, namespace, path, lineno)
                if am.name in namespace:
                    raise SpecParseError(path, lineno, f"duplicate name {am.name!r}")
                namespace[am.name] = am
            else:
                raise SpecParseError(path, lineno, f"unexpected directive {head!r}")
            continue
        index = {g: i for i, g in enumerate(blk.names)}
        if head == "gens":
            if blk.names:
                raise SpecParseError(path, lineno, "gens given twice")
            if len(toks) < 2:
                raise SpecParseError(path, lineno, "gens needs at least one id")
            if len(set(toks[1:])) != len(toks) - 1:
                raise SpecParseError(path, lineno, "duplicate generator id")
            blk.names = toks[1:]
        elif head == "order":
            if len(toks) != 3 or toks[1] not in index:
                raise SpecParseError(path, lineno, "expected: order <id> <int>")
            try:
                r = int(toks[2])
            except ValueError:
                raise SpecParseError(path, lineno, f"bad order {toks[2]!r}")
            if r < 1:
                raise SpecParseError(path, lineno, "orders must be >= 1")
            if toks[1] in blk.orders:
                raise SpecParseError(path, lineno, f"order of {toks[1]!r} given twice")
            blk.orders[toks[1]] = r
        elif head == "pow":
            if len(toks) < 4 or toks[2] != "=" or toks[1] not in index:
                raise SpecParseError(path, lineno, "expected: pow <id> = <word>")
            word = "".join(toks[3:])
            blk.pows[toks[1]] = _word_tail(_parse_word(word, index, path, lineno))
        elif head == "comm":
            if len(toks) < 5 or toks[3] != "=":
                raise SpecParseError(path, lineno, "expected: comm <id> <id> = <word>")
            a, b = toks[1], toks[2]
            if a not in index or b not in index:
                raise SpecParseError(path, lineno, f"unknown generator in comm")
            if a == b:
                raise SpecParseError(path, lineno, "comm of a generator with itself")
            word = "".join(toks[4:])
            pairs = _parse_word(word, index, path, lineno)
            i, j = index[a], index[b]
            if i > j:
                key, tail = (i, j), _word_tail(pairs)
            else:
                # [a,b] given with a earlier: store [b,a] = inverse word
                key, tail = (j, i), _word_tail([(p, -e) for p, e in pairs])
            if key in blk.comms:
                raise SpecParseError(path, lineno, "commutator relation given twice")
            blk.comms[key] = tail
        elif head == "end":
            namespace[blk.name] = _finish_group(blk, path, lineno)
            blk = None
        else:
            raise SpecParseError(path, lineno, f"unexpected directive {head!r}")
    if blk is not None:
        raise SpecParseError(path, len(text.split("\n")), f"group {blk.name} never ends")
    return namespace


# ---------------------------------------------------------------------------
# reports


def _jsonify(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_jsonify(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonify(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonify(v) for k, v in x.items()}
    return x


@dataclass
class Report:
    command: list
    variety: object
    verdict: object
    witness: object
    data: dict
    elapsed_ms: float
    version: str

    def to_dict(self):
        return {
            "command": self.command,
            "variety": self.variety,
            "verdict": self.verdict,
            "witness": self.witness,
            "data": self.data,
            "elapsed_ms": self.elapsed_ms,
            "version": self.version,
        }


def emit_report(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def parse_report(text: str) -> Report:
    d = json.loads(text)
    return Report(
        command=d["command"],
        variety=d["variety"],
        verdict=d["verdict"],
        witness=d["witness"],
        data=d["data"],
        elapsed_ms=d["elapsed_ms"],
        version=d["version"],
    )


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        if len(v) == 2 and all(isinstance(x, int) for x in v):
            return f"{v[0]},{v[1]}"
        return " ".join(_fmt_value(x) for x in v)
    if isinstance(v, dict):
        return " ".join(f"{k or 'primary'}={_fmt_value(w)}" for k, w in sorted(v.items()))
    return str(v)


def render_text(report: Report) -> str:
    lines = [f"command: {' '.join(report.command)}"]
    if report.variety is not None:
        lines.append(f"variety: {report.variety[0]},{report.variety[1]}")
    if report.verdict is not None:
        lines.append(f"verdict: {_fmt_value(report.verdict)}")
    if report.witness:
        lines.append(f"witness: {_fmt_value(report.witness)}")
    for key in sorted(report.data):
        v = report.data[key]
        if isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            lines.append(f"{key}:")
            lines.extend(f"  {_fmt_value(x)}" for x in v)
        else:
            lines.append(f"{key}: {_fmt_value(v)}")
    lines.append(f"elapsed_ms: {report.elapsed_ms}")
    lines.append(f"version: {report.version}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# object resolution


class _Resolver:
    def __init__(self, spec_path=None, from_ref=None):
        self.namespace = parse_spec(spec_path) if spec_path else {}
        self._built: dict = {}
        self.base = self._entry(from_ref) if from_ref else None

    def _entry(self, ref: str):
        name, params, part = _parse_catalog_ref(ref)
        if part is not None:
            raise UsageError(f"--from takes an entry, not a part: {ref!r}")
        return self._build(name, params)

    def _build(self, name, params):
        key = (name, tuple(sorted(params.items())))
        if key not in self._built:
            try:
                self._built[key] = _catalog_build(name, **params)
            except (KeyError, ValueError) as e:
                raise UsageError(str(e))
        return self._built[key]

    def resolve(self, ref: str):
        if ref in self.namespace:
            return self.namespace[ref]
        if self.base is not None:
            if ref in self.base.parts:
                return self.base.parts[ref]
            if ref == self.base.name:
                return self.base.primary
        try:
            name, params, part = _parse_catalog_ref(ref)
        except ValueError as e:
            raise UsageError(str(e))
        if name in _FAMILIES:
            built = self._build(name, params)
            try:
                return built.part(part or "")
            except KeyError as e:
                raise UsageError(str(e.args[0]))
        raise UsageError(f"unknown object {ref!r}")

    def group(self, ref: str):
        obj = self.resolve(ref)
        if isinstance(obj, Subgroup):
            raise UsageError(f"{ref!r} is a subgroup; a group is needed here")
        if isinstance(obj, Amalgam):
            raise UsageError(f"{ref!r} is an amalgam; a group is needed here")
        return obj

    def amalgam(self, ref: str) -> Amalgam:
        obj = self.resolve(ref)
        if not isinstance(obj, Amalgam):
            raise UsageError(f"{ref!r} is not an amalgam")
        return obj

    def subgroup(self, ref: str, G) -> Subgroup:
        try:
            obj = self.resolve(ref)
        except UsageError:
            obj = None
        if isinstance(obj, Subgroup):
            if obj.owner is not G:
                raise UsageError(f"{ref!r} lives in a different group")
            return obj
        if obj is not None:
            raise UsageError(f"{ref!r} is not a subgroup")
        gens = [
            _eval_word(G, w.strip(), "<--sub>", 0) for w in ref.split(",") if w.strip()
        ]
        return subgroup_closure(G, gens)


def _element(G, word: str) -> int:
    return _eval_word(G, word, "<--element>", 0)


def _token_words(G, tokens) -> list:
    return [str(G.describe_token(int(t))).partition(":")[2] or f"t{int(t)}"
            for t in tokens]


# ---------------------------------------------------------------------------
# commands


def _parse_variety(text: str) -> Variety:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--variety wants m,n (got {text!r})")
    try:
        m, n = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--variety wants integers (got {text!r})")
    try:
        return Variety(m, n)
    except PreconditionError as e:
        raise UsageError(str(e))


def _word_of(G, token) -> str:
    return str(G.describe_token(int(token))).partition(":")[2] or f"t{int(token)}"


def _decorate_check_witness(am: Amalgam, w: dict) -> dict:
    out = dict(w)
    cond = w.get("condition")
    if cond == "core-centrality":
        side = am.A if w["side"] == "A" else am.B
        other = am.B if w["side"] == "A" else am.A
        out["d_word"] = _word_of(am.D, w["d"])
        out["image_word"] = _word_of(side, w["image"])
        out["other_image_word"] = _word_of(other, w["other_image"])
    elif cond == "cross-commutator":
        out["a_word"] = _word_of(am.A, w["a"])
        out["delta_word"] = _word_of(am.A, w["delta"])
        out["b_word"] = _word_of(am.B, w["b"])
        out["delta_prime_word"] = _word_of(am.B, w["delta_prime"])
    elif cond == "pair-identification":
        out["left_word"] = _word_of(am.A, w["left"])
        out["right_word"] = _word_of(am.B, w["right"])
    return out


def _cmd_check(args, res):
    v = _parse_variety(args.variety)
    am = res.amalgam(args.amalgam)
    kind = "strong" if args.cmd == "check-strong" else "weak"
    out = check_strong(am, v) if kind == "strong" else check_weak(am, v)
    data = {}
    if args.cross_check:
        ob = oracle_strong(am, v) if kind == "strong" else oracle_weak(am, v)
        data["oracle"] = bool(ob)
        if bool(out) != bool(ob):
            raise CrossCheckError(
                f"criterion says {bool(out)}, coproduct oracle says {bool(ob)}"
            )
    return bool(out), _decorate_check_witness(am, out.witness), data, v


def _cmd_oracle_check(args, res):
    v = _parse_variety(args.variety)
    am = res.amalgam(args.amalgam)
    ob = oracle_strong(am, v) if args.cmd == "oracle-strong" else oracle_weak(am, v)
    return bool(ob), None, {}, v


def _sub_listing(G, S: Subgroup) -> dict:
    data = {"order": int(S.order)}
    if S.order <= LIST_CAP:
        data["elements"] = _token_words(G, S.elements)
    else:
        data["elements_truncated_at"] = LIST_CAP
        data["elements"] = _token_words(G, S.elements[:LIST_CAP])
    return data


def _cmd_dominion(args, res):
    v = _parse_variety(args.variety)
    G = res.group(args.group)
    H = res.subgroup(args.sub, G)
    dom = dominion(G, H, v)
    data = _sub_listing(G, dom)
    data["subgroup_order"] = int(H.order)
    data["is_trivial"] = bool(dom.order == H.order)
    if args.cross_check:
        ob = oracle_dominion(G, H, v)
        agree = bool(np.array_equal(dom.elements, ob.elements))
        data["oracle_agrees"] = agree
        if not agree:
            raise CrossCheckError("dominion and coproduct oracle disagree")
    return None, None, data, v


def _cmd_oracle_dominion(args, res):
    v = _parse_variety(args.variety)
    G = res.group(args.group)
    H = res.subgroup(args.sub, G)
    dom = oracle_dominion(G, H, v)
    data = _sub_listing(G, dom)
    data["subgroup_order"] = int(H.order)
    return None, None, data, v


def _cmd_adjoin_root(args, res):
    v = _parse_variety(args.variety)
    G = res.group(args.group)
    x = _element(G, args.element)
    out = can_adjoin_root(G, x, args.exp, v)
    data = {}
    if args.cross_check:
        ob = oracle_adjoin_root(G, x, args.exp, v)
        data["oracle"] = bool(ob)
        if bool(out) != bool(ob):
            raise CrossCheckError(
                f"criterion says {bool(out)}, coproduct oracle says {bool(ob)}"
            )
    return bool(out), dict(out.witness), data, v


def _cmd_adjoin_roots2(args, res):
    v = _parse_variety(args.variety)
    G = res.group(args.group)
    x = _element(G, args.element)
    y = _element(G, args.element2)
    out = can_adjoin_two_roots(G, x, y, args.exp, v)
    data = {}
    if args.cross_check:
        ob = oracle_adjoin_two_roots(G, x, y, args.exp, v)
        data["oracle"] = bool(ob)
        if bool(out) != bool(ob):
            raise CrossCheckError(
                f"criterion says {bool(out)}, coproduct oracle says {bool(ob)}"
            )
    return bool(out), dict(out.witness), data, v


def _cmd_base(args, res):
    v = _parse_variety(args.variety)
    G = res.group(args.group)
    out = is_strong_base(G, v) if args.cmd == "base-strong" else is_special_base(G, v)
    return bool(out), dict(out.witness), {}, v


def _cmd_filter(args, res):
    am = res.amalgam(args.amalgam)
    data = {}
    for kind in ("weak", "strong"):
        gen = embeddability_filter_generator(am, kind)
        data[kind] = "empty" if isinstance(gen, str) else [gen.m, gen.n]
    return None, None, data, None


def _cmd_catalog(args, res):
    if not args.entry:
        entries = []
        for name in _catalog_names():
            fam = _FAMILIES[name]
            entries.append(
                {"name": name, "params": list(fam.param_names), "summary": fam.summary}
            )
        return None, None, {"entries": entries}, None
    name, params, part = _parse_catalog_ref(args.entry)
    if part is not None:
        raise UsageError("catalog takes an entry, not a part")
    if name not in _FAMILIES:
        raise UsageError(f"unknown catalog entry {name!r}")
    try:
        plan = _claim_plan(name, params)
    except ValueError as e:
        raise UsageError(str(e))
    rows = []
    built = None
    all_ok = True
    ran = 0
    for pc in plan:
        row = {
            "kind": pc.claim.kind,
            "variety": [pc.claim.m, pc.claim.n],
            "expected": pc.claim.expected,
            "status": pc.status,
        }
        if pc.status == "skip":
            row["reason"] = pc.reason
        elif args.verify:
            if built is None:
                built = res._build(name, params)
            ok, detail = _evaluate_claim(built, pc.claim)
            row["ok"] = bool(ok)
            row["detail"] = _jsonify(detail)
            all_ok = all_ok and ok
            ran += 1
        rows.append(row)
    data = {"name": name, "params": params, "claims": rows}
    if not args.verify:
        fam = _FAMILIES[name]
        try:
            data["part_orders"] = {k: int(v) for k, v in fam.part_orders(params).items()}
        except ValueError as e:
            raise UsageError(str(e))
        return None, None, data, None
    data["claims_run"] = ran
    return bool(all_ok), None, data, None


_DISPATCH = {
    "check-strong": _cmd_check,
    "check-weak": _cmd_check,
    "oracle-strong": _cmd_oracle_check,
    "oracle-weak": _cmd_oracle_check,
    "dominion": _cmd_dominion,
    "oracle-dominion": _cmd_oracle_dominion,
    "adjoin-root": _cmd_adjoin_root,
    "adjoin-roots2": _cmd_adjoin_roots2,
    "base-strong": _cmd_base,
    "base-special": _cmd_base,
    "filter-generator": _cmd_filter,
    "catalog": _cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--spec", help="spec file declaring groups and amalgams")
    common.add_argument("--from", dest="from_ref",
                        help="catalog instance whose parts become addressable")
    common.add_argument("--max-elements", type=int, default=None,
                        help="element budget (wins over NIL2_MAX_ELEMENTS)")
    parser = argparse.ArgumentParser(
        prog="nil2",
        description="decision procedures for class-2 nilpotent amalgams",
    )
    parser.add_argument("--version", action="version", version=f"nil2 {VERSION}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    for name in ("check-strong", "check-weak", "oracle-strong", "oracle-weak"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("amalgam")
        p.add_argument("--variety", required=True)
        if name.startswith("check"):
            p.add_argument("--cross-check", action="store_true")
    for name in ("dominion", "oracle-dominion"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--group", required=True)
        p.add_argument("--sub", required=True,
                       help="subgroup part or comma-separated generator words")
        p.add_argument("--variety", required=True)
        if name == "dominion":
            p.add_argument("--cross-check", action="store_true")
    p = sub.add_parser("adjoin-root", parents=[common])
    p.add_argument("--group", required=True)
    p.add_argument("--element", required=True)
    p.add_argument("--exp", type=int, required=True)
    p.add_argument("--variety", required=True)
    p.add_argument("--cross-check", action="store_true")
    p = sub.add_parser("adjoin-roots2", parents=[common])
    p.add_argument("--group", required=True)
    p.add_argument("--element", required=True)
    p.add_argument("--element2", required=True)
    p.add_argument("--exp", type=int, required=True)
    p.add_argument("--variety", required=True)
    p.add_argument("--cross-check", action="store_true")
    for name in ("base-strong", "base-special"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("group")
        p.add_argument("--variety", required=True)
    p = sub.add_parser("filter-generator", parents=[common])
    p.add_argument("amalgam")
    p = sub.add_parser("catalog", parents=[common])
    p.add_argument("entry", nargs="?", default=None)
    p.add_argument("--verify", action="store_true")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    saved_budget = os.environ.get("NIL2_MAX_ELEMENTS")
    if args.max_elements is not None:
        os.environ["NIL2_MAX_ELEMENTS"] = str(args.max_elements)
    t0 = time.perf_counter()
    try:
        res = _Resolver(spec_path=args.spec, from_ref=args.from_ref)
        verdict, witness, data, v = _DISPATCH[args.cmd](args, res)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SpecParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (PreconditionError, PresentationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ResourceLimitError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except CrossCheckError as e:
        print(f"cross-check disagreement: {e}", file=sys.stderr)
        return 4
    finally:
        if args.max_elements is not None:
            if saved_budget is None:
                os.environ.pop("NIL2_MAX_ELEMENTS", None)
            else:
                os.environ["NIL2_MAX_ELEMENTS"] = saved_budget
    elapsed = (time.perf_counter() - t0) * 1000.0
    report = Report(
        command=argv,
        variety=None if v is None else [v.m, v.n],
        verdict=verdict if verdict is None else bool(verdict),
        witness=_jsonify(witness) if witness else None,
        data=_jsonify(data),
        elapsed_ms=round(elapsed, 3),
        version=VERSION,
    )
    print(emit_report(report) if args.format == "json" else render_text(report))
    if verdict is None:
        return 0
    return 0 if verdict else 1


if __name__ == "__main__":
    sys.exit(main())
