"""Scenario-driven command line front end.

A scenario declares posets, maps, flows and generator sets, then lists
``run`` commands.  Exit status: 0 when every command succeeds, 1 when a
command's ``expect`` check or the engine fails, 2 on parse or name errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import LoopDetected, ParseError, UnknownCommand, WfslocError
from .fincat import FinPoset, MonotoneMap
from .flows import FlowMorphism, FlowPresentation, discrete_weq, hom_paths, poset_map_to_flow, poset_to_flow
from .formats import (
    parse_arrow,
    parse_relations,
    parse_word,
    split_mapsto,
    write_certificate,
    write_factorization,
)
from .homotopy import (
    fibrant_replacement,
    half_inverse,
    homotopy_congruence,
    path_object,
    right_homotopic,
)
from .localization import build_quotient, quotient_to_dot, whitehead_detect
from .thomotopy import SEGMENT, generate_T, is_homotopy_continuous, subdivide_segment
from .wfs import ALL_AT_ONCE, DEFAULT_STAGE_BOUND, GeneratorSet, small_object_factorize

KEYWORDS = ("poset", "map", "flow", "flowmap", "gens", "run")


@dataclass
class Decl:
    kind: str
    name: str
    line: int
    header: str
    body: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class Command:
    name: str
    args: dict[str, str]
    line: int


@dataclass
class Scenario:
    decls: list[Decl]
    commands: list[Command]
    values: dict = field(default_factory=dict)


def _header_name(kind: str, rest: str, lineno: int) -> str:
    name = rest.split()[0] if rest.split() else ""
    if not name or name in (":", "="):
        raise ParseError(f"{kind} needs a name", lineno, len(kind) + 2)
    return name


def parse_scenario(text: str) -> Scenario:
    decls: list[Decl] = []
    commands: list[Command] = []
    current: Decl | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            current = None
            continue
        head, _, rest = line.strip().partition(" ")
        if head in KEYWORDS and not line[0].isspace():
            if head == "run":
                toks = rest.split()
                if not toks:
                    raise ParseError("run needs a command name", lineno, 5)
                args = {}
                col = 5 + len(toks[0]) + 1
                for tok in toks[1:]:
                    key, eq, value = tok.partition("=")
                    if not eq or not key or not value:
                        raise ParseError(f"expected key=value, got {tok!r}", lineno, col)
                    args[key] = value
                    col += len(tok) + 1
                commands.append(Command(toks[0], args, lineno))
                current = None
            else:
                current = Decl(head, _header_name(head, rest, lineno), lineno, rest)
                decls.append(current)
            continue
        if current is None:
            raise ParseError(f"line outside a declaration: {line.strip()!r}", lineno, 1)
        current.body.append((lineno, line.strip()))
    return Scenario(decls, commands)


# -- resolution -----------------------------------------------------------


def _lookup(values, name, kind, lineno):
    v = values.get(name)
    if v is None or not isinstance(v, kind):
        raise ParseError(f"{name!r} is not a declared {kind.__name__}", lineno, 1)
    return v


def _build_poset(d: Decl, values) -> FinPoset:
    elements, pairs = None, []
    for lineno, line in d.body:
        key, _, rest = line.partition(":")
        if key == "elements":
            elements = rest.split()
        elif key == "relations":
            pairs += parse_relations(rest, lineno, len(key) + 2)
        else:
            raise ParseError(f"unexpected line in poset {d.name}", lineno, 1)
    if elements is None:
        raise ParseError(f"poset {d.name} has no elements line", d.line, 1)
    try:
        return FinPoset.from_relations(elements, pairs, name=d.name)
    except (ValueError, KeyError) as e:
        raise ParseError(str(e), d.line, 1) from None


def _arrow_header(d: Decl):
    # "NAME : SRC -> TGT" or "NAME = poset MAP"
    rest = d.header[len(d.name):].strip()
    if rest.startswith("="):
        return None, rest[1:].split()
    if not rest.startswith(":") or "->" not in rest:
        raise ParseError(f"expected '{d.kind} {d.name} : A -> B'", d.line, 1)
    src, tgt = (s.strip() for s in rest[1:].split("->", 1))
    return (src, tgt), None


def _build_map(d: Decl, values) -> MonotoneMap:
    (src, tgt), _ = _arrow_header(d)
    P = _lookup(values, src, FinPoset, d.line)
    Q = _lookup(values, tgt, FinPoset, d.line)
    mapping = {}
    for lineno, line in d.body:
        x, y = split_mapsto(line, lineno)
        mapping[x] = y
    try:
        return MonotoneMap.from_labels(P, Q, mapping)
    except (ValueError, KeyError) as e:
        raise ParseError(f"map {d.name}: {e}", d.line, 1) from None


def _build_flow(d: Decl, values) -> FlowPresentation:
    rest = d.header[len(d.name):].strip()
    if rest.startswith("="):
        words = rest[1:].split()
        if len(words) != 2 or words[0] != "poset":
            raise ParseError("expected 'flow NAME = poset P'", d.line, 1)
        P = _lookup(values, words[1], FinPoset, d.line)
        F = poset_to_flow(P)
        return FlowPresentation(F.states, F.generators, F.relations, d.name)
    states, arrows, relations = None, [], []
    for lineno, line in d.body:
        key, _, body = line.partition(":")
        if key == "states":
            states = body.split()
        elif key == "arrows":
            for part in body.split(","):
                arrows.append(parse_arrow(part.strip(), lineno, len(key) + 2))
        elif key == "relations":
            for part in body.split(","):
                l, eq, r = part.partition("=")
                if not eq:
                    raise ParseError("expected 'w1 = w2'", lineno, len(key) + 2)
                relations.append((parse_word(l, lineno, 1), parse_word(r, lineno, 1)))
        else:
            raise ParseError(f"unexpected line in flow {d.name}", lineno, 1)
    if states is None:
        raise ParseError(f"flow {d.name} has no states line", d.line, 1)
    try:
        return FlowPresentation(states, arrows, relations, d.name)
    except WfslocError as e:
        raise ParseError(str(e), d.line, 1) from None


def _build_flow_map(d: Decl, values) -> FlowMorphism:
    ends, derived = _arrow_header(d)
    if derived is not None:
        if len(derived) != 2 or derived[0] != "poset":
            raise ParseError("expected 'flowmap NAME = poset MAP'", d.line, 1)
        return poset_map_to_flow(_lookup(values, derived[1], MonotoneMap, d.line))
    X = _lookup(values, ends[0], FlowPresentation, d.line)
    Y = _lookup(values, ends[1], FlowPresentation, d.line)
    smap, pmap = {}, {}
    for lineno, line in d.body:
        kind, _, rest = line.partition(" ")
        x, y = split_mapsto(rest, lineno)
        if kind == "state":
            smap[x] = y
        elif kind == "arrow":
            pmap[x] = parse_word(y, lineno, 1)
        else:
            raise ParseError("expected 'state x |-> y' or 'arrow U |-> w'", lineno, 1)
    return FlowMorphism(X, Y, smap, pmap)


def _build_gens(d: Decl, values, strict: bool) -> GeneratorSet:
    rest = d.header[len(d.name):].strip()
    if not rest.startswith("="):
        raise ParseError(f"expected 'gens {d.name} = ...'", d.line, 1)
    words = rest[1:].split()
    if words == ["empty"]:
        return GeneratorSet((), strict, d.name)
    if words and words[0] == "T" and len(words) in (2, 3):
        try:
            size = int(words[1])
        except ValueError:
            raise ParseError("catalogue size must be an integer", d.line, 1) from None
        return generate_T(size).generators(strict or words[2:] == ["strict"])
    if words and words[0] == "maps":
        return GeneratorSet(tuple(_lookup(values, w, MonotoneMap, d.line) for w in words[1:]), strict, d.name)
    raise ParseError("expected 'empty', 'T SIZE [strict]' or 'maps m1 m2 ...'", d.line, 1)


def resolve(sc: Scenario, strict: bool = False) -> dict:
    values: dict = {}
    for d in sc.decls:
        if d.name in values:
            raise ParseError(f"{d.name!r} declared twice", d.line, 1)
        try:
            if d.kind == "poset":
                values[d.name] = _build_poset(d, values)
            elif d.kind == "map":
                values[d.name] = _build_map(d, values)
            elif d.kind == "flow":
                values[d.name] = _build_flow(d, values)
            elif d.kind == "flowmap":
                values[d.name] = _build_flow_map(d, values)
            else:
                values[d.name] = _build_gens(d, values, strict)
        except ParseError:
            raise
        except WfslocError as e:
            raise ParseError(str(e), d.line, 1) from None
    sc.values = values
    for c in sc.commands:
        if c.name not in COMMANDS:
            raise UnknownCommand(f"{c.line}:1: unknown command {c.name!r}")
        for key in PLAIN.get(c.name, ()):
            if key not in c.args:
                raise ParseError(f"{c.name} needs {key}=", c.line, 1)
        kinds = COMMANDS[c.name][1]
        for key, kind in kinds.items():
            if key not in c.args:
                raise ParseError(f"{c.name} needs {key}=", c.line, 1)
            for name in c.args[key].split(","):
                _lookup(values, name, kind, c.line)
    return values


# -- commands -------------------------------------------------------------


class Context:
    def __init__(self, values, stage_bound, base: Path, strict: bool):
        self.values = values
        self.stage_bound = stage_bound
        self.base = base
        self.strict = strict

    def get(self, args, key):
        return self.values[args[key]]

    def many(self, args, key):
        return [self.values[n] for n in args[key].split(",")]

    def bound(self, args):
        return int(args.get("stage_bound", self.stage_bound))


def _verdict(flag: bool) -> str:
    return "true" if flag else "false"


def cmd_factorize(ctx, a):
    fa = small_object_factorize(ctx.get(a, "map"), ctx.get(a, "gens"), ctx.bound(a), a.get("policy", ALL_AT_ONCE))
    return write_factorization(fa), "converged" if fa.converged else "not-converged"


def cmd_path_object(ctx, a):
    po = path_object(ctx.get(a, "poset"), ctx.get(a, "gens"), ctx.bound(a), a.get("policy", ALL_AT_ONCE), allow_partial=True)
    return write_factorization(po.factorization), "converged" if po.converged else "not-converged"


def cmd_homotopic(ctx, a):
    f, g = ctx.get(a, "f"), ctx.get(a, "g")
    po = path_object(f.target, ctx.get(a, "gens"), ctx.bound(a))
    w = right_homotopic(f, g, po)
    if w is None:
        return "no right homotopy\n", "false"
    return f"homotopy {w.H.as_labels()}\n", "true"


def cmd_congruence(ctx, a):
    t = homotopy_congruence(ctx.get(a, "source"), ctx.get(a, "target"), ctx.get(a, "gens"), ctx.bound(a))
    lines = [f"maps={len(t.maps)} classes={len(t.classes)} raw-transitive={_verdict(t.is_raw_transitive())}"]
    for c, members in enumerate(t.classes):
        lines.append(f"class {c}: " + " ; ".join(" ".join(map(str, t.maps[i].assignment)) for i in members))
    return "\n".join(lines) + "\n", str(len(t.classes))


def cmd_fibrant_replace(ctx, a):
    fa = fibrant_replacement(ctx.get(a, "poset"), ctx.get(a, "gens"), ctx.bound(a))
    return write_factorization(fa), "converged" if fa.converged else "not-converged"


def cmd_half_inverse(ctx, a):
    g, w = half_inverse(ctx.get(a, "map"), ctx.get(a, "gens"), ctx.bound(a))
    return f"retraction {g.as_labels()}\nhomotopy {w.H.as_labels()}\n", "true"


def cmd_quotient(ctx, a):
    qc = build_quotient(ctx.many(a, "objects"), ctx.get(a, "gens"), ctx.bound(a))
    lines = [f"objects={len(qc.objects)} laws={_verdict(qc.verify_laws())}"]
    for (i, j), n in sorted(qc.class_counts.items()):
        lines.append(f"hom {i} {j}: {n} class(es)")
    return "\n".join(lines) + "\n", "true"


def cmd_whitehead(ctx, a):
    rep = whitehead_detect(ctx.get(a, "map"), ctx.many(a, "family"), ctx.get(a, "gens"), ctx.bound(a))
    return rep.summary() + "\n", _verdict(rep.bijective)


def cmd_gen_T(ctx, a):
    cat = generate_T(int(a.get("size", "3")), a.get("identities", "false") == "true")
    lines = [f"entries={len(cat)}"]
    for (p, q), n in sorted(cat.counts_by_size().items()):
        lines.append(f"size {p} -> {q}: {n}")
    return "\n".join(lines) + "\n", str(len(cat))


def cmd_continuous(ctx, a):
    ok, sq = is_homotopy_continuous(ctx.get(a, "poset"), generate_T(int(a.get("size", "3"))), ctx.strict)
    text = "homotopy continuous\n" if ok else f"failing square: top {sq.top.as_labels()}\n"
    return text, _verdict(ok)


def cmd_subdivide(ctx, a):
    X = ctx.get(a, "poset")
    seg = ctx.get(a, "segment")
    seg = MonotoneMap._trusted(SEGMENT, X, seg.assignment)
    k = subdivide_segment(X, seg, strict=ctx.strict)
    return ("no subdivision\n" if k is None else f"subdivision {k.as_labels()}\n"), _verdict(k is not None)


def cmd_flow_paths(ctx, a):
    F = ctx.get(a, "flow")
    try:
        ps = hom_paths(F, a["from"], a["to"])
    except LoopDetected as e:
        return f"loop {';'.join(e.cycle)}\n", "loop"
    lines = [f"classes={len(ps)}"] + [" = ".join(";".join(w) for w in c) for c in ps.classes]
    return "\n".join(lines) + "\n", str(len(ps))


def cmd_flow_weq(ctx, a):
    return "", _verdict(discrete_weq(ctx.get(a, "map")))


def cmd_dot_export(ctx, a):
    qc = build_quotient(ctx.many(a, "objects"), ctx.get(a, "gens"), ctx.bound(a))
    return quotient_to_dot(qc), "true"


def cmd_certificate(ctx, a):
    fa = small_object_factorize(ctx.get(a, "map"), ctx.get(a, "gens"), ctx.bound(a))
    return write_certificate(fa.certificate), "converged" if fa.converged else "not-converged"


COMMANDS = {
    "factorize": (cmd_factorize, {"map": MonotoneMap, "gens": GeneratorSet}),
    "certificate": (cmd_certificate, {"map": MonotoneMap, "gens": GeneratorSet}),
    "path-object": (cmd_path_object, {"poset": FinPoset, "gens": GeneratorSet}),
    "homotopic": (cmd_homotopic, {"f": MonotoneMap, "g": MonotoneMap, "gens": GeneratorSet}),
    "congruence": (cmd_congruence, {"source": FinPoset, "target": FinPoset, "gens": GeneratorSet}),
    "fibrant-replace": (cmd_fibrant_replace, {"poset": FinPoset, "gens": GeneratorSet}),
    "half-inverse": (cmd_half_inverse, {"map": MonotoneMap, "gens": GeneratorSet}),
    "quotient": (cmd_quotient, {"objects": FinPoset, "gens": GeneratorSet}),
    "whitehead": (cmd_whitehead, {"map": MonotoneMap, "family": FinPoset, "gens": GeneratorSet}),
    "gen-T": (cmd_gen_T, {}),
    "continuous": (cmd_continuous, {"poset": FinPoset}),
    "subdivide": (cmd_subdivide, {"poset": FinPoset, "segment": MonotoneMap}),
    "flow-paths": (cmd_flow_paths, {"flow": FlowPresentation}),
    "flow-weq": (cmd_flow_weq, {"map": FlowMorphism}),
    "dot-export": (cmd_dot_export, {"objects": FinPoset, "gens": GeneratorSet}),
}
PLAIN = {"flow-paths": ("from", "to")}


def execute(sc: Scenario, stage_bound: int, base: Path, strict: bool, out=None) -> int:
    out = out or sys.stdout
    ctx = Context(sc.values, stage_bound, base, strict)
    status = 0
    for c in sc.commands:
        fn = COMMANDS[c.name][0]
        try:
            text, verdict = fn(ctx, c.args)
        except WfslocError as e:
            detail = getattr(e, "square", None) or getattr(e, "cycle", None)
            print(f"line {c.line}: {c.name} failed: {e}" + (f" [{detail!r}]" if detail else ""), file=out)
            status = 1
            continue
        sink = c.args.get("out")
        if sink:
            (base / sink).write_text(text)
        elif text:
            out.write(text)
        expect = c.args.get("expect")
        if expect is not None and expect != verdict:
            print(f"line {c.line}: {c.name} expected {expect}, got {verdict}", file=out)
            status = 1
        else:
            print(f"line {c.line}: {c.name} ok ({verdict})", file=out)
    return status


def run(path, stage_bound: int = DEFAULT_STAGE_BOUND, strict: bool = False, out=None) -> int:
    out = out or sys.stdout
    path = Path(path)
    try:
        sc = parse_scenario(path.read_text())
        resolve(sc, strict)
    except (ParseError, UnknownCommand) as e:
        print(f"{path}:{e}", file=out)
        return 2
    return execute(sc, stage_bound, path.parent, strict, out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="wfsloc", description="Run a scenario of weak factorization and localization commands.")
    ap.add_argument("scenario")
    ap.add_argument("--stage-bound", type=int, default=DEFAULT_STAGE_BOUND)
    ap.add_argument("--strict-homs", action="store_true", help="lift against strictly increasing maps only")
    # enumeration order is canonical; the flag exists so scripts can state it
    ap.add_argument("--seed-order", choices=["fixed"], default="fixed")
    args = ap.parse_args(argv)
    return run(args.scenario, args.stage_bound, args.strict_homs)


if __name__ == "__main__":
    sys.exit(main())
