"""Finitely presented flows with discrete path sets.

A presentation lists states, generating arrows and relations between
composable words.  Words are tuples of generator names in diagram order
(first arrow first).  Path sets are finite exactly when no cycle of the
generator graph sits between the two states, so cycles are reported
instead of enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product as cartesian
from typing import Iterator, Mapping, Sequence

from .errors import FlowError, LoopDetected, SourceTargetMismatch
from .fincat import FinPoset, MonotoneMap, _unique_labels

Word = tuple[str, ...]


def shortlex(word: Word):
    return (len(word), word)


@dataclass(frozen=True)
class Arrow:
    name: str
    src: str
    tgt: str


@dataclass(frozen=True)
class FlowPresentation:
    states: tuple[str, ...]
    generators: tuple[Arrow, ...] = ()
    relations: tuple[tuple[Word, Word], ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "generators", tuple(Arrow(*a) if not isinstance(a, Arrow) else a for a in self.generators))
        object.__setattr__(self, "relations", tuple((tuple(l), tuple(r)) for l, r in self.relations))
        if len(set(self.states)) != len(self.states):
            raise FlowError("state labels must be unique")
        names = [a.name for a in self.generators]
        if len(set(names)) != len(names):
            raise FlowError("generator names must be unique")
        known = set(self.states)
        for a in self.generators:
            if a.src not in known or a.tgt not in known:
                raise FlowError(f"arrow {a.name} has an unknown endpoint")
        for l, r in self.relations:
            if self.endpoints(l) != self.endpoints(r):
                raise FlowError(f"relation {';'.join(l)} = {';'.join(r)} joins different endpoints")

    @cached_property
    def arrow(self) -> dict[str, Arrow]:
        return {a.name: a for a in self.generators}

    @cached_property
    def outgoing(self) -> dict[str, tuple[Arrow, ...]]:
        out: dict[str, list[Arrow]] = {s: [] for s in self.states}
        for a in self.generators:
            out[a.src].append(a)
        return {s: tuple(v) for s, v in out.items()}

    def endpoints(self, word: Sequence[str]) -> tuple[str, str]:
        """``(source, target)`` of a non-empty composable word."""
        if not word:
            raise FlowError("flows have no identities; words must be non-empty")
        try:
            arrows = [self.arrow[n] for n in word]
        except KeyError as e:
            raise FlowError(f"unknown generator {e.args[0]}") from None
        for a, b in zip(arrows, arrows[1:]):
            if a.tgt != b.src:
                raise FlowError(f"{a.name};{b.name} is not composable")
        return arrows[0].src, arrows[-1].tgt

    @cached_property
    def reach(self) -> dict[str, frozenset[str]]:
        """States reachable by a non-empty word."""
        out: dict[str, frozenset[str]] = {}
        for s in self.states:
            seen: set[str] = set()
            todo = [a.tgt for a in self.outgoing[s]]
            while todo:
                t = todo.pop()
                if t not in seen:
                    seen.add(t)
                    todo.extend(a.tgt for a in self.outgoing[t])
            out[s] = frozenset(seen)
        return out

    def find_cycle(self, between: tuple[str, str] | None = None) -> tuple[str, ...] | None:
        """A cycle of arrow names, optionally restricted to ones usable from ``a`` to ``b``."""
        for s in self.states:
            if s not in self.reach[s]:
                continue
            if between is not None:
                a, b = between
                if not (s == a or s in self.reach[a]) or not (s == b or b in self.reach[s]):
                    continue
            return self._cycle_through(s)
        return None

    def _cycle_through(self, s: str) -> tuple[str, ...]:
        parent: dict[str, Arrow] = {}
        todo = [s]
        seen = {s}
        while todo:
            x = todo.pop(0)
            for a in self.outgoing[x]:
                if a.tgt == s:
                    path = [a.name]
                    while x != s:
                        e = parent[x]
                        path.append(e.name)
                        x = e.src
                    return tuple(reversed(path))
                if a.tgt not in seen:
                    seen.add(a.tgt)
                    parent[a.tgt] = a
                    todo.append(a.tgt)
        raise AssertionError("no cycle through a state that reaches itself")

    def is_loopless(self) -> bool:
        return self.find_cycle() is None

    def words(self, a: str, b: str) -> list[Word]:
        """Every generator word from ``a`` to ``b``; raises LoopDetected if there are infinitely many."""
        cyc = self.find_cycle((a, b))
        if cyc is not None:
            raise LoopDetected(f"cycle {';'.join(cyc)} lies between {a} and {b}", cyc)
        out: list[Word] = []

        def walk(x, acc):
            for e in self.outgoing[x]:
                if e.tgt == b:
                    out.append(acc + (e.name,))
                if e.tgt == b or b in self.reach[e.tgt]:
                    walk(e.tgt, acc + (e.name,))

        walk(a, ())
        return sorted(set(out), key=shortlex)

    def hom_paths(self, a: str, b: str) -> "PathSet":
        return hom_paths(self, a, b)

    def equivalent(self, w1: Word, w2: Word) -> bool:
        a, b = self.endpoints(w1)
        if (a, b) != self.endpoints(w2):
            return False
        ps = self.hom_paths(a, b)
        return ps.class_of(w1) == ps.class_of(w2)


@dataclass(frozen=True)
class PathSet:
    """Congruence classes of words from ``source`` to ``target``; each class is sorted shortlex."""

    source: str
    target: str
    classes: tuple[tuple[Word, ...], ...]

    def __len__(self):
        return len(self.classes)

    @property
    def representatives(self) -> tuple[Word, ...]:
        return tuple(c[0] for c in self.classes)

    @cached_property
    def _index(self) -> dict[Word, int]:
        return {w: i for i, c in enumerate(self.classes) for w in c}

    def class_of(self, word: Sequence[str]) -> int:
        try:
            return self._index[tuple(word)]
        except KeyError:
            raise FlowError(f"{';'.join(word)} is not a word from {self.source} to {self.target}") from None


def _occurrences(word: Word, pattern: Word) -> Iterator[int]:
    n = len(pattern)
    for i in range(len(word) - n + 1):
        if word[i:i + n] == pattern:
            yield i


@lru_cache(maxsize=4096)
def hom_paths(X: FlowPresentation, a: str, b: str) -> PathSet:
    """Words from ``a`` to ``b`` modulo the congruence generated by the relations."""
    words = X.words(a, b)
    index = {w: i for i, w in enumerate(words)}
    parent = list(range(len(words)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for w in words:
        for l, r in X.relations:
            for pat, rep in ((l, r), (r, l)):
                for i in _occurrences(w, pat):
                    other = w[:i] + rep + w[i + len(pat):]
                    x, y = find(index[w]), find(index[other])
                    if x != y:
                        parent[max(x, y)] = min(x, y)
    groups: dict[int, list[Word]] = {}
    for w in words:
        groups.setdefault(find(index[w]), []).append(w)
    classes = sorted((tuple(sorted(g, key=shortlex)) for g in groups.values()), key=lambda c: shortlex(c[0]))
    return PathSet(a, b, tuple(classes))


def arrow_name(P: FinPoset, i: int, j: int) -> str:
    return f"{P.elements[i]}<{P.elements[j]}"


def poset_to_flow(P: FinPoset) -> FlowPresentation:
    """One arrow per covering pair; any two parallel words are identified."""
    gens = [Arrow(arrow_name(P, i, j), P.elements[i], P.elements[j]) for i, j in P.covers]
    bare = FlowPresentation(P.elements, gens, (), P.name)
    relations = []
    for a in P.elements:
        for b in P.elements:
            if a == b or not P.leq(P.index(a), P.index(b)):
                continue
            ws = bare.words(a, b)
            relations.extend((ws[0], w) for w in ws[1:])
    return FlowPresentation(P.elements, gens, relations, P.name)


def poset_map_to_flow(f: MonotoneMap) -> "FlowMorphism":
    """The flow morphism of a strictly increasing map; other maps would need identities."""
    if not f.is_strict():
        raise FlowError("only strictly increasing maps induce flow morphisms")
    X, Y = poset_to_flow(f.source), poset_to_flow(f.target)
    P, Q = f.source, f.target
    path_map = {}
    for i, j in P.covers:
        path_map[arrow_name(P, i, j)] = Y.words(Q.elements[f(i)], Q.elements[f(j)])[0]
    state_map = {P.elements[i]: Q.elements[f(i)] for i in range(len(P))}
    return FlowMorphism(X, Y, state_map, path_map)


@dataclass(frozen=True)
class FlowMorphism:
    """States go to states; each generator goes to a non-empty word of the target."""

    source: FlowPresentation
    target: FlowPresentation
    state_map: Mapping[str, str]
    path_map: Mapping[str, Word]

    def __post_init__(self):
        object.__setattr__(self, "state_map", dict(self.state_map))
        object.__setattr__(self, "path_map", {k: tuple(v) for k, v in self.path_map.items()})
        X, Y = self.source, self.target
        if set(self.state_map) != set(X.states) or not set(self.state_map.values()) <= set(Y.states):
            raise FlowError("state map must send every source state to a target state")
        if set(self.path_map) != {a.name for a in X.generators}:
            raise FlowError("path map must cover every source generator")
        for a in X.generators:
            if Y.endpoints(self.path_map[a.name]) != (self.state_map[a.src], self.state_map[a.tgt]):
                raise FlowError(f"image of {a.name} has the wrong endpoints")
        for l, r in X.relations:
            if not Y.equivalent(self.apply(l), self.apply(r)):
                raise FlowError(f"relation {';'.join(l)} = {';'.join(r)} is not preserved")

    def __hash__(self):
        return hash((self.source, self.target, tuple(sorted(self.state_map.items())), tuple(sorted(self.path_map.items()))))

    def apply(self, word: Sequence[str]) -> Word:
        return tuple(n for g in word for n in self.path_map[g])

    def on_paths(self, a: str, b: str) -> tuple[int, ...]:
        """Class of the image of each class of ``hom_paths(a, b)``."""
        src = self.source.hom_paths(a, b)
        tgt = self.target.hom_paths(self.state_map[a], self.state_map[b])
        return tuple(tgt.class_of(self.apply(c[0])) for c in src.classes)

    def same_as(self, other: "FlowMorphism") -> bool:
        """Equality up to the target's congruence."""
        return (
            self.source == other.source
            and self.target == other.target
            and self.state_map == other.state_map
            and all(self.target.equivalent(self.path_map[g], other.path_map[g]) for g in self.path_map)
        )


def flow_identity(X: FlowPresentation) -> FlowMorphism:
    return FlowMorphism(X, X, {s: s for s in X.states}, {a.name: (a.name,) for a in X.generators})


def compose_flows(g: FlowMorphism, f: FlowMorphism) -> FlowMorphism:
    """``g o f``."""
    if f.target != g.source:
        raise SourceTargetMismatch("flow morphisms are not composable")
    return FlowMorphism(
        f.source,
        g.target,
        {s: g.state_map[t] for s, t in f.state_map.items()},
        {n: g.apply(w) for n, w in f.path_map.items()},
    )


@dataclass(frozen=True)
class FlowPushout:
    flow: FlowPresentation
    inl: FlowMorphism
    inr: FlowMorphism


def flow_pushout(f: FlowMorphism, g: FlowMorphism) -> FlowPushout:
    """Glue ``f.target`` and ``g.target`` along the common source."""
    if f.source != g.source:
        raise SourceTargetMismatch("a span needs a common source")
    B, C = f.target, g.target
    keys = [("B", s) for s in B.states] + [("C", s) for s in C.states]
    parent = {k: k for k in keys}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for s in f.source.states:
        x, y = find(("B", f.state_map[s])), find(("C", g.state_map[s]))
        if x != y:
            if keys.index(y) < keys.index(x):
                x, y = y, x
            parent[y] = x
    roots = []
    for k in keys:
        r = find(k)
        if r not in roots:
            roots.append(r)
    labels = _unique_labels([r[1] for r in roots])
    label = {r: l for r, l in zip(roots, labels)}
    state_of = {k: label[find(k)] for k in keys}

    b_names = [a.name for a in B.generators]
    c_names = _unique_labels([a.name for a in C.generators], set(b_names))
    rename_c = dict(zip((a.name for a in C.generators), c_names))
    gens = [Arrow(a.name, state_of[("B", a.src)], state_of[("B", a.tgt)]) for a in B.generators]
    gens += [Arrow(rename_c[a.name], state_of[("C", a.src)], state_of[("C", a.tgt)]) for a in C.generators]

    def c_word(w):
        return tuple(rename_c[n] for n in w)

    relations = list(B.relations) + [(c_word(l), c_word(r)) for l, r in C.relations]
    for a in f.source.generators:
        lw, rw = f.path_map[a.name], c_word(g.path_map[a.name])
        if lw != rw:
            relations.append((lw, rw))
    P = FlowPresentation([label[r] for r in roots], gens, relations)
    cyc = P.find_cycle()
    if cyc is not None:
        raise LoopDetected(f"gluing creates the cycle {';'.join(cyc)}", cyc)
    inl = FlowMorphism(B, P, {s: state_of[("B", s)] for s in B.states}, {a.name: (a.name,) for a in B.generators})
    inr = FlowMorphism(C, P, {s: state_of[("C", s)] for s in C.states}, {a.name: (rename_c[a.name],) for a in C.generators})
    return FlowPushout(P, inl, inr)


def flow_mediate(po: FlowPushout, h: FlowMorphism, k: FlowMorphism) -> FlowMorphism:
    """The map out of a pushout determined by a cocone ``(h, k)``."""
    P = po.flow
    state_map = {}
    for s, t in po.inl.state_map.items():
        state_map[t] = h.state_map[s]
    for s, t in po.inr.state_map.items():
        if state_map.setdefault(t, k.state_map[s]) != k.state_map[s]:
            raise FlowError("cocone legs disagree on a glued state")
    path_map = {}
    for n, w in po.inl.path_map.items():
        path_map[w[0]] = h.path_map[n]
    for n, w in po.inr.path_map.items():
        path_map[w[0]] = k.path_map[n]
    return FlowMorphism(P, h.target, state_map, path_map)


def discrete_weq(f: FlowMorphism) -> bool:
    """Bijective on states and on the path classes between every pair of states."""
    X, Y = f.source, f.target
    if len(X.states) != len(Y.states) or len(set(f.state_map.values())) != len(Y.states):
        return False
    for a in X.states:
        for b in X.states:
            image = f.on_paths(a, b)
            target = Y.hom_paths(f.state_map[a], f.state_map[b])
            if len(set(image)) != len(image) or len(image) != len(target):
                return False
    return True


def enumerate_flow_morphisms(
    X: FlowPresentation, Y: FlowPresentation, max_length: int = 6, state_bijective: bool = False
) -> Iterator[FlowMorphism]:
    """Every morphism sending generators to words up to ``max_length``, one per congruence choice."""
    for images in cartesian(Y.states, repeat=len(X.states)):
        if state_bijective and len(set(images)) != len(Y.states):
            continue
        smap = dict(zip(X.states, images))
        choices = []
        for a in X.generators:
            s, t = smap[a.src], smap[a.tgt]
            if Y.find_cycle((s, t)) is not None:
                raise LoopDetected(f"target has a cycle between {s} and {t}")
            if s == t:
                choices = None
                break
            reps = [c[0] for c in Y.hom_paths(s, t).classes]
            choices.append([w for w in reps if len(w) <= max_length])
        if choices is None:
            continue
        for ws in cartesian(*choices):
            pmap = {a.name: w for a, w in zip(X.generators, ws)}
            try:
                yield FlowMorphism(X, Y, smap, pmap)
            except FlowError:
                continue
