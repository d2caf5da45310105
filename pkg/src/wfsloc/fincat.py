"""Finite posets and monotone maps: the ambient category of the engine.

Elements of a poset are addressed by index; the order is stored as one
bitmask per element (``up[i]`` has bit ``j`` set iff ``i <= j``).  All
values are immutable; every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import permutations
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import EmptyChain, NotMonotone, PosetError, SourceTargetMismatch


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class FinPoset:
    """A finite poset with labelled elements.

    ``up[i]`` is the bitmask of all ``j`` with ``elements[i] <= elements[j]``.
    Equality is structural (labels and order); ``name`` is cosmetic.
    """

    elements: tuple[str, ...]
    up: tuple[int, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = len(self.elements)
        if len(self.up) != n:
            raise PosetError("one up-mask per element is required")
        if len(set(self.elements)) != n:
            raise PosetError("element labels must be unique")
        full = (1 << n) - 1
        for i, m in enumerate(self.up):
            if m & ~full:
                raise PosetError(f"up-mask of {self.elements[i]!r} out of range")
            if not (m >> i) & 1:
                raise PosetError(f"not reflexive at {self.elements[i]!r}")
        for i, m in enumerate(self.up):
            for j in bits(m & ~(1 << i)):
                if (self.up[j] >> i) & 1:
                    raise PosetError(
                        f"not antisymmetric: {self.elements[i]!r} and {self.elements[j]!r}"
                    )
                if self.up[j] & ~m:
                    raise PosetError(f"not transitive through {self.elements[j]!r}")

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self):
        return hash((self.elements, self.up))

    # -- construction -------------------------------------------------

    @classmethod
    def from_relations(cls, elements: Iterable[str], pairs: Iterable[tuple[str, str]], name=""):
        """The reflexive-transitive closure of ``pairs`` (each ``(a, b)`` means a <= b)."""
        elements = tuple(elements)
        index = {e: i for i, e in enumerate(elements)}
        if len(index) != len(elements):
            raise PosetError("element labels must be unique")
        up = [1 << i for i in range(len(elements))]
        for a, b in pairs:
            try:
                up[index[a]] |= 1 << index[b]
            except KeyError as exc:
                raise PosetError(f"unknown element {exc.args[0]!r}") from None
        return cls(elements, _closure(up), name)

    @classmethod
    def from_matrix(cls, elements: Iterable[str], leq: Sequence[Sequence[bool]], name=""):
        up = tuple(sum(1 << j for j, v in enumerate(row) if v) for row in leq)
        return cls(tuple(elements), up, name)

    @classmethod
    def _trusted(cls, elements, up, name=""):
        obj = object.__new__(cls)
        object.__setattr__(obj, "elements", tuple(elements))
        object.__setattr__(obj, "up", tuple(up))
        object.__setattr__(obj, "name", name)
        return obj

    # -- queries ------------------------------------------------------

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        label = f"{self.name} " if self.name else ""
        rel = " ".join(f"{self.elements[a]}<{self.elements[b]}" for a, b in self.covers)
        return f"FinPoset({label}[{' '.join(self.elements)}] {rel})"

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"{label!r} is not an element of {self.name or 'poset'}") from None

    @cached_property
    def _index(self):
        return {e: i for i, e in enumerate(self.elements)}

    def leq(self, i: int, j: int) -> bool:
        return bool((self.up[i] >> j) & 1)

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    @cached_property
    def down(self) -> tuple[int, ...]:
        down = [0] * len(self)
        for i, m in enumerate(self.up):
            for j in bits(m):
                down[j] |= 1 << i
        return tuple(down)

    @cached_property
    def strict_up(self) -> tuple[int, ...]:
        return tuple(m & ~(1 << i) for i, m in enumerate(self.up))

    @cached_property
    def strict_down(self) -> tuple[int, ...]:
        return tuple(m & ~(1 << i) for i, m in enumerate(self.down))

    @cached_property
    def covers(self) -> tuple[tuple[int, int], ...]:
        """Covering pairs ``(i, j)``: ``i < j`` with nothing strictly between."""
        out = []
        for i in range(len(self)):
            above = self.strict_up[i]
            for j in bits(above):
                if not above & self.strict_down[j]:
                    out.append((i, j))
        return tuple(out)

    @cached_property
    def relation_count(self) -> int:
        return sum(popcount(m) for m in self.strict_up)

    @cached_property
    def minimal(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self)) if not self.strict_down[i])

    @cached_property
    def maximal(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self)) if not self.strict_up[i])

    @cached_property
    def height(self) -> tuple[int, ...]:
        """Length of the longest chain ending at each element."""
        h = [0] * len(self)
        for i in self.linear_extension:
            for j in bits(self.strict_down[i]):
                h[i] = max(h[i], h[j] + 1)
        return tuple(h)

    @cached_property
    def linear_extension(self) -> tuple[int, ...]:
        order = sorted(range(len(self)), key=lambda i: popcount(self.down[i]))
        return tuple(order)

    @cached_property
    def _earlier(self):
        # for the lexicographic backtracking search: comparable earlier indices
        below, above = [], []
        for i in range(len(self)):
            earlier = (1 << i) - 1
            below.append(tuple(bits(self.strict_down[i] & earlier)))
            above.append(tuple(bits(self.strict_up[i] & earlier)))
        return tuple(below), tuple(above)

    def relabel(self, labels: Sequence[str], name=None) -> "FinPoset":
        return FinPoset(tuple(labels), self.up, self.name if name is None else name)

    def named(self, name: str) -> "FinPoset":
        return FinPoset._trusted(self.elements, self.up, name)


def _closure(up: list[int]) -> tuple[int, ...]:
    up = list(up)
    n = len(up)
    for k in range(n):
        bk, rk = 1 << k, up[k]
        for i in range(n):
            if up[i] & bk:
                up[i] |= rk
    return tuple(up)


def chain(n: int, labels: Sequence[str] | None = None, name="") -> FinPoset:
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
    full = (1 << n) - 1
    return FinPoset(labels, tuple(full & ~((1 << i) - 1) for i in range(n)), name)


def antichain(n: int, labels: Sequence[str] | None = None, name="") -> FinPoset:
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
    return FinPoset(labels, tuple(1 << i for i in range(n)), name)


def point(label: str = "*") -> FinPoset:
    return FinPoset((label,), (1,), "1")


def empty() -> FinPoset:
    return FinPoset((), (), "0")


POINT = point()
EMPTY = empty()


@dataclass(frozen=True)
class BoundednessCertificate:
    bottom: int
    top: int


def boundedness(P: FinPoset) -> BoundednessCertificate | None:
    """Bottom and top of ``P`` if it is bounded (with bottom != top)."""
    n = len(P)
    full = (1 << n) - 1
    bottoms = [i for i in range(n) if P.up[i] == full]
    tops = [i for i in range(n) if P.down[i] == full]
    if bottoms and tops and bottoms[0] != tops[0]:
        return BoundednessCertificate(bottoms[0], tops[0])
    return None


# -- morphisms ----------------------------------------------------------


@dataclass(frozen=True)
class MonotoneMap:
    """An order-preserving map, stored as a vector of target indices."""

    source: FinPoset
    target: FinPoset
    assignment: tuple[int, ...]

    def __post_init__(self):
        a = self.assignment
        if len(a) != len(self.source):
            raise NotMonotone("assignment must be total on the source")
        if any(not 0 <= v < len(self.target) for v in a):
            raise NotMonotone("assignment leaves the target")
        tup = self.target.up
        for i, m in enumerate(self.source.up):
            ti = tup[a[i]]
            for j in bits(m):
                if not (ti >> a[j]) & 1:
                    s = self.source.elements
                    raise NotMonotone(f"{s[i]} <= {s[j]} is not preserved", (i, j))

    @classmethod
    def _trusted(cls, source, target, assignment):
        obj = object.__new__(cls)
        object.__setattr__(obj, "source", source)
        object.__setattr__(obj, "target", target)
        object.__setattr__(obj, "assignment", tuple(assignment))
        return obj

    @classmethod
    def from_labels(cls, source: FinPoset, target: FinPoset, mapping: dict[str, str]):
        try:
            a = tuple(target.index(mapping[e]) for e in source.elements)
        except KeyError as exc:
            raise NotMonotone(f"map is not total or leaves the target: {exc}") from None
        return cls(source, target, a)

    @classmethod
    def identity(cls, P: FinPoset) -> "MonotoneMap":
        return cls._trusted(P, P, range(len(P)))

    def __call__(self, i: int) -> int:
        return self.assignment[i]

    def __matmul__(self, other: "MonotoneMap") -> "MonotoneMap":
        return compose(self, other)

    def __hash__(self):
        return hash((self.source, self.target, self.assignment))

    def __repr__(self):
        s, t = self.source.elements, self.target.elements
        body = ", ".join(f"{s[i]}->{t[v]}" for i, v in enumerate(self.assignment))
        return f"MonotoneMap({body})"

    def as_labels(self) -> dict[str, str]:
        t = self.target.elements
        return {e: t[v] for e, v in zip(self.source.elements, self.assignment)}

    @cached_property
    def fibers(self) -> tuple[int, ...]:
        """``fibers[y]`` is the bitmask of source indices sent to ``y``."""
        out = [0] * len(self.target)
        for i, v in enumerate(self.assignment):
            out[v] |= 1 << i
        return tuple(out)

    @cached_property
    def image(self) -> int:
        m = 0
        for v in self.assignment:
            m |= 1 << v
        return m

    def is_identity(self) -> bool:
        return self.source == self.target and self.assignment == tuple(range(len(self.source)))

    def is_injective(self) -> bool:
        return len(set(self.assignment)) == len(self.assignment)

    def is_surjective(self) -> bool:
        return popcount(self.image) == len(self.target)

    def is_strict(self) -> bool:
        a, tup = self.assignment, self.target.strict_up
        return all((tup[a[i]] >> a[j]) & 1 for i, m in enumerate(self.source.strict_up) for j in bits(m))

    def reflects_order(self) -> bool:
        a, tup = self.assignment, self.target.up
        n = len(a)
        return all(
            self.source.leq(i, j) or not (tup[a[i]] >> a[j]) & 1 for i in range(n) for j in range(n)
        )

    def is_iso(self) -> bool:
        return len(self.source) == len(self.target) and self.is_injective() and self.reflects_order()

    def inverse(self) -> "MonotoneMap":
        if not self.is_iso():
            raise NotMonotone("map is not an isomorphism")
        inv = [0] * len(self.assignment)
        for i, v in enumerate(self.assignment):
            inv[v] = i
        return MonotoneMap._trusted(self.target, self.source, inv)


def compose(f: MonotoneMap, g: MonotoneMap) -> MonotoneMap:
    """``f o g``: first ``g``, then ``f``."""
    if g.target is not f.source and g.target != f.source:
        raise SourceTargetMismatch(
            f"cannot compose: target of g ({g.target.name or len(g.target)}) "
            f"is not the source of f ({f.source.name or len(f.source)})"
        )
    fa = f.assignment
    return MonotoneMap._trusted(g.source, f.target, [fa[v] for v in g.assignment])


def compose_all(*maps: MonotoneMap) -> MonotoneMap:
    """``compose_all(f, g, h) == f o g o h``."""
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = compose(m, out)
    return out


def to_terminal(X: FinPoset) -> MonotoneMap:
    return MonotoneMap._trusted(X, POINT, [0] * len(X))


def from_initial(X: FinPoset) -> MonotoneMap:
    return MonotoneMap._trusted(EMPTY, X, ())


def constant(X: FinPoset, Y: FinPoset, value: int) -> MonotoneMap:
    return MonotoneMap._trusted(X, Y, [value] * len(X))


# -- hom-set search -------------------------------------------------------


def search_assignments(
    P: FinPoset,
    Q: FinPoset,
    allowed: Sequence[int] | None = None,
    strict: bool = False,
    injective: bool = False,
) -> Iterator[tuple[int, ...]]:
    """All monotone assignment vectors ``P -> Q`` in lexicographic order.

    ``allowed[i]`` restricts the value of element ``i`` to a bitmask of
    target indices.  ``strict`` demands ``x < y => f(x) < f(y)``.
    """
    n = len(P)
    full = (1 << len(Q)) - 1
    if allowed is None:
        allowed = [full] * n
    if n == 0:
        yield ()
        return
    if not all(allowed):
        return
    ups = Q.strict_up if strict else Q.up
    downs = Q.strict_down if strict else Q.down
    below, above = P._earlier
    assign = [0] * n
    cand = [0] * n
    used = [0] * (n + 1)
    cand[0] = allowed[0]
    i = 0
    last = n - 1
    while i >= 0:
        c = cand[i]
        if not c:
            i -= 1
            continue
        low = c & -c
        cand[i] = c ^ low
        v = low.bit_length() - 1
        assign[i] = v
        if i == last:
            yield tuple(assign)
            continue
        if injective:
            used[i + 1] = used[i] | low
        i += 1
        m = allowed[i]
        for y in below[i]:
            m &= ups[assign[y]]
        for y in above[i]:
            m &= downs[assign[y]]
        if injective:
            m &= ~used[i]
        cand[i] = m


def search_maps(P, Q, allowed=None, strict=False, injective=False) -> Iterator[MonotoneMap]:
    for a in search_assignments(P, Q, allowed, strict, injective):
        yield MonotoneMap._trusted(P, Q, a)


def enumerate_maps(P: FinPoset, Q: FinPoset, strict: bool = False) -> Iterator[MonotoneMap]:
    """Every monotone map ``P -> Q`` exactly once, lexicographic on assignments."""
    return search_maps(P, Q, strict=strict)


def first_map(P, Q, allowed=None, strict=False, injective=False) -> MonotoneMap | None:
    for m in search_maps(P, Q, allowed, strict, injective):
        return m
    return None


def fixed_allowed(P: FinPoset, Q: FinPoset, pins: dict[int, int]) -> list[int]:
    """An ``allowed`` vector pinning some source indices to target indices."""
    full = (1 << len(Q)) - 1
    allowed = [full] * len(P)
    for i, v in pins.items():
        allowed[i] &= 1 << v
    return allowed


def isomorphisms(P: FinPoset, Q: FinPoset) -> Iterator[MonotoneMap]:
    if len(P) != len(Q) or P.relation_count != Q.relation_count:
        return
    for m in search_maps(P, Q, injective=True):
        if m.reflects_order():
            yield m


def automorphisms(P: FinPoset) -> list[MonotoneMap]:
    return list(isomorphisms(P, P))


# -- limits and colimits ----------------------------------------------------


@lru_cache(maxsize=4096)
def product(P: FinPoset, Q: FinPoset) -> tuple[FinPoset, MonotoneMap, MonotoneMap]:
    """Componentwise product; element ``(a, b)`` sits at index ``a*|Q| + b``."""
    m = len(Q)
    labels = [f"({a},{b})" for a in P.elements for b in Q.elements]
    up = []
    for a in range(len(P)):
        for b in range(m):
            mask = 0
            qb = Q.up[b]
            for a2 in bits(P.up[a]):
                mask |= qb << (a2 * m)
            up.append(mask)
    name = f"{P.name}x{Q.name}" if P.name and Q.name else ""
    PQ = FinPoset._trusted(_unique_labels(labels), up, name)
    p1 = MonotoneMap._trusted(PQ, P, [i // m for i in range(len(PQ))] if m else [])
    p2 = MonotoneMap._trusted(PQ, Q, [i % m for i in range(len(PQ))] if m else [])
    return PQ, p1, p2


def pairing(f: MonotoneMap, g: MonotoneMap) -> MonotoneMap:
    """``(f, g): X -> Y x Z`` for ``f: X -> Y`` and ``g: X -> Z``."""
    if f.source != g.source:
        raise SourceTargetMismatch("pairing needs a common source")
    PQ, _, _ = product(f.target, g.target)
    m = len(g.target)
    return MonotoneMap._trusted(f.source, PQ, [a * m + b for a, b in zip(f.assignment, g.assignment)])


def product_map(f: MonotoneMap, g: MonotoneMap) -> MonotoneMap:
    """``f x g`` between products."""
    _, p1, p2 = product(f.source, g.source)
    return pairing(compose(f, p1), compose(g, p2))


def diagonal(Y: FinPoset) -> MonotoneMap:
    ident = MonotoneMap.identity(Y)
    return pairing(ident, ident)


def twist(Y: FinPoset) -> MonotoneMap:
    """``(y, y') |-> (y', y)`` on ``Y x Y``."""
    YY, p1, p2 = product(Y, Y)
    return pairing(p2, p1)


def _unique_labels(labels: Sequence[str], taken: set[str] | None = None) -> list[str]:
    seen = set() if taken is None else set(taken)
    out = []
    for lab in labels:
        while lab in seen:
            lab += "'"
        seen.add(lab)
        out.append(lab)
    return out


class Attachment(NamedTuple):
    """Result of gluing cells onto a base poset.

    ``members[e]`` lists the raw indices (base first, then each cell's
    codomain at ``offsets[c]``) that were identified into element ``e``.
    """

    result: FinPoset
    inclusion: MonotoneMap
    cell_maps: tuple[MonotoneMap, ...]
    members: tuple[tuple[int, ...], ...]
    offsets: tuple[int, ...]


def attach(
    base: FinPoset,
    cells: Sequence[tuple[MonotoneMap, MonotoneMap]],
    tag: str | None = None,
) -> Attachment:
    """Pushout of a coproduct of cells ``k: A -> B`` along ``u: A -> base``.

    The set-level pushout is taken first, then the preorder generated by
    the base order and each cell's order, then strongly connected
    components of that preorder are collapsed.  New elements are labelled
    ``f"{tag}{c}:{label}"`` (or just their own label when ``tag`` is None),
    with primes appended on collision.
    """
    n = len(base)
    offsets = []
    total = n
    for k, u in cells:
        if u.source != k.source:
            raise SourceTargetMismatch("attaching map and cell need a common source")
        if u.target != base:
            raise SourceTargetMismatch("attaching map must land in the base")
        offsets.append(total)
        total += len(k.target)

    parent = list(range(total))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (k, u), off in zip(cells, offsets):
        for a in range(len(k.source)):
            ra, rb = find(off + k.assignment[a]), find(u.assignment[a])
            if ra != rb:
                if ra < rb:
                    ra, rb = rb, ra
                parent[ra] = rb

    groups: dict[int, list[int]] = {}
    for x in range(total):
        groups.setdefault(find(x), []).append(x)
    order = sorted(groups.values(), key=lambda g: g[0])
    gid = [0] * total
    for g, members in enumerate(order):
        for x in members:
            gid[x] = g

    G = len(order)
    reach = [1 << g for g in range(G)]
    for i in range(n):
        gi = gid[i]
        for j in bits(base.strict_up[i]):
            reach[gi] |= 1 << gid[j]
    for (k, _), off in zip(cells, offsets):
        cod = k.target
        for i in range(len(cod)):
            gi = gid[off + i]
            for j in bits(cod.strict_up[i]):
                reach[gi] |= 1 << gid[off + j]
    reach = list(_closure(reach))

    # collapse cycles of the generated preorder
    scc = [-1] * G
    classes = []
    for g in range(G):
        if scc[g] >= 0:
            continue
        cls = [h for h in bits(reach[g]) if (reach[h] >> g) & 1]
        for h in cls:
            scc[h] = len(classes)
        classes.append(cls)
    up = []
    for cls in classes:
        mask = 0
        for h in bits(reach[cls[0]]):
            mask |= 1 << scc[h]
        up.append(mask)

    members = []
    labels = []
    taken = set(base.elements)
    cell_of = []
    for (k, _), off in zip(cells, offsets):
        cell_of.append((off, k.target))
    for cls in classes:
        raw = sorted(x for h in cls for x in order[h])
        members.append(tuple(raw))
        r = raw[0]
        if r < n:
            labels.append(base.elements[r])
        else:
            c = max(ci for ci, off in enumerate(offsets) if off <= r)
            lab = cells[c][0].target.elements[r - offsets[c]]
            lab = lab if tag is None else f"{tag}{c}:{lab}"
            while lab in taken:
                lab += "'"
            taken.add(lab)
            labels.append(lab)
    final = [0] * total
    for e, raw in enumerate(members):
        for x in raw:
            final[x] = e
    result = FinPoset._trusted(labels, up)
    inclusion = MonotoneMap._trusted(base, result, final[:n])
    cell_maps = tuple(
        MonotoneMap._trusted(k.target, result, final[off : off + len(k.target)])
        for (k, _), off in zip(cells, offsets)
    )
    return Attachment(result, inclusion, cell_maps, tuple(members), tuple(offsets))


def mediate(att: Attachment, base_map: MonotoneMap, cell_maps: Sequence[MonotoneMap]) -> MonotoneMap:
    """The map out of an attachment induced by a compatible cocone."""
    n = len(att.inclusion.source)
    Z = base_map.target
    values = []
    for raw in att.members:
        vals = set()
        for x in raw:
            if x < n:
                vals.add(base_map.assignment[x])
            else:
                c = max(ci for ci, off in enumerate(att.offsets) if off <= x)
                vals.add(cell_maps[c].assignment[x - att.offsets[c]])
        if len(vals) != 1:
            raise SourceTargetMismatch("cocone does not agree on glued elements")
        values.append(vals.pop())
    return MonotoneMap(att.result, Z, tuple(values))


def pushout(f: MonotoneMap, g: MonotoneMap) -> tuple[FinPoset, MonotoneMap, MonotoneMap]:
    """Pushout of the span ``B <-f- A -g-> C``; returns ``(P, inl, inr)``."""
    if f.source != g.source:
        raise SourceTargetMismatch("pushout needs a common source")
    att = attach(f.target, [(g, f)])
    return att.result, att.inclusion, att.cell_maps[0]


def coproduct(objects: Sequence[FinPoset]) -> tuple[FinPoset, list[MonotoneMap]]:
    labels, up, offsets = [], [], []
    off = 0
    for P in objects:
        offsets.append(off)
        labels.extend(P.elements)
        up.extend(m << off for m in P.up)
        off += len(P)
    S = FinPoset._trusted(_unique_labels(labels), up)
    injections = [
        MonotoneMap._trusted(P, S, [o + i for i in range(len(P))]) for P, o in zip(objects, offsets)
    ]
    return S, injections


def sequential_colimit(maps: Sequence[MonotoneMap]) -> tuple[FinPoset, list[MonotoneMap]]:
    """Colimit of a finite composable chain ``X0 -> X1 -> ... -> Xn``.

    For a finite chain this is ``Xn``; the injections ``Xi -> Xn`` are the
    composites, one for each object of the chain.
    """
    if not maps:
        raise EmptyChain("sequential colimit of an empty chain")
    for a, b in zip(maps, maps[1:]):
        if b.source != a.target:
            raise SourceTargetMismatch("chain is not composable")
    last = maps[-1].target
    injections = [MonotoneMap.identity(last)]
    for m in reversed(maps):
        injections.append(compose(injections[-1], m))
    injections.reverse()
    return last, injections


# -- canonical forms --------------------------------------------------------


def _refine(P: FinPoset, colors: list[int]) -> list[int]:
    while True:
        sig = [
            (
                colors[i],
                tuple(sorted(colors[j] for j in bits(P.strict_down[i]))),
                tuple(sorted(colors[j] for j in bits(P.strict_up[i]))),
            )
            for i in range(len(P))
        ]
        ranks = {s: r for r, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _encode(P: FinPoset, position: Sequence[int]) -> tuple[int, ...]:
    enc = [0] * len(P)
    for i in range(len(P)):
        mask = 0
        for j in bits(P.up[i]):
            mask |= 1 << position[j]
        enc[position[i]] = mask
    return tuple(enc)


def canonical_labeling(P: FinPoset) -> tuple[FinPoset, MonotoneMap]:
    """A canonical copy of ``P`` and an isomorphism ``P -> copy``.

    Elements are ranked by height, comparability counts and cover counts,
    the ranking is refined by neighbour colours until stable, and remaining
    ties are broken by exhaustive individualisation, keeping the
    lexicographically least relation encoding.  Heights are the primary
    key, so the canonical order is a linear extension.
    """
    n = len(P)
    below_cov = [0] * n
    above_cov = [0] * n
    for a, b in P.covers:
        above_cov[a] += 1
        below_cov[b] += 1
    init = [
        (P.height[i], popcount(P.strict_down[i]), -popcount(P.strict_up[i]), below_cov[i], -above_cov[i])
        for i in range(n)
    ]
    ranks = {s: r for r, s in enumerate(sorted(set(init)))}
    colors = _refine(P, [ranks[s] for s in init])

    best: list = [None, None]

    def search(colors):
        cells: dict[int, list[int]] = {}
        for i, c in enumerate(colors):
            cells.setdefault(c, []).append(i)
        target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            enc = _encode(P, colors)
            if best[0] is None or enc < best[0]:
                best[0], best[1] = enc, list(colors)
            return
        for v in cells[target]:
            split = [c + 1 if c > target or (c == target and i != v) else c for i, c in enumerate(colors)]
            search(_refine(P, split))

    search(colors)
    enc, position = best
    if enc is None:
        enc, position = (), []
    canon = FinPoset._trusted(tuple(str(i) for i in range(n)), enc, P.name)
    return canon, MonotoneMap._trusted(P, canon, position)


def canonical_form(P: FinPoset) -> FinPoset:
    return canonical_labeling(P)[0]


def canonical_key(P: FinPoset) -> tuple[int, ...]:
    return canonical_form(P).up


def is_isomorphic(P: FinPoset, Q: FinPoset) -> bool:
    return len(P) == len(Q) and canonical_key(P) == canonical_key(Q)


@lru_cache(maxsize=None)
def enumerate_posets(n: int) -> tuple[FinPoset, ...]:
    """One canonical representative of every poset with ``n`` elements.

    Ordered by canonical encoding.  Built by adding a new maximal element
    above every down-set of every ``(n-1)``-element representative.
    """
    if n == 0:
        return (EMPTY,)
    found = {}
    for P in enumerate_posets(n - 1):
        for D in _down_sets(P):
            up = [m | (1 << (n - 1)) if (D >> i) & 1 else m for i, m in enumerate(P.up)]
            up.append(1 << (n - 1))
            Q = FinPoset._trusted(tuple(str(i) for i in range(n)), up)
            C = canonical_form(Q)
            found.setdefault(C.up, C)
    return tuple(found[k] for k in sorted(found))


def _down_sets(P: FinPoset) -> list[int]:
    out = []
    n = len(P)
    for mask in range(1 << n):
        if all((P.strict_down[i] & ~mask) == 0 for i in bits(mask)):
            out.append(mask)
    return out


def bounded_posets(n: int) -> tuple[FinPoset, ...]:
    return tuple(P for P in enumerate_posets(n) if boundedness(P) is not None)


def all_posets_up_to(n: int) -> list[FinPoset]:
    return [P for k in range(1, n + 1) for P in enumerate_posets(k)]


def brute_force_maps(P: FinPoset, Q: FinPoset, strict: bool = False) -> list[tuple[int, ...]]:
    """Reference enumeration: filter all ``|Q|^|P|`` assignments."""
    from itertools import product as cartesian

    out = []
    rel = P.strict_up if strict else P.up
    qrel = Q.strict_up if strict else Q.up
    for a in cartesian(range(len(Q)), repeat=len(P)):
        if all((qrel[a[i]] >> a[j]) & 1 for i in range(len(P)) for j in bits(rel[i])):
            out.append(a)
    return out


def relabelings(P: FinPoset) -> Iterator[FinPoset]:
    """Every re-indexing of ``P`` (for invariance tests on small posets)."""
    n = len(P)
    for perm in permutations(range(n)):
        # element i of P moves to position perm[i]
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        up = []
        for p in range(n):
            i = inv[p]
            mask = 0
            for j in bits(P.up[i]):
                mask |= 1 << perm[j]
            up.append(mask)
        yield FinPoset._trusted(tuple(P.elements[inv[p]] for p in range(n)), up)
