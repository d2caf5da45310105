"""Path objects, right homotopies and the homotopy congruence.

A path object of ``Y`` is the middle of the small object factorization of
the diagonal ``Y -> Y x Y``.  Two maps are right homotopic when their
pairing lifts through the second leg; the congruence is the transitive
closure, kept together with a spanning forest of witnesses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .errors import LiftNotFound, NotConverged, PathObjectNotConverged, SourceTargetMismatch
from .fincat import (
    FinPoset,
    MonotoneMap,
    compose,
    diagonal,
    first_map,
    pairing,
    search_maps,
    to_terminal,
    twist,
)
from .wfs import (
    ALL_AT_ONCE,
    DEFAULT_STAGE_BOUND,
    Cell,
    CellCertificate,
    Factorization,
    GeneratorSet,
    LiftingProblem,
    carry_glued,
    find_lift,
    in_inj,
    rebase_certificate,
    run_stage,
    select_squares,
    small_object_factorize,
)


@dataclass(frozen=True, eq=False)
class PathObject:
    """``into: Y -> total`` (cell) followed by ``outof: total -> Y x Y``."""

    base: FinPoset
    factorization: Factorization
    gens: GeneratorSet

    @property
    def total(self) -> FinPoset:
        return self.factorization.middle

    @property
    def into(self) -> MonotoneMap:
        return self.factorization.alpha

    @property
    def outof(self) -> MonotoneMap:
        return self.factorization.beta

    @property
    def converged(self) -> bool:
        return self.factorization.converged

    @property
    def certificate(self) -> CellCertificate:
        return self.factorization.certificate

    def require_converged(self):
        if not self.converged:
            raise PathObjectNotConverged(
                f"path object of {self.base!r} did not converge in {self.factorization.stages_used} stages", self
            )

    @cached_property
    def fiber_masks(self) -> tuple[int, ...]:
        """Elements of ``total`` over each element of ``Y x Y``, by product index."""
        return self.outof.fibers

    @cached_property
    def symmetry_lift(self) -> MonotoneMap:
        """``k`` with ``k o into == into`` and ``outof o k == twist o outof``."""
        sq = LiftingProblem(self.into, self.outof, self.into, compose(twist(self.base), self.outof))
        k = find_lift(sq)
        if k is None:
            raise LiftNotFound("no symmetry lift; the path object is corrupted", sq)
        return k


@lru_cache(maxsize=None)
def _path_object(Y: FinPoset, gens: GeneratorSet, stage_bound: int, policy: str) -> PathObject:
    return PathObject(Y, small_object_factorize(diagonal(Y), gens, stage_bound, policy), gens)


def path_object(
    Y: FinPoset,
    gens: GeneratorSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
    allow_partial: bool = False,
) -> PathObject:
    """Factor the diagonal of ``Y``; a truncated run raises unless ``allow_partial``."""
    po = _path_object(Y, gens, stage_bound, policy)
    if not allow_partial:
        po.require_converged()
    return po


@dataclass(frozen=True)
class HomotopyWitness:
    """``H`` with ``outof o H == (f, g)``."""

    f: MonotoneMap
    g: MonotoneMap
    H: MonotoneMap
    path_object: PathObject = field(compare=False)

    def is_valid(self) -> bool:
        po = self.path_object
        return (
            self.H.source == self.f.source
            and self.H.target == po.total
            and compose(po.outof, self.H).assignment == pairing(self.f, self.g).assignment
        )


def _check_pair(f: MonotoneMap, g: MonotoneMap, po: PathObject):
    if f.source != g.source or f.target != g.target:
        raise SourceTargetMismatch("homotopies compare parallel maps")
    if f.target != po.base:
        raise SourceTargetMismatch("path object is built on a different poset")
    po.require_converged()


def _homotopy(f: MonotoneMap, g: MonotoneMap, po: PathObject) -> MonotoneMap | None:
    n = len(po.base)
    fib = po.fiber_masks
    allowed = [fib[a * n + b] for a, b in zip(f.assignment, g.assignment)]
    if not all(allowed):
        return None
    return first_map(f.source, po.total, allowed)


def right_homotopic(f: MonotoneMap, g: MonotoneMap, po: PathObject) -> HomotopyWitness | None:
    """The first ``H`` in enumeration order, or None after exhausting all candidates."""
    _check_pair(f, g, po)
    H = _homotopy(f, g, po)
    return None if H is None else HomotopyWitness(f, g, H, po)


def reflexive_witness(f: MonotoneMap, po: PathObject) -> HomotopyWitness:
    _check_pair(f, f, po)
    return HomotopyWitness(f, f, compose(po.into, f), po)


def swap_witness(w: HomotopyWitness) -> HomotopyWitness:
    """A witness from ``g`` to ``f`` obtained through the symmetry lift."""
    k = w.path_object.symmetry_lift
    return HomotopyWitness(w.g, w.f, compose(k, w.H), w.path_object)


# -- the congruence ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CongruenceTable:
    """Hom-set ``source -> target`` partitioned by the homotopy congruence.

    ``raw[i]`` is the bitmask of ``j`` with ``maps[i]`` right homotopic to
    ``maps[j]``; ``forest`` holds one witness per merge.
    """

    source: FinPoset
    target: FinPoset
    maps: tuple[MonotoneMap, ...]
    raw: tuple[int, ...]
    class_of: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]
    forest: dict = field(repr=False)
    path_object: PathObject = field(repr=False)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {m.assignment: i for i, m in enumerate(self.maps)}

    def index_of(self, f: MonotoneMap) -> int:
        if f.source != self.source or f.target != self.target:
            raise SourceTargetMismatch("map is not in this hom-set")
        return self.index[f.assignment]

    def class_index(self, f: MonotoneMap) -> int:
        return self.class_of[self.index_of(f)]

    def congruent(self, f: MonotoneMap, g: MonotoneMap) -> bool:
        return self.class_index(f) == self.class_index(g)

    def right_homotopic_pair(self, i: int, j: int) -> bool:
        return bool((self.raw[i] >> j) & 1)

    def representative(self, c: int) -> MonotoneMap:
        return self.maps[self.classes[c][0]]

    def is_raw_transitive(self) -> bool:
        for i, row in enumerate(self.raw):
            for j in range(len(self.maps)):
                if (row >> j) & 1 and self.raw[j] & ~row:
                    return False
        return True

    def witness_chain(self, i: int, j: int) -> list[HomotopyWitness]:
        """Witnesses ``maps[i] ~ m1 ~ ... ~ maps[j]`` along the spanning forest."""
        if self.class_of[i] != self.class_of[j]:
            raise ValueError("maps lie in different classes")
        prev = {i: None}
        todo = deque([i])
        while todo:
            a = todo.popleft()
            if a == j:
                break
            for b in self.forest.get(a, ()):
                if b not in prev:
                    prev[b] = a
                    todo.append(b)
        chain = []
        b = j
        while prev[b] is not None:
            a = prev[b]
            chain.append(self._edge(a, b))
            b = a
        return list(reversed(chain))

    def _edge(self, a: int, b: int) -> HomotopyWitness:
        w = self.forest[a][b]
        return w if w.f == self.maps[a] else swap_witness(w)


@lru_cache(maxsize=None)
def homotopy_congruence(
    X: FinPoset,
    Y: FinPoset,
    gens: GeneratorSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
) -> CongruenceTable:
    """Test every ordered pair of maps ``X -> Y`` and close under transitivity."""
    po = path_object(Y, gens, stage_bound, policy)
    maps = tuple(search_maps(X, Y))
    n = len(Y)
    fib = po.fiber_masks
    P = po.total
    raw = []
    homotopies: dict[tuple[int, int], MonotoneMap] = {}
    for i, f in enumerate(maps):
        row = 0
        for j, g in enumerate(maps):
            allowed = [fib[a * n + b] for a, b in zip(f.assignment, g.assignment)]
            if not all(allowed):
                continue
            H = first_map(X, P, allowed)
            if H is not None:
                row |= 1 << j
                if i < j:
                    homotopies[i, j] = H
        raw.append(row)
    parent = list(range(len(maps)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    forest: dict[int, dict[int, HomotopyWitness]] = {}
    for (i, j), H in sorted(homotopies.items()):
        a, b = find(i), find(j)
        if a == b:
            continue
        parent[max(a, b)] = min(a, b)
        w = HomotopyWitness(maps[i], maps[j], H, po)
        forest.setdefault(i, {})[j] = w
        forest.setdefault(j, {})[i] = w
    roots: dict[int, int] = {}
    class_of = []
    for i in range(len(maps)):
        class_of.append(roots.setdefault(find(i), len(roots)))
    classes = [[] for _ in roots]
    for i, c in enumerate(class_of):
        classes[c].append(i)
    return CongruenceTable(
        X, Y, maps, tuple(raw), tuple(class_of), tuple(tuple(c) for c in classes), forest, po
    )


@dataclass(frozen=True)
class CompositionCheck:
    ok: bool
    counterexample: tuple[MonotoneMap, MonotoneMap] | None = None

    def __bool__(self):
        return self.ok


def congruence_respects_composition(
    table: CongruenceTable,
    u: MonotoneMap | None = None,
    v: MonotoneMap | None = None,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
) -> CompositionCheck:
    """Congruent ``f, g`` must stay congruent as ``u o f, u o g`` and ``f o v, g o v``.

    On failure the first congruent pair whose composites separate is returned.
    """
    gens = table.path_object.gens
    for m, side in ((u, "post"), (v, "pre")):
        if m is None:
            continue
        if side == "post":
            other = homotopy_congruence(table.source, m.target, gens, stage_bound, policy)
            image = [other.class_index(compose(m, f)) for f in table.maps]
        else:
            other = homotopy_congruence(m.source, table.target, gens, stage_bound, policy)
            image = [other.class_index(compose(f, m)) for f in table.maps]
        for members in table.classes:
            first = members[0]
            for i in members[1:]:
                if image[i] != image[first]:
                    return CompositionCheck(False, (table.maps[first], table.maps[i]))
    return CompositionCheck(True)


# -- fibrant replacement ------------------------------------------------------


def fibrant_replacement(
    X: FinPoset, gens: GeneratorSet, stage_bound: int = DEFAULT_STAGE_BOUND, policy: str = ALL_AT_ONCE
) -> Factorization:
    """Factor ``X -> 1``; the middle object is fibrant when the run converged."""
    return small_object_factorize(to_terminal(X), gens, stage_bound, policy)


def half_inverse(
    f: MonotoneMap,
    gens: GeneratorSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
) -> tuple[MonotoneMap, HomotopyWitness]:
    """``g`` with ``g o f == id`` and a witness that ``f o g`` is homotopic to the identity.

    Both come from lifts against ``f``, so ``f`` should be a cell map and
    its source fibrant; otherwise LiftNotFound names the failing square.
    """
    X, Y = f.source, f.target
    sq = LiftingProblem(f, to_terminal(X), MonotoneMap.identity(X), to_terminal(Y))
    g = find_lift(sq)
    if g is None:
        raise LiftNotFound("no retraction of the map onto its source", sq)
    po = path_object(Y, gens, stage_bound, policy)
    fg = compose(f, g)
    ident = MonotoneMap.identity(Y)
    sq2 = LiftingProblem(f, po.outof, compose(po.into, f), pairing(fg, ident))
    H = find_lift(sq2)
    if H is None:
        raise LiftNotFound("no homotopy from the composite to the identity", sq2)
    return g, HomotopyWitness(fg, ident, H, po)


@dataclass(frozen=True)
class InducedReplacement:
    """Stagewise maps ``f_n: X_n -> Y_n`` between replacement chains.

    ``x_steps`` and ``y_steps`` are the chain maps; ``maps[n]`` carries
    ``certificates[n]``, and each square ``f_(n+1) o x_steps[n] ==
    y_steps[n] o f_n`` commutes.
    """

    map: MonotoneMap
    x_steps: tuple[MonotoneMap, ...]
    y_steps: tuple[MonotoneMap, ...]
    maps: tuple[MonotoneMap, ...]
    certificates: tuple[CellCertificate, ...]
    converged: bool

    @property
    def replaced(self) -> MonotoneMap:
        return self.maps[-1]

    @property
    def certificate(self) -> CellCertificate:
        return self.certificates[-1]


def induced_replacement(
    cert: CellCertificate,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
) -> InducedReplacement:
    """Replace both ends of a certified cell map, keeping a certificate at every stage.

    The source runs the same stages as ``fibrant_replacement``.  At each
    stage the squares glued on the source are carried to the target along
    the current map (which pushes the map out along the source stage), and
    the target's own remaining squares are glued after that.
    """
    gens = cert.gens
    f = cert.map
    fx, fc = f, cert
    Xn, Yn = f.source, f.target
    x_glued: set = set()
    y_glued: set = set()
    x_steps, y_steps, maps, certs = [], [], [f], [cert]
    for n in range(stage_bound + 1):
        sx = select_squares(to_terminal(Xn), gens, x_glued, policy)
        sy = select_squares(to_terminal(Yn), gens, y_glued, policy)
        if not sx and not sy:
            break
        if n == stage_bound:
            return InducedReplacement(f, tuple(x_steps), tuple(y_steps), tuple(maps), tuple(certs), False)
        tag = f"r{n + 1}"
        _, attx = run_stage(Xn, [Cell(gi, top) for gi, top, _ in sx], gens, f"{tag}x")
        bar, bar_cert, corner = rebase_certificate(fc, attx.inclusion)
        carried = [(gi, compose(fx, top), bottom) for gi, top, bottom in sx]
        carried_keys = {(gi, top.assignment) for gi, top, _ in carried}
        own = [sq for sq in sy if (sq[0], sq[1].assignment) not in carried_keys]
        stages = bar_cert.stages
        nxt = bar
        y_step = corner
        if own:
            stage, atty = run_stage(bar.target, [Cell(gi, compose(corner, top)) for gi, top, _ in own], gens, f"{tag}y")
            stages = stages + (stage,)
            nxt = compose(atty.inclusion, bar)
            y_step = compose(atty.inclusion, corner)
        fc = CellCertificate(gens, nxt, stages)
        fx = nxt
        x_glued = carry_glued(x_glued, attx.inclusion, sx)
        y_glued = carry_glued(y_glued, y_step, carried + own)
        x_steps.append(attx.inclusion)
        y_steps.append(y_step)
        maps.append(fx)
        certs.append(fc)
        Xn, Yn = fx.source, fx.target
    converged = in_inj(to_terminal(Xn), gens)[0] and in_inj(to_terminal(Yn), gens)[0]
    return InducedReplacement(f, tuple(x_steps), tuple(y_steps), tuple(maps), tuple(certs), converged)


def replacement_map(f: MonotoneMap, gens: GeneratorSet, stage_bound: int = DEFAULT_STAGE_BOUND) -> MonotoneMap:
    """A map ``R(X) -> R(Y)`` under ``f`` between fibrant replacements, found as a lift."""
    rx = fibrant_replacement(f.source, gens, stage_bound)
    ry = fibrant_replacement(f.target, gens, stage_bound)
    if not (rx.converged and ry.converged):
        raise NotConverged("fibrant replacement did not converge", (rx, ry))
    sq = LiftingProblem(rx.alpha, to_terminal(ry.middle), compose(ry.alpha, f), to_terminal(rx.middle))
    k = find_lift(sq)
    if k is None:
        raise LiftNotFound("no map between the replacements", sq)
    return k
