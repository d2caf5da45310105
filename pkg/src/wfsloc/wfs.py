"""Weak factorization systems generated by finite sets of poset maps.

Lifting problems are solved by exhaustive lexicographic search, so every
negative answer is a proof.  The small object argument is run for a
bounded number of stages and returns a replayable cell certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import CertificateError, CommutativityError, SourceTargetMismatch
from .fincat import (
    FinPoset,
    MonotoneMap,
    attach,
    bits,
    canonical_labeling,
    compose,
    first_map,
    mediate,
    popcount,
    search_maps,
    to_terminal,
)

ALL_AT_ONCE = "all"
ONE_AT_A_TIME = "single"
DEFAULT_STAGE_BOUND = 8


def _canonical_copy(k: MonotoneMap) -> MonotoneMap:
    A, ca = canonical_labeling(k.source)
    B, cb = canonical_labeling(k.target)
    return compose(cb, compose(k, ca.inverse()))


@dataclass(frozen=True)
class GeneratorSet:
    """A finite generating set ``K`` for ``(cof(K), inj(K))``.

    Sources and targets are replaced by their canonical forms.  With
    ``strict`` set, the top edges of lifting squares and the lifts
    themselves range over strictly increasing maps only.
    """

    maps: tuple[MonotoneMap, ...] = ()
    strict: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(_canonical_copy(k) for k in self.maps))

    def __len__(self):
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    def __getitem__(self, i):
        return self.maps[i]

    def with_strict(self, strict: bool) -> "GeneratorSet":
        return GeneratorSet(self.maps, strict, self.name)


EMPTY_GENERATORS = GeneratorSet(())


@dataclass(frozen=True)
class LiftingProblem:
    """A commutative square ``p o top == bottom o i``."""

    i: MonotoneMap
    p: MonotoneMap
    top: MonotoneMap
    bottom: MonotoneMap

    def __post_init__(self):
        i, p, top, bottom = self.i, self.p, self.top, self.bottom
        if top.source != i.source or bottom.source != i.target:
            raise SourceTargetMismatch("square edges do not meet at the left leg")
        if top.target != p.source or bottom.target != p.target:
            raise SourceTargetMismatch("square edges do not meet at the right leg")
        if compose(p, top).assignment != compose(bottom, i).assignment:
            raise CommutativityError("square does not commute")

    def is_lift(self, g: MonotoneMap) -> bool:
        return (
            compose(g, self.i).assignment == self.top.assignment
            and compose(self.p, g).assignment == self.bottom.assignment
        )


def _lift_allowed(i, p, top, bottom) -> list[int] | None:
    allowed = [p.fibers[bottom.assignment[b]] for b in range(len(i.target))]
    for a, b in enumerate(i.assignment):
        allowed[b] &= 1 << top.assignment[a]
    return allowed


def find_lift(sq: LiftingProblem, strict: bool = False) -> MonotoneMap | None:
    """The lexicographically first lift of ``sq``, or None after exhausting all maps."""
    allowed = _lift_allowed(sq.i, sq.p, sq.top, sq.bottom)
    return first_map(sq.i.target, sq.p.source, allowed, strict=strict)


def has_lift(i, p, top, bottom, strict=False) -> bool:
    return first_map(i.target, p.source, _lift_allowed(i, p, top, bottom), strict=strict) is not None


def squares(k: MonotoneMap, p: MonotoneMap, strict: bool = False) -> Iterator[tuple[MonotoneMap, MonotoneMap]]:
    """Every commutative square from ``k`` to ``p`` as ``(top, bottom)``.

    Only the top edge is subject to ``strict``; bottoms are arbitrary
    monotone maps (the map to the terminal poset is never strict).
    """
    Y = p.target
    full = (1 << len(Y)) - 1
    for top in search_maps(k.source, p.source, strict=strict):
        allowed = [full] * len(k.target)
        for a, b in enumerate(k.assignment):
            allowed[b] &= 1 << p.assignment[top.assignment[a]]
        for bottom in search_maps(k.target, Y, allowed):
            yield top, bottom


def failing_squares(p: MonotoneMap, gens: GeneratorSet) -> Iterator[tuple[int, MonotoneMap, MonotoneMap]]:
    """Squares ``(generator index, top, bottom)`` against ``p`` that have no lift."""
    for gi, k in enumerate(gens.maps):
        for top, bottom in squares(k, p, gens.strict):
            if not has_lift(k, p, top, bottom, gens.strict):
                yield gi, top, bottom


def in_inj(p: MonotoneMap, gens: GeneratorSet) -> tuple[bool, LiftingProblem | None]:
    """Whether ``p`` has the right lifting property against every generator.

    On failure the deterministically first square without a lift is returned.
    """
    for gi, top, bottom in failing_squares(p, gens):
        return False, LiftingProblem(gens.maps[gi], p, top, bottom)
    return True, None


def is_fibrant(X: FinPoset, gens: GeneratorSet) -> bool:
    return in_inj(to_terminal(X), gens)[0]


def fibrancy_witness(X: FinPoset, gens: GeneratorSet) -> LiftingProblem | None:
    return in_inj(to_terminal(X), gens)[1]


# -- cell certificates ------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    generator: int
    attaching: MonotoneMap


@dataclass(frozen=True)
class Stage:
    """One attachment: the pushout of a coproduct of generators along ``cells``."""

    base: FinPoset
    cells: tuple[Cell, ...]
    result: FinPoset
    inclusion: MonotoneMap
    tag: str | None = None


@dataclass(frozen=True)
class CellCertificate:
    """Evidence that ``map`` is a finite composite of cell attachments.

    Replaying the stages from ``map.source`` yields a map into the last
    stage result; ``comparison`` (an isomorphism onto ``map.target``) is
    applied last, and is None when the replay lands on the target exactly.
    """

    gens: GeneratorSet
    map: MonotoneMap
    stages: tuple[Stage, ...] = ()
    comparison: MonotoneMap | None = None

    @property
    def cell_count(self) -> int:
        return sum(len(s.cells) for s in self.stages)


def run_stage(base: FinPoset, cells: Sequence[Cell], gens: GeneratorSet, tag: str | None):
    att = attach(base, [(gens.maps[c.generator], c.attaching) for c in cells], tag)
    stage = Stage(base, tuple(cells), att.result, att.inclusion, tag)
    return stage, att


def replay(cert: CellCertificate) -> MonotoneMap:
    """Rebuild the certified map from its stages; raises CertificateError on mismatch."""
    cur = cert.map.source
    acc = MonotoneMap.identity(cur)
    for n, stage in enumerate(cert.stages, 1):
        if stage.base != cur:
            raise CertificateError(f"stage {n} does not start where stage {n - 1} ended")
        for c in stage.cells:
            if not 0 <= c.generator < len(cert.gens):
                raise CertificateError(f"stage {n} names an unknown generator")
            if c.attaching.source != cert.gens.maps[c.generator].source or c.attaching.target != cur:
                raise CertificateError(f"stage {n} has a malformed attaching map")
        _, att = run_stage(cur, stage.cells, cert.gens, stage.tag)
        if att.result != stage.result or att.inclusion.assignment != stage.inclusion.assignment:
            raise CertificateError(f"stage {n} does not replay to its recorded pushout")
        acc = compose(att.inclusion, acc)
        cur = att.result
    if cert.comparison is not None:
        comp = cert.comparison
        if comp.source != cur or comp.target != cert.map.target or not comp.is_iso():
            raise CertificateError("comparison is not an isomorphism onto the target")
        acc = compose(comp, acc)
    if acc.target != cert.map.target or acc.assignment != cert.map.assignment:
        raise CertificateError("replayed composite differs from the certified map")
    return acc


def verify_certificate(cert: CellCertificate) -> bool:
    try:
        replay(cert)
    except CertificateError:
        return False
    return True


# -- small object argument --------------------------------------------------


@dataclass(frozen=True)
class Factorization:
    """``map == beta o alpha`` with ``alpha`` certified cell and ``beta`` in inj when converged."""

    map: MonotoneMap
    alpha: MonotoneMap
    beta: MonotoneMap
    certificate: CellCertificate
    converged: bool
    policy: str = ALL_AT_ONCE

    @property
    def middle(self) -> FinPoset:
        return self.alpha.target

    @property
    def stages_used(self) -> int:
        return len(self.certificate.stages)

    @property
    def stage_maps(self) -> list[MonotoneMap]:
        return [s.inclusion for s in self.certificate.stages]


@lru_cache(maxsize=None)
def _fresh_covers(k: MonotoneMap) -> tuple[tuple[int, int], ...]:
    image = k.image
    return tuple((c, d) for c, d in k.target.covers if not ((image >> c) & 1 and (image >> d) & 1))


def is_ripe(k: MonotoneMap, bottom: MonotoneMap) -> bool:
    """Every cover of ``cod(k)`` touching a new element lands on a cover or an equality."""
    Y = bottom.target
    ycov = _cover_masks(Y)
    b = bottom.assignment
    return all(b[c] == b[d] or (ycov[b[c]] >> b[d]) & 1 for c, d in _fresh_covers(k))


@lru_cache(maxsize=1024)
def _cover_masks(Y: FinPoset) -> tuple[int, ...]:
    masks = [0] * len(Y)
    for c, d in Y.covers:
        masks[c] |= 1 << d
    return tuple(masks)


def select_squares(
    beta: MonotoneMap, gens: GeneratorSet, glued: set, policy: str = ALL_AT_ONCE, ripe_only: bool = True
) -> list[tuple[int, MonotoneMap, MonotoneMap]]:
    """The squares one stage of the small object argument glues along ``beta``."""
    outstanding = [
        (gi, top, bottom)
        for gi, top, bottom in failing_squares(beta, gens)
        if (gi, top.assignment, bottom.assignment) not in glued
    ]
    if ripe_only:
        ripe = [sq for sq in outstanding if is_ripe(gens.maps[sq[0]], sq[2])]
        if ripe:
            first = ripe[0][0]
            outstanding = [sq for sq in ripe if sq[0] == first]
    if policy == ONE_AT_A_TIME:
        outstanding = outstanding[:1]
    return outstanding


def carry_glued(glued: set, inclusion: MonotoneMap, new) -> set:
    """Move remembered squares along a stage map and add the ones just glued."""
    inc = inclusion.assignment
    out = {(gi, tuple(inc[v] for v in top), bottom) for gi, top, bottom in glued}
    out |= {(gi, tuple(inc[v] for v in top.assignment), bottom.assignment) for gi, top, bottom in new}
    return out


def small_object_factorize(
    f: MonotoneMap,
    gens: GeneratorSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
    ripe_only: bool = True,
) -> Factorization:
    """Factor ``f`` by repeatedly gluing generators along unliftable squares.

    Each stage collects the squares from every generator into the current
    ``beta`` that have no lift and attaches their codomains all at once
    (``policy="all"``) or only the first one (``policy="single"``).
    With ``ripe_only`` the stage is restricted to the ripe squares (see
    ``is_ripe``) of the first generator that has any, when there are any.
    Gluing a cell along anchors that are not yet tight, or gluing several
    generators over the same gap, creates new unliftable squares without end.
    Squares glued earlier are remembered and never glued again.  The run
    stops when ``beta`` passes ``in_inj`` or after ``stage_bound`` stages.
    """
    if stage_bound < 0:
        raise ValueError("stage_bound must be >= 0")
    if policy not in (ALL_AT_ONCE, ONE_AT_A_TIME):
        raise ValueError(f"unknown stage policy {policy!r}")
    cur = f.source
    alpha = MonotoneMap.identity(cur)
    beta = f
    glued: set = set()
    stages = []
    converged = False
    while True:
        chosen = select_squares(beta, gens, glued, policy, ripe_only)
        if not chosen:
            converged = in_inj(beta, gens)[0]
            break
        if len(stages) >= stage_bound:
            break
        cells = [Cell(gi, top) for gi, top, _ in chosen]
        stage, att = run_stage(cur, cells, gens, f"s{len(stages) + 1}c")
        beta = mediate(att, beta, [bottom for _, _, bottom in chosen])
        glued = carry_glued(glued, att.inclusion, chosen)
        alpha = compose(att.inclusion, alpha)
        stages.append(stage)
        cur = att.result
    cert = CellCertificate(gens, alpha, tuple(stages))
    return Factorization(f, alpha, beta, cert, converged, policy)


# -- cell membership by bounded search ---------------------------------------


def _realized(phi: MonotoneMap) -> int:
    a = phi.assignment
    seen = set()
    for i, m in enumerate(phi.source.up):
        for j in bits(m):
            seen.add((a[i], a[j]))
    return len(seen)


def in_cell_certified(
    f: MonotoneMap, gens: GeneratorSet, stage_bound: int = DEFAULT_STAGE_BOUND
) -> CellCertificate | None:
    """Search for an explicit decomposition of ``f`` into single-cell stages.

    The search keeps a comparison map ``phi`` from the current stage to
    ``f.target`` and only takes steps that enlarge its image or the set of
    target relations it realizes.  None means no certificate was found
    within ``stage_bound`` stages, not that ``f`` is outside ``cell(K)``.
    """
    Y = f.target
    full = (1 << len(Y)) - 1
    seen: set = set()

    def measure(phi):
        return (popcount(phi.image), _realized(phi), -len(phi.source))

    def dfs(cur, stages, phi):
        if phi.is_iso():
            comp = None if phi.is_identity() else phi
            return list(stages), comp
        if len(stages) >= stage_bound:
            return None
        key = (cur, phi.assignment, len(stages))
        if key in seen:
            return None
        seen.add(key)
        here = measure(phi)
        for gi, k in enumerate(gens.maps):
            for u in search_maps(k.source, cur):
                allowed = [full] * len(k.target)
                for a, b in enumerate(k.assignment):
                    allowed[b] &= 1 << phi.assignment[u.assignment[a]]
                for psi in search_maps(k.target, Y, allowed):
                    stage, att = run_stage(cur, [Cell(gi, u)], gens, f"s{len(stages) + 1}c")
                    new_phi = mediate(att, phi, [psi])
                    if measure(new_phi) <= here:
                        continue
                    found = dfs(att.result, stages + [stage], new_phi)
                    if found is not None:
                        return found
        return None

    found = dfs(f.source, [], f)
    if found is None:
        return None
    stages, comp = found
    cert = CellCertificate(gens, f, tuple(stages), comp)
    replay(cert)
    return cert


def trivial_certificate(f: MonotoneMap, gens: GeneratorSet) -> CellCertificate:
    """The empty certificate of an identity (or the comparison of an isomorphism)."""
    if f.is_identity():
        return CellCertificate(gens, f)
    if not f.is_iso():
        raise CertificateError("only isomorphisms have an empty certificate")
    return CellCertificate(gens, f, (), f)


def generator_certificate(gi: int, gens: GeneratorSet) -> CellCertificate:
    """A generator is one cell attached along the identity of its source."""
    k = gens.maps[gi]
    stage, att = run_stage(k.source, [Cell(gi, MonotoneMap.identity(k.source))], gens, "s1c")
    comp = mediate(att, k, [MonotoneMap.identity(k.target)])
    cert = CellCertificate(gens, k, (stage,), None if comp.is_identity() else comp)
    replay(cert)
    return cert


def attach_certificate(X: FinPoset, cells: Sequence[Cell], gens: GeneratorSet, tag="s1c"):
    """Glue ``cells`` onto ``X``; returns the inclusion and its one-stage certificate."""
    stage, att = run_stage(X, cells, gens, tag)
    return att.inclusion, CellCertificate(gens, att.inclusion, (stage,))


def compose_certificates(first: CellCertificate, second: CellCertificate) -> CellCertificate:
    """Certificate for ``second.map o first.map``.

    Requires ``first`` to end exactly on its target (no comparison), so
    the stages of ``second`` continue from there.
    """
    if first.comparison is not None:
        raise CertificateError("the first certificate must end on its target exactly")
    if first.map.target != second.map.source:
        raise SourceTargetMismatch("certificates are not composable")
    return CellCertificate(
        first.gens,
        compose(second.map, first.map),
        first.stages + second.stages,
        second.comparison,
    )


def rebase_certificate(cert: CellCertificate, along: MonotoneMap):
    """Push a certified cell map out along ``along``.

    Returns ``(g, certificate of g, corner)`` where ``g`` is the pushout of
    ``cert.map`` along ``along`` and ``corner`` is the other leg, so that
    ``g o along == corner o cert.map``.  The new certificate glues the same
    cells, with attaching maps moved along, and needs no comparison.
    """
    if along.source != cert.map.source:
        raise SourceTargetMismatch("rebasing map must start where the certified map starts")
    cur = along.target
    rho = along
    acc = MonotoneMap.identity(cur)
    stages = []
    for st in cert.stages:
        _, old = run_stage(st.base, st.cells, cert.gens, st.tag)
        cells = [Cell(c.generator, compose(rho, c.attaching)) for c in st.cells]
        stage, new = run_stage(cur, cells, cert.gens, st.tag)
        rho = mediate(old, compose(new.inclusion, rho), new.cell_maps)
        acc = compose(new.inclusion, acc)
        stages.append(stage)
        cur = new.result
    corner = rho if cert.comparison is None else compose(rho, cert.comparison.inverse())
    out = CellCertificate(cert.gens, acc, tuple(stages))
    return acc, out, corner


# -- retracts ---------------------------------------------------------------


def is_retract(f: MonotoneMap, g: MonotoneMap) -> bool:
    """Whether ``f`` is a retract of ``g`` in the arrow category (exhaustive)."""
    return retract_witness(f, g) is not None


def retract_witness(f: MonotoneMap, g: MonotoneMap):
    """Maps ``(i, r, j, s)`` with ``r i = id``, ``s j = id``, ``g i = j f``, ``f r = s g``."""
    A, B, C, D = f.source, f.target, g.source, g.target
    fullA, fullB, fullD = (1 << len(A)) - 1, (1 << len(B)) - 1, (1 << len(D)) - 1
    for i in search_maps(A, C):
        r_allowed = [fullA] * len(C)
        for a, c in enumerate(i.assignment):
            r_allowed[c] &= 1 << a
        for r in search_maps(C, A, r_allowed):
            j_allowed = [fullD] * len(B)
            for a in range(len(A)):
                j_allowed[f.assignment[a]] &= 1 << g.assignment[i.assignment[a]]
            for j in search_maps(B, D, j_allowed):
                s_allowed = [fullB] * len(D)
                for b, d in enumerate(j.assignment):
                    s_allowed[d] &= 1 << b
                for c in range(len(C)):
                    s_allowed[g.assignment[c]] &= 1 << f.assignment[r.assignment[c]]
                s = first_map(D, B, s_allowed)
                if s is not None:
                    return i, r, j, s
    return None
