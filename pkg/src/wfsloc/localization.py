"""Quotient categories of fibrant posets and invertibility detection.

Objects are fibrant posets, morphisms are homotopy classes, and a map is
invertible in the quotient exactly when precomposing with it is bijective
on classes against every object of a test family.  Detection is only as
strong as the family it is run against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import NotConverged, ObjectNotFibrant, ObjectNotInCategory
from .fincat import FinPoset, MonotoneMap, compose
from .homotopy import CongruenceTable, fibrant_replacement, homotopy_congruence, replacement_map
from .wfs import ALL_AT_ONCE, DEFAULT_STAGE_BOUND, GeneratorSet, fibrancy_witness


def _require_fibrant(objects, gens):
    for X in objects:
        sq = fibrancy_witness(X, gens)
        if sq is not None:
            raise ObjectNotFibrant(f"{X!r} is not fibrant", sq)


@dataclass(frozen=True, eq=False)
class QuotientCategory:
    """``homs[i, j]`` is the table of maps ``objects[i] -> objects[j]``.

    ``composition[i, j, k][c2][c1]`` is the class of ``c2 o c1`` for
    ``c1`` in ``homs[i, j]`` and ``c2`` in ``homs[j, k]``.
    """

    objects: tuple[FinPoset, ...]
    gens: GeneratorSet
    homs: dict = field(repr=False)
    composition: dict = field(repr=False)

    def object_index(self, X: FinPoset) -> int:
        for i, Y in enumerate(self.objects):
            if X == Y:
                return i
        raise ObjectNotInCategory(f"{X!r} is not an object of the quotient category")

    def hom(self, A: FinPoset, B: FinPoset) -> CongruenceTable:
        return self.homs[self.object_index(A), self.object_index(B)]

    def class_of(self, f: MonotoneMap) -> tuple[int, int, int]:
        i, j = self.object_index(f.source), self.object_index(f.target)
        return i, j, self.homs[i, j].class_index(f)

    def identity_class(self, i: int) -> int:
        X = self.objects[i]
        return self.homs[i, i].class_index(MonotoneMap.identity(X))

    def compose_classes(self, i: int, j: int, k: int, c2: int, c1: int) -> int:
        return self.composition[i, j, k][c2][c1]

    @cached_property
    def class_counts(self) -> dict[tuple[int, int], int]:
        return {key: len(t.classes) for key, t in self.homs.items()}

    def verify_laws(self) -> bool:
        """Identities are units and composition is associative on classes."""
        n = len(self.objects)
        for i in range(n):
            for j in range(n):
                ij = self.class_counts[i, j]
                ei, ej = self.identity_class(i), self.identity_class(j)
                for c in range(ij):
                    if self.composition[i, j, j][ej][c] != c or self.composition[i, i, j][c][ei] != c:
                        return False
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        for a in range(self.class_counts[i, j]):
                            for b in range(self.class_counts[j, k]):
                                ba = self.composition[i, j, k][b][a]
                                for c in range(self.class_counts[k, l]):
                                    left = self.composition[i, k, l][c][ba]
                                    right = self.composition[i, j, l][self.composition[j, k, l][c][b]][a]
                                    if left != right:
                                        return False
        return True


def _composition_table(t1: CongruenceTable, t2: CongruenceTable, t3: CongruenceTable, exhaustive: bool):
    """Classes of ``t2`` composed after classes of ``t1``, landing in ``t3``."""
    table = []
    for m2 in t2.classes:
        row = []
        for m1 in t1.classes:
            value = t3.class_index(compose(t2.maps[m2[0]], t1.maps[m1[0]]))
            if exhaustive:
                for b in m2:
                    for a in m1:
                        if t3.class_index(compose(t2.maps[b], t1.maps[a])) != value:
                            raise AssertionError("class composition depends on representatives")
            row.append(value)
        table.append(tuple(row))
    return tuple(table)


def build_quotient(
    objects,
    gens: GeneratorSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
    exhaustive: bool = True,
) -> QuotientCategory:
    """Hom tables for every ordered pair and class composition tables.

    With ``exhaustive`` every pair of class members is composed to confirm
    that the tables do not depend on the chosen representatives.
    """
    objects = tuple(objects)
    _require_fibrant(objects, gens)
    n = len(objects)
    homs = {(i, j): homotopy_congruence(objects[i], objects[j], gens, stage_bound, policy) for i in range(n) for j in range(n)}
    comp = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                comp[i, j, k] = _composition_table(homs[i, j], homs[j, k], homs[i, k], exhaustive)
    return QuotientCategory(objects, gens, homs, comp)


def is_iso_in_quotient(f: MonotoneMap, qc: QuotientCategory) -> bool:
    """Whether the class of ``f`` has a two-sided inverse class."""
    i, j, c = qc.class_of(f)
    ei, ej = qc.identity_class(i), qc.identity_class(j)
    for d in range(qc.class_counts[j, i]):
        if qc.composition[i, j, i][d][c] == ei and qc.composition[j, i, j][c][d] == ej:
            return True
    return False


def inverse_class(f: MonotoneMap, qc: QuotientCategory) -> MonotoneMap | None:
    i, j, c = qc.class_of(f)
    ei, ej = qc.identity_class(i), qc.identity_class(j)
    for d in range(qc.class_counts[j, i]):
        if qc.composition[i, j, i][d][c] == ei and qc.composition[j, i, j][c][d] == ej:
            return qc.homs[j, i].representative(d)
    return None


@dataclass(frozen=True)
class ObjectVerdict:
    """Precomposition ``[B, X] -> [A, X]`` on classes for one test object ``X``.

    ``collision`` holds two maps ``B -> X`` in different classes whose
    composites agree; ``missed`` a map ``A -> X`` whose class is not hit.
    """

    test_object: FinPoset
    injective: bool
    surjective: bool
    collision: tuple[MonotoneMap, MonotoneMap] | None = None
    missed: MonotoneMap | None = None

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective


@dataclass(frozen=True)
class DetectionReport:
    map: MonotoneMap
    family: tuple[FinPoset, ...]
    verdicts: tuple[ObjectVerdict, ...]

    @property
    def bijective(self) -> bool:
        return all(v.bijective for v in self.verdicts)

    def summary(self) -> str:
        lines = [f"scope: {len(self.family)} test object(s), not all fibrant objects"]
        for v in self.verdicts:
            if v.bijective:
                state = "bijective"
            else:
                state = ", ".join(s for s, bad in (("not injective", not v.injective), ("not surjective", not v.surjective)) if bad)
            lines.append(f"{v.test_object!r}: {state}")
        lines.append(f"overall: {'bijective' if self.bijective else 'not bijective'}")
        return "\n".join(lines)


def whitehead_detect(
    f: MonotoneMap,
    family,
    gens: GeneratorSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
    policy: str = ALL_AT_ONCE,
) -> DetectionReport:
    """Test precomposition by ``f`` on homotopy classes against each object of ``family``."""
    family = tuple(family)
    _require_fibrant(family, gens)
    A, B = f.source, f.target
    verdicts = []
    for X in family:
        tb = homotopy_congruence(B, X, gens, stage_bound, policy)
        ta = homotopy_congruence(A, X, gens, stage_bound, policy)
        image = {}
        collision = None
        for members in tb.classes:
            h = tb.maps[members[0]]
            c = ta.class_index(compose(h, f))
            if c in image and collision is None:
                collision = (image[c], h)
            image.setdefault(c, h)
        missed = None
        for c, members in enumerate(ta.classes):
            if c not in image:
                missed = ta.maps[members[0]]
                break
        verdicts.append(ObjectVerdict(X, collision is None, missed is None, collision, missed))
    return DetectionReport(f, family, tuple(verdicts))


def in_WL(
    f: MonotoneMap, family, gens: GeneratorSet, stage_bound: int = DEFAULT_STAGE_BOUND
) -> DetectionReport:
    """Detection for the map induced between fibrant replacements of both ends."""
    for X in (f.source, f.target):
        if not fibrant_replacement(X, gens, stage_bound).converged:
            raise NotConverged(f"fibrant replacement of {X!r} did not converge")
    return whitehead_detect(replacement_map(f, gens, stage_bound), family, gens, stage_bound)


def quotient_to_dot(qc: QuotientCategory, name: str = "quotient") -> str:
    """Objects as nodes; one edge per hom-class labelled with the class size."""
    lines = [f"digraph {name} {{"]
    for i, X in enumerate(qc.objects):
        label = X.name or " ".join(X.elements)
        lines.append(f'  o{i} [label="{label}"];')
    for (i, j), t in sorted(qc.homs.items()):
        for c, members in enumerate(t.classes):
            lines.append(f'  o{i} -> o{j} [label="{len(members)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
