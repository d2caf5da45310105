"""Generating T-homotopy equivalences and homotopy continuity of posets.

A catalogue entry is a one-to-one, strictly increasing map between finite
bounded posets that sends bottom to bottom and top to top.  The posets
are canonical representatives, and entries related by automorphisms of
source and target are listed once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .fincat import (
    BoundednessCertificate,
    FinPoset,
    MonotoneMap,
    automorphisms,
    boundedness,
    bounded_posets,
    chain,
    compose,
    fixed_allowed,
    search_maps,
    to_terminal,
)
from .wfs import GeneratorSet, LiftingProblem, find_lift, in_inj

SEGMENT = chain(2, name="I")
SUBDIVIDED = chain(3, name="I2")
SUBDIVISION = MonotoneMap(SEGMENT, SUBDIVIDED, (0, 2))


@dataclass(frozen=True)
class TCatalogue:
    max_size: int
    entries: tuple[MonotoneMap, ...]
    bounds: tuple[tuple[BoundednessCertificate, BoundednessCertificate], ...]
    include_identities: bool = False

    def __len__(self):
        return len(self.entries)

    def generators(self, strict: bool = False) -> GeneratorSet:
        return GeneratorSet(self.entries, strict, f"T{self.max_size}")

    def counts_by_size(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for k in self.entries:
            key = (len(k.source), len(k.target))
            out[key] = out.get(key, 0) + 1
        return out

    def index_of(self, k: MonotoneMap) -> int | None:
        for i, e in enumerate(self.entries):
            if e == k:
                return i
        return None


def is_T_map(f: MonotoneMap) -> bool:
    """The four catalogue conditions, checked directly."""
    b1, b2 = boundedness(f.source), boundedness(f.target)
    if b1 is None or b2 is None:
        return False
    return (
        f.is_injective()
        and f.is_strict()
        and f(b1.bottom) == b2.bottom
        and f(b1.top) == b2.top
    )


def _orbit_key(f: MonotoneMap, aut1, aut2) -> tuple[int, ...]:
    best = None
    for alpha in aut1:
        inv = alpha.inverse()
        for beta in aut2:
            a = compose(beta, compose(f, inv)).assignment
            if best is None or a < best:
                best = a
    return best


@lru_cache(maxsize=None)
def generate_T(max_size: int, include_identities: bool = False) -> TCatalogue:
    """All generating T-homotopy equivalences between bounded posets of at most ``max_size`` elements."""
    if max_size < 2:
        raise ValueError("max_size must be >= 2")
    shapes = [P for n in range(2, max_size + 1) for P in bounded_posets(n)]
    entries, bounds = [], []
    for P1 in shapes:
        b1 = boundedness(P1)
        aut1 = automorphisms(P1)
        for P2 in shapes:
            if len(P2) < len(P1):
                continue
            b2 = boundedness(P2)
            aut2 = automorphisms(P2)
            allowed = fixed_allowed(P1, P2, {b1.bottom: b2.bottom, b1.top: b2.top})
            for f in search_maps(P1, P2, allowed, strict=True, injective=True):
                if f.is_iso() and not include_identities:
                    continue
                if _orbit_key(f, aut1, aut2) != f.assignment:
                    continue
                entries.append(f)
                bounds.append((b1, b2))
    return TCatalogue(max_size, tuple(entries), tuple(bounds), include_identities)


def is_homotopy_continuous(X: FinPoset, cat: TCatalogue, strict: bool = False):
    """``(verdict, failing square)``: every map from an entry's source extends along it."""
    return in_inj(to_terminal(X), cat.generators(strict))


def subdivide_segment(
    X: FinPoset, seg: MonotoneMap, cat: TCatalogue | None = None, strict: bool = False
) -> MonotoneMap | None:
    """Extend a segment ``{0<1} -> X`` along the subdivision ``{0<1} -> {0<A<1}``."""
    if cat is not None and cat.index_of(SUBDIVISION) is None:
        raise ValueError("catalogue lacks the subdivision entry")
    if seg.source != SEGMENT:
        seg = MonotoneMap._trusted(SEGMENT, seg.target, seg.assignment)
    sq = LiftingProblem(SUBDIVISION, to_terminal(X), seg, to_terminal(SUBDIVIDED))
    return find_lift(sq, strict=strict)


def segments(X: FinPoset, strict: bool = False) -> list[MonotoneMap]:
    return list(search_maps(SEGMENT, X, strict=strict))
