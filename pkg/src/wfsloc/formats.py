"""Plain-text formats for posets, maps, flows and engine reports.

Posets list their covering pairs; the order is the reflexive-transitive
closure.  Labels are whitespace-free tokens without ``<`` or ``,``.
Every writer is deterministic so reports can be diffed as golden files.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .fincat import FinPoset, MonotoneMap
from .flows import FlowMorphism, FlowPresentation
from .wfs import CellCertificate, Factorization

MAPSTO = "|->"


def check_label(label: str) -> str:
    if not label or any(c.isspace() for c in label) or "<" in label or "," in label or label == MAPSTO:
        raise ValueError(f"label {label!r} cannot be written in the text format")
    return label


def write_poset(P: FinPoset, name: str | None = None) -> str:
    name = name or P.name or "P"
    labels = [check_label(e) for e in P.elements]
    rel = " ".join(f"{labels[i]}<{labels[j]}" for i, j in P.covers)
    return f"poset {name}\nelements: {' '.join(labels)}\nrelations: {rel}".rstrip() + "\n"


def write_map(f: MonotoneMap, name: str, source: str, target: str) -> str:
    lines = [f"map {name} : {source} -> {target}"]
    for i, j in enumerate(f.assignment):
        lines.append(f"{f.source.elements[i]} {MAPSTO} {f.target.elements[j]}")
    return "\n".join(lines) + "\n"


def write_flow(F: FlowPresentation, name: str | None = None) -> str:
    name = name or F.name or "F"
    lines = [f"flow {name}", "states: " + " ".join(check_label(s) for s in F.states)]
    for a in F.generators:
        if ": " in a.name or ";" in a.name or " " in a.name:
            raise ValueError(f"arrow name {a.name!r} cannot be written in the text format")
        lines.append(f"arrows: {a.name}: {a.src} -> {a.tgt}")
    for l, r in F.relations:
        lines.append(f"relations: {';'.join(l)} = {';'.join(r)}")
    return "\n".join(lines) + "\n"


def write_flow_map(m: FlowMorphism, name: str, source: str, target: str) -> str:
    lines = [f"flowmap {name} : {source} -> {target}"]
    for s in m.source.states:
        lines.append(f"state {s} {MAPSTO} {m.state_map[s]}")
    for a in m.source.generators:
        lines.append(f"arrow {a.name} {MAPSTO} {';'.join(m.path_map[a.name])}")
    return "\n".join(lines) + "\n"


def _labels(f: MonotoneMap) -> str:
    return ", ".join(f"{f.source.elements[i]} {MAPSTO} {f.target.elements[j]}" for i, j in enumerate(f.assignment))


def write_certificate(cert: CellCertificate) -> str:
    lines = [
        f"certificate generators={len(cert.gens)} stages={len(cert.stages)} cells={cert.cell_count}",
        f"source: {' '.join(cert.map.source.elements)}",
        f"target: {' '.join(cert.map.target.elements)}",
    ]
    for n, st in enumerate(cert.stages, 1):
        lines.append(f"stage {n} tag={st.tag} base={len(st.base)} result={len(st.result)}")
        for c in st.cells:
            lines.append(f"  cell generator={c.generator} along {_labels(c.attaching)}")
        lines.append(f"  inclusion {_labels(st.inclusion)}")
    lines.append("comparison: " + ("none" if cert.comparison is None else _labels(cert.comparison)))
    return "\n".join(lines) + "\n"


def write_factorization(fa: Factorization) -> str:
    head = [
        f"factorization policy={fa.policy} converged={'true' if fa.converged else 'false'} stages={fa.stages_used}",
        f"middle: {' '.join(fa.middle.elements)}",
        f"alpha: {_labels(fa.alpha)}",
        f"beta: {_labels(fa.beta)}",
    ]
    return "\n".join(head) + "\n" + write_certificate(fa.certificate)


# -- parsing ------------------------------------------------------------------


def split_mapsto(line: str, lineno: int) -> tuple[str, str]:
    parts = line.split(MAPSTO)
    if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
        raise ParseError(f"expected 'x {MAPSTO} y'", lineno, 1)
    return parts[0].strip(), parts[1].strip()


def parse_relations(text: str, lineno: int, column: int) -> list[tuple[str, str]]:
    pairs = []
    for m in re.finditer(r"\S+", text):
        tok = m.group()
        bits = tok.split("<")
        if len(bits) < 2 or not all(bits):
            raise ParseError(f"bad relation {tok!r}", lineno, column + m.start())
        pairs.extend(zip(bits, bits[1:]))
    return pairs


def parse_word(text: str, lineno: int, column: int) -> tuple[str, ...]:
    word = tuple(t.strip() for t in text.split(";"))
    if not word or not all(word):
        raise ParseError(f"bad word {text!r}", lineno, column)
    return word


def parse_arrow(text: str, lineno: int, column: int) -> tuple[str, str, str]:
    name, sep, rest = text.partition(": ")
    ends = rest.split("->")
    if not sep or len(ends) != 2 or not name.strip() or not all(e.strip() for e in ends):
        raise ParseError(f"expected 'name: a -> b', got {text!r}", lineno, column)
    return name.strip(), ends[0].strip(), ends[1].strip()
