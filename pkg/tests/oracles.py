"""Brute-force reference computations used as independent oracles.

Everything here works on raw relation matrices and itertools products;
none of it calls the package's search, attachment or canonical-form code.
"""

from itertools import permutations, product


def leq_matrix(P):
    n = len(P)
    return [[P.leq(i, j) for j in range(n)] for i in range(n)]


def is_monotone(assign, LP, LQ):
    n = len(assign)
    return all(LQ[assign[i]][assign[j]] for i in range(n) for j in range(n) if LP[i][j])


def all_maps(P, Q, strict=False):
    """Every monotone assignment vector, in lexicographic order."""
    LP, LQ = leq_matrix(P), leq_matrix(Q)
    out = []
    for a in product(range(len(Q)), repeat=len(P)):
        if not is_monotone(a, LP, LQ):
            continue
        if strict and any(LP[i][j] and i != j and a[i] == a[j] for i in range(len(P)) for j in range(len(P))):
            continue
        out.append(a)
    return out


def lifts(i, p, top, bottom, strict=False):
    """All lifts ``g`` of a square, by filtering every map ``B -> X``."""
    out = []
    for g in all_maps(i.target, p.source, strict):
        if all(g[i.assignment[a]] == top.assignment[a] for a in range(len(i.source))) and all(
            p.assignment[g[b]] == bottom.assignment[b] for b in range(len(i.target))
        ):
            out.append(g)
    return out


def has_lift(i, p, top, bottom, strict=False):
    """Brute force over maps ``B -> X`` that agree with ``top`` on the image of ``i``."""
    LB, LX = leq_matrix(i.target), leq_matrix(p.source)
    fixed = {i.assignment[a]: top.assignment[a] for a in range(len(i.source))}
    free = [b for b in range(len(i.target)) if b not in fixed]
    choices = [[x for x in range(len(p.source)) if p.assignment[x] == bottom.assignment[b]] for b in free]
    nB = len(i.target)
    for vals in product(*choices):
        g = [0] * nB
        for b, x in fixed.items():
            g[b] = x
        for b, x in zip(free, vals):
            g[b] = x
        if not is_monotone(g, LB, LX):
            continue
        if strict and any(LB[a][b] and a != b and g[a] == g[b] for a in range(nB) for b in range(nB)):
            continue
        return True
    return False


def squares(k, p, strict_top=False):
    """All commuting squares from ``k`` to ``p`` as (top, bottom) vectors."""
    out = []
    for top in all_maps(k.source, p.source, strict_top):
        for bottom in all_maps(k.target, p.target):
            if all(p.assignment[top[a]] == bottom[k.assignment[a]] for a in range(len(k.source))):
                out.append((top, bottom))
    return out


def in_inj(p, gens, strict=False):
    """Right lifting property against every generator, by brute force."""
    from wfsloc.fincat import MonotoneMap

    for k in gens:
        for top, bottom in squares(k, p, strict):
            t = MonotoneMap(k.source, p.source, top)
            b = MonotoneMap(k.target, p.target, bottom)
            if not has_lift(k, p, t, b, strict):
                return False
    return True


def compose_vec(f, g):
    """``f o g`` on assignment vectors."""
    return tuple(f[x] for x in g)


def partial_orders(n):
    """All partial orders on ``range(n)`` as frozensets of strict pairs."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = []
    for bits in product((0, 1), repeat=len(pairs)):
        rel = {p for p, b in zip(pairs, bits) if b}
        if any((j, i) in rel for i, j in rel):
            continue
        if any((i, l) not in rel for i, j in rel for k, l in rel if j == k and i != l):
            continue
        out.append(frozenset(rel))
    return out


def iso_key(n, rel):
    return min(tuple(sorted((s[i], s[j]) for i, j in rel)) for s in permutations(range(n)))


def poset_classes(n):
    """Isomorphism classes of ``n``-element posets, one relation set each."""
    seen = {}
    for rel in partial_orders(n):
        seen.setdefault(iso_key(n, rel), rel)
    return list(seen.values())


def bounded_classes(n):
    out = []
    for rel in poset_classes(n):
        bottoms = [b for b in range(n) if all((b, x) in rel for x in range(n) if x != b)]
        tops = [t for t in range(n) if all((x, t) in rel for x in range(n) if x != t)]
        if n >= 2 and bottoms and tops:
            out.append((rel, bottoms[0], tops[0]))
    return out


def t_catalogue_counts(max_size, include_identities=False):
    """Entries per (source size, target size) up to automorphisms of both ends."""
    shapes = [(n, rel, b, t) for n in range(2, max_size + 1) for rel, b, t in bounded_classes(n)]
    counts = {}
    for n1, r1, b1, t1 in shapes:
        for n2, r2, b2, t2 in shapes:
            if n2 < n1:
                continue
            aut1 = [s for s in permutations(range(n1)) if {(s[i], s[j]) for i, j in r1} == r1]
            aut2 = [s for s in permutations(range(n2)) if {(s[i], s[j]) for i, j in r2} == r2]
            orbits = set()
            for f in permutations(range(n2), n1):
                if f[b1] != b2 or f[t1] != t2:
                    continue
                if not all((f[i], f[j]) in r2 for i, j in r1):
                    continue
                if n1 == n2 and not include_identities and {(f[i], f[j]) for i, j in r1} == r2:
                    continue
                orbit = min(tuple(b[f[a[x]]] for x in range(n1)) for a in aut1 for b in aut2)
                orbits.add(orbit)
            if orbits:
                counts[n1, n2] = counts.get((n1, n2), 0) + len(orbits)
    return counts


def homotopic_pairs(X, po):
    """All ``(f, g)`` vectors reached as ``outof o H`` for some ``H: X -> total``."""
    n = len(po.base)
    out = set()
    for H in all_maps(X, po.total):
        pair = [po.outof.assignment[h] for h in H]
        out.add((tuple(c // n for c in pair), tuple(c % n for c in pair)))
    return out


def words(arrows, a, b, max_len):
    """Generator words of length at most ``max_len`` from ``a`` to ``b``."""
    out = []

    def walk(x, acc):
        if len(acc) >= max_len:
            return
        for name, s, t in arrows:
            if s == x:
                w = acc + (name,)
                if t == b:
                    out.append(w)
                walk(t, w)

    walk(a, ())
    return out
