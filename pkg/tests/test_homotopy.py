import itertools

import pytest

from oracles import all_maps, homotopic_pairs, in_inj as brute_in_inj
from wfsloc.errors import LiftNotFound, PathObjectNotConverged
from wfsloc.fincat import (
    FinPoset,
    MonotoneMap,
    POINT,
    all_posets_up_to,
    antichain,
    chain,
    compose,
    diagonal,
    enumerate_maps,
)
from wfsloc.homotopy import (
    congruence_respects_composition,
    fibrant_replacement,
    half_inverse,
    homotopy_congruence,
    induced_replacement,
    path_object,
    reflexive_witness,
    replacement_map,
    right_homotopic,
    swap_witness,
)
from wfsloc.thomotopy import SUBDIVISION, generate_T
from wfsloc.wfs import EMPTY_GENERATORS, GeneratorSet, generator_certificate, is_fibrant, verify_certificate

T3 = generate_T(3).generators()
T4 = generate_T(4).generators()
V = FinPoset.from_relations("abc", [("a", "c"), ("b", "c")])
TARGETS = [POINT, chain(2), chain(3), antichain(2), V]


def test_path_object_of_point():
    po = path_object(POINT, T3)
    assert len(po.total) == 1 and po.into.is_identity() and len(po.outof.target) == 1


def test_path_object_without_generators():
    Y = chain(3)
    po = path_object(Y, EMPTY_GENERATORS)
    assert po.total == Y and po.outof == diagonal(Y)


@pytest.mark.parametrize("Y", TARGETS)
def test_path_object_laws(Y):
    po = path_object(Y, T3)
    assert compose(po.outof, po.into) == diagonal(Y)
    assert verify_certificate(po.certificate)
    assert brute_in_inj(po.outof, T3.maps)
    if is_fibrant(Y, T3):
        assert is_fibrant(po.total, T3)


def test_path_object_of_segment_subdivides_diagonal():
    Y = chain(2)
    assert not brute_in_inj(diagonal(Y), T3.maps)
    po = path_object(Y, T3)
    assert po.certificate.cell_count > 0
    for st in po.certificate.stages:
        for c in st.cells:
            assert c.attaching.source == T3.maps[c.generator].source


def test_unconverged_path_object_refuses_use():
    strict = T3.with_strict(True)
    with pytest.raises(PathObjectNotConverged) as err:
        path_object(chain(2), strict, stage_bound=2)
    partial = err.value.partial
    assert not partial.converged and verify_certificate(partial.certificate)
    f = MonotoneMap.identity(chain(2))
    with pytest.raises(PathObjectNotConverged):
        right_homotopic(f, f, partial)
    assert path_object(chain(2), strict, stage_bound=2, allow_partial=True) is partial


@pytest.mark.parametrize("Y", TARGETS)
def test_reflexive_and_symmetric(Y):
    po = path_object(Y, T3)
    for X in all_posets_up_to(3):
        maps = list(enumerate_maps(X, Y))
        for f in maps:
            w = reflexive_witness(f, po)
            assert w.is_valid() and w.H == compose(po.into, f)
            assert right_homotopic(f, f, po) is not None
        for f, g in itertools.product(maps, repeat=2):
            w = right_homotopic(f, g, po)
            back = right_homotopic(g, f, po)
            assert (w is None) == (back is None)
            if w is not None:
                s = swap_witness(w)
                assert s.is_valid() and (s.f, s.g) == (g, f)
                ss = swap_witness(s)
                assert ss.is_valid() and (ss.f, ss.g) == (f, g)


@pytest.mark.parametrize("Y", TARGETS)
def test_raw_relation_matches_brute_force(Y):
    po = path_object(Y, T3)
    for X in all_posets_up_to(3 if len(po.total) <= 16 else 2):
        table = homotopy_congruence(X, Y, T3)
        expected = homotopic_pairs(X, po)
        got = {
            (f.assignment, g.assignment)
            for i, f in enumerate(table.maps)
            for j, g in enumerate(table.maps)
            if table.right_homotopic_pair(i, j)
        }
        assert got == expected


def _closure_classes(maps, pairs):
    parent = {m: m for m in maps}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    return len({find(m) for m in maps})


def test_point_into_subdivided_segment():
    gens = GeneratorSet((SUBDIVISION,))
    Y = chain(3, ["0", "A", "1"])
    table = homotopy_congruence(POINT, Y, gens)
    po = table.path_object
    maps = [tuple(m) for m in all_maps(POINT, Y)]
    assert len(table.classes) == _closure_classes(maps, homotopic_pairs(POINT, po))


@pytest.mark.parametrize("Y", TARGETS)
def test_congruence_is_a_partition_containing_raw(Y):
    for X in all_posets_up_to(3):
        table = homotopy_congruence(X, Y, T3)
        assert len(table.classes) <= len(table.maps)
        assert sorted(i for c in table.classes for i in c) == list(range(len(table.maps)))
        for i in range(len(table.maps)):
            for j in range(len(table.maps)):
                if table.right_homotopic_pair(i, j):
                    assert table.class_of[i] == table.class_of[j]
            for j in table.classes[table.class_of[i]]:
                chain_ = table.witness_chain(i, j)
                assert all(w.is_valid() for w in chain_)
                if chain_:
                    assert chain_[0].f == table.maps[i] and chain_[-1].g == table.maps[j]
        table.is_raw_transitive()  # recorded, not asserted


def test_empty_generators_give_discrete_classes():
    for X in all_posets_up_to(3):
        for Y in TARGETS:
            table = homotopy_congruence(X, Y, EMPTY_GENERATORS)
            assert len(table.classes) == len(table.maps)
            assert congruence_respects_composition(table, MonotoneMap.identity(Y), MonotoneMap.identity(X))


def test_continuity_family_has_collapsing_classes():
    table = homotopy_congruence(POINT, chain(2), T3)
    assert len(table.maps) == 2 and len(table.classes) == 1


def test_composition_descends():
    for X in all_posets_up_to(2):
        for Y in TARGETS[:4]:
            table = homotopy_congruence(X, Y, T3)
            assert congruence_respects_composition(table, MonotoneMap.identity(Y), MonotoneMap.identity(X))
            for Z in TARGETS[:4]:
                for u in enumerate_maps(Y, Z):
                    assert congruence_respects_composition(table, u=u)
            for W in all_posets_up_to(2):
                for v in enumerate_maps(W, X):
                    assert congruence_respects_composition(table, v=v)


def test_fibrant_replacement_examples():
    r = fibrant_replacement(chain(3), T3)
    assert r.converged and r.stages_used == 0 and r.middle == chain(3)
    r = fibrant_replacement(chain(2), T3.with_strict(True), stage_bound=3)
    assert not r.converged and r.stages_used == 3
    sizes = [len(s.result) for s in r.certificate.stages]
    assert sizes == sorted(set(sizes))
    r = fibrant_replacement(V, EMPTY_GENERATORS)
    assert r.converged and r.middle == V


def test_fibrant_replacement_under_larger_catalogue_collapses():
    for X in all_posets_up_to(3):
        r = fibrant_replacement(X, T4)
        assert r.converged and is_fibrant(r.middle, T4)
        assert r.middle.covers == ()
        assert len(r.middle) <= len(X)


def test_half_inverse_of_identity():
    f = MonotoneMap.identity(chain(3))
    g, w = half_inverse(f, T3)
    assert g.is_identity() and w.is_valid()


def test_half_inverse_of_a_generator():
    g, w = half_inverse(SUBDIVISION, T3)
    assert compose(g, SUBDIVISION).is_identity()
    assert w.is_valid() and w.f == compose(SUBDIVISION, g) and w.g.is_identity()


def test_half_inverse_needs_a_retraction():
    diamond_into_chain = [k for k in T4.maps if len(k.source) == 4][0]
    assert not is_fibrant(diamond_into_chain.source, T4)
    with pytest.raises(LiftNotFound) as err:
        half_inverse(diamond_into_chain, T4)
    assert err.value.square.i == diamond_into_chain


def test_induced_replacement_of_generators():
    for gi in range(len(T4)):
        ind = induced_replacement(generator_certificate(gi, T4))
        for f, cert in zip(ind.maps, ind.certificates):
            assert cert.map == f
        assert ind.converged
        assert all(verify_certificate(c) for c in ind.certificates)
        for n, (xs, ys) in enumerate(zip(ind.x_steps, ind.y_steps)):
            assert compose(ind.maps[n + 1], xs) == compose(ys, ind.maps[n])


def test_replacement_map_sits_under_the_map():
    for f in enumerate_maps(chain(2), chain(3)):
        rx, ry = fibrant_replacement(f.source, T4), fibrant_replacement(f.target, T4)
        k = replacement_map(f, T4)
        assert compose(k, rx.alpha) == compose(ry.alpha, f)
