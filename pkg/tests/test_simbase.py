import itertools

import numpy as np
import pytest
import sympy
from oracles import oracle_boundary, oracle_homology, rank_q

from ncpb.simbase import (
    GroupPresentation,
    SimplicialBase,
    WeightFunction,
    abelianization,
    boundary_matrix,
    circle,
    commutator,
    connected_components,
    cycle_basis,
    cycle_space_basis,
    disjoint_union,
    homology,
    is_simplicial,
    loop_edges,
    point,
    simplex,
    spanning_forest,
    star_cover,
    support_subcomplex,
    torus,
)


def test_face_closure_and_counts():
    K = SimplicialBase(3, [[0, 1, 2]])
    assert len(K.edges) == 3 and len(K.triangles) == 1
    T = torus(3, 3)
    assert (len(T.vertices), len(T.edges), len(T.triangles)) == (9, 27, 18)
    assert T.euler_characteristic() == 0
    assert circle(6).euler_characteristic() == 0
    assert simplex(3).euler_characteristic() == 1


def test_star_cover_single_triangle():
    cov = star_cover(simplex(2))
    assert len(cov.stars) == 3
    assert len(cov.pairs) == 3 and len(cov.triples) == 1


def test_star_cover_circle_has_no_triple_overlaps():
    cov = star_cover(circle(6))
    assert sorted(cov.pairs) == sorted((min(i, (i + 1) % 6), max(i, (i + 1) % 6)) for i in range(6))
    assert cov.triples == ()


def test_star_cover_torus_matches_incidence():
    K = torus(3, 3)
    cov = star_cover(K)
    # brute-force: stars of v and w meet exactly when some simplex contains both
    simplices = K.all_simplices()
    brute_pairs = sorted(p for p in itertools.combinations(K.vertices, 2) if any(set(p) <= set(s) for s in simplices))
    brute_triples = sorted(t for t in itertools.combinations(K.vertices, 3) if any(set(t) <= set(s) for s in simplices))
    assert sorted(cov.pairs) == brute_pairs == sorted(K.edges)
    assert sorted(cov.triples) == brute_triples == sorted(K.triangles)


def test_support_subcomplex_cases():
    K = torus(3, 3)
    assert support_subcomplex(K, WeightFunction.constant(K, 1)).all_simplices() == K.all_simplices()
    assert support_subcomplex(K, WeightFunction.constant(K, 0)).is_empty()
    one = support_subcomplex(K, WeightFunction.indicator(K, [4]))
    assert one.vertices == (4,) and one.edges == ()


def test_weight_function_product_and_json():
    K = circle(6)
    f = WeightFunction({0: 1, 1: "1/2", 2: 0})
    g = WeightFunction.indicator(K, [1, 2, 3])
    assert (f * g).support() == {1}
    assert WeightFunction.from_json(f.to_json(K), K).values == WeightFunction({v: f(v) for v in K.vertices}).values


def test_boundary_matrices_match_oracle_and_square_to_zero():
    K = torus(3, 3)
    for p in (1, 2):
        assert boundary_matrix(K, p) == oracle_boundary(K.simplices(p), K.simplices(p - 1))
    d1, d2 = np.array(boundary_matrix(K, 1)), np.array(boundary_matrix(K, 2))
    assert not (d1 @ d2).any()


@pytest.mark.parametrize(
    "K, expected",
    [
        (circle(6), [(1, ()), (1, ())]),
        (torus(3, 3), [(1, ()), (2, ()), (1, ())]),
        (disjoint_union(simplex(2), simplex(2)), [(2, ()), (0, ()), (0, ())]),
        (point(), [(1, ())]),
    ],
)
def test_homology_examples(K, expected):
    for deg, (betti, torsion) in enumerate(expected):
        H = homology(K, deg)
        assert (H.betti, H.torsion) == (betti, torsion)
        ob, has_torsion = oracle_homology(K, deg)
        assert ob == betti and not has_torsion


def test_homology_with_torsion_projective_plane():
    # six-vertex real projective plane: H_1 = Z/2, H_2 = 0
    tris = [
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
        (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
    ]
    K = SimplicialBase(6, tris)
    assert homology(K, 1).betti == 0 and homology(K, 1).torsion == (2,)
    assert homology(K, 2).betti == 0
    assert oracle_homology(K, 1)[1]
    assert K.euler_characteristic() == 1


def test_cycle_space_basis_top_torus():
    K = torus(3, 3)
    (z,) = cycle_space_basis(K, 2)
    assert set(abs(x) for x in z) == {1}
    assert not (np.array(boundary_matrix(K, 2)) @ np.array(z)).any()


def _loop_chain(K, loop):
    vec = [0] * len(K.edges)
    for a, b in loop_edges(loop):
        i = K.index((min(a, b), max(a, b)))
        vec[i] += 1 if a < b else -1
    return vec


def test_cycle_basis_examples():
    tree = SimplicialBase(4, [[0, 1], [1, 2], [1, 3]])
    assert cycle_basis(tree) == []
    assert len(cycle_basis(circle(6))) == 1
    K = torus(3, 3)
    loops = cycle_basis(K)
    assert len(loops) == len(K.edges) - len(K.vertices) + 1
    assert all(loop[0] == loop[-1] == 0 for loop in loops)
    d2 = boundary_matrix(K, 2)
    image_cols = [list(c) for c in zip(*d2)]
    chains = [_loop_chain(K, loop) for loop in loops]
    # cycles modulo boundaries span H_1 of rank 2
    assert rank_q(image_cols + chains) - rank_q(image_cols) == homology(K, 1).betti == 2


def test_spanning_forest_and_components():
    K = disjoint_union(circle(3), circle(4))
    comps = connected_components(K)
    assert len(comps) == 2
    F = spanning_forest(K)
    assert len(F.roots) == 2 and len(F.tree_edges()) == len(K.vertices) - 2


def test_abelianization_examples():
    assert abelianization(GroupPresentation(3, ())).rank == 3
    z2 = abelianization(GroupPresentation(2, (commutator(1, 2),)))
    assert (z2.rank, z2.torsion) == (2, ())
    # generators t, a, b: [a, b], t a t^-1 = a b, t b t^-1 = b
    heis = GroupPresentation(3, (commutator(2, 3), (1, 2, -1, -3, -2), (1, 3, -1, -3)), ("t", "a", "b"))
    ab = abelianization(heis)
    assert (ab.rank, ab.torsion) == (2, ())
    M = sympy.Matrix(heis.exponent_matrix())
    assert 3 - M.rank() == 2


def test_abelianization_torsion():
    ab = abelianization(GroupPresentation(2, ((1, 1, 1, 1), commutator(1, 2), (2, 2, 2, 2, 2, 2))))
    # Z/4 x Z/6 = Z/2 x Z/12
    assert ab.rank == 0 and ab.torsion == (2, 12)


def test_relabel_and_simplicial_maps():
    K = circle(4)
    L = K.relabel({0: 10, 1: 11, 2: 12, 3: 13})
    assert L.vertices == (10, 11, 12, 13)
    up = circle(8)
    assert is_simplicial({v: v % 4 for v in up.vertices}, up, K)
    assert not is_simplicial({v: 0 if v == 0 else 2 for v in up.vertices}, up, K)


def test_json_roundtrip():
    K = torus(3, 3)
    assert SimplicialBase.from_json(K.to_json()).all_simplices() == K.all_simplices()
    G = GroupPresentation(2, (commutator(1, 2),), ("a", "b"))
    assert GroupPresentation.from_json(G.to_json()) == G
