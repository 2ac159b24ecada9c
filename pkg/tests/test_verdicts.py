from fractions import Fraction

import numpy as np
import pytest

from ncpb import gallery, simbase
from ncpb.bundle import (
    BundleError,
    ChernPrincipalBundle,
    FlatAlgebraBundle,
    NcTorusFiber,
    PhaseLattice,
    SectionFamily,
)
from ncpb.exactnum import PhaseQ, as_fraction, check_farkas
from ncpb.nctorus import NcTorusElement, ThetaMatrix, certify_invertible, multiply
from ncpb.simbase import WeightFunction, loop_edges
from ncpb.speclocal import ChernSystem, localize_bundle_system
from ncpb.verdicts import (
    NCP,
    NOT_TRIVIAL,
    TRIVIAL,
    UNKNOWN,
    check_ncp,
    check_trivial_ncp,
    fundamental_group,
    monomial_witness_obstruction,
    reconstruct_principal_data,
    star_family,
    tree_gauge,
)

T13 = ThetaMatrix.two("1/3")


def numeric_holonomy_on(B, loop, k):
    """Transport U^k around the loop by applying each transition in turn."""
    x = NcTorusElement.monomial(B.fiber.theta, k)
    for a, b in reversed(loop_edges(loop)):
        x = B.g(a, b).apply(x)
    return x


def recheck_witnesses(B, verdict):
    for w in verdict.witnesses:
        vals = w.section.values
        assert w.section.is_compatible(1e-9)
        for x in vals.values():
            assert B.fiber.degrees(x) == {tuple(w.degree)}
            inv = certify_invertible(x)
            assert inv.invertible
            assert multiply(x, inv.inverse).close_to(NcTorusElement.one(B.fiber.theta), 1e-6)


def test_bare_nctorus_trivial_with_generators():
    B = gallery.nctorus("1/3")
    v = check_trivial_ncp(B)
    assert v.tag == TRIVIAL
    assert [tuple(w.degree) for w in v.witnesses] == [(1, 0), (0, 1)]
    for w, k in zip(v.witnesses, [(1, 0), (0, 1)]):
        (x,) = w.section.values.values()
        assert x.support() == {k}
    recheck_witnesses(B, v)


def test_commutative_nctorus_trivial():
    assert check_trivial_ncp(gallery.nctorus(0)).tag == TRIVIAL
    assert check_trivial_ncp(gallery.nctorus(0, n=3)).tag == TRIVIAL


def test_trivial_bundle_over_torus():
    B = gallery.trivial_torus_bundle()
    v = check_trivial_ncp(B)
    assert v.tag == TRIVIAL
    recheck_witnesses(B, v)
    assert check_ncp(B).tag == NCP


def test_monomial_trivial_cocycle_is_constant():
    B = gallery.trivial_torus_bundle()
    res = monomial_witness_obstruction(B, (1, 0))
    assert res.tag == "solvable"
    vals = list(res.witness.values.values())
    assert all(x.close_to(vals[0], 0) for x in vals)


def test_heisenberg_lattice_obstruction():
    H = gallery.heisenberg()
    res = monomial_witness_obstruction(H, (1,))
    assert res.tag == "obstructed"
    cert = res.certificate
    assert cert["layer"] == "lattice" and cert["shift"] == [1, 0]
    # re-verify: (M - I) k = 0 together with W k = 1 has no rational solution
    h = H.holonomy(cert["cycle"])
    A = [list(r) for r in H.fiber.W] + [[h.M[i][j] - int(i == j) for j in range(2)] for i in range(2)]
    b = [1, 0, 0]
    y = [as_fraction(x) for x in cert["farkas"]]
    assert all(sum(y[i] * A[i][j] for i in range(3)) == 0 for j in range(2))
    assert sum(y[i] * b[i] for i in range(3)) != 0
    # the loop really shifts the weight-one mode by (1, 0)
    x = numeric_holonomy_on(H, cert["cycle"], (0, 1))
    assert x.support() == {(1, 1)}


def test_circle_phase_obstruction():
    B = gallery.circle_qt_bundle()
    res = monomial_witness_obstruction(B, (1, 0))
    cert = res.certificate
    assert res.tag == "obstructed" and cert["layer"] == "phase"
    (bad,) = cert["holonomies"]
    assert PhaseQ.from_json(bad["holonomy"]) == PhaseQ("1/3")
    x = numeric_holonomy_on(B, bad["cycle"], (1, 0))
    assert abs(x.coeff((1, 0)) - np.exp(2j * np.pi / 3)) < 1e-12
    assert monomial_witness_obstruction(B, (0, 1)).tag == "solvable"
    v = check_trivial_ncp(B)
    assert v.tag == NOT_TRIVIAL and v.scope == "flat"


def test_heisenberg_verdicts():
    H = gallery.heisenberg()
    v = check_trivial_ncp(H)
    assert v.tag == NOT_TRIVIAL and v.certificate["shift"] == [1, 0]
    ncp = check_ncp(H)
    assert ncp.tag == NCP
    assert all(p.verdict.tag == TRIVIAL and p.trivialized for p in ncp.patches)
    assert check_ncp(H, star_family(H.base)).tag == NCP


def test_chern_verdicts():
    S = gallery.chern_qt_bundle()
    v = check_trivial_ncp(S)
    assert v.tag == NOT_TRIVIAL and v.scope == "topological"
    assert v.certificate["h2_pairings"] == [[1, 0]]
    assert check_ncp(S).tag == NCP
    assert check_ncp(S, star_family(S.base)).tag == NCP
    K = S.base
    d2 = simbase.boundary_matrix(K, 2)
    delta = [list(r) for r in zip(*d2)]
    y = [as_fraction(x) for x in v.certificate["farkas"][0]]
    assert check_farkas(delta, S.principal.component(0), y)


def test_trivial_chern_system():
    K = simbase.torus(3, 3)
    b = {e: (1, -2) for e in K.edges[:5]}
    P = ChernPrincipalBundle(K, 2, {}).add_coboundary(b)
    v = check_trivial_ncp(ChernSystem(P, NcTorusFiber(T13)))
    assert v.tag == TRIVIAL and len(v.witnesses) == 2


def test_findim_fiber_has_a_zero_component():
    from ncpb import findim
    from ncpb.bundle import FindimFiber

    A = findim.from_multiplication(2, lambda i, j: [[1, 0], [0, 1], [0, 1], [0, 0]][2 * i + j], [1, 0], weights=[[0], [1]])
    B = FlatAlgebraBundle(simbase.circle(4), FindimFiber(A), {})
    v = check_trivial_ncp(B)
    assert v.tag == NOT_TRIVIAL and v.certificate["degree"] == [2]


def _flip_bundle():
    # the loop sends U^(a,1) to U^(-a,1); weight set is not fixed pointwise
    th = ThetaMatrix.zero(2)
    fiber = NcTorusFiber(th, [[0, 1]])
    g = PhaseLattice(((-1, 0), (0, 1)), (PhaseQ("1/5"), PhaseQ("1/2")), th)
    return FlatAlgebraBundle(simbase.circle(4), fiber, {(3, 0): g})


def test_unknown_is_honest():
    B = _flip_bundle()
    res = monomial_witness_obstruction(B, (1,))
    assert res.tag == "undecided" and not res.sound
    v = check_trivial_ncp(B)
    assert v.tag == UNKNOWN and v.certificate["undecided"]
    ncp = check_ncp(B)
    assert ncp.tag == NCP  # every vertex patch is contractible


def test_candidate_sections_are_checked_not_trusted():
    B = _flip_bundle()
    th = B.fiber.theta
    c = np.exp(2j * np.pi * (1 / 5 + 1 / 2))
    x = NcTorusElement(th, {(1, 1): 1.0, (-1, 1): c})
    vals = {v: x for v in B.base.vertices}
    # compatible on the circle but not invertible (z + c/z vanishes on |z| = 1)
    cand = SectionFamily(B, vals, check=False)
    assert check_trivial_ncp(B, {(1,): [cand]}).tag == UNKNOWN


def test_equivariance_required():
    th = ThetaMatrix.zero(2)
    fiber = NcTorusFiber(th)
    g = PhaseLattice(((1, 1), (0, 1)), (0, 0), th)
    B = FlatAlgebraBundle(simbase.circle(4), fiber, {(3, 0): g})
    with pytest.raises(BundleError):
        check_trivial_ncp(B)


def test_check_ncp_family_must_cover():
    B = gallery.heisenberg()
    with pytest.raises(ValueError):
        check_ncp(B, [WeightFunction.indicator(B.base, [0, 1])])


def test_tree_gauge_trivializes_tree_edges():
    H = gallery.heisenberg()
    G, kappa = tree_gauge(H)
    ident = H.fiber.identity()
    nontrivial = [e for e, g in G.cocycle.items() if not g.same(ident) and e[0] < e[1]]
    assert len(nontrivial) == 1  # only the edge closing the loop


def test_monotonicity_under_localization():
    rng = np.random.default_rng(7)
    K = simbase.torus(3, 3)
    fiber = NcTorusFiber(T13)
    for _ in range(5):
        kappa = {v: PhaseLattice.translation(T13, (Fraction(int(rng.integers(0, 6)), 6), Fraction(int(rng.integers(0, 6)), 6))) for v in K.vertices}
        B = FlatAlgebraBundle(K, fiber, {}).gauge(kappa)
        assert check_trivial_ncp(B).tag == TRIVIAL
        for f in star_family(K):
            loc = localize_bundle_system(B, f)
            assert check_trivial_ncp(loc.system).tag == TRIVIAL


def test_relabeling_invariance():
    perm = {v: (5 * v + 1) % 6 for v in range(6)}
    for B in (gallery.heisenberg(), gallery.circle_qt_bundle(), gallery.pullback()):
        R = B.relabel(perm)
        assert check_trivial_ncp(R).tag == check_trivial_ncp(B).tag
        assert check_ncp(R).tag == check_ncp(B).tag
    S = gallery.chern_qt_bundle()
    perm9 = {v: (v * 4) % 9 for v in range(9)}
    R = ChernSystem(S.principal.relabel(perm9), S.fiber)
    assert check_trivial_ncp(R).tag == NOT_TRIVIAL


def test_gallery_regressions():
    expected = {
        "nctorus": (TRIVIAL, NCP),
        "qt-bundle": (TRIVIAL, NCP),
        "circle-qt-bundle": (NOT_TRIVIAL, NCP),
        "pullback": (TRIVIAL, NCP),
        "equivariant": (TRIVIAL, NCP),
        "heisenberg": (NOT_TRIVIAL, NCP),
        "chern-qt-bundle": (NOT_TRIVIAL, NCP),
    }
    for name, (triv, ncp) in expected.items():
        S = gallery.example_gallery(name)
        assert check_trivial_ncp(S).tag == triv, name
        assert check_ncp(S).tag == ncp, name


def test_pullback_of_obstructed_bundle_can_trivialize():
    down = gallery.circle_qt_bundle(("1/2", "0"))
    assert check_trivial_ncp(down).tag == NOT_TRIVIAL
    assert check_trivial_ncp(gallery.pullback(("1/2", "0"), sheets=2)).tag == TRIVIAL
    assert check_trivial_ncp(gallery.pullback(("1/3", "0"), sheets=2)).tag == NOT_TRIVIAL


def test_reconstruct_trivial_bundle():
    B = gallery.trivial_torus_bundle()
    rep = reconstruct_principal_data(gallery.qt_bundle(B.base, {}, 0), check_ncp(gallery.qt_bundle(B.base, {}, 0)))
    for h in rep.holonomies:
        for e in h["per_degree"]:
            assert e["shift"] == [0, 0] and e["phase"] == {"num": 0, "den": 1}
    assert rep.free


def test_reconstruct_circle_holonomy():
    B = gallery.circle_qt_bundle(("1/3", "0"), theta=0)
    rep = reconstruct_principal_data(B, check_ncp(B))
    (h,) = rep.holonomies
    per = {tuple(e["degree"]): e for e in h["per_degree"]}
    assert PhaseQ.from_json(per[(1, 0)]["phase"]) == PhaseQ("1/3")
    assert PhaseQ.from_json(per[(0, 1)]["phase"]) == PhaseQ(0)
    assert rep.free


def test_reconstruct_heisenberg():
    H = gallery.heisenberg()
    rep = reconstruct_principal_data(H, check_ncp(H))
    assert rep.abelianization == {"rank": 2, "torsion": []}
    assert rep.free
    (h,) = rep.holonomies
    assert h["per_degree"][0]["shift"] in ([1, 0], [-1, 0])


def test_reconstruct_needs_ncp():
    from ncpb.verdicts import NcpVerdict

    with pytest.raises(ValueError):
        reconstruct_principal_data(gallery.heisenberg(), NcpVerdict(UNKNOWN))


def test_fundamental_group_of_heisenberg():
    G = fundamental_group(gallery.heisenberg())
    assert G.generators == 3
    from ncpb.simbase import abelianization

    ab = abelianization(G)
    assert ab.rank == 2 and ab.rank != 3


def test_verdict_json_shape():
    v = check_trivial_ncp(gallery.heisenberg()).to_json()
    assert v["verdict"] == "not-trivial" and "certificate" in v
    n = check_ncp(gallery.heisenberg()).to_json()
    assert n["verdict"] == "ncp" and len(n["patches"]) == 6
