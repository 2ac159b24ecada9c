from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import determinantal_invariant_factors, rank_q

from ncpb.exactnum import (
    GaussRational,
    PhaseQ,
    as_fraction,
    check_farkas,
    close,
    det_int,
    mat_inverse,
    mat_mul,
    nullspace,
    phase_to_scalar,
    rank,
    smith_normal_form,
    solve_integer,
    solve_linear,
    tolerance,
    tolerance_override,
)
from ncpb.simbase import boundary_matrix, torus

small = st.integers(-6, 6)
fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def test_phase_wraps_into_unit_interval():
    assert PhaseQ("5/3").value == Fraction(2, 3)
    assert PhaseQ(-1).value == 0
    assert PhaseQ("-1/4").value == Fraction(3, 4)


def test_phase_lowest_terms_and_order():
    p = PhaseQ(Fraction(4, 6))
    assert (p.value.numerator, p.value.denominator) == (2, 3)
    assert p.order == 3
    assert PhaseQ(0).order == 1


@given(fractions, fractions)
def test_phase_group_laws(a, b):
    pa, pb = PhaseQ(a), PhaseQ(b)
    assert pa + pb == PhaseQ(a + b)
    assert pa - pb == PhaseQ(a - b)
    assert (pa + (-pa)).is_zero()
    assert 0 <= (pa + pb).value < 1


@given(fractions, st.integers(-20, 20))
def test_phase_integer_multiple(a, k):
    assert PhaseQ(a) * k == PhaseQ(a * k) == k * PhaseQ(a)


@pytest.mark.parametrize(
    "q, z",
    [(0, 1 + 0j), ("1/2", -1 + 0j), ("1/4", 1j), ("3/4", -1j)],
)
def test_phase_to_scalar_quarter_turns_exact(q, z):
    assert phase_to_scalar(PhaseQ(q)) == z


def test_phase_to_scalar_generic():
    z = phase_to_scalar(PhaseQ("1/3"))
    assert close(z, complex(-0.5, 3**0.5 / 2), 1e-15)


@given(fractions)
def test_phase_json_roundtrip(a):
    p = PhaseQ(a)
    assert PhaseQ.from_json(p.to_json()) == p


def test_as_fraction_inputs():
    assert as_fraction("2/6") == Fraction(1, 3)
    assert as_fraction({"num": 3, "den": 9}) == Fraction(1, 3)
    assert as_fraction(0.25) == Fraction(1, 4)
    with pytest.raises(TypeError):
        as_fraction([1])


def test_tolerance_override_restores():
    base = tolerance()
    with tolerance_override(1e-3):
        assert tolerance() == 1e-3
    assert tolerance() == base


@given(fractions, fractions, fractions, fractions)
def test_gauss_rational_field(a, b, c, d):
    x, y = GaussRational(a, b), GaussRational(c, d)
    assert x * y == y * x
    assert (x + y) - y == x
    assert x * GaussRational(1) == x
    if y != 0:
        assert (x / y) * y == x
    assert (x * x.conjugate()).im == 0
    assert (x * x.conjugate()).re == x.norm2()


def test_gauss_rational_complex_and_json():
    z = GaussRational("1/2", -3)
    assert complex(z) == complex(0.5, -3)
    assert GaussRational.from_json(z.to_json()) == z
    assert GaussRational(0, 1) ** 2 == -1


def test_rank_and_nullspace():
    m = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    assert rank(m) == 2
    ns = nullspace(m, 3)
    assert len(ns) == 1
    for v in ns:
        assert all(sum(Fraction(a) * b for a, b in zip(row, v)) == 0 for row in m)


def test_solve_linear_and_inverse():
    m = [[2, 1], [1, 1]]
    x = solve_linear(m, [3, 2], 2)
    assert list(x) == [1, 1]
    assert solve_linear([[1, 1], [1, 1]], [1, 2], 2) is None
    inv = mat_inverse(m)
    assert mat_mul(m, inv) == [[1, 0], [0, 1]]


def test_det_int():
    assert det_int([[1, 1], [0, 1]]) == 1
    assert det_int([[2, 3], [4, 5]]) == -2
    assert det_int([[1, 2, 3], [4, 5, 6], [7, 8, 10]]) == -3


def test_snf_trivial_cases():
    assert list(smith_normal_form([[0]]).diag) == [0]
    assert list(smith_normal_form([[1, 0], [0, 1]]).diag) == [1, 1]


def test_snf_known_matrix():
    assert list(smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]).diag) == [2, 6, 12]


def _nonzero(diag):
    return [d for d in diag if d]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r))))
def test_snf_matches_determinantal_divisors(m):
    snf = smith_normal_form(m)
    assert _nonzero(snf.diag) == determinantal_invariant_factors(m)
    # U m V = D and divisibility chain
    U, V = [list(r) for r in snf.left], [list(r) for r in snf.right]
    D = mat_mul(mat_mul(U, m), V)
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            assert x == (snf.diag[i] if i == j and i < len(snf.diag) else 0)
    nz = _nonzero(snf.diag)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert abs(det_int(U)) == 1 and abs(det_int(V)) == 1


def test_snf_torus_top_boundary():
    K = torus(3, 3)
    d2 = boundary_matrix(K, 2)
    snf = smith_normal_form(d2, len(K.triangles))
    # H_2 = ker d2 is Z: rank deficiency one, no torsion in the image
    assert snf.rank == rank_q(d2) == len(K.triangles) - 1
    assert set(_nonzero(snf.diag)) == {1}


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=3),
    st.lists(small, min_size=3, max_size=3),
)
def test_solve_integer_solutions_or_certificates(A, x0):
    b = [sum(a * x for a, x in zip(row, x0)) for row in A]
    sol = solve_integer(A, b, 3)
    assert sol.feasible
    assert [sum(a * x for a, x in zip(row, sol.particular)) for row in A] == b
    for k in sol.kernel:
        assert all(sum(a * x for a, x in zip(row, k)) == 0 for row in A)
    shifted = [v + 1 for v in b]
    other = solve_integer(A, shifted, 3)
    if not other.feasible:
        assert check_farkas(A, shifted, other.certificate)
    else:
        assert [sum(a * x for a, x in zip(row, other.particular)) for row in A] == shifted


def test_solve_integer_parity_obstruction():
    sol = solve_integer([[2, 4]], [1], 2)
    assert not sol.feasible
    assert check_farkas([[2, 4]], [1], sol.certificate)
    assert not check_farkas([[2, 4]], [2], sol.certificate)
