"""Independent reference computations used to freeze expected values.

Nothing here calls the package's own algorithms for the quantity under
test: matrices are built from first principles and checked with sympy or
plain elimination.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd

import numpy as np
import sympy

# --- quantum torus, n = 2 --------------------------------------------------


def clock_shift_oracle(q: int):
    """Clock C = diag(w^j) and shift S e_j = e_{j+1}; then C S = w S C."""
    w = np.exp(2j * np.pi / q)
    C = np.diag([w**j for j in range(q)])
    S = np.zeros((q, q), dtype=complex)
    for j in range(q):
        S[(j + 1) % q, j] = 1
    return C, S


def dense_rep(coeffs: dict, q: int, p: int = 1) -> np.ndarray:
    """Sum of c_k U_1^{k1} U_2^{k2} with U_1 -> C^p, U_2 -> S (normal ordered)."""
    C, S = clock_shift_oracle(q)
    C = np.linalg.matrix_power(C, p)
    out = np.zeros((q, q), dtype=complex)
    for (k1, k2), c in coeffs.items():
        out += c * np.linalg.matrix_power(C, k1 % q) @ np.linalg.matrix_power(S, k2 % q)
    return out


# --- integer linear algebra ------------------------------------------------


def determinantal_invariant_factors(m) -> list[int]:
    """Invariant factors from gcds of k x k minors (small matrices only)."""
    M = sympy.Matrix(m)
    rows, cols = M.shape
    out = []
    prev = 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                g = gcd(g, int(M.extract(list(rs), list(cs)).det()))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def rank_mod_p(m, p: int) -> int:
    rows = [[x % p for x in r] for r in m]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def rank_q(m) -> int:
    if not m or not m[0]:
        return 0
    return sympy.Matrix(m).rank()


def oracle_boundary(simplices_hi, simplices_lo):
    index = {tuple(s): i for i, s in enumerate(simplices_lo)}
    mat = [[0] * len(simplices_hi) for _ in simplices_lo]
    for j, s in enumerate(simplices_hi):
        for i in range(len(s)):
            face = tuple(s[:i]) + tuple(s[i + 1 :])
            mat[index[face]][j] += (-1) ** i
    return mat


def oracle_homology(K, degree: int, primes=(2, 3, 5, 7)):
    """(betti, has_small_torsion) from ranks over Q and over F_p."""
    lo = K.simplices(degree - 1) if degree > 0 else []
    mid = K.simplices(degree)
    hi = K.simplices(degree + 1)
    d_k = oracle_boundary(mid, lo) if degree > 0 and lo else []
    d_k1 = oracle_boundary(hi, mid) if hi else []
    r_k = rank_q(d_k) if d_k else 0
    r_k1 = rank_q(d_k1) if d_k1 else 0
    betti = len(mid) - r_k - r_k1
    torsion = any(d_k1 and rank_mod_p(d_k1, p) < r_k1 for p in primes)
    return betti, torsion


# --- commutative algebras --------------------------------------------------

x = sympy.Symbol("x")


def poly_quotient_radical(low: list[Fraction]) -> list[list[sympy.Rational]]:
    """Radical of Q[x]/(p) is generated by the squarefree part of p.

    Returns spanning vectors (coordinates in 1, x, ..., x^{d-1}).
    """
    d = len(low)
    p = sympy.Poly([1] + [sympy.Rational(c.numerator, c.denominator) for c in reversed(low)], x)
    sqf = sympy.quo(p, sympy.gcd(p, p.diff(x)))
    vecs = []
    for i in range(d):
        r = sympy.rem(sqf * sympy.Poly(x**i, x), p)
        coeffs = r.all_coeffs()[::-1]
        vec = [sympy.Rational(0)] * d
        for k, c in enumerate(coeffs):
            vec[k] = sympy.Rational(c)
        vecs.append(vec)
    return vecs


def distinct_root_count(low: list[Fraction]) -> int:
    p = sympy.Poly([1] + [sympy.Rational(c.numerator, c.denominator) for c in reversed(low)], x)
    return sympy.degree(sympy.quo(p, sympy.gcd(p, p.diff(x))), x)


def left_matrix_sympy(constants, v):
    d = len(constants)
    M = sympy.zeros(d, d)
    for i in range(d):
        if v[i] == 0:
            continue
        for j in range(d):
            for k in range(d):
                M[k, j] += v[i] * constants[i][j][k]
    return M


def is_nilpotent(constants, v) -> bool:
    L = left_matrix_sympy(constants, v)
    return (L ** len(constants)).is_zero_matrix


def span_rref(vectors, d):
    if not vectors:
        return sympy.zeros(0, d)
    M = sympy.Matrix(vectors)
    R, piv = M.rref()
    return R[: len(piv), :]


def to_sympy(g) -> sympy.Expr:
    """GaussRational -> sympy number."""
    return sympy.Rational(g.re.numerator, g.re.denominator) + sympy.I * sympy.Rational(g.im.numerator, g.im.denominator)


def sympy_constants(A):
    return [[[to_sympy(x) for x in cell] for cell in row] for row in A.constants]


class OracleAlgebra:
    """A commutative algebra built from blocks whose radicals are known in closed form."""

    def __init__(self, A, radical_vectors, reduced_dim):
        self.A = A
        self.radical_vectors = radical_vectors
        self.reduced_dim = reduced_dim


def random_oracle_algebra(rng, max_dim: int = 3) -> OracleAlgebra:
    from ncpb import findim

    blocks = []
    dim = 0
    target = int(rng.integers(1, max_dim + 1))
    while dim < target:
        room = target - dim
        kind = rng.choice(["poly", "roots", "square-zero"]) if room >= 2 else "poly"
        if kind == "square-zero":
            v = int(rng.integers(1, room))
            d = v + 1

            def rule(i, j, d=d):
                out = [0] * d
                if i == 0:
                    out[j] = 1
                elif j == 0:
                    out[i] = 1
                return out

            B = findim.from_multiplication(d, rule, [1] + [0] * v)
            rad = [[sympy.Integer(int(i == j)) for i in range(d)] for j in range(1, d)]
            blocks.append((B, rad, 1))
        else:
            d = int(rng.integers(1, room + 1))
            if kind == "roots":
                roots = [Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 3))) for _ in range(d)]
                poly = sympy.Poly(sympy.prod([x - sympy.Rational(r.numerator, r.denominator) for r in roots]), x)
                low = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs()[1:])]
            else:
                low = [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3))) for _ in range(d)]
            B = findim.polynomial_quotient(low)
            blocks.append((B, poly_quotient_radical(low), distinct_root_count(low)))
        dim += blocks[-1][0].dim
    A, rad, red = blocks[0]
    rad = [list(v) for v in rad]
    for B, rb, r in blocks[1:]:
        pad_a, pad_b = A.dim, B.dim
        rad = [v + [sympy.Integer(0)] * pad_b for v in rad] + [[sympy.Integer(0)] * pad_a + list(v) for v in rb]
        A = findim.direct_sum(A, B)
        red += r
    if rng.random() < 0.7:
        d = A.dim
        while True:
            P = sympy.Matrix(d, d, lambda i, j: sympy.Rational(int(rng.integers(-3, 4)), int(rng.integers(1, 3))))
            if P.det() != 0:
                break
        A = findim.change_basis(A, [[Fraction(int(P[i, j].p), int(P[i, j].q)) for j in range(d)] for i in range(d)])
        Pinv = P.inv()
        rad = [list(Pinv * sympy.Matrix(v)) for v in rad]
    return OracleAlgebra(A, rad, red)
