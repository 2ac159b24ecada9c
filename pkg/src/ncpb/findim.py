"""Finite-dimensional unital algebras given by structure constants.

Arithmetic is exact over Q(i).  The radical is the kernel of the trace
form tr(L_x L_y), which is correct in characteristic zero; it is then
checked directly to be a nilpotent two-sided ideal.  Characters are
found numerically on the semisimple quotient and verified afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .exactnum import GaussRational, mat_inverse, nullspace, rref

G = GaussRational
ZERO = G(0)
ONE = G(1)

CHARACTER_TOL = 1e-6


class AlgebraError(ValueError):
    pass


def _vec(v) -> tuple[GaussRational, ...]:
    return tuple(G.coerce(x) for x in v)


def _cvec(v: Sequence[GaussRational]) -> np.ndarray:
    return np.array([complex(x) for x in v], dtype=complex)


@dataclass(frozen=True)
class Subspace:
    """Span of ``basis`` (rows in reduced echelon form) inside an ambient space."""

    ambient: int
    basis: tuple[tuple[GaussRational, ...], ...]
    pivots: tuple[int, ...]

    @classmethod
    def span(cls, ambient: int, vectors: Sequence[Sequence]) -> Subspace:
        vecs = [list(_vec(v)) for v in vectors]
        if not vecs:
            return cls(ambient, (), ())
        rows, piv = rref(vecs, ambient)
        return cls(ambient, tuple(tuple(r) for r in rows), tuple(piv))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence[GaussRational]) -> list[GaussRational]:
        """v minus its component along the span, zero on pivot columns."""
        out = list(_vec(v))
        for row, p in zip(self.basis, self.pivots):
            c = out[p]
            if c:
                out = [a - c * b for a, b in zip(out, row)]
        return out

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def to_json(self) -> dict:
        return {"ambient": self.ambient, "basis": [[x.to_json() for x in v] for v in self.basis]}


class StructureAlgebra:
    """Unital algebra with b_i b_j = sum_k c[i][j][k] b_k."""

    def __init__(self, constants, unit, weights=None, labels=None, validate: bool = True):
        c = [[_vec(cell) for cell in row] for row in constants]
        d = len(c)
        if any(len(row) != d or any(len(cell) != d for cell in row) for row in c):
            raise AlgebraError("structure constants must have shape d x d x d")
        self.dim = d
        self.constants = tuple(tuple(row) for row in c)
        self.unit = _vec(unit)
        if len(self.unit) != d:
            raise AlgebraError("unit vector has wrong length")
        self.weights = None if weights is None else tuple(tuple(int(x) for x in w) for w in weights)
        if self.weights is not None and len(self.weights) != d:
            raise AlgebraError("need one weight per basis element")
        self.labels = tuple(labels) if labels else tuple(f"b{i}" for i in range(d))
        if validate:
            self.validate()

    # ------------------------------------------------------------------
    def mul(self, x: Sequence, y: Sequence) -> tuple[GaussRational, ...]:
        d = self.dim
        out = [ZERO] * d
        for i in range(d):
            xi = x[i]
            if not xi:
                continue
            for j in range(d):
                yj = y[j]
                if not yj:
                    continue
                f = xi * yj
                for k, ck in enumerate(self.constants[i][j]):
                    if ck:
                        out[k] = out[k] + f * ck
        return tuple(out)

    def basis_vector(self, i: int) -> tuple[GaussRational, ...]:
        return tuple(ONE if j == i else ZERO for j in range(self.dim))

    def zero_vector(self) -> tuple[GaussRational, ...]:
        return (ZERO,) * self.dim

    def left_matrix(self, x: Sequence) -> list[list[GaussRational]]:
        """Matrix of y -> x*y (columns indexed by basis of y)."""
        cols = [self.mul(x, self.basis_vector(j)) for j in range(self.dim)]
        return [[cols[j][k] for j in range(self.dim)] for k in range(self.dim)]

    def is_commutative(self) -> bool:
        d = self.dim
        return all(self.constants[i][j] == self.constants[j][i] for i in range(d) for j in range(i + 1, d))

    def validate(self) -> None:
        d = self.dim
        basis = [self.basis_vector(i) for i in range(d)]
        prods = [[self.constants[i][j] for j in range(d)] for i in range(d)]
        for i, j, k in product(range(d), repeat=3):
            if self.mul(prods[i][j], basis[k]) != self.mul(basis[i], prods[j][k]):
                raise AlgebraError(f"not associative on basis triple ({i},{j},{k})")
        for i in range(d):
            if self.mul(self.unit, basis[i]) != basis[i] or self.mul(basis[i], self.unit) != basis[i]:
                raise AlgebraError(f"unit law fails on basis element {i}")
        if self.weights is not None:
            n = len(self.weights[0]) if d else 0
            for i, j in product(range(d), repeat=2):
                for k, ck in enumerate(self.constants[i][j]):
                    if ck and tuple(a + b for a, b in zip(self.weights[i], self.weights[j])) != self.weights[k]:
                        raise AlgebraError(f"weights not additive on b{i}*b{j} -> b{k}")
            for k, u in enumerate(self.unit):
                if u and any(self.weights[k]):
                    raise AlgebraError("unit must have weight zero")
            if any(len(w) != n for w in self.weights):
                raise AlgebraError("weights must share one rank")

    @property
    def torus_rank(self) -> int:
        if self.weights is None or not self.weights:
            return 0
        return len(self.weights[0])

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "constants": [[[x.to_json() for x in cell] for cell in row] for row in self.constants],
            "unit": [x.to_json() for x in self.unit],
            "weights": None if self.weights is None else [list(w) for w in self.weights],
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> StructureAlgebra:
        return cls(obj["constants"], obj["unit"], obj.get("weights"), obj.get("labels"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructureAlgebra):
            return NotImplemented
        return (self.constants, self.unit, self.weights) == (other.constants, other.unit, other.weights)

    def __hash__(self):
        return hash((self.constants, self.unit, self.weights))

    def __repr__(self) -> str:
        return f"StructureAlgebra(dim={self.dim}, labels={self.labels})"


# ----------------------------------------------------------------------
# Builders


def from_multiplication(dim: int, rule, unit, weights=None, labels=None) -> StructureAlgebra:
    """Build constants from rule(i, j) -> coordinate vector of b_i b_j."""
    consts = [[list(_vec(rule(i, j))) for j in range(dim)] for i in range(dim)]
    return StructureAlgebra(consts, unit, weights, labels)


def diagonal_algebra(n: int) -> StructureAlgebra:
    """C^n with idempotent basis."""
    return from_multiplication(
        n,
        lambda i, j: [1 if (i == j == k) else 0 for k in range(n)],
        [1] * n,
        labels=[f"e{i}" for i in range(n)],
    )


def dual_numbers() -> StructureAlgebra:
    table = {(0, 0): [1, 0], (0, 1): [0, 1], (1, 0): [0, 1], (1, 1): [0, 0]}
    return from_multiplication(2, lambda i, j: table[i, j], [1, 0], labels=["1", "eps"])


def matrix_algebra(m: int = 2) -> StructureAlgebra:
    """M_m with matrix units E_ab, basis index a*m + b."""
    d = m * m

    def rule(i, j):
        a, b = divmod(i, m)
        c, e = divmod(j, m)
        out = [0] * d
        if b == c:
            out[a * m + e] = 1
        return out

    unit = [1 if divmod(i, m)[0] == divmod(i, m)[1] else 0 for i in range(d)]
    return from_multiplication(d, rule, unit, labels=[f"E{a}{b}" for a in range(m) for b in range(m)])


def polynomial_quotient(coeffs: Sequence) -> StructureAlgebra:
    """C[x]/(p) for monic p = x^d + coeffs[d-1] x^{d-1} + ... + coeffs[0]."""
    low = [G.coerce(c) for c in coeffs]
    d = len(low)
    # x^m reduced mod p, for m < 2d - 1
    powers: list[list[GaussRational]] = []
    for m in range(2 * d - 1):
        if m < d:
            powers.append([ONE if k == m else ZERO for k in range(d)])
        else:
            prev = powers[m - 1]
            top = prev[d - 1]
            shifted = [ZERO] + prev[: d - 1]
            powers.append([s - top * c for s, c in zip(shifted, low)])
    return from_multiplication(d, lambda i, j: powers[i + j], powers[0], labels=[f"x^{k}" for k in range(d)])


def direct_sum(A: StructureAlgebra, B: StructureAlgebra) -> StructureAlgebra:
    d = A.dim + B.dim

    def rule(i, j):
        out = [ZERO] * d
        if i < A.dim and j < A.dim:
            out[: A.dim] = A.constants[i][j]
        elif i >= A.dim and j >= A.dim:
            out[A.dim :] = B.constants[i - A.dim][j - A.dim]
        return out

    weights = None
    if A.weights is not None and B.weights is not None:
        weights = list(A.weights) + list(B.weights)
    labels = [f"{x}_1" for x in A.labels] + [f"{x}_2" for x in B.labels]
    return from_multiplication(d, rule, list(A.unit) + list(B.unit), weights, labels)


def change_basis(A: StructureAlgebra, P: Sequence[Sequence]) -> StructureAlgebra:
    """Rewrite A in the basis b'_j = sum_i P[i][j] b_i."""
    P = [list(_vec(r)) for r in P]
    d = A.dim
    Pinv = mat_inverse(P, ZERO, ONE)
    newb = [[P[i][j] for i in range(d)] for j in range(d)]

    def coords(v):
        return [sum((Pinv[r][k] * v[k] for k in range(d)), ZERO) for r in range(d)]

    return from_multiplication(d, lambda i, j: coords(A.mul(newb[i], newb[j])), coords(A.unit))


# ----------------------------------------------------------------------
# Radical and semisimple quotient


def trace_form(A: StructureAlgebra) -> list[list[GaussRational]]:
    d = A.dim
    Ls = [A.left_matrix(A.basis_vector(i)) for i in range(d)]

    def tr_prod(X, Y):
        return sum((X[r][s] * Y[s][r] for r in range(d) for s in range(d)), ZERO)

    return [[tr_prod(Ls[i], Ls[j]) for j in range(d)] for i in range(d)]


def _ideal_power_chain(A: StructureAlgebra, R: Subspace) -> int:
    """Smallest p with R^p = 0, or raise when the chain stalls."""
    current = R
    for p in range(1, A.dim + 2):
        if current.dim == 0:
            return p
        prods = [A.mul(u, v) for u in current.basis for v in R.basis]
        nxt = Subspace.span(A.dim, [w for w in prods if any(w)])
        if nxt.dim >= current.dim:
            break
        current = nxt
    raise AlgebraError("radical candidate is not nilpotent")


def radical(A: StructureAlgebra) -> Subspace:
    d = A.dim
    gram = trace_form(A)
    kern = nullspace(gram, d, ZERO, ONE) if d else []
    R = Subspace.span(d, kern)
    for v in R.basis:
        for i in range(d):
            b = A.basis_vector(i)
            if not R.contains(A.mul(b, v)) or not R.contains(A.mul(v, b)):
                raise AlgebraError("trace-form kernel is not a two-sided ideal")
    _ideal_power_chain(A, R)
    return R


@dataclass(frozen=True)
class SemisimpleQuotient:
    algebra: StructureAlgebra
    proj: tuple[tuple[GaussRational, ...], ...]  # m x d matrix
    lift: tuple[int, ...]  # basis indices of A forming a complement of the radical
    radical: Subspace

    def project(self, v: Sequence) -> tuple[GaussRational, ...]:
        red = self.radical.reduce(v)
        return tuple(red[c] for c in self.lift)


def semisimple_quotient(A: StructureAlgebra) -> SemisimpleQuotient:
    R = radical(A)
    d = A.dim
    lift = tuple(c for c in range(d) if c not in R.pivots)
    m = len(lift)

    def project(v):
        red = R.reduce(v)
        return [red[c] for c in lift]

    basis = [A.basis_vector(c) for c in lift]
    consts = [[project(A.mul(basis[a], basis[b])) for b in range(m)] for a in range(m)]
    weights = None if A.weights is None else [A.weights[c] for c in lift]
    Ass = StructureAlgebra(consts, project(A.unit), weights, [A.labels[c] for c in lift])
    proj = tuple(tuple(project(A.basis_vector(j))[a] for j in range(d)) for a in range(m))
    # proj is a unital homomorphism with kernel exactly R
    for i, j in product(range(d), repeat=2):
        bi, bj = A.basis_vector(i), A.basis_vector(j)
        if tuple(project(A.mul(bi, bj))) != Ass.mul(project(bi), project(bj)):
            raise AlgebraError("quotient map is not multiplicative")
    if tuple(project(A.unit)) != Ass.unit:
        raise AlgebraError("quotient map is not unital")
    kern = Subspace.span(d, nullspace([list(r) for r in proj], d, ZERO, ONE)) if m else Subspace.span(d, [A.basis_vector(i) for i in range(d)])
    if kern != R:
        raise AlgebraError("kernel of the quotient map differs from the radical")
    if radical(Ass).dim != 0:
        raise AlgebraError("quotient is not semisimple")
    return SemisimpleQuotient(Ass, proj, lift, R)


# ----------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class Character:
    functional: tuple[complex, ...]

    def __call__(self, v: Sequence) -> complex:
        return complex(sum(f * complex(x) for f, x in zip(self.functional, v)))

    def as_array(self) -> np.ndarray:
        return np.array(self.functional, dtype=complex)

    def to_json(self) -> dict:
        return {"functional": [{"re": z.real, "im": z.imag} for z in self.functional]}


def _char_key(values: np.ndarray):
    return tuple((round(z.real, 6), round(z.imag, 6)) for z in values)


def multiplicativity_residual(A: StructureAlgebra, chi: np.ndarray) -> float:
    d = A.dim
    worst = abs(chi @ _cvec(A.unit) - 1)
    for i in range(d):
        for j in range(d):
            lhs = chi @ _cvec(A.constants[i][j])
            worst = max(worst, abs(lhs - chi[i] * chi[j]))
    return float(worst)


def characters(A: StructureAlgebra, seed: int = 0, retries: int = 8) -> list[Character]:
    """All characters of a commutative algebra, sorted by their values on the basis."""
    if not A.is_commutative():
        raise AlgebraError("characters() needs a commutative algebra")
    Q = semisimple_quotient(A)
    S = Q.algebra
    m = S.dim
    if m == 0:
        return []
    proj = np.array([[complex(x) for x in row] for row in Q.proj], dtype=complex)
    Ls = [np.array([[complex(x) for x in row] for row in S.left_matrix(S.basis_vector(a))]) for a in range(m)]
    unit = _cvec(S.unit)
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        coef = rng.normal(size=m)
        Lx = sum(c * L for c, L in zip(coef, Ls))
        vals, vecs = np.linalg.eig(Lx.T)
        gaps = [abs(vals[a] - vals[b]) for a in range(m) for b in range(a + 1, m)]
        if gaps and min(gaps) < 1e-6:
            continue
        found = []
        ok = True
        for a in range(m):
            v = vecs[:, a]
            norm = v @ unit
            if abs(norm) < 1e-12:
                ok = False
                break
            chi_s = v / norm
            if multiplicativity_residual(S, chi_s) > CHARACTER_TOL:
                ok = False
                break
            found.append(chi_s @ proj)
        if ok:
            found.sort(key=_char_key, reverse=True)
            return [Character(tuple(complex(z) for z in f)) for f in found]
    raise AlgebraError("could not split the spectrum; try another seed")


# ----------------------------------------------------------------------
# Automorphisms


def as_matrix(phi: Sequence[Sequence]) -> list[list[GaussRational]]:
    return [list(_vec(r)) for r in phi]


def apply_matrix(phi: Sequence[Sequence[GaussRational]], v: Sequence) -> tuple[GaussRational, ...]:
    d = len(phi)
    return tuple(sum((phi[i][j] * v[j] for j in range(len(v)) if v[j]), ZERO) for i in range(d))


def check_automorphism(A: StructureAlgebra, phi: Sequence[Sequence]) -> list[list[GaussRational]]:
    """Return phi (columns = images of basis vectors) after exact checks."""
    P = as_matrix(phi)
    d = A.dim
    if len(P) != d or any(len(r) != d for r in P):
        raise AlgebraError("automorphism has wrong shape")
    try:
        mat_inverse(P, ZERO, ONE)
    except ZeroDivisionError as exc:
        raise AlgebraError("map is not invertible") from exc
    if apply_matrix(P, A.unit) != A.unit:
        raise AlgebraError("map is not unital")
    img = [apply_matrix(P, A.basis_vector(i)) for i in range(d)]
    for i, j in product(range(d), repeat=2):
        if apply_matrix(P, A.constants[i][j]) != A.mul(img[i], img[j]):
            raise AlgebraError(f"map is not multiplicative on (b{i}, b{j})")
    return P


def preserves_weights(A: StructureAlgebra, phi: Sequence[Sequence]) -> bool:
    if A.weights is None:
        return False
    return all(not phi[i][j] or A.weights[i] == A.weights[j] for i in range(A.dim) for j in range(A.dim))


@dataclass(frozen=True)
class DescendedAutomorphism:
    on_radical: tuple[tuple[GaussRational, ...], ...]
    on_quotient: tuple[tuple[GaussRational, ...], ...]


def descend_automorphism(A: StructureAlgebra, phi: Sequence[Sequence]) -> DescendedAutomorphism:
    P = check_automorphism(A, phi)
    Q = semisimple_quotient(A)
    R = Q.radical
    imgs = [apply_matrix(P, v) for v in R.basis]
    if not all(R.contains(w) for w in imgs):
        raise AlgebraError("automorphism does not preserve the radical")
    # coordinates in the echelon basis are the pivot entries
    on_rad = tuple(tuple(w[p] for w in imgs) for p in R.pivots)
    on_q = [Q.project(apply_matrix(P, A.basis_vector(c))) for c in Q.lift]
    m = len(Q.lift)
    on_quot = tuple(tuple(on_q[b][a] for b in range(m)) for a in range(m))
    return DescendedAutomorphism(on_rad, on_quot)


def character_permutation(A: StructureAlgebra, phi: Sequence[Sequence], chars: Sequence[Character] | None = None, seed: int = 0) -> tuple[int, ...]:
    """perm with chi_{perm[i]} = chi_i o phi^{-1} (indices from 0)."""
    P = check_automorphism(A, phi)
    if chars is None:
        chars = characters(A, seed)
    Pinv = np.array([[complex(x) for x in r] for r in mat_inverse(P, ZERO, ONE)])
    table = np.array([c.as_array() for c in chars])
    perm = []
    for chi in table:
        moved = chi @ Pinv
        dists = np.abs(table - moved).max(axis=1)
        order = np.argsort(dists)
        if dists[order[0]] > CHARACTER_TOL or (len(order) > 1 and dists[order[1]] <= CHARACTER_TOL):
            raise AlgebraError("ambiguous character matching")
        perm.append(int(order[0]))
    if sorted(perm) != list(range(len(chars))):
        raise AlgebraError("character matching is not a bijection")
    return tuple(perm)


def permutation_matrix_auto(perm: Sequence[int]) -> list[list[GaussRational]]:
    """Automorphism of C^n sending e_i to e_{perm[i]}."""
    n = len(perm)
    return [[ONE if perm[j] == i else ZERO for j in range(n)] for i in range(n)]


def torus_action_matrix(A: StructureAlgebra, t) -> np.ndarray:
    """Diagonal float matrix of the torus point t acting through the weights."""
    from .exactnum import PhaseQ, phase_to_scalar

    if A.weights is None:
        raise AlgebraError("algebra carries no torus weights")
    diag = []
    for w in A.weights:
        ph = PhaseQ(0)
        for tr, wr in zip(t, w):
            ph = ph + (tr if isinstance(tr, PhaseQ) else PhaseQ(tr)) * wr
        diag.append(phase_to_scalar(ph))
    return np.diag(diag)
