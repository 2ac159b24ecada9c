"""Exact scalars and integer linear algebra.

Phases live in Q/Z as reduced fractions, Gaussian rationals give an exact
field Q(i) for structure-constant computations, and complex doubles are
compared under one global tolerance.  Smith normal form drives every
homology, abelianization and integer-feasibility question downstream.
"""

from __future__ import annotations

import cmath
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Sequence

_TOL = 1e-9


def tolerance() -> float:
    """Current equality tolerance for complex doubles."""
    return _TOL


def set_tolerance(value: float) -> None:
    global _TOL
    if not value > 0:
        raise ValueError("tolerance must be positive")
    _TOL = float(value)


@contextmanager
def tolerance_override(value: float) -> Iterator[float]:
    old = _TOL
    set_tolerance(value)
    try:
        yield value
    finally:
        set_tolerance(old)


def close(a: complex, b: complex, tol: float | None = None) -> bool:
    """Componentwise comparison of complex doubles."""
    t = _TOL if tol is None else tol
    d = complex(a) - complex(b)
    return abs(d.real) <= t and abs(d.imag) <= t


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, dict):
        return Fraction(int(x["num"]), int(x["den"]))
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    raise TypeError(f"cannot read {x!r} as a rational")


# --------------------------------------------------------------------------
# Phases in Q/Z


@dataclass(frozen=True, order=True)
class PhaseQ:
    """An element q of Q/Z, stored in [0, 1); denotes exp(2 pi i q)."""

    value: Fraction

    def __init__(self, value=0):
        f = as_fraction(value)
        object.__setattr__(self, "value", f - math.floor(f))

    def __add__(self, other: PhaseQ) -> PhaseQ:
        if not isinstance(other, PhaseQ):
            return NotImplemented
        return PhaseQ(self.value + other.value)

    def __neg__(self) -> PhaseQ:
        return PhaseQ(-self.value)

    def __sub__(self, other: PhaseQ) -> PhaseQ:
        if not isinstance(other, PhaseQ):
            return NotImplemented
        return PhaseQ(self.value - other.value)

    def __mul__(self, k: int) -> PhaseQ:
        if not isinstance(k, int):
            return NotImplemented
        return PhaseQ(self.value * k)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def order(self) -> int:
        return self.value.denominator

    def to_json(self) -> dict:
        return {"num": self.value.numerator, "den": self.value.denominator}

    @classmethod
    def from_json(cls, obj) -> PhaseQ:
        return cls(as_fraction(obj))

    def __repr__(self) -> str:
        return f"PhaseQ({self.value})"


def phase_to_scalar(q: PhaseQ) -> complex:
    """exp(2 pi i q); the common quarter turns are returned exactly."""
    v = q.value
    exact = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}
    if v in exact:
        return exact[v]
    return cmath.exp(2j * math.pi * float(v))


# --------------------------------------------------------------------------
# Gaussian rationals


class GaussRational:
    """Exact element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = as_fraction(re)
        self.im = as_fraction(im)

    @classmethod
    def coerce(cls, x) -> GaussRational:
        if isinstance(x, GaussRational):
            return x
        if isinstance(x, complex):
            return cls(as_fraction(x.real), as_fraction(x.imag))
        if isinstance(x, dict):
            return cls(as_fraction(x.get("re", 0)), as_fraction(x.get("im", 0)))
        if isinstance(x, (list, tuple)) and len(x) == 2:
            return cls(as_fraction(x[0]), as_fraction(x[1]))
        return cls(as_fraction(x))

    def __add__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussRational.coerce(o) - self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __mul__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> GaussRational:
        return GaussRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, o):
        o = GaussRational.coerce(o)
        n = o.norm2()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        p = self * o.conjugate()
        return GaussRational(p.re / n, p.im / n)

    def __rtruediv__(self, o):
        return GaussRational.coerce(o) / self

    def __pow__(self, k: int):
        if k < 0:
            return (GaussRational(1) / self) ** (-k)
        out = GaussRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, o) -> bool:
        try:
            o = GaussRational.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_json(self) -> dict:
        return {"re": _frac_json(self.re), "im": _frac_json(self.im)}

    @classmethod
    def from_json(cls, obj) -> GaussRational:
        return cls.coerce(obj)

    def __repr__(self) -> str:
        if self.im == 0:
            return f"GaussRational({self.re})"
        return f"GaussRational({self.re}, {self.im})"


def _frac_json(f: Fraction):
    return f.numerator if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


# --------------------------------------------------------------------------
# Exact linear algebra over a field (Fraction or GaussRational entries)


def rref(mat: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns (rows, pivot columns)."""
    rows = [list(r) for r in mat]
    if not rows:
        return [], []
    n = len(rows[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c] if not isinstance(rows[r][c], int) else Fraction(1, rows[r][c])
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(mat: Sequence[Sequence]) -> int:
    return len(rref(mat)[1])


def nullspace(mat: Sequence[Sequence], ncols: int, zero=Fraction(0), one=Fraction(1)) -> list[list]:
    """Basis of {x : mat x = 0}, one vector per free column."""
    rows, pivots = rref(mat, ncols) if mat else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(rows, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve_linear(mat: Sequence[Sequence], rhs: Sequence, ncols: int, zero=Fraction(0)):
    """One solution of mat x = rhs, or None when inconsistent."""
    aug = [list(r) + [b] for r, b in zip(mat, rhs)]
    rows, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [zero] * ncols
    for row, p in zip(rows, pivots):
        x[p] = row[ncols]
    return x


def mat_inverse(mat: Sequence[Sequence], zero=Fraction(0), one=Fraction(1)):
    n = len(mat)
    aug = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(mat)]
    rows, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in rows[:n]]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        out.append([sum((row[k] * b[k][j] for k in range(inner)), 0 * row[0] if row else 0) for j in range(cols)])
    return out


def mat_vec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), 0 * v[0] if v else 0) for row in a]


def identity(n: int, one=1, zero=0) -> list[list]:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def det_int(mat: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    n = len(mat)
    if n == 0:
        return 1
    a = [list(r) for r in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# --------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SmithForm:
    diag: tuple[int, ...]
    left: tuple[tuple[int, ...], ...]
    right: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != 0)

    def __iter__(self):
        return iter((self.diag, self.left, self.right))


def smith_normal_form(m: Sequence[Sequence[int]], ncols: int | None = None) -> SmithForm:
    """Return (diag, U, V) with U*m*V diagonal, d_1 | d_2 | ..., U and V unimodular.

    ``ncols`` is needed only for matrices with zero rows.
    """
    A = [[int(x) for x in r] for r in m]
    rows = len(A)
    cols = len(A[0]) if rows else (ncols or 0)
    U = identity(rows)
    V = identity(cols)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q*row_src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        changed = True
        while changed:
            changed = False
            for i in range(t + 1, rows):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        swap_rows(i, t)
                        changed = True
            for j in range(t + 1, cols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        swap_cols(j, t)
                        changed = True
        p = A[t][t]
        bad = next(
            (i for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % p),
            None,
        )
        if bad is not None:
            add_row(t, bad, 1)
            continue
        if p < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    diag = tuple(A[i][i] for i in range(min(rows, cols)))
    if rows and cols:
        prod = mat_mul(mat_mul(U, [[int(x) for x in r] for r in m]), V)
        for i in range(rows):
            for j in range(cols):
                expect = diag[i] if i == j else 0
                if prod[i][j] != expect:
                    raise ArithmeticError("Smith normal form verification failed")
    return SmithForm(diag, tuple(map(tuple, U)), tuple(map(tuple, V)))


def invariant_factors(m: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[int, ...]:
    return smith_normal_form(m, ncols).diag


@dataclass(frozen=True)
class IntegerSolution:
    """Outcome of solving A x = b over the integers.

    Either ``particular``/``kernel`` describe every solution, or
    ``certificate`` is a rational row vector y with yA integral and yb not
    an integer, which proves that no integer solution exists.
    """

    particular: tuple[int, ...] | None
    kernel: tuple[tuple[int, ...], ...]
    certificate: tuple[Fraction, ...] | None

    @property
    def feasible(self) -> bool:
        return self.particular is not None


def solve_integer(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int) -> IntegerSolution:
    rows = len(A)
    if rows == 0:
        return IntegerSolution(tuple([0] * ncols), tuple(tuple(1 if i == j else 0 for i in range(ncols)) for j in range(ncols)), None)
    snf = smith_normal_form(A, ncols)
    U, V, d = snf.left, snf.right, snf.diag
    Ub = [sum(u * x for u, x in zip(row, b)) for row in U]
    y = [0] * ncols
    for i in range(rows):
        di = d[i] if i < len(d) else 0
        if di:
            if Ub[i] % di:
                cert = tuple(Fraction(u, di) for u in U[i])
                return IntegerSolution(None, (), cert)
            y[i] = Ub[i] // di
        elif Ub[i]:
            cert = tuple(Fraction(u, 2 * Ub[i]) for u in U[i])
            return IntegerSolution(None, (), cert)
    x = tuple(sum(V[r][c] * y[c] for c in range(ncols)) for r in range(ncols))
    r = snf.rank
    kernel = tuple(tuple(V[row][c] for row in range(ncols)) for c in range(r, ncols))
    return IntegerSolution(x, kernel, None)


def check_farkas(A: Sequence[Sequence[int]], b: Sequence[int], y: Sequence[Fraction]) -> bool:
    """True when y certifies that A x = b has no integer solution."""
    ncols = len(A[0]) if A else 0
    ya = [sum(Fraction(y[i]) * A[i][j] for i in range(len(A))) for j in range(ncols)]
    yb = sum(Fraction(y[i]) * b[i] for i in range(len(A)))
    return all(v.denominator == 1 for v in ya) and yb.denominator != 1
