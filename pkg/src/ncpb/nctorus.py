"""Finitely supported elements of the smooth noncommutative n-torus.

Monomials are normal ordered, U^k = U_1^{k_1} ... U_n^{k_n}, with
U_r U_s = e(theta_rs) U_s U_r and e(x) = exp(2 pi i x).  Reordering
U^k U^l into normal order collects the phase

    sigma(k, l) = sum_{r > s} theta_rs k_r l_s

so the product is twisted convolution of coefficient maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exactnum import PhaseQ, as_fraction, phase_to_scalar, tolerance

Index = tuple[int, ...]


class ThetaMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ThetaMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    def __init__(self, entries):
        rows = tuple(tuple(as_fraction(x) for x in row) for row in entries)
        n = len(rows)
        for r in range(n):
            if len(rows[r]) != n:
                raise ValueError("theta must be square")
            if rows[r][r] != 0:
                raise ValueError("theta must have zero diagonal")
            for s in range(r):
                if rows[r][s] != -rows[s][r]:
                    raise ValueError(f"theta is not skew-symmetric at ({r},{s})")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def zero(cls, n: int) -> ThetaMatrix:
        return cls([[0] * n for _ in range(n)])

    @classmethod
    def two(cls, theta12) -> ThetaMatrix:
        t = as_fraction(theta12)
        return cls([[0, t], [-t, 0]])

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, rs):
        r, s = rs
        return self.entries[r][s]

    def is_commutative(self) -> bool:
        return all(x.denominator == 1 for row in self.entries for x in row)

    def lower_float(self) -> np.ndarray:
        # strictly lower part, reduced mod 1 to keep float phases small
        n = self.n
        out = np.zeros((n, n))
        for r in range(n):
            for s in range(r):
                v = self.entries[r][s]
                out[r, s] = float(v - math.floor(v))
        return out

    def to_json(self) -> list:
        return [[_rat_json(x) for x in row] for row in self.entries]


def _rat_json(f: Fraction):
    return f.numerator if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def phase_cocycle(theta: ThetaMatrix, k: Sequence[int], l: Sequence[int]) -> PhaseQ:
    """sigma(k, l) with U^k U^l = e(sigma) U^{k+l}."""
    n = theta.n
    if len(k) != n or len(l) != n:
        raise ValueError("multi-index length does not match theta")
    total = Fraction(0)
    for r in range(n):
        for s in range(r):
            total += theta.entries[r][s] * k[r] * l[s]
    return PhaseQ(total)


def star_phase(theta: ThetaMatrix, k: Sequence[int]) -> PhaseQ:
    """Phase c with (U^k)* = e(c) U^{-k}."""
    total = Fraction(0)
    for r in range(theta.n):
        for s in range(r):
            total += theta.entries[r][s] * k[r] * k[s]
    return PhaseQ(total)


def _prune(coeffs: Mapping[Index, complex], tol: float) -> dict[Index, complex]:
    return {k: complex(v) for k, v in coeffs.items() if abs(v) > tol}


class NcTorusElement:
    """sum_k a_k U^k with finitely many nonzero a_k (complex doubles)."""

    __slots__ = ("theta", "_coeffs")

    def __init__(self, theta: ThetaMatrix, coeffs: Mapping[Sequence[int], complex] | None = None):
        self.theta = theta
        n = theta.n
        clean: dict[Index, complex] = {}
        for k, v in (coeffs or {}).items():
            kk = tuple(int(x) for x in k)
            if len(kk) != n:
                raise ValueError(f"index {kk} has wrong length for n={n}")
            clean[kk] = clean.get(kk, 0j) + complex(v)
        self._coeffs = _prune(clean, tolerance())

    # constructors
    @classmethod
    def monomial(cls, theta: ThetaMatrix, k: Sequence[int], coeff: complex = 1.0) -> NcTorusElement:
        return cls(theta, {tuple(k): coeff})

    @classmethod
    def one(cls, theta: ThetaMatrix) -> NcTorusElement:
        return cls.monomial(theta, (0,) * theta.n)

    @classmethod
    def zero(cls, theta: ThetaMatrix) -> NcTorusElement:
        return cls(theta, {})

    @property
    def coeffs(self) -> dict[Index, complex]:
        return dict(self._coeffs)

    @property
    def n(self) -> int:
        return self.theta.n

    def support(self) -> set[Index]:
        return set(self._coeffs)

    def coeff(self, k: Sequence[int]) -> complex:
        return self._coeffs.get(tuple(k), 0j)

    def is_zero(self) -> bool:
        return not self._coeffs

    def norm1(self) -> float:
        return float(sum(abs(v) for v in self._coeffs.values()))

    def _check(self, other: NcTorusElement) -> None:
        if self.theta != other.theta:
            raise ThetaMismatch("elements live over different theta")

    def __add__(self, other):
        if not isinstance(other, NcTorusElement):
            return NotImplemented
        self._check(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0j) + v
        return NcTorusElement(self.theta, out)

    def __neg__(self):
        return NcTorusElement(self.theta, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: complex) -> NcTorusElement:
        return NcTorusElement(self.theta, {k: c * v for k, v in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, NcTorusElement):
            return multiply(self, other)
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return NotImplemented

    def distance(self, other: NcTorusElement) -> float:
        """Max coefficient difference."""
        self._check(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self.coeff(k) - other.coeff(k)) for k in keys), default=0.0)

    def close_to(self, other: NcTorusElement, tol: float | None = None) -> bool:
        return self.distance(other) <= (tolerance() if tol is None else tol)

    def __eq__(self, other):
        if not isinstance(other, NcTorusElement):
            return NotImplemented
        return self.theta == other.theta and self.close_to(other)

    __hash__ = None

    def __repr__(self) -> str:
        terms = " + ".join(f"({v:.6g})U^{k}" for k, v in sorted(self._coeffs.items()))
        return f"NcTorusElement({terms or '0'})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "theta": self.theta.to_json(),
            "coeffs": [{"k": list(k), "re": v.real, "im": v.imag} for k, v in sorted(self._coeffs.items())],
        }

    @classmethod
    def from_json(cls, obj: Mapping, theta: ThetaMatrix | None = None) -> NcTorusElement:
        entries = obj.get("coeffs", [])
        if theta is None:
            if "theta" in obj:
                theta = ThetaMatrix(obj["theta"])
            else:
                n = obj.get("n")
                if n is None:
                    if not entries:
                        raise ValueError("cannot infer n from an empty element without theta")
                    n = len(entries[0]["k"])
                theta = ThetaMatrix.zero(int(n))
        coeffs: dict[Index, complex] = {}
        for c in entries:
            k = tuple(int(x) for x in c["k"])
            coeffs[k] = coeffs.get(k, 0j) + complex(float(c.get("re", 0.0)), float(c.get("im", 0.0)))
        return cls(theta, coeffs)


def _arrays(a: NcTorusElement) -> tuple[np.ndarray, np.ndarray]:
    keys = list(a._coeffs)
    K = np.array(keys, dtype=np.int64).reshape(len(keys), a.n)
    v = np.array([a._coeffs[k] for k in keys], dtype=complex)
    return K, v


def multiply(a: NcTorusElement, b: NcTorusElement) -> NcTorusElement:
    """Twisted convolution (ab)_m = sum_{k+l=m} e(sigma(k,l)) a_k b_l."""
    a._check(b)
    if a.is_zero() or b.is_zero():
        return NcTorusElement.zero(a.theta)
    K, va = _arrays(a)
    L, vb = _arrays(b)
    low = a.theta.lower_float()
    sig = K @ low @ L.T  # sigma(k, l) for every pair
    vals = (va[:, None] * vb[None, :]) * np.exp(2j * np.pi * sig)
    idx = (K[:, None, :] + L[None, :, :]).reshape(-1, a.n)
    # pack each multi-index into one integer so grouping is a 1-d bincount
    lo = idx.min(axis=0)
    span = idx.max(axis=0) - lo + 1
    radix = np.concatenate(([1], np.cumprod(span[::-1])[:-1]))[::-1]
    packed = (idx - lo) @ radix
    _, first, inverse = np.unique(packed, return_index=True, return_inverse=True)
    flat = vals.reshape(-1)
    acc = np.bincount(inverse, weights=flat.real) + 1j * np.bincount(inverse, weights=flat.imag)
    return NcTorusElement(a.theta, {tuple(idx[i].tolist()): c for i, c in zip(first, acc)})


def star(a: NcTorusElement) -> NcTorusElement:
    """Involution with (U_r)* = U_r^{-1}, conjugate linear and antimultiplicative.

    (U^k)* = U_n^{-k_n} ... U_1^{-k_1}; normal ordering that reversed
    word gives (U^k)* = e(sum_{r>s} theta_rs k_r k_s) U^{-k}.
    """
    out = {}
    for k, v in a._coeffs.items():
        ph = phase_to_scalar(star_phase(a.theta, k))
        out[tuple(-x for x in k)] = v.conjugate() * ph
    return NcTorusElement(a.theta, out)


def act_phase(t: Sequence[PhaseQ], k: Sequence[int]) -> PhaseQ:
    """Exact phase t.k of the torus point t on the mode U^k."""
    if len(t) != len(k):
        raise ValueError("torus point and multi-index differ in length")
    total = PhaseQ(0)
    for tr, kr in zip(t, k):
        total = total + tr * int(kr)
    return total


def act(t: Sequence[PhaseQ], a: NcTorusElement) -> NcTorusElement:
    if len(t) != a.n:
        raise ValueError("torus point dimension does not match the algebra")
    t = [x if isinstance(x, PhaseQ) else PhaseQ(x) for x in t]
    return NcTorusElement(a.theta, {k: v * phase_to_scalar(act_phase(t, k)) for k, v in a._coeffs.items()})


def isotypic_component(a: NcTorusElement, k: Sequence[int]) -> NcTorusElement:
    k = tuple(k)
    if k in a._coeffs:
        return NcTorusElement(a.theta, {k: a._coeffs[k]})
    return NcTorusElement.zero(a.theta)


# --------------------------------------------------------------------------
# Invertibility


@dataclass(frozen=True)
class InvertibilityVerdict:
    tag: str  # "invertible" | "zero" | "unknown"
    inverse: NcTorusElement | None = None
    certificate: str | None = None  # "monomial" | "neumann"
    residual: float | None = None
    reason: str = ""

    @property
    def invertible(self) -> bool:
        return self.tag == "invertible"

    def to_json(self) -> dict:
        out: dict = {"tag": self.tag}
        if self.certificate:
            out["certificate"] = {"kind": self.certificate, "residual": self.residual}
        if self.inverse is not None:
            out["inverse"] = self.inverse.to_json()
        if self.reason:
            out["reason"] = self.reason
        return out


RESIDUAL_BOUND = 1e-6
MAX_NEUMANN_TERMS = 400
MAX_NEUMANN_SUPPORT = 20000


def monomial_inverse(theta: ThetaMatrix, k: Sequence[int], lam: complex) -> NcTorusElement:
    """(lam U^k)^{-1} = lam^{-1} e(-sigma(k,-k)) U^{-k}."""
    minus = tuple(-x for x in k)
    ph = phase_to_scalar(-phase_cocycle(theta, k, minus))
    return NcTorusElement.monomial(theta, minus, ph / lam)


def _residual(a: NcTorusElement, inv: NcTorusElement) -> float:
    diff = multiply(a, inv) - NcTorusElement.one(a.theta)
    return diff.norm1()


def certify_invertible(a: NcTorusElement) -> InvertibilityVerdict:
    if a.is_zero():
        return InvertibilityVerdict("zero", reason="element is zero")
    theta = a.theta
    coeffs = a.coeffs
    kstar = max(coeffs, key=lambda k: (abs(coeffs[k]), tuple(-x for x in k)))
    lam = coeffs[kstar]
    u_inv = monomial_inverse(theta, kstar, lam)
    if len(coeffs) == 1:
        res = _residual(a, u_inv)
        if res <= RESIDUAL_BOUND:
            return InvertibilityVerdict("invertible", u_inv, "monomial", res)
        return InvertibilityVerdict("unknown", reason=f"monomial inverse failed its check ({res:.3g})")

    one = NcTorusElement.one(theta)
    x = multiply(u_inv, a) - one
    q = x.norm1()
    if q >= 1:
        return InvertibilityVerdict("unknown", reason=f"no Neumann normalization: |x|_1 = {q:.6g} >= 1")
    tau = tolerance()
    series = one
    power = one
    neg_x = -x
    terms = 0
    while q ** (terms + 1) / (1 - q) >= tau:
        terms += 1
        if terms > MAX_NEUMANN_TERMS:
            return InvertibilityVerdict("unknown", reason="Neumann series too long")
        power = multiply(power, neg_x)
        series = series + power
        if len(series.support()) > MAX_NEUMANN_SUPPORT:
            return InvertibilityVerdict("unknown", reason="Neumann series support too large")
    inv = multiply(series, u_inv)
    res = _residual(a, inv)
    if res <= RESIDUAL_BOUND:
        return InvertibilityVerdict("invertible", inv, "neumann", res)
    return InvertibilityVerdict("unknown", reason=f"Neumann residual {res:.3g} above bound")


# --------------------------------------------------------------------------
# Clock and shift oracle


def clock_shift(q: int, p: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Matrices (C^p, S) with C^p S = e(p/q) S C^p."""
    omega = np.exp(2j * np.pi / q)
    clock = np.diag([omega ** ((p * j) % q) for j in range(q)])
    shift = np.roll(np.eye(q, dtype=complex), 1, axis=0)  # S e_j = e_{j+1}
    return clock, shift


def rep_matrix(a: NcTorusElement) -> np.ndarray:
    """Finite-dimensional representation for n = 2, theta_12 = p/q.

    U_1 -> C^p (clock, C = diag(omega^j)), U_2 -> S (cyclic shift).
    """
    if a.n != 2:
        raise ValueError("rep_matrix supports n = 2 only")
    th = a.theta[0, 1]
    q = th.denominator
    p = th.numerator % q
    omega = np.exp(2j * np.pi / q)
    out = np.zeros((q, q), dtype=complex)
    j = np.arange(q)
    for (k1, k2), v in a._coeffs.items():
        diag = omega ** ((p * k1 * j) % q)
        # C^{p k1} S^{k2}: column j holds diag[(j + k2) mod q] at row j + k2
        rows = (j + k2) % q
        out[rows, j] += v * diag[rows]
    return out


def random_element(rng: np.random.Generator, theta: ThetaMatrix, radius: int = 3, size: int | None = None) -> NcTorusElement:
    n = theta.n
    grid = [tuple(int(x) for x in k) for k in np.ndindex(*([2 * radius + 1] * n))]
    grid = [tuple(x - radius for x in k) for k in grid]
    if size is not None and size < len(grid):
        pick = rng.choice(len(grid), size=size, replace=False)
        grid = [grid[i] for i in sorted(pick)]
    vals = rng.normal(size=len(grid)) + 1j * rng.normal(size=len(grid))
    return NcTorusElement(theta, dict(zip(grid, vals)))


def sum_elements(theta: ThetaMatrix, items: Iterable[NcTorusElement]) -> NcTorusElement:
    out = NcTorusElement.zero(theta)
    for x in items:
        out = out + x
    return out
