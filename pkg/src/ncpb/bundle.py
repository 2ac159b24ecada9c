"""Flat algebra bundles over simplicial bases.

A bundle is a fiber algebra plus one automorphism g_ij per ordered edge of
the base, satisfying g_ii = 1, g_ji = g_ij^{-1} and g_ij g_jk = g_ik on
triangles.  Sections are families (s_v) indexed by vertex stars with

    s_i = g_ij(s_j)    on every edge (i, j).

Fibers are either finitely supported quantum tori, acted on by lattice maps
with phases, or finite-dimensional algebras acted on by exact matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import findim
from .exactnum import (
    GaussRational,
    PhaseQ,
    det_int,
    mat_inverse,
    mat_mul,
    phase_to_scalar,
    solve_integer,
    tolerance,
)
from .findim import StructureAlgebra
from .nctorus import NcTorusElement, ThetaMatrix, act_phase
from .simbase import (
    SimplicialBase,
    boundary_matrix,
    cycle_basis,
    cycle_space_basis,
    is_simplicial,
    loop_edges,
    star_cover,
)

G = GaussRational


class BundleError(ValueError):
    pass


def _phase(x) -> PhaseQ:
    return x if isinstance(x, PhaseQ) else PhaseQ(x)


def torus_point(values: Iterable) -> tuple[PhaseQ, ...]:
    return tuple(_phase(x) for x in values)


# ----------------------------------------------------------------------
# Fiber automorphisms


def _int_matrix(M) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in M)


def _int_inverse(M) -> tuple[tuple[int, ...], ...]:
    inv = mat_inverse([[Fraction(x) for x in row] for row in M])
    if any(x.denominator != 1 for row in inv for x in row):
        raise BundleError("lattice map is not unimodular")
    return tuple(tuple(int(x) for x in row) for row in inv)


def _matvec(M, k) -> tuple[int, ...]:
    return tuple(sum(a * b for a, b in zip(row, k)) for row in M)


@dataclass(frozen=True)
class PhaseLattice:
    """U^k -> e(lam.k + c_M(k)) U^{Mk} on a quantum torus with parameter theta.

    With L the strictly lower part of theta and D = M^T L M - L, the
    quadratic corrector c_M(k) = sum_{r>s} D_rs k_r k_s + sum_r D_rr k_r(k_r-1)/2
    makes the map multiplicative whenever M^T theta M = theta mod Z.
    Note c_M(e_r) = 0, so lam_r is the phase on U_r.
    """

    M: tuple[tuple[int, ...], ...]
    lam: tuple[PhaseQ, ...]
    theta: ThetaMatrix

    def __post_init__(self):
        n = self.theta.n
        object.__setattr__(self, "M", _int_matrix(self.M))
        object.__setattr__(self, "lam", torus_point(self.lam))
        if len(self.M) != n or any(len(r) != n for r in self.M) or len(self.lam) != n:
            raise BundleError("lattice map has wrong size")
        if abs(det_int(self.M)) != 1:
            raise BundleError("lattice map must have determinant +-1")
        th = self.theta.entries
        for r in range(n):
            for s in range(n):
                v = sum(self.M[a][r] * th[a][b] * self.M[b][s] for a in range(n) for b in range(n))
                if (v - th[r][s]).denominator != 1:
                    raise BundleError("lattice map does not preserve theta modulo Z")
        object.__setattr__(self, "_corr", self._D())

    @classmethod
    def identity(cls, theta: ThetaMatrix) -> PhaseLattice:
        n = theta.n
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), (PhaseQ(0),) * n, theta)

    @classmethod
    def translation(cls, theta: ThetaMatrix, lam) -> PhaseLattice:
        return cls(cls.identity(theta).M, torus_point(lam), theta)

    def _D(self):
        """D = M^T L M - L, or None when it vanishes."""
        n = self.theta.n
        L = [[self.theta.entries[r][s] if r > s else Fraction(0) for s in range(n)] for r in range(n)]
        M = self.M
        D = [
            [sum(M[a][r] * L[a][b] * M[b][s] for a in range(n) for b in range(n)) - L[r][s] for s in range(n)]
            for r in range(n)
        ]
        return D if any(x for row in D for x in row) else None

    def corrector(self, k: Sequence[int]) -> PhaseQ:
        D = self._corr
        if D is None:
            return PhaseQ(0)
        n = len(k)
        total = Fraction(0)
        for r in range(n):
            total += D[r][r] * Fraction(k[r] * (k[r] - 1), 2)
            for s in range(r):
                total += D[r][s] * k[r] * k[s]
        return PhaseQ(total)

    def phase(self, k: Sequence[int]) -> PhaseQ:
        return act_phase(self.lam, k) + self.corrector(k)

    def image_index(self, k: Sequence[int]) -> tuple[int, ...]:
        return _matvec(self.M, k)

    def is_identity_lattice(self) -> bool:
        return self.M == PhaseLattice.identity(self.theta).M

    def apply(self, a: NcTorusElement) -> NcTorusElement:
        out = {}
        for k, v in a.coeffs.items():
            out[self.image_index(k)] = v * phase_to_scalar(self.phase(k))
        return NcTorusElement(a.theta, out)

    def compose(self, other: PhaseLattice) -> PhaseLattice:
        """self o other (other applied first)."""
        n = self.theta.n
        M = tuple(tuple(sum(self.M[i][t] * other.M[t][j] for t in range(n)) for j in range(n)) for i in range(n))
        lam = []
        for r in range(n):
            e = tuple(int(i == r) for i in range(n))
            lam.append(other.phase(e) + self.phase(other.image_index(e)))
        return PhaseLattice(M, tuple(lam), self.theta)

    def inverse(self) -> PhaseLattice:
        n = self.theta.n
        Minv = _int_inverse(self.M)
        lam = []
        for r in range(n):
            e = tuple(int(i == r) for i in range(n))
            lam.append(-self.phase(_matvec(Minv, e)))
        return PhaseLattice(Minv, tuple(lam), self.theta)

    def same(self, other) -> bool:
        return isinstance(other, PhaseLattice) and self.M == other.M and self.lam == other.lam

    def to_json(self) -> dict:
        return {"kind": "phase-lattice", "M": [list(r) for r in self.M], "lambda": [x.to_json() for x in self.lam]}


@dataclass(frozen=True)
class LinearAuto:
    """Exact matrix over Q(i); column j is the image of basis vector j."""

    matrix: tuple[tuple[GaussRational, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(G.coerce(x) for x in row) for row in self.matrix))

    @classmethod
    def identity(cls, d: int) -> LinearAuto:
        return cls(tuple(tuple(G(int(i == j)) for j in range(d)) for i in range(d)))

    def compose(self, other: LinearAuto) -> LinearAuto:
        return LinearAuto(tuple(map(tuple, mat_mul(self.matrix, other.matrix))))

    def inverse(self) -> LinearAuto:
        return LinearAuto(tuple(map(tuple, mat_inverse(self.matrix, G(0), G(1)))))

    def same(self, other) -> bool:
        return isinstance(other, LinearAuto) and self.matrix == other.matrix

    def as_array(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.matrix], dtype=complex)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.as_array() @ np.asarray(x, dtype=complex)

    def to_json(self) -> dict:
        return {"kind": "linear", "matrix": [[x.to_json() for x in row] for row in self.matrix]}


FiberAutomorphism = PhaseLattice | LinearAuto


# ----------------------------------------------------------------------
# Fibers


class NcTorusFiber:
    """Quantum torus fiber; the torus T^r acts on U^k through the weight W k."""

    kind = "nctorus"

    def __init__(self, theta: ThetaMatrix, weights: Sequence[Sequence[int]] | None = None):
        self.theta = theta
        n = theta.n
        self.W = _int_matrix(weights) if weights is not None else tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        if any(len(r) != n for r in self.W):
            raise BundleError("weight matrix must have n columns")

    @property
    def n(self) -> int:
        return self.theta.n

    @property
    def torus_rank(self) -> int:
        return len(self.W)

    def weight(self, k: Sequence[int]) -> tuple[int, ...]:
        return _matvec(self.W, k)

    def identity(self) -> PhaseLattice:
        return PhaseLattice.identity(self.theta)

    def is_equivariant(self, g: PhaseLattice) -> bool:
        n = self.n
        WM = tuple(tuple(sum(self.W[i][t] * g.M[t][j] for t in range(n)) for j in range(n)) for i in range(len(self.W)))
        return WM == self.W

    def check_auto(self, g) -> PhaseLattice:
        if not isinstance(g, PhaseLattice) or g.theta != self.theta:
            raise BundleError("quantum torus fibers need phase-lattice automorphisms over the same theta")
        return g

    def torus_auto(self, t: Sequence) -> PhaseLattice:
        """The automorphism by which t in T^r acts."""
        t = torus_point(t)
        lam = []
        for j in range(self.n):
            ph = PhaseQ(0)
            for r in range(self.torus_rank):
                ph = ph + t[r] * self.W[r][j]
            lam.append(ph)
        return PhaseLattice.translation(self.theta, lam)

    def one(self):
        return NcTorusElement.one(self.theta)

    def zero(self):
        return NcTorusElement.zero(self.theta)

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def scale(self, c, x):
        return x.scale(c)

    def apply(self, g, x):
        return g.apply(x)

    def close(self, x, y, tol=None) -> bool:
        return x.close_to(y, tol)

    def act(self, t, x):
        return self.torus_auto(t).apply(x)

    def isotypic(self, x, r: Sequence[int]):
        r = tuple(r)
        return NcTorusElement(self.theta, {k: v for k, v in x.coeffs.items() if self.weight(k) == r})

    def degrees(self, x) -> set[tuple[int, ...]]:
        return {self.weight(k) for k in x.support()}

    def value_to_json(self, x):
        return [{"k": list(k), "re": v.real, "im": v.imag} for k, v in sorted(x.coeffs.items())]

    def value_from_json(self, obj):
        if isinstance(obj, Mapping):
            obj = obj.get("coeffs", [])
        return NcTorusElement.from_json({"coeffs": obj}, self.theta)

    def auto_from_json(self, obj) -> PhaseLattice:
        if obj.get("kind", "phase-lattice") != "phase-lattice":
            raise BundleError("expected a phase-lattice automorphism")
        return PhaseLattice(obj["M"], [PhaseQ.from_json(x) for x in obj["lambda"]], self.theta)

    def to_json(self) -> dict:
        return {"kind": "nctorus", "theta": self.theta.to_json(), "weights": [list(r) for r in self.W]}

    def __eq__(self, other):
        return isinstance(other, NcTorusFiber) and self.theta == other.theta and self.W == other.W

    def __hash__(self):
        return hash((self.theta, self.W))


class FindimFiber:
    """Finite-dimensional fiber; sections carry complex coordinate vectors."""

    kind = "findim"

    def __init__(self, algebra: StructureAlgebra):
        self.algebra = algebra
        d = algebra.dim
        self.ctensor = np.array(
            [[[complex(x) for x in algebra.constants[i][j]] for j in range(d)] for i in range(d)], dtype=complex
        ).reshape(d, d, d)
        self.unit = np.array([complex(x) for x in algebra.unit], dtype=complex)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def torus_rank(self) -> int:
        return self.algebra.torus_rank

    def identity(self) -> LinearAuto:
        return LinearAuto.identity(self.dim)

    def is_equivariant(self, g: LinearAuto) -> bool:
        return self.algebra.weights is not None and findim.preserves_weights(self.algebra, g.matrix)

    def check_auto(self, g) -> LinearAuto:
        if not isinstance(g, LinearAuto):
            raise BundleError("finite-dimensional fibers need linear automorphisms")
        findim.check_automorphism(self.algebra, g.matrix)
        return g

    def torus_auto(self, t: Sequence) -> LinearAuto:
        if self.algebra.weights is None:
            raise BundleError("fiber carries no torus action")
        t = torus_point(t)
        diag = []
        for w in self.algebra.weights:
            ph = act_phase(t, w)
            if ph.value * 4 % 1 != 0:
                raise BundleError("only quarter-turn phases are exact over Q(i)")
            diag.append(G.coerce(phase_to_scalar(ph)))
        d = self.dim
        return LinearAuto(tuple(tuple(diag[i] if i == j else G(0) for j in range(d)) for i in range(d)))

    def one(self):
        return self.unit.copy()

    def zero(self):
        return np.zeros(self.dim, dtype=complex)

    def add(self, x, y):
        return np.asarray(x) + np.asarray(y)

    def mul(self, x, y):
        return np.einsum("i,j,ijk->k", x, y, self.ctensor)

    def scale(self, c, x):
        return c * np.asarray(x)

    def apply(self, g, x):
        return g.apply(x)

    def close(self, x, y, tol=None) -> bool:
        t = tolerance() if tol is None else tol
        return bool(np.abs(np.asarray(x) - np.asarray(y)).max(initial=0.0) <= t)

    def act(self, t, x):
        d = findim.torus_action_matrix(self.algebra, torus_point(t))
        return d @ np.asarray(x, dtype=complex)

    def isotypic(self, x, r: Sequence[int]):
        if self.algebra.weights is None:
            raise BundleError("fiber carries no torus action")
        mask = np.array([w == tuple(r) for w in self.algebra.weights])
        return np.where(mask, np.asarray(x, dtype=complex), 0)

    def degrees(self, x) -> set[tuple[int, ...]]:
        w = self.algebra.weights or ()
        return {w[i] for i, v in enumerate(x) if abs(v) > tolerance()}

    def value_to_json(self, x):
        return [{"re": float(v.real), "im": float(v.imag)} for v in np.asarray(x, dtype=complex)]

    def value_from_json(self, obj):
        return np.array([complex(float(c.get("re", 0)), float(c.get("im", 0))) if isinstance(c, Mapping) else complex(c) for c in obj])

    def auto_from_json(self, obj) -> LinearAuto:
        if obj.get("kind", "linear") != "linear":
            raise BundleError("expected a linear automorphism")
        return LinearAuto(tuple(tuple(G.coerce(x) for x in row) for row in obj["matrix"]))

    def to_json(self) -> dict:
        return {"kind": "findim", "algebra": self.algebra.to_json()}

    def __eq__(self, other):
        return isinstance(other, FindimFiber) and self.algebra == other.algebra

    def __hash__(self):
        return hash(self.algebra)


Fiber = NcTorusFiber | FindimFiber


def fiber_from_json(obj: Mapping) -> Fiber:
    kind = obj.get("kind")
    if kind == "nctorus":
        return NcTorusFiber(ThetaMatrix(obj["theta"]), obj.get("weights"))
    if kind == "findim":
        return FindimFiber(StructureAlgebra.from_json(obj["algebra"]))
    raise BundleError(f"unknown fiber kind {kind!r}")


# ----------------------------------------------------------------------
# Flat bundles


CONVENTION = "s_i = g_ij(s_j)"


class FlatAlgebraBundle:
    """Constant transition cocycle over the star cover of a simplicial base."""

    def __init__(self, base: SimplicialBase, fiber: Fiber, cocycle: Mapping[tuple[int, int], FiberAutomorphism] | None = None):
        self.base = base
        self.fiber = fiber
        self.cover = star_cover(base) if not base.is_empty() else None
        g: dict[tuple[int, int], FiberAutomorphism] = {}
        for (i, j), auto in (cocycle or {}).items():
            if not base.has((i, j)) or i == j:
                raise BundleError(f"transition on ({i},{j}) but the stars do not overlap")
            g[(i, j)] = fiber.check_auto(auto)
        for a, b in base.edges:
            if (a, b) in g and (b, a) in g:
                if not g[(a, b)].compose(g[(b, a)]).same(fiber.identity()):
                    raise BundleError(f"g_{a}{b} and g_{b}{a} are not inverse")
            elif (a, b) in g:
                g[(b, a)] = g[(a, b)].inverse()
            elif (b, a) in g:
                g[(a, b)] = g[(b, a)].inverse()
            else:
                g[(a, b)] = fiber.identity()
                g[(b, a)] = fiber.identity()
        self.cocycle = g
        for i, j, k in base.triangles:
            if not g[(i, j)].compose(g[(j, k)]).same(g[(i, k)]):
                raise BundleError(f"cocycle identity fails on triangle {(i, j, k)}")
        self.equivariant = fiber.torus_rank > 0 and all(fiber.is_equivariant(x) for x in g.values())

    def g(self, i: int, j: int) -> FiberAutomorphism:
        if i == j:
            return self.fiber.identity()
        return self.cocycle[(i, j)]

    def require_equivariant(self) -> None:
        if not self.equivariant:
            raise BundleError("cocycle is not torus-equivariant")

    def holonomy(self, loop: Sequence[int]) -> FiberAutomorphism:
        """g_{v0 v1} o g_{v1 v2} o ... o g_{v_{m-1} v0} for a closed walk."""
        h = self.fiber.identity()
        for a, b in loop_edges(loop):
            h = h.compose(self.g(a, b))
        return h

    def holonomies(self, root: int | None = None) -> list[tuple[list[int], FiberAutomorphism]]:
        return [(loop, self.holonomy(loop)) for loop in cycle_basis(self.base, root)]

    def restrict(self, sub: SimplicialBase) -> FlatAlgebraBundle:
        keep = {e: self.cocycle[e] for e in self.cocycle if sub.has(e)}
        return FlatAlgebraBundle(sub, self.fiber, keep)

    def gauge(self, kappa: Mapping[int, FiberAutomorphism]) -> FlatAlgebraBundle:
        """Cocycle kappa_i g_ij kappa_j^{-1}; sections map by s_i -> kappa_i(s_i)."""
        ident = self.fiber.identity()
        k = {v: kappa.get(v, ident) for v in self.base.vertices}
        new = {(i, j): k[i].compose(g).compose(k[j].inverse()) for (i, j), g in self.cocycle.items() if i < j}
        return FlatAlgebraBundle(self.base, self.fiber, new)

    def relabel(self, mapping: Mapping[int, int]) -> FlatAlgebraBundle:
        new = {(mapping[i], mapping[j]): g for (i, j), g in self.cocycle.items()}
        return FlatAlgebraBundle(self.base.relabel(mapping), self.fiber, new)

    def is_trivial_cocycle(self) -> bool:
        ident = self.fiber.identity()
        return all(g.same(ident) for g in self.cocycle.values())

    def to_json(self) -> dict:
        ident = self.fiber.identity()
        entries = [
            {"i": i, "j": j, "auto": g.to_json()}
            for (i, j), g in sorted(self.cocycle.items())
            if i < j and not g.same(ident)
        ]
        return {"base": self.base.to_json(), "fiber": self.fiber.to_json(), "cocycle": entries, "convention": CONVENTION}

    @classmethod
    def from_json(cls, obj: Mapping) -> FlatAlgebraBundle:
        base = SimplicialBase.from_json(obj["base"])
        fiber = fiber_from_json(obj["fiber"])
        coc = {(int(e["i"]), int(e["j"])): fiber.auto_from_json(e["auto"]) for e in obj.get("cocycle", [])}
        return cls(base, fiber, coc)


def trivial_bundle(base: SimplicialBase, fiber: Fiber) -> FlatAlgebraBundle:
    return FlatAlgebraBundle(base, fiber, {})


# ----------------------------------------------------------------------
# Sections


class SectionFamily:
    def __init__(self, bundle: FlatAlgebraBundle, values: Mapping[int, object], check: bool = True, tol: float | None = None):
        self.bundle = bundle
        missing = set(bundle.base.vertices) - set(values)
        if missing:
            raise BundleError(f"section has no value on stars {sorted(missing)}")
        self.values = {v: values[v] for v in bundle.base.vertices}
        if check:
            bad = self.incompatible_edge(tol)
            if bad is not None:
                raise BundleError(f"section is not compatible on edge {bad}")

    def incompatible_edge(self, tol: float | None = None):
        B = self.bundle
        for i, j in B.cocycle:
            if not B.fiber.close(self.values[i], B.fiber.apply(B.g(i, j), self.values[j]), tol):
                return (i, j)
        return None

    def is_compatible(self, tol: float | None = None) -> bool:
        return self.incompatible_edge(tol) is None

    def __getitem__(self, v):
        return self.values[v]

    def to_json(self) -> dict:
        f = self.bundle.fiber
        return {"values": [{"vertex": v, "value": f.value_to_json(x)} for v, x in sorted(self.values.items())]}

    @classmethod
    def from_json(cls, bundle: FlatAlgebraBundle, obj: Mapping) -> SectionFamily:
        f = bundle.fiber
        return cls(bundle, {int(e["vertex"]): f.value_from_json(e["value"]) for e in obj["values"]})


def _patchwise(B, op, *families, check=False):
    return SectionFamily(B, {v: op(*(s.values[v] for s in families)) for v in B.base.vertices}, check=check)


def section_add(s: SectionFamily, t: SectionFamily, check: bool = False) -> SectionFamily:
    B = s.bundle
    return _patchwise(B, B.fiber.add, s, t, check=check)


def section_mul(s: SectionFamily, t: SectionFamily, check: bool = False) -> SectionFamily:
    B = s.bundle
    return _patchwise(B, B.fiber.mul, s, t, check=check)


def section_scale(c: complex, s: SectionFamily, check: bool = False) -> SectionFamily:
    B = s.bundle
    return _patchwise(B, lambda x: B.fiber.scale(c, x), s, check=check)


def unit_section(B: FlatAlgebraBundle) -> SectionFamily:
    return SectionFamily(B, {v: B.fiber.one() for v in B.base.vertices})


def zero_section(B: FlatAlgebraBundle) -> SectionFamily:
    return SectionFamily(B, {v: B.fiber.zero() for v in B.base.vertices})


def sections_close(s: SectionFamily, t: SectionFamily, tol: float | None = None) -> bool:
    f = s.bundle.fiber
    return all(f.close(s.values[v], t.values[v], tol) for v in s.bundle.base.vertices)


def torus_action_on_sections(B: FlatAlgebraBundle, t: Sequence, s: SectionFamily) -> SectionFamily:
    B.require_equivariant()
    return SectionFamily(B, {v: B.fiber.act(t, x) for v, x in s.values.items()}, check=False)


def isotypic_sections(B: FlatAlgebraBundle, s: SectionFamily, r: Sequence[int]) -> SectionFamily:
    B.require_equivariant()
    return SectionFamily(B, {v: B.fiber.isotypic(x, r) for v, x in s.values.items()}, check=False)


def transport(B: FlatAlgebraBundle, root_value, root: int | None = None) -> SectionFamily | None:
    """Spread a value at the root along a spanning tree; None if it is not a global section."""
    from .simbase import spanning_forest

    forest = spanning_forest(B.base, root)
    if len(forest.roots) != 1:
        raise BundleError("transport needs a connected base")
    vals = {}
    for v in forest.order:
        p = forest.parent[v]
        vals[v] = root_value if p is None else B.fiber.apply(B.g(v, p), vals[p])
    s = SectionFamily(B, vals, check=False)
    return s if s.is_compatible(1e-7) else None


def global_section_basis(B: FlatAlgebraBundle) -> list[SectionFamily]:
    """Exact basis of compatible families, finite-dimensional fiber only."""
    from .exactnum import nullspace
    from .simbase import connected_components, spanning_forest

    if not isinstance(B.fiber, FindimFiber):
        raise BundleError("global section basis needs a finite-dimensional fiber")
    d = B.fiber.dim
    out = []
    forest = spanning_forest(B.base)
    comps = connected_components(B.base)
    for comp, root in zip(comps, forest.roots):
        sub = B.restrict(B.base.full_subcomplex(comp))
        rows = []
        for loop, h in sub.holonomies(root):
            H = h.matrix
            rows.extend([[H[i][j] - G(int(i == j)) for j in range(d)] for i in range(d)])
        basis = nullspace(rows, d, G(0), G(1)) if rows else [[G(int(i == j)) for j in range(d)] for i in range(d)]
        for vec in basis:
            val = np.array([complex(x) for x in vec])
            vals = {v: np.zeros(d, dtype=complex) for v in B.base.vertices}
            for v in forest.order:
                if v not in comp:
                    continue
                p = forest.parent[v]
                vals[v] = val if p is None else B.g(v, p).apply(vals[p])
            out.append(SectionFamily(B, vals))
    return out


# ----------------------------------------------------------------------
# Associated and pullback bundles


def associated_bundle(
    base: SimplicialBase, principal: Mapping[tuple[int, int], Sequence], fiber: Fiber
) -> FlatAlgebraBundle:
    """Transitions g_ij = action of the torus value t_ij on the fiber."""
    r = fiber.torus_rank
    t: dict[tuple[int, int], tuple[PhaseQ, ...]] = {}
    for (i, j), val in principal.items():
        val = torus_point(val)
        if len(val) != r:
            raise BundleError("principal values must lie in the acting torus")
        t[(i, j)] = val
        t.setdefault((j, i), tuple(-x for x in val))
    zero = (PhaseQ(0),) * r
    for i, j, k in base.triangles:
        for a, b, c in ((i, j, k),):
            s = [x + y - z for x, y, z in zip(t.get((a, b), zero), t.get((b, c), zero), t.get((a, c), zero))]
            if any(not x.is_zero() for x in s):
                raise BundleError(f"principal cocycle fails on triangle {(a, b, c)}")
    coc = {e: fiber.torus_auto(v) for e, v in t.items() if e[0] < e[1]}
    return FlatAlgebraBundle(base, fiber, coc)


def pullback_bundle(B: FlatAlgebraBundle, L: SimplicialBase, vertex_map: Mapping[int, int]) -> FlatAlgebraBundle:
    if not is_simplicial(vertex_map, L, B.base):
        raise BundleError("vertex map is not simplicial")
    coc = {}
    for a, b in L.edges:
        fa, fb = vertex_map[a], vertex_map[b]
        if fa != fb:
            coc[(a, b)] = B.g(fa, fb)
    return FlatAlgebraBundle(L, B.fiber, coc)


# ----------------------------------------------------------------------
# Chern model of principal torus bundles


class ChernPrincipalBundle:
    """Integer 2-cochain with values in Z^n on the positively oriented triangles."""

    def __init__(self, base: SimplicialBase, n: int, chern: Mapping[Sequence[int], Sequence[int]] | None = None):
        self.base = base
        self.n = int(n)
        vals: dict[tuple[int, ...], tuple[int, ...]] = {}
        for tri, v in (chern or {}).items():
            key = tuple(sorted(tri))
            if len(key) != 3 or not base.has(key):
                raise BundleError(f"{tri} is not a triangle of the base")
            v = tuple(int(x) for x in v)
            if len(v) != self.n:
                raise BundleError("Chern values must have n components")
            # an odd permutation of the listed vertices flips orientation
            sign = _perm_sign(tuple(tri), key)
            vals[key] = tuple(a + sign * b for a, b in zip(vals.get(key, (0,) * self.n), v))
        self.chern = {k: v for k, v in vals.items() if any(v)}
        if base.simplices(3):
            d3 = boundary_matrix(base, 3)
            tris = base.triangles
            for r in range(self.n):
                c = [self.chern.get(t, (0,) * self.n)[r] for t in tris]
                for col in range(len(base.simplices(3))):
                    if sum(d3[i][col] * c[i] for i in range(len(tris))):
                        raise BundleError("Chern cochain is not closed")

    def component(self, r: int) -> list[int]:
        return [self.chern.get(t, (0,) * self.n)[r] for t in self.base.triangles]

    def restrict(self, sub: SimplicialBase) -> ChernPrincipalBundle:
        return ChernPrincipalBundle(sub, self.n, {t: v for t, v in self.chern.items() if sub.has(t)})

    def add_coboundary(self, b: Mapping[tuple[int, int], Sequence[int]]) -> ChernPrincipalBundle:
        """c + delta(b) for an integer 1-cochain b on sorted edges."""
        new = {t: list(v) for t, v in self.chern.items()}
        for t in self.base.triangles:
            i, j, k = t
            # (delta b)(ijk) = b(jk) - b(ik) + b(ij)
            for edge, sign in (((j, k), 1), ((i, k), -1), ((i, j), 1)):
                if edge in b:
                    row = new.setdefault(t, [0] * self.n)
                    for r in range(self.n):
                        row[r] += sign * int(b[edge][r])
        return ChernPrincipalBundle(self.base, self.n, new)

    def relabel(self, mapping: Mapping[int, int]) -> ChernPrincipalBundle:
        return ChernPrincipalBundle(self.base.relabel(mapping), self.n, {tuple(mapping[v] for v in t): val for t, val in self.chern.items()})

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "n": self.n,
            "triangles": [{"simplex": list(t), "value": list(v)} for t, v in sorted(self.chern.items())],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> ChernPrincipalBundle:
        base = SimplicialBase.from_json(obj["base"])
        return cls(base, obj["n"], {tuple(e["simplex"]): e["value"] for e in obj.get("triangles", [])})


def _perm_sign(listed: tuple[int, ...], sorted_key: tuple[int, ...]) -> int:
    perm = [sorted_key.index(v) for v in listed]
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class ChernVerdict:
    trivial: bool
    trivializer: dict | None  # edge -> Z^n with delta(b) = c
    pairings: tuple[tuple[int, ...], ...]  # per H_2 basis cycle, one Z^n value
    certificate: tuple | None  # per component: rational y with y.delta integral, y.c not

    def to_json(self) -> dict:
        out: dict = {"trivial": self.trivial}
        if self.trivializer is not None:
            out["trivializer"] = [{"edge": list(e), "value": list(v)} for e, v in sorted(self.trivializer.items()) if any(v)]
        out["h2_pairings"] = [list(p) for p in self.pairings]
        if self.certificate is not None:
            out["farkas"] = [
                None if y is None else [x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}" for x in y]
                for y in self.certificate
            ]
        return out


def chern_is_trivial(P: ChernPrincipalBundle) -> ChernVerdict:
    K = P.base
    edges = K.edges
    tris = K.triangles
    d2 = boundary_matrix(K, 2)  # rows edges, columns triangles
    delta = [[d2[e][t] for e in range(len(edges))] for t in range(len(tris))]  # C^1 -> C^2
    cycles = cycle_space_basis(K, 2)
    pairings = tuple(tuple(sum(z[t] * P.component(r)[t] for t in range(len(tris))) for r in range(P.n)) for z in cycles)
    if not tris:
        return ChernVerdict(True, {}, pairings, None)
    sols = [solve_integer(delta, P.component(r), len(edges)) for r in range(P.n)]
    if all(s.feasible for s in sols):
        b = {e: tuple(s.particular[idx] for s in sols) for idx, e in enumerate(edges)}
        if P.add_coboundary({e: tuple(-x for x in v) for e, v in b.items()}).chern:
            raise ArithmeticError("trivializing cochain failed to verify")
        return ChernVerdict(True, b, pairings, None)
    return ChernVerdict(False, None, pairings, tuple(s.certificate for s in sols))
