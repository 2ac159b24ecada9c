"""Spectra of section algebras and localization by restriction.

For a commutative finite-dimensional fiber the characters of the section
algebra are pairs (vertex, fiber character); over an edge (i, j) the sheet
a at i is glued to the sheet b at j with chi_b = chi_a o g_ij.  The result
is an m-sheeted covering of the base, m = dim of the semisimple quotient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import findim
from .bundle import (
    BundleError,
    ChernPrincipalBundle,
    FindimFiber,
    FlatAlgebraBundle,
    SectionFamily,
    global_section_basis,
    section_add,
    section_mul,
    section_scale,
    unit_section,
)
from .exactnum import tolerance
from .findim import Character, StructureAlgebra
from .simbase import (
    SimplicialBase,
    WeightFunction,
    connected_components,
    cycle_basis,
    loop_edges,
    support_subcomplex,
)

SEPARATION_TOL = 1e-6


@dataclass
class CoveringSpace:
    base: SimplicialBase
    sheets: int
    total: SimplicialBase
    projection: dict[int, tuple[int, int]]  # total vertex -> (base vertex, sheet)
    edge_perms: dict[tuple[int, int], tuple[int, ...]]
    monodromy: list[tuple[list[int], tuple[int, ...]]]
    characters: list[Character] = field(default_factory=list)

    @property
    def lift(self) -> dict[tuple[int, int], int]:
        return {vs: t for t, vs in self.projection.items()}

    def components(self) -> list[list[int]]:
        return connected_components(self.total)

    def loop_permutation(self, loop: Sequence[int]) -> tuple[int, ...]:
        """Sheet at the end of the loop for each starting sheet."""
        perm = list(range(self.sheets))
        for a, b in loop_edges(loop):
            p = self.edge_perms[(a, b)]
            perm = [p[x] for x in perm]
        return tuple(perm)

    def to_json(self) -> dict:
        return {
            "sheets": self.sheets,
            "total": self.total.to_json(),
            "projection": [list(self.projection[t]) for t in sorted(self.projection)],
            "monodromy": [{"loop": [list(e) for e in loop_edges(loop)], "perm": list(p)} for loop, p in self.monodromy],
            "components": len(self.components()),
        }

    def to_dot(self) -> str:
        lines = ["graph covering {"]
        for t, (v, a) in sorted(self.projection.items()):
            lines.append(f'  {t} [label="{v}.{a}"];')
        for a, b in self.total.edges:
            lines.append(f"  {a} -- {b};")
        lines.append("}")
        return "\n".join(lines)


def _fiber_algebra(B: FlatAlgebraBundle) -> StructureAlgebra:
    if not isinstance(B.fiber, FindimFiber):
        raise BundleError("spectrum covering needs a finite-dimensional fiber")
    A = B.fiber.algebra
    if not A.is_commutative():
        raise BundleError("spectrum covering needs a commutative fiber")
    return A


def spectrum_covering(B: FlatAlgebraBundle, seed: int = 0, root: int | None = None) -> CoveringSpace:
    A = _fiber_algebra(B)
    chars = findim.characters(A, seed)
    m = len(chars)
    K = B.base
    perms: dict[tuple[int, int], tuple[int, ...]] = {}
    for (i, j) in B.cocycle:
        # chi_b = chi_a o g_ij, i.e. b = perm(g_ji)[a]
        perms[(i, j)] = findim.character_permutation(A, B.g(j, i).matrix, chars)
    order = [(v, a) for v in K.vertices for a in range(m)]
    ident = {vs: n for n, vs in enumerate(order)}
    simplices = []
    for s in K.all_simplices():
        if len(s) == 1:
            continue
        v0 = s[0]
        for a in range(m):
            lifted = [ident[(v0, a)]]
            for w in s[1:]:
                lifted.append(ident[(w, perms[(v0, w)][a])])
            simplices.append(lifted)
    total = SimplicialBase(len(order), simplices)
    proj = {n: vs for vs, n in ident.items()}
    cov = CoveringSpace(K, m, total, proj, perms, [], list(chars))
    cov.monodromy = [(loop, cov.loop_permutation(loop)) for loop in cycle_basis(K, root)]
    _check_covering(cov)
    return cov


def _check_covering(cov: CoveringSpace) -> None:
    K, m = cov.base, cov.sheets
    counts: dict[int, int] = {}
    for v, a in cov.projection.values():
        counts[v] = counts.get(v, 0) + 1
    if any(counts.get(v, 0) != m for v in K.vertices):
        raise ArithmeticError("projection is not m-to-1")
    lifted: dict[tuple[int, int], int] = {}
    per_vertex: dict[tuple[int, tuple[int, int]], int] = {}
    for x, y in cov.total.edges:
        (v, _), (w, _) = cov.projection[x], cov.projection[y]
        if v == w:
            raise ArithmeticError("lifted edge inside one fiber")
        key = (min(v, w), max(v, w))
        lifted[key] = lifted.get(key, 0) + 1
        per_vertex[(x, key)] = per_vertex.get((x, key), 0) + 1
        per_vertex[(y, key)] = per_vertex.get((y, key), 0) + 1
    for e in K.edges:
        if lifted.get(e, 0) != m:
            raise ArithmeticError(f"edge {e} does not lift to {m} edges")
    for t, (v, _) in cov.projection.items():
        for e in K.edges:
            if v in e and per_vertex.get((t, e), 0) != 1:
                raise ArithmeticError("covering property fails")


# ----------------------------------------------------------------------
# Section characters


@dataclass(frozen=True)
class SectionCharacter:
    vertex: int
    sheet: int
    character: Character

    def __call__(self, s: SectionFamily) -> complex:
        return complex(self.character.as_array() @ np.asarray(s.values[self.vertex], dtype=complex))

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "sheet": self.sheet, **self.character.to_json()}


def random_global_sections(B: FlatAlgebraBundle, count: int, seed: int = 0) -> list[SectionFamily]:
    rng = np.random.default_rng(seed)
    basis = global_section_basis(B)
    out = []
    for _ in range(count):
        s = section_scale(0, unit_section(B))
        for b in basis:
            c = complex(rng.normal(), rng.normal())
            s = section_add(s, section_scale(c, b))
        out.append(s)
    return out


def section_characters(B: FlatAlgebraBundle, cov: CoveringSpace, samples: int = 100, seed: int = 0) -> list[SectionCharacter]:
    """One verified character per total-space vertex."""
    A = _fiber_algebra(B)
    chars = [SectionCharacter(v, a, cov.characters[a]) for _, (v, a) in sorted(cov.projection.items())]
    one = unit_section(B)
    pairs = list(zip(random_global_sections(B, samples, seed), random_global_sections(B, samples, seed + 1)))
    for chi in chars:
        if abs(chi(one) - 1) > SEPARATION_TOL:
            raise ArithmeticError(f"character at {chi.vertex}.{chi.sheet} is not unital")
        for s, t in pairs:
            if abs(chi(section_mul(s, t)) - chi(s) * chi(t)) > SEPARATION_TOL * max(1.0, abs(chi(s) * chi(t))):
                raise ArithmeticError(f"character at {chi.vertex}.{chi.sheet} is not multiplicative")
    # distinct sheets over one vertex are told apart by sections over that star alone
    for v in B.base.vertices:
        local = B.restrict(B.base.full_subcomplex([v]))
        tests = [SectionFamily(local, {v: np.array([complex(x) for x in A.basis_vector(i)])}) for i in range(A.dim)]
        here = [c for c in chars if c.vertex == v]
        for x in range(len(here)):
            for y in range(x + 1, len(here)):
                if not any(abs(here[x](s) - here[y](s)) > SEPARATION_TOL for s in tests):
                    raise ArithmeticError(f"sheets {x} and {y} over vertex {v} are not separated")
    return chars


# ----------------------------------------------------------------------
# Localization


def localization_spectrum(A: StructureAlgebra, a: Sequence, seed: int = 0) -> list[int]:
    """Indices of the characters with |chi(a)| > tau (the set D(a))."""
    if not A.is_commutative():
        raise findim.AlgebraError("localization spectrum needs a commutative algebra")
    chars = findim.characters(A, seed)
    vec = np.array([complex(x) for x in a], dtype=complex)
    return [i for i, chi in enumerate(chars) if abs(chi.as_array() @ vec) > tolerance()]


@dataclass
class LocalizedSystem:
    system: object | None  # FlatAlgebraBundle, ChernSystem or None when the support is empty
    weight: WeightFunction
    support: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return self.system is None

    def to_json(self) -> dict:
        out: dict = {"zero_system": self.is_zero, "support": list(self.support)}
        if self.system is not None:
            out["system"] = self.system.to_json()
        return out


@dataclass
class ChernSystem:
    """Quantum-torus bundle associated to a principal bundle given by its Chern cochain."""

    principal: ChernPrincipalBundle
    fiber: object  # NcTorusFiber with identity weights

    @property
    def base(self) -> SimplicialBase:
        return self.principal.base

    def restrict(self, sub: SimplicialBase) -> ChernSystem:
        return ChernSystem(self.principal.restrict(sub), self.fiber)

    def to_json(self) -> dict:
        return {"kind": "chern", "principal": self.principal.to_json(), "fiber": self.fiber.to_json()}


def localize_bundle_system(system, f: WeightFunction) -> LocalizedSystem:
    """Restrict base, transitions and action to the support of f."""
    if isinstance(system, FlatAlgebraBundle) and system.fiber.torus_rank > 0:
        system.require_equivariant()
    sub = support_subcomplex(system.base, f)
    if sub.is_empty():
        return LocalizedSystem(None, f, ())
    return LocalizedSystem(system.restrict(sub), f, sub.vertices)


def system_from_json(obj: Mapping):
    """Flat bundle JSON, or {"kind": "chern", "principal": ..., "fiber": ...}."""
    if obj.get("kind") == "chern":
        from .bundle import fiber_from_json

        return ChernSystem(ChernPrincipalBundle.from_json(obj["principal"]), fiber_from_json(obj["fiber"]))
    return FlatAlgebraBundle.from_json(obj)
