"""Prebuilt torus systems: bare quantum tori, flat quantum-torus bundles,
pullbacks, equivariant products, the Heisenberg bundle and a Chern-class
quantum-torus bundle; plus a few finite-dimensional bundles for spectra."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from . import findim, simbase
from .bundle import (
    ChernPrincipalBundle,
    FindimFiber,
    FlatAlgebraBundle,
    LinearAuto,
    NcTorusFiber,
    PhaseLattice,
    associated_bundle,
    pullback_bundle,
)
from .exactnum import PhaseQ
from .nctorus import ThetaMatrix
from .simbase import SimplicialBase, cycle_space_basis
from .speclocal import ChernSystem


def _theta(theta, n: int = 2) -> ThetaMatrix:
    if isinstance(theta, ThetaMatrix):
        return theta
    if isinstance(theta, (list, tuple)):
        return ThetaMatrix(theta)
    if n != 2:
        raise ValueError("a scalar theta needs n = 2")
    return ThetaMatrix.two(theta)


def nctorus(theta="1/3", n: int = 2) -> FlatAlgebraBundle:
    """Bare quantum torus: the trivial bundle over one point."""
    if n != 2 and theta in (0, "0"):
        th = ThetaMatrix.zero(n)
    else:
        th = _theta(theta, n)
    return FlatAlgebraBundle(simbase.point(), NcTorusFiber(th), {})


def qt_bundle(
    base: SimplicialBase | None = None,
    cocycle: Mapping[tuple[int, int], Sequence] | None = None,
    theta="1/3",
) -> FlatAlgebraBundle:
    """Quantum-torus bundle whose transitions are torus translations."""
    base = base if base is not None else simbase.torus(3, 3)
    fiber = NcTorusFiber(_theta(theta))
    return associated_bundle(base, dict(cocycle or {}), fiber)


def circle_qt_bundle(holonomy=("1/3", "0"), theta="1/3", vertices: int = 6) -> FlatAlgebraBundle:
    """Flat quantum-torus bundle over a circle with one translated overlap."""
    C = simbase.circle(vertices)
    return qt_bundle(C, {(vertices - 1, 0): holonomy}, theta)


def pullback(holonomy=("1/2", "0"), theta="1/3", sheets: int = 2, vertices: int = 3) -> FlatAlgebraBundle:
    """Pull a circle bundle with the given holonomy back along a connected covering.

    The pulled-back holonomy is the original one times the covering degree,
    so holonomy 1/2 along a double cover becomes trivial.
    """
    down = circle_qt_bundle(holonomy, theta, vertices)
    up = simbase.circle(vertices * sheets)
    return pullback_bundle(down, up, {v: v % vertices for v in up.vertices})


def equivariant(
    theta_prime="1/3",
    action: Sequence[Sequence[int]] = ((1, 0),),
    holonomy=("0",),
    vertices: int = 6,
) -> FlatAlgebraBundle:
    """Fiber C(T^k) (x) T^m_theta' with the torus acting diagonally.

    The fiber is a quantum torus of rank k + m with theta = 0 (+) theta' and
    weight matrix [I_k | action]; transitions come from a principal T^k
    cocycle over a circle.
    """
    tp = _theta(theta_prime)
    m = tp.n
    k = len(action)
    n = k + m
    entries = [[Fraction(0)] * n for _ in range(n)]
    for r in range(m):
        for s in range(m):
            entries[k + r][k + s] = tp.entries[r][s]
    W = [[int(i == j) for j in range(k)] + list(action[i]) for i in range(k)]
    fiber = NcTorusFiber(ThetaMatrix(entries), W)
    C = simbase.circle(vertices)
    return associated_bundle(C, {(vertices - 1, 0): holonomy}, fiber)


HEISENBERG_M = ((1, 1), (0, 1))


def heisenberg(vertices: int = 6) -> FlatAlgebraBundle:
    """Commutative 2-torus over a circle, glued by (m1, m2) -> (m1 + m2, m2).

    The circle group acts on the second coordinate only (weights [0, 1]).
    """
    th = ThetaMatrix.zero(2)
    fiber = NcTorusFiber(th, [[0, 1]])
    C = simbase.circle(vertices)
    g = PhaseLattice(HEISENBERG_M, (PhaseQ(0), PhaseQ(0)), th)
    return FlatAlgebraBundle(C, fiber, {(vertices - 1, 0): g})


def chern_qt_bundle(theta="1/3", degree: Sequence[int] = (1, 0), grid: int = 3) -> ChernSystem:
    """Quantum-torus bundle associated to a principal T^2-bundle over T^2.

    The Chern cochain puts ``degree`` on one triangle that has coefficient
    +1 in the normalized fundamental cycle, so its pairing is ``degree``.
    """
    K = simbase.torus(grid, grid)
    z = cycle_space_basis(K, 2)[0]
    tri = K.triangles[next(i for i, c in enumerate(z) if c == 1)]
    P = ChernPrincipalBundle(K, 2, {tri: tuple(degree)})
    return ChernSystem(P, NcTorusFiber(_theta(theta)))


def c2_circle(swap: bool = True, vertices: int = 6) -> FlatAlgebraBundle:
    A = findim.diagonal_algebra(2)
    coc = {}
    if swap:
        coc[(vertices - 1, 0)] = LinearAuto(findim.permutation_matrix_auto([1, 0]))
    return FlatAlgebraBundle(simbase.circle(vertices), FindimFiber(A), coc)


def dual_circle(vertices: int = 6) -> FlatAlgebraBundle:
    return FlatAlgebraBundle(simbase.circle(vertices), FindimFiber(findim.dual_numbers()), {})


def trivial_torus_bundle(theta="1/3", grid: int = 3) -> FlatAlgebraBundle:
    return qt_bundle(simbase.torus(grid, grid), {}, theta)


GALLERY = {
    "nctorus": nctorus,
    "qt-bundle": trivial_torus_bundle,
    "circle-qt-bundle": circle_qt_bundle,
    "pullback": pullback,
    "equivariant": equivariant,
    "heisenberg": heisenberg,
    "chern-qt-bundle": chern_qt_bundle,
    "c2-swap": lambda: c2_circle(True),
    "c2-identity": lambda: c2_circle(False),
    "dual-numbers": dual_circle,
}


def example_gallery(name: str, **params):
    try:
        builder = GALLERY[name]
    except KeyError:
        raise ValueError(f"unknown gallery system {name!r}; choose from {sorted(GALLERY)}") from None
    return builder(**params)
