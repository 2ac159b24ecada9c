"""Finite simplicial complexes as base spaces.

Open sets are full subcomplexes; the cover is by open vertex stars, whose
nerve is the complex itself (two stars meet iff the vertices span an edge,
three iff they span a triangle).  Homology and abelianization go through
the integer Smith normal form.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exactnum import as_fraction, smith_normal_form

Simplex = tuple[int, ...]


class SimplicialBase:
    """Face-closed set of sorted vertex tuples over an explicit vertex set."""

    def __init__(self, vertices: Iterable[int] | int, simplices: Iterable[Sequence[int]] = ()):
        verts = set(range(vertices)) if isinstance(vertices, int) else {int(v) for v in vertices}
        closed: set[Simplex] = set()
        for s in simplices:
            s = tuple(sorted(int(v) for v in s))
            if len(set(s)) != len(s):
                raise ValueError(f"simplex {s} repeats a vertex")
            if not s:
                continue
            for r in range(1, len(s) + 1):
                closed.update(combinations(s, r))
        for s in closed:
            verts.update(s)
        closed.update((v,) for v in verts)
        self.vertices: tuple[int, ...] = tuple(sorted(verts))
        by_dim: dict[int, list[Simplex]] = {}
        for s in closed:
            by_dim.setdefault(len(s) - 1, []).append(s)
        self._by_dim = {d: tuple(sorted(v)) for d, v in by_dim.items()}
        self._index = {d: {s: i for i, s in enumerate(v)} for d, v in self._by_dim.items()}

    @property
    def dimension(self) -> int:
        return max(self._by_dim, default=-1)

    def simplices(self, dim: int) -> tuple[Simplex, ...]:
        return self._by_dim.get(dim, ())

    def all_simplices(self) -> list[Simplex]:
        return [s for d in sorted(self._by_dim) for s in self._by_dim[d]]

    def index(self, s: Sequence[int]) -> int:
        s = tuple(sorted(s))
        return self._index[len(s) - 1][s]

    def has(self, s: Sequence[int]) -> bool:
        s = tuple(sorted(s))
        return s in self._index.get(len(s) - 1, {})

    @property
    def edges(self) -> tuple[Simplex, ...]:
        return self.simplices(1)

    @property
    def triangles(self) -> tuple[Simplex, ...]:
        return self.simplices(2)

    def neighbors(self, v: int) -> list[int]:
        return sorted({w for e in self.edges if v in e for w in e if w != v})

    def is_empty(self) -> bool:
        return not self.vertices

    def full_subcomplex(self, keep: Iterable[int]) -> SimplicialBase:
        keep = set(keep)
        return SimplicialBase(sorted(keep), [s for s in self.all_simplices() if set(s) <= keep])

    def closed_star(self, v: int) -> SimplicialBase:
        return SimplicialBase([v], [s for s in self.all_simplices() if v in s])

    def relabel(self, mapping: Mapping[int, int]) -> SimplicialBase:
        return SimplicialBase([mapping[v] for v in self.vertices], [[mapping[v] for v in s] for s in self.all_simplices()])

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(v) for d, v in self._by_dim.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplicialBase):
            return NotImplemented
        return self.vertices == other.vertices and self._by_dim == other._by_dim

    def __hash__(self):
        return hash((self.vertices, tuple(sorted(self._by_dim.items()))))

    def __repr__(self) -> str:
        counts = [len(self.simplices(d)) for d in range(self.dimension + 1)]
        return f"SimplicialBase(f-vector={counts})"

    def maximal_simplices(self) -> list[Simplex]:
        alls = self.all_simplices()
        top = []
        for s in alls:
            if not any(len(t) > len(s) and set(s) < set(t) for t in alls):
                top.append(s)
        return top

    def to_json(self) -> dict:
        plain = self.vertices == tuple(range(len(self.vertices)))
        return {
            "vertices": len(self.vertices) if plain else list(self.vertices),
            "simplices": [list(s) for s in self.maximal_simplices()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> SimplicialBase:
        return cls(obj["vertices"], obj.get("simplices", []))


# ----------------------------------------------------------------------
# Builders


def circle(n: int = 6) -> SimplicialBase:
    if n < 3:
        raise ValueError("a simplicial circle needs at least 3 vertices")
    return SimplicialBase(n, [(i, (i + 1) % n) for i in range(n)])


def torus(m: int = 3, n: int = 3) -> SimplicialBase:
    """Product triangulation of the 2-torus on an m x n grid."""
    if m < 3 or n < 3:
        raise ValueError("grid must be at least 3 x 3")

    def v(i, j):
        return (i % m) * n + (j % n)

    tris = []
    for i in range(m):
        for j in range(n):
            tris.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            tris.append((v(i, j), v(i, j + 1), v(i + 1, j + 1)))
    return SimplicialBase(m * n, tris)


def point() -> SimplicialBase:
    return SimplicialBase(1, [])


def simplex(dim: int) -> SimplicialBase:
    return SimplicialBase(dim + 1, [tuple(range(dim + 1))])


def disjoint_union(a: SimplicialBase, b: SimplicialBase) -> SimplicialBase:
    shift = max(a.vertices, default=-1) + 1 - min(b.vertices, default=0)
    verts = list(a.vertices) + [v + shift for v in b.vertices]
    simp = a.all_simplices() + [tuple(v + shift for v in s) for s in b.all_simplices()]
    return SimplicialBase(verts, simp)


# ----------------------------------------------------------------------
# Star cover


@dataclass(frozen=True)
class StarCover:
    stars: Mapping[int, frozenset[Simplex]]
    pairs: tuple[tuple[int, int], ...]
    triples: tuple[tuple[int, int, int], ...]
    cone: bool = True  # every star is a cone on its vertex

    def overlaps(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in set(self.pairs)


def star_cover(K: SimplicialBase) -> StarCover:
    if K.is_empty():
        raise ValueError("star cover of an empty complex")
    stars = {v: frozenset(s for s in K.all_simplices() if v in s) for v in K.vertices}
    pairs = tuple(e for e in K.edges if stars[e[0]] & stars[e[1]])
    triples = tuple(t for t in K.triangles if stars[t[0]] & stars[t[1]] & stars[t[2]])
    return StarCover(stars, pairs, triples)


# ----------------------------------------------------------------------
# Weight functions


class WeightFunction:
    """Rational vertex weights; the open set it defines is {f != 0}."""

    def __init__(self, values: Mapping[int, object]):
        self.values = {int(v): as_fraction(x) for v, x in values.items()}

    @classmethod
    def constant(cls, K: SimplicialBase, c) -> WeightFunction:
        return cls({v: c for v in K.vertices})

    @classmethod
    def indicator(cls, K: SimplicialBase, keep: Iterable[int]) -> WeightFunction:
        keep = set(keep)
        return cls({v: 1 if v in keep else 0 for v in K.vertices})

    def __call__(self, v: int) -> Fraction:
        return self.values.get(v, Fraction(0))

    def __mul__(self, other: WeightFunction) -> WeightFunction:
        keys = set(self.values) | set(other.values)
        return WeightFunction({v: self(v) * other(v) for v in keys})

    def support(self) -> set[int]:
        return {v for v, x in self.values.items() if x != 0}

    def to_json(self, K: SimplicialBase | None = None) -> dict:
        verts = K.vertices if K is not None else sorted(self.values)
        vals = [self(v) for v in verts]
        out = [x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}" for x in vals]
        if K is not None and K.vertices == tuple(range(len(verts))):
            return {"values": out}
        return {"values": dict(zip((str(v) for v in verts), out))}

    @classmethod
    def from_json(cls, obj: Mapping, K: SimplicialBase | None = None) -> WeightFunction:
        vals = obj["values"]
        if isinstance(vals, Mapping):
            return cls({int(k): v for k, v in vals.items()})
        verts = K.vertices if K is not None else tuple(range(len(vals)))
        if len(vals) != len(verts):
            raise ValueError("weight list length differs from the vertex count")
        return cls(dict(zip(verts, vals)))


def support_subcomplex(K: SimplicialBase, f: WeightFunction) -> SimplicialBase:
    return K.full_subcomplex(v for v in K.vertices if f(v) != 0)


# ----------------------------------------------------------------------
# Homology


def boundary_matrix(K: SimplicialBase, p: int) -> list[list[int]]:
    """Matrix of the boundary C_p -> C_{p-1}; rows (p-1)-simplices, columns p-simplices."""
    rows = K.simplices(p - 1)
    cols = K.simplices(p)
    M = [[0] * len(cols) for _ in rows]
    if p == 0:
        return M
    for j, s in enumerate(cols):
        for i in range(len(s)):
            face = s[:i] + s[i + 1 :]
            M[K.index(face)][j] += (-1) ** i
    return M


def _rank_and_torsion(M: list[list[int]], ncols: int) -> tuple[int, list[int]]:
    if not M or not ncols:
        return 0, []
    d = smith_normal_form(M, ncols).diag
    return sum(1 for x in d if x), [x for x in d if x > 1]


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple[int, ...]

    def to_json(self) -> dict:
        return {"betti": self.betti, "torsion": list(self.torsion)}


def homology(K: SimplicialBase, degree: int) -> HomologyGroup:
    if degree < 0:
        raise ValueError("degree must be non-negative")
    n_p = len(K.simplices(degree))
    rank_p, _ = _rank_and_torsion(boundary_matrix(K, degree), n_p) if degree > 0 else (0, [])
    n_next = len(K.simplices(degree + 1))
    rank_next, torsion = _rank_and_torsion(boundary_matrix(K, degree + 1), n_next)
    betti = n_p - rank_p - rank_next
    if degree == 0 and betti != len(connected_components(K)):
        raise ArithmeticError("H_0 rank disagrees with the component count")
    return HomologyGroup(betti, tuple(torsion))


def connected_components(K: SimplicialBase) -> list[list[int]]:
    parent = {v: v for v in K.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in K.edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in K.vertices:
        groups.setdefault(find(v), []).append(v)
    return [groups[r] for r in sorted(groups)]


def cycle_space_basis(K: SimplicialBase, degree: int) -> list[list[int]]:
    """Integer basis of ker(boundary) in the given degree, first nonzero entry positive."""
    n = len(K.simplices(degree))
    if n == 0:
        return []
    if degree == 0:
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    M = boundary_matrix(K, degree)
    if not M:
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    snf = smith_normal_form(M, n)
    V = snf.right
    out = []
    for c in range(snf.rank, n):
        vec = [V[r][c] for r in range(n)]
        lead = next(x for x in vec if x)
        out.append([-x for x in vec] if lead < 0 else vec)
    return out


# ----------------------------------------------------------------------
# Spanning forest and cycle basis


@dataclass(frozen=True)
class SpanningForest:
    parent: Mapping[int, int | None]
    order: tuple[int, ...]  # BFS order, roots first in their component
    roots: tuple[int, ...]

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path

    def tree_edges(self) -> set[tuple[int, int]]:
        return {(min(v, p), max(v, p)) for v, p in self.parent.items() if p is not None}


def spanning_forest(K: SimplicialBase, root: int | None = None) -> SpanningForest:
    """BFS forest; each component rooted at its smallest vertex unless ``root`` is given."""
    adj: dict[int, list[int]] = {v: [] for v in K.vertices}
    for a, b in K.edges:
        adj[a].append(b)
        adj[b].append(a)
    parent: dict[int, int | None] = {}
    order: list[int] = []
    roots: list[int] = []
    starts = list(K.vertices)
    if root is not None:
        starts.remove(root)
        starts.insert(0, root)
    for s in starts:
        if s in parent:
            continue
        roots.append(s)
        parent[s] = None
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in sorted(adj[v]):
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
    return SpanningForest(parent, tuple(order), tuple(roots))


def cycle_basis(K: SimplicialBase, root: int | None = None) -> list[list[int]]:
    """Fundamental cycles of the 1-skeleton as closed vertex walks [v0, ..., v0]."""
    forest = spanning_forest(K, root)
    tree = forest.tree_edges()
    loops = []
    for a, b in K.edges:
        if (a, b) in tree:
            continue
        pa = forest.path_to_root(a)
        pb = forest.path_to_root(b)
        # based at the component root so monodromies share one base point
        loops.append(list(reversed(pa)) + pb)
    return loops


def loop_edges(loop: Sequence[int]) -> list[tuple[int, int]]:
    return [(loop[i], loop[i + 1]) for i in range(len(loop) - 1)]


# ----------------------------------------------------------------------
# Group presentations


@dataclass(frozen=True)
class GroupPresentation:
    generators: int
    relators: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        for w in self.relators:
            for x in w:
                if x == 0 or abs(x) > self.generators:
                    raise ValueError(f"letter {x} outside generators 1..{self.generators}")

    def exponent_matrix(self) -> list[list[int]]:
        rows = []
        for w in self.relators:
            row = [0] * self.generators
            for x in w:
                row[abs(x) - 1] += 1 if x > 0 else -1
            rows.append(row)
        return rows

    def to_json(self) -> dict:
        out = {"generators": self.generators, "relators": [list(w) for w in self.relators]}
        if self.names:
            out["names"] = list(self.names)
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> GroupPresentation:
        return cls(int(obj["generators"]), tuple(tuple(int(x) for x in w) for w in obj.get("relators", [])), tuple(obj.get("names", ())))


def commutator(a: int, b: int) -> tuple[int, ...]:
    return (a, b, -a, -b)


@dataclass(frozen=True)
class AbelianGroup:
    rank: int
    torsion: tuple[int, ...]

    def to_json(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}


def abelianization(G: GroupPresentation) -> AbelianGroup:
    M = [r for r in G.exponent_matrix() if any(r)]
    if not M:
        return AbelianGroup(G.generators, ())
    d = smith_normal_form(M, G.generators).diag
    r = sum(1 for x in d if x)
    return AbelianGroup(G.generators - r, tuple(x for x in d if x > 1))


def is_simplicial(vertex_map: Mapping[int, int], L: SimplicialBase, K: SimplicialBase) -> bool:
    if set(vertex_map) != set(L.vertices):
        return False
    return all(K.has({vertex_map[v] for v in s}) for s in L.all_simplices())
