"""Graphs on compact orientable surfaces, encoded as combinatorial maps.

A :class:`SurfaceGraph` is a list of oriented edges plus, for every face, a
closed boundary word and an area.  Boundary components of the surface are
listed as closed words too, oriented like the faces they bound (so the sum
of all face boundaries equals the sum of the boundary loops).

Words are sequences of letters ``(edge, sign)``; ``sign = +1`` follows the
edge from source to target.  Concatenation ``c1 + c2`` means "``c1`` then
``c2``".
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import sympy


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class PathWord:
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        letters = tuple((int(e), int(s)) for e, s in self.letters)
        for _, s in letters:
            if s not in (1, -1):
                raise ValueError("letter signs must be +1 or -1")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def of(cls, *letters) -> "PathWord":
        return cls(tuple(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __add__(self, other: "PathWord") -> "PathWord":
        return PathWord(self.letters + other.letters)

    def inverse(self) -> "PathWord":
        return PathWord(tuple((e, -s) for e, s in reversed(self.letters)))

    def rotate(self, k: int) -> "PathWord":
        if not self.letters:
            return self
        k %= len(self.letters)
        return PathWord(self.letters[k:] + self.letters[:k])

    def to_json(self) -> list:
        return [[e, s] for e, s in self.letters]


@dataclass(frozen=True)
class Face:
    word: PathWord
    area: float


@dataclass(frozen=True)
class IntCycle:
    coefficients: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    def __add__(self, other: "IntCycle") -> "IntCycle":
        return IntCycle(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "IntCycle") -> "IntCycle":
        return IntCycle(tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __mul__(self, k: int) -> "IntCycle":
        return IntCycle(tuple(k * a for a in self.coefficients))

    __rmul__ = __mul__

    def __neg__(self) -> "IntCycle":
        return self * -1

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=np.int64)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SurfaceGraph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    faces: tuple[Face, ...]
    genus: int = 0
    boundary_loops: tuple[PathWord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(s), int(t)) for s, t in self.edges))
        object.__setattr__(self, "faces", tuple(self.faces))
        object.__setattr__(self, "boundary_loops", tuple(self.boundary_loops))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def total_area(self) -> float:
        return float(sum(f.area for f in self.faces))

    @property
    def areas(self) -> list[float]:
        return [f.area for f in self.faces]

    @property
    def closed(self) -> bool:
        return not self.boundary_loops

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def letter_source(self, letter) -> int:
        e, s = letter
        a, b = self.edges[e]
        return a if s > 0 else b

    def letter_target(self, letter) -> int:
        e, s = letter
        a, b = self.edges[e]
        return b if s > 0 else a

    def word_vertices(self, w: PathWord) -> list[int]:
        """Vertices visited by ``w`` (length ``len(w) + 1``); raises if inconsistent."""
        if not w.letters:
            return []
        for e, _ in w.letters:
            if not 0 <= e < self.n_edges:
                raise GraphError(f"edge {e} does not exist")
        verts = [self.letter_source(w.letters[0])]
        for letter in w.letters:
            if self.letter_source(letter) != verts[-1]:
                raise GraphError(f"word is not endpoint-consistent at letter {letter}")
            verts.append(self.letter_target(letter))
        return verts

    def is_closed_word(self, w: PathWord) -> bool:
        v = self.word_vertices(w)
        return not v or v[0] == v[-1]

    def word_cycle(self, w: PathWord) -> IntCycle:
        c = [0] * self.n_edges
        for e, s in w.letters:
            c[e] += s
        return IntCycle(tuple(c))

    def boundary_operator(self) -> np.ndarray:
        """Matrix of ``d e = target - source`` (vertices x edges)."""
        d = np.zeros((self.n_vertices, self.n_edges), dtype=np.int64)
        for i, (a, b) in enumerate(self.edges):
            d[b, i] += 1
            d[a, i] -= 1
        return d

    def is_cycle(self, c: IntCycle) -> bool:
        return not np.any(self.boundary_operator() @ c.as_array())

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return False
        adj: dict[int, set[int]] = {v: set() for v in range(self.n_vertices)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in adj[v] - seen:
                seen.add(u)
                stack.append(u)
        return len(seen) == self.n_vertices

    # -- exchange format ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "edges": [list(e) for e in self.edges],
            "faces": [{"word": f.word.to_json(), "area": f.area} for f in self.faces],
            "genus": self.genus,
            "boundary": [w.to_json() for w in self.boundary_loops],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SurfaceGraph":
        try:
            return cls(
                n_vertices=int(doc["vertices"]),
                edges=tuple(tuple(e) for e in doc["edges"]),
                faces=tuple(Face(PathWord(tuple(map(tuple, f["word"]))), float(f["area"])) for f in doc["faces"]),
                genus=int(doc.get("genus", 0)),
                boundary_loops=tuple(PathWord(tuple(map(tuple, w))) for w in doc.get("boundary", [])),
            )
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_graph(path: str | Path) -> SurfaceGraph:
    return SurfaceGraph.from_json(json.loads(Path(path).read_text()))


def save_graph(g: SurfaceGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_json(), indent=2))


# ---------------------------------------------------------------------------
# validation


def validate(g: SurfaceGraph) -> ValidationReport:
    rep = ValidationReport()
    bad = rep.violations
    for i, (a, b) in enumerate(g.edges):
        if not (0 <= a < g.n_vertices and 0 <= b < g.n_vertices):
            bad.append(f"edge {i} has an endpoint outside the vertex set")
    if bad:
        return rep
    if g.genus < 0:
        bad.append("negative genus")
    expected = 2 - 2 * g.genus - len(g.boundary_loops)
    if g.euler_characteristic != expected:
        bad.append(f"Euler characteristic {g.euler_characteristic} != 2 - 2g - b = {expected}")
    for label, words in (("face", [f.word for f in g.faces]), ("boundary loop", g.boundary_loops)):
        for i, w in enumerate(words):
            if not w.letters:
                bad.append(f"{label} {i} has an empty word")
                continue
            try:
                if not g.is_closed_word(w):
                    bad.append(f"{label} {i} word is not closed")
            except GraphError as exc:
                bad.append(f"{label} {i}: {exc}")
    for i, f in enumerate(g.faces):
        if not f.area > 0:
            bad.append(f"face {i} has nonpositive area {f.area}")
    face_occ: dict[int, list[int]] = {e: [] for e in range(g.n_edges)}
    for f in g.faces:
        for e, s in f.word.letters:
            if e in face_occ:
                face_occ[e].append(s)
    bdry_occ: dict[int, list[int]] = {e: [] for e in range(g.n_edges)}
    for w in g.boundary_loops:
        for e, s in w.letters:
            if e in bdry_occ:
                bdry_occ[e].append(s)
    for e in range(g.n_edges):
        fo, bo = face_occ[e], bdry_occ[e]
        if bo:
            if len(bo) != 1 or len(fo) != 1:
                bad.append(f"boundary edge {e} must occur once in faces and once in boundary loops")
            elif fo[0] != bo[0]:
                bad.append(f"boundary edge {e} is oriented against the face it bounds")
        elif sorted(fo) != [-1, 1]:
            bad.append(f"interior edge {e} must occur twice with opposite signs in face words (got {fo})")
    if not g.is_connected():
        bad.append("graph is not connected")
    return rep


# ---------------------------------------------------------------------------
# elementary refinements


def _rewrite_subdivided(w: PathWord, edge: int, new_edge: int) -> PathWord:
    out = []
    for e, s in w.letters:
        if e != edge:
            out.append((e, s))
        elif s > 0:
            out.extend([(edge, 1), (new_edge, 1)])
        else:
            out.extend([(new_edge, -1), (edge, -1)])
    return PathWord(tuple(out))


def subdivide_edge(g: SurfaceGraph, edge: int) -> SurfaceGraph:
    """Insert a vertex in the middle of ``edge``; ``edge`` keeps its first half."""
    if not 0 <= edge < g.n_edges:
        raise GraphError(f"edge {edge} does not exist")
    v = g.n_vertices
    new_edge = g.n_edges
    a, b = g.edges[edge]
    edges = list(g.edges)
    edges[edge] = (a, v)
    edges.append((v, b))
    return SurfaceGraph(
        v + 1,
        tuple(edges),
        tuple(Face(_rewrite_subdivided(f.word, edge, new_edge), f.area) for f in g.faces),
        g.genus,
        tuple(_rewrite_subdivided(w, edge, new_edge) for w in g.boundary_loops),
    )


def split_face(g: SurfaceGraph, face: int, position_i: int, position_j: int, area_fraction: float) -> SurfaceGraph:
    """Add an edge inside ``face`` between two vertex occurrences of its boundary.

    Position ``k`` denotes the source vertex of letter ``k`` of the face word.
    The new edge runs from occurrence ``i`` to occurrence ``j``; the face
    keeps the arc ``i..j`` (closed by the new edge reversed) with
    ``area_fraction`` of the area, and the other arc becomes a new face.
    ``position_i == position_j`` inserts a loop bounding a small disk.
    """
    if not 0 <= face < g.n_faces:
        raise GraphError(f"face {face} does not exist")
    if not 0 < area_fraction < 1:
        raise GraphError("area_fraction must lie in (0, 1)")
    word = g.faces[face].word.letters
    m = len(word)
    if not (0 <= position_i < m and 0 <= position_j < m):
        raise GraphError(f"positions must index vertex occurrences of face {face} (0..{m - 1})")
    i, j = sorted((position_i, position_j))
    verts = g.word_vertices(g.faces[face].word)
    new_edge = g.n_edges
    edges = g.edges + ((verts[i], verts[j]),)
    inner = word[i:j] + ((new_edge, -1),)
    outer = word[j:] + word[:i] + ((new_edge, 1),)
    area = g.faces[face].area
    faces = list(g.faces)
    faces[face] = Face(PathWord(inner), area * area_fraction)
    faces.append(Face(PathWord(outer), area * (1 - area_fraction)))
    return SurfaceGraph(g.n_vertices, edges, tuple(faces), g.genus, g.boundary_loops)


def refine(g: SurfaceGraph, moves: Iterable[tuple], words: Sequence[PathWord] = ()) -> tuple[SurfaceGraph, list[PathWord]]:
    """Apply a sequence of moves ``("V", edge)`` / ``("E", face, i, j, fraction)``.

    ``words`` are rewritten along the way so they describe the same paths in
    the refined graph.
    """
    words = list(words)
    for mv in moves:
        kind = mv[0]
        if kind == "V":
            edge = mv[1]
            new_edge = g.n_edges
            g = subdivide_edge(g, edge)
            words = [_rewrite_subdivided(w, edge, new_edge) for w in words]
        elif kind == "E":
            g = split_face(g, *mv[1:])
        else:
            raise GraphError(f"unknown move {mv!r}")
    return g, words


# ---------------------------------------------------------------------------
# word algebra


def reduce_word(w: PathWord) -> PathWord:
    """Free reduction: cancel adjacent ``e e^-1`` pairs until none remain."""
    stack: list[tuple[int, int]] = []
    for e, s in w.letters:
        if stack and stack[-1] == (e, -s):
            stack.pop()
        else:
            stack.append((e, s))
    return PathWord(tuple(stack))


@dataclass(frozen=True)
class Lasso:
    stem: PathWord
    buckle: PathWord

    @property
    def word(self) -> PathWord:
        return self.stem + self.buckle + self.stem.inverse()


@dataclass(frozen=True)
class LassoDecomposition:
    lassos: tuple[Lasso, ...]
    remainder: PathWord

    def __iter__(self):
        return iter((list(self.lassos), self.remainder))

    def concatenated(self) -> PathWord:
        out = PathWord()
        for lasso in self.lassos:
            out = out + lasso.word
        return out + self.remainder


def lasso_decompose(g: SurfaceGraph, w: PathWord) -> LassoDecomposition:
    """Peel lassos off ``w`` at its first self-intersection, repeatedly.

    Trace the word until it first returns to an already visited vertex
    (letter ``i``, earlier visit at position ``j``).  Then
    ``w ~ (s b s^-1) (s rest)`` with stem ``s = w[:j]`` and simple buckle
    ``b = w[j:i+1]``; a back-and-forth buckle ``e e^-1`` is dropped.  The
    second factor is strictly shorter and is decomposed in turn.
    """
    lassos: list[Lasso] = []
    letters = list(w.letters)
    while True:
        verts = g.word_vertices(PathWord(tuple(letters)))
        first_seen: dict[int, int] = {}
        hit = None
        for pos, v in enumerate(verts):
            if v in first_seen:
                hit = (first_seen[v], pos)
                break
            first_seen[v] = pos
        if hit is None:
            return LassoDecomposition(tuple(lassos), PathWord(tuple(letters)))
        j, i = hit
        stem = letters[:j]
        buckle = letters[j:i]
        if not (len(buckle) == 2 and buckle[1] == (buckle[0][0], -buckle[0][1])):
            lassos.append(Lasso(PathWord(tuple(stem)), PathWord(tuple(buckle))))
        letters = stem + letters[i:]


# ---------------------------------------------------------------------------
# abelian cycle calculus


def face_cycles(g: SurfaceGraph) -> list[IntCycle]:
    return [g.word_cycle(f.word) for f in g.faces]


def face_cycle_basis(g: SurfaceGraph) -> list[IntCycle]:
    """Face boundaries spanning the null-homologous cycles.

    All faces when the surface has a boundary, all but the last one when it
    is closed.
    """
    if not g.is_connected():
        raise GraphError("graph is not connected")
    cycles = face_cycles(g)
    if g.closed:
        cycles = cycles[:-1]
    if cycles:
        mat = sympy.Matrix([list(c.coefficients) for c in cycles])
        if mat.rank() != len(cycles):
            raise GraphError("face boundaries are linearly dependent; the map is not a valid cell decomposition")
    return cycles


class HomologyError(ValueError):
    pass


def homology_decompose(
    g: SurfaceGraph, c: IntCycle, h1_loops: Sequence[IntCycle] = ()
) -> tuple[list[int], list[int]]:
    """Integer coordinates of ``c = sum lambda_i l_i + sum mu_j dF_j``.

    The columns ``h1_loops`` + face basis are linearly independent, so the
    rational solution is unique and the integer solve reduces to checking it
    is integral.  ``mu`` has one entry per face; on a closed surface the last
    one is fixed to 0 (the relation ``sum dF = 0``).
    """
    if len(c.coefficients) != g.n_edges:
        raise HomologyError("cycle length does not match the edge count")
    if not g.is_cycle(c):
        raise HomologyError("not a cycle: nonzero boundary")
    basis = face_cycle_basis(g)
    cols = [list(l.coefficients) for l in h1_loops] + [list(b.coefficients) for b in basis]
    n_h = len(h1_loops)
    if not cols:
        if any(c.coefficients):
            raise HomologyError("not a cycle / bad basis")
        return [], [0] * g.n_faces
    A = sympy.Matrix(cols).T
    if A.rank() != len(cols):
        raise HomologyError("bad basis: h1 loops are dependent on face boundaries")
    b = sympy.Matrix(list(c.coefficients))
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        raise HomologyError("not a cycle / bad basis: no solution") from None
    if params.shape[0]:
        raise HomologyError("bad basis: solution is not unique")
    vals = [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in sol]
    if any(v.denominator != 1 for v in vals):
        raise HomologyError("not a cycle / bad basis: no integer solution")
    ints = [int(v) for v in vals]
    lam = ints[:n_h]
    mu = ints[n_h:]
    if g.closed:
        mu = mu + [0]
    recon = np.zeros(g.n_edges, dtype=np.int64)
    for k, l in zip(lam, h1_loops):
        recon += k * l.as_array()
    for k, f in zip(mu, face_cycles(g)):
        recon += k * f.as_array()
    if not np.array_equal(recon, c.as_array()):
        raise HomologyError("reconstruction failed")
    return lam, mu


# ---------------------------------------------------------------------------
# canonical fixtures


def sphere_graph(area_in: float = 0.5, total: float = 1.0) -> SurfaceGraph:
    """Sphere cut by one loop edge into two disks of areas ``area_in``, ``total - area_in``."""
    if not 0 < area_in < total:
        raise GraphError("need 0 < area_in < total")
    return SurfaceGraph(
        1,
        ((0, 0),),
        (Face(PathWord.of((0, 1)), area_in), Face(PathWord.of((0, -1)), total - area_in)),
    )


def theta_sphere(areas: Sequence[float]) -> SurfaceGraph:
    """Sphere with two vertices joined by ``n`` edges and ``n`` bigon faces.

    Face ``i`` is bounded by ``e_i e_{i+1}^-1``.
    """
    n = len(areas)
    if n < 2:
        raise GraphError("need at least two faces")
    faces = tuple(Face(PathWord.of((i, 1), ((i + 1) % n, -1)), float(a)) for i, a in enumerate(areas))
    return SurfaceGraph(2, tuple((0, 1) for _ in range(n)), faces)


def disk_graph(area: float = 1.0) -> SurfaceGraph:
    return SurfaceGraph(1, ((0, 0),), (Face(PathWord.of((0, 1)), area),), 0, (PathWord.of((0, 1)),))


def standard_polygon(genus: int, area: float = 1.0) -> tuple[SurfaceGraph, list[PathWord]]:
    """One vertex, ``2g`` loops, one face ``a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1``.

    Returns the graph and the words ``a1, b1, ..., ag, bg`` generating H1.
    """
    if genus < 1:
        raise GraphError("standard polygon needs genus >= 1")
    letters = []
    gens = []
    for k in range(genus):
        a, b = 2 * k, 2 * k + 1
        letters += [(a, 1), (b, 1), (a, -1), (b, -1)]
        gens += [PathWord.of((a, 1)), PathWord.of((b, 1))]
    g = SurfaceGraph(1, tuple((0, 0) for _ in range(2 * genus)), (Face(PathWord(tuple(letters)), area),), genus)
    return g, gens


def torus_graph(area: float = 1.0) -> tuple[SurfaceGraph, list[PathWord]]:
    return standard_polygon(1, area)
