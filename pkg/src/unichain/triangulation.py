"""Rational simplicial complexes, regularity, and refinement.

A complex stores its full face lattice over a lexicographically sorted
vertex list, so index tuples and point tuples sort identically.  The
regularity (unimodularity) test is the standard one: the homogeneous
vertex vectors of every simplex must have maximal-minor gcd equal to 1,
i.e. extend to a basis of the integer lattice of the ambient dimension
plus one.

Refinement is deliberately local.  ``joint_refinement`` shatters each
input polytope only by hyperplanes of polytopes it actually meets, then
repairs any improper pair left over; the result is certified after a
blow-up loop restores regularity.  Nothing here builds a global
hyperplane arrangement, which keeps iterated constructions tractable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, permutations
from math import gcd

from .errors import (
    DesingularizationError,
    EmptyFamily,
    PointOutside,
    RegularityError,
    UnsupportedDimension,
)
from .geometry import (
    Polyhedron,
    Polytope,
    Vec,
    affinely_independent,
    barycentric,
    boxes_overlap,
    bounding_box,
    det_int,
    dot,
    extreme_points,
    homog,
    hull_to_halfspaces,
    polytope_hyperplanes,
    polytope_intersection,
    pulling_triangulation,
    shatter,
    simplex_polytope,
    vec,
)

BLOWUP_CAP = 10_000


@dataclass(frozen=True)
class SimplicialComplex:
    """Finite rational simplicial complex with all faces stored explicitly."""

    vertices: tuple[Vec, ...]
    simplices: tuple[tuple[int, ...], ...]

    def points(self, simplex: tuple[int, ...]) -> tuple[Vec, ...]:
        return tuple(self.vertices[i] for i in simplex)

    @cached_property
    def maximal(self) -> tuple[tuple[int, ...], ...]:
        present = set(self.simplices)
        covered: set[tuple[int, ...]] = set()
        out = []
        for s in sorted(present, key=lambda t: (-len(t), t)):
            if s in covered:
                continue
            out.append(s)
            for r in range(1, len(s)):
                for face in combinations(s, r):
                    covered.add(face)
        return tuple(sorted(out))

    @cached_property
    def maximal_points(self) -> tuple[tuple[Vec, ...], ...]:
        return tuple(self.points(s) for s in self.maximal)

    def carrier(self) -> Polyhedron:
        return Polyhedron(tuple(simplex_polytope(pts) for pts in self.maximal_points))

    def contains(self, x: Vec) -> bool:
        from .geometry import simplex_contains

        return any(simplex_contains(pts, x) for pts in self.maximal_points)


@dataclass(frozen=True)
class RegularTriangulation:
    """A simplicial complex whose regularity check has been run and passed."""

    complex: SimplicialComplex
    certified: bool


def complex_from_maximal(cells) -> SimplicialComplex:
    """Build a complex from simplex vertex tuples, closing under faces."""
    cells = [tuple(c) for c in cells]
    verts = sorted({p for c in cells for p in c})
    index = {p: i for i, p in enumerate(verts)}
    faces: set[tuple[int, ...]] = set()
    for c in cells:
        idx = tuple(sorted(index[p] for p in c))
        for r in range(1, len(idx) + 1):
            faces.update(combinations(idx, r))
    return SimplicialComplex(tuple(verts), tuple(sorted(faces)))


@lru_cache(maxsize=None)
def _simplex_regular(points: tuple[Vec, ...]) -> bool:
    rows = [list(homog(p)) for p in points]
    k1 = len(rows)
    cols = len(rows[0])
    g = 0
    for sel in combinations(range(cols), k1):
        minor = det_int([[row[c] for c in sel] for row in rows])
        g = gcd(g, abs(minor))
        if g == 1:
            return True
    return g == 1


def is_regular(k: SimplicialComplex) -> bool:
    """Unimodularity of every simplex of the complex."""
    return all(_simplex_regular(k.points(s)) for s in k.simplices)


def certify(k: SimplicialComplex) -> RegularTriangulation:
    if not is_regular(k):
        raise RegularityError("complex fails the regularity check")
    return RegularTriangulation(k, True)


def farey_mediant(points: tuple[Vec, ...]) -> Vec:
    """The point whose homogeneous vector is the sum of the vertices'."""
    hs = [homog(p) for p in points]
    total = [sum(h[i] for h in hs) for i in range(len(hs[0]))]
    d = total[-1]
    return tuple(Fraction(c, d) for c in total[:-1])


def blowup(k: SimplicialComplex, face_points: tuple[Vec, ...]) -> SimplicialComplex:
    """Stellar subdivision at the Farey mediant of a face of the complex."""
    face = tuple(sorted(face_points))
    face_set = set(face)
    if not face_set <= set(k.vertices):
        raise ValueError("face is not in the complex")
    m = farey_mediant(face)
    if m in face_set:
        return k  # blowing up a single vertex is the identity
    cells = []
    for pts in k.maximal_points:
        if face_set <= set(pts):
            rest = tuple(p for p in pts if p not in face_set)
            for v in face:
                cells.append(tuple(sorted(rest + tuple(q for q in face if q != v) + (m,))))
        else:
            cells.append(pts)
    return complex_from_maximal(cells)


def _int_kernel_basis(rows: list[list[int]]) -> list[tuple[int, ...]]:
    """Basis of the integer kernel of an integer matrix (column HNF)."""
    if not rows:
        return []
    m = len(rows)
    n = len(rows[0])
    h = [row[:] for row in rows]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def col_op(j, k_, q):
        for i in range(m):
            h[i][j] -= q * h[i][k_]
        for i in range(n):
            u[i][j] -= q * u[i][k_]

    def col_swap(j, k_):
        for i in range(m):
            h[i][j], h[i][k_] = h[i][k_], h[i][j]
        for i in range(n):
            u[i][j], u[i][k_] = u[i][k_], u[i][j]

    col = 0
    for r in range(m):
        if col >= n:
            break
        while True:
            nz = [j for j in range(col, n) if h[r][j] != 0]
            if not nz:
                break
            j0 = min(nz, key=lambda j: (abs(h[r][j]), j))
            done = True
            for j in nz:
                if j == j0:
                    continue
                q = h[r][j] // h[r][j0]
                col_op(j, j0, q)
                if h[r][j] != 0:
                    done = False
            if done:
                if j0 != col:
                    col_swap(col, j0)
                col += 1
                break
    kernel_cols = [j for j in range(col, n)]
    # columns past the pivot block are zero in h, hence kernel vectors
    return [tuple(u[i][j] for i in range(n)) for j in kernel_cols]


def reduction_point(points: tuple[Vec, ...]):
    """An interior rational point splitting a non-regular simplex.

    The homogeneous vertex vectors span a sublattice of finite index g > 1
    in its saturation; any saturation point with fractional barycentric
    weights lies strictly inside the simplex (the proper faces of a
    minimal non-regular simplex are regular, hence saturated) and both
    children of the split get strictly smaller index.  Returns None when
    the simplex is regular.  Coincides with the Farey mediant whenever the
    summed homogeneous vector has content > 1.
    """
    rows = [list(homog(p)) for p in points]
    k1 = len(rows)
    frac_rows = [[Fraction(c) for c in row] for row in rows]
    from .geometry import kernel_basis, normalize_functional, solve_unique

    functionals = kernel_basis(frac_rows)
    c_rows = [list(normalize_functional(list(f), Fraction(0))[0]) for f in functionals]
    if c_rows:
        basis = _int_kernel_basis(c_rows)
    else:
        n1 = len(rows[0])
        basis = [tuple(1 if i == j else 0 for i in range(n1)) for j in range(n1)]
    assert len(basis) == k1, "saturation rank must match the simplex"
    bmat = [[Fraction(basis[j][i]) for j in range(k1)] for i in range(len(rows[0]))]
    a_cols = []
    for row in rows:
        coord = solve_unique(bmat, [Fraction(c) for c in row])
        assert coord is not None and all(c.denominator == 1 for c in coord)
        a_cols.append([int(c) for c in coord])
    a_mat = [[Fraction(a_cols[c][r]) for c in range(k1)] for r in range(k1)]
    for j in range(k1):
        e = [Fraction(1) if i == j else Fraction(0) for i in range(k1)]
        lam = solve_unique(a_mat, e)
        assert lam is not None
        frac_lam = [c - (c.numerator // c.denominator) for c in lam]
        if all(c == 0 for c in frac_lam):
            continue
        total = [
            sum(frac_lam[r] * rows[r][i] for r in range(k1))
            for i in range(len(rows[0]))
        ]
        assert all(c.denominator == 1 for c in total)
        ints = [int(c) for c in total]
        g = 0
        for c in ints:
            g = gcd(g, abs(c))
        ints = [c // g for c in ints]
        d = ints[-1]
        assert d > 0
        return tuple(Fraction(c, d) for c in ints[:-1])
    return None


def desingularize_cells(cells, cap: int = BLOWUP_CAP):
    """Stellar-subdivide non-regular faces (minimal dimension first) until
    every cell and face is regular.  Works on maximal cells only; faces of
    regular simplices are regular, so that check suffices."""
    import heapq

    cellset = set(tuple(c) for c in cells)
    heap: list[tuple[int, tuple[Vec, ...]]] = []

    def scan_cell(c):
        for r in range(2, len(c) + 1):
            for face in combinations(sorted(c), r):
                if not _simplex_regular(face):
                    heapq.heappush(heap, (len(face), face))

    for c in sorted(cellset):
        scan_cell(c)
    steps = 0
    while heap:
        _, face = heapq.heappop(heap)
        face_set = set(face)
        touched = sorted(c for c in cellset if face_set <= set(c))
        if not touched:
            continue
        m = reduction_point(face)
        if m is None:
            continue
        steps += 1
        if steps > cap:
            raise DesingularizationError(f"no regular refinement after {cap} blow-ups")
        fresh = set()
        for c in touched:
            cellset.remove(c)
            rest = tuple(p for p in c if p not in face_set)
            for v in face:
                fresh.add(tuple(sorted(rest + tuple(q for q in face if q != v) + (m,))))
        for nc in sorted(fresh):
            if nc not in cellset:
                cellset.add(nc)
                scan_cell(nc)
    return sorted(cellset)


def desingularize(k: SimplicialComplex, cap: int = BLOWUP_CAP) -> SimplicialComplex:
    """Refine the complex until every simplex passes the regularity check."""
    cells = desingularize_cells(k.maximal_points, cap)
    if tuple(cells) == tuple(sorted(k.maximal_points)):
        return k
    return complex_from_maximal(cells)


def triangulate_cube(n: int) -> RegularTriangulation:
    """The standard triangulation of the unit cube into n! simplices."""
    if not 1 <= n <= 4:
        raise UnsupportedDimension(f"cube triangulation supports 1 <= n <= 4, got {n}")
    cells = []
    for perm in permutations(range(n)):
        chain = [tuple(Fraction(0) for _ in range(n))]
        for axis in perm:
            prev = list(chain[-1])
            prev[axis] += 1
            chain.append(tuple(prev))
        cells.append(tuple(chain))
    return certify(complex_from_maximal(cells))


def locate_minimal_face(t: RegularTriangulation, y: Vec):
    """Vertices of the minimal face of the triangulation containing y, or None."""
    for pts in t.complex.maximal_points:
        lam = barycentric(pts, y)
        if lam is not None and all(c >= 0 for c in lam):
            return tuple(p for p, c in zip(pts, lam) if c > 0)
    return None


def insert_vertex(t: RegularTriangulation, y: Vec) -> RegularTriangulation:
    """Refine a regular triangulation so that y becomes a vertex.

    Stellar subdivision at y's minimal containing face, then blow-ups to
    restore regularity.  Every simplex of the input is a union of output
    simplices.
    """
    if y in t.complex.vertices:
        return t
    face = locate_minimal_face(t, y)
    if face is None:
        raise PointOutside(f"{y} is not in the triangulated set")
    face_set = set(face)
    cells = []
    for pts in t.complex.maximal_points:
        if face_set <= set(pts):
            for v in face:
                cells.append(tuple(sorted((q for q in pts if q != v), key=tuple)) + (y,))
        else:
            cells.append(pts)
    k = desingularize(complex_from_maximal(cells))
    return certify(k)


# ----------------------------------------------------------------------
# joint refinement of polyhedral families


def _is_common_face(inter: tuple[Vec, ...], poly: Polytope) -> bool:
    """Whether conv(inter) is a face of poly (inter given by its vertices)."""
    tight = []
    for alpha, a in poly.system.inequalities:
        if all(dot(alpha, v) == a for v in inter):
            tight.append((alpha, a))
    eqs = poly.system.equalities + tuple(tight)
    from .geometry import vertex_enumeration

    n = len(poly.vertices[0])
    face = vertex_enumeration(eqs, poly.system.inequalities, n)
    return set(face) == set(inter)


def _as_polytope(cell: tuple[Vec, ...]) -> Polytope:
    if affinely_independent(cell):
        return simplex_polytope(tuple(sorted(cell)))
    return hull_to_halfspaces(cell)


def _properize(cells: list[tuple[Vec, ...]], cap: int = 100_000) -> list[tuple[Vec, ...]]:
    """Mutually shatter improper cell pairs until all intersect in faces."""
    cells = sorted(set(cells))
    ops = 0
    changed = True
    while changed:
        changed = False
        polys = {c: _as_polytope(c) for c in cells}
        boxes = {c: bounding_box(c) for c in cells}
        for a, b in combinations(list(cells), 2):
            if a not in polys or b not in polys:
                continue
            if not boxes_overlap(boxes[a], boxes[b]):
                continue
            inter = polytope_intersection(polys[a], polys[b])
            if not inter:
                continue
            if _is_common_face(inter, polys[a]) and _is_common_face(inter, polys[b]):
                continue
            ops += 1
            if ops > cap:
                raise DesingularizationError("refinement failed to stabilise")
            new = []
            for cell, other in ((a, b), (b, a)):
                for piece in shatter(cell, polytope_hyperplanes(polys[other])):
                    new.append(extreme_points(piece))
            cells = sorted((set(cells) - {a, b}) | set(new))
            changed = True
            break
    return cells


def joint_refinement(family: list[Polyhedron]) -> RegularTriangulation:
    """A regular triangulation of the union that refines every member.

    Each polytope is shattered only by hyperplanes of polytopes it meets;
    leftover improper overlaps are repaired pairwise.  The simplices come
    from pulling triangulations under the global lexicographic vertex
    order, so shared faces are triangulated consistently.
    """
    cells: list[tuple[Vec, ...]] = []
    polys: list[Polytope] = []
    for ph in family:
        for t in ph.polytopes:
            if t.vertices not in cells:
                cells.append(t.vertices)
                polys.append(t)
    if not cells:
        raise EmptyFamily("no polytopes to refine")

    boxes = [bounding_box(c) for c in cells]
    pieces: set[tuple[Vec, ...]] = set()
    for i, cell in enumerate(cells):
        planes: set = set()
        for j, other in enumerate(polys):
            if i == j or not boxes_overlap(boxes[i], boxes[j]):
                continue
            if polytope_intersection(polys[i], other):
                planes.update(polytope_hyperplanes(other))
        for piece in shatter(cell, sorted(planes)):
            pieces.add(extreme_points(piece))

    proper = _properize(list(pieces))
    simplices = []
    for piece in proper:
        simplices.extend(pulling_triangulation(piece))
    k = desingularize(complex_from_maximal(simplices))
    return certify(k)


def refine_cells_to_triangulation(cells) -> RegularTriangulation:
    """Triangulate proper convex cells (shared faces already matching)."""
    simplices = []
    for piece in sorted(set(tuple(c) for c in cells)):
        simplices.extend(pulling_triangulation(piece))
    k = desingularize(complex_from_maximal(simplices))
    return certify(k)


# ----------------------------------------------------------------------
# validation helpers (used by the test-suite, not by hot paths)


def validate_complex(k: SimplicialComplex) -> bool:
    """Closure under faces plus pairwise proper intersections."""
    present = set(k.simplices)
    for s in present:
        for r in range(1, len(s)):
            for face in combinations(s, r):
                if face not in present:
                    return False
    for a, b in combinations(k.maximal, 2):
        pa, pb = k.points(a), k.points(b)
        if not boxes_overlap(bounding_box(pa), bounding_box(pb)):
            continue
        inter = polytope_intersection(simplex_polytope(tuple(sorted(pa))),
                                      simplex_polytope(tuple(sorted(pb))))
        shared = sorted(set(pa) & set(pb))
        if not inter:
            if shared:
                return False
            continue
        if sorted(inter) != shared:
            return False
    return True


def carrier_dim(k: SimplicialComplex) -> int:
    return max(len(s) for s in k.maximal) - 1
