"""Exact rational linear algebra, polytopes, and polyhedra.

Every coordinate in this package is a ``fractions.Fraction``; no float is
ever produced.  Points and vectors are plain tuples of Fractions (``Vec``),
which makes them hashable and lexicographically comparable.  That ordering
is the canonical order behind every deterministic choice in the package.

A ``Polytope`` carries both a vertex description (extreme points only) and
a half-space description with content-1 integer coefficients, so distinct
constructions of the same set compare bit-exactly.  A ``Polyhedron`` is a
finite union of polytopes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd, lcm

from .errors import NoDifference

Vec = tuple[Fraction, ...]
IntVec = tuple[int, ...]
# A linear constraint (alpha, a) reads "alpha . x >= a" (or "= a" for equalities).
Constraint = tuple[IntVec, int]


def vec(*coords: object) -> Vec:
    """Build a point/vector of Fractions from ints, strings, or Fractions."""
    return tuple(Fraction(c) for c in coords)  # type: ignore[arg-type]


def den(v: Vec) -> int:
    """Least common multiple of the reduced coordinate denominators."""
    d = 1
    for c in v:
        d = lcm(d, c.denominator)
    return d


def homog(v: Vec) -> IntVec:
    """Integer homogeneous lift: den(v) times (v, 1)."""
    d = den(v)
    return tuple(int(c * d) for c in v) + (d,)


def vadd(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c: Fraction, v: Vec) -> Vec:
    return tuple(c * a for a in v)


def dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def is_zero(v) -> bool:
    return all(c == 0 for c in v)


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_frac(x: Fraction) -> int:
    return -((-x).numerator // x.denominator)


def barycenter(points: tuple[Vec, ...]) -> Vec:
    """Average of the listed points.

    When the list contains all extreme points of a polytope (possibly with
    extra non-extreme ones), the average lies in its relative interior.
    """
    n = len(points)
    acc = points[0]
    for p in points[1:]:
        acc = vadd(acc, p)
    return vscale(Fraction(1, n), acc)


# ----------------------------------------------------------------------
# exact linear algebra


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    m = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: list[list[Fraction]]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def solve_linear(rows: list[list[Fraction]], rhs: list[Fraction]):
    """One solution of A x = b with free variables set to 0, or None."""
    if not rows:
        return tuple()
    aug = [row + [b] for row, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    cols = len(rows[0])
    if cols in pivots:
        return None  # inconsistent
    x = [Fraction(0)] * cols
    for r, c in enumerate(pivots):
        x[c] = red[r][-1]
    return tuple(x)


def solve_unique(rows: list[list[Fraction]], rhs: list[Fraction]):
    """The unique solution of A x = b, or None if none or many."""
    sol = solve_linear(rows, rhs)
    if sol is None:
        return None
    if rank(rows) != len(rows[0]):
        return None
    return sol


def kernel_basis(rows: list[list[Fraction]]) -> list[Vec]:
    """Canonical kernel basis (one vector per free column, ascending)."""
    if not rows:
        return []
    red, pivots = rref(rows)
    cols = len(rows[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(tuple(v))
    return basis


def det_int(mat: list[list[int]]) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    m = [row[:] for row in mat]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def int_solve(rows: list[list[int]], rhs: list[int]):
    """One integer solution of A x = b, or None.

    Column reduction by unimodular operations (Hermite style); the free
    components of the transformed solution are fixed at zero, which makes
    the returned solution deterministic.
    """
    m = len(rows)
    if m == 0:
        return tuple()
    n = len(rows[0])
    h = [row[:] for row in rows]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def col_op(j: int, k: int, q: int) -> None:
        # column j -= q * column k
        for i in range(m):
            h[i][j] -= q * h[i][k]
        for i in range(n):
            u[i][j] -= q * u[i][k]

    def col_swap(j: int, k: int) -> None:
        for i in range(m):
            h[i][j], h[i][k] = h[i][k], h[i][j]
        for i in range(n):
            u[i][j], u[i][k] = u[i][k], u[i][j]

    def col_neg(j: int) -> None:
        for i in range(m):
            h[i][j] = -h[i][j]
        for i in range(n):
            u[i][j] = -u[i][j]

    pivots: list[tuple[int, int]] = []  # (row, col)
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
                if h[r][col] < 0:
                    col_neg(col)
                pivots.append((r, col))
                col += 1
                break

    y = [0] * n
    pivot_rows = {r: c for r, c in pivots}
    for r in range(m):
        acc = sum(h[r][j] * y[j] for j in range(n))
        resid = rhs[r] - acc
        if r in pivot_rows:
            c = pivot_rows[r]
            extra = resid + h[r][c] * y[c]
            if extra % h[r][c] != 0:
                return None
            y[c] = extra // h[r][c]
        elif resid != 0:
            return None
    return tuple(sum(u[i][j] * y[j] for j in range(n)) for i in range(n))


# ----------------------------------------------------------------------
# affine spans and barycentric coordinates


@dataclass(frozen=True)
class AffineSubspace:
    """basepoint + span(basis); the empty subspace has basepoint None."""

    basepoint: Vec | None
    basis: tuple[Vec, ...]

    @property
    def dim(self) -> int:
        return -1 if self.basepoint is None else len(self.basis)

    def contains(self, x: Vec) -> bool:
        if self.basepoint is None:
            return False
        rows = [list(col) for col in zip(*self.basis)] if self.basis else [[] for _ in x]
        rhs = list(vsub(x, self.basepoint))
        if not self.basis:
            return all(c == 0 for c in rhs)
        return solve_linear(rows, rhs) is not None


def affine_span(points: tuple[Vec, ...] | list[Vec]) -> AffineSubspace:
    """Affine span with a canonical direction basis (from row reduction)."""
    pts = list(points)
    if not pts:
        return AffineSubspace(None, ())
    p0 = pts[0]
    diffs = [list(vsub(p, p0)) for p in pts[1:]]
    diffs = [d for d in diffs if any(c != 0 for c in d)]
    if not diffs:
        return AffineSubspace(p0, ())
    red, pivots = rref(diffs)
    basis = tuple(tuple(red[i]) for i in range(len(pivots)))
    return AffineSubspace(p0, basis)


def affinely_independent(points: tuple[Vec, ...]) -> bool:
    return affine_span(points).dim == len(points) - 1


@lru_cache(maxsize=None)
def _barycentric_solver(simplex: tuple[Vec, ...]):
    """Pseudo-inverse L with lambda = L . (x, 1) for the simplex's chart."""
    k = len(simplex) - 1
    n = len(simplex[0])
    a = [[simplex[j][i] for j in range(k + 1)] for i in range(n)]
    a.append([Fraction(1)] * (k + 1))
    # L = (A^T A)^-1 A^T, exact; valid because columns are affinely independent
    ata = [[sum(a[i][r] * a[i][c] for i in range(n + 1)) for c in range(k + 1)] for r in range(k + 1)]
    cols = []
    for j in range(k + 1):
        e = [Fraction(1) if i == j else Fraction(0) for i in range(k + 1)]
        col = solve_unique(ata, e)
        if col is None:  # degenerate input; caller guarantees independence
            raise ValueError("degenerate simplex")
        cols.append(col)
    inv = [[cols[c][r] for c in range(k + 1)] for r in range(k + 1)]
    l_mat = [
        [sum(inv[r][t] * a[i][t] for t in range(k + 1)) for i in range(n + 1)]
        for r in range(k + 1)
    ]
    return tuple(tuple(row) for row in l_mat), tuple(tuple(row) for row in a)


def barycentric(simplex: tuple[Vec, ...], x: Vec):
    """Barycentric coordinates of x w.r.t. an affinely independent simplex.

    Returns None when x is outside the simplex's affine span.
    """
    l_mat, a = _barycentric_solver(simplex)
    xh = list(x) + [Fraction(1)]
    lam = tuple(dot(row, xh) for row in l_mat)
    for i in range(len(xh)):
        if dot(a[i], lam) != xh[i]:
            return None
    return lam


def simplex_contains(simplex: tuple[Vec, ...], x: Vec) -> bool:
    lam = barycentric(simplex, x)
    return lam is not None and all(c >= 0 for c in lam)


def relative_interior_contains(simplex: tuple[Vec, ...], x: Vec) -> bool:
    """True iff x satisfies the simplex equalities and all inequalities strictly."""
    lam = barycentric(simplex, x)
    return lam is not None and all(c > 0 for c in lam)


# ----------------------------------------------------------------------
# constraint normalisation


def normalize_functional(alpha: list[Fraction], a: Fraction) -> Constraint:
    """Scale (alpha, a) to integers with overall content 1, direction kept."""
    scale = 1
    for c in list(alpha) + [a]:
        scale = lcm(scale, c.denominator)
    ints = [int(c * scale) for c in alpha]
    rhs = int(a * scale)
    g = 0
    for c in ints + [rhs]:
        g = gcd(g, abs(c))
    if g > 1:
        ints = [c // g for c in ints]
        rhs //= g
    return tuple(ints), rhs


def normalize_hyperplane(con: Constraint) -> Constraint:
    """Sign-canonical form for a hyperplane (first nonzero coefficient > 0)."""
    alpha, a = con
    lead = next((c for c in alpha if c != 0), 0)
    if lead < 0 or (lead == 0 and a < 0):
        return tuple(-c for c in alpha), -a
    return con


# ----------------------------------------------------------------------
# hulls and half-space representations


@dataclass(frozen=True)
class HalfSpaceSystem:
    """Integer constraints: alpha . x >= a (inequalities) and alpha . x = a."""

    inequalities: tuple[Constraint, ...]
    equalities: tuple[Constraint, ...]

    def contains(self, x: Vec) -> bool:
        for alpha, a in self.equalities:
            if dot(alpha, x) != a:
                return False
        for alpha, a in self.inequalities:
            if dot(alpha, x) < a:
                return False
        return True


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many rational points, with both descriptions."""

    vertices: tuple[Vec, ...]
    system: HalfSpaceSystem

    def contains(self, x: Vec) -> bool:
        return self.system.contains(x)


@dataclass(frozen=True)
class Polyhedron:
    """Finite union of rational polytopes."""

    polytopes: tuple[Polytope, ...]

    def contains(self, x: Vec) -> bool:
        return any(t.contains(x) for t in self.polytopes)


def in_hull(x: Vec, points: tuple[Vec, ...]) -> bool:
    """Membership of x in conv(points), by simplex enumeration."""
    pts = tuple(dict.fromkeys(points))
    if x in pts:
        return True
    if not pts:
        return False
    span = affine_span(pts)
    d = span.dim
    if affinely_independent(pts):
        return simplex_contains(pts, x)
    for sub in combinations(pts, d + 1):
        if not affinely_independent(sub):
            continue
        if simplex_contains(sub, x):
            return True
    return False


def extreme_points(points) -> tuple[Vec, ...]:
    """The extreme points of conv(points), sorted lexicographically."""
    pts = sorted(dict.fromkeys(points))
    if len(pts) <= 2:
        return tuple(pts)
    out = []
    for i, p in enumerate(pts):
        others = tuple(q for j, q in enumerate(pts) if j != i)
        if not in_hull(p, others):
            out.append(p)
    return tuple(out)


def _span_equalities(span: AffineSubspace, dim: int) -> tuple[Constraint, ...]:
    """Integer equalities cutting out the affine span."""
    assert span.basepoint is not None
    if span.dim == dim:
        return ()
    rows = [list(b) for b in span.basis] if span.basis else []
    if rows:
        normals = kernel_basis(rows)
    else:
        normals = [
            tuple(Fraction(1) if j == i else Fraction(0) for j in range(dim))
            for i in range(dim)
        ]
    eqs = []
    for nrm in normals:
        a = dot(nrm, span.basepoint)
        eqs.append(normalize_hyperplane(normalize_functional(list(nrm), a)))
    return tuple(sorted(eqs))


@lru_cache(maxsize=None)
def hull_to_halfspaces(points: tuple[Vec, ...]) -> Polytope:
    """V- and H-representation of conv(points).

    Facets are found by brute force over vertex subsets inside span
    coordinates; fine at this package's scale (dimension <= 4, few dozen
    points).  Inequality coefficients are integers with content 1.
    """
    verts = extreme_points(points)
    if not verts:
        raise ValueError("empty point set")
    n = len(verts[0])
    span = affine_span(verts)
    eqs = _span_equalities(span, n)
    d = span.dim
    if d == 0:
        return Polytope(verts, HalfSpaceSystem((), eqs))

    # chart coordinates s with x = p0 + s . B
    p0 = span.basepoint
    basis = span.basis
    assert p0 is not None
    gram = [[dot(bi, bj) for bj in basis] for bi in basis]
    chart = []
    for p in verts:
        rhs = [dot(bi, vsub(p, p0)) for bi in basis]
        s = solve_unique(gram, rhs)
        assert s is not None
        chart.append(s)

    ineqs: set[Constraint] = set()
    for idx in combinations(range(len(verts)), d):
        sub = [chart[i] for i in idx]
        if d == 1:
            # a facet of a segment is a point; the chart normal is scalar
            beta = (Fraction(1),)
            b = sub[0][0]
        else:
            diffs = [list(vsub(s, sub[0])) for s in sub[1:]]
            if rank(diffs) != d - 1:
                continue
            kb = kernel_basis(diffs)
            if len(kb) != 1:
                continue
            beta = kb[0]
            b = dot(beta, sub[0])
        vals = [dot(beta, s) - b for s in chart]
        if all(v >= 0 for v in vals) and any(v > 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals) and any(v < 0 for v in vals):
            beta = tuple(-c for c in beta)
            b = -b
        else:
            continue
        # pull back to ambient coordinates: alpha . x >= a
        # s(x) = gram^-1 . (B (x - p0)); alpha = beta^T gram^-1 B
        gamma = solve_unique(gram, list(beta))
        assert gamma is not None
        alpha = [
            sum(gamma[i] * basis[i][j] for i in range(d)) for j in range(n)
        ]
        a = Fraction(b) + dot(alpha, p0)
        ineqs.add(normalize_functional(alpha, a))
    return Polytope(verts, HalfSpaceSystem(tuple(sorted(ineqs)), eqs))


@lru_cache(maxsize=None)
def simplex_polytope(verts: tuple[Vec, ...]) -> Polytope:
    """Polytope of an affinely independent vertex set (fast H-rep path).

    The facet inequalities are the barycentric coordinate functionals.
    """
    n = len(verts[0])
    span = affine_span(verts)
    eqs = _span_equalities(span, n)
    if len(verts) == 1:
        return Polytope(tuple(verts), HalfSpaceSystem((), eqs))
    ineqs = set()
    k = len(verts) - 1
    for i in range(k + 1):
        values = [Fraction(1) if j == i else Fraction(0) for j in range(k + 1)]
        coeffs = solve_affine_on_simplex(verts, values)
        alpha = list(coeffs[1:])
        a = -coeffs[0]
        ineqs.add(normalize_functional(alpha, a))
    return Polytope(tuple(sorted(verts)), HalfSpaceSystem(tuple(sorted(ineqs)), eqs))


def polyhedron_of(cells) -> Polyhedron:
    """Polyhedron from vertex tuples; simplices take the fast H-rep path."""
    polys = []
    for cell in cells:
        cell = tuple(cell)
        if affinely_independent(cell):
            polys.append(simplex_polytope(tuple(sorted(cell))))
        else:
            polys.append(hull_to_halfspaces(cell))
    seen = dict.fromkeys(polys)
    return Polyhedron(tuple(seen))


@lru_cache(maxsize=None)
def cube_polytope(n: int) -> Polytope:
    corners = []
    for mask in range(2 ** n):
        corners.append(tuple(Fraction((mask >> i) & 1) for i in range(n)))
    ineqs = []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        ne = tuple(-1 if j == i else 0 for j in range(n))
        ineqs.append((e, 0))
        ineqs.append((ne, -1))
    return Polytope(tuple(sorted(corners)), HalfSpaceSystem(tuple(sorted(ineqs)), ()))


def cube_polyhedron(n: int) -> Polyhedron:
    return Polyhedron((cube_polytope(n),))


# ----------------------------------------------------------------------
# intersections, cuts, and vertex enumeration


def vertex_enumeration(
    equalities: tuple[Constraint, ...],
    inequalities: tuple[Constraint, ...],
    n: int,
) -> tuple[Vec, ...]:
    """Vertices of a bounded solution set, by tight-subset enumeration."""
    eq_rows = [[Fraction(c) for c in alpha] for alpha, _ in equalities]
    eq_rhs = [Fraction(a) for _, a in equalities]
    base_rank = rank(eq_rows) if eq_rows else 0
    need = n - base_rank
    found: set[Vec] = set()
    if need < 0:
        return ()
    for subset in combinations(range(len(inequalities)), need):
        rows = [r[:] for r in eq_rows]
        rhs = eq_rhs[:]
        for j in subset:
            alpha, a = inequalities[j]
            rows.append([Fraction(c) for c in alpha])
            rhs.append(Fraction(a))
        if not rows:
            continue
        x = solve_unique(rows, rhs)
        if x is None:
            continue
        if all(dot(alpha, x) >= a for alpha, a in inequalities):
            found.add(x)
    return tuple(sorted(found))


def polytope_intersection(p: Polytope, q: Polytope) -> tuple[Vec, ...]:
    """Vertices of p intersect q (empty tuple if disjoint)."""
    if not boxes_overlap(bounding_box(p.vertices), bounding_box(q.vertices)):
        return ()
    n = len(p.vertices[0])
    eqs = tuple(dict.fromkeys(p.system.equalities + q.system.equalities))
    ineqs = tuple(dict.fromkeys(p.system.inequalities + q.system.inequalities))
    return vertex_enumeration(eqs, ineqs, n)


def bounding_box(verts: tuple[Vec, ...]) -> tuple[Vec, Vec]:
    lo = tuple(min(v[i] for v in verts) for i in range(len(verts[0])))
    hi = tuple(max(v[i] for v in verts) for i in range(len(verts[0])))
    return lo, hi


def boxes_overlap(a: tuple[Vec, Vec], b: tuple[Vec, Vec]) -> bool:
    return all(a[0][i] <= b[1][i] and b[0][i] <= a[1][i] for i in range(len(a[0])))


def cut_vertices(verts: tuple[Vec, ...], alpha: IntVec, a: int):
    """Split a convex vertex set by the hyperplane alpha . x = a.

    Returns (ge_side, le_side) vertex tuples; a side is () when empty.
    The result sets may contain non-extreme points, which is harmless for
    barycenters and hull computations downstream.
    """
    vals = [dot(alpha, v) - a for v in verts]
    ge = [v for v, d in zip(verts, vals) if d >= 0]
    le = [v for v, d in zip(verts, vals) if d <= 0]
    pos = [(v, d) for v, d in zip(verts, vals) if d > 0]
    neg = [(v, d) for v, d in zip(verts, vals) if d < 0]
    cross = []
    for v, dv in pos:
        for u, du in neg:
            t = dv / (dv - du)
            cross.append(tuple(vi + t * (ui - vi) for vi, ui in zip(v, u)))
    ge.extend(cross)
    le.extend(cross)
    return tuple(sorted(set(ge))), tuple(sorted(set(le)))


def strictly_straddles(verts: tuple[Vec, ...], con: Constraint) -> bool:
    alpha, a = con
    above = below = False
    for v in verts:
        d = dot(alpha, v) - a
        if d > 0:
            above = True
        elif d < 0:
            below = True
        if above and below:
            return True
    return False


def shatter(verts: tuple[Vec, ...], planes) -> list[tuple[Vec, ...]]:
    """Cut a convex cell by each hyperplane that strictly crosses it."""
    parts = [verts]
    for con in planes:
        nxt = []
        for cell in parts:
            if strictly_straddles(cell, con):
                ge, le = cut_vertices(cell, *con)
                nxt.append(ge)
                nxt.append(le)
            else:
                nxt.append(cell)
        parts = nxt
    return parts


def polytope_hyperplanes(p: Polytope) -> list[Constraint]:
    """All facet and span hyperplanes of p, in sign-canonical form."""
    out = {normalize_hyperplane(c) for c in p.system.inequalities}
    out.update(normalize_hyperplane(c) for c in p.system.equalities)
    return sorted(out)


def polyhedron_hyperplanes(ph: Polyhedron) -> list[Constraint]:
    out: set[Constraint] = set()
    for p in ph.polytopes:
        out.update(polytope_hyperplanes(p))
    return sorted(out)


# ----------------------------------------------------------------------
# differences and complements


def _fast_inside(verts: tuple[Vec, ...], ph: Polyhedron) -> bool:
    """True when all verts satisfy some single polytope's system."""
    return any(all(t.contains(v) for v in verts) for t in ph.polytopes)


def rational_point_in_difference(q: Polyhedron, p: Polyhedron) -> Vec:
    """A rational point of Q \\ P, chosen deterministically.

    Scans Q's polytopes in stored order and descends a worklist of convex
    cells, splitting along P's hyperplanes; the first cell whose relative
    interior point escapes P is reported.  Raises NoDifference when Q is
    contained in P.
    """
    hyps = polyhedron_hyperplanes(p)
    for t in q.polytopes:
        if _fast_inside(t.vertices, p):
            continue
        queue = deque([t.vertices])
        while queue:
            cell = queue.popleft()
            b = barycenter(cell)
            if not p.contains(b):
                return b
            con = next((h for h in hyps if strictly_straddles(cell, h)), None)
            if con is None:
                continue  # cell lies inside a single sign region, hence in P
            ge, le = cut_vertices(cell, *con)
            queue.append(ge)
            queue.append(le)
    raise NoDifference("the first polyhedron is contained in the second")


def uncovered_cells(q: Polyhedron, p: Polyhedron) -> list[tuple[Vec, ...]]:
    """Convex cells covering the closure of Q \\ P (empty when Q subset P)."""
    hyps = polyhedron_hyperplanes(p)
    out = []
    for t in q.polytopes:
        if _fast_inside(t.vertices, p):
            continue
        queue = deque([t.vertices])
        while queue:
            cell = queue.popleft()
            con = next((h for h in hyps if strictly_straddles(cell, h)), None)
            if con is not None:
                ge, le = cut_vertices(cell, *con)
                queue.append(ge)
                queue.append(le)
                continue
            if not p.contains(barycenter(cell)):
                out.append(extreme_points(cell))
    return sorted(set(out))


# ----------------------------------------------------------------------
# affine interpolation


def solve_affine_on_simplex(verts: tuple[Vec, ...], values) -> tuple[Fraction, ...]:
    """Coefficients (c0, c1..cn) of the affine map interpolating scalar values.

    The interpolant is unique on the simplex's affine span; off the span it
    is pinned by requiring the linear part to lie in the span's direction
    space (components along the orthogonal complement are zero).
    """
    values = [Fraction(v) for v in values]
    p0 = verts[0]
    diffs = [vsub(p, p0) for p in verts[1:]]
    rhs = [v - values[0] for v in values[1:]]
    if diffs:
        gram = [[dot(di, dj) for dj in diffs] for di in diffs]
        c = solve_unique(gram, rhs)
        assert c is not None, "vertices must be affinely independent"
        lin = tuple(
            sum(c[i] * diffs[i][j] for i in range(len(diffs)))
            for j in range(len(p0))
        )
    else:
        lin = tuple(Fraction(0) for _ in p0)
    c0 = values[0] - dot(lin, p0)
    return (c0,) + lin


# ----------------------------------------------------------------------
# volumes inside a simplex chart


def _pulling_cells(verts: tuple[Vec, ...]):
    """Pulling triangulation of conv(verts); list of simplex vertex tuples."""
    ext = extreme_points(verts)
    if affinely_independent(ext):
        return [ext]
    v0 = ext[0]
    poly = hull_to_halfspaces(ext)
    out = []
    for alpha, a in poly.system.inequalities:
        tight = tuple(v for v in ext if dot(alpha, v) == a)
        if dot(alpha, v0) == a:
            continue
        for cell in _pulling_cells(tight):
            out.append(tuple(sorted(cell + (v0,))))
    return out


def pulling_triangulation(verts: tuple[Vec, ...]):
    """Deterministic triangulation of a polytope by pulling its lex-least vertex."""
    return sorted(set(_pulling_cells(verts)))


def volume_in_chart(chart_simplex: tuple[Vec, ...], verts: tuple[Vec, ...]) -> Fraction:
    """dim(chart)-volume of conv(verts) in the simplex's barycentric chart.

    Measured in parallelepiped units (no 1/k! factor); only comparisons
    against other volumes in the same chart are meaningful.  Sets of lower
    dimension get volume 0.
    """
    k = len(chart_simplex) - 1
    if k == 0:
        return Fraction(1) if verts else Fraction(0)
    mapped = []
    for v in verts:
        lam = barycentric(chart_simplex, v)
        assert lam is not None, "point must lie in the chart simplex's span"
        mapped.append(lam[1:])
    total = Fraction(0)
    for cell in pulling_triangulation(tuple(sorted(set(mapped)))):
        if len(cell) != k + 1:
            continue
        rows = [list(vsub(p, cell[0])) for p in cell[1:]]
        total += abs(_det_frac(rows))
    return total


def _det_frac(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    m = [row[:] for row in rows]
    detval = Fraction(1)
    for k in range(n):
        pivot = next((i for i in range(k, n) if m[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            m[k], m[pivot] = m[pivot], m[k]
            detval = -detval
        detval *= m[k][k]
        inv = 1 / m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] * inv
            if f != 0:
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return detval
