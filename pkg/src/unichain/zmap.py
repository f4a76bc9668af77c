"""Piecewise-affine integer-coefficient maps over regular triangulations.

A ``ZMap`` is stored as a certified regular triangulation of its domain
plus one rational value per vertex.  Construction interpolates each
maximal simplex and insists on an integer coefficient matrix; together
with the denominator divisibility condition den(value) | den(vertex),
this is exactly what guarantees a unique piecewise-affine extension with
integer coefficients.  Every operation returns maps in this canonical
form, so any Z-map produced anywhere in the package re-verifies its own
integrality on construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    CarrierMismatch,
    DenominatorViolation,
    ImageEscapesDomain,
    IntegralityFailure,
    NotStrict,
    NoDifference,
    OutsideDomain,
    OutsideHierarchy,
)
from .geometry import (
    Polyhedron,
    Vec,
    barycenter,
    barycentric,
    boxes_overlap,
    bounding_box,
    den,
    dot,
    extreme_points,
    homog,
    hull_to_halfspaces,
    int_solve,
    normalize_hyperplane,
    polytope_hyperplanes,
    polytope_intersection,
    pulling_triangulation,
    rational_point_in_difference,
    shatter,
    simplex_polytope,
    uncovered_cells,
    volume_in_chart,
)
from .triangulation import (
    RegularTriangulation,
    certify,
    complex_from_maximal,
    desingularize,
    joint_refinement,
)

IntMatrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class AffinePiece:
    """One affine piece: rows are (constant, coefficients...) per coordinate."""

    simplex: tuple[Vec, ...]
    matrix: IntMatrix

    def apply(self, x: Vec) -> Vec:
        return tuple(Fraction(row[0]) + dot(row[1:], x) for row in self.matrix)


@dataclass(frozen=True)
class ZMap:
    """A piecewise-affine integer map in canonical (triangulation, values) form."""

    triangulation: RegularTriangulation
    codomain_dim: int
    vertex_values: tuple[Vec, ...]
    pieces: tuple[AffinePiece, ...]

    @property
    def domain_dim(self) -> int:
        return len(self.triangulation.complex.vertices[0])

    def value_at_vertex(self, v: Vec) -> Vec:
        i = self.triangulation.complex.vertices.index(v)
        return self.vertex_values[i]

    def carrier(self) -> Polyhedron:
        return self.triangulation.complex.carrier()


def _interpolate_piece(points: tuple[Vec, ...], values: tuple[Vec, ...], m: int) -> IntMatrix:
    """Integer coefficient rows interpolating the values, or raise."""
    rows_int = [list(homog(p)[-1:]) + list(homog(p)[:-1]) for p in points]
    matrix = []
    for coord in range(m):
        rhs = []
        for p, val in zip(points, values):
            d = den(p)
            entry = val[coord] * d
            if entry.denominator != 1:
                raise IntegralityFailure("value denominator does not clear")
            rhs.append(int(entry))
        sol = int_solve(rows_int, rhs)
        if sol is None:
            raise IntegralityFailure(
                "no integer affine interpolant; triangulation is not regular"
            )
        matrix.append(tuple(sol))
    return tuple(matrix)


def extend_vertex_map(
    t: RegularTriangulation, values: dict[Vec, Vec], codomain_dim: int
) -> ZMap:
    """The unique piecewise-affine map with the given vertex values.

    Requires den(values[v]) | den(v) for every vertex; every maximal
    simplex must then admit an integer interpolant, which is checked.
    """
    verts = t.complex.vertices
    for v in verts:
        if v not in values:
            raise KeyError(f"missing value for vertex {v}")
        val = values[v]
        if len(val) != codomain_dim:
            raise ValueError("value has wrong codomain dimension")
        if den(v) % den(val) != 0:
            raise DenominatorViolation(
                f"den{val} does not divide den{v} at vertex {v}"
            )
    aligned = tuple(values[v] for v in verts)
    pieces = []
    for pts in t.complex.maximal_points:
        vals = tuple(values[p] for p in pts)
        pieces.append(AffinePiece(pts, _interpolate_piece(pts, vals, codomain_dim)))
    return ZMap(t, codomain_dim, aligned, tuple(pieces))


def evaluate(g: ZMap, x: Vec) -> Vec:
    """Value of g at x (first containing simplex in canonical order)."""
    for pts, piece in zip(g.triangulation.complex.maximal_points, g.pieces):
        lo, hi = bounding_box(pts)
        if any(x[i] < lo[i] or x[i] > hi[i] for i in range(len(x))):
            continue
        lam = barycentric(pts, x)
        if lam is not None and all(c >= 0 for c in lam):
            return piece.apply(x)
    raise OutsideDomain(f"{x} is outside the domain")


def identity_map(t: RegularTriangulation) -> ZMap:
    verts = t.complex.vertices
    return extend_vertex_map(t, {v: v for v in verts}, len(verts[0]))


def constant_map(t: RegularTriangulation, value: Vec) -> ZMap:
    if den(value) != 1:
        raise DenominatorViolation("constant value must be integral")
    return extend_vertex_map(t, {v: value for v in t.complex.vertices}, len(value))


# ----------------------------------------------------------------------
# images and containment


def image(g: ZMap) -> Polyhedron:
    """The image as a union of per-piece polytopes."""
    polys = []
    for pts, piece in zip(g.triangulation.complex.maximal_points, g.pieces):
        img = tuple(sorted({piece.apply(p) for p in pts}))
        polys.append(hull_to_halfspaces(img))
    uniq = list(dict.fromkeys(polys))
    uniq.sort(key=lambda p: p.vertices)
    return Polyhedron(tuple(uniq))


def is_into(g: ZMap, target: Polyhedron) -> bool:
    """Whether image(g) is contained in the target polyhedron."""
    try:
        rational_point_in_difference(image(g), target)
    except NoDifference:
        return True
    return False


# ----------------------------------------------------------------------
# equality


def _chart_volume_total(pts: tuple[Vec, ...]) -> Fraction:
    return volume_in_chart(pts, pts)


def equals(f: ZMap, g: ZMap) -> bool:
    """Exact function equality of two maps on the same carrier.

    Decided locally: on every overlapping pair of maximal simplices the two
    affine pieces must agree on the overlap's vertices, and the overlaps
    must cover each side exactly (checked with exact chart volumes).  The
    coverage check doubles as the carrier-equality guard.
    """
    if f.codomain_dim != g.codomain_dim:
        raise CarrierMismatch("codomain dimensions differ")
    if f.domain_dim != g.domain_dim:
        raise CarrierMismatch("ambient dimensions differ")

    f_pts = f.triangulation.complex.maximal_points
    g_pts = g.triangulation.complex.maximal_points
    f_cov = [Fraction(0)] * len(f_pts)
    g_cov = [Fraction(0)] * len(g_pts)
    f_hit = [False] * len(f_pts)
    g_hit = [False] * len(g_pts)
    f_boxes = [bounding_box(p) for p in f_pts]
    g_boxes = [bounding_box(p) for p in g_pts]
    f_polys = [simplex_polytope(tuple(sorted(p))) for p in f_pts]
    g_polys = [simplex_polytope(tuple(sorted(p))) for p in g_pts]

    agree = True
    for i, (pf, jf) in enumerate(zip(f_pts, f.pieces)):
        for j, (pg, jg) in enumerate(zip(g_pts, g.pieces)):
            if not boxes_overlap(f_boxes[i], g_boxes[j]):
                continue
            inter = polytope_intersection(f_polys[i], g_polys[j])
            if not inter:
                continue
            f_hit[i] = True
            g_hit[j] = True
            f_cov[i] += volume_in_chart(pf, inter)
            g_cov[j] += volume_in_chart(pg, inter)
            if agree:
                for w in inter:
                    if jf.apply(w) != jg.apply(w):
                        agree = False
                        break

    for i, pf in enumerate(f_pts):
        full = _chart_volume_total(pf)
        if (len(pf) == 1 and not f_hit[i]) or (len(pf) > 1 and f_cov[i] != full):
            raise CarrierMismatch("carriers differ")
    for j, pg in enumerate(g_pts):
        full = _chart_volume_total(pg)
        if (len(pg) == 1 and not g_hit[j]) or (len(pg) > 1 and g_cov[j] != full):
            raise CarrierMismatch("carriers differ")
    return agree


# ----------------------------------------------------------------------
# composition and restriction


def _pullback_hyperplane(con, piece: AffinePiece):
    """Preimage of alpha . y = a under the affine piece, or None if parallel."""
    alpha, a = con
    m = piece.matrix
    lin = tuple(
        sum(alpha[r] * m[r][1 + j] for r in range(len(m)))
        for j in range(len(piece.simplex[0]))
    )
    if all(c == 0 for c in lin):
        return None
    const = a - sum(alpha[r] * m[r][0] for r in range(len(m)))
    return normalize_hyperplane((lin, const))


def compose(g: ZMap, f: ZMap) -> ZMap:
    """The composite g after f, as a canonical-form Z-map.

    Each simplex of f's domain is cut along the preimages (under its own
    affine piece) of the hyperplanes supporting g's triangulation, so the
    composite is affine on every resulting cell.  Cut traces agree across
    shared faces because adjacent pieces agree there.
    """
    if f.codomain_dim != g.domain_dim:
        raise ImageEscapesDomain("codomain of the inner map has wrong dimension")
    g_hypers = set()
    for poly in (simplex_polytope(tuple(sorted(p))) for p in g.triangulation.complex.maximal_points):
        g_hypers.update(polytope_hyperplanes(poly))
    g_hypers = sorted(g_hypers)

    cells = []
    for pts, piece in zip(f.triangulation.complex.maximal_points, f.pieces):
        loci = sorted({h for con in g_hypers if (h := _pullback_hyperplane(con, piece)) is not None})
        for part in shatter(pts, loci):
            cells.extend(pulling_triangulation(extreme_points(part)))
    k = desingularize(complex_from_maximal(cells))
    t = certify(k)

    values = {}
    for v in t.complex.vertices:
        try:
            fv = evaluate(f, v)
            values[v] = evaluate(g, fv)
        except OutsideDomain as exc:
            raise ImageEscapesDomain(str(exc)) from exc
    out = extend_vertex_map(t, values, g.codomain_dim)

    # guard: each final simplex must map into a single simplex of g
    for pts in out.triangulation.complex.maximal_points:
        bc = evaluate(f, barycenter(pts))
        target = None
        for gp in g.triangulation.complex.maximal_points:
            lam = barycentric(gp, bc)
            if lam is not None and all(c >= 0 for c in lam):
                target = gp
                break
        if target is None:
            raise ImageEscapesDomain(f"image point {bc} outside outer domain")
        for p in pts:
            lam = barycentric(target, evaluate(f, p))
            if lam is None or any(c < 0 for c in lam):
                raise IntegralityFailure("composition refinement was too coarse")
    return out


def restrict(g: ZMap, region: Polyhedron) -> ZMap:
    """The same function on a sub-polyhedron of the domain."""
    carrier = g.carrier()
    try:
        rational_point_in_difference(region, carrier)
        raise OutsideDomain("region is not contained in the domain")
    except NoDifference:
        pass
    cells = []
    for pts in g.triangulation.complex.maximal_points:
        poly = simplex_polytope(tuple(sorted(pts)))
        pbox = bounding_box(pts)
        for t in region.polytopes:
            if not boxes_overlap(pbox, bounding_box(t.vertices)):
                continue
            inter = polytope_intersection(poly, t)
            if inter:
                cells.append(inter)
    from .triangulation import _properize

    proper = _properize(cells)
    simplices = []
    for piece in proper:
        simplices.extend(pulling_triangulation(piece))
    k = desingularize(complex_from_maximal(simplices))
    t = certify(k)
    values = {v: evaluate(g, v) for v in t.complex.vertices}
    return extend_vertex_map(t, values, g.codomain_dim)


# ----------------------------------------------------------------------
# extension with a prescribed integer value


def extend_with_value(eta: ZMap, q: Polyhedron, z: int) -> ZMap:
    """Extend a scalar map from its carrier P to Q, attaining the value z.

    P must be strictly contained in Q.  A rational point s of Q \\ P
    becomes a vertex; every new vertex outside P takes the value z.
    """
    if eta.codomain_dim != 1:
        raise ValueError("extension requires a scalar map")
    p_carrier = eta.carrier()
    try:
        rational_point_in_difference(p_carrier, q)
        raise OutsideHierarchy("the map's domain is not contained in the target")
    except NoDifference:
        pass
    try:
        s = rational_point_in_difference(q, p_carrier)
    except NoDifference:
        raise NotStrict("the inclusion of the domain in the target is not strict")

    complement = uncovered_cells(q, p_carrier)
    family = [Polyhedron((simplex_polytope(tuple(sorted(pts))),))
              for pts in eta.triangulation.complex.maximal_points]
    family.append(Polyhedron(tuple(hull_to_halfspaces(c) for c in complement)))
    family.append(Polyhedron((simplex_polytope((s,)),)))
    t = joint_refinement(family)

    values = {}
    zval = (Fraction(z),)
    for v in t.complex.vertices:
        values[v] = evaluate(eta, v) if p_carrier.contains(v) else zval
    return extend_vertex_map(t, values, 1)
