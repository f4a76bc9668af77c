"""Squeezing constructions: retracting a simplex off one of its facets
without changing a given affine observable, and the derived cube-level
non-surjective factorisations.

The central move replaces one well-chosen point y in the relative
interior of a facet F by a companion point z in the simplex's relative
interior with the same denominator and the same observable value, then
extends "y goes to z, everything else stays" over a refined
triangulation.  The resulting map fixes every other facet pointwise,
misses y, and commutes with the observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ConstantOnBoundary,
    ConstantOnFace,
    DimensionTooLow,
    PreconditionViolated,
    ZeroDirection,
)
from .geometry import (
    Constraint,
    Polyhedron,
    Vec,
    barycenter,
    den,
    dot,
    kernel_basis,
    normalize_functional,
    relative_interior_contains,
    simplex_polytope,
    vadd,
    vscale,
    vsub,
)
from .triangulation import (
    RegularTriangulation,
    certify,
    complex_from_maximal,
    desingularize,
    insert_vertex,
)
from .zmap import AffinePiece, ZMap, extend_vertex_map, image, restrict, extend_with_value

from math import gcd, lcm


@dataclass(frozen=True)
class SqueezeContext:
    """A simplex S, a facet F of S, and a scalar integer-affine observable
    that is not constant on F.  The defining inequality of F sits at
    index 0 of the inequality list."""

    simplex: tuple[Vec, ...]
    face: tuple[Vec, ...]
    eta: AffinePiece
    inequalities: tuple[Constraint, ...]
    equalities: tuple[Constraint, ...]


def make_context(
    simplex: tuple[Vec, ...], face: tuple[Vec, ...], eta: AffinePiece
) -> SqueezeContext:
    """Assemble a squeeze context, ordering F's inequality first."""
    k = len(simplex) - 1
    if k < 2:
        raise DimensionTooLow(f"squeezing needs simplex dimension >= 2, got {k}")
    if not set(face) <= set(simplex) or len(face) != k:
        raise ValueError("the face must be a facet of the simplex")
    vals = [eta.apply(v)[0] for v in face]
    if all(v == vals[0] for v in vals):
        raise ConstantOnFace("the observable is constant on the selected facet")
    poly = simplex_polytope(tuple(sorted(simplex)))
    face_set = set(face)
    face_con = None
    rest = []
    for con in poly.system.inequalities:
        alpha, a = con
        if all(dot(alpha, v) == a for v in face):
            face_con = con
        else:
            rest.append(con)
    assert face_con is not None, "a facet always saturates one inequality"
    return SqueezeContext(
        tuple(simplex), tuple(face), eta, (face_con, *rest), poly.system.equalities
    )


# ----------------------------------------------------------------------
# equal-denominator perturbations


def _primes_from(start: int):
    n = max(2, start)
    while True:
        if all(n % p for p in range(2, int(n**0.5) + 1)):
            yield n
        n += 1


def equal_denominator_points(
    t: Vec, v: Vec, w: Vec, eps: Fraction
) -> tuple[Fraction, Fraction]:
    """Step sizes delta, tau in (0, eps) with den(t + delta v) equal to
    den(t + delta v + tau w).

    Scale v, w to integer vectors v' = a v and w' = b w with v' + w'
    nonzero, then pick the smallest prime p beyond a/eps, b/eps, den(t),
    and every coordinate magnitude of v' and v' + w'; the steps are
    delta = a/p and tau = b/p, giving t + delta v = t + v'/p and
    t + delta v + tau w = t + (v' + w')/p, both of denominator den(t) p.
    """
    if all(c == 0 for c in v):
        raise ZeroDirection("the first direction must be nonzero")
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = den(v)
    b = den(w)
    vp = tuple(int(c * a) for c in v)
    wp = tuple(int(c * b) for c in w)
    if all(x + y == 0 for x, y in zip(vp, wp)):
        b *= 2
        wp = tuple(int(c * b) for c in w)

    bound = max(
        a / eps,
        b / eps,
        Fraction(den(t)),
        *(Fraction(abs(c)) for c in vp),
        *(Fraction(abs(x + y)) for x, y in zip(vp, wp)),
    )
    p = next(q for q in _primes_from(int(bound) + 1) if q > bound)
    delta = Fraction(a, p)
    tau = Fraction(b, p)
    assert den(vadd(t, vscale(delta, v))) == den(
        vadd(t, vadd(vscale(delta, v), vscale(tau, w)))
    )
    return delta, tau


def interior_step(
    simplex: tuple[Vec, ...], t: Vec, directions: list[Vec]
) -> Fraction:
    """A bound eps > 0 such that stepping from t by any coefficients in
    (0, eps) along the directions stays in the simplex's relative interior.

    Directions must be parallel to the simplex; every inequality active
    at t needs nonnegative products with all directions and a strictly
    positive one with at least one of them.
    """
    poly = simplex_polytope(tuple(sorted(simplex)))
    for alpha, a in poly.system.equalities:
        if dot(alpha, t) != a:
            raise PreconditionViolated("the base point is outside the simplex's span")
        for wdir in directions:
            if dot(alpha, wdir) != 0:
                raise PreconditionViolated("a direction leaves the simplex's span")
    if not directions:
        # nothing will move; t itself must already be interior
        if any(dot(alpha, t) == a for alpha, a in poly.system.inequalities):
            raise PreconditionViolated("no direction escapes an active constraint")
        return Fraction(1)
    inactive = []
    for alpha, a in poly.system.inequalities:
        slack = dot(alpha, t) - a
        if slack < 0:
            raise PreconditionViolated("the base point is outside the simplex")
        if slack == 0:
            prods = [dot(alpha, wdir) for wdir in directions]
            if any(pr < 0 for pr in prods):
                raise PreconditionViolated("a direction exits through an active facet")
            if not any(pr > 0 for pr in prods):
                raise PreconditionViolated("no direction escapes an active constraint")
        else:
            inactive.append((alpha, slack))
    if not inactive:
        return Fraction(1)
    l = len(directions)
    eps = None
    for alpha, slack in inactive:
        m = max(abs(dot(alpha, wdir)) for wdir in directions)
        cand = slack / (l * m + 1)
        eps = cand if eps is None else min(eps, cand)
    return eps


def squeezing_direction(ctx: SqueezeContext) -> Vec:
    """A rational vector parallel to S, in the observable's kernel, not
    parallel to F, with positive product against F's inward normal."""
    n = len(ctx.simplex[0])
    rows = [[Fraction(c) for c in alpha] for alpha, _ in ctx.equalities]
    lin = ctx.eta.matrix[0][1:]
    rows.append([Fraction(c) for c in lin])
    alpha0 = ctx.inequalities[0][0]
    for cand in kernel_basis(rows) if rows else []:
        prod = dot(alpha0, cand)
        if prod == 0:
            continue
        scaled, _ = normalize_functional(list(cand), Fraction(0))
        w = tuple(Fraction(c) for c in scaled)
        if dot(alpha0, w) < 0:
            w = tuple(-c for c in w)
        return w
    raise PreconditionViolated("no squeezing direction; the context is degenerate")


def squeeze(ctx: SqueezeContext) -> ZMap:
    """The non-surjective self-map of S that fixes every facet but F and
    commutes with the observable."""
    k = len(ctx.simplex) - 1
    if k < 2:
        raise DimensionTooLow(f"squeezing needs simplex dimension >= 2, got {k}")
    face_vals = [ctx.eta.apply(v)[0] for v in ctx.face]
    if all(v == face_vals[0] for v in face_vals):
        raise ConstantOnFace("the observable is constant on the selected facet")

    t = barycenter(ctx.face)
    v = vsub(ctx.face[1], ctx.face[0])
    w = squeezing_direction(ctx)
    eps_face = interior_step(ctx.face, t, [v])
    eps_simplex = interior_step(ctx.simplex, t, [v, w])
    eps = min(eps_face, eps_simplex)
    delta, tau = equal_denominator_points(t, v, w, eps)
    y = vadd(t, vscale(delta, v))
    z = vadd(y, vscale(tau, w))
    assert relative_interior_contains(ctx.face, y)
    assert relative_interior_contains(ctx.simplex, z)
    assert ctx.eta.apply(y) == ctx.eta.apply(z)

    base = certify(desingularize(complex_from_maximal([ctx.simplex])))
    refined = insert_vertex(base, y)
    values = {vv: (z if vv == y else vv) for vv in refined.complex.vertices}
    return extend_vertex_map(refined, values, len(ctx.simplex[0]))


# ----------------------------------------------------------------------
# cube-level constructions


def _boundary_facets(n: int):
    """(coordinate, value) descriptions of the cube's facets."""
    return [(i, b) for i in range(n) for b in (0, 1)]


def _face_in_cube_boundary(points: tuple[Vec, ...], n: int) -> bool:
    return any(
        all(p[i] == b for p in points) for i, b in _boundary_facets(n)
    )


def make_space(eta: ZMap) -> ZMap:
    """A non-surjective self-map of the cube commuting with a scalar map
    that is nonconstant on the cube's boundary.

    Scans boundary facet simplices of eta's triangulation in canonical
    order, squeezes the first one where eta is nonconstant inside the
    maximal simplex containing it, and leaves the rest of the cube alone.
    """
    n = eta.domain_dim
    if n <= 1:
        raise DimensionTooLow("the construction needs a cube of dimension >= 2")
    if eta.codomain_dim != 1:
        raise ValueError("the observable must be scalar")
    comp = eta.triangulation.complex
    chosen_face = None
    candidates = [s for s in comp.simplices if len(s) == n]
    for s in sorted(candidates, key=lambda s: comp.points(s)):
        pts = comp.points(s)
        if not _face_in_cube_boundary(pts, n):
            continue
        vals = [evaluate_vertex(eta, p) for p in pts]
        if any(v != vals[0] for v in vals):
            chosen_face = pts
            break
    if chosen_face is None:
        raise ConstantOnBoundary("the map is constant on the cube's boundary")

    face_set = set(chosen_face)
    simplex = None
    piece = None
    for pts, pc in zip(comp.maximal_points, eta.pieces):
        if face_set <= set(pts) and len(pts) == n + 1:
            simplex = pts
            piece = pc
            break
    assert simplex is not None, "a boundary facet belongs to a maximal simplex"

    ctx = make_context(simplex, chosen_face, piece)
    rho = squeeze(ctx)

    cells = [pts for pts in comp.maximal_points if pts != simplex]
    cells.extend(rho.triangulation.complex.maximal_points)
    k = complex_from_maximal(cells)
    t = certify(k)
    values = {}
    for vv in t.complex.vertices:
        if rho_has_vertex(rho, vv):
            values[vv] = rho.value_at_vertex(vv)
        else:
            values[vv] = vv
    return extend_vertex_map(t, values, n)


def rho_has_vertex(rho: ZMap, v: Vec) -> bool:
    return v in rho.triangulation.complex.vertices


def evaluate_vertex(zm: ZMap, v: Vec) -> Vec:
    return zm.value_at_vertex(v)


def exists_upper_bound(eta: ZMap, z: int) -> tuple[ZMap, ZMap]:
    """Maps theta, alpha with theta after alpha equal to eta and z among
    theta's values; alpha is a non-surjective self-map of the cube."""
    alpha = make_space(eta)
    p = image(alpha)
    eta_p = restrict(eta, p)
    cube_cells = Polyhedron(
        tuple(
            simplex_polytope(tuple(sorted(pts)))
            for pts in eta.triangulation.complex.maximal_points
        )
    )
    theta = extend_with_value(eta_p, cube_cells, z)
    return theta, alpha
