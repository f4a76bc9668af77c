"""Many-valued propositional terms, their piecewise-linear semantics, and
solution polyhedra of unification problems.

Surface syntax (ASCII):

    problem  := equation (";" equation)* ;
    equation := term "=" term ;
    term     := join ;  join := meet ("\\/" meet)* ;  meet := osum ("/\\" osum)* ;
    osum     := oprod ("+" oprod)* ;  oprod := unary ("*" unary)* ;
    unary    := "~" unary | atom ;  atom := "0" | "1" | "x" digits | "(" term ")" ;

Whitespace is insignificant.  "+" is truncated addition, "*" truncated
multiplication, "~" negation; precedence is ~ > * > + > /\\ > \\/ with
left-associative binary operators.

Semantics on [0,1]: ~x = 1-x, x+y = min(1, x+y), x*y = max(0, x+y-1),
\\/ = max, /\\ = min.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ArityError, DimensionMismatch, ParseError, UnsupportedArity
from .geometry import (
    Polyhedron,
    Vec,
    barycenter,
    barycentric,
    hull_to_halfspaces,
    normalize_functional,
    normalize_hyperplane,
    pulling_triangulation,
    simplex_polytope,
    vec,
    vertex_enumeration,
    extreme_points,
    shatter,
    den,
)
from .triangulation import (
    RegularTriangulation,
    certify,
    complex_from_maximal,
    desingularize,
    joint_refinement,
    triangulate_cube,
)
from .zmap import ZMap, extend_vertex_map, evaluate, is_into


@dataclass(frozen=True)
class Term:
    """Syntax tree node: op in {'var','const','neg','oplus','otimes','join','meet'}."""

    op: str
    index: int = 0  # variable index (0-based) or constant value
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        return format_term(self)


def var(i: int) -> Term:
    return Term("var", i)


def const(c: int) -> Term:
    return Term("const", c)


def neg(t: Term) -> Term:
    return Term("neg", 0, (t,))


def oplus(s: Term, t: Term) -> Term:
    return Term("oplus", 0, (s, t))


def otimes(s: Term, t: Term) -> Term:
    return Term("otimes", 0, (s, t))


def join(s: Term, t: Term) -> Term:
    return Term("join", 0, (s, t))


def meet(s: Term, t: Term) -> Term:
    return Term("meet", 0, (s, t))


@dataclass(frozen=True)
class UnificationProblem:
    arity: int
    equations: tuple[tuple[Term, Term], ...]

    def __str__(self) -> str:
        return format_problem(self)


_PRECEDENCE = {"join": 1, "meet": 2, "oplus": 3, "otimes": 4, "neg": 5}
_SYMBOL = {"join": " \\/ ", "meet": " /\\ ", "oplus": " + ", "otimes": " * "}


def format_term(t: Term, parent_prec: int = 0) -> str:
    if t.op == "var":
        s, prec = f"x{t.index + 1}", 6
    elif t.op == "const":
        s, prec = str(t.index), 6
    elif t.op == "neg":
        s, prec = "~" + format_term(t.args[0], _PRECEDENCE["neg"]), _PRECEDENCE["neg"]
    else:
        prec = _PRECEDENCE[t.op]
        s = format_term(t.args[0], prec) + _SYMBOL[t.op] + format_term(t.args[1], prec + 1)
    return f"({s})" if prec < parent_prec else s


def format_problem(p: UnificationProblem) -> str:
    return " ; ".join(f"{format_term(s)} = {format_term(t)}" for s, t in p.equations)


# ----------------------------------------------------------------------
# parser (recursive descent following the grammar above)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def try_take(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.try_take(token):
            raise ParseError(f"expected {token!r}", self.pos)


def _parse_atom(sc: _Scanner, m: int) -> Term:
    sc.skip_ws()
    pos = sc.pos
    ch = sc.peek()
    if sc.try_take("("):
        t = _parse_term(sc, m)
        sc.expect(")")
        return t
    if sc.try_take("0"):
        return const(0)
    if sc.try_take("1"):
        return const(1)
    if sc.try_take("x"):
        start = sc.pos
        while sc.pos < len(sc.text) and sc.text[sc.pos].isdigit():
            sc.pos += 1
        if sc.pos == start:
            raise ParseError("expected a variable index after 'x'", start)
        idx = int(sc.text[start:sc.pos])
        if not 1 <= idx <= m:
            raise ArityError(f"variable x{idx} exceeds arity {m}", pos)
        return var(idx - 1)
    raise ParseError(f"unexpected {ch!r}" if ch else "unexpected end of input", sc.pos)


def _parse_unary(sc: _Scanner, m: int) -> Term:
    if sc.try_take("~"):
        return neg(_parse_unary(sc, m))
    return _parse_atom(sc, m)


def _parse_binary(sc: _Scanner, m: int, token: str, sub, make) -> Term:
    t = sub(sc, m)
    while sc.try_take(token):
        t = make(t, sub(sc, m))
    return t


def _parse_oprod(sc, m):
    return _parse_binary(sc, m, "*", _parse_unary, otimes)


def _parse_osum(sc, m):
    return _parse_binary(sc, m, "+", _parse_oprod, oplus)


def _parse_meet(sc, m):
    return _parse_binary(sc, m, "/\\", _parse_osum, meet)


def _parse_term(sc, m):
    return _parse_binary(sc, m, "\\/", _parse_meet, join)


def parse(text: str, m: int) -> Term:
    """Parse a single term over variables x1..xm."""
    sc = _Scanner(text)
    t = _parse_term(sc, m)
    sc.skip_ws()
    if sc.pos != len(sc.text):
        raise ParseError(f"trailing input {sc.text[sc.pos:]!r}", sc.pos)
    return t


def parse_problem(text: str, m: int) -> UnificationProblem:
    """Parse semicolon-separated equations 'term = term' over x1..xm."""
    sc = _Scanner(text)
    equations = []
    while True:
        lhs = _parse_term(sc, m)
        sc.expect("=")
        rhs = _parse_term(sc, m)
        equations.append((lhs, rhs))
        if not sc.try_take(";"):
            break
    sc.skip_ws()
    if sc.pos != len(sc.text):
        raise ParseError(f"trailing input {sc.text[sc.pos:]!r}", sc.pos)
    return UnificationProblem(m, tuple(equations))


# ----------------------------------------------------------------------
# semantics


def eval_term(t: Term, point: Vec) -> Fraction:
    """Direct recursive semantics on [0,1]; the oracle for the map builder."""
    if t.op == "var":
        return point[t.index]
    if t.op == "const":
        return Fraction(t.index)
    if t.op == "neg":
        return 1 - eval_term(t.args[0], point)
    a = eval_term(t.args[0], point)
    b = eval_term(t.args[1], point)
    if t.op == "oplus":
        return min(Fraction(1), a + b)
    if t.op == "otimes":
        return max(Fraction(0), a + b - 1)
    if t.op == "join":
        return max(a, b)
    if t.op == "meet":
        return min(a, b)
    raise ValueError(f"unknown operator {t.op}")


def _refine_at_level(h: ZMap, level: int) -> RegularTriangulation:
    """Refine h's triangulation along the locus h = level (piece by piece).

    Cutting every simplex by its own piece's level set keeps traces on
    shared faces consistent, so the pieces reassemble into a complex.
    """
    cells = []
    for pts, piece in zip(h.triangulation.complex.maximal_points, h.pieces):
        row = piece.matrix[0]
        lin, const_ = row[1:], row[0]
        if all(c == 0 for c in lin):
            cells.extend(pulling_triangulation(extreme_points(pts)))
            continue
        plane = normalize_hyperplane((lin, level - const_))
        for part in shatter(pts, [plane]):
            cells.extend(pulling_triangulation(extreme_points(part)))
    k = desingularize(complex_from_maximal(cells))
    return certify(k)


def _common_refinement(f: ZMap, g: ZMap) -> RegularTriangulation:
    family = [
        Polyhedron((simplex_polytope(tuple(sorted(p))),))
        for zm in (f, g)
        for p in zm.triangulation.complex.maximal_points
    ]
    return joint_refinement(family)


def _rebuild(zm: ZMap, t: RegularTriangulation) -> ZMap:
    values = {v: evaluate(zm, v) for v in t.complex.vertices}
    return extend_vertex_map(t, values, zm.codomain_dim)


def _combine(f: ZMap, g: ZMap, kind: str) -> ZMap:
    t = _common_refinement(f, g)
    fr, gr = _rebuild(f, t), _rebuild(g, t)
    if kind in ("oplus", "otimes"):
        hvals = {
            v: (a[0] + b[0],)
            for v, a, b in zip(t.complex.vertices, fr.vertex_values, gr.vertex_values)
        }
        h = extend_vertex_map(t, hvals, 1)
        t2 = _refine_at_level(h, 1)
        out = {}
        for v in t2.complex.vertices:
            s = evaluate(f, v)[0] + evaluate(g, v)[0]
            out[v] = (min(Fraction(1), s),) if kind == "oplus" else (max(Fraction(0), s - 1),)
        return extend_vertex_map(t2, out, 1)
    # join / meet split along f - g = 0
    dvals = {
        v: (a[0] - b[0],)
        for v, a, b in zip(t.complex.vertices, fr.vertex_values, gr.vertex_values)
    }
    d = extend_vertex_map(t, dvals, 1)
    t2 = _refine_at_level(d, 0)
    out = {}
    for v in t2.complex.vertices:
        a, b = evaluate(f, v)[0], evaluate(g, v)[0]
        out[v] = (max(a, b),) if kind == "join" else (min(a, b),)
    return extend_vertex_map(t2, out, 1)


def mcnaughton(t: Term, m: int) -> ZMap:
    """The piecewise-linear function of a term, as a map [0,1]^m -> [0,1].

    Built bottom-up; every connective refines the triangulation along the
    locus where its defining min/max switches branch.
    """
    if not 1 <= m <= 4:
        raise UnsupportedArity(f"term semantics supports 1 <= m <= 4, got {m}")
    cube = triangulate_cube(m)
    if t.op == "var":
        return extend_vertex_map(
            cube, {v: (v[t.index],) for v in cube.complex.vertices}, 1
        )
    if t.op == "const":
        return extend_vertex_map(
            cube, {v: (Fraction(t.index),) for v in cube.complex.vertices}, 1
        )
    if t.op == "neg":
        inner = mcnaughton(t.args[0], m)
        values = {
            v: (1 - val[0],)
            for v, val in zip(inner.triangulation.complex.vertices, inner.vertex_values)
        }
        return extend_vertex_map(inner.triangulation, values, 1)
    f = mcnaughton(t.args[0], m)
    g = mcnaughton(t.args[1], m)
    return _combine(f, g, t.op)


# ----------------------------------------------------------------------
# solution polyhedra and unifier checking


def solution_polyhedron(p: UnificationProblem) -> Polyhedron:
    """The set of points of the cube satisfying every equation, as a
    union of simplices over a joint refinement of the sides' maps."""
    if not 1 <= p.arity <= 4:
        raise UnsupportedArity(f"supported arity is 1..4, got {p.arity}")
    maps = []
    for lhs, rhs in p.equations:
        maps.append((mcnaughton(lhs, p.arity), mcnaughton(rhs, p.arity)))
    family = [
        Polyhedron((simplex_polytope(tuple(sorted(pts))),))
        for pair in maps
        for zm in pair
        for pts in zm.triangulation.complex.maximal_points
    ]
    t = joint_refinement(family)

    n = p.arity
    cells = []
    for pts in t.complex.maximal_points:
        poly = simplex_polytope(tuple(sorted(pts)))
        bc = barycenter(pts)
        eqs = []
        feasible = True
        for fmap, gmap in maps:
            frow = _piece_row_at(fmap, bc)
            grow = _piece_row_at(gmap, bc)
            diff_lin = tuple(a - b for a, b in zip(frow[1:], grow[1:]))
            diff_const = frow[0] - grow[0]
            if all(c == 0 for c in diff_lin):
                if diff_const != 0:
                    feasible = False
                    break
                continue
            eqs.append(normalize_hyperplane((diff_lin, -diff_const)))
        if not feasible:
            continue
        verts = vertex_enumeration(
            poly.system.equalities + tuple(eqs), poly.system.inequalities, n
        )
        if verts:
            cells.append(verts)
    simplices = set()
    for cell in cells:
        simplices.update(pulling_triangulation(cell))
    polys = tuple(simplex_polytope(tuple(sorted(s))) for s in sorted(simplices))
    return Polyhedron(tuple(dict.fromkeys(polys)))


def _piece_row_at(zm: ZMap, interior_point: Vec):
    """The (constant, coefficients) row of zm's piece covering the point."""
    for pts, piece in zip(zm.triangulation.complex.maximal_points, zm.pieces):
        lam = barycentric(pts, interior_point)
        if lam is not None and all(c >= 0 for c in lam):
            return piece.matrix[0]
    raise ValueError("point not covered by the map's triangulation")


def check_unifier(p: UnificationProblem, sigma: ZMap) -> bool:
    """Whether sigma maps its cube domain into the problem's solution set."""
    if sigma.codomain_dim != p.arity:
        raise DimensionMismatch(
            f"unifier codomain {sigma.codomain_dim} != problem arity {p.arity}"
        )
    _require_cube_domain(sigma)
    return is_into(sigma, solution_polyhedron(p))


def _unit_simplex(n: int) -> tuple[Vec, ...]:
    pts = [tuple(Fraction(0) for _ in range(n))]
    for i in range(n):
        pts.append(tuple(Fraction(1 if j == i else 0) for j in range(n)))
    return tuple(pts)


def _require_cube_domain(sigma: ZMap) -> None:
    """The carrier must be exactly the unit cube of the domain dimension."""
    from math import factorial

    from .geometry import volume_in_chart

    n = sigma.domain_dim
    chart = _unit_simplex(n)
    total = Fraction(0)
    for pts in sigma.triangulation.complex.maximal_points:
        for v in pts:
            if any(c < 0 or c > 1 for c in v):
                raise DimensionMismatch("domain is not contained in the unit cube")
        if len(pts) == n + 1:
            total += volume_in_chart(chart, pts)
    # chart volumes carry a factor n! relative to ordinary volume
    if total != factorial(n):
        raise DimensionMismatch("domain does not cover the unit cube")
