"""The ambient surfaces: curves, points, flags and local expansions.

Two models are supported, the projective plane (homogeneous coordinates
X, Y, Z) and the product of two projective lines (X0, X1, Y0, Y1, separately
homogeneous in each pair).  A flag is a closed point on an irreducible curve
that is smooth there; attached to it is a deterministic choice of local
coordinates (u, t), with t a local equation of the curve, and the expansion
machinery realizing rational functions as elements of k(x)((u))((t)).

Closed points are Galois orbits, stored as the lexicographically least
normalized representative over their exact residue field; all enumeration
orders are deterministic so golden values are stable.
"""

from __future__ import annotations

import json
import re
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .fields import (
    FieldDesc,
    FieldElem,
    embed,
    field_make,
    pdeg,
    peval,
    pgcd,
    poly_factor,
    poly_roots,
    ptrim,
)
from .multipoly import MPoly
from .series import DEFAULT_PREC, LaurentSeries2, PrecisionError

ClassVector = Union[int, Tuple[int, int]]


# ---------------------------------------------------------------------------
# surfaces and charts


class Chart:
    """An affine chart: one (or one per factor) coordinate set to 1."""

    __slots__ = ("name", "unit_vars", "affine_vars")

    def __init__(self, name: str, unit_vars: Tuple[int, ...], affine_vars: Tuple[int, int]):
        self.name = name
        self.unit_vars = unit_vars      # homogeneous variables set to 1
        self.affine_vars = affine_vars  # homogeneous variables kept, in order

    def __repr__(self):
        return f"Chart({self.name})"


class Surface:
    """P2 or P1xP1 over a finite base field."""

    __slots__ = ("model", "base", "nvars", "var_names", "charts")

    def __init__(self, model: str, base: FieldDesc):
        if model not in ("P2", "P1xP1"):
            raise ValueError(f"unknown surface model {model!r}")
        self.model = model
        self.base = base
        if model == "P2":
            self.nvars = 3
            self.var_names = ("X", "Y", "Z")
            self.charts = [
                Chart("Z", (2,), (0, 1)),
                Chart("Y", (1,), (0, 2)),
                Chart("X", (0,), (1, 2)),
            ]
        else:
            self.nvars = 4
            self.var_names = ("X0", "X1", "Y0", "Y1")
            self.charts = [
                Chart("X1Y1", (1, 3), (0, 2)),
                Chart("X1Y0", (1, 2), (0, 3)),
                Chart("X0Y1", (0, 3), (1, 2)),
                Chart("X0Y0", (0, 2), (1, 3)),
            ]

    def __eq__(self, other):
        return (
            isinstance(other, Surface)
            and self.model == other.model
            and self.base == other.base
        )

    def __hash__(self):
        return hash((self.model, self.base))

    def __repr__(self):
        return f"{self.model}/GF({self.base.q})"

    # -- polynomial helpers ---------------------------------------------------

    def zero_poly(self) -> MPoly:
        return MPoly.zero(self.base, self.nvars)

    def var(self, i: int) -> MPoly:
        return MPoly.var(self.base, self.nvars, i)

    def poly_class(self, f: MPoly) -> ClassVector:
        """Total degree (P2) or bidegree (P1xP1) of a (bi)homogeneous poly."""
        if self.model == "P2":
            return f.total_degree()
        return (f.degree_in_pair(0, 1), f.degree_in_pair(2, 3))

    def is_homogeneous(self, f: MPoly) -> bool:
        if f.is_zero():
            return True
        if self.model == "P2":
            degs = {sum(e) for e in f.terms}
            return len(degs) == 1
        d1 = {e[0] + e[1] for e in f.terms}
        d2 = {e[2] + e[3] for e in f.terms}
        return len(d1) == 1 and len(d2) == 1

    def dehomogenize(self, f: MPoly, chart: Chart) -> MPoly:
        """Restrict to the chart: unit variables -> 1, affine variables kept
        (as a 2-variable polynomial in the chart's coordinate order)."""
        out = MPoly.zero(f.desc, 2)
        a0, a1 = chart.affine_vars
        for e, c in f.terms.items():
            out = out + MPoly(f.desc, 2, {(e[a0], e[a1]): c})
        return out

    def class_add(self, a: ClassVector, b: ClassVector) -> ClassVector:
        if self.model == "P2":
            return a + b
        return (a[0] + b[0], a[1] + b[1])

    def class_scale(self, n: int, a: ClassVector) -> ClassVector:
        if self.model == "P2":
            return n * a
        return (n * a[0], n * a[1])

    def class_zero(self) -> ClassVector:
        return 0 if self.model == "P2" else (0, 0)

    def canonical_class(self) -> ClassVector:
        return -3 if self.model == "P2" else (-2, -2)


def surface_make(model: str, q: int) -> Surface:
    """Build P2 or P1xP1 over F_q (q any prime power)."""
    p, d = _prime_power(q)
    return Surface(model, field_make(p, d))


def _prime_power(q: int) -> Tuple[int, int]:
    for p in range(2, q + 1):
        if q % p == 0:
            d = 0
            m = q
            while m % p == 0:
                m //= p
                d += 1
            if m != 1:
                raise ValueError(f"{q} is not a prime power")
            return p, d
    raise ValueError(f"{q} is not a prime power")


# ---------------------------------------------------------------------------
# polynomial text parsing

_MONO_RE = re.compile(r"([+-]?)\s*(\d*)\s*((?:[A-Z]\d?(?:\^\d+)?)*)\s*")
_VAR_RE = re.compile(r"([A-Z]\d?)(?:\^(\d+))?")


def parse_poly(S: Surface, text: str) -> MPoly:
    """Parse `3X^2Y - YZ + Z^2`-style homogeneous polynomial text."""
    names = {n: i for i, n in enumerate(S.var_names)}
    pos = 0
    text = text.strip()
    acc = S.zero_poly()
    while pos < len(text):
        m = _MONO_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unparseable polynomial near {text[pos:pos+12]!r}")
        sign, coeff_s, vars_s = m.groups()
        coeff = int(coeff_s) if coeff_s else 1
        if sign == "-":
            coeff = -coeff
        exps = [0] * S.nvars
        for vm in _VAR_RE.finditer(vars_s):
            name, power = vm.group(1), vm.group(2)
            if name not in names:
                raise ValueError(f"unknown variable {name!r} on {S.model}"
                                 f" (expected one of {', '.join(S.var_names)})")
            exps[names[name]] += int(power) if power else 1
        if not coeff_s and not vars_s:
            raise ValueError(f"empty monomial near {text[pos:pos+12]!r}")
        acc = acc + MPoly(S.base, S.nvars, {tuple(exps): S.base.from_int(coeff)})
        pos = m.end()
    if not S.is_homogeneous(acc):
        raise ValueError(f"{text!r} is not homogeneous for {S.model}")
    return acc


def poly_text(S: Surface, f: MPoly) -> str:
    if f.is_zero():
        return "0"
    bits = []
    for e in sorted(f.terms, reverse=True):
        c = f.terms[e]
        mono = "".join(
            f"{S.var_names[i]}" + (f"^{k}" if k > 1 else "")
            for i, k in enumerate(e) if k
        )
        cs = "" if (c.is_one() and mono) else _coeff_text(c)
        bits.append((cs + mono) or "1")
    return " + ".join(bits)


def _coeff_text(c: FieldElem) -> str:
    if c.desc.d == 1:
        return str(c.coeffs[0])
    return "[" + ",".join(str(v) for v in c.coeffs) + "]"


# ---------------------------------------------------------------------------
# rational functions


class RationalFunction:
    """A ratio of two (bi)homogeneous polynomials of equal class."""

    __slots__ = ("surface", "num", "den")

    def __init__(self, surface: Surface, num: MPoly, den: MPoly):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not (surface.is_homogeneous(num) and surface.is_homogeneous(den)):
            raise ValueError("numerator and denominator must be homogeneous")
        if not num.is_zero() and surface.poly_class(num) != surface.poly_class(den):
            raise ValueError("numerator and denominator classes differ")
        self.surface = surface
        self.num = num
        self.den = den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.surface, self.num * other.num, self.den * other.den)

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of the zero function")
        return RationalFunction(self.surface, self.den, self.num)

    def __eq__(self, other):
        if not isinstance(other, RationalFunction) or self.surface != other.surface:
            return False
        return (self.num * other.den) == (other.num * self.den)

    def __repr__(self):
        return (f"({poly_text(self.surface, self.num)})"
                f"/({poly_text(self.surface, self.den)})")


# ---------------------------------------------------------------------------
# curves


class Curve:
    """An irreducible (bi)homogeneous curve with canonical normalization."""

    __slots__ = ("surface", "poly", "name", "_key")

    def __init__(self, surface: Surface, poly: MPoly, name: Optional[str] = None):
        self.surface = surface
        self.poly = poly
        self.name = name
        self._key = (surface.model, surface.base.q,
                     tuple(sorted((e, c.coeffs) for e, c in poly.terms.items())))

    def degree(self) -> ClassVector:
        return self.surface.poly_class(self.poly)

    def __eq__(self, other):
        return isinstance(other, Curve) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        label = self.name or poly_text(self.surface, self.poly)
        return f"Curve({label})"


def _normalize_scalar(f: MPoly) -> MPoly:
    lead = max(f.terms)
    c = f.terms[lead]
    return f if c.is_one() else f.scale(c.inverse())


def _candidate_polys(S: Surface, cls: ClassVector) -> Iterable[MPoly]:
    """All nonzero (bi)homogeneous polynomials of the given class, normalized
    so their first (lex-greatest) nonzero coefficient is 1."""
    desc = S.base
    if S.model == "P2":
        d = cls
        monos = [(i, j, d - i - j) for i in range(d, -1, -1)
                 for j in range(d - i, -1, -1)]
    else:
        a, b = cls
        monos = [(i, a - i, j, b - j) for i in range(a, -1, -1)
                 for j in range(b, -1, -1)]
    monos.sort(reverse=True)
    n = len(monos)
    elems = list(desc.elems())
    q = desc.q
    # first nonzero coefficient (in lex-monomial order) pinned to 1
    for lead in range(n):
        total = q ** (n - lead - 1)
        for code in range(total):
            terms = {monos[lead]: desc.one()}
            m = code
            for k in range(lead + 1, n):
                c = elems[m % q]
                m //= q
                if not c.is_zero():
                    terms[monos[k]] = c
            yield MPoly(desc, S.nvars, terms)


def _class_halves(S: Surface, cls: ClassVector) -> List[ClassVector]:
    """Proper divisor classes to test, up to half the total degree."""
    if S.model == "P2":
        return [d for d in range(1, cls // 2 + 1)]
    a, b = cls
    out = []
    for c in range(a + 1):
        for d in range(b + 1):
            if (c, d) == (0, 0) or (c, d) == (a, b):
                continue
            if 2 * (c + d) <= a + b:
                out.append((c, d))
    return out


def curve_make(S: Surface, poly: Union[MPoly, str], name: Optional[str] = None) -> Curve:
    """Validated irreducible curve; raises listing a factor pair otherwise."""
    if isinstance(poly, str):
        poly = parse_poly(S, poly)
    if poly.is_zero():
        raise ValueError("the zero polynomial does not define a curve")
    if not S.is_homogeneous(poly):
        raise ValueError("curve polynomial must be homogeneous")
    f = _normalize_scalar(poly)
    cls = S.poly_class(f)
    total = cls if S.model == "P2" else cls[0] + cls[1]
    if total <= 0:
        raise ValueError("a curve must have positive degree")
    if total > 1:
        for sub in _class_halves(S, cls):
            for g in _candidate_polys(S, sub):
                h = f.exact_div(g)
                if h is not None:
                    gt = poly_text(S, _normalize_scalar(g))
                    ht = poly_text(S, _normalize_scalar(h))
                    raise ValueError(f"reducible curve: factors ({gt}) * ({ht})")
    return Curve(S, f, name)


# ---------------------------------------------------------------------------
# closed points


class ClosedPoint:
    """A Galois orbit of geometric points, by its least normalized member."""

    __slots__ = ("surface", "residue_field", "coords", "degree")

    def __init__(self, surface: Surface, residue_field: FieldDesc,
                 coords: Tuple[FieldElem, ...], degree: int):
        self.surface = surface
        self.residue_field = residue_field
        self.coords = coords
        self.degree = degree

    def sort_key(self):
        return (self.degree, tuple(c.sort_key() for c in self.coords))

    def __eq__(self, other):
        return (
            isinstance(other, ClosedPoint)
            and self.surface == other.surface
            and self.degree == other.degree
            and tuple(c.coeffs for c in self.coords) == tuple(c.coeffs for c in other.coords)
        )

    def __hash__(self):
        return hash((self.degree, tuple(c.coeffs for c in self.coords)))

    def __repr__(self):
        if self.surface.model == "P2":
            inner = ":".join(repr(c) for c in self.coords)
            return f"({inner})"
        a = ":".join(repr(c) for c in self.coords[:2])
        b = ":".join(repr(c) for c in self.coords[2:])
        return f"({a})x({b})"


def _normalize_proj(surface: Surface, coords: List[FieldElem]) -> Tuple[FieldElem, ...]:
    """Scale so the first nonzero coordinate of each factor is 1."""
    groups = [(0, 3)] if surface.model == "P2" else [(0, 2), (2, 4)]
    out = list(coords)
    for lo, hi in groups:
        lead = next((i for i in range(lo, hi) if not out[i].is_zero()), None)
        if lead is None:
            raise ValueError("projective coordinates cannot be all zero")
        inv = out[lead].inverse()
        for i in range(lo, hi):
            out[i] = out[i] * inv
    return tuple(out)


def _frobenius_point(surface: Surface, coords: Tuple[FieldElem, ...], q: int):
    return _normalize_proj(surface, [c ** q for c in coords])


def _orbit_representative(surface: Surface, coords: Tuple[FieldElem, ...],
                          q: int) -> Tuple[Tuple[FieldElem, ...], int]:
    """(lex-least orbit member, exact degree) under x -> x^q."""
    best = coords
    cur = coords
    size = 1
    while True:
        cur = _frobenius_point(surface, list(cur), q)
        if cur == coords:
            break
        if tuple(c.sort_key() for c in cur) < tuple(c.sort_key() for c in best):
            best = cur
        size += 1
    return best, size


def _proj_points(surface: Surface, field: FieldDesc) -> Iterable[Tuple[FieldElem, ...]]:
    """All normalized points of the ambient space over `field`."""
    one = field.one()
    zero = field.zero()
    elems = list(field.elems())
    if surface.model == "P2":
        for y in elems:
            for z in elems:
                yield (one, y, z)
        for z in elems:
            yield (zero, one, z)
        yield (zero, zero, one)
    else:
        line = [(one, x) for x in elems] + [(zero, one)]
        for a in line:
            for b in line:
                yield (a[0], a[1], b[0], b[1])


def _coords_down(coords: Tuple[FieldElem, ...], sub: FieldDesc) -> Tuple[FieldElem, ...]:
    from .fields import coerce_down
    return tuple(coerce_down(c, sub) for c in coords)


def points_on_curve(D: Curve, max_degree: int) -> List[ClosedPoint]:
    """Closed points of degree <= max_degree, one per orbit, sorted."""
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    S = D.surface
    base = S.base
    q = base.q
    out: List[ClosedPoint] = []
    for m in range(1, max_degree + 1):
        ext = field_make(base.p, base.d * m)
        seen = set()
        for coords in _proj_points(S, ext):
            if not D.poly.evaluate(list(coords)).is_zero():
                continue
            rep, size = _orbit_representative(S, coords, q)
            if size != m:
                continue
            key = tuple(c.coeffs for c in rep)
            if key in seen:
                continue
            seen.add(key)
            out.append(ClosedPoint(S, ext, rep, m))
    out.sort(key=ClosedPoint.sort_key)
    return out


def point_from_coords(S: Surface, coords: Sequence[FieldElem]) -> ClosedPoint:
    """Closed point through the given geometric point (exact degree computed)."""
    field = coords[0].desc
    norm = _normalize_proj(S, list(coords))
    rep, size = _orbit_representative(S, norm, S.base.q)
    exact = field_make(S.base.p, S.base.d * size)
    if exact != field:
        rep = _coords_down(rep, exact)
    return ClosedPoint(S, exact, rep, size)


# ---------------------------------------------------------------------------
# intersection of two curves (support only)


def intersection_support(C: Curve, H: Curve) -> List[ClosedPoint]:
    """The closed points lying on both curves, via chartwise resultants."""
    if C == H:
        raise ValueError("curves share a component")
    S = C.surface
    base = S.base
    found: Dict[tuple, ClosedPoint] = {}
    from .multipoly import resultant_elim

    for chart in S.charts:
        f = S.dehomogenize(C.poly, chart)
        g = S.dehomogenize(H.poly, chart)
        if f.is_zero() or g.is_zero():
            continue
        # eliminate the second chart variable; roots of the resultant give
        # candidate first coordinates
        res = resultant_elim(f, g, elim=1, keep=0)
        if not res:
            # distinct irreducible curves stay coprime in every chart, so a
            # vanishing resultant signals a shared component after all
            raise ValueError("curves share a component")
        _, factors = poly_factor(res, base)
        for irr, _mult in factors:
            e = pdeg(irr)
            if e < 1:
                continue
            ext = field_make(base.p, base.d * e)
            irr_up = [embed(c, ext) for c in irr]
            for x0, _ in poly_roots(ptrim(list(irr_up)), ext):
                _collect_fiber_points(S, chart, f, g, x0, ext, found)
    pts = sorted(found.values(), key=ClosedPoint.sort_key)
    return pts


def _collect_fiber_points(S: Surface, chart: Chart, f: MPoly, g: MPoly,
                          x0: FieldElem, ext: FieldDesc,
                          found: Dict[tuple, ClosedPoint]) -> None:
    """Solve for the second chart coordinate over ext at first coord x0."""
    fy = _eval_first_var(f, x0, ext)
    gy = _eval_first_var(g, x0, ext)
    if not fy and not gy:
        return
    if not fy or not gy:
        common = fy or gy
        # the other curve vanishes identically on this fiber only if its
        # dehomogenization was zero, excluded earlier; a zero evaluation
        # here means every y works for that curve
        h = common
    else:
        h = pgcd(fy, gy, ext)
    if pdeg(h) < 1:
        return
    _, factors = poly_factor(h, ext)
    for irr, _m in factors:
        e2 = pdeg(irr)
        if e2 < 1:
            continue
        ext2 = field_make(ext.p, ext.d * e2)
        irr_up = ptrim([embed(c, ext2) for c in irr])
        x0_up = embed(x0, ext2)
        for y0, _ in poly_roots(irr_up, ext2):
            coords = _chart_point_coords(S, chart, x0_up, y0, ext2)
            pt = point_from_coords(S, coords)
            found[(pt.degree, tuple(c.coeffs for c in pt.coords))] = pt


def _eval_first_var(f: MPoly, x0: FieldElem, ext: FieldDesc):
    """f(x0, y) as a univariate polynomial over ext."""
    out = []
    for c in f.to_univariate(1):
        if c.is_zero():
            out.append(ext.zero())
        else:
            out.append(peval([embed(a, ext) for a in c.as_poly_in(0)], x0))
    return ptrim(out)


def _chart_point_coords(S: Surface, chart: Chart, x0: FieldElem, y0: FieldElem,
                        field: FieldDesc) -> List[FieldElem]:
    coords = [field.zero()] * S.nvars
    for v in chart.unit_vars:
        coords[v] = field.one()
    coords[chart.affine_vars[0]] = x0
    coords[chart.affine_vars[1]] = y0
    return coords


# ---------------------------------------------------------------------------
# flags and local expansion


class Flag:
    """A point on a curve with a deterministic local coordinate pair."""

    __slots__ = ("point", "curve", "chart", "u_index", "u_value", "t_param",
                 "point_affine", "_cache")

    def __init__(self, point: ClosedPoint, curve: Curve, chart: Chart,
                 u_index: int, u_value: FieldElem, t_param: MPoly,
                 point_affine: Tuple[FieldElem, FieldElem]):
        self.point = point
        self.curve = curve
        self.chart = chart
        self.u_index = u_index        # which chart coordinate (0 or 1) is u
        self.u_value = u_value        # its value at the point
        self.t_param = t_param        # dehomogenized curve equation (2 vars)
        self.point_affine = point_affine
        self._cache: Dict = {}

    @property
    def u_param(self) -> MPoly:
        """u as an affine expression: (chosen chart coordinate) - value."""
        k = self.point.residue_field
        coord = MPoly.var(k, 2, self.u_index)
        return coord - MPoly.const(k, 2, self.u_value)

    def __repr__(self):
        return (f"Flag({self.point!r} on {self.curve!r}, chart {self.chart.name},"
                f" u=c{self.u_index})")


def flag_make(x: ClosedPoint, D: Curve) -> Flag:
    """Local coordinates at x on D: t = local equation of D, u = the first
    chart coordinate whose differential stays independent of dt at x."""
    S = D.surface
    k = x.residue_field
    chart = None
    for ch in S.charts:
        if all(not x.coords[v].is_zero() for v in ch.unit_vars):
            chart = ch
            break
    if chart is None:  # pragma: no cover - charts cover the surface
        raise RuntimeError("no chart contains the point")
    # affine coordinates of x in this chart
    aff = []
    for v in chart.affine_vars:
        unit = chart.unit_vars[0] if S.model == "P2" else (
            chart.unit_vars[0] if v in (0, 1) else chart.unit_vars[1])
        aff.append(x.coords[v] / x.coords[unit])
    t_param_base = S.dehomogenize(D.poly, chart)
    if t_param_base.is_zero():
        raise ValueError("curve does not meet this chart")
    t_param = _mp_embed(t_param_base, k)
    # check the point is on the curve in this chart
    if not t_param.evaluate(list(aff)).is_zero():
        raise ValueError("point does not lie on the curve")
    d0 = t_param.derivative(0).evaluate(list(aff))
    d1 = t_param.derivative(1).evaluate(list(aff))
    if not d1.is_zero():
        u_index = 0
    elif not d0.is_zero():
        u_index = 1
    else:
        raise ValueError(f"curve is singular at {x!r} (no admissible flag)")
    return Flag(x, D, chart, u_index, aff[u_index], t_param, (aff[0], aff[1]))


def _mp_embed(f: MPoly, ext: FieldDesc) -> MPoly:
    if f.desc == ext:
        return f
    return MPoly(ext, f.nvars, {e: embed(c, ext) for e, c in f.terms.items()})


def mp_eval_series(f: MPoly, args: Sequence[LaurentSeries2],
                   desc: FieldDesc) -> LaurentSeries2:
    """Evaluate a polynomial at series arguments (coefficients in desc)."""
    pows: List[Dict[int, LaurentSeries2]] = [dict() for _ in range(f.nvars)]

    def pw(i: int, n: int) -> LaurentSeries2:
        got = pows[i].get(n)
        if got is None:
            got = args[i] ** n
            pows[i][n] = got
        return got

    acc = LaurentSeries2.zero(desc)
    for e, c in f.terms.items():
        term = LaurentSeries2.const(desc, c)
        for i, k in enumerate(e):
            if k:
                term = term * pw(i, k)
        acc = acc + term
    return acc


def _solve_second_coord(fl: Flag, window: int) -> LaurentSeries2:
    """The non-u chart coordinate as a series B(u, t) with B(0,0) = its value
    at the point, solving t_param(coords) = t by Hensel iteration."""
    k = fl.point.residue_field
    other = 1 - fl.u_index
    b0 = fl.point_affine[other]
    u_series = LaurentSeries2.monomial(k, k.one(), 0, 1) + \
        LaurentSeries2.const(k, fl.u_value)
    t_series = LaurentSeries2.monomial(k, k.one(), 1, 0)

    def coords_for(Bk: LaurentSeries2) -> List[LaurentSeries2]:
        if fl.u_index == 0:
            return [u_series, Bk]
        return [Bk, u_series]

    dT = fl.t_param.derivative(other)
    B = LaurentSeries2.const(k, b0)
    for _ in range(window.bit_length() + 2):
        cur = [c.truncate(window, window) for c in coords_for(B)]
        resid = mp_eval_series(fl.t_param, cur, k) - t_series
        resid = resid.truncate(window, window)
        if resid.is_zero_window():
            return B.truncate(window, window)
        deriv = mp_eval_series(dT, cur, k).truncate(window, window)
        B = (B - resid * deriv.inverse()).truncate(window, window)
    raise RuntimeError("coordinate solution did not converge")  # pragma: no cover


def flag_coordinate_series(fl: Flag, window: int) -> List[LaurentSeries2]:
    """Expansions of the two chart coordinates at the flag, cached."""
    key = ("coords", window)
    got = fl._cache.get(key)
    if got is not None:
        return got
    k = fl.point.residue_field
    u_series = LaurentSeries2.monomial(k, k.one(), 0, 1) + \
        LaurentSeries2.const(k, fl.u_value)
    B = _solve_second_coord(fl, window)
    out = [u_series, B] if fl.u_index == 0 else [B, u_series]
    fl._cache[key] = out
    return out


def expand_poly_at_flag(P: MPoly, fl: Flag, window: int) -> LaurentSeries2:
    """Expansion of a (bi)homogeneous polynomial, dehomogenized in the flag's
    chart, as a series in (u, t); cached per (polynomial, window)."""
    S = fl.curve.surface
    key = ("poly", _poly_key(P), window)
    got = fl._cache.get(key)
    if got is not None:
        return got
    k = fl.point.residue_field
    affine = _mp_embed(S.dehomogenize(P, fl.chart), k)
    coords = flag_coordinate_series(fl, window)
    out = mp_eval_series(affine, coords, k)
    fl._cache[key] = out
    return out


def expand_power_at_flag(P: MPoly, n: int, fl: Flag, window: int) -> LaurentSeries2:
    """Cached n-th power (n may be negative) of an expanded polynomial."""
    key = ("polypow", _poly_key(P), n, window)
    got = fl._cache.get(key)
    if got is not None:
        return got
    if n >= 0:
        out = expand_poly_at_flag(P, fl, window) ** n
    else:
        out = invert_poly_at_flag(P ** (-n), fl, window)
    fl._cache[key] = out
    return out


def invert_poly_at_flag(P: MPoly, fl: Flag, window: int) -> LaurentSeries2:
    """Inverse of P's expansion, good on the full requested window.

    The t-valuation of the expansion is pinned down exactly (it is the
    multiplicity of the flag's curve in P), because a square window can hide
    the whole leading t-column when its u-valuation is large -- reading the
    valuation off the tracked terms would then invert about the wrong
    leading term.  Once the leading column is visible, the polynomial is
    re-expanded on a u-wider box sized so the erosion the division causes
    (2*lead for the leading-column inverse, plus a dip per Neumann step)
    lands exactly where the requested window begins.
    """
    key = ("polyinv", _poly_key(P), window)
    got = fl._cache.get(key)
    if got is not None:
        return got
    vt = _poly_ord(P, fl.curve)
    e = expand_poly_at_flag(P, fl, window)
    u_wide = window
    while not any(t == vt for (t, _u) in e.terms):
        u_wide *= 2
        if u_wide > 64 * window + 4096:
            raise PrecisionError(
                "leading coefficient sits too deep in u to reach")
        e = expand_poly_at_flag(P, fl, u_wide).truncate(t_to=window)
    lead_u = min(u for (t, u) in e.terms if t == vt)
    size = max(1, window - vt)
    min_step = None
    max_dip = 0
    for (t, u) in e.terms:
        if t == vt:
            continue
        min_step = t - vt if min_step is None else min(min_step, t - vt)
        max_dip = max(max_dip, lead_u - u)
    if lead_u > 0 or max_dip > 0:
        steps = 1 - (-size // (min_step or 1))
        wide = window + 2 * lead_u + steps * max_dip
        e = expand_poly_at_flag(P, fl, wide).truncate(t_to=window)
    out = e.inverse(t_window=window, u_window=window)
    fl._cache[key] = out
    return out


def _ratio_at_flag(num: MPoly, den: MPoly, fl: Flag,
                   window: int) -> LaurentSeries2:
    """num/den expanded at the flag; the numerator window is widened to
    survive multiplication against an inverse whose terms dip in u."""
    inv = invert_poly_at_flag(den, fl, window)
    need = window
    if inv.terms:
        dip = min(u for (_t, u) in inv.terms)
        if dip < 0:
            need = window - dip
    top = expand_poly_at_flag(num, fl, need).truncate(t_to=window)
    return top * inv


def _poly_key(P: MPoly):
    return tuple(sorted((e, c.coeffs) for e, c in P.terms.items()))


def expand_at_flag(f: RationalFunction, fl: Flag,
                   prec: int = DEFAULT_PREC) -> LaurentSeries2:
    """The image of a rational function in the local field at the flag."""
    if f.is_zero():
        raise ValueError("cannot expand the zero function")
    return _ratio_at_flag(f.num, f.den, fl, prec)


def ord_on_curve(f: RationalFunction, D: Curve) -> int:
    """Multiplicity of D in div(f), by exact polynomial division."""
    if f.is_zero():
        raise ValueError("ord of the zero function")
    return _poly_ord(f.num, D) - _poly_ord(f.den, D)


def _poly_ord(P: MPoly, D: Curve) -> int:
    n = 0
    cur = P
    while True:
        nxt = cur.exact_div(D.poly)
        if nxt is None:
            return n
        cur = nxt
        n += 1


# ---------------------------------------------------------------------------
# divisors


class Divisor:
    """A finite formal sum of irreducible curves with integer multiplicities."""

    __slots__ = ("surface", "components")

    def __init__(self, surface: Surface, components: Dict[Curve, int]):
        self.surface = surface
        self.components = {c: m for c, m in components.items() if m != 0}

    def __add__(self, other: "Divisor") -> "Divisor":
        out = dict(self.components)
        for c, m in other.components.items():
            out[c] = out.get(c, 0) + m
        return Divisor(self.surface, out)

    def __neg__(self) -> "Divisor":
        return Divisor(self.surface, {c: -m for c, m in self.components.items()})

    def scale(self, n: int) -> "Divisor":
        return Divisor(self.surface, {c: n * m for c, m in self.components.items()})

    def items(self) -> List[Tuple[Curve, int]]:
        return sorted(self.components.items(), key=lambda cm: cm[0]._key)

    def __eq__(self, other):
        return (isinstance(other, Divisor) and self.surface == other.surface
                and self.components == other.components)

    def __repr__(self):
        if not self.components:
            return "0"
        return " + ".join(f"{m}*{c!r}" for c, m in self.items())


def divisor_class(D: Divisor) -> ClassVector:
    S = D.surface
    acc = S.class_zero()
    for c, m in D.components.items():
        acc = S.class_add(acc, S.class_scale(m, c.degree()))
    return acc


def divisor_of_function(f: RationalFunction, candidates: Iterable[Curve]) -> Divisor:
    """div(f) restricted to the candidate components."""
    return Divisor(f.surface, {D: ord_on_curve(f, D) for D in candidates})


# the fixed global 2-form: d(x) ^ d(y) in the first chart's coordinates


def canonical_local_form(fl: Flag, window: int) -> LaurentSeries2:
    """The coefficient J of the fixed 2-form in flag coordinates: the form is
    d(chart0 coord0) ^ d(chart0 coord1) globally, and equals J du^dt here."""
    key = ("omega", window)
    got = fl._cache.get(key)
    if got is not None:
        return got
    S = fl.curve.surface
    std = S.charts[0]
    # the standard-chart coordinates as ratios of homogeneous variables
    if S.model == "P2":
        pairs = [(S.var(0), S.var(2)), (S.var(1), S.var(2))]
    else:
        pairs = [(S.var(0), S.var(1)), (S.var(2), S.var(3))]
    series = [_ratio_at_flag(num, den, fl, window) for num, den in pairs]
    x_s, y_s = series
    jac = (x_s.derive("u") * y_s.derive("t")
           - x_s.derive("t") * y_s.derive("u"))
    fl._cache[key] = jac
    return jac


_FORM_ORDER_CACHE: Dict[Curve, int] = {}


def form_order_on_curve(S: Surface, D: Curve, window: int = DEFAULT_PREC) -> int:
    """ord_D of the fixed 2-form, via its local expression at one flag."""
    got = _FORM_ORDER_CACHE.get(D)
    if got is not None:
        return got
    # one smooth point suffices; search low degrees first, since point
    # enumeration over the degree-d extension grows like q^(2d)
    for max_degree in (1, 2, 3):
        for pt in points_on_curve(D, max_degree):
            if pt.degree < max_degree:
                continue
            try:
                fl = flag_make(pt, D)
            except ValueError:
                continue
            w = window
            for _ in range(4):
                jac = canonical_local_form(fl, w)
                if not jac.is_zero_window():
                    order = jac.t_valuation()
                    _FORM_ORDER_CACHE[D] = order
                    return order
                w *= 2
            raise PrecisionError(
                "form order did not stabilize; raise precision")
    raise RuntimeError("no smooth point found on the curve")  # pragma: no cover


def divisor_of_form(S: Surface, candidates: Iterable[Curve]) -> Tuple[Divisor, bool]:
    """Orders of the fixed 2-form along the candidates; checked means the
    candidate list accounts for the full canonical class."""
    comps = {}
    for D in candidates:
        comps[D] = form_order_on_curve(S, D)
    div = Divisor(S, comps)
    checked = divisor_class(div) == S.canonical_class()
    return div, checked


# ---------------------------------------------------------------------------
# fixture serialization


def _mp_to_json(f: MPoly) -> list:
    return [[list(e), list(c.coeffs)] for e, c in sorted(f.terms.items())]


def _mp_from_json(S: Surface, data: list) -> MPoly:
    terms = {}
    for e, c in data:
        terms[tuple(e)] = S.base.from_coeffs(c)
    return MPoly(S.base, S.nvars, terms)


def fixture_dump(S: Surface, curves: Dict[str, Curve],
                 divisors: Dict[str, Divisor],
                 functions: Dict[str, RationalFunction]) -> str:
    doc = {
        "surface": S.model,
        "q": S.base.q,
        "curves": {n: _mp_to_json(c.poly) for n, c in sorted(curves.items())},
        "divisors": {
            n: {cn: m for cn, m in sorted(
                (next(k for k, v in curves.items() if v == c), m)
                for c, m in d.components.items())}
            for n, d in sorted(divisors.items())
        },
        "functions": {n: {"num": _mp_to_json(f.num), "den": _mp_to_json(f.den)}
                      for n, f in sorted(functions.items())},
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def fixture_load(text: str):
    doc = json.loads(text)
    S = surface_make(doc["surface"], doc["q"])
    curves = {n: curve_make(S, _mp_from_json(S, d), name=n)
              for n, d in doc["curves"].items()}
    divisors = {n: Divisor(S, {curves[cn]: m for cn, m in d.items()})
                for n, d in doc["divisors"].items()}
    functions = {n: RationalFunction(S, _mp_from_json(S, d["num"]),
                                     _mp_from_json(S, d["den"]))
                 for n, d in doc["functions"].items()}
    return S, curves, divisors, functions
