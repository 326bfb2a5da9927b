"""Tame symbols, idele choosers, and intersection numbers two ways.

The pairing K* x K* -> Z at a flag is the tame symbol in the t-direction
followed by the u-valuation; weighting by residue degrees and negating
gives the exponent of the commutator pairing, whose value on the standard
idele choices recovers the intersection number of divisors.  An independent
classical oracle computes the same number from resultant root orders in a
sheared coordinate frame over a splitting field.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .fields import (
    FieldDesc,
    FieldElem,
    embed,
    field_make,
    pdeg,
    poly_roots,
    ptrim,
)
from .multipoly import MPoly, resultant_elim
from .series import LaurentSeries1, LaurentSeries2, PrecisionError
from .surface import (
    ClassVector,
    ClosedPoint,
    Curve,
    Divisor,
    Flag,
    RationalFunction,
    Surface,
    _mp_embed,
    curve_make,
    divisor_class,
    expand_at_flag,
    flag_make,
    intersection_support,
    ord_on_curve,
)

DEFAULT_SYMBOL_PREC = 8
MAX_ESCALATIONS = 4


class QPower:
    """An exact power of q, with an optional rational multiplier."""

    __slots__ = ("exponent", "multiplier")

    def __init__(self, exponent: int, multiplier: Fraction = Fraction(1)):
        if multiplier == 0:
            raise ValueError("QPower multiplier must be nonzero")
        self.exponent = exponent
        self.multiplier = Fraction(multiplier)

    def __mul__(self, other: "QPower") -> "QPower":
        return QPower(self.exponent + other.exponent,
                      self.multiplier * other.multiplier)

    def __truediv__(self, other: "QPower") -> "QPower":
        return QPower(self.exponent - other.exponent,
                      self.multiplier / other.multiplier)

    def __pow__(self, n: int) -> "QPower":
        return QPower(self.exponent * n, self.multiplier ** n)

    def inverse(self) -> "QPower":
        return QPower(-self.exponent, 1 / self.multiplier)

    def __eq__(self, other):
        return (isinstance(other, QPower)
                and self.exponent == other.exponent
                and self.multiplier == other.multiplier)

    def __repr__(self):
        head = "" if self.multiplier == 1 else f"{self.multiplier}*"
        return f"{head}q^{self.exponent}"


# ---------------------------------------------------------------------------
# tame symbol and the integer bisymbol


def tame_t(f: LaurentSeries2, g: LaurentSeries2,
           signed: bool = True) -> LaurentSeries1:
    """(-1)^(v(f)v(g)) f^v(g) g^-v(f) reduced mod t, in k(x)((u)).

    `signed=False` drops the sign factor; the subsequent u-valuation cannot
    see it, so the integer symbol is the same either way.
    """
    a = f.t_valuation()
    b = g.t_valuation()
    h = (f ** b) * (g ** (-a))
    col = h.column(0)
    if signed and (a * b) % 2:
        col = LaurentSeries1(col.desc, {e: -c for e, c in col.terms.items()},
                             col.prec)
    return col


def bisymbol(f: LaurentSeries2, g: LaurentSeries2) -> int:
    """The integer symbol at a flag: u-valuation of the tame symbol in t."""
    return tame_t(f, g).valuation()


# ---------------------------------------------------------------------------
# idele choosers


def _coordinate_curve_pool(S: Surface) -> List[Curve]:
    if S.model == "P2":
        return [curve_make(S, t) for t in ("Z", "Y", "X")]
    return [curve_make(S, t) for t in ("X1", "X0", "Y1", "Y0")]


def _line_power(cands: Sequence[Curve], D: Curve, avoid: ClosedPoint,
                n: int) -> MPoly:
    """n-th power of the first candidate line distinct from D and (when a
    point is given) not vanishing there.  A projective point always leaves
    at least one coordinate line available."""
    for L in cands:
        if L == D:
            continue
        if avoid is not None and L.poly.evaluate(list(avoid.coords)).is_zero():
            continue
        return L.poly ** n
    raise RuntimeError("no coordinate line avoids the point")


def _denominator_for(S: Surface, D: Curve, avoid: ClosedPoint) -> MPoly:
    """A form of D's class with no D factor, nonvanishing at `avoid`."""
    pool = _coordinate_curve_pool(S)
    if S.model == "P2":
        return _line_power(pool, D, avoid, D.degree())
    a, b = D.degree()
    out = MPoly.const(S.base, S.nvars, S.base.one())
    if a:
        out = out * _line_power(pool[:2], D, avoid, a)
    if b:
        out = out * _line_power(pool[2:], D, avoid, b)
    return out


def _const_function(S: Surface) -> RationalFunction:
    one = MPoly.const(S.base, S.nvars, S.base.one())
    return RationalFunction(S, one, one)


def _rf_power(f: RationalFunction, m: int) -> RationalFunction:
    if m < 0:
        f, m = f.inverse(), -m
    out = _const_function(f.surface)
    for _ in range(m):
        out = out * f
    return out


class IdeleRule:
    """Deterministic local function choices for a divisor.

    kind "along_curves": per curve D, a global function whose order along D
    is D's multiplicity in the divisor.  kind "at_points": per point x, a
    local equation at x of the divisor germ (the components through x, with
    denominators kept away from x).
    """

    __slots__ = ("kind", "divisor")

    def __init__(self, kind: str, divisor: Divisor):
        if kind not in ("along_curves", "at_points"):
            raise ValueError(f"unknown idele kind {kind!r}")
        self.kind = kind
        self.divisor = divisor

    def at_curve(self, D: Curve) -> RationalFunction:
        S = self.divisor.surface
        m = self.divisor.components.get(D, 0)
        if m == 0:
            return _const_function(S)
        den = _denominator_for(S, D, avoid=None)
        return _rf_power(RationalFunction(S, D.poly, den), m)

    def at_point(self, x: ClosedPoint) -> RationalFunction:
        S = self.divisor.surface
        out = _const_function(S)
        for D, m in self.divisor.items():
            if not D.poly.evaluate(list(x.coords)).is_zero():
                continue
            den = _denominator_for(S, D, avoid=x)
            out = out * _rf_power(RationalFunction(S, D.poly, den), m)
        return out

    def local(self, fl: Flag) -> RationalFunction:
        if self.kind == "along_curves":
            return self.at_curve(fl.curve)
        return self.at_point(fl.point)


def idele_j(E: Divisor, kind: str) -> IdeleRule:
    """The standard multiplicative chooser for the divisor E."""
    return IdeleRule(kind, E)


# ---------------------------------------------------------------------------
# commutator pairing and the symbol-route intersection number


def _power_pair(f: RationalFunction, n: int) -> Tuple[MPoly, MPoly]:
    """Numerator and denominator of f**n (n may be negative)."""
    if n >= 0:
        return f.num ** n, f.den ** n
    return f.den ** (-n), f.num ** (-n)


def _flag_symbol(g1: IdeleRule, g2: IdeleRule, fl: Flag, prec: int) -> int:
    """The integer symbol of the two idele components at one flag.

    The t-valuations are the curve multiplicities of the components, so
    they are computed exactly by polynomial division; only the combination
    f^v(g) g^-v(f), a unit along the curve, is ever expanded.  Its
    restriction to the curve is read off at column 0 and the symbol is that
    restriction's valuation at the point, with the window escalated until
    the valuation is visible.
    """
    f1 = g1.local(fl)
    f2 = g2.local(fl)
    a = ord_on_curve(f1, fl.curve)
    b = ord_on_curve(f2, fl.curve)
    num1, den1 = _power_pair(f1, b)
    num2, den2 = _power_pair(f2, -a)
    h = RationalFunction(fl.curve.surface, num1 * num2, den1 * den2)
    last = None
    for attempt in range(MAX_ESCALATIONS + 1):
        window = prec << attempt
        try:
            return expand_at_flag(h, fl, window).column(0).valuation()
        except PrecisionError as err:
            last = err
    raise PrecisionError(f"symbol undetermined at flag {fl!r}: {last}")


def commutator_pairing(g1: IdeleRule, g2: IdeleRule, flags: Sequence[Flag],
                       prec: int = DEFAULT_SYMBOL_PREC,
                       probe: Sequence[Flag] = ()) -> QPower:
    """Product over flags of q^(-deg(x) * symbol).

    Extra `probe` flags assert completeness of the main list: a nonzero
    symbol at any of them means contributions were missed.
    """
    for fl in probe:
        if _flag_symbol(g1, g2, fl, prec) != 0:
            raise ValueError(
                f"nonzero symbol at probe flag {fl!r}: the flag list misses "
                f"contributions")
    exponent = 0
    for fl in flags:
        exponent -= fl.point.degree * _flag_symbol(g1, g2, fl, prec)
    return QPower(exponent)


def intersection_flags(C: Divisor, H: Divisor) -> List[Flag]:
    """Flags (x, D) with D in supp(H) and x in supp(C) cap D, sorted."""
    flags: List[Flag] = []
    for D, _m in H.items():
        pts: Dict[tuple, ClosedPoint] = {}
        for E, _n in C.items():
            if E == D:
                continue
            for pt in intersection_support(E, D):
                pts[pt.sort_key()] = pt
        for key in sorted(pts):
            flags.append(flag_make(pts[key], D))
    return flags


def intersection_number(C: Divisor, H: Divisor,
                        prec: int = DEFAULT_SYMBOL_PREC) -> int:
    """(C, H) by the symbol route: minus the pairing exponent of the
    standard ideles over the intersection flags."""
    shared = [D for D in C.components if D in H.components]
    if shared:
        raise ValueError(
            "divisors share a component; replace one by a linearly "
            "equivalent divisor in general position, or use "
            "class_intersection")
    g1 = idele_j(C, "at_points")
    g2 = idele_j(H, "along_curves")
    flags = intersection_flags(C, H)
    return -commutator_pairing(g1, g2, flags, prec).exponent


def class_intersection(S: Surface, a: ClassVector, b: ClassVector) -> int:
    """The intersection form on divisor classes."""
    if S.model == "P2":
        return a * b
    return a[0] * b[1] + a[1] * b[0]


# ---------------------------------------------------------------------------
# classical oracle via sheared resultants


def intersection_oracle(C: Divisor, H: Divisor) -> int:
    """Independent total intersection number.

    Divisors sharing a component fall back to the class-level form;
    otherwise each local multiplicity is the order of a resultant root in a
    coordinate frame that separates the geometric intersection points.
    """
    S = C.surface
    shared = [D for D in C.components if D in H.components]
    if shared:
        return class_intersection(S, divisor_class(C), divisor_class(H))
    total = 0
    for D, m in C.items():
        for E, n in H.items():
            total += m * n * _pairwise_intersection(D, E)
    return total


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _chart_degree(D: Curve) -> int:
    c = D.degree()
    return c if isinstance(c, int) else c[0] + c[1]


def _pairwise_intersection(D: Curve, E: Curve) -> int:
    S = D.surface
    pts = intersection_support(D, E)
    if not pts:
        return 0
    L = 1
    for pt in pts:
        L = L * pt.degree // _gcd(L, pt.degree)
    # The frame search needs shear constants beyond the bad ones: at most
    # one per pair of geometric points (sheared abscissas colliding) plus
    # the roots of the two leading forms.  Grow the working field until a
    # good constant must exist.
    npts = sum(pt.degree for pt in pts)
    bad = npts * (npts - 1) // 2 + _chart_degree(D) + _chart_degree(E)
    while S.base.q ** L <= bad + 1:
        L *= 2
    F = field_make(S.base.p, S.base.d * L)
    return sum(pt.degree * _local_multiplicity(S, D, E, pt, pts, F)
               for pt in pts)


def _geometric_points_in_chart(
        S: Surface, chart, pts: Sequence[ClosedPoint],
        F: FieldDesc) -> List[Tuple[FieldElem, FieldElem]]:
    """Affine chart coordinates over F of every conjugate of every point."""
    out = []
    q = S.base.q
    for pt in pts:
        member = [embed(c, F) for c in pt.coords]
        for _ in range(pt.degree):
            if all(not member[v].is_zero() for v in chart.unit_vars):
                aff = []
                for v in chart.affine_vars:
                    unit = next(w for w in chart.unit_vars
                                if S.model == "P2" or w // 2 == v // 2)
                    aff.append(member[v] / member[unit])
                out.append((aff[0], aff[1]))
            member = [c ** q for c in member]
    return out


def _shear(f: MPoly, keep: int, elim: int, c: FieldElem) -> MPoly:
    """Substitute (keep variable) -> keep + c * elim, fixing elim."""
    F = f.desc
    images = [MPoly.var(F, 2, 0), MPoly.var(F, 2, 1)]
    images[keep] = images[keep] + MPoly.var(F, 2, elim).scale(c)
    return f.substitute(images)


def _sheared_value(pair: Tuple[FieldElem, FieldElem], keep: int,
                   c: FieldElem) -> FieldElem:
    # the shear moves a zero at (a, b) to kept coordinate a - c*b
    a, b = pair
    return a - c * b if keep == 0 else b - c * a


def _lead_is_constant(f: MPoly, elim: int) -> bool:
    """True when the top coefficient in the eliminated variable is a nonzero
    constant, so no zero escapes to infinity in that direction and resultant
    root orders match the local multiplicities below them."""
    d = f.degree_in(elim)
    return all(e[1 - elim] == 0 for e in f.terms if e[elim] == d)


def _local_multiplicity(S: Surface, D: Curve, E: Curve, pt: ClosedPoint,
                        all_pts: Sequence[ClosedPoint], F: FieldDesc) -> int:
    """i_pt(D, E), read off a resultant in a separating sheared frame."""
    chart = next(ch for ch in S.charts
                 if all(not pt.coords[v].is_zero() for v in ch.unit_vars))
    f = _mp_embed(S.dehomogenize(D.poly, chart), F)
    g = _mp_embed(S.dehomogenize(E.poly, chart), F)
    geo = _geometric_points_in_chart(S, chart, all_pts, F)
    target = _geometric_points_in_chart(S, chart, [pt], F)[0]
    for keep, elim in ((0, 1), (1, 0)):
        for c in F.elems():
            fc = _shear(f, keep, elim, c)
            gc = _shear(g, keep, elim, c)
            if not (_lead_is_constant(fc, elim) and _lead_is_constant(gc, elim)):
                continue
            x0 = _sheared_value(target, keep, c)
            if sum(1 for p in geo if _sheared_value(p, keep, c) == x0) != 1:
                continue
            res = ptrim(list(resultant_elim(fc, gc, elim=elim, keep=keep)))
            if pdeg(res) < 1:
                continue
            mult = dict(poly_roots(res, F)).get(x0)
            if mult is None:
                raise RuntimeError("resultant lost an intersection point")
            return mult
    raise RuntimeError("no separating frame over the working field")
