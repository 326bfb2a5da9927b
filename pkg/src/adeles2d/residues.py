"""Residues of rational 2-forms at flags and the adelic reciprocity sums.

A global form is coefficient * omega, with omega the fixed 2-form attached
to the first chart (dX^dY on the plane, d(X0/X1)^d(Y0/Y1) on the quadric).
Its residue at a flag is the (t^-1, u^-1) coefficient of the local
expression, an element of the point's residue field; summing over the
curves through a point, or with trace weights over the points of a curve,
must give zero exactly.  Every residue computation retries with doubled
windows before giving up, so callers normally never see precision errors.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence, Tuple

from .fields import FieldElem, rel_trace
from .multipoly import MPoly
from .series import LaurentSeries2, PrecisionError, res2
from .surface import (
    ClosedPoint,
    Curve,
    Flag,
    RationalFunction,
    Surface,
    canonical_local_form,
    curve_make,
    expand_at_flag,
    flag_make,
    form_order_on_curve,
    intersection_support,
    ord_on_curve,
    parse_poly,
)

DEFAULT_RESIDUE_PREC = 8
MAX_ESCALATIONS = 4


class GlobalForm:
    """A rational 2-form: coefficient * omega, with declared components.

    The component list names every curve that can carry a pole of the form
    (denominator factors plus the poles of omega itself); residue-point
    searches range over it.
    """

    __slots__ = ("coefficient", "components")

    def __init__(self, coefficient: RationalFunction,
                 components: Sequence[Curve]):
        if coefficient.is_zero():
            raise ValueError("the zero form has no residue theory")
        self.coefficient = coefficient
        seen = []
        for C in components:
            if C not in seen:
                seen.append(C)
        self.components = tuple(seen)

    @property
    def surface(self) -> Surface:
        return self.coefficient.surface

    def __repr__(self):
        return f"GlobalForm({self.coefficient!r} * omega)"


def omega_polar_curves(S: Surface) -> List[Curve]:
    """The components of the fixed form's polar divisor."""
    if S.model == "P2":
        return [curve_make(S, "Z")]
    return [curve_make(S, "X1"), curve_make(S, "Y1")]


def form_make(S: Surface, num, den_curves: Sequence[Tuple[Curve, int]]) -> GlobalForm:
    """Build num / prod(C^m) * omega with the component list filled in."""
    if isinstance(num, str):
        num = parse_poly(S, num)
    den = MPoly.const(S.base, S.nvars, S.base.one())
    for C, m in den_curves:
        if m < 0:
            raise ValueError("denominator multiplicities must be nonnegative")
        den = den * C.poly ** m
    coeff = RationalFunction(S, num, den)
    comps = [C for C, m in den_curves if m > 0] + omega_polar_curves(S)
    return GlobalForm(coeff, comps)


def form_total_order(w: GlobalForm, C: Curve) -> int:
    """ord_C(coefficient) + ord_C(omega)."""
    return ord_on_curve(w.coefficient, C) + form_order_on_curve(w.surface, C)


def polar_components(w: GlobalForm) -> List[Curve]:
    return [C for C in w.components if form_total_order(w, C) < 0]


def polar_components_at(w: GlobalForm, x: ClosedPoint) -> List[Curve]:
    out = []
    for C in polar_components(w):
        if C.poly.evaluate(list(x.coords)).is_zero():
            out.append(C)
    return out


def local_residue(w: GlobalForm, fl: Flag,
                  prec: int = DEFAULT_RESIDUE_PREC) -> FieldElem:
    """res at the flag: the (t^-1, u^-1) coefficient of coefficient * J,
    where J du^dt is the fixed form in flag coordinates."""
    last = None
    for attempt in range(MAX_ESCALATIONS + 1):
        window = prec << attempt
        try:
            e = expand_at_flag(w.coefficient, fl, window)
            jac = canonical_local_form(fl, window)
            return res2(e * jac)
        except PrecisionError as err:
            last = err
    raise PrecisionError(
        f"residue undetermined at window {prec << MAX_ESCALATIONS}; "
        f"raise prec (last: {last})")


def residue_sum_around_point(w: GlobalForm, x: ClosedPoint,
                             curves: Sequence[Curve],
                             prec: int = DEFAULT_RESIDUE_PREC) -> FieldElem:
    """Sum of residues over the given curves through x; zero when the list
    exhausts the polar components there."""
    listed = list(curves)
    for C in polar_components_at(w, x):
        if C not in listed:
            raise ValueError(
                f"polar component {C!r} passes through {x!r} but is not "
                f"in the curve list")
    total = x.residue_field.zero()
    for C in listed:
        fl = flag_make(x, C)
        total = total + local_residue(w, fl, prec)
    return total


def residue_points_on_curve(w: GlobalForm, D: Curve) -> List[ClosedPoint]:
    """Candidate points of D where the residue can be nonzero: its
    intersections with the other declared components."""
    found: Dict[tuple, ClosedPoint] = {}
    for C in w.components:
        if C == D:
            continue
        for pt in intersection_support(D, C):
            found[(pt.degree, tuple(c.coeffs for c in pt.coords))] = pt
    return sorted(found.values(), key=ClosedPoint.sort_key)


def residue_sum_along_curve(w: GlobalForm, D: Curve,
                            prec: int = DEFAULT_RESIDUE_PREC) -> FieldElem:
    """Trace-weighted residue sum over the points of D; identically zero."""
    S = w.surface
    total = S.base.zero()
    for pt in residue_points_on_curve(w, D):
        fl = flag_make(pt, D)
        r = local_residue(w, fl, prec)
        total = total + rel_trace(r, S.base)
    return total


# ---------------------------------------------------------------------------
# adele fragments and the global pairing


class AdeleFragment:
    """A finitely supported collection of local series, zero elsewhere."""

    __slots__ = ("entries",)

    def __init__(self, entries: Dict[Flag, LaurentSeries2]):
        for fl, s in entries.items():
            if s.desc != fl.point.residue_field:
                raise ValueError("entry coefficients must live in the flag's "
                                 "residue field")
        self.entries = dict(entries)

    def __repr__(self):
        return f"AdeleFragment({len(self.entries)} flags)"


def _flag_sort_key(fl: Flag):
    return (fl.point.sort_key(), fl.curve._key)


def adelic_pairing(a: AdeleFragment, b: AdeleFragment,
                   prec: int = DEFAULT_RESIDUE_PREC) -> FieldElem:
    """Sum over common flags of tr res(a*b*omega); symmetric and bilinear."""
    flags = [fl for fl in a.entries if fl in b.entries]
    flags.sort(key=_flag_sort_key)
    base = None
    for fl in flags:
        base = fl.curve.surface.base
        break
    if base is None:
        # disjoint supports: the pairing is zero, but over which field?  All
        # fragments in one computation share a surface; fall back to any flag.
        for fl in list(a.entries) + list(b.entries):
            return fl.curve.surface.base.zero()
        raise ValueError("cannot pair two empty fragments")
    total = base.zero()
    for fl in flags:
        last = None
        for attempt in range(MAX_ESCALATIONS + 1):
            window = prec << attempt
            try:
                jac = canonical_local_form(fl, window)
                r = res2(a.entries[fl] * b.entries[fl] * jac)
                total = total + rel_trace(r, base)
                break
            except PrecisionError as err:
                last = err
        else:
            raise PrecisionError(f"pairing undetermined at flag {fl!r}: {last}")
    return total


# ---------------------------------------------------------------------------
# deterministic test corpora


def _random_form_of_class(S: Surface, cls, rng: random.Random) -> Optional[MPoly]:
    from .cohomology import class_monomials
    monos = class_monomials(S, cls)
    terms = {}
    for e in monos:
        c = rng.randrange(S.base.q)
        if c:
            terms[e] = S.base.from_int(c)
    if not terms:
        return None
    return MPoly(S.base, S.nvars, terms)


def reciprocity_corpus(S: Surface, count: int, seed: int,
                       max_degree: int = 3) -> List[GlobalForm]:
    """Deterministic list of forms with poles on coordinate curves."""
    rng = random.Random(seed)
    if S.model == "P2":
        lines = [curve_make(S, t) for t in ("X", "Y", "Z")]
    else:
        lines = [curve_make(S, t) for t in ("X0", "X1", "Y0", "Y1")]
    out: List[GlobalForm] = []
    guard = 0
    while len(out) < count and guard < 50 * count:
        guard += 1
        mults = [0] * len(lines)
        total = 0
        for i in range(len(lines)):
            m = rng.randrange(0, max_degree - total + 1)
            mults[i] = m
            total += m
        if total == 0:
            continue
        den_curves = [(C, m) for C, m in zip(lines, mults) if m > 0]
        cls = S.class_zero()
        for C, m in den_curves:
            cls = S.class_add(cls, S.class_scale(m, C.degree()))
        num = _random_form_of_class(S, cls, rng)
        if num is None:
            continue
        out.append(form_make(S, num, den_curves))
    if len(out) < count:  # pragma: no cover - generation is plentiful
        raise RuntimeError("could not generate enough forms")
    return out


def check_reciprocity_around_points(w: GlobalForm,
                                    prec: int = DEFAULT_RESIDUE_PREC,
                                    max_point_degree: int = 2) -> List[Tuple[ClosedPoint, FieldElem]]:
    """Evaluate the around-a-point sum at every crossing of polar components.

    Returns (point, sum) pairs; all sums must be zero.  Points where any
    polar component is singular are skipped (out of scope).
    """
    S = w.surface
    polar = polar_components(w)
    pts: Dict[tuple, ClosedPoint] = {}
    for i, C in enumerate(polar):
        for H in polar[i + 1:]:
            for pt in intersection_support(C, H):
                if pt.degree <= max_point_degree:
                    pts[(pt.degree, tuple(c.coeffs for c in pt.coords))] = pt
    results = []
    for key in sorted(pts):
        x = pts[key]
        through = polar_components_at(w, x)
        try:
            flags = [flag_make(x, C) for C in through]
        except ValueError:
            continue
        total = x.residue_field.zero()
        for fl in flags:
            total = total + local_residue(w, fl, prec)
        results.append((x, total))
    return results


def check_reciprocity_along_curves(w: GlobalForm,
                                   prec: int = DEFAULT_RESIDUE_PREC) -> List[Tuple[Curve, FieldElem]]:
    """Evaluate the along-a-curve sum for every polar component."""
    results = []
    for D in polar_components(w):
        results.append((D, residue_sum_along_curve(w, D, prec)))
    return results
