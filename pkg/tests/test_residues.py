"""Local residues and both reciprocity laws, exactly."""

from adeles2d.residues import (
    AdeleFragment,
    adelic_pairing,
    check_reciprocity_along_curves,
    check_reciprocity_around_points,
    form_make,
    local_residue,
    polar_components,
    reciprocity_corpus,
    residue_sum_along_curve,
    residue_sum_around_point,
)
from adeles2d.series import LaurentSeries2
from adeles2d.surface import (
    curve_make,
    flag_make,
    point_from_coords,
    surface_make,
)


def p2(q):
    return surface_make("P2", q)


def origin(S):
    return point_from_coords(S, (S.base.zero(), S.base.zero(), S.base.one()))


def coordinate_lines(S):
    return {t: curve_make(S, t) for t in ("X", "Y", "Z")}


def test_local_residue_golden_pole():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Z^2", [(L["X"], 1), (L["Y"], 1)])
    fl = flag_make(origin(S), L["Y"])
    assert local_residue(w, fl) == S.base.one()


def test_local_residue_of_regular_form_is_zero():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Y", [(L["Y"], 1)])  # coefficient 1: omega itself
    fl = flag_make(origin(S), L["Y"])
    assert local_residue(w, fl).is_zero()


def test_local_residue_single_pole_direction():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Z", [(L["X"], 1)])
    fl = flag_make(origin(S), L["Y"])
    assert local_residue(w, fl).is_zero()


def test_jacobian_sign_cancels_around_origin():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Z^2", [(L["X"], 1), (L["Y"], 1)])
    x = origin(S)
    on_y = local_residue(w, flag_make(x, L["Y"]))
    on_x = local_residue(w, flag_make(x, L["X"]))
    assert on_y == S.base.one()
    assert on_x == -S.base.one()
    assert residue_sum_around_point(w, x, [L["X"], L["Y"]]).is_zero()


def test_around_point_with_higher_order_pole():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Z^3", [(L["X"], 2), (L["Y"], 1)])
    x = origin(S)
    assert residue_sum_around_point(w, x, [L["X"], L["Y"]]).is_zero()


def test_around_point_rejects_incomplete_curve_list():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Z^2", [(L["X"], 1), (L["Y"], 1)])
    try:
        residue_sum_around_point(w, origin(S), [L["Y"]])
    except ValueError as e:
        assert "polar component" in str(e)
    else:
        raise AssertionError("missing polar component accepted")


def test_along_curve_contributions_cancel():
    S = p2(5)
    L = coordinate_lines(S)
    w = form_make(S, "Z^2", [(L["X"], 1), (L["Y"], 1)])
    assert residue_sum_along_curve(w, L["Y"]).is_zero()
    assert residue_sum_along_curve(w, L["X"]).is_zero()
    assert residue_sum_along_curve(w, L["Z"]).is_zero()


def test_along_curve_with_trace_weighted_point():
    # the pole curve meets Y = 0 in a conjugate pair over GF(3); the sum
    # vanishes only after the trace weighting of the degree-2 point
    S = p2(3)
    L = coordinate_lines(S)
    pair = curve_make(S, "X^2 - 2Z^2")
    w = form_make(S, "X^3", [(L["Y"], 1), (pair, 1)])
    assert residue_sum_along_curve(w, L["Y"]).is_zero()


def test_reciprocity_corpus_p2():
    S = p2(3)
    for w in reciprocity_corpus(S, 6, seed=101):
        for x, total in check_reciprocity_around_points(w):
            assert total.is_zero(), (w, x)
        for D, total in check_reciprocity_along_curves(w):
            assert total.is_zero(), (w, D)


def test_reciprocity_corpus_p1xp1():
    S = surface_make("P1xP1", 2)
    for w in reciprocity_corpus(S, 6, seed=202):
        for x, total in check_reciprocity_around_points(w):
            assert total.is_zero(), (w, x)
        for D, total in check_reciprocity_along_curves(w):
            assert total.is_zero(), (w, D)


def test_polar_components_include_omega_poles():
    S = p2(3)
    L = coordinate_lines(S)
    w = form_make(S, "Z", [(L["X"], 1)])
    polar = polar_components(w)
    assert L["X"] in polar
    assert L["Z"] in polar  # pole of omega, partially cancelled but present


def test_adelic_pairing_golden():
    S = p2(2)
    L = coordinate_lines(S)
    fl = flag_make(origin(S), L["Y"])
    k = fl.point.residue_field
    a = AdeleFragment({fl: LaurentSeries2.monomial(k, k.one(), -1, 0)})
    b = AdeleFragment({fl: LaurentSeries2.monomial(k, k.one(), 0, -1)})
    assert adelic_pairing(a, b) == S.base.one()
    assert adelic_pairing(b, a) == adelic_pairing(a, b)


def test_adelic_pairing_disjoint_supports():
    S = p2(3)
    L = coordinate_lines(S)
    fl1 = flag_make(origin(S), L["Y"])
    fl2 = flag_make(origin(S), L["X"])
    k = fl1.point.residue_field
    a = AdeleFragment({fl1: LaurentSeries2.one(k)})
    b = AdeleFragment({fl2: LaurentSeries2.one(k)})
    assert adelic_pairing(a, b).is_zero()


def test_adelic_pairing_bilinear():
    S = p2(3)
    L = coordinate_lines(S)
    fl = flag_make(origin(S), L["Y"])
    k = fl.point.residue_field
    one = k.one()
    two = S.base.from_int(2)

    def frag(*monomials):
        acc = LaurentSeries2.zero(k)
        for c, t, u in monomials:
            acc = acc + LaurentSeries2.monomial(k, c, t, u)
        return AdeleFragment({fl: acc})

    a = frag((one, -1, 2), (two, 0, -1))
    b = frag((one, 0, -3), (one, -1, 1))
    c = frag((two, -2, 0), (one, 1, -1))
    ab = adelic_pairing(a, b)
    ac = adelic_pairing(a, c)
    summed = AdeleFragment({fl: a.entries[fl]})
    bc = AdeleFragment({fl: b.entries[fl] + c.entries[fl]})
    assert adelic_pairing(summed, bc) == ab + ac
    assert adelic_pairing(b, a) == ab
