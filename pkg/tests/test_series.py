"""Two-variable truncated Laurent series: golden examples and ring properties."""

import random

from adeles2d.fields import field_make
from adeles2d.series import (
    DEFAULT_PREC,
    INF,
    LaurentSeries2,
    LocalForm2,
    PrecisionError,
    ls2_arith,
    ls2_derive,
    ls2_from_text,
    ls2_substitute,
    ls2_to_text,
    ls2_valuation,
    res2,
)


def mk(desc, terms, t_prec=INF, u_prec=INF):
    return LaurentSeries2(desc, {k: desc.from_int(v) for k, v in terms.items()},
                          t_prec, u_prec)


def rand_series(desc, rng, span=3, nterms=5, t_prec=INF, u_prec=INF):
    terms = {}
    for _ in range(nterms):
        k = (rng.randrange(-span, span + 1), rng.randrange(-span, span + 1))
        terms[k] = desc.from_coeffs([rng.randrange(desc.p) for _ in range(desc.d)])
    return LaurentSeries2(desc, terms, t_prec, u_prec)


def test_default_precision():
    assert DEFAULT_PREC == 16


def test_inverse_geometric_series():
    f5 = field_make(5, 1)
    a = mk(f5, {(0, 0): 1, (1, 0): -1})  # 1 - t
    inv = a.inverse(t_window=4)
    assert inv.terms == mk(f5, {(0, 0): 1, (1, 0): 1, (2, 0): 1, (3, 0): 1}).terms
    assert inv.t_prec == 4


def test_monomial_cancellation():
    f3 = field_make(3, 1)
    a = mk(f3, {(-1, 1): 1})  # u t^-1
    b = mk(f3, {(1, -1): 1})  # u^-1 t
    prod = ls2_arith(a, b, "mul")
    assert prod == LaurentSeries2.one(f3)
    assert prod.is_exact()


def test_inverse_single_column_unit():
    f5 = field_make(5, 1)
    a = mk(f5, {(1, 0): 1, (1, 1): 1})  # t(1+u)
    inv = a.inverse(u_window=3)
    assert inv.terms == mk(f5, {(-1, 0): 1, (-1, 1): -1, (-1, 2): 1}).terms
    assert inv.u_prec == 3
    assert inv.t_prec == INF  # the true inverse lives on one t-column


def test_inverse_multiplies_back_to_one():
    rng = random.Random(12)
    for q in (2, 3, 5):
        desc = field_make(q, 1)
        for _ in range(25):
            a = rand_series(desc, rng)
            if a.is_zero_window():
                continue
            inv = a.inverse()
            prod = a * inv
            one = LaurentSeries2.one(desc)
            assert prod.agree(one), (q, a, inv, prod)
            assert prod.coeff(0, 0).is_one(), (q, a, inv, prod)


def test_inverse_of_zero_window_raises():
    f2 = field_make(2, 1)
    z = LaurentSeries2.zero(f2, t_prec=5, u_prec=5)
    try:
        z.inverse()
    except PrecisionError:
        pass
    else:
        raise AssertionError("inverting a zero-window series did not raise")
    try:
        LaurentSeries2.zero(f2).inverse()
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("inverting exact zero did not raise")


def test_substitute_inverts_parameter():
    f5 = field_make(5, 1)
    f = mk(f5, {(-1, 0): 1})  # t^-1
    t_image = mk(f5, {(1, 0): 1, (1, 1): 1})  # t(1+u)
    u_image = mk(f5, {(0, 1): 1})
    out = ls2_substitute(f, u_image, t_image)
    assert out.coeff(-1, 0).coeffs[0] == 1
    assert out.coeff(-1, 1) == -f5.one()
    assert out.coeff(-1, 2) == f5.one()


def test_substitute_identity_is_identity():
    f3 = field_make(3, 1)
    rng = random.Random(5)
    u_id = mk(f3, {(0, 1): 1})
    t_id = mk(f3, {(1, 0): 1})
    for _ in range(10):
        f = rand_series(f3, rng, t_prec=6, u_prec=6)
        if f.is_zero_window():
            continue
        out = ls2_substitute(f, u_id, t_id)
        assert out.terms == f.terms
        assert out.t_prec == f.t_prec and out.u_prec == f.u_prec


def test_substitute_linear_shift():
    f2 = field_make(2, 1)
    f = mk(f2, {(0, 1): 1})  # u
    out = ls2_substitute(f, mk(f2, {(0, 1): 1, (1, 0): 1}), mk(f2, {(1, 0): 1}))
    assert out.terms == mk(f2, {(0, 1): 1, (1, 0): 1}).terms


def test_derive_golden():
    f5 = field_make(5, 1)
    assert ls2_derive(mk(f5, {(2, 0): 1}), "t").terms == mk(f5, {(1, 0): 2}).terms
    assert ls2_derive(mk(f5, {(0, 5): 1}), "u").is_exact_zero()
    f7 = field_make(7, 1)
    assert ls2_derive(mk(f7, {(0, 7): 1}), "u").is_exact_zero()
    d = ls2_derive(mk(f5, {(-1, 1): 1}), "t")
    assert d.terms == mk(f5, {(-2, 1): -1}).terms


def test_derive_shrinks_window():
    f3 = field_make(3, 1)
    f = mk(f3, {(0, 0): 1}, t_prec=8, u_prec=9)
    assert ls2_derive(f, "t").t_prec == 7
    assert ls2_derive(f, "u").u_prec == 8


def test_valuation_examples():
    f5 = field_make(5, 1)
    f = mk(f5, {(-3, 2): 1, (-2, 0): 3, (0, -5): 1})
    assert ls2_valuation(f) == (-3, 2)
    assert ls2_valuation(LaurentSeries2.one(f5)) == (0, 0)
    g = mk(f5, {(1, -1): 1, (1, 0): 1})
    assert ls2_valuation(g) == (1, -1)
    try:
        ls2_valuation(LaurentSeries2.zero(f5, t_prec=2, u_prec=2))
    except PrecisionError:
        pass
    else:
        raise AssertionError("valuation of zero window did not raise")


def test_res2_golden():
    f3 = field_make(3, 1)
    w = LocalForm2(mk(f3, {(-1, -1): 1}))
    assert res2(w) == f3.one()
    for (b, a) in [(-1, 0), (0, -1), (2, 3), (-2, -2)]:
        assert res2(LocalForm2(mk(f3, {(b, a): 1}))).is_zero()
    # (1+u)^-1 u^-1 t^-1
    geom = mk(f3, {(0, 0): 1, (0, 1): 1}).inverse()
    form = LocalForm2(geom.shift(-1, -1))
    assert res2(form) == f3.one()


def test_res2_window_exclusion_raises():
    f3 = field_make(3, 1)
    w = LocalForm2(LaurentSeries2.zero(f3, t_prec=-1, u_prec=4))
    try:
        res2(w)
    except PrecisionError:
        pass
    else:
        raise AssertionError("res2 outside window did not raise")


def test_ring_axioms_random():
    rng = random.Random(77)
    for q in (2, 3, 5):
        desc = field_make(q, 1)
        for _ in range(67):
            a = rand_series(desc, rng, t_prec=rng.choice([INF, 6]),
                            u_prec=rng.choice([INF, 6]))
            b = rand_series(desc, rng)
            c = rand_series(desc, rng)
            assert (a + b) + c == a + (b + c)
            assert a + b == b + a
            assert a * b == b * a
            assert ((a * b) * c).agree(a * (b * c))
            assert (a * (b + c)).agree(a * b + a * c)


def test_res2_kills_derivatives():
    rng = random.Random(13)
    f5 = field_make(5, 1)
    for _ in range(40):
        g = rand_series(f5, rng)
        assert res2(LocalForm2(ls2_derive(g, "u"))).is_zero()
        assert res2(LocalForm2(ls2_derive(g, "t"))).is_zero()


def test_res2_invariant_under_coordinate_change():
    """res is independent of the choice of local parameters (u,t)."""
    rng = random.Random(99)
    for q in (3, 5):
        desc = field_make(q, 1)
        for _ in range(15):
            f = rand_series(desc, rng, span=2, nterms=4)
            if f.is_zero_window():
                continue
            # old parameters as polynomials in the new ones: unit Jacobian
            u_img = mk(desc, {(0, 1): 1,
                              (0, 2): rng.randrange(q),
                              (1, 1): rng.randrange(q),
                              (1, 0): rng.randrange(q)})
            t_img = mk(desc, {(1, 0): 1,
                              (2, 0): rng.randrange(q),
                              (1, 1): rng.randrange(q),
                              (2, 1): rng.randrange(q)})
            jac = (u_img.derive("u") * t_img.derive("t")
                   - u_img.derive("t") * t_img.derive("u"))
            # a tight t-cap keeps the u-window healthy around the residue slot
            pushed = ls2_substitute(f, u_img, t_img, t_cap=2) * jac
            assert res2(LocalForm2(pushed)) == res2(LocalForm2(f)), (q, f)


def test_precision_monotonicity():
    rng = random.Random(21)
    f3 = field_make(3, 1)
    for _ in range(30):
        a = rand_series(f3, rng)
        b = rand_series(f3, rng)
        small = (a.truncate(4, 4) * b.truncate(4, 4))
        large = (a.truncate(9, 9) * b.truncate(9, 9))
        assert small.agree(large)
        if not a.is_zero_window():
            inv_small = a.truncate(5, 5).inverse()
            inv_large = a.truncate(10, 10).inverse()
            assert inv_small.agree(inv_large)


def test_text_round_trip():
    f5 = field_make(5, 1)
    f = mk(f5, {(-1, 2): 3, (0, 0): 1, (2, -4): 4})
    text = ls2_to_text(f)
    assert text == "t^-1*u^2: 3; t^0*u^0: 1; t^2*u^-4: 4"
    back = ls2_from_text(text, f5)
    assert back == f
    f4 = field_make(2, 2)
    g = LaurentSeries2(f4, {(0, 1): f4.gen()}, t_prec=7, u_prec=7)
    assert ls2_from_text(ls2_to_text(g), f4, 7, 7) == g
    assert ls2_from_text("0", f5) == LaurentSeries2.zero(f5)


def test_mismatched_fields_raise():
    a = LaurentSeries2.one(field_make(3, 1))
    b = LaurentSeries2.one(field_make(5, 1))
    try:
        ls2_arith(a, b, "add")
    except ValueError:
        pass
    else:
        raise AssertionError("mixed coefficient fields did not raise")
