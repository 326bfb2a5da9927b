"""Finite-field arithmetic: golden values and algebraic properties.

Golden values below were frozen from exhaustive searches (inverse tables,
root enumeration over all field elements) independent of the library code.
"""

import random

from adeles2d.fields import (
    coerce_down,
    embed,
    ff_trace,
    field_make,
    pdeg,
    peval,
    pmul,
    poly_factor,
    poly_roots,
    pscale,
    ptrim,
    rel_trace,
)


def mkpoly(desc, *ints):
    return ptrim([desc.from_int(c) for c in ints])


def test_field_make_basic():
    f2 = field_make(2, 1)
    assert (f2.p, f2.d, f2.q) == (2, 1, 2)
    f5 = field_make(5, 1)
    assert f5.q == 5
    # least monic irreducible quadratic over F_2 is 1 + x + x^2
    f4 = field_make(2, 2)
    assert f4.modulus == (1, 1, 1), f4.modulus
    f9 = field_make(3, 2)
    # 1 + x^2 is irreducible over F_3 (-1 is not a square mod 3)
    assert f9.modulus == (1, 0, 1), f9.modulus


def test_field_make_rejects_bad_args():
    for bad_p in (1, 4, 6):
        try:
            field_make(bad_p, 1)
        except ValueError:
            pass
        else:
            raise AssertionError(f"field_make accepted p={bad_p}")
    try:
        field_make(2, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("field_make accepted d=0")


def test_f5_division_golden():
    f5 = field_make(5, 1)
    two = f5.from_int(2)
    one = f5.one()
    assert two / one == two
    # frozen from inverse table: 2 * 3 = 6 = 1 mod 5
    assert one / two == f5.from_int(3)


def test_f4_generator_square():
    f4 = field_make(2, 2)
    a = f4.gen()
    # modulo x^2 + x + 1: a^2 = a + 1
    assert (a * a).coeffs == (1, 1), (a * a).coeffs
    assert a * a == a + f4.one()


def test_division_by_zero_raises():
    f5 = field_make(5, 1)
    try:
        f5.one() / f5.zero()
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("division by zero did not raise")


def test_trace_golden():
    f4 = field_make(2, 2)
    f2 = field_make(2, 1)
    assert ff_trace(f4.one()) == f2.zero()
    # tr(a) = a + a^2 = a + (a + 1) = 1
    assert ff_trace(f4.gen()) == f2.one()
    f5 = field_make(5, 1)
    assert ff_trace(f5.from_int(3)) == f5.from_int(3)


def test_frobenius_is_additive():
    rng = random.Random(4)
    for p, d in [(2, 2), (2, 3), (3, 2), (5, 2), (3, 3)]:
        desc = field_make(p, d)
        for _ in range(40):
            a = desc.from_coeffs([rng.randrange(p) for _ in range(d)])
            b = desc.from_coeffs([rng.randrange(p) for _ in range(d)])
            assert (a + b) ** p == a ** p + b ** p


def test_trace_is_linear_and_surjective():
    for p, d in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (5, 4)]:
        desc = field_make(p, d)
        prime = field_make(p, 1)
        rng = random.Random(100 * p + d)
        for _ in range(25):
            a = desc.from_coeffs([rng.randrange(p) for _ in range(d)])
            b = desc.from_coeffs([rng.randrange(p) for _ in range(d)])
            c = rng.randrange(p)
            lhs = ff_trace(desc.from_int(c) * a + b)
            rhs = prime.from_int(c) * ff_trace(a) + ff_trace(b)
            assert lhs == rhs, (p, d, c, a.coeffs, b.coeffs)
        image = {ff_trace(a).coeffs[0] for a in desc.elems()}
        assert image == set(range(p)), (p, d, image)


def test_every_nonzero_element_inverts():
    for p, d in [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2), (2, 4), (5, 2)]:
        desc = field_make(p, d)
        for a in desc.elems():
            if a.is_zero():
                continue
            assert a * a.inverse() == desc.one(), (p, d, a.coeffs)


def test_poly_factor_golden():
    f5 = field_make(5, 1)
    unit, factors = poly_factor(mkpoly(f5, 1, 0, 1), f5)  # x^2 + 1
    assert unit == f5.one()
    assert [(pdeg(g), [c.coeffs[0] for c in g], m) for g, m in factors] == [
        (1, [2, 1], 1),  # x + 2
        (1, [3, 1], 1),  # x + 3
    ]

    f2 = field_make(2, 1)
    unit, factors = poly_factor(mkpoly(f2, 1, 1, 1), f2)  # x^2 + x + 1
    assert len(factors) == 1 and factors[0][1] == 1
    assert pdeg(factors[0][0]) == 2

    f3 = field_make(3, 1)
    unit, factors = poly_factor(mkpoly(f3, 0, 0, 1), f3)  # x^2
    assert len(factors) == 1
    g, m = factors[0]
    assert (pdeg(g), m) == (1, 2)
    assert g[0].is_zero()  # the factor is x itself


def test_poly_factor_roundtrip_random():
    """unit * prod(factor^mult) reproduces the input exactly."""
    cases = [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)]
    rng = random.Random(2024)
    per_field = 40  # 5 fields x 40 = 200 polynomials
    for p, d in cases:
        desc = field_make(p, d)
        for _ in range(per_field):
            deg = rng.randrange(1, 9)
            coeffs = [desc.from_coeffs([rng.randrange(p) for _ in range(d)])
                      for _ in range(deg + 1)]
            f = ptrim(coeffs)
            if pdeg(f) < 1:
                continue
            unit, factors = poly_factor(f, desc)
            prod = [desc.one()]
            for g, m in factors:
                for _ in range(m):
                    prod = pmul(prod, g, desc)
            prod = pscale(prod, unit)
            assert prod == f, (p, d, [c.coeffs for c in f])


def test_poly_factor_is_deterministic():
    f5 = field_make(5, 1)
    f = mkpoly(f5, 2, 0, 3, 0, 0, 1, 1)
    first = poly_factor(f, f5)
    second = poly_factor(f, f5)
    assert [(tuple(c.coeffs for c in g), m) for g, m in first[1]] == [
        (tuple(c.coeffs for c in g), m) for g, m in second[1]
    ]


def test_poly_roots_match_evaluation():
    rng = random.Random(7)
    for p, d in [(3, 1), (5, 1), (2, 2)]:
        desc = field_make(p, d)
        for _ in range(20):
            deg = rng.randrange(1, 6)
            f = ptrim([desc.from_coeffs([rng.randrange(p) for _ in range(d)])
                       for _ in range(deg + 1)])
            if pdeg(f) < 1:
                continue
            roots = {r.coeffs for r, _ in poly_roots(f, desc)}
            brute = {a.coeffs for a in desc.elems() if peval(f, a).is_zero()}
            assert roots == brute, (p, d, [c.coeffs for c in f])


def test_embedding_is_ring_homomorphism():
    sub = field_make(2, 2)
    sup = field_make(2, 4)
    rng = random.Random(11)
    for _ in range(30):
        a = sub.from_coeffs([rng.randrange(2) for _ in range(2)])
        b = sub.from_coeffs([rng.randrange(2) for _ in range(2)])
        assert embed(a + b, sup) == embed(a, sup) + embed(b, sup)
        assert embed(a * b, sup) == embed(a, sup) * embed(b, sup)
        assert coerce_down(embed(a, sup), sub) == a


def test_relative_trace_tower():
    # trace is transitive: tr_{F16/F2} = tr_{F4/F2} o tr_{F16/F4}
    mid = field_make(2, 2)
    top = field_make(2, 4)
    for a in top.elems():
        via_mid = ff_trace(rel_trace(a, mid))
        assert ff_trace(a) == via_mid, a.coeffs
