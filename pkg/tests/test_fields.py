import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy.fields import (
    ScopeError,
    factor_element,
    format_element,
    ideal_of_element,
    make_field,
    parse_element,
    sign_data,
    square_divisor_splits,
    totally_positive_units_are_squares,
    _lattice_product,
)


def brute_pell_unit(m):
    """Independent oracle: minimal unit > 1 by continued-fraction-free scan."""
    if m % 4 == 1:
        y = 1
        while True:
            for delta in (-4, 4):
                t = m * y * y + delta
                if t > 0:
                    x = math.isqrt(t)
                    if x * x == t:
                        return (Fraction(x, 2), Fraction(y, 2))
            y += 1
    y = 1
    while True:
        for delta in (-1, 1):
            t = m * y * y + delta
            if t > 0:
                x = math.isqrt(t)
                if x * x == t:
                    return (Fraction(x), Fraction(y))
        y += 1


class TestMakeField:
    def test_m2(self):
        K = make_field(2)
        assert K.omega_text() == "sqrt(2)"
        assert K.disc == 8
        assert K.eps.sqrt_coords() == (1, 1)  # 1 + sqrt2
        assert K.eps_norm == -1
        assert K.h_K == 1

    def test_m5(self):
        K = make_field(5)
        assert K.omega_text() == "(1+sqrt(5))/2"
        assert K.disc == 5
        assert K.eps == K.w()
        assert K.eps_norm == -1
        assert K.h_K == 1

    def test_not_squarefree_rejected(self):
        with pytest.raises(ValueError):
            make_field(4)
        with pytest.raises(ValueError):
            make_field(12)
        with pytest.raises(ValueError):
            make_field(1)

    @pytest.mark.parametrize("m", [2, 3, 5, 7, 13])
    def test_unit_against_oracle(self, m):
        K = make_field(m)
        assert K.eps.sqrt_coords() == brute_pell_unit(m)

    def test_omega_satisfies_its_quadratic(self):
        for m in (2, 3, 5, 13):
            K = make_field(m)
            w = K.w()
            c0, c1 = K._w2
            assert w * w == K.elt(c0, c1)

    def test_class_number_m10_is_two(self):
        assert make_field(10).h_K == 2

    def test_unit_minimality_bounded_scan(self):
        # no unit u with 1 < iota0(u) < iota0(eps) (lattice scan)
        for m in (2, 3, 5, 13):
            K = make_field(m)
            e0 = K.eps.approx(0)
            for a in range(-40, 41):
                for b in range(-40, 41):
                    u = K.elt(a, b)
                    if abs(u.norm()) != 1:
                        continue
                    v0 = u.approx(0)
                    assert not (1 + 1e-9 < v0 < e0 - 1e-9), f"smaller unit {u}"


class TestElementArithmetic:
    def test_exact_norm_matches_embeddings(self):
        K = make_field(2)
        x = K.elt(123456, -654321)
        lo0, hi0 = x.embed(0, 128)
        lo1, hi1 = x.embed(1, 128)
        prod_lo = min(lo0 * lo1, lo0 * hi1, hi0 * lo1, hi0 * hi1)
        prod_hi = max(lo0 * lo1, lo0 * hi1, hi0 * lo1, hi0 * hi1)
        assert prod_lo <= x.norm() <= prod_hi
        assert round(float(prod_lo)) == x.norm()

    @settings(max_examples=60, deadline=None)
    @given(a=st.integers(-10**6, 10**6), b=st.integers(-10**6, 10**6),
           c=st.integers(-1000, 1000), d=st.integers(-1000, 1000))
    def test_norm_multiplicative(self, a, b, c, d):
        K = make_field(3)
        x = K.elt(a, b)
        y = K.elt(c, d)
        assert (x * y).norm() == x.norm() * y.norm()

    def test_embedding_enclosure_examples(self):
        K = make_field(2)
        x = K.elt(2, 1)
        # reference enclosure of sqrt(2) at much higher precision
        s_lo, s_hi = K.sqrt_m_enclosure(200)
        lo, hi = x.embed(0, 64)
        assert lo <= 2 + s_lo and 2 + s_hi <= hi
        assert hi - lo <= Fraction(2) ** (1 - 64)
        lo, hi = x.embed(1, 64)
        assert lo <= 2 - s_hi and 2 - s_lo <= hi
        assert hi - lo <= Fraction(2) ** (1 - 64)
        lo, hi = K.elt(3).embed(0, 64)
        assert lo == hi == 3

    def test_embed_min_precision(self):
        with pytest.raises(ValueError):
            make_field(2).elt(1, 1).embed(0, 16)

    def test_sign_decisions_exact(self):
        K = make_field(2)
        # 1393/985 is a continued-fraction convergent, very close to sqrt(2)
        x = K.elt(Fraction(-1393, 985), 1)
        assert x.sign(0) == (1 if 985 * 985 * 2 > 1393 * 1393 else -1)

    @settings(max_examples=100, deadline=None)
    @given(a=st.fractions(min_value=-50, max_value=50),
           b=st.fractions(min_value=-50, max_value=50))
    def test_format_parse_roundtrip(self, a, b):
        K = make_field(5)
        x = K.elt(a, b)
        assert parse_element(K, format_element(x)) == x


class TestSignData:
    @pytest.mark.parametrize("m,narrow", [(2, True), (3, False), (5, True), (13, True)])
    def test_narrow_criterion(self, m, narrow):
        K = make_field(m)
        sd = sign_data(K)
        assert sd.narrow_equals_class is narrow
        assert (len(sd.sign_images) == 4) is narrow
        # independent route
        assert totally_positive_units_are_squares(K) is narrow

    def test_m3_images(self):
        sd = sign_data(make_field(3))
        assert sd.sign_images == frozenset({(1, 1), (-1, -1)})

    def test_time_reversal_always_guaranteed(self):
        for m in (2, 3, 5):
            sd = sign_data(make_field(m))
            assert (-1,) in sd.guaranteed_sign_changes


class TestSplits:
    def test_example_2_plus_4w(self):
        K = make_field(2)
        D = K.elt(2, 4)
        splits = square_divisor_splits(D)
        norms = sorted((d.norm, f.norm) for d, f in splits)
        assert norms == [(7, 2), (28, 1)]

    def test_trivial_split_for_unit(self):
        K = make_field(2)
        (d, f), = square_divisor_splits(K.one())
        assert d.norm == 1 and f.norm == 1

    def test_squarefree_norm_single_split(self):
        K = make_field(2)
        splits = square_divisor_splits(K.elt(-1, 2))  # norm -7
        assert len(splits) == 1

    def test_contains_trivial_pair(self):
        K = make_field(2)
        D = K.elt(2, 4)
        keys = {(d.rows, f.rows) for d, f in square_divisor_splits(D)}
        assert (ideal_of_element(D).rows, ideal_of_element(K.one()).rows) in keys

    @settings(max_examples=40, deadline=None)
    @given(a=st.integers(-12, 12), b=st.integers(-12, 12))
    def test_split_product_reconstructs_ideal(self, a, b):
        K = make_field(2)
        D = K.elt(a, b)
        if D.norm() == 0:
            return
        target = ideal_of_element(D).rows
        for d, f in square_divisor_splits(D):
            prod = _lattice_product(K, _lattice_product(K, list(map(list, f.rows)),
                                                        list(map(list, f.rows))),
                                    list(map(list, d.rows)))
            assert tuple(tuple(r) for r in prod) == target

    def test_h_gt_1_rejected(self):
        K = make_field(10)
        with pytest.raises(ScopeError):
            square_divisor_splits(K.elt(2, 1))

    def test_factor_element_unit_times_primes(self):
        K = make_field(2)
        x = K.elt(6, 10)
        unit, fac = factor_element(x)
        assert abs(unit.norm()) == 1
        rebuilt = unit
        for pi, e in fac:
            rebuilt = rebuilt * pi ** e
        assert rebuilt == x
