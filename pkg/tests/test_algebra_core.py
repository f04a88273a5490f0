import random
from fractions import Fraction

import pytest

from twistfold.poly import (Chart, ChartMismatch, Polynomial, RatFunc,
                            ideal_reduce, poly_divmod)
from twistfold.scalars import I, NuSeries, Scalar

X3 = Chart(("x1", "x2", "x3"))
XC = Chart(("x1", "x2", "x3"), params=("c",))


def P(chart, name):
    return Polynomial.var(chart, name)


def rand_scalar(rng):
    return Scalar(Fraction(rng.randint(-4, 4), rng.randint(1, 3)),
                  Fraction(rng.randint(-4, 4), rng.randint(1, 3)))


def rand_poly(rng, chart, degree=3, terms=4):
    out = Polynomial.zero(chart)
    for _ in range(terms):
        e = [0] * len(chart.all_vars)
        for _ in range(rng.randint(0, degree)):
            e[rng.randrange(chart.n)] += 1
        out = out + Polynomial(chart, {tuple(e): NuSeries([rand_scalar(rng)])})
    return out


class TestScalar:
    def test_field_ops(self):
        a = Scalar(Fraction(1, 2), Fraction(3))
        b = Scalar(Fraction(-2), Fraction(1, 5))
        assert (a * b) / b == a
        assert a * a.inverse() == Scalar(1)
        assert (a + b) - b == a

    def test_conjugation_involution(self):
        a = Scalar(Fraction(2, 7), Fraction(-3, 4))
        assert a.conjugate().conjugate() == a
        assert (a * I).conjugate() == a.conjugate() * I.conjugate()


class TestNuSeries:
    def test_truncation_consistency(self):
        # (a*b) truncated at N equals truncation of the exact product
        a = NuSeries([1, 2, 3])
        b = NuSeries([4, 0, 5, 6])
        exact = a * b
        capped = a.truncate(4) * b
        assert capped.coeffs == exact.truncate(4).coeffs

    def test_exact_flag_monotone(self):
        a = NuSeries([0, 1], cap=2)
        b = a * a  # nu^2: still within cap
        assert b.exact
        c = b * a  # nu^3 dropped
        assert not c.exact
        assert not (c + NuSeries([1])).exact

    def test_nu_division_guard(self):
        with pytest.raises(ZeroDivisionError):
            NuSeries([1]) / NuSeries([0, 1])


class TestPolynomial:
    def test_ring_identity(self):
        x1, x2 = P(X3, "x1"), P(X3, "x2")
        assert (x1 + x2) * (x1 - x2) == x1 * x1 - x2 * x2

    def test_monomial_derivative(self):
        x1, x3 = P(X3, "x1"), P(X3, "x3")
        assert (x1 * x3).diff("x3") == x1

    def test_ring_axioms_randomized(self):
        rng = random.Random(7)
        for _ in range(25):
            a, b, c = (rand_poly(rng, X3) for _ in range(3))
            assert (a * b) * c == a * (b * c)
            assert a * (b + c) == a * b + a * c
            assert a + b == b + a

    def test_substitution_hyperboloid_canonicalization(self):
        # y1 = x1+x3, y2 = x2, y3 = x1-x3 sends
        # (1/2)y1*y3 + (1/2)y2^2 - c to (1/2)(x1^2+x2^2-x3^2) - c
        YC = Chart(("y1", "y2", "y3"), params=("c",))
        y1, y2, y3 = (P(YC, v) for v in ("y1", "y2", "y3"))
        c = P(YC, "c")
        f = y1 * y3 / 2 + y2 * y2 / 2 - c
        f = f.as_polynomial() if isinstance(f, RatFunc) else f
        m = [[1, 0, 1], [0, 1, 0], [1, 0, -1]]  # y_i = m[i][j] x_j
        g = f.substitute_linear(XC, m)
        x1, x2, x3 = (P(XC, v) for v in ("x1", "x2", "x3"))
        cc = P(XC, "c")
        want = (x1 * x1 + x2 * x2 - x3 * x3).scale(Fraction(1, 2)) - cc
        assert g == want

    def test_substitution_roundtrip(self):
        rng = random.Random(3)
        Y = Chart(("y1", "y2", "y3"))
        m = [[1, 0, 1], [0, 1, 0], [1, 0, -1]]
        minv = [[Fraction(1, 2), 0, Fraction(1, 2)], [0, 1, 0],
                [Fraction(1, 2), 0, Fraction(-1, 2)]]
        for _ in range(10):
            p = rand_poly(rng, X3)
            there = p.substitute_linear(Y, minv)  # x_i = minv[i][j] y_j
            back = there.substitute_linear(X3, m)
            assert back == p

    def test_singular_substitution_rejected(self):
        with pytest.raises(ValueError):
            P(X3, "x1").substitute_linear(X3, [[1, 0, 0], [0, 1, 0], [1, 1, 0]])

    def test_chart_mismatch(self):
        with pytest.raises(ChartMismatch):
            P(X3, "x1") + P(XC, "x1")


class TestIdealReduce:
    def setup_method(self):
        x1, x2 = P(XC, "x1"), P(XC, "x2")
        c = P(XC, "c")
        self.f = (x1 * x1 + x2 * x2).scale(Fraction(1, 2)) - c

    def test_circle_square_sum(self):
        x1, x2, c = P(XC, "x1"), P(XC, "x2"), P(XC, "c")
        assert ideal_reduce(x1 * x1 + x2 * x2, [self.f]) == c.scale(2)

    def test_low_degree_untouched(self):
        x1 = P(XC, "x1")
        assert ideal_reduce(x1, [self.f]) == x1

    def test_ideal_member(self):
        x3 = P(XC, "x3")
        assert ideal_reduce(self.f * x3, [self.f]).is_zero()

    def test_idempotent_and_stable_under_multiples(self):
        rng = random.Random(11)
        for _ in range(20):
            p = rand_poly(rng, XC)
            q = rand_poly(rng, XC)
            r = ideal_reduce(p, [self.f])
            assert ideal_reduce(r, [self.f]) == r
            assert ideal_reduce(p + self.f * q, [self.f]) == r

    def test_divmod(self):
        rng = random.Random(13)
        for _ in range(10):
            p = rand_poly(rng, XC)
            q, r = poly_divmod(p, self.f)
            assert q * self.f + r == p


class TestRatFunc:
    def test_cancellation(self):
        x1, x2 = P(X3, "x1"), P(X3, "x2")
        e = x1 * x1 + x2 * x2
        r = RatFunc(e * x1, e)
        assert r == RatFunc(x1)
        assert r.as_polynomial() == x1

    def test_cross_multiplied_equality(self):
        x1, x2 = P(X3, "x1"), P(X3, "x2")
        a = RatFunc(x1, x2)
        b = RatFunc(x1 * x1, x1 * x2)
        assert a == b

    def test_quotient_rule(self):
        x1, x2 = P(X3, "x1"), P(X3, "x2")
        r = RatFunc(x1 * x1, x2)
        # d/dx2 (x1^2/x2) = -x1^2/x2^2
        assert r.diff(1) == RatFunc(-(x1 * x1), x2 * x2)

    def test_nu_denominator_rejected(self):
        x1 = P(X3, "x1")
        nd = x1.scale(NuSeries([0, 1]))
        with pytest.raises(ValueError):
            RatFunc(x1, nd)
