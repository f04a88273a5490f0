import random
from fractions import Fraction

import pytest

from twistfold.fields import PForm, VectorField, pairing, tensor_product, vf_to_tensor
from twistfold.hopf import GeneratorSet, UElement, build_twist
from twistfold.poly import Chart, Polynomial, RatFunc
from twistfold.scalars import I, NuSeries, Scalar
from twistfold.star import StarContext, StarError

XC = Chart(("x1", "x2", "x3"), params=("c",))
YC = Chart(("y1", "y2", "y3"), params=("c",))


def v(chart, name):
    return Polynomial.var(chart, name)


def cylinder_ctx(a=1, order=4):
    x1, x2 = v(XC, "x1"), v(XC, "x2")
    d3 = VectorField.coordinate(XC, 2)
    L12 = VectorField(XC, [x2.scale(-a), x1, 0])
    gs = GeneratorSet.from_fields(("d3", "L12"), (d3, L12),
                                  star_signs=(-1, -1))
    return StarContext(build_twist(gs, ("abelian", [("d3", "L12")]), order))


def cylinder_LL_ctx(a=1, order=4):
    x1, x2 = v(XC, "x1"), v(XC, "x2")
    L13 = VectorField(XC, [0, Polynomial.zero(XC), x1])
    L23 = VectorField(XC, [0, 0, x2.scale(a)])
    gs = GeneratorSet.from_fields(("L13", "L23"), (L13, L23),
                                  star_signs=(-1, -1))
    return StarContext(build_twist(gs, ("abelian", [("L13", "L23")]), order))


def jordanian_ctx(order=4):
    y1, y2, y3 = (v(YC, n) for n in ("y1", "y2", "y3"))
    H = VectorField(YC, [y1.scale(2), 0, y3.scale(-2)])
    E = VectorField(YC, [0, y1, y2.scale(-2)])
    Ep = VectorField(YC, [y2.scale(-2), y3, 0])
    gs = GeneratorSet.from_fields(("H", "E", "Ep"), (H, E, Ep),
                                  star_signs=(-1, -1, -1))
    return StarContext(build_twist(gs, ("jordanian", "H", "E"), order))


def cylinder_f(a=1):
    return (v(XC, "x1") ** 2 + (v(XC, "x2") ** 2).scale(a)) \
        .scale(Fraction(1, 2)) - v(XC, "c")


def rand_poly(rng, chart, degree=3, terms=3):
    out = Polynomial.zero(chart)
    for _ in range(terms):
        e = [0] * len(chart.all_vars)
        for _ in range(rng.randint(0, degree)):
            e[rng.randrange(chart.n)] += 1
        out = out + Polynomial(chart, {tuple(e): NuSeries(
            [Scalar(Fraction(rng.randint(-3, 3), rng.randint(1, 2)),
                    Fraction(rng.randint(-2, 2)))])})
    return out


class TestStarProduct:
    def test_cylinder_exchange(self):
        for a in (1, 2):
            ctx = cylinder_ctx(a)
            got = ctx.star(v(XC, "x3"), v(XC, "x1"))
            want = v(XC, "x1") * v(XC, "x3") + \
                v(XC, "x2").scale(NuSeries.nu(1, I * Scalar(a), cap=4))
            assert got == want

    def test_unit_acts_trivially(self):
        ctx = cylinder_ctx()
        rng = random.Random(3)
        p = rand_poly(rng, XC)
        one = Polynomial.constant(XC, 1)
        assert ctx.star(one, p) == p.truncate(4)
        assert ctx.star(p, one) == p.truncate(4)

    def test_level_polynomial_central(self):
        ctx = cylinder_ctx()
        f = cylinder_f()
        x3 = v(XC, "x3")
        assert ctx.star(x3, f) == (x3 * f).truncate(4)
        assert ctx.star(f, x3) == (x3 * f).truncate(4)

    def test_jordanian_exchange(self):
        ctx = jordanian_ctx()
        y1, y2 = v(YC, "y1"), v(YC, "y2")
        got = ctx.star(y1, y2)
        want = y1 * y2 + (y1 * y1).scale(NuSeries.nu(1, -I, cap=4))
        assert got == want

    def test_associativity_seeded(self):
        rng = random.Random(101)
        for mk in (cylinder_ctx, cylinder_LL_ctx, jordanian_ctx):
            ctx = mk()
            chart = ctx.chart
            for _ in range(8):
                a = rand_poly(rng, chart)
                b = rand_poly(rng, chart)
                c = rand_poly(rng, chart)
                lhs = ctx.star(ctx.star(a, b), c)
                rhs = ctx.star(a, ctx.star(b, c))
                assert lhs == rhs

    def test_hopf_equivariance_with_twisted_coproduct(self):
        for ctx in (cylinder_ctx(), jordanian_ctx()):
            rng = random.Random(7)
            chart = ctx.chart
            a, b = rand_poly(rng, chart, 2), rand_poly(rng, chart, 2)
            for name in ctx.gens.names:
                g = UElement.generator(ctx.gens, name)
                lhs = g.act(ctx.star(a, b))
                rhs = None
                for c, (l1, l2) in ctx.twist.coproduct_twisted(g).leg_pairs():
                    t = ctx.star(l1.act(a), l2.act(b)).scale(c)
                    rhs = t if rhs is None else rhs + t
                assert lhs == rhs

    def test_exactness_witness(self):
        ctx = cylinder_ctx()
        # d3 leg kills x1*x2 at first order, so the action terminates
        assert ctx.action_terminates(v(XC, "x1") * v(XC, "x2"), v(XC, "x1"))
        res = ctx.star(v(XC, "x1"), v(XC, "x2"))
        assert all(c.exact for c in res.terms.values())
        # (x3)^5 keeps producing d3 derivatives beyond the cap
        deep = v(XC, "x3") ** 5
        assert not ctx.action_terminates(deep, v(XC, "x1"))
        res2 = ctx.star(deep, v(XC, "x2"))
        assert all(not c.exact for c in res2.terms.values())

    def test_two_tensor_product_rejected(self):
        ctx = cylinder_ctx()
        X = VectorField.coordinate(XC, 0)
        with pytest.raises(StarError):
            ctx.star(X, X)


class TestStarTensorAndWedge:
    def test_invariant_forms_tensor(self):
        ctx = cylinder_ctx()
        d1, d2 = PForm.dx(XC, 0), PForm.dx(XC, 1)
        got = ctx.star_tensor(d1, d2)
        # both legs annihilate these forms only for the wedge-invariant dx3;
        # dx1, dx2 rotate into each other, but d3 kills them first
        from twistfold.fields import form_to_tensor
        want = tensor_product(form_to_tensor(d1), form_to_tensor(d2))
        assert got == want

    def test_invariant_wedge_square(self):
        ctx = cylinder_ctx()
        d3f = PForm.dx(XC, 2)
        assert ctx.star_wedge(d3f, d3f).is_zero()

    def test_middle_linearity(self):
        rng = random.Random(11)
        for ctx in (cylinder_ctx(), jordanian_ctx()):
            chart = ctx.chart
            h = rand_poly(rng, chart, 2)
            T = PForm.dx(chart, 0).scale(rand_poly(rng, chart, 1))
            Tp = VectorField.coordinate(chart, 1).scale(rand_poly(rng, chart, 1))
            lhs = ctx.star_tensor(T, ctx.star(h, Tp))
            rhs = ctx.star_tensor(ctx.star(T, h), Tp)
            assert lhs == rhs

    def test_star_decomposition_roundtrip(self):
        ctx = jordanian_ctx()
        rng = random.Random(13)
        u = VectorField(YC, [rand_poly(rng, YC, 1) for _ in range(3)])
        w = VectorField(YC, [rand_poly(rng, YC, 1) for _ in range(3)])
        classical = tensor_product(vf_to_tensor(u), vf_to_tensor(w))
        rebuilt = None
        for (su, sw) in ctx.star_decompose_pairs([(u, w)]):
            t = ctx.star_tensor(su, sw)
            rebuilt = t if rebuilt is None else rebuilt + t
        assert rebuilt == classical.truncate(4)

    def test_d_graded_derivation_for_star(self):
        rng = random.Random(17)
        for ctx in (cylinder_ctx(), jordanian_ctx()):
            chart = ctx.chart
            a = PForm.dx(chart, 0).scale(rand_poly(rng, chart, 2))
            b = rand_poly(rng, chart, 2)
            bf = PForm.from_function(chart, b)
            lhs = ctx.star_wedge(a, bf).d()
            rhs = ctx.star_wedge(a.d(), bf) - ctx.star_wedge(a, bf.d())
            assert lhs == rhs


class TestStarLie:
    def test_jordanian_bracket_undeformed(self):
        ctx = jordanian_ctx()
        gs = ctx.gens
        H = gs.fields[gs.index("H")]
        E = gs.fields[gs.index("E")]
        assert ctx.star_bracket(H, E) == E.scale(2).truncate(4)

    def test_invariant_square_vanishes(self):
        ctx = cylinder_ctx()
        X = VectorField.coordinate(XC, 2)
        assert ctx.star_bracket(X, X).is_zero()

    def test_invariant_leg_reduces_to_classical(self):
        ctx = cylinder_ctx()
        assert ctx.star_lie(VectorField.coordinate(XC, 2), v(XC, "x3")) == \
            Polynomial.constant(XC, 1)

    def test_antisymmetry_with_r_matrix(self):
        rng = random.Random(19)
        for ctx in (cylinder_ctx(), jordanian_ctx()):
            chart = ctx.chart
            X = VectorField(chart, [rand_poly(rng, chart, 1) for _ in range(3)])
            Y = VectorField(chart, [rand_poly(rng, chart, 1) for _ in range(3)])
            lhs = ctx.star_bracket(X, Y)
            rhs = None
            for c, (ry, rx) in ctx.twist.r_legs.swap().act_tuple((Y, X)):
                t = ctx.star_bracket(ry, rx).scale(
                    Polynomial.constant(chart, c))
                rhs = t if rhs is None else rhs + t
            assert lhs == -rhs


class TestStarPairing:
    def test_rotation_against_dx1(self):
        for a in (1, 3):
            ctx = cylinder_ctx(a)
            gs = ctx.gens
            L12 = gs.fields[gs.index("L12")]
            got = ctx.star_pairing(L12, PForm.dx(XC, 0))
            assert got == v(XC, "x2").scale(-a).truncate(4)

    def test_coordinate_duality(self):
        ctx = cylinder_ctx()
        for mu in range(3):
            for lam in range(3):
                got = ctx.star_pairing(VectorField.coordinate(XC, mu),
                                       PForm.dx(XC, lam))
                assert got == Polynomial.constant(XC, 1 if mu == lam else 0)

    def test_linearity_in_function_slot(self):
        rng = random.Random(23)
        for ctx in (cylinder_ctx(), jordanian_ctx()):
            chart = ctx.chart
            X = VectorField(chart, [rand_poly(rng, chart, 1) for _ in range(3)])
            w = PForm.dx(chart, 0).scale(rand_poly(rng, chart, 1))
            h = rand_poly(rng, chart, 2)
            k = rand_poly(rng, chart, 1)
            lhs = ctx.star_pairing(X, ctx.star(h, w))
            rhs = ctx.star_pairing(ctx.field_times_function(X, h), w)
            assert lhs == rhs
            lhs2 = ctx.star_pairing(ctx.star(h, X), ctx.star(w, k))
            rhs2 = ctx.star(ctx.star(h, ctx.star_pairing(X, w)), k)
            assert lhs2 == rhs2

    def test_prime_pairing_relation(self):
        # <w, X>' = <R2 |> X, R1 |> w>_star
        rng = random.Random(29)
        ctx = jordanian_ctx()
        chart = ctx.chart
        X = VectorField(chart, [rand_poly(rng, chart, 1) for _ in range(3)])
        w = PForm.dx(chart, 1).scale(rand_poly(rng, chart, 1))
        lhs = ctx.star_pairing_prime(w, X)
        rhs = None
        for c, (rx, rw) in ctx.twist.r_legs.swap().act_tuple((X, w)):
            t = ctx.star_pairing(rx, rw).scale(c)
            rhs = t if rhs is None else rhs + t
        assert lhs == rhs


class TestTwistedVectorAction:
    def test_spec_examples(self):
        ctx = cylinder_ctx()
        X = VectorField(XC, [v(XC, "x3"), 0, 0])
        got = ctx.vector_action(X, v(XC, "x2"))
        assert got == Polynomial.constant(XC, NuSeries.nu(1, -I, cap=4))
        assert ctx.vector_action(X, v(XC, "x1")) == v(XC, "x3")

    def test_invariant_field_classical(self):
        ctx = cylinder_ctx()
        rng = random.Random(31)
        h = rand_poly(rng, XC)
        d3 = VectorField.coordinate(XC, 2)
        assert ctx.vector_action(d3, h) == d3.apply(h).truncate(4)

    def test_twisted_leibniz(self):
        rng = random.Random(37)
        for ctx in (cylinder_ctx(), cylinder_LL_ctx(), jordanian_ctx()):
            chart = ctx.chart
            X = VectorField(chart, [rand_poly(rng, chart, 1) for _ in range(3)])
            h = rand_poly(rng, chart, 2)
            hp = rand_poly(rng, chart, 2)
            lhs = ctx.vector_action(X, ctx.star(h, hp))
            rhs = ctx.star(ctx.vector_action(X, h), hp)
            for c, (rh, rX) in ctx.twist.r_legs.swap().act_tuple((h, X)):
                t = ctx.star(rh, ctx.vector_action(rX, hp)).scale(c)
                rhs = rhs + t
            assert lhs == rhs


class TestStarDualFrame:
    def test_coordinate_frame(self):
        ctx = cylinder_ctx()
        frame = [VectorField.coordinate(XC, i) for i in range(3)]
        thetas = ctx.star_dual_frame(frame)
        assert thetas == [PForm.dx(XC, i) for i in range(3)]

    def test_rotation_frame_offaxis(self):
        ctx = cylinder_ctx()
        x1, x2 = v(XC, "x1"), v(XC, "x2")
        L12 = VectorField(XC, [-x2, x1, 0])
        d3 = VectorField.coordinate(XC, 2)
        V = VectorField(XC, [x1, x2, 0])
        thetas = ctx.star_dual_frame([L12, d3, V])
        for i, e in enumerate([L12, d3, V]):
            for j in range(3):
                want = 1 if i == j else 0
                got = ctx.star_pairing(e, thetas[j])
                diff = got - RatFunc(Polynomial.constant(XC, want))
                assert diff.is_zero()

    def test_jordanian_tangent_normal_frame(self):
        ctx = jordanian_ctx()
        gs = ctx.gens
        H = gs.fields[gs.index("H")]
        E = gs.fields[gs.index("E")]
        V = VectorField(YC, [v(YC, "y1"), v(YC, "y2"), v(YC, "y3")])
        thetas = ctx.star_dual_frame([H, E, V])
        for i, e in enumerate([H, E, V]):
            for j in range(3):
                want = 1 if i == j else 0
                diff = ctx.star_pairing(e, thetas[j]) - \
                    RatFunc(Polynomial.constant(YC, want))
                assert diff.is_zero()

    def test_jordanian_coordinate_frame_genuinely_corrected(self):
        ctx = jordanian_ctx()
        frame = [VectorField.coordinate(YC, i) for i in range(3)]
        thetas = ctx.star_dual_frame(frame)
        for i, e in enumerate(frame):
            for j in range(3):
                want = 1 if i == j else 0
                diff = ctx.star_pairing(e, thetas[j]) - \
                    RatFunc(Polynomial.constant(YC, want))
                assert diff.is_zero()
        # the dual of dy2 picks up an order-nu multiple of dy1
        has_nu = any(
            any(len(cc.coeffs) > 1
                for cc in (comp.num.terms.values()
                           if isinstance(comp, RatFunc)
                           else comp.terms.values()))
            for th in thetas for comp in th.comps.values())
        assert has_nu

    def test_singular_frame_rejected(self):
        ctx = cylinder_ctx()
        x1 = v(XC, "x1")
        bad = [VectorField(XC, [x1, 0, 0]), VectorField(XC, [x1, 0, 0]),
               VectorField.coordinate(XC, 2)]
        with pytest.raises(StarError):
            ctx.star_dual_frame(bad)


class TestBraiding:
    def test_cylinder_coordinates(self):
        ctx = cylinder_ctx()
        rep = ctx.braiding_report(v(XC, "x1"), v(XC, "x3"))
        assert rep["holds"]

    def test_invariant_pair_classical(self):
        ctx = cylinder_ctx()
        rep = ctx.braiding_report(v(XC, "x3"), v(XC, "c"))
        assert rep["holds"]
        assert rep["residual"].is_zero()

    def test_anticommuting_forms(self):
        ctx = cylinder_ctx()
        rep = ctx.braiding_report(PForm.dx(XC, 0), PForm.dx(XC, 1))
        assert rep["holds"]
        assert rep["sign"] == -1

    def test_jordanian_functions(self):
        ctx = jordanian_ctx()
        rep = ctx.braiding_report(v(YC, "y1"), v(YC, "y3"))
        assert rep["holds"]

    def test_noncommuting_rejected(self):
        ctx = cylinder_ctx()
        X = VectorField.coordinate(XC, 0)
        with pytest.raises(StarError):
            ctx.braiding_report(v(XC, "x1"), X)


class TestClassicalLimit:
    def test_order_zero_star_is_pointwise(self):
        ctx = cylinder_ctx(order=0)
        rng = random.Random(41)
        a, b = rand_poly(rng, XC), rand_poly(rng, XC)
        assert ctx.star(a, b) == (a * b).truncate(0)

    def test_identity_twist_everything_classical(self):
        gs = cylinder_ctx().gens
        ctx = StarContext(build_twist(gs, ("identity",), 4))
        rng = random.Random(43)
        a, b = rand_poly(rng, XC), rand_poly(rng, XC)
        assert ctx.star(a, b) == (a * b).truncate(4)
        X = VectorField(XC, [rand_poly(rng, XC, 1) for _ in range(3)])
        Y = VectorField(XC, [rand_poly(rng, XC, 1) for _ in range(3)])
        assert ctx.star_bracket(X, Y) == X.bracket(Y).truncate(4)
