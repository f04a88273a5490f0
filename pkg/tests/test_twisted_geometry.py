import random
from fractions import Fraction

import pytest

from twistfold.fields import PForm, VectorField
from twistfold.geometry import Metric
from twistfold.hopf import GeneratorSet, UElement, build_twist
from twistfold.levelset import LevelSetFamily
from twistfold.poly import Chart, Polynomial, RatFunc, equal_mod_ideal, ideal_reduce
from twistfold.scalars import NuSeries, Scalar
from twistfold.star import StarContext, _scale
from twistfold.twisted import TwistedConnection, TwistedGeometryError

XR = Chart(("x1", "x2", "x3"), params=("R",))
YC = Chart(("y1", "y2", "y3"), params=("c",))


def v(chart, name):
    return Polynomial.var(chart, name)


def cylinder_setup(order=4):
    x1, x2 = v(XR, "x1"), v(XR, "x2")
    d3 = VectorField.coordinate(XR, 2)
    L12 = VectorField(XR, [-x2, x1, 0])
    gs = GeneratorSet.from_fields(("d3", "L12"), (d3, L12),
                                  star_signs=(-1, -1))
    ctx = StarContext(build_twist(gs, ("abelian", [("d3", "L12")]), order))
    f = (x1 ** 2 + x2 ** 2).scale(Fraction(1, 2)) \
        - (v(XR, "R") ** 2).scale(Fraction(1, 2))
    fam = LevelSetFamily(XR, [f])
    metric = Metric.euclidean(XR)
    R = v(XR, "R")
    L = L12.scale(RatFunc(Polynomial.constant(XR, 1), R))
    conn = TwistedConnection(ctx, metric=metric, family=fam)
    return ctx, fam, metric, conn, [L, d3]


def hyperboloid_setup(order=4):
    y1, y2, y3 = (v(YC, n) for n in ("y1", "y2", "y3"))
    H = VectorField(YC, [y1.scale(2), 0, y3.scale(-2)])
    E = VectorField(YC, [0, y1, y2.scale(-2)])
    Ep = VectorField(YC, [y2.scale(-2), y3, 0])
    gs = GeneratorSet.from_fields(("H", "E", "Ep"), (H, E, Ep),
                                  star_signs=(-1, -1, -1))
    ctx = StarContext(build_twist(gs, ("jordanian", "H", "E"), order))
    f = (y1 * y3).scale(Fraction(1, 2)) + (y2 ** 2).scale(Fraction(1, 2)) \
        - v(YC, "c")
    fam = LevelSetFamily(YC, [f])
    metric = Metric(YC, [[0, 0, Fraction(1, 2)], [0, 1, 0],
                         [Fraction(1, 2), 0, 0]])
    conn = TwistedConnection(ctx, metric=metric, family=fam)
    return ctx, fam, metric, conn, [H, E]


def rand_poly(rng, chart, degree=1):
    out = Polynomial.zero(chart)
    for _ in range(2):
        e = [0] * len(chart.all_vars)
        for _ in range(rng.randint(0, degree)):
            e[rng.randrange(chart.n)] += 1
        out = out + Polynomial(chart, {tuple(e): NuSeries(
            [Scalar(Fraction(rng.randint(-2, 2), rng.randint(1, 2)))])})
    return out


def rand_tangent(rng, fam, degree=1):
    gens = fam.tangent_fields()
    out = None
    for g in gens:
        piece = g.scale(rand_poly(rng, fam.chart, degree))
        out = piece if out is None else out + piece
    return out


class TestTwistedConnection:
    def test_invariant_slot_classical(self):
        ctx, fam, metric, conn, frame = cylinder_setup()
        rng = random.Random(3)
        d3 = VectorField.coordinate(XR, 2)
        Y = VectorField(XR, [rand_poly(rng, XR, 2) for _ in range(3)])
        from twistfold.geometry import flat_nabla
        assert conn.nabla(d3, Y) == flat_nabla(d3, Y).truncate(4)

    def test_cylinder_connection_undeformed_on_symmetric_frame(self):
        ctx, fam, metric, conn, frame = cylinder_setup()
        from twistfold.geometry import flat_nabla
        L, d3 = frame
        unit = fam.normal_frame(metric).unit_normal()
        fields = [VectorField.coordinate(XR, i) for i in range(3)] + \
            [L, d3, unit]
        for X in fields:
            for Y in fields:
                got = conn.nabla(X, Y)
                want = flat_nabla(X, Y)
                assert (got - want).is_zero()

    def test_left_star_linearity(self):
        rng = random.Random(7)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            h = rand_poly(rng, ctx.chart, 2)
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            lhs = conn.nabla(ctx.star(h, X), Y)
            rhs = ctx.star(h, conn.nabla(X, Y))
            assert (lhs - rhs).is_zero()

    def test_deformed_leibniz_second_slot(self):
        # nabla^F_X (h * T) = L*_X(h) * T + (Rbar1 |> h) * nabla^F_{Rbar2|>X} T
        rng = random.Random(11)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            h = rand_poly(rng, ctx.chart, 2)
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            T = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            lhs = conn.nabla(X, ctx.star(h, T))
            rhs = ctx.star(ctx.star_lie(X, h), T)
            for c, (uh, ux) in ctx.twist.r_inverse_legs.act_tuple((h, X)):
                val = ctx.star(uh, conn.nabla(ux, T))
                rhs = rhs + _scale(val, c, ctx.chart)
            assert (lhs - rhs).is_zero()

    def test_right_leibniz(self):
        # nabla^F_X (T * h) = (nabla^F_X T) * h + (Rbar1|>T) * L*_{Rbar2|>X}(h)
        rng = random.Random(13)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            h = rand_poly(rng, ctx.chart, 2)
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            T = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            lhs = conn.nabla(X, ctx.field_times_function(T, h))
            rhs = ctx.field_times_function(conn.nabla(X, T), h)
            for c, (ut, ux) in ctx.twist.r_inverse_legs.act_tuple((T, X)):
                val = ut.scale(ctx.star_lie(ux, h))
                # module product with the function on the right: slide left
                val = ctx.field_times_function(ut, ctx.star_lie(ux, h))
                rhs = rhs + _scale(val, c, ctx.chart)
            assert (lhs - rhs).is_zero()

    def test_pairing_compatibility(self):
        # nabla^F_X <Y, w>_* = <nabla^F_X Y, w>_* + <Rbar1|>Y, nabla^F_{Rbar2|>X} w>_*
        rng = random.Random(17)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            w = PForm(ctx.chart, 1, {(i,): rand_poly(rng, ctx.chart)
                                     for i in range(3)})
            lhs = conn.nabla(X, ctx.star_pairing(Y, w))
            rhs = ctx.star_pairing(conn.nabla(X, Y), w)
            for c, (uy, ux) in ctx.twist.r_inverse_legs.act_tuple((Y, X)):
                val = ctx.star_pairing(uy, conn.nabla(ux, w))
                rhs = rhs + _scale(val, c, ctx.chart)
            assert (lhs - rhs).is_zero()

    def test_tensor_leibniz(self):
        # nabla^F_X (T ⊗* T') = nabla^F_X T ⊗* T' + Rbar1|>T ⊗* nabla^F_{Rbar2|>X} T'
        rng = random.Random(19)
        ctx, fam, metric, conn, frame = hyperboloid_setup()
        X = VectorField(YC, [rand_poly(rng, YC) for _ in range(3)])
        T = VectorField(YC, [rand_poly(rng, YC) for _ in range(3)])
        Tp = VectorField(YC, [rand_poly(rng, YC) for _ in range(3)])
        lhs = conn.nabla(X, ctx.star_tensor(T, Tp))
        rhs = ctx.star_tensor(conn.nabla(X, T), Tp)
        for c, (ut, ux) in ctx.twist.r_inverse_legs.act_tuple((T, X)):
            val = ctx.star_tensor(ut, conn.nabla(ux, Tp))
            rhs = rhs + _scale(val, c, ctx.chart)
        assert (lhs - rhs).is_zero()

    def test_hopf_equivariance(self):
        rng = random.Random(23)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            for name in ctx.gens.names:
                g = UElement.generator(ctx.gens, name)
                lhs = g.act(conn.nabla(X, Y))
                rhs = None
                for c, (l1, l2) in ctx.twist.coproduct_twisted(g).leg_pairs():
                    val = _scale(conn.nabla(l1.act(X), l2.act(Y)), c,
                                 ctx.chart)
                    rhs = val if rhs is None else rhs + val
                assert (lhs - rhs).is_zero()

    def test_affine_leg_guard(self):
        x1 = v(XR, "x1")
        bad = VectorField(XR, [x1 * x1, 0, 0])
        d3 = VectorField.coordinate(XR, 2)
        gs = GeneratorSet.from_fields(("q", "d3"), (bad, d3))
        ctx = StarContext(build_twist(gs, ("identity",), 2))
        with pytest.raises(TwistedGeometryError):
            TwistedConnection(ctx)

    def test_nonkilling_projected_refused(self):
        # equivariance-only twist: connection fine, projected modes refused
        chart = XR
        d1 = VectorField.coordinate(chart, 0)
        d3 = VectorField.coordinate(chart, 2)
        gs = GeneratorSet.from_fields(("d1", "d3"), (d1, d3),
                                      star_signs=(-1, -1))
        ctx = StarContext(build_twist(gs, ("abelian", [("d1", "d3")]), 2))
        conn = TwistedConnection(ctx)
        assert conn.equivariance_class == "equivariance"
        with pytest.raises(TwistedGeometryError):
            conn.projected_nabla(d1, d3)


class TestTwistedMetric:
    def test_invariant_slot(self):
        ctx, fam, metric, conn, frame = cylinder_setup()
        rng = random.Random(29)
        d3 = VectorField.coordinate(XR, 2)
        Y = VectorField(XR, [rand_poly(rng, XR, 2) for _ in range(3)])
        assert conn.metric_star(d3, Y) == metric.apply(d3, Y).truncate(4)

    def test_pairing_route_agrees(self):
        rng = random.Random(31)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            assert (conn.metric_star(X, Y)
                    - conn.metric_star_from_pairing(X, Y)).is_zero()

    def test_compatibility_residual_zero(self):
        rng = random.Random(37)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            for _ in range(5):
                X = rand_tangent(rng, fam)
                Y = rand_tangent(rng, fam)
                Z = rand_tangent(rng, fam)
                assert conn.compatibility_residual(X, Y, Z).is_zero()

    def test_right_linearity_killing(self):
        rng = random.Random(41)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            h = rand_poly(rng, ctx.chart, 2)
            assert conn.right_linearity_residual(X, Y, h).is_zero()


class TestTwistedTensors:
    def test_torsion_vanishes(self):
        rng = random.Random(43)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            for _ in range(4):
                X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                            for _ in range(3)])
                Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                            for _ in range(3)])
                assert conn.torsion_star(X, Y).is_zero()

    def test_projected_torsion_vanishes(self):
        rng = random.Random(47)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            X = rand_tangent(rng, fam)
            Y = rand_tangent(rng, fam)
            t = conn.torsion_star(X, Y, projected=True)
            assert all(ideal_reduce(c, fam.fs).is_zero() for c in t.comps)

    def test_torsion_antisymmetry(self):
        rng = random.Random(53)
        ctx, fam, metric, conn, frame = hyperboloid_setup()
        # use a non-Levi-Civita style pairing: antisymmetry must hold even
        # off the tangent space
        X = VectorField(YC, [rand_poly(rng, YC) for _ in range(3)])
        Y = VectorField(YC, [rand_poly(rng, YC) for _ in range(3)])
        lhs = conn.torsion_star(X, Y)
        rhs = None
        for c, (uy, ux) in ctx.twist.r_legs.swap().act_tuple((Y, X)):
            val = conn.torsion_star(uy, ux)
            val = _scale(val, c, ctx.chart)
            rhs = val if rhs is None else rhs + val
        assert (lhs + rhs).is_zero()

    def test_curvature_antisymmetry(self):
        rng = random.Random(59)
        ctx, fam, metric, conn, frame = hyperboloid_setup()
        X = rand_tangent(rng, fam)
        Y = rand_tangent(rng, fam)
        Z = rand_tangent(rng, fam)
        lhs = conn.curvature_star(X, Y, Z, projected=True)
        rhs = None
        for c, (uy, ux) in ctx.twist.r_legs.swap().act_tuple((Y, X)):
            val = conn.curvature_star(uy, ux, Z, projected=True)
            val = _scale(val, c, ctx.chart)
            rhs = val if rhs is None else rhs + val
        diff = lhs + rhs
        assert all(ideal_reduce(c, fam.fs).is_zero() for c in diff.comps)

    def test_ambient_curvature_zero(self):
        rng = random.Random(61)
        for setup in (cylinder_setup, hyperboloid_setup):
            ctx, fam, metric, conn, frame = setup()
            X = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Y = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            Z = VectorField(ctx.chart, [rand_poly(rng, ctx.chart)
                                        for _ in range(3)])
            assert conn.curvature_star(X, Y, Z).is_zero()

    def test_curvature_right_star_linearity(self):
        rng = random.Random(67)
        ctx, fam, metric, conn, frame = hyperboloid_setup()
        X = rand_tangent(rng, fam, 0)
        Y = rand_tangent(rng, fam, 0)
        Z = rand_tangent(rng, fam, 0)
        h = rand_poly(rng, YC, 1)
        lhs = conn.curvature_star(X, Y, ctx.field_times_function(Z, h),
                                  projected=True)
        rhs = ctx.field_times_function(
            conn.curvature_star(X, Y, Z, projected=True), h)
        diff = lhs - rhs
        assert all(ideal_reduce(c, fam.fs).is_zero() for c in diff.comps)


class TestCylinderTwistedGolden:
    def test_second_form_undeformed_on_frame(self):
        ctx, fam, metric, conn, frame = cylinder_setup()
        L, d3 = frame
        for X in frame:
            for Y in frame:
                got = conn.second_form_star(X, Y)
                want = fam.second_form(metric, X, Y)
                assert (got - want).is_zero()

    def test_projected_connection_undeformed(self):
        ctx, fam, metric, conn, frame = cylinder_setup()
        for X in frame:
            for Y in frame:
                got = conn.projected_nabla(X, Y)
                want = fam.projected_nabla(metric, X, Y)
                assert (got - want).is_zero()

    def test_twisted_curvatures_vanish(self):
        rng = random.Random(71)
        ctx, fam, metric, conn, frame = cylinder_setup()
        X = rand_tangent(rng, fam)
        Y = rand_tangent(rng, fam)
        Z = rand_tangent(rng, fam)
        amb = conn.curvature_star(X, Y, Z)
        assert amb.is_zero()
        intr = conn.curvature_star(X, Y, Z, projected=True)
        assert all(ideal_reduce(c, fam.fs).is_zero() for c in intr.comps)


class TestHyperboloidTwistedGolden:
    def test_twisted_ricci_scalar(self):
        ctx, fam, metric, conn, frame = hyperboloid_setup()
        scalar = conn.ricci_scalar_star(frame)
        want = RatFunc(Polynomial.constant(YC, -1), v(YC, "c"))
        assert equal_mod_ideal(scalar, want, fam.fs)

    def test_second_form_twisted_formula(self):
        # II^F(X,Y) = II(Fbar1|>X, Fbar2|>Y)
        rng = random.Random(73)
        ctx, fam, metric, conn, frame = hyperboloid_setup()
        X = rand_tangent(rng, fam)
        Y = rand_tangent(rng, fam)
        lhs = conn.second_form_star(X, Y)
        rhs = None
        for c, (ux, uy) in ctx.twist.inverse_legs.act_tuple((X, Y)):
            val = fam.second_form(metric, ux, uy)
            val = _scale(val, c, ctx.chart)
            rhs = val if rhs is None else rhs + val
        assert (lhs - rhs).is_zero()


class TestTwistedGauss:
    def test_classical_limit(self):
        ctx, fam, metric, conn, frame = cylinder_setup(order=0)
        rng = random.Random(79)
        X, Y, Z, W = (rand_tangent(rng, fam) for _ in range(4))
        assert conn.gauss_residual(X, Y, Z, W).is_zero()

    def test_cylinder_quadruples(self):
        ctx, fam, metric, conn, frame = cylinder_setup(order=3)
        rng = random.Random(83)
        for _ in range(3):
            X, Y, Z, W = (rand_tangent(rng, fam) for _ in range(4))
            assert conn.gauss_residual(X, Y, Z, W).is_zero()

    def test_hyperboloid_quadruples(self):
        ctx, fam, metric, conn, frame = hyperboloid_setup(order=3)
        rng = random.Random(89)
        for _ in range(3):
            X, Y, Z, W = (rand_tangent(rng, fam, 0) for _ in range(4))
            assert conn.gauss_residual(X, Y, Z, W).is_zero()
