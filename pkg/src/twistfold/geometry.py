"""Classical (pseudo)Riemannian geometry with a constant ambient metric:
metric maps and musical isomorphisms, the flat Levi-Civita connection,
projected connection and second fundamental form on a level-set family,
curvature through the Gauss identity, and Killing/equivariance checks.

Only constant-coefficient metrics are supported; the flat connection is the
componentwise directional derivative in every chart used here.
"""

from __future__ import annotations

from fractions import Fraction

from .fields import PForm, TensorField, VectorField, pairing, tensor_product, vf_to_tensor
from .poly import (Chart, Polynomial, RatFunc, as_coeff, ideal_reduce,
                   rat_matrix_inverse, rat_solve)
from .scalars import Scalar


class GeometryError(Exception):
    pass


class Metric:
    """Constant symmetric invertible matrix g_ij on a chart."""

    def __init__(self, chart: Chart, rows, signature="custom"):
        n = chart.n
        self.chart = chart
        self.signature = signature
        self.g = [[Scalar.coerce(rows[i][j]) for j in range(n)]
                  for i in range(n)]
        for i in range(n):
            for j in range(n):
                if self.g[i][j] != self.g[j][i]:
                    raise GeometryError("metric must be symmetric")
        self.g_inv = _scalar_matrix_inverse(self.g)

    @staticmethod
    def euclidean(chart: Chart) -> "Metric":
        n = chart.n
        return Metric(chart, [[1 if i == j else 0 for j in range(n)]
                              for i in range(n)], signature="euclidean")

    @staticmethod
    def minkowski(chart: Chart) -> "Metric":
        n = chart.n
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = -1 if i == n - 1 else 1
        return Metric(chart, rows, signature="minkowski")

    def apply(self, X: VectorField, Y: VectorField):
        out = Polynomial.zero(self.chart)
        for i in range(self.chart.n):
            for j in range(self.chart.n):
                if self.g[i][j].is_zero():
                    continue
                out = out + (X.comps[i] * Y.comps[j]).scale(self.g[i][j])
        return out

    def apply_inverse(self, w: PForm, a: PForm):
        if w.degree != 1 or a.degree != 1:
            raise GeometryError("inverse metric pairs 1-forms")
        out = Polynomial.zero(self.chart)
        for i in range(self.chart.n):
            for j in range(self.chart.n):
                if self.g_inv[i][j].is_zero():
                    continue
                out = out + (w.component((i,)) * a.component((j,))) \
                    .scale(self.g_inv[i][j])
        return out

    def flat(self, X: VectorField) -> PForm:
        """Lower the index: X^i -> g_ij X^j dx^i."""
        comps = {}
        for i in range(self.chart.n):
            acc = Polynomial.zero(self.chart)
            for j in range(self.chart.n):
                if not self.g[i][j].is_zero():
                    acc = acc + X.comps[j].scale(self.g[i][j])
            comps[(i,)] = acc
        return PForm(self.chart, 1, comps)

    def sharp(self, w: PForm) -> VectorField:
        if w.degree != 1:
            raise GeometryError("sharp expects a 1-form")
        comps = []
        for i in range(self.chart.n):
            acc = Polynomial.zero(self.chart)
            for j in range(self.chart.n):
                if not self.g_inv[i][j].is_zero():
                    acc = acc + w.component((j,)).scale(self.g_inv[i][j])
            comps.append(acc)
        return VectorField(self.chart, comps)

    def as_tensor(self) -> TensorField:
        comps = {}
        for i in range(self.chart.n):
            for j in range(self.chart.n):
                if not self.g[i][j].is_zero():
                    comps[(i, j)] = Polynomial.constant(self.chart, self.g[i][j])
        return TensorField(self.chart, 2, 0, comps)

    def inverse_tensor(self) -> TensorField:
        comps = {}
        for i in range(self.chart.n):
            for j in range(self.chart.n):
                if not self.g_inv[i][j].is_zero():
                    comps[(i, j)] = Polynomial.constant(self.chart,
                                                        self.g_inv[i][j])
        return TensorField(self.chart, 0, 2, comps)


def _scalar_matrix_inverse(rows):
    n = len(rows)
    a = [[rows[i][j] for j in range(n)] + [Scalar(1 if i == j else 0)
                                           for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise GeometryError("metric is not invertible")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [[a[i][n + j] for j in range(n)] for i in range(n)]


# -- flat Levi-Civita connection ---------------------------------------------


def flat_nabla(X: VectorField, T):
    """The flat connection: componentwise directional derivative along X;
    valid for constant metrics, where all Christoffel symbols vanish."""
    chart = X.chart
    if isinstance(T, (Polynomial, RatFunc)):
        return X.apply(T)
    if isinstance(T, VectorField):
        return VectorField(chart, [X.apply(c) for c in T.comps])
    if isinstance(T, PForm):
        return PForm(chart, T.degree,
                     {idx: X.apply(c) for idx, c in T.comps.items()})
    if isinstance(T, TensorField):
        return TensorField(chart, T.p, T.r,
                           {idx: X.apply(c) for idx, c in T.comps.items()})
    raise GeometryError(f"cannot differentiate {T!r}")


def torsion(X, Y, nabla=flat_nabla):
    return nabla(X, Y) - nabla(Y, X) - X.bracket(Y)


def curvature(X, Y, Z, nabla=flat_nabla):
    return nabla(X, nabla(Y, Z)) - nabla(Y, nabla(X, Z)) \
        - nabla(X.bracket(Y), Z)


# -- symmetry ------------------------------------------------------------------


def killing_deformation(metric: Metric, Z: VectorField):
    """The symmetric matrix S_hi = d_h Z_i + d_i Z_h whose vanishing makes Z
    an ambient Killing field."""
    chart = metric.chart
    lowered = metric.flat(Z)
    out = []
    for h in range(chart.n):
        row = []
        for i in range(chart.n):
            row.append(lowered.component((i,)).diff(h)
                       + lowered.component((h,)).diff(i))
        out.append(row)
    return out

def is_killing(metric: Metric, Z: VectorField, family=None) -> bool:
    """Ambient Killing when S = 0 identically; with a level-set family the
    check weakens to S contracted against tangent generators, modulo the
    ideal, which is what preserving every member of the family needs."""
    S = killing_deformation(metric, Z)
    if family is None:
        return all(all(e.is_zero() for e in row) for row in S)
    gens = family.tangent_fields()
    fs = family.fs
    for X in gens:
        for Y in gens:
            acc = Polynomial.zero(metric.chart)
            for h in range(metric.chart.n):
                for i in range(metric.chart.n):
                    if S[h][i].is_zero():
                        continue
                    acc = acc + X.comps[h] * Y.comps[i] * S[h][i]
            if not ideal_reduce(acc, fs).is_zero():
                return False
    return True


def equivariance_residual(Z: VectorField, X: VectorField, Y: VectorField,
                          nabla=flat_nabla) -> VectorField:
    """[Z, nabla_X Y] - nabla_[Z,X] Y - nabla_X [Z,Y]."""
    return Z.bracket(nabla(X, Y)) - nabla(Z.bracket(X), Y) \
        - nabla(X, Z.bracket(Y))


# -- curvature data on a level-set family --------------------------------------


class CurvatureData:
    """Curvature of the projected connection on a supplied tangent frame."""

    def __init__(self, family, metric, frame):
        self.family = family
        self.metric = metric
        self.frame = list(frame)
        self.gram = [[ideal_reduce(metric.apply(a, b), family.fs)
                      for b in self.frame] for a in self.frame]
        try:
            self.gram_inv = rat_matrix_inverse(self.gram)
        except ZeroDivisionError:
            raise GeometryError("tangent frame metric is degenerate")

    def gauss_curvature_vector(self, X, Y, Z) -> VectorField:
        """R_t(X,Y)Z assembled from the second fundamental form through the
        Gauss identity (flat ambient curvature), expanded in the frame."""
        nf = self.family.normal_frame(self.metric)
        II = lambda A, B: self.family.second_form(self.metric, A, B)
        iixz = II(X, Z)
        iiyz = II(Y, Z)
        rhs = []
        for W in self.frame:
            val = -self._g(iixz, II(Y, W)) + self._g(iiyz, II(X, W))
            rhs.append(ideal_reduce(val, self.family.fs))
        coeffs = rat_solve(self.gram, [rhs])[0]
        out = None
        for cf, e in zip(coeffs, self.frame):
            piece = e.scale(cf)
            out = piece if out is None else out + piece
        return out

    def _g(self, A, B):
        val = self.metric.apply(A, B)
        if isinstance(val, RatFunc):
            return val
        return RatFunc(val)

    def projected_curvature_vector(self, X, Y, Z) -> VectorField:
        """Direct commutator route: curvature of pr_t ∘ flat_nabla."""
        fam, metric = self.family, self.metric
        nt = lambda A, B: fam.project(flat_nabla(A, B), metric, "tangent")
        return nt(X, nt(Y, Z)) - nt(Y, nt(X, Z)) - nt(X.bracket(Y), Z)

    def ricci(self, X, Y):
        """Ricci map: frame-contraction of the curvature, with the frame
        field inserted in the second antisymmetric slot (the orientation
        that matches the reported curvature tables for these families).
        The result is an ideal-reduced representative (compare with
        equal_mod_ideal, not plain equality)."""
        duals = self._frame_duals()
        out = None
        for e, th in zip(self.frame, duals):
            r = self.gauss_curvature_vector(X, e, Y)
            val = ideal_reduce(pairing(r, th), self.family.fs)
            out = val if out is None else out + val
        return ideal_reduce(out, self.family.fs)

    def ricci_scalar(self):
        """Contraction of the Ricci map with the inverse frame metric,
        again as an ideal-reduced representative."""
        out = None
        for a, ea in enumerate(self.frame):
            for b, eb in enumerate(self.frame):
                G = ideal_reduce(self.gram_inv[a][b], self.family.fs)
                if G.is_zero():
                    continue
                val = ideal_reduce(self.ricci(ea, eb) * G, self.family.fs)
                out = val if out is None else out + val
        return ideal_reduce(out, self.family.fs)

    def _frame_duals(self):
        """1-forms theta^a with <e_b, theta^a> = delta and <N, theta^a> = 0,
        solved in the frame extended by the normal fields."""
        fam, metric = self.family, self.metric
        nf = fam.normal_frame(metric)
        full = self.frame + list(nf.v_perp)
        n = metric.chart.n
        if len(full) != n:
            raise GeometryError("frame plus normals must fill the chart")
        mat = [[full[i].comps[mu] for mu in range(n)] for i in range(n)]
        eye = [[Polynomial.constant(metric.chart, 1 if i == j else 0)
                for i in range(n)] for j in range(n)]
        cols = rat_solve(mat, eye)
        return [PForm(metric.chart, 1, {(mu,): cols[j][mu] for mu in range(n)})
                for j in range(len(self.frame))]

    def principal_curvatures(self):
        """For a surface in a 3-dimensional chart (k=1): the diagonal of the
        shape operator on an orthonormal tangent frame, plus Gauss and mean
        curvature."""
        fam, metric = self.family, self.metric
        if metric.chart.n != 3 or len(fam.fs) != 1:
            raise GeometryError("principal data needs a surface in R^3")
        unit = fam.normal_frame(metric).unit_normal()
        zeta = ideal_reduce(metric.apply(unit, unit), fam.fs)
        if not isinstance(zeta, RatFunc):
            zeta = RatFunc(zeta)
        kappas = []
        for a, ea in enumerate(self.frame):
            ga = self.gram[a][a]
            for b in range(len(self.frame)):
                if b != a and not self.gram[a][b].is_zero():
                    raise GeometryError("frame must be orthogonal")
            II_aa = fam.second_form(metric, ea, ea)
            val = self._g(II_aa, unit) / zeta
            val = val / (ga if isinstance(ga, RatFunc) else RatFunc(ga))
            red = ideal_reduce(val, fam.fs)
            kappas.append(red)
        gauss = kappas[0] * kappas[1]
        mean = (kappas[0] + kappas[1]) * Fraction(1, 2)
        return {"kappas": kappas,
                "gauss": ideal_reduce(gauss, fam.fs),
                "mean": ideal_reduce(mean, fam.fs)}
