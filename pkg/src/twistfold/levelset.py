"""Level-set families f^a(x) = 0, tangency classification, normal frames,
tangent/normal projections (classical and twisted), canonical tangent
generator sets, and the representational verification of the calculus
relations (classical and star-deformed)."""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from itertools import combinations, permutations

from .fields import PForm, TensorField, VectorField, pairing
from .geometry import Metric, flat_nabla
from .hopf import _constant_expansion
from .poly import (Chart, Polynomial, RatFunc, as_coeff, ideal_reduce,
                   rat_matrix_inverse, validate_self_reduced)
from .scalars import NuSeries, Scalar


class LevelSetError(Exception):
    pass


class TangencyClass(Enum):
    TANGENT = "tangent"          # annihilates every f^a exactly
    PERP = "perp"                # 1-form killed by every tangent field
    CHI_CC = "ideal-multiple"    # lies in the ideal componentwise
    CHI_C = "tangent-mod-ideal"  # preserves the ideal
    BOX = "perp-mod-ideal"       # 1-form paired into the ideal by tangents
    NONE = "none"


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


class NormalFrame:
    """Pairing-normalized normal fields N^a with <N^a, df^b> = delta, the
    Gram data E^{ab} = g^{-1}(df^a, df^b) with inverse K, the unnormalized
    V^a = f^{a i} d_i, and optional metric-normalized unit data."""

    def __init__(self, family, metric: Metric):
        self.family = family
        self.metric = metric
        chart = family.chart
        k, n = family.k, chart.n
        self.df = [PForm(chart, 1, {(i,): family.jacobian[a][i]
                                    for i in range(n)})
                   for a in range(k)]
        self.v_perp = [metric.sharp(self.df[a]) for a in range(k)]
        self.E = [[metric.apply(self.v_perp[a], self.v_perp[b])
                   for b in range(k)] for a in range(k)]
        self.E_reduced = [[ideal_reduce(self.E[a][b], family.fs)
                           for b in range(k)] for a in range(k)]
        det_red = _det_rat(self.E_reduced)
        if det_red.is_zero():
            raise LevelSetError(
                "normal Gram matrix is degenerate modulo the ideal")
        try:
            self.K = rat_matrix_inverse(self.E)
        except ZeroDivisionError:
            raise LevelSetError("normal Gram matrix is singular")
        self.n_perp = []
        for a in range(k):
            acc = None
            for b in range(k):
                piece = self.v_perp[b].scale(self.K[a][b])
                acc = piece if acc is None else acc + piece
            self.n_perp.append(acc)
        for a in range(k):
            for b in range(k):
                want = as_coeff(chart, 1 if a == b else 0)
                got = pairing(self.n_perp[a], self.df[b])
                if not (got - want).is_zero():
                    raise LevelSetError("normal frame duality failed")

    def reduced_gram_note(self) -> str:
        entries = "; ".join(str(self.E_reduced[a][a])
                            for a in range(self.family.k))
        return f"normal Gram reduces to [{entries}]; degenerate where it vanishes"

    def unit_normal(self, a=0) -> VectorField:
        """V^a rescaled to unit length modulo the ideal; needs the reduced
        squared length to be a perfect square in the parameters."""
        ee = self.E_reduced[a][a]
        if isinstance(ee, RatFunc):
            ee = ee.as_polynomial()
        root = _sqrt_poly(ee)
        if root is None:
            raise LevelSetError(
                f"squared normal length {ee} is not a rational square; "
                "use the pairing-normalized normal instead")
        return self.v_perp[a].scale(RatFunc(Polynomial.constant(
            self.family.chart, 1), root))

    def orthonormal_data(self):
        """U^a, theta^a orthonormal up to signs zeta_a (diagonal reduced
        Gram with square entries only)."""
        k = self.family.k
        for a in range(k):
            for b in range(k):
                if a != b and not self.E_reduced[a][b].is_zero():
                    raise LevelSetError("reduced Gram is not diagonal")
        us, thetas, zetas = [], [], []
        for a in range(k):
            ee = self.E_reduced[a][a]
            if isinstance(ee, RatFunc):
                ee = ee.as_polynomial()
            neg = False
            root = _sqrt_poly(ee)
            if root is None:
                root = _sqrt_poly(-ee)
                neg = root is not None
            if root is None:
                raise LevelSetError("no rational square root for unit data")
            inv = RatFunc(Polynomial.constant(self.family.chart, 1), root)
            us.append(self.v_perp[a].scale(inv))
            thetas.append(self.df[a].scale(inv))
            zetas.append(Scalar(-1) if neg else Scalar(1))
        return {"u_perp": us, "theta": thetas, "zeta": zetas}


def _det_rat(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    out = None
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        piece = rows[0][j] * _det_rat(minor)
        if j % 2:
            piece = -piece
        out = piece if out is None else out + piece
    return out


def _sqrt_poly(p: Polynomial):
    """Square root of a single-term polynomial with even exponents and a
    square rational coefficient; None when not of that shape."""
    if p.is_zero() or len(p.terms) != 1:
        return None
    (e, c), = p.terms.items()
    if any(x % 2 for x in e):
        return None
    if not c.is_constant():
        return None
    s = c.coeff(0)
    if not s.im == 0 or s.re < 0:
        return None
    num, den = s.re.numerator, s.re.denominator
    rn, rd = _isqrt(num), _isqrt(den)
    if rn is None or rd is None:
        return None
    half = tuple(x // 2 for x in e)
    return Polynomial(p.chart, {half: NuSeries([Scalar(Fraction(rn, rd))])})


def _isqrt(v):
    r = int(v ** 0.5)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand * cand == v:
            return cand
    return None


class LevelSetFamily:
    """The polynomials f^a with Jacobian/Hessian data; cachable normal
    frames; the level sets are f^a = 0 with family constants inside the
    chart parameters."""

    def __init__(self, chart: Chart, fs):
        self.chart = chart
        self.fs = [as_coeff(chart, f) for f in fs]
        self.k = len(self.fs)
        if self.k == 0 or self.k >= chart.n:
            raise LevelSetError("need 0 < k < n constraint polynomials")
        for f in self.fs:
            if not isinstance(f, Polynomial):
                raise LevelSetError("constraints must be polynomial")
            if not f.is_nu_free():
                raise LevelSetError("constraints must be nu-free")
            if f.degree() < 1 or all(
                    sum(e[:chart.n]) == 0 for e in f.terms):
                raise LevelSetError("constant constraint polynomial")
        validate_self_reduced(self.fs)
        self.jacobian = [[f.diff(i) for i in range(chart.n)] for f in self.fs]
        self.hessians = [[[f.diff(i).diff(j) for j in range(chart.n)]
                          for i in range(chart.n)] for f in self.fs]
        self._check_rank()
        self._frames: dict = {}
        self._slots: dict = {}
        self._tangent_gens = None
        self.excluded_set_note = ""

    def _check_rank(self):
        n = self.chart.n
        npar = len(self.chart.params)
        for base in (2, 3, 5):
            point = [Scalar(base + i) for i in range(n)] + \
                [Scalar(1)] * npar
            rows = [[self.jacobian[a][i].evaluate(point).coeff(0)
                     for i in range(n)] for a in range(self.k)]
            if _scalar_rank(rows) == self.k:
                return
        raise LevelSetError("Jacobian is rank-deficient at all sample points")

    # -- frames and projections -------------------------------------------

    def normal_frame(self, metric: Metric) -> NormalFrame:
        key = id(metric)
        frame = self._frames.get(key)
        if frame is None:
            frame = NormalFrame(self, metric)
            self._frames[key] = frame
            if not self.excluded_set_note:
                self.excluded_set_note = frame.reduced_gram_note()
        return frame

    def tangent_fields(self):
        """The canonical complete set of tangent generators (metric-free)."""
        return [g["field"] for g in self.tangent_generators()["generators"]]

    def tangent_generators(self):
        """Generators L with L(f^a) = 0, their dependence relations, and a
        bracket table (constant coefficients whenever that expansion
        exists, e.g. all quadrics for k=1)."""
        if self._tangent_gens is not None:
            return self._tangent_gens
        chart = self.chart
        n = chart.n
        gens = []
        if self.k == 1:
            f = self.fs[0]
            for i, j in combinations(range(n), 2):
                comps = [Polynomial.zero(chart)] * n
                comps = list(comps)
                comps[j] = self.jacobian[0][i]
                comps[i] = -self.jacobian[0][j]
                field = VectorField(chart, comps)
                gens.append({"name": f"L{i + 1}{j + 1}", "indices": (i, j),
                             "field": field})
        else:
            for idx in combinations(range(n), self.k + 1):
                comps = [Polynomial.zero(chart) for _ in range(n)]
                for perm in permutations(range(self.k + 1)):
                    sign = _perm_sign(perm)
                    coeff = Polynomial.constant(chart, sign)
                    for a in range(self.k):
                        coeff = coeff * self.jacobian[a][idx[perm[a]]]
                    tgt = idx[perm[self.k]]
                    comps[tgt] = comps[tgt] + coeff
                field = VectorField(chart, comps)
                name = "L" + "".join(str(i + 1) for i in idx)
                gens.append({"name": name, "indices": idx, "field": field})
        for g in gens:
            for a in range(self.k):
                if not g["field"].apply(self.fs[a]).is_zero():
                    raise LevelSetError(f"{g['name']} is not tangent")
        dependence = self._dependence_relations(gens)
        table = self._bracket_table(gens)
        self._tangent_gens = {"generators": gens, "dependence": dependence,
                              "bracket_table": table}
        return self._tangent_gens

    def _dependence_relations(self, gens):
        chart = self.chart
        n = chart.n
        out = []
        width = self.k + 2
        lookup = {g["indices"]: g["field"] for g in gens}
        for a in range(self.k):
            for idx in combinations(range(n), width):
                acc = None
                ok = True
                for pos in range(width):
                    rest = idx[:pos] + idx[pos + 1:]
                    fld = lookup.get(rest)
                    if fld is None:
                        ok = False
                        break
                    sign = (-1) ** pos
                    piece = fld.scale(self.jacobian[a][idx[pos]]
                                      .scale(sign))
                    acc = piece if acc is None else acc + piece
                if not ok:
                    continue
                if acc is None or not acc.is_zero():
                    raise LevelSetError("dependence relation fails")
                out.append({"constraint": a, "indices": idx})
        return out

    def _bracket_table(self, gens):
        fields = [g["field"] for g in gens]
        table = {}
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                br = fields[i].bracket(fields[j])
                combo = _constant_expansion(br, fields)
                table[(gens[i]["name"], gens[j]["name"])] = combo
        return table

    # -- classification -----------------------------------------------------

    def classify(self, obj, metric: Metric | None = None):
        """Tangency class with witness residuals."""
        if isinstance(obj, VectorField):
            residuals = [obj.apply(f) for f in self.fs]
            if all(r.is_zero() for r in residuals):
                return TangencyClass.TANGENT, residuals
            comp_red = [ideal_reduce(c, self.fs) for c in obj.comps]
            if all(r.is_zero() for r in comp_red):
                return TangencyClass.CHI_CC, comp_red
            res_red = [ideal_reduce(r, self.fs) for r in residuals]
            if all(r.is_zero() for r in res_red):
                return TangencyClass.CHI_C, res_red
            return TangencyClass.NONE, res_red
        if isinstance(obj, PForm) and obj.degree == 1:
            tangents = self.tangent_fields()
            paired = [pairing(X, obj) for X in tangents]
            if all(p.is_zero() for p in paired):
                return TangencyClass.PERP, paired
            comp_red = [ideal_reduce(c, self.fs)
                        for c in obj.comps.values()]
            chi_cc = bool(comp_red) and all(r.is_zero() for r in comp_red)
            if metric is not None:
                frame = self.normal_frame(metric)
                normal_paired = [pairing(v, obj) for v in frame.v_perp]
                if all(p.is_zero() for p in normal_paired):
                    return TangencyClass.TANGENT, normal_paired
                if chi_cc:
                    return TangencyClass.CHI_CC, comp_red
                norm_red = [ideal_reduce(p, self.fs) for p in normal_paired]
                if all(r.is_zero() for r in norm_red):
                    return TangencyClass.CHI_C, norm_red
            elif chi_cc:
                return TangencyClass.CHI_CC, comp_red
            box = [ideal_reduce(p, self.fs) for p in paired]
            if all(r.is_zero() for r in box):
                return TangencyClass.BOX, box
            return TangencyClass.NONE, box
        raise LevelSetError("classification needs a vector field or 1-form")

    # -- projections ----------------------------------------------------------

    def _slot_matrices(self, metric: Metric):
        cached = self._slots.get(id(metric))
        if cached is not None:
            return cached
        frame = self.normal_frame(metric)
        chart = self.chart
        n = chart.n
        P = [[None] * n for _ in range(n)]   # form slots: (w_perp)_mu = P[mu][h] w_h
        Q = [[None] * n for _ in range(n)]   # vector slots: (X_perp)^i = Q[i][j] X^j
        for mu in range(n):
            for h in range(n):
                acc = RatFunc(Polynomial.zero(chart))
                for a in range(self.k):
                    for b in range(self.k):
                        term = frame.K[a][b] * self.jacobian[a][mu] * \
                            frame.v_perp[b].comps[h]
                        acc = acc + term
                P[mu][h] = acc
        for i in range(n):
            for j in range(n):
                acc = RatFunc(Polynomial.zero(chart))
                for a in range(self.k):
                    term = frame.n_perp[a].comps[i]
                    if isinstance(term, Polynomial):
                        term = RatFunc(term)
                    acc = acc + term * self.jacobian[a][j]
                Q[i][j] = acc
        self._slots[id(metric)] = (P, Q)
        return P, Q

    def project(self, T, metric: Metric, part: str, star_context=None):
        """Tangent/normal projection, extended slotwise to tensors; the
        twisted projections are the nu-linear extensions of the classical
        ones and require a twist based on tangent Killing fields."""
        if part not in ("tangent", "normal"):
            raise LevelSetError("part must be 'tangent' or 'normal'")
        if star_context is not None:
            self.require_killing_twist(star_context, metric)
        P, Q = self._slot_matrices(metric)
        chart = self.chart
        n = chart.n
        if part == "tangent":
            P = [[(RatFunc(Polynomial.constant(chart, 1)) if mu == h
                   else RatFunc(Polynomial.zero(chart))) - P[mu][h]
                  for h in range(n)] for mu in range(n)]
            Q = [[(RatFunc(Polynomial.constant(chart, 1)) if i == j
                   else RatFunc(Polynomial.zero(chart))) - Q[i][j]
                  for j in range(n)] for i in range(n)]
        if isinstance(T, VectorField):
            comps = []
            for i in range(n):
                acc = RatFunc(Polynomial.zero(chart))
                for j in range(n):
                    acc = acc + Q[i][j] * T.comps[j]
                comps.append(acc)
            return VectorField(chart, comps)
        if isinstance(T, PForm):
            if T.degree == 0:
                raise LevelSetError("cannot project a 0-form")
            out = PForm(chart, T.degree, {})
            for idx, c in T.comps.items():
                pieces = {(): c}
                for slot in range(T.degree):
                    nxt = {}
                    for done, cc in pieces.items():
                        for mu in range(n):
                            w = P[mu][idx[slot]]
                            if w.is_zero():
                                continue
                            key = done + (mu,)
                            prev = nxt.get(key)
                            v = cc * w
                            nxt[key] = v if prev is None else prev + v
                    pieces = nxt
                out = out + PForm(chart, T.degree, pieces)
            return out
        if isinstance(T, TensorField):
            out = TensorField(chart, T.p, T.r, {})
            for idx, c in T.comps.items():
                pieces = {(): c}
                for slot in range(T.p + T.r):
                    mat = P if slot < T.p else Q
                    nxt = {}
                    for done, cc in pieces.items():
                        for t in range(n):
                            w = mat[t][idx[slot]]
                            if w.is_zero():
                                continue
                            key = done + (t,)
                            prev = nxt.get(key)
                            v = cc * w
                            nxt[key] = v if prev is None else prev + v
                    pieces = nxt
                out = out + TensorField(chart, T.p, T.r, pieces)
            return out
        raise LevelSetError(f"cannot project {T!r}")

    def require_killing_twist(self, star_context, metric: Metric):
        from .geometry import is_killing
        for name, field in zip(star_context.gens.names,
                               star_context.gens.fields):
            cls, _ = self.classify(field)
            if cls is not TangencyClass.TANGENT:
                raise LevelSetError(
                    f"twist legs not tangent: generator {name}")
            if not is_killing(metric, field, family=self):
                raise LevelSetError(
                    f"twist leg {name} is not a Killing field")

    def require_tangent_twist(self, star_context):
        for name, field in zip(star_context.gens.names,
                               star_context.gens.fields):
            cls, _ = self.classify(field)
            if cls is not TangencyClass.TANGENT:
                raise LevelSetError(
                    f"twist legs not tangent: generator {name}")

    # -- connection pieces -----------------------------------------------------

    def projected_nabla(self, metric: Metric, X: VectorField, Y: VectorField):
        self._require_tangent(X, Y)
        return self.project(flat_nabla(X, Y), metric, "tangent")

    def second_form(self, metric: Metric, X: VectorField, Y: VectorField):
        self._require_tangent(X, Y)
        return self.project(flat_nabla(X, Y), metric, "normal")

    def second_form_closed(self, metric: Metric, X, Y):
        """-X^i Y^j f^a_ij N^a, the Hessian form of the normal part."""
        self._require_tangent(X, Y)
        frame = self.normal_frame(metric)
        out = None
        for a in range(self.k):
            coeff = Polynomial.zero(self.chart)
            for i in range(self.chart.n):
                for j in range(self.chart.n):
                    h = self.hessians[a][i][j]
                    if h.is_zero():
                        continue
                    coeff = coeff + X.comps[i] * Y.comps[j] * h
            piece = frame.n_perp[a].scale(-coeff if isinstance(coeff, RatFunc)
                                          else RatFunc(-coeff))
            out = piece if out is None else out + piece
        return out

    def _require_tangent(self, *fields):
        for X in fields:
            cls, _ = self.classify(X)
            if cls is not TangencyClass.TANGENT:
                raise LevelSetError("projected modes need tangent inputs")


def _scalar_rank(rows):
    rows = [r[:] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows))
                    if not rows[r][c].is_zero()), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][c].inverse()
        rows[rank] = [v * inv for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and not rows[r][c].is_zero():
                f = rows[r][c]
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[rank])]
        rank += 1
    return rank


# -- star-deformed relation checks ---------------------------------------------


def monomials_up_to(chart: Chart, degree: int, coords_only=True):
    """All coordinate monomials of total degree <= degree, ascending."""
    n = chart.n if coords_only else len(chart.all_vars)
    out = []

    def rec(prefix, rem, start):
        out.append(tuple(prefix))
        if rem == 0:
            return
        for i in range(start, n):
            rec(prefix + [i], rem - 1, i)

    rec([], degree, 0)
    polys = []
    for exps in out:
        e = [0] * len(chart.all_vars)
        for i in exps:
            e[i] += 1
        polys.append(Polynomial(chart, {tuple(e): 1}))
    return polys


def centrality_report(family: LevelSetFamily, ctx, degree: int,
                      modulo_ideal=False):
    """alpha * f = alpha f = f * alpha for every monomial alpha up to the
    given degree (exactly, or modulo the ideal for merely-ideal-preserving
    twists)."""
    failures = []
    for f in family.fs:
        for alpha in monomials_up_to(family.chart, degree):
            plain = (alpha * f).truncate(ctx.order)
            left = ctx.star(alpha, f) - plain
            right = ctx.star(f, alpha) - plain
            if modulo_ideal:
                left = ideal_reduce(left, family.fs)
                right = ideal_reduce(right, family.fs)
            if not left.is_zero() or not right.is_zero():
                failures.append((alpha, left, right))
    return {"holds": not failures, "failures": failures}


def star_level_relation(family: LevelSetFamily, ctx):
    """The constraint written with star products in place of pointwise
    products must reproduce the constraint itself (degree <= 2 shapes)."""
    chart = family.chart
    out = []
    for f in family.fs:
        if f.degree() > 2:
            raise LevelSetError("star-form check implemented for quadrics")
        acc = Polynomial.zero(chart)
        for e, c in f.terms.items():
            # descending coordinate order: the later coordinate multiplies
            # from the left, which is the ordering that stays undeformed
            coords = []
            for i in reversed(range(chart.n)):
                coords.extend([i] * e[i])
            rest = list(e)
            for i in range(chart.n):
                rest[i] = 0
            tail = Polynomial(chart, {tuple(rest): c})
            if len(coords) == 0:
                acc = acc + tail
            elif len(coords) == 1:
                acc = acc + Polynomial.var(chart, chart.all_vars[coords[0]]) \
                    * tail
            else:
                i, j = coords
                prod = ctx.star(Polynomial.var(chart, chart.all_vars[i]),
                                Polynomial.var(chart, chart.all_vars[j]))
                acc = acc + prod * tail
        out.append(acc - f.truncate(ctx.order))
    return {"holds": all(r.is_zero() for r in out), "residuals": out}


def star_differential_relation(family: LevelSetFamily, ctx):
    """The star form of df^a reproduces the classical df^a exactly.

    Each monomial coefficient is arranged with the later coordinate on the
    left (same ordering rule as the constraint's star form), so a term
    c*x^j dx^h becomes x^j * dx^h when j >= h and dx^h * x^j otherwise.
    """
    chart = family.chart
    residuals = []
    for a, f in enumerate(family.fs):
        acc = PForm(chart, 1, {})
        for h in range(chart.n):
            fh = family.jacobian[a][h]
            if fh.is_zero():
                continue
            dxh = PForm.dx(chart, h)
            for e, cc in fh.terms.items():
                coords = [i for i in range(chart.n) for _ in range(e[i])]
                rest = list(e)
                for i in range(chart.n):
                    rest[i] = 0
                tail = Polynomial(chart, {tuple(rest): cc})
                if not coords:
                    acc = acc + dxh.scale(tail)
                    continue
                if len(coords) != 1:
                    raise LevelSetError(
                        "star-form check implemented for quadrics")
                j = coords[0]
                xj = Polynomial.var(chart, chart.all_vars[j])
                if j >= h:
                    piece = ctx.star(xj, dxh)
                else:
                    piece = ctx.star(dxh, xj)
                acc = acc + piece.scale(tail)
        classical = PForm(chart, 1, {(h,): family.jacobian[a][h]
                                     for h in range(chart.n)})
        residuals.append(acc - classical.truncate(ctx.order))
    return {"holds": all(r.is_zero() for r in residuals),
            "residuals": residuals}


def twisted_dependence_relation(ctx, coeffs, fields):
    """sum (F1 |> t_alpha) * (F2 |> e_alpha) for a classical module relation
    sum t_alpha e_alpha = 0; vanishes exactly when the twist legs are
    tangent."""
    chart = fields[0].chart
    classical = None
    for t, e in zip(coeffs, fields):
        piece = e.scale(t)
        classical = piece if classical is None else classical + piece
    if not classical.is_zero():
        raise LevelSetError("inputs are not a classical dependence relation")
    out = None
    for t, e in zip(coeffs, fields):
        for c, (ut, ue) in ctx.twist.legs.act_tuple((t, e)):
            piece = ctx.star(ut, ue).scale(Polynomial.constant(chart, c))
            out = piece if out is None else out + piece
    return out


def verify_algebra_relations(family: LevelSetFamily, ctx=None,
                             degree: int = 4, exact_centrality=True):
    """Representational verification of the calculus relations: constraint
    centrality, the star-form of the constraint and its differential, and
    the twisted dependence relation over the canonical tangent generators."""
    report = {}
    if ctx is None:
        gens = family.tangent_generators()
        report["dependence"] = {"holds": True,
                                "count": len(gens["dependence"])}
        return report
    try:
        family.require_tangent_twist(ctx)
        tangent_twist = True
    except LevelSetError:
        tangent_twist = False
    report["twist_tangent"] = tangent_twist
    report["centrality"] = centrality_report(
        family, ctx, degree, modulo_ideal=not (tangent_twist and exact_centrality))
    report["level_relation"] = star_level_relation(family, ctx)
    report["differential_relation"] = star_differential_relation(family, ctx)
    if tangent_twist and family.k == 1:
        data = family.tangent_generators()
        lookup = {g["indices"]: g["field"] for g in data["generators"]}
        n = family.chart.n
        residuals = []
        for rel in data["dependence"]:
            idx = rel["indices"]
            coeffs, fields = [], []
            for pos in range(len(idx)):
                rest = idx[:pos] + idx[pos + 1:]
                coeffs.append(family.jacobian[rel["constraint"]][idx[pos]]
                              .scale((-1) ** pos))
                fields.append(lookup[rest])
            residuals.append(twisted_dependence_relation(ctx, coeffs, fields))
        report["dependence_star"] = {
            "holds": all(r.is_zero() for r in residuals),
            "residuals": residuals}
    return report
