"""Multivariate polynomials over NuSeries coefficients, rational functions,
and normal-form reduction modulo a level-set ideal.

A Chart fixes the ambient coordinates plus any formal parameters (family
constants such as c or R).  Parameters take part in polynomial arithmetic
like ordinary variables but are inert under partial derivatives in the
coordinate directions, which is exactly how the family constants behave.

The term order is degree-lexicographic with earlier variables larger
(x1 > x2 > ... > parameters), so normal forms are deterministic.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import NuSeries, Scalar, S_ONE


class ChartMismatch(Exception):
    pass


class ReductionIncomplete(Exception):
    """Raised when a leading-term configuration cannot be divided out."""


class Chart:
    """Coordinate names plus formal parameters; the single source of truth
    for variable ordering."""

    __slots__ = ("coords", "params", "all_vars", "_index")

    def __init__(self, coords, params=()):
        coords = tuple(coords)
        params = tuple(params)
        if len(set(coords + params)) != len(coords + params):
            raise ValueError("duplicate variable names")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "all_vars", coords + params)
        object.__setattr__(self, "_index",
                           {v: i for i, v in enumerate(coords + params)})

    def __setattr__(self, *a):
        raise AttributeError("Chart is immutable")

    @property
    def n(self):
        return len(self.coords)

    def var_index(self, name) -> int:
        return self._index[name]

    def __eq__(self, other):
        return isinstance(other, Chart) and self.all_vars == other.all_vars

    def __hash__(self):
        return hash(self.all_vars)

    def __repr__(self):
        return f"Chart(coords={self.coords!r}, params={self.params!r})"


def _deglex_key(exps):
    return (sum(exps), exps)


class Polynomial:
    """Sparse polynomial: mapping exponent tuple -> NuSeries, never storing
    zero coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms=None):
        object.__setattr__(self, "chart", chart)
        clean = {}
        if terms:
            for e, c in terms.items():
                c = NuSeries.coerce(c)
                if not c.is_zero():
                    clean[tuple(e)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(chart):
        return Polynomial(chart, {})

    @staticmethod
    def constant(chart, c):
        z = (0,) * len(chart.all_vars)
        return Polynomial(chart, {z: NuSeries.coerce(c)})

    @staticmethod
    def var(chart, name):
        e = [0] * len(chart.all_vars)
        e[chart.var_index(name)] = 1
        return Polynomial(chart, {tuple(e): S_ONE})

    def coerce(self, x) -> "Polynomial":
        if isinstance(x, Polynomial):
            if x.chart != self.chart:
                raise ChartMismatch(f"{x.chart!r} vs {self.chart!r}")
            return x
        if isinstance(x, (int, Fraction, Scalar, NuSeries)):
            return Polynomial.constant(self.chart, x)
        raise TypeError(f"cannot coerce {x!r} to Polynomial")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return RatFunc(self) + other
        other = self.coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, None)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return Polynomial(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.chart, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return RatFunc(self) - other
        return self + (-self.coerce(other))

    def __rsub__(self, other):
        return self.coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return RatFunc(self) * other
        other = self.coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                s = out.get(e, None)
                s = c if s is None else s + c
                out[e] = s
        return Polynomial(self.chart, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RatFunc):
            return RatFunc(self) / other
        if isinstance(other, (int, Fraction, Scalar, NuSeries)):
            inv = NuSeries.coerce(1) / NuSeries.coerce(other)
            return self * inv
        return RatFunc(self) / RatFunc(self.coerce(other))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        out = Polynomial.constant(self.chart, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def scale(self, c):
        c = NuSeries.coerce(c)
        return Polynomial(self.chart,
                          {e: s * c for e, s in self.terms.items()})

    # -- calculus ----------------------------------------------------------

    def diff(self, name_or_index) -> "Polynomial":
        """Partial derivative along a coordinate (parameters are constants)."""
        if isinstance(name_or_index, str):
            i = self.chart.var_index(name_or_index)
        else:
            i = name_or_index
        if i >= self.chart.n:
            raise ValueError("cannot differentiate along a parameter")
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            out[tuple(e2)] = c * e[i]
        return Polynomial(self.chart, out)

    def substitute_linear(self, new_chart: Chart, matrix, shift=None) -> "Polynomial":
        """Replace each old coordinate x_i by sum_j matrix[i][j]*z_j + shift_i
        where z are the coordinates of new_chart.  Parameters carry over by
        name.  matrix entries and shifts are Scalars; the matrix must be
        square and invertible.
        """
        n = self.chart.n
        if new_chart.n != n:
            raise ChartMismatch("coordinate count changed under substitution")
        if _det([[Scalar.coerce(matrix[i][j]) for j in range(n)]
                 for i in range(n)]).is_zero():
            raise ValueError("substitution matrix is not invertible")
        shift = shift or [0] * n
        images = []
        for i in range(n):
            img = Polynomial.constant(new_chart, shift[i])
            for j in range(n):
                m = Scalar.coerce(matrix[i][j])
                if not m.is_zero():
                    img = img + Polynomial.var(new_chart, new_chart.coords[j]).scale(m)
            images.append(img)
        params = []
        for p in self.chart.params:
            if p not in new_chart.all_vars:
                raise ChartMismatch(f"parameter {p} missing from target chart")
            params.append(Polynomial.var(new_chart, p))
        out = Polynomial.zero(new_chart)
        for e, c in self.terms.items():
            term = Polynomial.constant(new_chart, c)
            for i in range(n):
                for _ in range(e[i]):
                    term = term * images[i]
            for k, p in enumerate(params):
                for _ in range(e[n + k]):
                    term = term * p
            out = out + term
        return out

    def evaluate(self, point) -> NuSeries:
        """Evaluate at rational values for every variable (coords+params)."""
        vals = [Scalar.coerce(v) for v in point]
        out = NuSeries.coerce(0)
        for e, c in self.terms.items():
            f = Scalar.coerce(1)
            for x, k in zip(vals, e):
                for _ in range(k):
                    f = f * x
            out = out + c * f
        return out

    def conjugate(self) -> "Polynomial":
        return Polynomial(self.chart,
                          {e: c.conjugate() for e, c in self.terms.items()})

    def truncate(self, cap) -> "Polynomial":
        return Polynomial(self.chart,
                          {e: c.truncate(cap) for e, c in self.terms.items()})

    def nu_coefficient(self, k) -> "Polynomial":
        """The polynomial coefficient of nu^k."""
        return Polynomial(self.chart,
                          {e: NuSeries([c.coeff(k)]) for e, c in self.terms.items()})

    # -- structure ---------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_nu_free(self):
        return all(c.is_constant() for c in self.terms.values())

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def leading(self):
        """(exponent, coefficient) of the deg-lex leading term."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_deglex_key)
        return e, self.terms[e]

    def constant_coefficient(self) -> NuSeries:
        z = (0,) * len(self.chart.all_vars)
        return self.terms.get(z, NuSeries.coerce(0))

    def max_exact(self):
        return all(c.exact for c in self.terms.values())

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return RatFunc(self) == other
        if isinstance(other, (int, Fraction, Scalar, NuSeries)):
            other = Polynomial.constant(self.chart, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _deglex_key(t[0]),
                      reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (v if k == 1 else f"{v}^{k}")
                for v, k in zip(self.chart.all_vars, e) if k
            )
            cs = str(c)
            needs_paren = ("+" in cs[1:]) or ("-" in cs[1:]) or "nu" in cs
            if not mono:
                parts.append(f"({cs})" if needs_paren and "(" not in cs else cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"({cs})*{mono}" if needs_paren else f"{cs}*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    __repr__ = __str__


def _det(m):
    n = len(m)
    if n == 0:
        return Scalar(1)
    if n == 1:
        return m[0][0]
    out = Scalar(0)
    sign = Scalar(1)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        out = out + sign * m[0][j] * _det(minor)
        sign = -sign
    return out


def _divides(ea, eb):
    return all(a <= b for a, b in zip(ea, eb))


def validate_self_reduced(fs):
    """Check that no generator's leading monomial divides a term of another
    generator; the restricted division below is then confluent."""
    for i, f in enumerate(fs):
        ef, _ = f.leading()
        for j, g in enumerate(fs):
            if i == j:
                continue
            for e in g.terms:
                if _divides(ef, e):
                    raise ReductionIncomplete(
                        "reduction incomplete: generators are not self-reduced")


def ideal_reduce(p, fs):
    """Normal form of p modulo the ideal generated by the polynomials fs.

    Each generator must have a leading coefficient that is an invertible
    nu-free scalar.  For a self-reduced family (automatic for k=1) the
    result is a canonical normal form: zero exactly when p lies in the
    ideal under this restricted division.
    """
    if isinstance(p, RatFunc):
        den_red = ideal_reduce(p.den, fs)
        if den_red.is_zero():
            raise ReductionIncomplete(
                "reduction incomplete: denominator lies in the ideal")
        return RatFunc(ideal_reduce(p.num, fs), den_red)
    fs = [f for f in fs if not f.is_zero()]
    leads = []
    for f in fs:
        if f.chart != p.chart:
            raise ChartMismatch("ideal generators live on a different chart")
        e, c = f.leading()
        if not c.is_constant() or c.is_zero():
            raise ReductionIncomplete(
                "reduction incomplete: leading coefficient is not invertible")
        leads.append((e, c, f))
    out = Polynomial.zero(p.chart)
    work = p
    while not work.is_zero():
        e, c = work.leading()
        hit = None
        for ef, cf, f in leads:
            if _divides(ef, e):
                hit = (ef, cf, f)
                break
        if hit is None:
            t = Polynomial(p.chart, {e: c})
            out = out + t
            work = work - t
        else:
            ef, cf, f = hit
            shift = tuple(a - b for a, b in zip(e, ef))
            factor = Polynomial(p.chart, {shift: c / cf})
            work = work - factor * f
    return out


def poly_divmod(p, d):
    """Single-divisor multivariate division: p = q*d + r where no term of r
    is divisible by lead(d)."""
    ed, cd = d.leading()
    if not cd.is_constant():
        raise ReductionIncomplete("divisor leading coefficient is nu-dependent")
    q = Polynomial.zero(p.chart)
    r = Polynomial.zero(p.chart)
    work = p
    while not work.is_zero():
        e, c = work.leading()
        if _divides(ed, e):
            shift = tuple(a - b for a, b in zip(e, ed))
            t = Polynomial(p.chart, {shift: c / cd})
            q = q + t
            work = work - t * d
        else:
            t = Polynomial(p.chart, {e: c})
            r = r + t
            work = work - t
    return q, r


class RatFunc:
    """A fraction of polynomials with a nu-free denominator.

    Only light normalization is performed (zero numerator, exact division,
    monic denominator); equality is decided by cross-multiplication, which
    stays exact without a multivariate gcd.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial | None = None):
        if den is None:
            den = Polynomial.constant(num.chart, 1)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not den.is_nu_free():
            raise ValueError("denominators must be nu-free")
        if num.is_zero():
            den = Polynomial.constant(num.chart, 1)
        elif den.degree() > 0 and len(num.terms) <= 48:
            # cheap exact-cancellation attempt, guarded by the necessary
            # leading-monomial divisibility so chains stay fast
            ed, _ = den.leading()
            en, _ = num.leading()
            if _divides(ed, en):
                q, r = poly_divmod(num, den)
                if r.is_zero():
                    num, den = q, Polynomial.constant(num.chart, 1)
        if den.degree() == 0:
            c = den.constant_coefficient()
            num = num * (NuSeries.coerce(1) / c)
            den = Polynomial.constant(num.chart, 1)
        else:
            _, lc = den.leading()
            inv = NuSeries.coerce(1) / lc
            num = num * inv
            den = den * inv
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("RatFunc is immutable")

    @property
    def chart(self):
        return self.num.chart

    def coerce(self, x) -> "RatFunc":
        if isinstance(x, RatFunc):
            if x.chart != self.chart:
                raise ChartMismatch(f"{x.chart!r} vs {self.chart!r}")
            return x
        if isinstance(x, Polynomial):
            return RatFunc(x)
        if isinstance(x, (int, Fraction, Scalar, NuSeries)):
            return RatFunc(Polynomial.constant(self.chart, x))
        raise TypeError(f"cannot coerce {x!r} to RatFunc")

    def __add__(self, other):
        other = self.coerce(other)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self.coerce(other))

    def __rsub__(self, other):
        return self.coerce(other) + (-self)

    def __mul__(self, other):
        other = self.coerce(other)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self.coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        if not other.num.is_nu_free():
            raise ValueError("cannot divide by a nu-dependent function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self.coerce(other) / self

    def diff(self, i) -> "RatFunc":
        if self.den.degree() == 0:
            return RatFunc(self.num.diff(i), self.den)
        return RatFunc(self.num.diff(i) * self.den - self.num * self.den.diff(i),
                       self.den * self.den)

    def conjugate(self) -> "RatFunc":
        return RatFunc(self.num.conjugate(), self.den.conjugate())

    def scale(self, c):
        return RatFunc(self.num.scale(c), self.den)

    def truncate(self, cap):
        return RatFunc(self.num.truncate(cap), self.den)

    def is_zero(self):
        return self.num.is_zero()

    def as_polynomial(self) -> Polynomial:
        if self.den.degree() > 0:
            raise ValueError(f"{self} is not polynomial")
        return self.num

    def __eq__(self, other):
        try:
            other = self.coerce(other)
        except TypeError:
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        # hash constant-denominator values like their polynomial
        if self.den.degree() == 0:
            return hash(self.num)
        return hash((self.num, self.den))

    def __str__(self):
        if self.den.degree() == 0:
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def equal_mod_ideal(a, b, fs) -> bool:
    """Whether two values (Polynomial or RatFunc) agree modulo the ideal,
    deciding rational functions by cross-multiplication before reduction."""
    an, ad = (a.num, a.den) if isinstance(a, RatFunc) else \
        (a, Polynomial.constant(a.chart, 1))
    bn, bd = (b.num, b.den) if isinstance(b, RatFunc) else \
        (b, Polynomial.constant(b.chart, 1))
    for d in (ad, bd):
        if ideal_reduce(d, fs).is_zero():
            raise ReductionIncomplete(
                "reduction incomplete: denominator lies in the ideal")
    return ideal_reduce(an * bd - bn * ad, fs).is_zero()


def rat_solve(mat, rhs):
    """Solve mat @ x = rhs exactly over the rational-function field.

    mat is a list of rows of RatFunc/Polynomial entries, rhs a list of
    columns (each a list).  Returns one list per rhs column; raises
    ZeroDivisionError when the matrix is singular.
    """
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("rat_solve needs a square matrix")
    chart = None
    for row in mat:
        for x in row:
            if isinstance(x, (Polynomial, RatFunc)):
                chart = x.chart
                break
        if chart:
            break
    if chart is None:
        raise ValueError("matrix has no chart-carrying entries")

    def lift(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Polynomial):
            return RatFunc(x)
        return RatFunc(Polynomial.constant(chart, x))

    a = [[lift(x) for x in row] for row in mat]
    b = [[lift(x) for x in col] for col in rhs]
    ncols = len(b)
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix in rat_solve")
        a[col], a[piv] = a[piv], a[col]
        for k in range(ncols):
            b[k][col], b[k][piv] = b[k][piv], b[k][col]
        inv = lift(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for k in range(ncols):
            b[k][col] = b[k][col] * inv
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                for k in range(ncols):
                    b[k][r] = b[k][r] - f * b[k][col]
    return b


def rat_matrix_inverse(mat):
    """Exact inverse of a square matrix of RatFunc/Polynomial entries, in
    adjugate-over-determinant form so every entry is a single fraction."""
    n = len(mat)
    chart = None
    for row in mat:
        for x in row:
            if isinstance(x, (Polynomial, RatFunc)):
                chart = x.chart
                break
        if chart:
            break

    def lift(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Polynomial):
            return RatFunc(x)
        return RatFunc(Polynomial.constant(chart, x))

    a = [[lift(x) for x in row] for row in mat]

    def det(rows):
        if len(rows) == 1:
            return rows[0][0]
        out = None
        for j in range(len(rows)):
            if rows[0][j].is_zero():
                continue
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            piece = rows[0][j] * det(minor)
            if j % 2:
                piece = -piece
            out = piece if out is None else out + piece
        if out is None:
            return RatFunc(Polynomial.zero(chart))
        return out

    d = det(a)
    if d.is_zero():
        raise ZeroDivisionError("singular matrix in rat_matrix_inverse")
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1:]
                     for r, row in enumerate(a) if r != j]
            cof = det(minor) if minor else lift(1)
            if (i + j) % 2:
                cof = -cof
            out[i][j] = cof / d
    return out


def as_coeff(chart, x):
    """Coerce ints/Fractions/Scalars/NuSeries/Polynomial/RatFunc to a
    coefficient usable in tensor components (Polynomial when possible)."""
    if isinstance(x, (RatFunc, Polynomial)):
        if x.chart != chart:
            raise ChartMismatch(f"{x.chart!r} vs {chart!r}")
        return x
    return Polynomial.constant(chart, x)
