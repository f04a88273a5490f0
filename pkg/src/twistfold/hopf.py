"""Universal-enveloping-algebra elements over a declared generating set of
vector fields, and twist construction (abelian / Jordanian families) with the
derived structure: inverse, R-matrix, beta conjugator, twisted antipode and
involution, and the multiplicative isomorphism onto the twisted algebra.

Words are kept in PBW normal form (letters sorted ascending, reordered via
the bracket table), so equality of elements and of multi-leg sums is decided
canonically instead of through decompositions that are not unique.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .fields import VectorField, lie_derivative
from .poly import Polynomial
from .scalars import I, NuSeries, Scalar, S_ONE


class GeneratorSetError(Exception):
    pass


class GeneratorSet:
    """Named vector fields with a constant-coefficient bracket table.

    brackets maps (i, j) with i < j to {k: Scalar} for [g_i, g_j]; missing
    pairs commute.  star, when given, maps each generator index to the
    linear combination implementing the involution (usually g* = -g).
    """

    def __init__(self, names, fields, brackets=None, star=None):
        self.names = tuple(names)
        self.fields = tuple(fields)
        if len(self.names) != len(self.fields):
            raise GeneratorSetError("one field per generator name")
        if len(set(self.names)) != len(self.names):
            raise GeneratorSetError("duplicate generator names")
        self.chart = self.fields[0].chart if self.fields else None
        for f in self.fields:
            if f.chart != self.chart:
                raise GeneratorSetError("generators on mixed charts")
        self.brackets = {}
        for (i, j), combo in (brackets or {}).items():
            if not (0 <= i < j < len(self.names)):
                raise GeneratorSetError("bracket table keys must have i < j")
            self.brackets[(i, j)] = {k: Scalar.coerce(v)
                                     for k, v in combo.items()
                                     if not Scalar.coerce(v).is_zero()}
        self.star = None
        if star is not None:
            self.star = {i: {k: Scalar.coerce(v) for k, v in combo.items()}
                         for i, combo in star.items()}
        self._norm_cache: dict = {}
        self._act_cache: dict = {}
        self._validate()

    @staticmethod
    def from_fields(names, fields, star_signs=None):
        """Build the set and infer the bracket table by expanding the actual
        field brackets with constant coefficients."""
        table = {}
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                combo = _constant_expansion(fields[i].bracket(fields[j]), fields)
                if combo is None:
                    raise GeneratorSetError(
                        f"[{names[i]},{names[j]}] is not a constant combination "
                        "of the generators")
                if combo:
                    table[(i, j)] = combo
        star = None
        if star_signs is not None:
            star = {i: {i: Scalar.coerce(s)} for i, s in enumerate(star_signs)}
        return GeneratorSet(names, fields, table, star)

    def index(self, name):
        return self.names.index(name)

    def structure(self, i, j):
        """[g_i, g_j] as {k: Scalar} for any i, j."""
        if i == j:
            return {}
        if i < j:
            return self.brackets.get((i, j), {})
        return {k: -v for k, v in self.brackets.get((j, i), {}).items()}

    def _validate(self):
        n = len(self.names)
        # table must reproduce the actual Lie brackets of the fields
        for i in range(n):
            for j in range(i + 1, n):
                want = self.fields[i].bracket(self.fields[j])
                got = _combine(self.fields, self.structure(i, j), self.chart)
                if want != got:
                    raise GeneratorSetError(
                        f"bracket table disagrees with [{self.names[i]},"
                        f"{self.names[j]}]")
        # Jacobi identity on structure constants
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = {}
                    for m, c in self.structure(j, k).items():
                        for l, d in self.structure(i, m).items():
                            acc[l] = acc.get(l, Scalar(0)) + c * d
                    for m, c in self.structure(k, i).items():
                        for l, d in self.structure(j, m).items():
                            acc[l] = acc.get(l, Scalar(0)) + c * d
                    for m, c in self.structure(i, j).items():
                        for l, d in self.structure(k, m).items():
                            acc[l] = acc.get(l, Scalar(0)) + c * d
                    if any(not v.is_zero() for v in acc.values()):
                        raise GeneratorSetError("Jacobi identity fails")
        if self.star is not None:
            self._validate_star()

    def _validate_star(self):
        n = len(self.names)
        def smat(i, k):
            return self.star.get(i, {}).get(k, Scalar(0))
        # involution: star(star(g)) = g with antilinear coefficients
        for i in range(n):
            acc = {k: Scalar(0) for k in range(n)}
            for j in range(n):
                s = smat(i, j)
                if s.is_zero():
                    continue
                for k in range(n):
                    acc[k] = acc[k] + s.conjugate() * smat(j, k)
            for k in range(n):
                want = Scalar(1) if k == i else Scalar(0)
                if acc[k] != want:
                    raise GeneratorSetError("star table is not an involution")
        # anti-homomorphism against the brackets: [g_i,g_j]* = [g_j*, g_i*]
        for i in range(n):
            for j in range(n):
                lhs = {}
                for k, c in self.structure(i, j).items():
                    for l, s in self.star.get(k, {}).items():
                        lhs[l] = lhs.get(l, Scalar(0)) + c.conjugate() * s
                rhs = {}
                for m, sj in self.star.get(j, {}).items():
                    for nn, si in self.star.get(i, {}).items():
                        for l, c in self.structure(m, nn).items():
                            rhs[l] = rhs.get(l, Scalar(0)) + sj * si * c
                keys = set(lhs) | set(rhs)
                if any(lhs.get(k, Scalar(0)) != rhs.get(k, Scalar(0))
                       for k in keys):
                    raise GeneratorSetError("star table breaks the brackets")

    # -- memoized module actions --------------------------------------------

    def act_letter(self, letter, target):
        try:
            key = (letter, target)
            hit = self._act_cache.get(key)
        except TypeError:
            return lie_derivative(self.fields[letter], target)
        if hit is None:
            hit = lie_derivative(self.fields[letter], target)
            self._act_cache[key] = hit
        return hit

    def act_word(self, word, target):
        """Iterated Lie derivative; the first letter acts last."""
        for letter in reversed(word):
            target = self.act_letter(letter, target)
        return target

    # -- PBW normalization -------------------------------------------------

    def normalize_word(self, word):
        """Rewrite an arbitrary word into {sorted_word: Scalar}."""
        word = tuple(word)
        cached = self._norm_cache.get(word)
        if cached is not None:
            return cached
        out = self._normalize_uncached(word)
        self._norm_cache[word] = out
        return out

    def _normalize_uncached(self, word):
        for p in range(len(word) - 1):
            a, b = word[p], word[p + 1]
            if a > b:
                swapped = word[:p] + (b, a) + word[p + 2:]
                out = dict(self.normalize_word(swapped))
                for k, c in self.structure(a, b).items():
                    sub = self.normalize_word(word[:p] + (k,) + word[p + 2:])
                    for w, d in sub.items():
                        out[w] = out.get(w, Scalar(0)) + c * d
                return {w: c for w, c in out.items() if not c.is_zero()}
        return {word: Scalar(1)}

    def __repr__(self):
        return f"GeneratorSet({self.names!r})"


def _combine(fields, combo, chart):
    out = VectorField(chart, [Polynomial.zero(chart)] * chart.n)
    for k, c in combo.items():
        out = out + fields[k].scale(NuSeries([c]))
    return out


def _constant_expansion(target, fields):
    """Try to write target = sum_k c_k * fields[k] with Scalar c_k by exact
    linear solving over the monomial coefficients; None when impossible."""
    chart = target.chart
    rows = {}

    def add_rows(vec_index, poly, col, ncols):
        for e, s in poly.terms.items():
            if not s.is_constant():
                return False
            key = (vec_index, e)
            row = rows.setdefault(key, [Scalar(0)] * (ncols + 1))
            row[col] = row[col] + (s.coeff(0) if s.coeffs else Scalar(0))
        return True

    ncols = len(fields)
    for k, f in enumerate(fields):
        for i, comp in enumerate(f.comps):
            if not isinstance(comp, Polynomial):
                return None
            if not add_rows(i, comp, k, ncols):
                return None
    for i, comp in enumerate(target.comps):
        if not isinstance(comp, Polynomial):
            return None
        if not add_rows(i, comp, ncols, ncols):
            return None
    mat = [row[:] for row in rows.values()]
    sol = _solve_scalar_system(mat, ncols)
    if sol is None:
        return None
    return {k: c for k, c in enumerate(sol) if not c.is_zero()}


def _solve_scalar_system(rows, ncols):
    """Gaussian elimination for A x = b given rows [a_1..a_n, b]."""
    rows = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero()),
                   None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    sol = [Scalar(0)] * ncols
    for i, c in enumerate(pivots):
        sol[c] = rows[i][ncols]
    # consistency: remaining rows must be zero
    for i in range(len(pivots), len(rows)):
        if any(not v.is_zero() for v in rows[i][:ncols]) or \
                not rows[i][ncols].is_zero():
            return None
    # verify (handles free columns)
    for row in rows[:len(pivots)]:
        acc = Scalar(0)
        for c in range(ncols):
            acc = acc + row[c] * sol[c]
        if acc != row[ncols]:
            return None
    return sol


class UElement:
    """Finite sum of NuSeries-weighted PBW words over one GeneratorSet."""

    __slots__ = ("gens", "terms")

    def __init__(self, gens: GeneratorSet, terms=None, *, _normalized=False):
        object.__setattr__(self, "gens", gens)
        clean = {}
        if terms:
            for w, c in terms.items():
                c = NuSeries.coerce(c)
                if c.is_zero():
                    continue
                if _normalized:
                    clean[tuple(w)] = clean.get(tuple(w), NuSeries([])) + c
                else:
                    for nw, s in gens.normalize_word(w).items():
                        prev = clean.get(nw)
                        v = c * s
                        clean[nw] = v if prev is None else prev + v
        clean = {w: c for w, c in clean.items() if not c.is_zero()}
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("UElement is immutable")

    @staticmethod
    def unit(gens, coeff=1):
        return UElement(gens, {(): NuSeries.coerce(coeff)}, _normalized=True)

    @staticmethod
    def generator(gens, name):
        return UElement(gens, {(gens.index(name),): S_ONE}, _normalized=True)

    def _check(self, other):
        if not isinstance(other, UElement) or other.gens is not self.gens:
            raise GeneratorSetError("UElements over different generator sets")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(w, None)
            else:
                out[w] = s
        return UElement(self.gens, out, _normalized=True)

    def __neg__(self):
        return UElement(self.gens, {w: -c for w, c in self.terms.items()},
                        _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar, NuSeries)):
            return self.scale(other)
        self._check(other)
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                c = c1 * c2
                if c.is_zero():
                    continue
                for nw, s in self.gens.normalize_word(w1 + w2).items():
                    prev = out.get(nw)
                    v = c * s
                    out[nw] = v if prev is None else prev + v
        return UElement(self.gens, out, _normalized=True)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Scalar, NuSeries)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c):
        c = NuSeries.coerce(c)
        return UElement(self.gens, {w: v * c for w, v in self.terms.items()},
                        _normalized=True)

    def truncate(self, cap):
        return UElement(self.gens,
                        {w: c.truncate(cap) for w, c in self.terms.items()},
                        _normalized=True)

    def counit(self) -> NuSeries:
        return self.terms.get((), NuSeries([]))

    def antipode(self) -> "UElement":
        out = {}
        for w, c in self.terms.items():
            sign = Scalar(-1 if len(w) % 2 else 1)
            for nw, s in self.gens.normalize_word(tuple(reversed(w))).items():
                prev = out.get(nw)
                v = c * (sign * s)
                out[nw] = v if prev is None else prev + v
        return UElement(self.gens, out, _normalized=True)

    def coproduct(self) -> "LegSum":
        out = {}
        for w, c in self.terms.items():
            n = len(w)
            for size in range(n + 1):
                for left_pos in combinations(range(n), size):
                    lp = set(left_pos)
                    left = tuple(w[i] for i in range(n) if i in lp)
                    right = tuple(w[i] for i in range(n) if i not in lp)
                    key = (left, right)
                    prev = out.get(key)
                    out[key] = c if prev is None else prev + c
        return LegSum(self.gens, 2, out)

    def star(self) -> "UElement":
        """The declared involution, extended antilinearly and contravariantly."""
        if self.gens.star is None:
            raise GeneratorSetError("generator set has no star table")
        out = UElement(self.gens, {}, _normalized=True)
        for w, c in self.terms.items():
            term = UElement.unit(self.gens, c.conjugate())
            for letter in reversed(w):
                combo = self.gens.star.get(letter)
                if combo is None:
                    raise GeneratorSetError(
                        f"no star entry for generator "
                        f"{self.gens.names[letter]}")
                img = UElement(self.gens,
                               {(k,): NuSeries([v]) for k, v in combo.items()},
                               _normalized=True)
                term = term * img
            out = out + term
        return out

    def adjoint(self, target: "UElement") -> "UElement":
        """Hopf adjoint action u |> v = u_(1) v S(u_(2))."""
        self._check(target)
        cop = self.coproduct()
        out = UElement(self.gens, {}, _normalized=True)
        for (w1, w2), c in cop.terms.items():
            u1 = UElement(self.gens, {w1: S_ONE}, _normalized=True)
            u2 = UElement(self.gens, {w2: S_ONE}, _normalized=True)
            out = out + (u1 * target * u2.antipode()).scale(c)
        return out

    def act(self, target):
        """Action on functions/fields/forms/tensors by iterated Lie
        derivative; the first letter of each word acts last."""
        chart = self.gens.chart
        out = None
        for w, c in self.terms.items():
            val = _scale_any(self.gens.act_word(w, target), c, chart)
            out = val if out is None else out + val
        if out is None:
            out = _scale_any(target, NuSeries([]), chart)
        return out

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, UElement):
            return NotImplemented
        return self.gens is other.gens and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.gens), frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])):
            word = "*".join(self.gens.names[i] for i in w) if w else "1"
            parts.append(f"({c})*{word}")
        return " + ".join(parts)

    __repr__ = __str__


def _scale_any(val, c, chart):
    from .poly import RatFunc, as_coeff
    if isinstance(val, (Polynomial, RatFunc)):
        return val.scale(c)
    if isinstance(val, (int, Fraction, Scalar, NuSeries)):
        return as_coeff(chart, val).scale(c)
    return val.scale(Polynomial.constant(chart, c))


class LegSum:
    """A sum of NuSeries-weighted tensor words in U(g)^{⊗ nlegs}, each leg in
    PBW normal form; the canonical carrier for twists, R-matrices and
    iterated-coproduct identities."""

    __slots__ = ("gens", "nlegs", "terms")

    def __init__(self, gens: GeneratorSet, nlegs: int, terms=None):
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "nlegs", nlegs)
        clean = {}
        if terms:
            for key, c in terms.items():
                c = NuSeries.coerce(c)
                if c.is_zero():
                    continue
                key = tuple(tuple(w) for w in key)
                if len(key) != nlegs:
                    raise ValueError("leg count mismatch")
                prev = clean.get(key)
                clean[key] = c if prev is None else prev + c
        clean = {k: c for k, c in clean.items() if not c.is_zero()}
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("LegSum is immutable")

    @staticmethod
    def unit(gens, nlegs, coeff=1):
        return LegSum(gens, nlegs, {((),) * nlegs: NuSeries.coerce(coeff)})

    def _check(self, other):
        if (not isinstance(other, LegSum) or other.gens is not self.gens
                or other.nlegs != self.nlegs):
            raise GeneratorSetError("incompatible leg sums")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return LegSum(self.gens, self.nlegs, out)

    def __neg__(self):
        return LegSum(self.gens, self.nlegs,
                      {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = NuSeries.coerce(c)
        return LegSum(self.gens, self.nlegs,
                      {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        """Leg-wise product (a1⊗...⊗an)(b1⊗...⊗bn) = a1b1 ⊗ ... ⊗ anbn."""
        self._check(other)
        gens = self.gens
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                c = c1 * c2
                if c.is_zero():
                    continue
                # normalize each concatenated leg, distributing coefficients
                acc = [((), c)]
                for leg in range(self.nlegs):
                    nxt = []
                    for words, coeff in acc:
                        for nw, s in gens.normalize_word(k1[leg] + k2[leg]).items():
                            nxt.append((words + (nw,), coeff * s))
                    acc = nxt
                for words, coeff in acc:
                    prev = out.get(words)
                    v = coeff if prev is None else prev + coeff
                    if v.is_zero():
                        out.pop(words, None)
                    else:
                        out[words] = v
        return LegSum(self.gens, self.nlegs, out)

    def power(self, k):
        out = LegSum.unit(self.gens, self.nlegs)
        for _ in range(k):
            out = out * self
        return out

    def exp(self, cap) -> "LegSum":
        """exp of a leg sum whose every coefficient is O(nu); truncates at
        nu^cap, terminating because powers raise the nu-order."""
        for c in self.terms.values():
            o = c.nu_order()
            if o is not None and o == 0:
                raise ValueError("exp requires an O(nu) argument")
        out = LegSum.unit(self.gens, self.nlegs).truncate(cap)
        term = out
        k = 1
        while True:
            term = (term * self).scale(Fraction(1, k)).truncate(cap)
            if not term.terms:
                break
            out = out + term
            k += 1
        return out

    def truncate(self, cap):
        return LegSum(self.gens, self.nlegs,
                      {k: c.truncate(cap) for k, c in self.terms.items()})

    def swap(self, i=0, j=1):
        out = {}
        for k, c in self.terms.items():
            kk = list(k)
            kk[i], kk[j] = kk[j], kk[i]
            key = tuple(kk)
            prev = out.get(key)
            out[key] = c if prev is None else prev + c
        return LegSum(self.gens, self.nlegs, out)

    def coproduct_on_leg(self, i) -> "LegSum":
        """Apply the primitive coproduct to leg i, giving nlegs+1 legs."""
        out = {}
        for k, c in self.terms.items():
            w = k[i]
            n = len(w)
            for size in range(n + 1):
                for pos in combinations(range(n), size):
                    ps = set(pos)
                    left = tuple(w[q] for q in range(n) if q in ps)
                    right = tuple(w[q] for q in range(n) if q not in ps)
                    key = k[:i] + (left, right) + k[i + 1:]
                    prev = out.get(key)
                    out[key] = c if prev is None else prev + c
        return LegSum(self.gens, self.nlegs + 1, out)

    def counit_on_leg(self, i) -> "LegSum":
        out = {}
        for k, c in self.terms.items():
            if k[i]:
                continue
            key = k[:i] + k[i + 1:]
            prev = out.get(key)
            out[key] = c if prev is None else prev + c
        return LegSum(self.gens, self.nlegs - 1, out)

    def antipode_on_leg(self, i) -> "LegSum":
        gens = self.gens
        out = {}
        for k, c in self.terms.items():
            w = k[i]
            sign = Scalar(-1 if len(w) % 2 else 1)
            for nw, s in gens.normalize_word(tuple(reversed(w))).items():
                key = k[:i] + (nw,) + k[i + 1:]
                v = c * (sign * s)
                prev = out.get(key)
                v = v if prev is None else prev + v
                if v.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = v
        return LegSum(self.gens, self.nlegs, out)

    def star_legs(self) -> "LegSum":
        """Apply the involution to every leg (coefficients conjugate once)."""
        out = LegSum(self.gens, self.nlegs, {})
        for k, c in self.terms.items():
            pieces = [UElement(self.gens, {w: S_ONE}, _normalized=True).star()
                      for w in k]
            # distribute the products of the starred legs
            acc = [((), c.conjugate())]
            for p in pieces:
                nxt = []
                for words, coeff in acc:
                    for w2, c2 in p.terms.items():
                        nxt.append((words + (w2,), coeff * c2))
                acc = nxt
            out = out + LegSum(self.gens, self.nlegs, dict_from(acc))
        return out

    def embed(self, positions, total) -> "LegSum":
        """Lift into U(g)^{⊗ total} placing leg q at positions[q], units
        elsewhere."""
        out = {}
        for k, c in self.terms.items():
            key = [()] * total
            for q, pos in enumerate(positions):
                key[pos] = k[q]
            key = tuple(key)
            prev = out.get(key)
            out[key] = c if prev is None else prev + c
        return LegSum(self.gens, total, out)

    def leg_pairs(self):
        """Iterate (coefficient, (UElement per leg)) for acting on data."""
        for k, c in self.terms.items():
            yield c, tuple(UElement(self.gens, {w: S_ONE}, _normalized=True)
                           for w in k)

    def act_tuple(self, targets):
        """Yield (coefficient, [leg_i acted on targets[i]]) per term."""
        for k, c in self.terms.items():
            yield c, [self.gens.act_word(w, t) for w, t in zip(k, targets)]

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, LegSum):
            return NotImplemented
        return (self.gens is other.gens and self.nlegs == other.nlegs
                and self.terms == other.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(),
                           key=lambda t: (sum(len(w) for w in t[0]), t[0])):
            legs = " ⊗ ".join(
                ("*".join(self.gens.names[i] for i in w) if w else "1")
                for w in k)
            parts.append(f"({c})·[{legs}]")
        return " + ".join(parts)

    __repr__ = __str__


def dict_from(pairs):
    out = {}
    for k, c in pairs:
        prev = out.get(k)
        out[k] = c if prev is None else prev + c
    return out


# -- twist construction ------------------------------------------------------


class TwistError(Exception):
    pass


class TwistData:
    """A validated twist to a fixed truncation order, with cached inverse,
    R-matrix, beta conjugator and an order+1 tail used as an exactness
    witness for actions."""

    def __init__(self, gens, family, legs, inverse_legs, order, tail=None,
                 tail_inverse=None):
        self.gens = gens
        self.family = family
        self.order = order
        self.legs = legs            # LegSum(2): the twist F
        self.inverse_legs = inverse_legs  # LegSum(2): F inverse
        self.tail = tail            # order+1 homogeneous part of F
        self.tail_inverse = tail_inverse
        one = LegSum.unit(gens, 2).truncate(order)
        if (legs * inverse_legs).truncate(order) != one:
            raise TwistError("twist times declared inverse is not 1⊗1")
        if (inverse_legs * legs).truncate(order) != one:
            raise TwistError("declared inverse times twist is not 1⊗1")
        self.r_legs = (legs.swap() * inverse_legs).truncate(order)
        self.r_inverse_legs = self.r_legs.swap()
        if (self.r_legs * self.r_inverse_legs).truncate(order) != one:
            raise TwistError("R-matrix is not invertible by its flip")
        self.beta = _fold_beta(legs)
        self.beta_inverse = _fold_beta_inverse(inverse_legs)
        if self.beta * self.beta_inverse != UElement.unit(gens).truncate(order):
            raise TwistError("beta conjugator is not invertible")

    def is_identity(self):
        return self.family == "identity"

    def coproduct_twisted(self, u: UElement) -> LegSum:
        """Twisted coproduct: F Δ(u) F̄."""
        return (self.legs * u.coproduct() * self.inverse_legs) \
            .truncate(self.order)

    def antipode_twisted(self, u: UElement) -> UElement:
        return (self.beta * u.antipode() * self.beta_inverse) \
            .truncate(self.order)

    def star_twisted(self, u: UElement) -> UElement:
        return (self.beta * u.star() * self.beta_inverse).truncate(self.order)

    def d_iso(self, u: UElement) -> UElement:
        """D(u) = (F̄1 |> u) F̄2 with the Hopf adjoint action."""
        out = UElement(self.gens, {}, _normalized=True)
        for c, (l1, l2) in self.inverse_legs.leg_pairs():
            out = out + (l1.adjoint(u) * l2).scale(c)
        return out.truncate(self.order)

    def d_iso_inverse(self, phi: UElement) -> UElement:
        out = UElement(self.gens, {}, _normalized=True)
        for c, (l1, l2) in self.inverse_legs.leg_pairs():
            out = out + (l1 * phi * self.beta * l2.antipode()).scale(c)
        return out.truncate(self.order)

    def is_unitary(self) -> bool:
        return self.legs.star_legs().truncate(self.order) == self.inverse_legs

    def is_real(self) -> bool:
        flip = self.legs.swap().antipode_on_leg(0).antipode_on_leg(1)
        return self.legs.star_legs().truncate(self.order) == \
            flip.truncate(self.order)


def _fold_beta(legs: LegSum) -> UElement:
    out = UElement(legs.gens, {}, _normalized=True)
    for c, (l1, l2) in legs.leg_pairs():
        out = out + (l1 * l2.antipode()).scale(c)
    return out


def _fold_beta_inverse(inverse_legs: LegSum) -> UElement:
    out = UElement(inverse_legs.gens, {}, _normalized=True)
    for c, (l1, l2) in inverse_legs.leg_pairs():
        out = out + (l1.antipode() * l2).scale(c)
    return out


def build_twist(gens: GeneratorSet, spec, order: int) -> TwistData:
    """Construct a twist over gens.

    spec is one of
      ("identity",)
      ("abelian", [(left_name, right_name), ...])   pairwise commuting legs
      ("jordanian", cartan_name, raising_name)      with [H, E] = 2E
    """
    if order < 0:
        raise TwistError("truncation order must be nonnegative")
    kind = spec[0]
    if kind == "identity":
        one = LegSum.unit(gens, 2).truncate(order)
        return TwistData(gens, "identity", one, one, order,
                         tail=LegSum(gens, 2, {}),
                         tail_inverse=LegSum(gens, 2, {}))
    if kind == "abelian":
        pairs = [(gens.index(a), gens.index(b)) for a, b in spec[1]]
        involved = sorted({i for p in pairs for i in p})
        for i in involved:
            for j in involved:
                if i < j and gens.structure(i, j):
                    raise TwistError(
                        f"abelian twist legs do not commute: "
                        f"[{gens.names[i]},{gens.names[j]}] != 0")
        def primitive(cap):
            terms = {((a,), (b,)): NuSeries.nu(1, I, cap=cap)
                     for a, b in pairs}
            return LegSum(gens, 2, terms)
        legs = primitive(order).exp(order)
        inv = (-primitive(order)).exp(order)
        full = primitive(order + 1).exp(order + 1)
        fullinv = (-primitive(order + 1)).exp(order + 1)
        return TwistData(gens, "abelian", legs, inv, order,
                         tail=_homogeneous_part(full, order + 1),
                         tail_inverse=_homogeneous_part(fullinv, order + 1))
    if kind == "jordanian":
        h = gens.index(spec[1])
        e = gens.index(spec[2])
        rel = gens.structure(h, e)
        if rel.get(e) != Scalar(2) or len(rel) != 1:
            raise TwistError("jordanian twist needs [H, E] = 2E")

        def generator(cap):
            # (1/2) H ⊗ log(1 + i nu E): the nu^m part carries E^m with
            # coefficient (1/2)(-1)^(m+1) (i)^m / m
            terms = {}
            for m in range(1, cap + 1):
                ci = Scalar(1)
                for _ in range(m):
                    ci = ci * I
                val = Scalar(Fraction((-1) ** (m + 1), 2 * m)) * ci
                terms[((h,), (e,) * m)] = NuSeries.nu(m, val, cap=cap)
            return LegSum(gens, 2, terms)

        legs = generator(order).exp(order)
        inv = (-generator(order)).exp(order)
        full = generator(order + 1).exp(order + 1)
        fullinv = (-generator(order + 1)).exp(order + 1)
        return TwistData(gens, "jordanian", legs, inv, order,
                         tail=_homogeneous_part(full, order + 1),
                         tail_inverse=_homogeneous_part(fullinv, order + 1))
    raise TwistError(f"unknown twist family {kind!r}")


def _homogeneous_part(legsum: LegSum, k: int) -> LegSum:
    out = {}
    for key, c in legsum.terms.items():
        cc = NuSeries([Scalar(0)] * k + [c.coeff(k)])
        if not cc.is_zero():
            out[key] = cc
    return LegSum(legsum.gens, legsum.nlegs, out)


def iterated_twist(twist: TwistData, n: int) -> LegSum:
    """F^(n): F^(2) = F and F^(n+1) = (1⊗...⊗F)(id⊗...⊗Δ)F^(n)."""
    if n < 2:
        raise ValueError("iterated twists start at two legs")
    out = twist.legs
    while out.nlegs < n:
        k = out.nlegs
        lifted = twist.legs.embed((k - 1, k), k + 1)
        out = (lifted * out.coproduct_on_leg(k - 1)).truncate(twist.order)
    return out


def check_twist_axioms(twist: TwistData, monomial_triples=None):
    """Counitality and the 2-cocycle identity, both as canonical identities
    in U(g)^{⊗3} and, when sample triples are supplied, as exact residuals of
    the two sides acting on them."""
    gens = twist.gens
    order = twist.order
    one1 = LegSum.unit(gens, 1).truncate(order)
    counital_left = twist.legs.counit_on_leg(0) == one1
    counital_right = twist.legs.counit_on_leg(1) == one1
    lhs = (twist.legs.embed((0, 1), 3) * twist.legs.coproduct_on_leg(0)) \
        .truncate(order)
    rhs = (twist.legs.embed((1, 2), 3) * twist.legs.coproduct_on_leg(1)) \
        .truncate(order)
    cocycle_exact = (lhs == rhs)
    residuals = []
    if monomial_triples is not None:
        diff = lhs - rhs
        for triple in monomial_triples:
            acc = Polynomial.zero(gens.chart)
            for c, acted in diff.act_tuple(triple):
                prod = acted[0] * acted[1] * acted[2]
                acc = acc + prod.scale(c)
            residuals.append(acc)
    return {
        "counital": counital_left and counital_right,
        "cocycle_exact": cocycle_exact,
        "cocycle_residuals": residuals,
    }
