"""Classical Cartan calculus on a chart: vector fields, differential forms,
mixed tensors, Lie derivative, exterior derivative, wedge, insertion and the
pairing between vector fields and forms.

Tensors are always stored in the coordinate frame; moving frames are plain
sequences of VectorField values handled by the geometry layer.  Mixed tensors
keep all form slots before all vector slots, so no slot reordering is ever
needed.
"""

from __future__ import annotations

from itertools import permutations

from .poly import Chart, ChartMismatch, Polynomial, RatFunc, as_coeff
from .scalars import NuSeries


def _zero(chart):
    return Polynomial.zero(chart)


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


class VectorField:
    """X = X^i d_i with one component per chart coordinate."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps):
        comps = tuple(as_coeff(chart, c) for c in comps)
        if len(comps) != chart.n:
            raise ValueError("component count must match coordinate dimension")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "comps", comps)

    def __setattr__(self, *a):
        raise AttributeError("VectorField is immutable")

    @staticmethod
    def coordinate(chart, i) -> "VectorField":
        comps = [Polynomial.zero(chart) for _ in range(chart.n)]
        comps[i] = Polynomial.constant(chart, 1)
        return VectorField(chart, comps)

    def __add__(self, other):
        self._check(other)
        return VectorField(self.chart,
                           [a + b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.comps])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "VectorField":
        c = as_coeff(self.chart, c)
        return VectorField(self.chart, [c * a for a in self.comps])

    def _check(self, other):
        if not isinstance(other, VectorField) or other.chart != self.chart:
            raise ChartMismatch("vector fields on different charts")

    def apply(self, h):
        """X(h) for a function h."""
        h = as_coeff(self.chart, h)
        out = _zero(self.chart)
        for i, c in enumerate(self.comps):
            if c.is_zero():
                continue
            dh = h.diff(i)
            if dh.is_zero():
                continue
            out = out + c * dh
        return out

    def bracket(self, other) -> "VectorField":
        self._check(other)
        comps = []
        for j in range(self.chart.n):
            comps.append(self.apply(other.comps[j]) - other.apply(self.comps[j]))
        return VectorField(self.chart, comps)

    def is_zero(self):
        return all(c.is_zero() for c in self.comps)

    def conjugate(self):
        return VectorField(self.chart, [c.conjugate() for c in self.comps])

    def truncate(self, cap):
        return VectorField(self.chart, [c.truncate(cap) for c in self.comps])

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and all(
            a == b for a, b in zip(self.comps, other.comps))

    def __hash__(self):
        return hash((self.chart, self.comps))

    def __str__(self):
        parts = []
        for i, c in enumerate(self.comps):
            if isinstance(c, RatFunc) and c.is_zero():
                continue
            if isinstance(c, Polynomial) and c.is_zero():
                continue
            parts.append(f"({c})*d{i + 1}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


class PForm:
    """Antisymmetric p-form stored on strictly increasing index tuples."""

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart: Chart, degree: int, comps=None):
        if degree < 0 or degree > chart.n:
            raise ValueError("form degree out of range")
        clean = {}
        if comps:
            for idx, c in comps.items():
                idx = tuple(idx)
                c = as_coeff(chart, c)
                if c.is_zero():
                    continue
                if len(idx) != degree:
                    raise ValueError("index tuple length must equal degree")
                if len(set(idx)) != degree:
                    continue
                order = tuple(sorted(idx))
                sign = _perm_sign(idx)
                prev = clean.get(order)
                c = c if sign > 0 else -c
                c = c if prev is None else prev + c
                if c.is_zero():
                    clean.pop(order, None)
                else:
                    clean[order] = c
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", clean)

    def __setattr__(self, *a):
        raise AttributeError("PForm is immutable")

    @staticmethod
    def zero(chart, degree=1):
        return PForm(chart, degree, {})

    @staticmethod
    def dx(chart, i) -> "PForm":
        return PForm(chart, 1, {(i,): Polynomial.constant(chart, 1)})

    @staticmethod
    def from_function(chart, h) -> "PForm":
        return PForm(chart, 0, {(): as_coeff(chart, h)})

    def component(self, idx):
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return _zero(self.chart)
        order = tuple(sorted(idx))
        c = self.comps.get(order)
        if c is None:
            return _zero(self.chart)
        return c if _perm_sign(idx) > 0 else -c

    def __add__(self, other):
        if not isinstance(other, PForm) or other.chart != self.chart \
                or other.degree != self.degree:
            raise ChartMismatch("incompatible forms")
        out = dict(self.comps)
        for idx, c in other.comps.items():
            s = out.get(idx)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
        return PForm(self.chart, self.degree, out)

    def __neg__(self):
        return PForm(self.chart, self.degree,
                     {i: -c for i, c in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PForm":
        c = as_coeff(self.chart, c)
        return PForm(self.chart, self.degree,
                     {i: c * v for i, v in self.comps.items()})

    def wedge(self, other) -> "PForm":
        if not isinstance(other, PForm) or other.chart != self.chart:
            raise ChartMismatch("incompatible forms")
        deg = self.degree + other.degree
        if deg > self.chart.n:
            raise ValueError("degree overflow in wedge")
        out = {}
        for i1, c1 in self.comps.items():
            for i2, c2 in other.comps.items():
                idx = i1 + i2
                if len(set(idx)) != len(idx):
                    continue
                c = c1 * c2
                order = tuple(sorted(idx))
                if _perm_sign(idx) < 0:
                    c = -c
                s = out.get(order)
                s = c if s is None else s + c
                if s.is_zero():
                    out.pop(order, None)
                else:
                    out[order] = s
        return PForm(self.chart, deg, out)

    def d(self) -> "PForm":
        if self.degree == self.chart.n:
            return PForm(self.chart, self.degree, {})  # top forms close
        out = {}
        for idx, c in self.comps.items():
            for i in range(self.chart.n):
                if i in idx:
                    continue
                dc = c.diff(i)
                if (isinstance(dc, Polynomial) and dc.is_zero()) or \
                        (isinstance(dc, RatFunc) and dc.is_zero()):
                    continue
                full = (i,) + idx
                order = tuple(sorted(full))
                v = dc if _perm_sign(full) > 0 else -dc
                s = out.get(order)
                s = v if s is None else s + v
                if s.is_zero():
                    out.pop(order, None)
                else:
                    out[order] = s
        return PForm(self.chart, self.degree + 1, out)

    def insert(self, X: VectorField) -> "PForm":
        """Interior product i_X, lowering the degree by one."""
        if self.degree == 0:
            raise ValueError("cannot insert into a 0-form")
        out = {}
        for idx, c in self.comps.items():
            for pos, i in enumerate(idx):
                rest = idx[:pos] + idx[pos + 1:]
                v = c * X.comps[i]
                if pos % 2 == 1:
                    v = -v
                s = out.get(rest)
                s = v if s is None else s + v
                if s.is_zero():
                    out.pop(rest, None)
                else:
                    out[rest] = s
        return PForm(self.chart, self.degree - 1, out)

    def is_zero(self):
        return not self.comps

    def conjugate(self):
        return PForm(self.chart, self.degree,
                     {i: c.conjugate() for i, c in self.comps.items()})

    def truncate(self, cap):
        return PForm(self.chart, self.degree,
                     {i: c.truncate(cap) for i, c in self.comps.items()})

    def __eq__(self, other):
        if not isinstance(other, PForm):
            return NotImplemented
        return (self.chart == other.chart and self.degree == other.degree
                and self.comps.keys() == other.comps.keys()
                and all(self.comps[k] == other.comps[k] for k in self.comps))

    def __hash__(self):
        return hash((self.chart, self.degree, frozenset(self.comps)))

    def __str__(self):
        if self.degree == 0:
            return str(self.comps.get((), _zero(self.chart)))
        parts = []
        for idx, c in sorted(self.comps.items()):
            basis = "^".join(f"dx{i + 1}" for i in idx)
            parts.append(f"({c})*{basis}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


class TensorField:
    """Type (p, r) tensor with all form slots before all vector slots.

    Components are indexed by (i_1,...,i_p, j_1,...,j_r); the (0,0) case
    degenerates to a plain function.
    """

    __slots__ = ("chart", "p", "r", "comps")

    def __init__(self, chart: Chart, p: int, r: int, comps=None):
        clean = {}
        if comps:
            for idx, c in comps.items():
                idx = tuple(idx)
                if len(idx) != p + r:
                    raise ValueError("tensor index length must be p+r")
                c = as_coeff(chart, c)
                if not c.is_zero():
                    clean[idx] = c
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "comps", clean)

    def __setattr__(self, *a):
        raise AttributeError("TensorField is immutable")

    def _check(self, other):
        if (not isinstance(other, TensorField) or other.chart != self.chart
                or (other.p, other.r) != (self.p, self.r)):
            raise ChartMismatch("incompatible tensors")

    def __add__(self, other):
        self._check(other)
        out = dict(self.comps)
        for idx, c in other.comps.items():
            s = out.get(idx)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
        return TensorField(self.chart, self.p, self.r, out)

    def __neg__(self):
        return TensorField(self.chart, self.p, self.r,
                           {i: -c for i, c in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TensorField":
        c = as_coeff(self.chart, c)
        return TensorField(self.chart, self.p, self.r,
                           {i: c * v for i, v in self.comps.items()})

    def is_zero(self):
        return not self.comps

    def conjugate(self):
        return TensorField(self.chart, self.p, self.r,
                           {i: c.conjugate() for i, c in self.comps.items()})

    def truncate(self, cap):
        return TensorField(self.chart, self.p, self.r,
                           {i: c.truncate(cap) for i, c in self.comps.items()})

    def __eq__(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        return (self.chart == other.chart and (self.p, self.r) == (other.p, other.r)
                and self.comps.keys() == other.comps.keys()
                and all(self.comps[k] == other.comps[k] for k in self.comps))

    def __hash__(self):
        return hash((self.chart, self.p, self.r, frozenset(self.comps)))

    def __str__(self):
        parts = []
        for idx, c in sorted(self.comps.items()):
            fs = idx[:self.p]
            vs = idx[self.p:]
            bits = [f"dx{i + 1}" for i in fs] + [f"d{j + 1}" for j in vs]
            parts.append(f"({c})*" + "⊗".join(bits) if bits else f"({c})")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


# -- conversions -----------------------------------------------------------

def vf_to_tensor(X: VectorField) -> TensorField:
    return TensorField(X.chart, 0, 1,
                       {(i,): c for i, c in enumerate(X.comps)})


def form_to_tensor(w: PForm) -> TensorField:
    """Expand an antisymmetric form into a full (p,0) tensor."""
    out = {}
    for idx, c in w.comps.items():
        for perm in permutations(idx):
            out[perm] = c if _perm_sign(perm) > 0 else -c
    return TensorField(w.chart, w.degree, 0, out)


def tensor_to_vf(T: TensorField) -> VectorField:
    if (T.p, T.r) != (0, 1):
        raise ValueError("tensor is not a vector field")
    comps = [T.comps.get((i,), _zero(T.chart)) for i in range(T.chart.n)]
    return VectorField(T.chart, comps)


def tensor_product(a, b) -> TensorField:
    """Tensor product keeping the forms-left/vectors-right convention.

    Allowed when the result needs no slot reordering: the left factor must
    be free of vector slots or the right factor free of form slots.
    """
    ta = a if isinstance(a, TensorField) else _promote(a)
    tb = b if isinstance(b, TensorField) else _promote(b)
    if ta.chart != tb.chart:
        raise ChartMismatch("tensor factors on different charts")
    if ta.r > 0 and tb.p > 0:
        raise ValueError("tensor product would interleave form and vector slots")
    if ta.r == 0:
        p, r = ta.p + tb.p, tb.r
        def key(i1, i2):
            return i1[:ta.p] + i2[:tb.p] + i2[tb.p:]
    else:
        p, r = ta.p, ta.r + tb.r
        def key(i1, i2):
            return i1 + i2
    out = {}
    for i1, c1 in ta.comps.items():
        for i2, c2 in tb.comps.items():
            idx = key(i1, i2)
            c = c1 * c2
            s = out.get(idx)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
    return TensorField(ta.chart, p, r, out)


def _promote(x):
    if isinstance(x, VectorField):
        return vf_to_tensor(x)
    if isinstance(x, PForm):
        return form_to_tensor(x)
    if isinstance(x, TensorField):
        return x
    raise TypeError(f"cannot promote {x!r} to a tensor")


# -- Lie derivative ---------------------------------------------------------

def lie_derivative(X: VectorField, target):
    """L_X on functions, vector fields, forms and mixed tensors."""
    chart = X.chart
    if isinstance(target, (Polynomial, RatFunc, int, NuSeries)):
        return X.apply(target)
    if isinstance(target, VectorField):
        return X.bracket(target)
    if isinstance(target, PForm):
        if target.degree == 0:
            return PForm.from_function(chart, X.apply(target.comps.get((), _zero(chart))))
        # Cartan formula: L_X = i_X d + d i_X
        return target.d().insert(X) + target.insert(X).d()
    if isinstance(target, TensorField):
        if target.chart != chart:
            raise ChartMismatch("Lie derivative across charts")
        out = {}

        def add(idx, c):
            if c.is_zero():
                return
            s = out.get(idx)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s

        p, r = target.p, target.r
        for idx, c in target.comps.items():
            add(idx, X.apply(c))
            # form slot sig contributes +T[..sig..] d_mu X^sig at index mu,
            # vector slot sig contributes -T[..sig..] d_sig X^t at index t
            for slot in range(p):
                sig = idx[slot]
                for mu in range(chart.n):
                    coeff = X.comps[sig].diff(mu)
                    if coeff.is_zero():
                        continue
                    jdx = idx[:slot] + (mu,) + idx[slot + 1:]
                    add(jdx, c * coeff)
            for slot in range(p, p + r):
                sig = idx[slot]
                for t in range(chart.n):
                    coeff = X.comps[t].diff(sig)
                    if coeff.is_zero():
                        continue
                    jdx = idx[:slot] + (t,) + idx[slot + 1:]
                    add(jdx, -(c * coeff))
        return TensorField(chart, p, r, out)
    raise TypeError(f"cannot take Lie derivative of {target!r}")


# -- pairing ----------------------------------------------------------------

def pairing(lhs, rhs):
    """Contraction of vector slots against form slots.

    For a single field and 1-form: <X, w> = X^i w_i.  For a pure tensor
    power of vector fields of length p against a tensor beginning with p
    form slots, the last vector factor pairs the first form slot:
    <X_p ⊗ ... ⊗ X_1, w_1 ⊗ ... ⊗ w_p ⊗ tau> = <X_1,w_1>...<X_p,w_p> tau.
    """
    if isinstance(lhs, VectorField) and isinstance(rhs, PForm) and rhs.degree == 1:
        out = _zero(lhs.chart)
        for (i,), c in rhs.comps.items():
            out = out + lhs.comps[i] * c
        return out
    tl = _promote(lhs)
    tr = _promote(rhs)
    if tl.chart != tr.chart:
        raise ChartMismatch("pairing across charts")
    if tl.p != 0:
        raise ValueError("left pairing argument must be a pure vector tensor")
    p = tl.r
    if tr.p < p:
        raise ValueError("arity mismatch in pairing")
    chart = tl.chart
    out = {}
    for il, cl in tl.comps.items():
        # slot q of the left factor (X_p first) pairs form slot p-1-q
        for ir, cr in tr.comps.items():
            ok = True
            for q in range(p):
                if il[q] != ir[p - 1 - q]:
                    ok = False
                    break
            if not ok:
                continue
            rest = ir[p:]
            c = cl * cr
            s = out.get(rest)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(rest, None)
            else:
                out[rest] = s
    result = TensorField(chart, tr.p - p, tr.r, out)
    if (result.p, result.r) == (0, 0):
        return result.comps.get((), _zero(chart))
    return result
