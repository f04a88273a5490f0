"""Exact scalar arithmetic: Gaussian rationals and truncated series in the
deformation variable nu.

Everything downstream (polynomials, tensor components, enveloping-algebra
coefficients) is built over these two rings, so no floating point can enter
the engine anywhere.
"""

from __future__ import annotations

from fractions import Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


class Scalar:
    """A Gaussian rational re + i*im with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, *a):
        raise AttributeError("Scalar is immutable")

    @staticmethod
    def coerce(x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(x)
        raise TypeError(f"cannot coerce {x!r} to Scalar")

    def __add__(self, other):
        other = Scalar.coerce(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other):
        return Scalar.coerce(other) + (-self)

    def __mul__(self, other):
        other = Scalar.coerce(other)
        if self.im == 0:
            if other.im == 0:
                return Scalar(self.re * other.re)
            if self.re == 0:
                return ZERO
            return Scalar(self.re * other.re, self.re * other.im)
        if other.im == 0:
            if other.re == 0:
                return ZERO
            return Scalar(self.re * other.re, self.im * other.re)
        return Scalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero Scalar")
        return Scalar(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * Scalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Scalar({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        imag = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re}{sign}{imag})"


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)


class NuSeries:
    """A polynomial-truncated formal series sum_k c_k nu^k.

    cap is the highest retained power (None while no truncation has ever been
    applied).  exact stays True as long as no nonzero coefficient has been
    dropped by a truncation; once lost it propagates to every derived value.
    """

    __slots__ = ("coeffs", "cap", "exact")

    def __init__(self, coeffs, cap=None, exact=True):
        cs = [Scalar.coerce(c) for c in coeffs]
        if cap is not None and len(cs) > cap + 1:
            dropped = cs[cap + 1:]
            cs = cs[:cap + 1]
            if any(not d.is_zero() for d in dropped):
                exact = False
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, *a):
        raise AttributeError("NuSeries is immutable")

    @staticmethod
    def coerce(x) -> "NuSeries":
        if isinstance(x, NuSeries):
            return x
        if isinstance(x, (int, Fraction, Scalar)):
            return NuSeries([Scalar.coerce(x)])
        raise TypeError(f"cannot coerce {x!r} to NuSeries")

    @staticmethod
    def constant(x, cap=None) -> "NuSeries":
        return NuSeries([Scalar.coerce(x)], cap=cap)

    @staticmethod
    def nu(power=1, coeff=1, cap=None) -> "NuSeries":
        return NuSeries([ZERO] * power + [Scalar.coerce(coeff)], cap=cap)

    def coeff(self, k) -> Scalar:
        return self.coeffs[k] if k < len(self.coeffs) else ZERO

    @staticmethod
    def _join_cap(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        other = NuSeries.coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        cs = [self.coeff(k) + other.coeff(k) for k in range(n)]
        return NuSeries(cs, cap=self._join_cap(self.cap, other.cap),
                        exact=self.exact and other.exact)

    __radd__ = __add__

    def __neg__(self):
        return NuSeries([-c for c in self.coeffs], cap=self.cap, exact=self.exact)

    def __sub__(self, other):
        return self + (-NuSeries.coerce(other))

    def __rsub__(self, other):
        return NuSeries.coerce(other) + (-self)

    def __mul__(self, other):
        other = NuSeries.coerce(other)
        cap = self._join_cap(self.cap, other.cap)
        if not self.coeffs or not other.coeffs:
            return NuSeries([], cap=cap, exact=self.exact and other.exact)
        n = len(self.coeffs) + len(other.coeffs) - 1
        cs = [ZERO] * n
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                cs[i + j] = cs[i + j] + a * b
        return NuSeries(cs, cap=cap, exact=self.exact and other.exact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # division by a nu-free unit only; series inversion is unsupported
        other = NuSeries.coerce(other)
        if len(other.coeffs) > 1:
            raise ZeroDivisionError("division by a nu-dependent series")
        if not other.coeffs:
            raise ZeroDivisionError("division by zero series")
        inv = other.coeffs[0].inverse()
        return self * NuSeries([inv], cap=other.cap, exact=other.exact)

    def truncate(self, cap) -> "NuSeries":
        return NuSeries(self.coeffs, cap=self._join_cap(self.cap, cap),
                        exact=self.exact)

    def conjugate(self) -> "NuSeries":
        # nu is real, so conjugation acts on coefficients only
        return NuSeries([c.conjugate() for c in self.coeffs], cap=self.cap,
                        exact=self.exact)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def nu_order(self):
        """Lowest nu power with a nonzero coefficient, or None when zero."""
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                return k
        return None

    def __eq__(self, other):
        try:
            other = NuSeries.coerce(other)
        except TypeError:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"NuSeries({list(self.coeffs)!r}, cap={self.cap})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if k == 0:
                parts.append(str(c))
            else:
                head = "nu" if k == 1 else f"nu^{k}"
                if c == ONE:
                    parts.append(head)
                elif c == -ONE:
                    parts.append(f"-{head}")
                else:
                    parts.append(f"{c}*{head}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out


S_ZERO = NuSeries([])
S_ONE = NuSeries([ONE])
