"""Exact arithmetic in a real quadratic field Q(sqrt(d)).

Elements are stored as ``a + b*sqrt(d)`` with rational ``a`` and ``b``.
Only the operations needed to evaluate polynomials exactly are provided.
"""

from fractions import Fraction
from math import isqrt
import numbers


def _is_square(d):
    return d >= 0 and isqrt(d) ** 2 == d


class QuadraticNumber:
    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d=5):
        d = int(d)
        if _is_square(d):
            raise ValueError(f"sqrt({d}) is rational; use Fraction instead")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    @classmethod
    def sqrt(cls, d):
        return cls(0, 1, d)

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise ValueError(f"mixing Q(sqrt({self.d})) and Q(sqrt({other.d}))")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticNumber(self.a + other.a, self.b + other.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticNumber(self.a * other.a + self.d * self.b * other.b,
                               self.a * other.b + self.b * other.a, self.d)

    __rmul__ = __mul__

    def conjugate(self):
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self):
        """Field norm a^2 - d b^2 (a rational number)."""
        return self.a * self.a - self.d * self.b * self.b

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        num = self * other.conjugate()
        return QuadraticNumber(num.a / n, num.b / n, self.d)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return QuadraticNumber(1, 0, self.d) / (self ** -k)
        result = QuadraticNumber(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QuadraticNumber):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * self.d ** 0.5

    def __abs__(self):
        return abs(float(self))

    def __repr__(self):
        return f"QuadraticNumber({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt({self.d})"


def is_exact(value):
    """True for ints, Fractions and quadratic-field elements."""
    return isinstance(value, (int, Fraction, QuadraticNumber)) and not isinstance(value, bool)
