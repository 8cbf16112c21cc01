"""
Exact Gaussian-rational scalars: re + i*im with arbitrary-precision rational parts.
Arithmetic is closed and exact; nothing is ever rounded.
"""
from fractions import Fraction
from numbers import Rational
from typing import Union

from src.models.errors import ConfigError

RationalLike = Union[int, Fraction, str]


def to_rational(value) -> Fraction:
    """
    Convert a parameter to an exact rational

    Accepts int, Fraction, strings such as "1/2" or "0.5", and finite floats
    (read through their decimal repr, so 0.5 -> 1/2). Anything else is
    not a rational and raises ConfigError.
    """
    if isinstance(value, bool):
        raise ConfigError(f"Not a rational parameter: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ConfigError(f"Not a finite rational parameter: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"Exact mode requires rational parameters, got {value!r}")
    raise ConfigError(f"Exact mode requires rational parameters, got {value!r}")


class GaussianRational:
    """Complex number with exact rational real and imaginary parts"""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(to_rational(value.real), to_rational(value.imag))
        return cls(to_rational(value), 0)

    @classmethod
    def parse(cls, pair) -> "GaussianRational":
        """Read an interchange pair ["p/q", "r/s"]"""
        re, im = pair
        return cls(to_rational(re), to_rational(im))

    # ========== Arithmetic ==========

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by exact zero")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    # ========== Comparison / conversion ==========

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except (ConfigError, TypeError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_complex(self) -> complex:
        return complex(self)

    def to_pair(self) -> list:
        """Interchange representation ["p/q", "r/s"]"""
        return [str(self.re), str(self.im)]

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I_UNIT = GaussianRational(0, 1)
