"""Exact rationals, closed intervals and boxes, and a big-float context.

Rationals are :class:`fractions.Fraction`; nothing in the package converts
them to machine floats.  Big floats are mpmath numbers living in a private
:class:`mpmath.MPContext`, so different precisions never share global state.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import mpmath

from .errors import DomainError

Rat = Fraction


def as_rat(value) -> Fraction:
    """Convert ints, Fractions and strings such as ``"11/100"`` to a Fraction.

    Floats are refused: a float has already lost the value we want.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise DomainError(f"not a rational literal: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def rat_str(q) -> str:
    q = as_rat(q)
    return f"{q.numerator}/{q.denominator}"


def pow_rat(base, exp: int) -> Fraction:
    base = as_rat(base)
    if base == 0 and exp < 0:
        raise DomainError("zero raised to a negative power")
    return base ** exp


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi]; ``open=True`` marks an open interval (lo, hi).

    The open flag only matters to :meth:`holds`; every other query treats the
    endpoints as included.
    """

    lo: Fraction
    hi: Fraction
    open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rat(self.lo))
        object.__setattr__(self, "hi", as_rat(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        x = as_rat(x)
        if self.open:
            return self.lo < x < self.hi
        return self.lo <= x <= self.hi

    def contains(self, inner: "RatInterval") -> bool:
        return self.lo <= inner.lo and inner.hi <= self.hi

    def interior_contains(self, inner: "RatInterval") -> bool:
        return self.lo < inner.lo and inner.hi < self.hi

    def holds(self, inner: "RatInterval") -> bool:
        """Containment of ``inner`` in this interval taken as a set (open or closed)."""
        return self.interior_contains(inner) if self.open else self.contains(inner)

    def proper_superset_of(self, inner: "RatInterval") -> bool:
        return self.contains(inner) and (self.lo, self.hi) != (inner.lo, inner.hi)

    def disjoint_from(self, other: "RatInterval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def affine_image(self, slope, offset) -> "RatInterval":
        a = slope * self.lo + offset
        b = slope * self.hi + offset
        return RatInterval(min(a, b), max(a, b), self.open)

    def scale(self, factor) -> "RatInterval":
        return self.affine_image(as_rat(factor), 0)

    def inflate(self, amount) -> "RatInterval":
        return RatInterval(self.lo - amount, self.hi + amount, self.open)

    def to_json(self) -> dict:
        return {"lo": rat_str(self.lo), "hi": rat_str(self.hi), "open": self.open}

    @classmethod
    def from_json(cls, data: dict) -> "RatInterval":
        return cls(as_rat(data["lo"]), as_rat(data["hi"]), bool(data.get("open", False)))

    def __str__(self):
        left, right = ("(", ")") if self.open else ("[", "]")
        return f"{left}{self.lo}, {self.hi}{right}"


def interval_contains(outer: RatInterval, inner: RatInterval) -> bool:
    """Closed containment inner ⊂ outer (the open flag is ignored)."""
    return outer.lo <= inner.lo and inner.hi <= outer.hi


@dataclass(frozen=True)
class Box3:
    x: RatInterval
    y: RatInterval
    z: RatInterval

    def axes(self):
        return (self.x, self.y, self.z)

    def contains_point(self, pt) -> bool:
        return all(iv.lo <= c <= iv.hi for iv, c in zip(self.axes(), pt))

    def contains(self, inner: "Box3") -> bool:
        return all(a.contains(b) for a, b in zip(self.axes(), inner.axes()))

    def interior_contains(self, inner: "Box3") -> bool:
        return all(a.interior_contains(b) for a, b in zip(self.axes(), inner.axes()))

    def disjoint_from(self, other: "Box3") -> bool:
        return any(a.disjoint_from(b) for a, b in zip(self.axes(), other.axes()))

    def diam_sq(self) -> Fraction:
        """Squared Euclidean diameter, exact."""
        return sum((iv.width ** 2 for iv in self.axes()), Fraction(0))

    def sample_grid(self, n: int = 3):
        """n points per axis, evenly spaced and including both endpoints."""
        if n < 2:
            raise DomainError("a grid needs at least two points per axis")

        def ticks(iv):
            return [iv.lo + iv.width * i / (n - 1) for i in range(n)]

        return [(x, y, z) for x in ticks(self.x) for y in ticks(self.y) for z in ticks(self.z)]

    def to_json(self) -> dict:
        return {"x": self.x.to_json(), "y": self.y.to_json(), "z": self.z.to_json()}


# Affine maps t -> a*t + b composed along a binary word.  Composing thousands
# of maps with Fraction arithmetic normalises (gcd) at every step; instead we
# keep a numerator over a power of a common denominator and divide once.

def affine_along(word: str, maps) -> tuple[Fraction, Fraction]:
    """Slope and offset of m_{w_n} o ... o m_{w_1} (first symbol applied first).

    ``maps`` is a pair ((a0, b0), (a1, b1)) of rational coefficients.
    """
    (a0, b0), (a1, b1) = [(as_rat(a), as_rat(b)) for a, b in maps]
    m = lcm(a0.denominator, b0.denominator, a1.denominator, b1.denominator)
    coeffs = {
        "0": (a0.numerator * (m // a0.denominator), b0.numerator * (m // b0.denominator)),
        "1": (a1.numerator * (m // a1.denominator), b1.numerator * (m // b1.denominator)),
    }
    num, den = 0, 1
    for s in word:
        a, b = coeffs[s]
        num = a * num + b * den
        den *= m
    ones = word.count("1")
    slope = a0 ** (len(word) - ones) * a1 ** ones
    return slope, Fraction(num, den)


class BigFloat:
    """Arbitrary precision context wrapping its own mpmath context."""

    def __init__(self, prec: int = 256):
        if prec < 53:
            raise DomainError("precision below 53 bits defeats the purpose")
        self.prec = prec
        self.ctx = mpmath.MPContext()
        self.ctx.prec = prec

    @property
    def tag(self) -> str:
        return f"bigfloat:{self.prec}"

    def __call__(self, value):
        """Correctly rounded conversion of an exact rational (or int, or mpf)."""
        if isinstance(value, (Fraction, int)):
            q = as_rat(value)
            return self.ctx.fdiv(q.numerator, q.denominator)
        if isinstance(value, str):
            return self(as_rat(value))
        return self.ctx.mpf(value)

    def digits(self) -> int:
        return int(self.prec * 0.30103) + 2

    def to_str(self, x) -> str:
        return self.ctx.nstr(self.ctx.mpf(x), self.digits(), strip_zeros=False)

    def to_json(self, x) -> dict:
        return {"value": self.to_str(x), "precision_bits": self.prec}

    def close(self, a, b, rel_bits=None) -> bool:
        """|a - b| <= 2^-(prec - slack) * max(1, |a|, |b|)."""
        slack = rel_bits if rel_bits is not None else 10
        ctx = self.ctx
        scale = max(ctx.mpf(1), abs(ctx.mpf(a)), abs(ctx.mpf(b)))
        return abs(ctx.mpf(a) - ctx.mpf(b)) <= ctx.ldexp(scale, -(self.prec - slack))
