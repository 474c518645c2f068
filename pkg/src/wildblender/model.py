"""The piecewise affine skew product on the unit cube and its parameters."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from fractions import Fraction
from math import isqrt

from .errors import DomainError, EscapeError, RegionError
from .numerics import as_rat, rat_str

SCHEMA_VERSION = 1

_RATIONAL_FIELDS = (
    "lambda_u", "lambda_ss", "lambda_cs0", "lambda_cs1",
    "a1", "a2", "a3", "a4", "delta",
)


@dataclass(frozen=True)
class ModelParams:
    """All constants of the model.  Everything is an exact rational.

    ``w_tilde0`` is the seed itinerary (a binary string of length ``n0``) whose
    bridge starts the nested bridge sequence, ``L`` the extra descent per step
    of the chain and ``r`` the smoothness order of the bump functions.
    """

    lambda_u: Fraction
    lambda_ss: Fraction
    lambda_cs0: Fraction
    lambda_cs1: Fraction
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    delta: Fraction
    n0: int
    w_tilde0: str
    L: int = 5
    r: int = 1

    def __post_init__(self):
        for name in _RATIONAL_FIELDS:
            object.__setattr__(self, name, as_rat(getattr(self, name)))
        if set(self.w_tilde0) - {"0", "1"}:
            raise DomainError(f"seed code {self.w_tilde0!r} is not binary")

    @property
    def beta(self) -> Fraction:
        return 1 - self.lambda_cs1

    @property
    def sqrt_a1(self) -> Fraction | None:
        return exact_sqrt(self.a1)

    def to_json(self) -> dict:
        out = {name: rat_str(getattr(self, name)) for name in _RATIONAL_FIELDS}
        out.update(n0=self.n0, w_tilde0=self.w_tilde0, L=self.L, r=self.r)
        return {"schema": SCHEMA_VERSION, "params": out}

    @classmethod
    def from_json(cls, data: dict) -> "ModelParams":
        if "params" in data:
            if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
                raise DomainError(f"unsupported parameter schema {data.get('schema')}")
            data = data["params"]
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown parameter fields: {sorted(unknown)}")
        kwargs = dict(data)
        for name in _RATIONAL_FIELDS:
            if name in kwargs:
                kwargs[name] = as_rat(kwargs[name])
        return cls(**kwargs)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def reference_params() -> ModelParams:
    F = Fraction
    return ModelParams(
        lambda_u=F(3), lambda_ss=F(1, 20), lambda_cs0=F(11, 100), lambda_cs1=F(9, 10),
        a1=F(4), a2=F(1), a3=F(1, 2), a4=F(1), delta=F(1, 10),
        n0=2, w_tilde0="01", L=5, r=1,
    )


def exact_sqrt(q) -> Fraction | None:
    """Square root of a non-negative rational when it is rational, else None."""
    q = as_rat(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class Constraint:
    name: str
    relation: str
    lhs: Fraction | int | str
    rhs: Fraction | int | str
    passed: bool

    def to_json(self) -> dict:
        def enc(v):
            return rat_str(v) if isinstance(v, (Fraction, int)) and not isinstance(v, bool) else v
        return {"name": self.name, "relation": self.relation,
                "lhs": enc(self.lhs), "rhs": enc(self.rhs), "passed": self.passed}


@dataclass(frozen=True)
class ValidationReport:
    constraints: tuple[Constraint, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.constraints)

    def failures(self) -> list[Constraint]:
        return [c for c in self.constraints if not c.passed]

    def __getitem__(self, name) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)


_RELATIONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    "!=": lambda a, b: a != b,
    "==": lambda a, b: a == b,
}


def validate_params(p: ModelParams) -> ValidationReport:
    """Check every standing hypothesis on the constants, exactly.

    Never raises on bad values; a failing constraint is reported instead.
    """
    checks = []

    def add(name, lhs, rel, rhs):
        checks.append(Constraint(name, rel, lhs, rhs, _RELATIONS[rel](lhs, rhs)))

    half = Fraction(1, 2)
    add("lambda_ss > 0", p.lambda_ss, ">", 0)
    add("lambda_ss < lambda_cs0", p.lambda_ss, "<", p.lambda_cs0)
    add("lambda_cs0 < 1/2", p.lambda_cs0, "<", half)
    add("1/2 < lambda_cs1", half, "<", p.lambda_cs1)
    add("lambda_cs1 < 1", p.lambda_cs1, "<", 1)
    add("lambda_cs0 + lambda_cs1 > 1", p.lambda_cs0 + p.lambda_cs1, ">", 1)
    add("lambda_u > 2", p.lambda_u, ">", 2)
    add("partial dissipativity", p.lambda_cs0 * p.lambda_cs1 * p.lambda_u ** 2, "<", 1)
    add("beta < lambda_cs0", p.beta, "<", p.lambda_cs0)
    if p.lambda_u > 2:
        add("a1 > 1/(1 - 2/lambda_u)", p.a1, ">", 1 / (1 - 2 / p.lambda_u))
    else:
        checks.append(Constraint("a1 > 1/(1 - 2/lambda_u)", ">", p.a1, "undefined", False))
    add("a2 > 0", p.a2, ">", 0)
    add("a3 != 0", p.a3, "!=", 0)
    add("|a3| < 1 - 2 lambda_ss", abs(p.a3), "<", 1 - 2 * p.lambda_ss)
    add("a4 > 0", p.a4, ">", 0)
    add("delta > 0", p.delta, ">", 0)
    add("delta < (1 - 2/lambda_u)/3", p.delta, "<", (1 - 2 / p.lambda_u) / 3)
    checks.append(Constraint("a1 is a rational square", "square", p.a1,
                             "-", p.sqrt_a1 is not None))
    add("len(w_tilde0) == n0", len(p.w_tilde0), "==", p.n0)
    add("n0 >= 1", p.n0, ">", 0)
    add("L >= 1", p.L, ">", 0)
    add("r >= 1", p.r, ">", 0)
    if p.lambda_u > 2 and len(p.w_tilde0) == p.n0:
        from .bridges import bridge_interval  # local import: bridges depends on this module

        seed = bridge_interval(p, p.w_tilde0)
        add("seed bridge left of a2: min > 0", seed.lo, ">", 0)
        add("seed bridge inside (0, a2): max < a2", seed.hi, "<", p.a2)
    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------- regions and maps

class Region(Enum):
    V0 = "V0"
    V1 = "V1"
    TANGENCY_STRIP = "TangencyStrip"
    GAP_OTHER = "GapOther"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class Point3:
    x: Fraction
    y: Fraction
    z: Fraction

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not isinstance(v, Fraction):
                object.__setattr__(self, name, as_rat(v))

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def to_json(self) -> list:
        return [rat_str(c) for c in self]


def _in_unit(v) -> bool:
    return 0 <= v <= 1


def classify(p: ModelParams, pt) -> Region:
    x, y, z = pt
    if not (_in_unit(x) and _in_unit(y) and _in_unit(z)):
        return Region.OUTSIDE
    if x <= 1 / p.lambda_u:
        return Region.V0
    if x >= 1 - 1 / p.lambda_u:
        return Region.V1
    if abs(x - Fraction(1, 2)) <= p.delta:
        return Region.TANGENCY_STRIP
    return Region.GAP_OTHER


def branch_maps(p: ModelParams) -> dict:
    """Coefficients (slope, offset) of the one-dimensional factor maps per symbol."""
    return {
        "x": ((p.lambda_u, 0), (-p.lambda_u, p.lambda_u)),
        "y": ((p.lambda_ss, 0), (-p.lambda_ss, 1)),
        "z": ((p.lambda_cs0, 0), (p.lambda_cs1, p.beta)),
    }


def apply_f(p: ModelParams, pt) -> Point3:
    x, y, z = pt
    region = classify(p, pt)
    if region is Region.V0:
        return Point3(p.lambda_u * x, p.lambda_ss * y, p.lambda_cs0 * z)
    if region is Region.V1:
        return Point3(p.lambda_u * (1 - x), 1 - p.lambda_ss * y, p.lambda_cs1 * z + p.beta)
    raise RegionError(f"f is modelled only on V0 and V1; point is in {region.value}")


def tangency_map(p: ModelParams, x, y, z):
    """The quadratic second iterate formula, without any region check."""
    half = Fraction(1, 2)
    return (-p.a1 * (x - half) ** 2 + p.a2 * z,
            p.a3 * (y - half) + half,
            p.a4 * (x - half) + half)


def apply_f2_strip(p: ModelParams, pt) -> Point3:
    if classify(p, pt) is not Region.TANGENCY_STRIP:
        raise RegionError("the second-iterate formula needs |x - 1/2| <= delta")
    return Point3(*tangency_map(p, *pt))


def fixed_point_P(p: ModelParams) -> Point3:
    return Point3(0, 0, 0)


def fixed_point_Q(p: ModelParams) -> Point3:
    return Point3(p.lambda_u / (1 + p.lambda_u), 1 / (1 + p.lambda_ss), 1)


def project_phi_n(p: ModelParams, x, z, n: int):
    """(x, z) after n steps of f, ignoring y (the dynamics on (x, z) does not see y).

    A point in the tangency strip consumes two steps at once; landing in the
    strip with a single step left, or leaving the cube, raises EscapeError.
    """
    x, z = as_rat(x), as_rat(z)
    steps = 0
    while steps < n:
        region = classify(p, (x, Fraction(1, 2), z))
        if region is Region.V0:
            x, z = p.lambda_u * x, p.lambda_cs0 * z
            steps += 1
        elif region is Region.V1:
            x, z = p.lambda_u * (1 - x), p.lambda_cs1 * z + p.beta
            steps += 1
        elif region is Region.TANGENCY_STRIP and n - steps >= 2:
            x, _, z = tangency_map(p, x, Fraction(1, 2), z)
            steps += 2
        else:
            raise EscapeError(f"(x, z) orbit undefined in region {region.value}", steps)
    return x, z
