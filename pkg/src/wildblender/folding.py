"""Strong-stable disc families meeting the images of the local unstable manifolds.

The tangency map sends a segment {z = const} through the strip onto a
parabola in the (x, z) plane.  For the segment on W^u_loc(P) (z = 0) the
parabola has its vertex at x = 0, for W^u_loc(Q) (z = 1) at x = a2.  A
vertical y-disc at x = x0 in (0, a2) and height z = t meets the second
parabola in two points, symmetric about z = 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .model import ModelParams, Point3, exact_sqrt, tangency_map
from .numerics import RatInterval, as_rat, rat_str

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Surd:
    """center + sign * sqrt(radicand), with radicand >= 0 rational."""

    center: Fraction
    radicand: Fraction
    sign: int = 1

    def __post_init__(self):
        if self.radicand < 0:
            raise DomainError("negative radicand")
        if self.sign not in (-1, 1):
            raise DomainError("sign must be +-1")

    @property
    def exact(self) -> Fraction | None:
        root = exact_sqrt(self.radicand)
        return None if root is None else self.center + self.sign * root

    def cmp(self, q) -> int:
        """Sign of (self - q), decided on squares."""
        d = as_rat(q) - self.center  # compare sign*sqrt(r) with d
        if self.sign > 0:
            if d < 0:
                return 1
            return (self.radicand > d * d) - (self.radicand < d * d)
        if d > 0:
            return -1
        return (d * d > self.radicand) - (d * d < self.radicand)

    def __float__(self) -> float:
        return float(self.center) + self.sign * math.sqrt(self.radicand)

    def to_json(self) -> dict:
        ex = self.exact
        return {"center": rat_str(self.center), "radicand": rat_str(self.radicand),
                "sign": self.sign, "exact": None if ex is None else rat_str(ex),
                "approx": float(self), "mode": "exact"}


@dataclass(frozen=True)
class ImageCurve:
    """x = curvature (z - 1/2)^2 + x_vertex at height y, for z in z_range."""

    name: str
    curvature: Fraction
    x_vertex: Fraction
    y: Fraction
    z_range: RatInterval

    def x_at(self, z) -> Fraction:
        return self.curvature * (as_rat(z) - HALF) ** 2 + self.x_vertex

    @property
    def vertex(self) -> Point3:
        return Point3(self.x_vertex, self.y, HALF)

    def to_json(self) -> dict:
        return {"name": self.name, "curvature": rat_str(self.curvature),
                "x_vertex": rat_str(self.x_vertex), "y": rat_str(self.y),
                "z_range": self.z_range.to_json()}


def image_curves(p: ModelParams) -> tuple[ImageCurve, ImageCurve]:
    curv = -p.a1 / (p.a4 * p.a4)
    span = p.delta * abs(p.a4)
    zr = RatInterval(HALF - span, HALF + span)
    return (ImageCurve("l0", curv, Fraction(0), HALF - p.a3 / 2, zr),
            ImageCurve("l1", curv, p.a2, HALF + p.a3 / 2, zr))


@dataclass(frozen=True)
class Intersection:
    z: Surd
    curve: str
    transverse: bool
    within_arc: bool

    def to_json(self) -> dict:
        return {"z": self.z.to_json(), "curve": self.curve,
                "transverse": self.transverse, "within_arc": self.within_arc}


def _check_x0(p: ModelParams, x0) -> Fraction:
    x0 = as_rat(x0)
    if not 0 < x0 <= p.a2:
        raise DomainError(f"x0={x0} is not in (0, a2]")
    return x0


def _in_arc(s: Surd, arc: RatInterval) -> bool:
    return s.cmp(arc.lo) >= 0 and s.cmp(arc.hi) <= 0


def disc_curve_intersections(p: ModelParams, x0) -> list[Intersection]:
    """Heights z where the disc at x = x0 meets an image parabola (either one).

    Intersections are with the whole parabola; ``within_arc`` says whether
    the point is on the part actually swept by the strip.
    """
    x0 = _check_x0(p, x0)
    out = []
    for curve in image_curves(p):
        # x0 = curv (z - 1/2)^2 + x_vertex
        rad = (x0 - curve.x_vertex) / curve.curvature
        if rad < 0:
            continue
        if rad == 0:
            s = Surd(HALF, Fraction(0))
            out.append(Intersection(s, curve.name, False, _in_arc(s, curve.z_range)))
            continue
        for sign in (-1, 1):
            s = Surd(HALF, rad, sign)
            out.append(Intersection(s, curve.name, True, _in_arc(s, curve.z_range)))
    return out


def printed_radicand(p: ModelParams, x0) -> Fraction:
    """a4 (a2 - x0) / a1, the alternative form of the root; equal to ours iff a4 in {0, 1}."""
    return p.a4 * (p.a2 - as_rat(x0)) / p.a1


@dataclass
class FoldingReport:
    x0: Fraction
    intersections: list
    checks: dict
    notes: list

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"x0": rat_str(self.x0), "passed": self.passed, "checks": self.checks,
                "intersections": [i.to_json() for i in self.intersections], "notes": self.notes}


def _sample_heights(lo: Surd, hi: Surd, n: int = 9) -> list[Fraction]:
    """Rationals strictly between two surds (lo < hi, both centred at 1/2)."""
    a, b = Fraction(float(lo)), Fraction(float(hi))
    ts = [a + (b - a) * Fraction(i, n + 1) for i in range(1, n + 1)]
    return [t for t in ts if lo.cmp(t) < 0 and hi.cmp(t) > 0]


def verify_folding(p: ModelParams, x0) -> FoldingReport:
    x0 = _check_x0(p, x0)
    l0, l1 = image_curves(p)
    hits = disc_curve_intersections(p, x0)
    notes = []
    checks = {}
    transverse = [h for h in hits if h.transverse]
    checks["two_transverse"] = len(hits) == 2 and len(transverse) == 2
    if not checks["two_transverse"]:
        notes.append("not a folding family")
        return FoldingReport(x0, hits, checks, notes)
    lo, hi = sorted((h.z for h in hits), key=float)
    checks["symmetric"] = lo.center == hi.center == HALF and lo.radicand == hi.radicand
    if any(h.curve != "l0" for h in hits):
        notes.append("the disc meets l1, not l0; l0 has its vertex at x = 0 <= x0")
    if not all(h.within_arc for h in hits):
        notes.append("intersections lie on the parabola beyond the arc swept by the strip")
    if printed_radicand(p, x0) != lo.radicand:
        notes.append("a4 (a2 - x0) / a1 differs from the substitution root a4^2 (a2 - x0) / a1")
    # (ii) l0 <= its vertex value over the whole range, so x0 sits between it and {x = a2}
    ts = _sample_heights(lo, hi)
    top = l0.x_vertex if lo.cmp(HALF) < 0 < hi.cmp(HALF) else max(l0.x_at(lo.center), l0.x_at(hi.center))
    checks["between"] = top < x0 < p.a2 and all(l0.x_at(t) < x0 < p.a2 for t in ts)
    # (iii) the tangency map moves only y along y and does not see y in x, z
    ok = True
    for t in ts:
        x_pre = HALF + (t - HALF) / p.a4
        z_pre = (x0 + p.a1 * (x_pre - HALF) ** 2) / p.a2
        ends = [tangency_map(p, x_pre, y, z_pre) for y in (Fraction(0), Fraction(1))]
        ok &= all(e[0] == x0 and e[2] == t for e in ends)
        ok &= ends[0][1] == l0.y and ends[1][1] == l1.y
    checks["preimage_ss_discs"] = ok and p.a3 != 0
    return FoldingReport(x0, hits, checks, notes)


def curve_consistency(p: ModelParams, samples: int = 11) -> bool:
    """The tangency image of the strip slices z = 0 and z = 1 lies on the emitted parabolas."""
    l0, l1 = image_curves(p)
    for i in range(samples):
        x = HALF - p.delta + 2 * p.delta * Fraction(i, samples - 1)
        for curve, (y, z) in ((l0, (0, 0)), (l1, (1, 1))):
            xi, yi, zi = tangency_map(p, x, Fraction(y), Fraction(z))
            if xi != curve.x_at(zi) or yi != curve.y or zi not in curve.z_range:
                return False
    return True
