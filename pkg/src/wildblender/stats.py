"""Birkhoff averages and residence statistics along chain orbits.

Orbits starting in the first chain box are followed block by block.  Inside
block k the itinerary is w_hat_k, so every point is the centre orbit plus an
offset: x offsets grow by lambda_u per step and z offsets shrink, and both
are carried separately from the centre values.  This keeps big-float runs
accurate for thousands of expanding steps, where iterating x directly would
lose every digit.  The block's last point sits in the tangency strip and the
next modelled point is two steps later; the observable at the skipped step
is taken equal to its value at the strip point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .bridges import build_bridge_seq, cs_interval
from .chain import Chain, Schedule
from .eras import EraSeq, era_sequence  # noqa: F401  (re-exported)
from .errors import DomainError, EscapeError, InsufficientDataError
from .model import ModelParams, Point3, branch_maps, fixed_point_P, fixed_point_Q
from .numerics import BigFloat, affine_along

HALF = Fraction(1, 2)


# ---------------------------------------------------------------- observables

@dataclass(frozen=True)
class Observable:
    """Affine function c0 + cx x + cy y + cz z on the cube."""

    name: str
    c0: Fraction = Fraction(0)
    cx: Fraction = Fraction(0)
    cy: Fraction = Fraction(0)
    cz: Fraction = Fraction(0)

    def __call__(self, x, y, z):
        return self.c0 + self.cx * x + self.cy * y + self.cz * z

    def sup_norm(self) -> Fraction:
        """max |phi| over the unit cube (attained at a corner)."""
        return max(abs(self(x, y, z)) for x in (0, 1) for y in (0, 1) for z in (0, 1))


CoordX = Observable("x", cx=Fraction(1))
CoordY = Observable("y", cy=Fraction(1))
CoordZ = Observable("z", cz=Fraction(1))


def to_fraction(v) -> Fraction:
    """Exact value of a Fraction, int or mpmath number."""
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    man, exp = v.man_exp
    return Fraction(man) * Fraction(2) ** exp


def historic_targets(p: ModelParams, phi: Observable) -> tuple[Fraction, Fraction]:
    """(even-era, odd-era) limits: the weighted mixes of phi at P and Q."""
    at_p, at_q = phi(*fixed_point_P(p)), phi(*fixed_point_Q(p))
    return (3 * at_p + at_q) / 4, (7 * at_p + at_q) / 8


def periodic_orbit(p: ModelParams, word: str) -> list[Point3]:
    """The periodic orbit whose itinerary repeats ``word``, starting at phase 0."""
    maps = branch_maps(p)
    coords = []
    for axis in ("x", "y", "z"):
        slope, off = affine_along(word, maps[axis])
        coords.append(off / (1 - slope))
    pts = [Point3(*coords)]
    for s in word[:-1]:
        prev = pts[-1]
        nxt = []
        for axis, c in zip(("x", "y", "z"), prev):
            a, b = maps[axis][int(s)]
            nxt.append(Fraction(a) * c + Fraction(b))
        pts.append(Point3(*nxt))
    return pts


def residence_window(p: ModelParams, word: str, rho) -> tuple[int, int]:
    """(u, s): matching u future and s past symbols of the periodic pattern puts a
    point within rho (max metric) of the periodic orbit."""
    rho = Fraction(rho)
    u = 0
    while p.lambda_u ** -u > rho:
        u += 1
    n = len(word)
    s = 0
    while True:
        worst_z = max(
            _contraction(p, "".join(word[(ph - i - 1) % n] for i in range(s))) for ph in range(n)
        )
        if worst_z <= rho and p.lambda_ss ** s <= rho:
            return u, s
        s += 1


def _contraction(p: ModelParams, past: str) -> Fraction:
    return p.lambda_cs0 ** past.count("0") * p.lambda_cs1 ** past.count("1")


# ---------------------------------------------------------------- block runner

@dataclass
class EmpiricalMeasure:
    """Cumulative sums of observables at block ends along one orbit.

    ``ends[i]`` is the number of steps after the i-th block; ``sums[name][i]``
    the sum of the observable over steps [0, ends[i]).
    """

    mode: str
    ks: list = field(default_factory=list)
    ends: list = field(default_factory=list)
    sums: dict = field(default_factory=dict)
    near: list = field(default_factory=list)
    regions_ok: bool = True

    def steps_before(self, k: int) -> int:
        """Steps taken before block k starts."""
        if k == self.ks[0]:
            return 0
        return self.ends[self.ks.index(k) - 1]

    def average(self, name: str, start_k: int, end_k: int):
        """Average over blocks start_k..end_k-1."""
        i0 = self.ks.index(start_k)
        i1 = self.ks.index(end_k - 1)
        s0 = self.sums[name][i0 - 1] if i0 > 0 else 0
        n0 = self.ends[i0 - 1] if i0 > 0 else 0
        return (self.sums[name][i1] - s0) / (self.ends[i1] - n0)

    def cumulative_average(self, name: str, end_k: int):
        return self.average(name, self.ks[0], end_k)


class _Arith:
    """Number plumbing shared by the exact and big-float runners."""

    def __init__(self, mode: BigFloat | None):
        self.bf = mode
        self.tag = "exact" if mode is None else mode.tag

    def __call__(self, q):
        return Fraction(q) if self.bf is None else self.bf(q)


def birkhoff_run(chain: Chain, k_start: int, k_end: int, observables=(CoordX,),
                 offset=(Fraction(0), None, Fraction(0)), mode: BigFloat | None = None,
                 near=None) -> EmpiricalMeasure:
    """Follow the orbit of (x_hat + dx, y0, 1/2 + dz) through blocks k_start..k_end-1.

    ``offset`` is (dx, y0, dz); y0 defaults to 1/2.  ``mode`` is a BigFloat
    context or None for exact arithmetic.  ``near`` is an optional
    (points, rho) pair: the run then counts, per block, the steps spent within
    rho (max metric) of the given points.
    """
    p = chain.params
    if k_end <= k_start:
        raise DomainError("need at least one block")
    if k_end > chain.K + 1:
        raise DomainError("run needs chain records up to k_end")
    num = _Arith(mode)
    lam, lss = num(p.lambda_u), num(p.lambda_ss)
    l0, l1, beta = num(p.lambda_cs0), num(p.lambda_cs1), num(p.beta)
    a1, a2, a3, a4 = num(p.a1), num(p.a2), num(p.a3), num(p.a4)
    half, one = num(HALF), num(1)
    v0_edge, v1_edge = num(1 / p.lambda_u), num(1 - 1 / p.lambda_u)
    delta = num(p.delta)
    seq = build_bridge_seq(p, k_end)
    dx, y, dz = num(offset[0]), num(HALF if offset[1] is None else offset[1]), num(offset[2])
    if Fraction(offset[0]) + chain[k_start].x_hat not in chain[k_start].B_hat:
        raise DomainError("start point is not in the first chain bridge")
    targets, radius = (None, None) if near is None else ([tuple(num(c) for c in q) for q in near[0]], num(near[1]))
    meas = EmpiricalMeasure(num.tag, sums={o.name: [] for o in observables})
    totals = {o.name: num(0) for o in observables}
    coeffs = {o.name: (num(o.c0), num(o.cx), num(o.cy), num(o.cz)) for o in observables}
    # big floats cannot resolve points within lam^-n of a branch edge, so the
    # region of each step is taken from the itinerary and only checked exactly
    exact = mode is None
    steps = 0
    for k in range(k_start, k_end):
        rec = chain[k]
        w = str(rec.w_hat)
        n = len(w)
        xr = [None] * (n + 1)
        xr[n] = half
        for i in range(n - 1, -1, -1):
            xr[i] = xr[i + 1] / lam if w[i] == "0" else one - xr[i + 1] / lam
        zr = half
        count = 0
        for i in range(n + 1):
            x, z = xr[i] + dx, zr + dz
            if exact and i < n:
                inside = x <= v0_edge if w[i] == "0" else x >= v1_edge
                if not inside:
                    meas.regions_ok = False
            weight = 2 if i == n else 1  # the skipped intermediate step repeats the strip value
            for name, (c0, cx, cy, cz) in coeffs.items():
                totals[name] += weight * (c0 + cx * x + cy * y + cz * z)
            if targets is not None:
                hit = any(abs(x - q[0]) <= radius and abs(y - q[1]) <= radius
                          and abs(z - q[2]) <= radius for q in targets)
                count += weight * hit
            if i == n:
                break
            if w[i] == "0":
                dx, y, zr, dz = lam * dx, lss * y, l0 * zr, l0 * dz
            else:
                dx, y, zr, dz = -lam * dx, one - lss * y, l1 * zr + beta, l1 * dz
        # tangency: x - 1/2 = dx, z = z_hit + dz
        strip = cs_interval(p, seq.B[k + 1])
        z_abs = num(rec.z_hit) + dz
        if abs(dx) > delta or not (num(strip.lo) <= z_abs <= num(strip.hi)):
            raise EscapeError(f"orbit misses the saturated strip after block {k}", steps + n)
        dx, dz = -a1 * dx * dx + a2 * dz, a4 * dx
        y = a3 * (y - half) + half
        steps += n + 2
        meas.ks.append(k)
        meas.ends.append(steps)
        for name in totals:
            meas.sums[name].append(totals[name])
        meas.near.append(count)
    return meas


# ---------------------------------------------------------------- historic check

@dataclass
class HistoricReport:
    eras: EraSeq
    phi: str
    values: list
    targets: tuple
    margin: Fraction
    separation: object
    monotone: bool
    claim_rows: list

    @property
    def separated(self) -> bool:
        return self.separation >= self.margin

    @property
    def passed(self) -> bool:
        return self.separated and self.monotone


def verify_historic(p: ModelParams, run: EmpiricalMeasure, eras: EraSeq,
                    phi: Observable = CoordX, margin=Fraction(1, 50)) -> HistoricReport:
    """Era-end averages must alternate between the two targets.

    ``separation`` is min(even values) - max(odd values) (sign-adjusted when
    phi(Q) < phi(P)); ``monotone`` says each parity subsequence moves towards
    its target.
    """
    if eras.eras < 4:
        raise InsufficientDataError("need at least two eras of each parity")
    even_t, odd_t = historic_targets(p, phi)
    if even_t == odd_t:
        raise DomainError("phi does not separate P and Q")
    sign = 1 if even_t > odd_t else -1
    values = [to_fraction(run.cumulative_average(phi.name, eras.ks[s]))
              for s in range(1, eras.eras + 1)]
    evens = [v for s, v in enumerate(values, 1) if s % 2 == 0]
    odds = [v for s, v in enumerate(values, 1) if s % 2 == 1]
    separation = min(sign * v for v in evens) - max(sign * v for v in odds)
    dist_even = [abs(v - even_t) for v in evens]
    dist_odd = [abs(v - odd_t) for v in odds]
    monotone = all(b < a for a, b in zip(dist_even, dist_even[1:])) and \
        all(b < a for a, b in zip(dist_odd, dist_odd[1:]))
    norm = phi.sup_norm()
    rows = []
    for s in range(2, eras.eras + 1):
        n_s = run.steps_before(eras.ks[s - 1])
        n_next = run.ends[run.ks.index(eras.ks[s] - 1)]
        block = to_fraction(run.average(phi.name, eras.ks[s - 1], eras.ks[s]))
        cum = values[s - 1]
        rows.append({
            "s": s,
            "block_vs_cumulative": abs(block - cum),
            "bound": 2 * norm * Fraction(n_s, n_next),
            "bound_holds": abs(block - cum) <= 2 * norm * Fraction(n_s, n_next),
            "ratio_below_1_over_1_plus_s": Fraction(n_s, n_next) < Fraction(1, 1 + s),
        })
    return HistoricReport(eras, phi.name, values, (even_t, odd_t), Fraction(margin),
                          separation, monotone, rows)


# ---------------------------------------------------------------- physical check

@dataclass
class PhysicalReport:
    schedule: str
    rho: Fraction
    window: tuple
    rows: list

    @property
    def increasing(self) -> bool:
        """The empirical measure of the neighbourhood grows block by block."""
        fr = [r["cumulative"] for r in self.rows]
        return all(b > a for a, b in zip(fr, fr[1:]))

    @property
    def above_bound(self) -> bool:
        return all(r["fraction"] >= r["bound"] for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.increasing and self.above_bound


def near_targets(p: ModelParams, schedule: Schedule) -> list[Point3]:
    if schedule.kind == "periodic":
        return periodic_orbit(p, schedule.period_word())
    return [fixed_point_P(p)]


def verify_physical(chain: Chain, run: EmpiricalMeasure, rho=Fraction(1, 10)) -> PhysicalReport:
    """Per block, the fraction of steps near the target orbit against the proven floor.

    ``cumulative`` is the same fraction over the whole run so far, i.e. the
    empirical measure of the neighbourhood; it is the one required to grow.

    The floor counts the steps of the freedom code whose u following and s
    preceding symbols lie in its periodic part; everything else (the descent
    code, the adjustment, the pullback code and the two tangency steps) is
    overhead.
    """
    p = chain.params
    word = chain.schedule.period_word()
    u, s = residence_window(p, word, rho)
    rows = []
    seen = 0
    for k, hits, end in zip(run.ks, run.near, run.ends):
        seen += hits
        rec = chain[k]
        if chain.schedule.kind == "periodic":
            periodic = (len(rec.u) // chain.schedule.n) * chain.schedule.n
        else:
            periodic = len(rec.u) if set(str(rec.u)) <= {"0"} else 0
        floor = max(periodic - u - s + 1, 0)
        total = rec.n_hat + 2
        rows.append({"k": k, "near": hits, "steps": total,
                     "fraction": Fraction(hits) / total if isinstance(hits, int) else hits / total,
                     "bound": Fraction(floor, total),
                     "cumulative": Fraction(seen) / end if isinstance(seen, int) else seen / end,
                     "overhead": total - floor})
    return PhysicalReport(str(chain.schedule), Fraction(rho), (u, s), rows)
