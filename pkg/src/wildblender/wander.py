"""Boxes W_k around the chain bridge centres and the checks that make them wander.

W_k = [x_hat_k +- b_k/2] x Y_k x [1/2 +- z*_k] with b_k = c_k^2 and
z*_k = 20 a4 c_k / sqrt(a1).  One block of g (n_hat_k affine steps, then
the shifted tangency) acts on offsets from the box centre by

    (x, z) -> (-a1 lam^(2 n) x^2 + a2 Lam z,  a4 (-1)^ones lam^n x)

where Lam is the cs-contraction along w_hat_k.  The verification compares
the exact image enclosure of W_k with W_{k+1}.

c_k = lam^-E_k / sqrt(a1) with an integer E_k.  The ideal (real) exponent
obeys e_k = (n_hat_k + e_{k+1}) / 2, which is contracting when run backwards.
``mode="recursion"`` takes the backward value at the first index as a seed
and then iterates c_{k+1} = sqrt(a1) lam^n_hat c_k^2 forwards exactly; the
seed's rounding error doubles each step, so only a handful of consecutive
boxes verify.  ``mode="anchored"`` keeps the backward integer sequence
E_k = ceil((E_{k+1} + n_hat_k) / 2) for every k, so b_{k+1} is the squared
recursion value times lam^0 or lam^2 and no error accumulates.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .bridges import build_bridge_seq, cs_interval, gap_interval, zeta_affine
from .chain import Chain, Schedule, build_chain
from .eras import era_sequence
from .errors import DependencyError, DomainError, SeedError
from .model import ModelParams, Region, branch_maps
from .numerics import Box3, RatInterval, affine_along, rat_str
from .perturb import PerturbationSchedule, iterate_exact, perturbation_schedule

HALF = Fraction(1, 2)


def _ceil_half(n: int) -> int:
    return -((-n) // 2)


@dataclass(frozen=True)
class BoxRecord:
    k: int
    E: int
    c: Fraction
    x_hat: Fraction
    Y: RatInterval | None
    z_star: Fraction

    @property
    def b(self) -> Fraction:
        return self.c * self.c

    @property
    def X(self) -> RatInterval:
        return RatInterval(self.x_hat - self.b / 2, self.x_hat + self.b / 2)

    @property
    def Z(self) -> RatInterval:
        return RatInterval(HALF - self.z_star, HALF + self.z_star)

    @property
    def W(self) -> Box3:
        if self.Y is None:
            raise DependencyError("box was built without its y-interval")
        return Box3(self.X, self.Y, self.Z)

    def to_json(self) -> dict:
        return {"k": self.k, "E": self.E, "mode": "exact", "c": rat_str(self.c),
                "Y": None if self.Y is None else self.Y.to_json(), "z_star": rat_str(self.z_star)}


@dataclass(frozen=True)
class BoxSeq:
    k_start: int
    mode: str
    records: tuple[BoxRecord, ...]

    def __getitem__(self, k: int) -> BoxRecord:
        i = k - self.k_start
        if 0 <= i < len(self.records):
            return self.records[i]
        raise DependencyError(f"no box for k={k}")

    @property
    def k_end(self) -> int:
        return self.k_start + len(self.records) - 1

    def __iter__(self):
        return iter(self.records)


def ideal_exponents(chain: Chain, k_start: int) -> dict[int, int]:
    """Backward-rounded exponents E_k for k_start..K+1.

    The tail beyond the last built record is extrapolated linearly, which
    only affects the last few indices (its error halves per step back).
    """
    last = chain.K + 1
    if not 1 <= k_start <= last:
        raise DomainError(f"k_start={k_start} outside the chain")
    n_last = chain[last].n_hat
    d = n_last - chain[last - 1].n_hat if last > 1 else 0
    # sum_i (n + i d) / 2^i = 2n + 2d, and e = S/2
    E = {last: n_last + max(d, 0)}
    for k in range(last - 1, k_start - 1, -1):
        E[k] = _ceil_half(E[k + 1] + chain[k].n_hat)
    return E


def y_intervals(chain: Chain, k_start: int, k_end: int) -> dict[int, RatInterval]:
    """Y_k for k_start..k_end: [lambda_ss, 1 - lambda_ss] pushed through whole blocks."""
    p = chain.params
    Y = RatInterval(p.lambda_ss, 1 - p.lambda_ss)
    out = {}
    for k in range(k_start, k_end + 1):
        out[k] = Y
        Y = Y.affine_image(*_y_block(chain, k))
    return out


def build_box_seq(chain: Chain, k_start: int, K: int | None = None,
                  mode: str = "recursion", seed_E: int | None = None, ys=None,
                  with_y: bool = True) -> BoxSeq:
    """Boxes for k = k_start..K+1 (K defaults to the last built chain index).

    ``ys`` may pass precomputed y-intervals (see :func:`y_intervals`).  The
    exact y-intervals carry ever larger denominators; ``with_y=False`` skips
    them for quick scans, and the y-dependent checks are then not run.
    """
    p = chain.params
    root = p.sqrt_a1
    if root is None:
        raise DomainError("a1 must be a rational square")
    K = chain.K if K is None else K
    if K > chain.K:
        raise DependencyError("boxes need the chain record after the last box")
    if mode not in ("recursion", "anchored"):
        raise DomainError(f"unknown box mode {mode!r}")
    ideal = ideal_exponents(chain, k_start)
    if mode == "anchored":
        exps = {k: ideal[k] for k in range(k_start, K + 2)}
    else:
        e = ideal[k_start] if seed_E is None else seed_E
        exps = {}
        for k in range(k_start, K + 2):
            exps[k] = e
            e = 2 * e - chain[k].n_hat
    lam = p.lambda_u
    fresh = RatInterval(p.lambda_ss, 1 - p.lambda_ss)
    if not with_y:
        ys = {k: None for k in range(k_start, K + 2)}
    elif ys is None or ys.get(k_start) != fresh or K + 1 not in ys:
        ys = y_intervals(chain, k_start, K + 1)
    recs = []
    for k in range(k_start, K + 2):
        c = lam ** -exps[k] / root
        if c <= 0 or c >= 1:
            raise SeedError(f"box scale c={c} is not in (0, 1)", k)
        recs.append(BoxRecord(k=k, E=exps[k], c=c, x_hat=chain[k].x_hat, Y=ys[k],
                              z_star=20 * p.a4 * c / root))
    return BoxSeq(k_start, mode, tuple(recs))


# ---------------------------------------------------------------- closed form

def block_constants(chain: Chain, k: int):
    """(lam^n_hat, Lam, sign) for block k."""
    p = chain.params
    rec = chain[k]
    Lam, _ = zeta_affine(p, str(rec.w_hat))
    sign = -1 if rec.w_hat.ones % 2 else 1
    return p.lambda_u ** rec.n_hat, Lam, sign


def closed_form_image(chain: Chain, k: int, x_off, z_off, consts=None):
    """Image of (x_hat_k + x_off, ., 1/2 + z_off) after one block, as (x, z)."""
    p = chain.params
    rec = chain[k]
    if rec.x_hat + x_off not in rec.B_hat:
        raise DomainError("x offset leaves the chain bridge")
    if not (0 <= HALF + z_off <= 1):
        raise DomainError("z offset leaves [0, 1]")
    lam_n, Lam, sign = consts or block_constants(chain, k)
    nxt = chain[k + 1]
    x_new = nxt.x_hat - p.a1 * lam_n * lam_n * x_off * x_off + p.a2 * Lam * z_off
    z_new = HALF + p.a4 * sign * lam_n * x_off
    return x_new, z_new


def rho(chain: Chain, boxes: BoxSeq, k: int) -> Fraction:
    p = chain.params
    lam_n, Lam, _ = block_constants(chain, k)
    c = boxes[k].c
    return 40 * p.a2 * p.a4 * Lam / (p.a1 * p.sqrt_a1 * lam_n * lam_n * c ** 3)


# ---------------------------------------------------------------- verification

@dataclass
class BoxCheck:
    k: int
    checks: dict
    rho: Fraction
    diam_sq: Fraction | None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"k": self.k, "passed": self.passed, "mode": "exact",
                "rho_log2": _log2(self.rho), **self.checks}


def _log2(q: Fraction) -> int:
    """floor(log2 q) for q > 0, exact."""
    q = Fraction(q)
    e = q.numerator.bit_length() - q.denominator.bit_length()
    if Fraction(2) ** e > q:
        e -= 1
    return e


def check_box(chain: Chain, boxes: BoxSeq, k: int, strips=None) -> BoxCheck:
    p = chain.params
    rec, box, nxt = chain[k], boxes[k], boxes[k + 1]
    lam_n, Lam, sign = block_constants(chain, k)
    b, zs = box.b, box.z_star
    checks = {}
    unit = RatInterval(0, 1)
    checks["in_cube"] = unit.contains(box.X) and unit.contains(box.Z)
    checks["x_in_gap"] = gap_interval(p, str(rec.w_hat)).holds(box.X)
    # the block must reach the saturated part of the strip
    strip = strips[k + 1] if strips else cs_interval(p, build_bridge_seq(p, k + 1).B[k + 1])
    checks["lands_in_strip"] = (lam_n * b / 2 <= p.delta
                                and strip.contains(RatInterval(rec.z_hit - Lam * zs,
                                                               rec.z_hit + Lam * zs)))
    xs = [x_o for x_o in (-b / 2, Fraction(0), b / 2)]
    imgs = [closed_form_image(chain, k, x_o, z_o, (lam_n, Lam, sign))
            for x_o in xs for z_o in (-zs, zs)]
    img_x = RatInterval(min(i[0] for i in imgs), max(i[0] for i in imgs))
    img_z = RatInterval(min(i[1] for i in imgs), max(i[1] for i in imgs))
    checks["x_image_inside"] = nxt.X.interior_contains(img_x)
    checks["z_image_inside"] = nxt.Z.interior_contains(img_z)
    r = rho(chain, boxes, k)
    checks["rho_below_half"] = r < HALF
    checks["z_width"] = p.a1 * lam_n * lam_n * b * b < 400 * nxt.b
    diam = None
    if box.Y is not None and nxt.Y is not None:
        checks["in_cube"] = checks["in_cube"] and unit.contains(box.Y)
        # Y_{k+1} is by definition the block image of Y_k
        checks["y_image_inside"] = nxt.Y.contains(box.Y.affine_image(*_y_block(chain, k)))
        diam = box.W.diam_sq()
        checks["diam_decreases"] = nxt.W.diam_sq() < diam
    return BoxCheck(k, checks, r, diam)


def _y_block(chain: Chain, k: int):
    p = chain.params
    slope, off = affine_along(str(chain[k].w_hat), branch_maps(p)["y"])
    return p.a3 * slope, p.a3 * off + HALF - p.a3 * HALF


@dataclass
class WanderReport:
    boxes: BoxSeq
    rows: list = field(default_factory=list)

    @property
    def k1(self) -> int | None:
        for row in self.rows:
            if row.passed:
                return row.k
        return None

    def run_from(self, k: int) -> int:
        """Number of consecutive passing indices starting at k."""
        n = 0
        for row in self.rows:
            if row.k < k:
                continue
            if not row.passed:
                break
            n += 1
        return n

    def rho_decreasing(self, k: int, count: int) -> bool:
        rs = [row.rho for row in self.rows if k <= row.k < k + count]
        return len(rs) == count and all(b < a for a, b in zip(rs, rs[1:]))


def verify_wandering(chain: Chain, boxes: BoxSeq, k_end: int | None = None,
                     stop_early: bool = False) -> WanderReport:
    """Check every box k_start..k_end against its successor (``stop_early``: stop at a failure)."""
    p = chain.params
    k_end = boxes.k_end - 1 if k_end is None else k_end
    seq = build_bridge_seq(p, k_end + 1)
    strips = {j: cs_interval(p, seq.B[j]) for j in range(boxes.k_start + 1, k_end + 2)}
    report = WanderReport(boxes)
    for k in range(boxes.k_start, k_end + 1):
        row = check_box(chain, boxes, k, strips)
        report.rows.append(row)
        if stop_early and not row.passed:
            break
    return report


def find_k1(chain: Chain, k_from: int = 1, need: int = 5, mode: str = "recursion"):
    """First k whose box sequence (seeded there) verifies for ``need`` consecutive steps.

    Returns (k1, report) or (None, None).
    """
    for k in range(k_from, chain.K - need + 1):
        try:
            boxes = build_box_seq(chain, k, K=k + need - 1, mode=mode)
        except SeedError:
            continue
        rep = verify_wandering(chain, boxes)
        if rep.rows[0].passed and rep.run_from(k) >= need:
            return k, rep
    return None, None


def historic_k1(p: ModelParams, eras: int = 4, k_from: int = 1, k_limit: int = 200,
                mode: str = "anchored"):
    """Least k1 >= k_from whose historic chain verifies every block k1..k_{S+1}-1.

    The era boundaries depend on k1 and the chain depends on the era
    boundaries, so each candidate gets its own chain.  Candidates are
    screened without y-intervals; the winner is then rechecked in full.
    Returns (k1, chain, boxes, report) or None.
    """
    for k1 in range(k_from, k_limit + 1):
        es = era_sequence(k1, eras)
        chain = build_chain(p, Schedule("historic", k1=k1), es.ks[-1] + 3, majority_from=None)
        try:
            boxes = build_box_seq(chain, k1, K=es.ks[-1], mode=mode, with_y=False)
        except SeedError:
            continue
        quick = verify_wandering(chain, boxes, k_end=es.ks[-1] - 1, stop_early=True)
        if not all(row.passed for row in quick.rows):
            continue
        boxes = build_box_seq(chain, k1, K=es.ks[-1], mode=mode)
        full = verify_wandering(chain, boxes, k_end=es.ks[-1] - 1)
        if all(row.passed for row in full.rows):
            return k1, chain, boxes, full
    return None


# ---------------------------------------------------------------- orbit oracle

def _orbit_job(args):
    sched, chain, k, pts, consts = args
    p = chain.params
    rec = chain[k]
    expected_regions = [Region.V0 if s == "0" else Region.V1 for s in str(rec.w_hat)]
    expected_regions += [Region.TANGENCY_STRIP, None]
    y_slope, y_off = _y_block(chain, k)
    bad = []
    for pt in pts:
        end, regions = iterate_exact(sched, pt, rec.n_hat + 2, record=True)
        x_new, z_new = closed_form_image(chain, k, pt[0] - rec.x_hat, pt[2] - HALF, consts)
        ok = (end.x == x_new and end.z == z_new and end.y == y_slope * pt[1] + y_off
              and regions == expected_regions)
        if not ok:
            bad.append(pt)
    return k, len(pts), bad


# Worker processes rebuild the chain and boxes from the (small) parameters:
# pickling the huge exact rationals is slower than recomputing them, and
# str-based Fraction pickling trips the int-to-str digit limit.
_WORKER = {}


def _worker_init(params, schedule, chain_K, k_start, box_K, mode, grid):
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    chain = build_chain(params, schedule, chain_K, majority_from=None)
    boxes = build_box_seq(chain, k_start, K=box_K, mode=mode)
    _WORKER.update(chain=chain, boxes=boxes, sched=perturbation_schedule(chain), grid=grid)


def _worker_job(k):
    w = _WORKER
    k, n, bad = _orbit_job((w["sched"], w["chain"], k, w["boxes"][k].W.sample_grid(w["grid"]),
                            block_constants(w["chain"], k)))
    return k, n, len(bad)


def orbit_equivalence(chain: Chain, boxes: BoxSeq, ks, grid: int = 3, workers: int = 1,
                      sched: PerturbationSchedule | None = None) -> dict:
    """Compare the exact orbit of g with the closed form on a grid of each W_k.

    Returns {k: (points checked, mismatches)}; mismatches is the list of bad
    points, or only their count when run on several workers.
    """
    ks = list(ks)
    if workers > 1:
        init = (chain.params, chain.schedule, chain.K, boxes.k_start, boxes.k_end - 1,
                boxes.mode, grid)
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=init) as pool:
            results = list(pool.map(_worker_job, ks))
        return {k: (n, bad) for k, n, bad in results}
    sched = sched or perturbation_schedule(chain)
    results = [_orbit_job((sched, chain, k, boxes[k].W.sample_grid(grid), block_constants(chain, k)))
               for k in ks]
    return {k: (n, bad) for k, n, bad in results}
