"""Smooth bumps, the perturbation h and the perturbed map g = f o h.

h only moves the z-coordinate, and only near the tangency strip:

    h(x, y, z) = (x, y, z + b_u(x) * sum_k t_{k+1} b_ss(y) b_cs,k+1(z) / a2)

On the saturated part of each strip (bumps equal to 1) the second iterate of
g is the quadratic map shifted by t_{k+1} in x, which is what the exact
orbit code uses.  Away from the strip h is the identity and g = f.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .bridges import build_bridge_seq, cs_interval
from .chain import Chain
from .errors import DivergenceError, DomainError, EscapeError, ExactnessError, RegionError
from .model import ModelParams, Point3, Region, apply_f, branch_maps, classify, tangency_map
from .numerics import RatInterval, as_rat

HALF = Fraction(1, 2)


# ---------------------------------------------------------------- polynomials

def _poly_eval(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_deriv(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def _bernstein_bound(coeffs, elevate: int = 16) -> Fraction:
    """Rigorous upper bound of |poly| on [0, 1] from Bernstein coefficients."""
    n = max(len(coeffs) - 1, 0) + elevate
    padded = list(coeffs) + [Fraction(0)] * (n + 1 - len(coeffs))
    # power basis -> Bernstein basis of degree n
    bern = [sum((Fraction(comb(j, i), comb(n, i)) * padded[i] for i in range(j + 1)), Fraction(0))
            for j in range(n + 1)]
    return max(abs(b) for b in bern)


@dataclass(frozen=True)
class BumpSpec:
    """Base step b: 0 on (-inf, -1], 1 on [0, inf), C^r polynomial in between.

    The transition is the integral of s^r (1-s)^r normalised to total mass 1
    (degree 2r+1), which has r vanishing derivatives at both ends.
    """

    r: int

    def __post_init__(self):
        if self.r < 1:
            raise DomainError("bump order must be at least 1")

    @property
    def coeffs(self) -> list[Fraction]:
        r = self.r
        dens = [Fraction((-1) ** j * comb(r, j)) for j in range(r + 1)]  # (1-s)^r
        integrand = [Fraction(0)] * r + dens  # s^r (1-s)^r
        integral = [Fraction(0)] + [c / (i + 1) for i, c in enumerate(integrand)]
        total = sum(integral)
        return [c / total for c in integral]

    def step(self, x, convert=None):
        """b(x) for a Fraction or big-float x."""
        if x <= -1:
            return 0 if convert is None else convert(0)
        if x >= 0:
            return 1 if convert is None else convert(1)
        cs = self.coeffs if convert is None else [convert(c) for c in self.coeffs]
        return _poly_eval(cs, x + 1)

    def derivative_bounds(self) -> list[Fraction]:
        """Upper bounds of sup |b^(j)| for j = 0..r (j = 0 gives 1)."""
        out = [Fraction(1)]
        cs = self.coeffs
        for _ in range(self.r):
            cs = _poly_deriv(cs)
            out.append(_bernstein_bound(cs))
        return out

    def cr_norm_bound(self) -> Fraction:
        return max(self.derivative_bounds())


def bump_interval_eval(spec: BumpSpec, rho, I: RatInterval, x, convert=None):
    """b_{rho,I}(x): 1 on I, 0 outside the rho|I| collars, C^r in the collars."""
    scale = as_rat(rho) * I.width
    if scale <= 0:
        raise DomainError("collar width must be positive")
    if convert is None:
        left = (x - I.lo) / scale
        right = -(x - I.hi) / scale
        return spec.step(left) + spec.step(right) - 1
    scale_c, lo_c, hi_c = convert(scale), convert(I.lo), convert(I.hi)
    return spec.step((x - lo_c) / scale_c, convert) + spec.step(-(x - hi_c) / scale_c, convert) - 1


# ---------------------------------------------------------------- schedule of strips

def tau_cs(p: ModelParams) -> Fraction:
    inv = 1 / p.lambda_u
    return inv / (1 - 2 * inv)


@dataclass(frozen=True)
class PerturbationSchedule:
    """t_j and the cs-strips J_j (j = k+1 for k = 1..K) with their collars."""

    params: ModelParams
    bump: BumpSpec
    t: dict
    strips: dict
    rho_u: Fraction
    rho_ss: Fraction
    rho_cs: Fraction

    @property
    def u_interval(self) -> RatInterval:
        d = self.params.delta
        return RatInterval(HALF - d, HALF + d)

    def collar(self, j: int) -> RatInterval:
        J = self.strips[j]
        return J.inflate(self.rho_cs * J.width)

    def strip_of(self, z):
        """(index, saturated) for the strip whose collar holds z, or (None, False)."""
        for j, J in self.strips.items():
            if z in self.collar(j):
                return j, z in J
        return None, False

    def supports_disjoint(self) -> bool:
        cols = sorted((self.collar(j) for j in self.strips), key=lambda iv: iv.lo)
        return all(a.hi < b.lo for a, b in zip(cols, cols[1:]))


def perturbation_schedule(chain: Chain, bump: BumpSpec | None = None) -> PerturbationSchedule:
    p = chain.params
    bump = bump or BumpSpec(p.r)
    seq = build_bridge_seq(p, chain.K + 1)
    t, strips = {}, {}
    for rec in chain:
        j = rec.k + 1
        t[j] = rec.t_next
        strips[j] = cs_interval(p, seq.B[j])
    return PerturbationSchedule(
        params=p, bump=bump, t=t, strips=strips,
        rho_u=Fraction(1, 4), rho_ss=Fraction(1, 4), rho_cs=1 / (3 * tau_cs(p)),
    )


def h_eval(sched: PerturbationSchedule, pt, convert=None):
    """h at a point given as Fractions (exact) or big floats (pass ``convert``)."""
    p = sched.params
    x, y, z = pt
    half = HALF if convert is None else convert(HALF)
    if abs(x - half) > (3 * p.delta / 2 if convert is None else convert(3 * p.delta / 2)):
        return (x, y, z)
    total = 0 if convert is None else convert(0)
    zq = z if convert is None else None
    for j, J in sched.strips.items():
        col = sched.collar(j)
        if convert is None:
            if not (col.lo < zq < col.hi):
                continue
        elif not (convert(col.lo) < z < convert(col.hi)):
            continue
        bcs = bump_interval_eval(sched.bump, sched.rho_cs, J, z, convert)
        tj = sched.t[j] if convert is None else convert(sched.t[j])
        total = total + tj * bcs
    if total == 0:
        return (x, y, z)
    bu = bump_interval_eval(sched.bump, sched.rho_u, sched.u_interval, x, convert)
    bss = bump_interval_eval(sched.bump, sched.rho_ss, RatInterval(0, 1), y, convert)
    a2 = p.a2 if convert is None else convert(p.a2)
    return (x, y, z + bu * bss * total / a2)


# ---------------------------------------------------------------- exact g

def g_apply_exact(sched: PerturbationSchedule, pt) -> Point3:
    """One step of g at a point of V0 or V1, where h is the identity."""
    p = sched.params
    region = classify(p, pt)
    if region in (Region.V0, Region.V1):
        return apply_f(p, pt)
    if region is Region.TANGENCY_STRIP:
        raise RegionError("points in the tangency strip take two steps: use g2_apply_exact")
    raise EscapeError(f"g is not modelled in region {region.value}")


def g2_apply_exact(sched: PerturbationSchedule, pt) -> Point3:
    """g o g on the tangency strip: f^2 shifted by t_j in x on the saturated strip j."""
    p = sched.params
    if classify(p, pt) is not Region.TANGENCY_STRIP:
        raise RegionError("g2_apply_exact needs a point of the tangency strip")
    x, y, z = pt
    j, saturated = sched.strip_of(z)
    shift = Fraction(0)
    if j is not None:
        if not saturated:
            raise ExactnessError(f"z={z} lies in the collar of strip {j}, where no exact rule holds")
        shift = sched.t[j]
    nx, ny, nz = tangency_map(p, x, y, z)
    return Point3(nx + shift, ny, nz)


def g_step(sched: PerturbationSchedule, pt):
    """(next point, steps consumed): one step on V0/V1, two on the strip."""
    region = classify(sched.params, pt)
    if region is Region.TANGENCY_STRIP:
        return g2_apply_exact(sched, pt), 2
    return g_apply_exact(sched, pt), 1


class _Lazy:
    """Exact rational kept as an unnormalised numerator/denominator pair."""

    __slots__ = ("n", "d")

    def __init__(self, q):
        q = Fraction(q)
        self.n, self.d = q.numerator, q.denominator

    def affine(self, coef):
        a, b, m = coef
        self.n, self.d = a * self.n + b * self.d, m * self.d

    def cmp(self, c: Fraction) -> int:
        v = self.n * c.denominator - c.numerator * self.d
        return (v > 0) - (v < 0)

    def value(self) -> Fraction:
        return Fraction(self.n, self.d)


def _int_coef(a: Fraction, b: Fraction):
    m = a.denominator * b.denominator
    return (a.numerator * b.denominator, b.numerator * a.denominator, m)


def iterate_exact(sched: PerturbationSchedule, pt, steps: int, record=False):
    """Exact orbit of g for ``steps`` steps (a strip point consumes two).

    Returns (final point, regions) where regions lists the region of every
    visited point; the unmodelled point between the two tangency steps is
    tagged ``None``.  Numerators and denominators are normalised only at the
    tangency, which keeps long runs cheap.
    """
    p = sched.params
    maps = branch_maps(p)
    coef = {axis: [_int_coef(Fraction(a), Fraction(b)) for a, b in maps[axis]] for axis in maps}
    cx, cy, cz = (_Lazy(c) for c in pt)
    left, right = 1 / p.lambda_u, 1 - 1 / p.lambda_u
    s_lo, s_hi = HALF - p.delta, HALF + p.delta
    regions = [] if record else None
    done = 0
    while done < steps:
        if any(c.cmp(Fraction(0)) < 0 or c.cmp(Fraction(1)) > 0 for c in (cx, cy, cz)):
            raise EscapeError("orbit left the cube", done)
        if cx.cmp(left) <= 0:
            s, region = 0, Region.V0
        elif cx.cmp(right) >= 0:
            s, region = 1, Region.V1
        elif cx.cmp(s_lo) >= 0 and cx.cmp(s_hi) <= 0:
            if steps - done < 2:
                raise EscapeError("one step left inside the tangency strip", done)
            nxt = g2_apply_exact(sched, (cx.value(), cy.value(), cz.value()))
            cx, cy, cz = (_Lazy(c) for c in nxt)
            if record:
                regions += [Region.TANGENCY_STRIP, None]
            done += 2
            continue
        else:
            raise EscapeError("orbit entered the gap outside the tangency strip", done)
        if record:
            regions.append(region)
        cx.affine(coef["x"][s])
        cy.affine(coef["y"][s])
        cz.affine(coef["z"][s])
        done += 1
    return Point3(cx.value(), cy.value(), cz.value()), regions


# ---------------------------------------------------------------- size of h - id

def series_value(p: ModelParams, L: int, r: int) -> Fraction:
    """Closed form of the tail sum bounding sum_k |t_{k+1}| / |J_{k+1}|^r."""
    lam = p.lambda_u
    if L < r:
        raise DivergenceError(f"the series diverges for L={L} < r={r}")
    return (abs(p.a2 ** r) * lam ** ((p.n0 + 1) * (r - 1) + r)
            / (lam ** L * (lam ** (1 + L) - lam ** r)))


def norm_prefactor(p: ModelParams, bump: BumpSpec) -> Fraction:
    """Constant C with ||h - id||_{C^r} <= C * series_value.

    A mixed derivative of order j1+j2+j3 <= r of b_u(x) b_ss(y) b_cs(z) is at
    most Mbar^3 A^r |J|^-r, where Mbar bounds the derivatives of b and A the
    inverse collar widths of the fixed bumps.
    """
    mbar = bump.cr_norm_bound()
    a = max(Fraction(1), 2 / p.delta, Fraction(4), 3 * tau_cs(p))
    return mbar ** 3 * a ** bump.r / abs(p.a2)


def norm_bound(p: ModelParams, bump: BumpSpec, L: int, r: int | None = None) -> Fraction:
    r = bump.r if r is None else r
    if r != bump.r:
        raise DomainError("bump order and norm order differ")
    return norm_prefactor(p, bump) * series_value(p, L, r)


def choose_L(p: ModelParams, bump: BumpSpec, eps, limit: int = 10_000) -> int:
    """Least L >= r with norm_bound below eps."""
    eps = as_rat(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    for L in range(bump.r, limit):
        if norm_bound(p, bump, L) < eps:
            return L
    raise DivergenceError(f"no L below {limit} reaches eps={eps}")
