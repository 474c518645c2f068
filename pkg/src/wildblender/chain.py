"""Critical chain of codes steering each tangency image into the next bridge.

For every k the assembled code is  w_hat = w_bar + v + gamma:

* ``w_bar`` descends L*k levels (always to the left child) below the k-th
  bridge of the nested sequence;
* ``v`` is the freedom code prescribed by the schedule, followed by a short
  adjustment that lands the cs-coordinate in [beta, lambda_cs0];
* ``gamma`` is read off by pulling the next cs-interval back through the
  cs-IFS until it covers [beta, lambda_cs0].

Then the cs-IFS along w_hat sends 1/2 into the next cs-interval, and the
correction t_{k+1} is the (tiny) shift that makes the tangency land exactly
on the centre of the next chain bridge.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import mpmath

from .bridges import (
    Code, bridge_interval, build_bridge_seq, cs_interval, descend_left, ifs_apply,
)
from .eras import era_index
from .errors import DependencyError, DomainError, PreconditionError, ScheduleError
from .model import ModelParams
from .numerics import RatInterval, rat_str

HALF = Fraction(1, 2)


# ---------------------------------------------------------------- schedules

@dataclass(frozen=True)
class Schedule:
    """Rule for the freedom codes.

    kind is ``"historic"`` (needs ``k1``), ``"physical"`` or ``"periodic"``
    (needs ``n >= 2``).
    """

    kind: str
    k1: int | None = None
    n: int | None = None

    def __post_init__(self):
        if self.kind not in ("historic", "physical", "periodic"):
            raise DomainError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "periodic" and (self.n is None or self.n < 2):
            raise DomainError("periodic schedules need a period n >= 2")
        if self.kind == "historic" and (self.k1 is None or self.k1 < 1):
            raise DomainError("historic schedules need k1 >= 1")

    @classmethod
    def parse(cls, text: str, k1: int | None = None) -> "Schedule":
        """``physical``, ``periodic:n`` or ``historic:k1``."""
        name, _, arg = text.strip().partition(":")
        if name == "physical" and not arg:
            return cls("physical")
        if name == "periodic":
            try:
                return cls("periodic", n=int(arg))
            except ValueError as exc:
                raise DomainError(f"bad period in {text!r}") from exc
        if name == "historic":
            start = int(arg) if arg else k1
            return cls("historic", k1=start)
        raise DomainError(f"cannot parse schedule {text!r}")

    def __str__(self):
        if self.kind == "periodic":
            return f"periodic:{self.n}"
        if self.kind == "historic":
            return f"historic:{self.k1}"
        return "physical"

    def period_word(self) -> str:
        """Repeating itinerary the freedom code shadows ("0" for the fixed point P)."""
        if self.kind == "periodic":
            return "0" * (self.n - 1) + "1"
        return "0"


def choose_v(schedule: Schedule, k: int) -> Code:
    """Freedom code of length k**2.

    Before the first era a historic schedule uses zeros, like the physical one.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    size = k * k
    if schedule.kind == "physical":
        return Code("0" * size)
    if schedule.kind == "periodic":
        n = schedule.n
        reps = size // n
        body = ("0" * (n - 1) + "1") * reps
        return Code(body + "0" * (size - len(body)))
    s = era_index(schedule.k1, k)
    if s is None:
        return Code("0" * size)
    zeros = (3 * size) // 4 if s % 2 == 0 else (7 * size) // 8
    return Code("0" * zeros + "1" * (size - zeros))


# ---------------------------------------------------------------- pullback

class _IFSInts:
    """Integer form of the cs-IFS: lambda_cs0 = A0/M, lambda_cs1 = A1/M, beta = B/M."""

    def __init__(self, p: ModelParams):
        m = lcm(p.lambda_cs0.denominator, p.lambda_cs1.denominator)
        self.M = m
        self.A0 = p.lambda_cs0.numerator * (m // p.lambda_cs0.denominator)
        self.A1 = p.lambda_cs1.numerator * (m // p.lambda_cs1.denominator)
        self.B = m - self.A1


def pullback_gamma(p: ModelParams, J: RatInterval) -> tuple[Code, RatInterval]:
    """Pull J back through the cs-IFS while one branch image properly contains it.

    Returns (gamma, J_final) with gamma listed in application order, so the
    cs-IFS along gamma maps J_final onto J.  The branch is symbol 0 when both
    images qualify.  J_final covers [beta, lambda_cs0].
    """
    if not (0 <= J.lo and J.hi <= 1):
        raise PreconditionError(f"{J} is not inside [0, 1]")
    if J.width == 0:
        raise PreconditionError("a single point never grows under the pullback")
    ints = _IFSInts(p)
    M, A0, A1, B = ints.M, ints.A0, ints.A1, ints.B
    q = Fraction(J.lo), Fraction(J.hi)
    den = lcm(q[0].denominator, q[1].denominator)
    lo, hi = q[0].numerator * (den // q[0].denominator), q[1].numerator * (den // q[1].denominator)
    chosen = []
    while True:
        in0 = lo >= 0 and hi * M <= A0 * den and not (lo == 0 and hi * M == A0 * den)
        in1 = lo * M >= B * den and hi <= den and not (lo * M == B * den and hi == den)
        if in0:
            lo, hi, den = lo * M, hi * M, den * A0
            chosen.append("0")
        elif in1:
            lo, hi, den = lo * M - B * den, hi * M - B * den, den * A1
            chosen.append("1")
        else:
            break
        if len(chosen) % 64 == 0:
            g = gcd(gcd(lo, hi), den)
            lo, hi, den = lo // g, hi // g, den // g
    if not chosen:
        raise PreconditionError(f"{J} is not properly inside either branch image")
    return Code("".join(reversed(chosen))), RatInterval(Fraction(lo, den), Fraction(hi, den))


def landing_interval(p: ModelParams) -> RatInterval:
    return RatInterval(p.beta, p.lambda_cs0)


def adjustment_code(p: ModelParams, z) -> Code:
    """Shortest greedy suffix alpha putting the cs-IFS image of z into [beta, lambda_cs0].

    Empty when z is already there; otherwise a single symbol when one branch
    does it, else a zero and repeat.  Terminates because repeated zeros push
    z towards 0 and the branch-1 image of a small enough z is inside.
    """
    target = landing_interval(p)
    z = Fraction(z)
    out = ""
    while z not in target:
        z0 = p.lambda_cs0 * z
        z1 = p.lambda_cs1 * z + p.beta
        if z0 in target:
            return Code(out + "0")
        if z1 in target:
            return Code(out + "1")
        out += "0"
        z = z0
    return Code(out)


def max_adjustment_length(p: ModelParams) -> int:
    """Upper bound on len(adjustment_code) over all z in [0, 1]."""
    bound = (p.lambda_cs0 - p.beta) / p.lambda_cs1
    j, power = 0, Fraction(1)
    while power > bound:
        power *= p.lambda_cs0
        j += 1
    return j + 1


def lemma_bounds(p: ModelParams, contraction: str = "lambda_cs0") -> tuple[int, int]:
    """(N0, N1) with m_k <= N0 + N1 k, from the interval-growth argument.

    ``contraction="lambda_cs0"`` uses the weaker expansion rate 1/lambda_cs0
    in the denominator; ``"lambda_cs1"`` uses the rate every pullback step is
    guaranteed to achieve, which is what the growth argument supports.
    """
    rate = {"lambda_cs0": p.lambda_cs0, "lambda_cs1": p.lambda_cs1}[contraction]
    ctx = mpmath.MPContext()
    ctx.prec = 200

    def log(q):
        q = Fraction(q)
        return ctx.log(ctx.fdiv(q.numerator, q.denominator))

    lam = p.lambda_u
    denom = -log(rate)
    n0_val = log(abs(p.a2) * (1 - p.beta)) + (p.n0 + 1 + p.L) * log(lam)
    N0 = int(ctx.ceil(n0_val / denom + 1))
    N1 = int(ctx.ceil((1 + p.L) * log(lam) / denom))
    return N0, N1


# ---------------------------------------------------------------- chain

@dataclass(frozen=True)
class ChainRecord:
    k: int
    w_bar: Code
    u: Code
    alpha: Code
    gamma: Code
    J_final: RatInterval
    B_hat: RatInterval
    J_hat: RatInterval
    J_bar_next: RatInterval
    z_hit: Fraction
    t_next: Fraction | None = None
    z_hat_next: Fraction | None = None

    @property
    def v(self) -> Code:
        return self.u + self.alpha

    @property
    def w_hat(self) -> Code:
        return self.w_bar + self.v + self.gamma

    @property
    def n_hat(self) -> int:
        return len(self.w_bar) + len(self.u) + len(self.alpha) + len(self.gamma)

    @property
    def m(self) -> int:
        return len(self.gamma)

    @property
    def x_hat(self) -> Fraction:
        return self.B_hat.mid

    @property
    def overhead(self) -> int:
        """Length of the parts not prescribed by the schedule."""
        return len(self.w_bar) + len(self.alpha) + len(self.gamma)

    def majority_holds(self) -> bool:
        return self.w_hat.majority_holds()

    def quadratic_holds(self) -> bool:
        return len(self.u) == self.k * self.k

    def to_json(self) -> dict:
        w = self.w_hat
        return {
            "k": self.k, "mode": "exact",
            "w_bar": str(self.w_bar), "u": str(self.u), "alpha": str(self.alpha),
            "gamma": str(self.gamma), "n_hat": self.n_hat, "m": self.m,
            "zeros": w.zeros, "ones": w.ones,
            "B_hat": self.B_hat.to_json(), "J_bar_next": self.J_bar_next.to_json(),
            "z_hit": rat_str(self.z_hit),
            "t_next": None if self.t_next is None else rat_str(self.t_next),
        }


@dataclass(frozen=True)
class Chain:
    """Records for k = 1..K plus one look-ahead record (k = K+1, no t)."""

    params: ModelParams
    schedule: Schedule
    records: tuple[ChainRecord, ...]
    lookahead: ChainRecord

    @property
    def K(self) -> int:
        return len(self.records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, k: int) -> ChainRecord:
        if 1 <= k <= self.K:
            return self.records[k - 1]
        if k == self.K + 1:
            return self.lookahead
        raise DependencyError(f"chain record k={k} was not built (K={self.K})")

    def t_by_index(self) -> dict[int, Fraction]:
        """t_{k+1} keyed by k+1."""
        return {r.k + 1: r.t_next for r in self.records}


def chain_bridge_codes(p: ModelParams, K: int) -> dict[int, Code]:
    """Codes of the bridges B_bar_k (k = 1..K): L*k left-descents below B_k."""
    seq = build_bridge_seq(p, K)
    return {k: descend_left(p, seq.w[k], p.L * k) for k in range(1, K + 1)}


def _assemble(p, schedule, k, w_bar, J_next):
    gamma, J_final = pullback_gamma(p, J_next)
    u = choose_v(schedule, k)
    alpha = adjustment_code(p, ifs_apply(p, w_bar + u, HALF))
    w_hat = w_bar + u + alpha + gamma
    z_hit = ifs_apply(p, w_hat, HALF)
    if z_hit not in J_next:
        raise ScheduleError("assembled code misses the next cs-interval", k)
    B_hat = bridge_interval(p, w_hat)
    return ChainRecord(
        k=k, w_bar=w_bar, u=u, alpha=alpha, gamma=gamma, J_final=J_final,
        B_hat=B_hat, J_hat=cs_interval(p, B_hat), J_bar_next=J_next, z_hit=z_hit,
    )


def build_chain(p: ModelParams, schedule: Schedule, K: int,
                majority_from: int | None = 1) -> Chain:
    """Assemble the chain for k = 1..K (plus the look-ahead record K+1).

    The majority condition is enforced (ScheduleError) for k >= majority_from;
    pass None to record violations without raising.
    """
    if K < 1:
        raise DomainError("K must be at least 1")
    codes = chain_bridge_codes(p, K + 2)
    J_bar = {k: cs_interval(p, bridge_interval(p, codes[k])) for k in range(2, K + 3)}
    raw = [_assemble(p, schedule, k, codes[k], J_bar[k + 1]) for k in range(1, K + 2)]
    records = []
    for rec, nxt in zip(raw, raw[1:]):
        z_hat = nxt.J_hat.mid
        t = p.a2 * (z_hat - rec.z_hit)
        records.append(ChainRecord(**{**rec.__dict__, "t_next": t, "z_hat_next": z_hat}))
    if majority_from is not None:
        for rec in records + [raw[-1]]:
            if rec.k >= majority_from and not rec.majority_holds():
                w = rec.w_hat
                raise ScheduleError(f"majority fails: {w.ones} ones vs {w.zeros} zeros", rec.k)
    return Chain(p, schedule, tuple(records), raw[-1])


# ---------------------------------------------------------------- checks

def check_record(p: ModelParams, rec: ChainRecord) -> dict[str, bool]:
    """Soundness checks for one record, all exact."""
    k, L = rec.k, p.L
    out = {}
    if rec.t_next is not None:
        out["t_bound"] = abs(rec.t_next) < p.lambda_u ** -(p.n0 + k + 1 + L * (k + 1))
    out["hit"] = rec.z_hit in rec.J_bar_next
    out["covers_landing"] = rec.J_final.contains(landing_interval(p))
    out["w_bar_length"] = len(rec.w_bar) == p.n0 + k + L * k
    out["majority"] = rec.majority_holds()
    out["quadratic"] = rec.quadratic_holds()
    out["alpha_bounded"] = len(rec.alpha) <= max_adjustment_length(p)
    return out


def growth_onset(chain: Chain, eta: Fraction) -> int | None:
    """Least k0 with n_hat_{k+1} < (1+eta) n_hat_k for all built k >= k0.

    n_hat is not monotone: the pullback code length jumps around.
    """
    n = [chain[k].n_hat for k in range(1, chain.K + 2)]
    k0 = None
    for k in range(chain.K, 0, -1):
        a, b = n[k - 1], n[k]
        if b < (1 + eta) * a:
            k0 = k
        else:
            break
    return k0
