"""Binary itineraries, u-bridges and gaps of the expanding factor, and the cs-IFS.

A bridge B(w) is the set of x whose first len(w) iterates under the
expanding branch maps follow w.  The contracting maps on the centre-stable
axis form an iterated function system; ``ifs_apply`` applies them in the
order the itinerary is read (first symbol first).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .model import ModelParams, branch_maps
from .numerics import RatInterval, affine_along, as_rat


@dataclass(frozen=True)
class Code:
    """A finite word over {0, 1}; the empty word is allowed."""

    symbols: str = ""

    def __post_init__(self):
        if isinstance(self.symbols, Code):
            object.__setattr__(self, "symbols", self.symbols.symbols)
        if set(self.symbols) - {"0", "1"}:
            raise DomainError(f"code {self.symbols!r} contains symbols other than 0 and 1")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Code(self.symbols[item])
        return self.symbols[item]

    def __add__(self, other):
        return Code(self.symbols + str(other))

    def __str__(self):
        return self.symbols

    @property
    def zeros(self) -> int:
        return self.symbols.count("0")

    @property
    def ones(self) -> int:
        return self.symbols.count("1")

    def majority_holds(self) -> bool:
        return self.ones <= self.zeros

    def to_json(self) -> str:
        return self.symbols


def _word(w) -> str:
    return w.symbols if isinstance(w, Code) else Code(w).symbols


def xi_affine(p: ModelParams, w) -> tuple[Fraction, Fraction]:
    """Slope and offset of the composed expanding map along w."""
    return affine_along(_word(w), branch_maps(p)["x"])


def bridge_interval(p: ModelParams, w) -> RatInterval:
    """B(w): preimage of [0, 1] under the composed expanding map."""
    slope, offset = xi_affine(p, w)
    a, b = -offset / slope, (1 - offset) / slope
    return RatInterval(min(a, b), max(a, b))


def gap_interval(p: ModelParams, w) -> RatInterval:
    """Open middle part of B(w) not covered by B(w0) and B(w1)."""
    slope, offset = xi_affine(p, w)
    inv = 1 / p.lambda_u
    a, b = (inv - offset) / slope, (1 - inv - offset) / slope
    return RatInterval(min(a, b), max(a, b), open=True)


def children(p: ModelParams, w) -> tuple[RatInterval, RatInterval]:
    w = _word(w)
    return bridge_interval(p, w + "0"), bridge_interval(p, w + "1")


def left_child_symbol(p: ModelParams, w) -> str:
    """The symbol whose child bridge lies to the left, by comparing midpoints exactly."""
    b0, b1 = children(p, w)
    return "0" if b0.mid < b1.mid else "1"


def right_child_symbol(p: ModelParams, w) -> str:
    return "1" if left_child_symbol(p, w) == "0" else "0"


def zeta_affine(p: ModelParams, w) -> tuple[Fraction, Fraction]:
    """Slope and offset of the cs-IFS composition, first symbol applied first."""
    return affine_along(_word(w), branch_maps(p)["z"])


def ifs_apply(p: ModelParams, w, z) -> Fraction:
    slope, offset = zeta_affine(p, w)
    return slope * as_rat(z) + offset


def ifs_image(p: ModelParams, w, iv: RatInterval) -> RatInterval:
    slope, offset = zeta_affine(p, w)
    return iv.affine_image(slope, offset)


def cs_interval(p: ModelParams, bridge: RatInterval) -> RatInterval:
    """J^cs = bridge / a2, the z-values the tangency sends into the bridge."""
    if not (0 < bridge.lo and bridge.hi < p.a2):
        raise DomainError(f"bridge {bridge} is not inside (0, a2)")
    return bridge.scale(1 / p.a2)


@dataclass(frozen=True)
class BridgeSeq:
    """Nested bridges  B~_0 ⊃ B~_1 ⊃ ...  with  B_k ⊂ B~_{k-1}  beside  B~_k.

    ``w_tilde[k]`` is the code of B~_k; ``w[k]`` (k >= 1) the code of B_k.
    B~_k is the left child of B~_{k-1} and B_k the right child, so every
    B_k sits to the right of all later bridges.
    """

    w_tilde: tuple[Code, ...]
    w: tuple[Code | None, ...]
    B_tilde: tuple[RatInterval, ...]
    B: tuple[RatInterval | None, ...]

    @property
    def K(self) -> int:
        return len(self.w) - 1


def build_bridge_seq(p: ModelParams, K: int) -> BridgeSeq:
    if K < 0:
        raise DomainError("K must be non-negative")
    seed = Code(p.w_tilde0)
    if len(seed) != p.n0:
        raise DomainError("seed code length differs from n0")
    w_tilde, w = [seed], [None]
    for _ in range(K):
        parent = w_tilde[-1]
        left = left_child_symbol(p, parent)
        right = "1" if left == "0" else "0"
        w_tilde.append(parent + left)
        w.append(parent + right)
    return BridgeSeq(
        w_tilde=tuple(w_tilde),
        w=tuple(w),
        B_tilde=tuple(bridge_interval(p, c) for c in w_tilde),
        B=(None,) + tuple(bridge_interval(p, c) for c in w[1:]),
    )


def descend_left(p: ModelParams, w, levels: int) -> Code:
    """Extend w by ``levels`` symbols, always moving into the left child bridge."""
    word = _word(w)
    slope, offset = xi_affine(p, word)
    lam = p.lambda_u
    for _ in range(levels):
        # children of the current bridge under the current affine map
        mid0 = (Fraction(1, 2) / lam - offset) / slope
        mid1 = (1 - Fraction(1, 2) / lam - offset) / slope
        s = "0" if mid0 < mid1 else "1"
        word += s
        if s == "0":
            slope, offset = lam * slope, lam * offset
        else:
            slope, offset = -lam * slope, lam * (1 - offset)
    return Code(word)
