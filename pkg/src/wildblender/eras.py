"""Era boundaries k_1 < k_2 < ... for switching between two averaging targets.

Era s is the index block k_s <= k < k_{s+1}.  Boundaries are chosen greedily:
k_{s+1} is the least index for which the squares in era s outweigh s times
all the squares before it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


def _next_boundary(ks: list[int]) -> int:
    s = len(ks) - 1  # era index of the block starting at ks[-1]
    s += 1
    earlier = sum(k * k for k in range(ks[0], ks[-1]))
    need = s * earlier
    total, k = 0, ks[-1]
    while True:
        total += k * k
        k += 1
        if total > need:
            return k


@dataclass(frozen=True)
class EraSeq:
    """Boundaries ``ks = (k_1, ..., k_{S+1})`` describing eras 1..S."""

    ks: tuple[int, ...]

    def __post_init__(self):
        if len(self.ks) < 2:
            raise DomainError("an era sequence needs at least one era")
        if any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            raise DomainError("era boundaries must increase")

    @property
    def k1(self) -> int:
        return self.ks[0]

    @property
    def eras(self) -> int:
        return len(self.ks) - 1

    def era_of(self, k: int) -> int | None:
        for s in range(1, len(self.ks)):
            if self.ks[s - 1] <= k < self.ks[s]:
                return s
        return None

    def block(self, s: int) -> range:
        return range(self.ks[s - 1], self.ks[s])

    def to_json(self) -> dict:
        return {"k": list(self.ks)}


def era_sequence(k1: int, eras: int) -> EraSeq:
    if k1 < 1:
        raise DomainError("k_1 must be at least 1")
    if eras < 1:
        raise DomainError("need at least one era")
    ks = [k1]
    while len(ks) < eras + 1:
        ks.append(_next_boundary(ks))
    return EraSeq(tuple(ks))


def era_index(k1: int, k: int) -> int | None:
    """Era containing k for the greedy sequence starting at k1 (extended as needed)."""
    if k < k1:
        return None
    ks = [k1]
    while ks[-1] <= k:
        ks.append(_next_boundary(ks))
    return len(ks) - 1
