"""Index sequences driving the expanded commutator supertrace.

A valid sequence of order k is s = (s_1, ..., s_{2k}) over {1,2,3,4} with
s_1 != 4, s_{2k} != 3, and s_l = 3 exactly when s_{l+1} = 4.  Slots carrying
1 or 2 select the singular kernel; each (3,4) block selects one insertion of
the rank-two harmonic kernel.  The weight w counts the 3s, the index map
records which point each slot's projection factor is evaluated at, and the
sign bookkeeping matches the block expansion of the commutator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

__all__ = [
    "BlockSequence",
    "enumerate_gamma",
    "generate_gamma",
    "iota",
    "expansion_sign",
    "domino_placements",
]

_MAX_K = 6


@dataclass(frozen=True)
class BlockSequence:
    """One admissible index sequence with its derived attributes."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if not is_valid(self.entries):
            raise ValueError(f"invalid sequence: {self.entries}")

    @property
    def k(self) -> int:
        return len(self.entries) // 2

    @cached_property
    def weight(self) -> int:
        return sum(1 for s in self.entries if s == 3)

    @cached_property
    def indexmap(self) -> tuple[int, ...]:
        """Raw slot-to-point map: i_l = l for s_l in {1,3}, l+1 for {2,4} (1-based).

        The final value may be 2k+1, to be identified with 1 when indexing
        points; the parity of sum(i_l - l) is the same either way.
        """
        return tuple(l if s in (1, 3) else l + 1 for l, s in enumerate(self.entries, start=1))

    @cached_property
    def sign(self) -> complex:
        return iota(self)


def is_valid(entries: tuple[int, ...]) -> bool:
    m = len(entries)
    if m == 0 or m % 2:
        return False
    if any(s not in (1, 2, 3, 4) for s in entries):
        return False
    if entries[0] == 4 or entries[-1] == 3:
        return False
    for l in range(m - 1):
        if (entries[l] == 3) != (entries[l + 1] == 4):
            return False
    # a 4 is only ever produced by a preceding 3
    for l in range(1, m):
        if entries[l] == 4 and entries[l - 1] != 3:
            return False
    return True


def enumerate_gamma(k: int) -> list[BlockSequence]:
    """All admissible sequences of order k by exhaustive filtering.

    Deterministic lexicographic order.  This is the normative enumeration;
    ``generate_gamma`` must agree with it exactly.
    """
    if not 1 <= k <= _MAX_K:
        raise ValueError(f"k must be in 1..{_MAX_K}, got {k}")
    out = []
    for entries in itertools.product((1, 2, 3, 4), repeat=2 * k):
        if is_valid(entries):
            out.append(BlockSequence(entries))
    return out


def generate_gamma(k: int) -> list[BlockSequence]:
    """Constructive enumeration: place disjoint (3,4) dominoes among {1,2} fillers."""
    if not 1 <= k <= _MAX_K:
        raise ValueError(f"k must be in 1..{_MAX_K}, got {k}")
    out = []
    for placement in domino_placements(2 * k):
        covered = set()
        for p in placement:
            covered.update((p, p + 1))
        free = [l for l in range(2 * k) if l not in covered]
        for fill in itertools.product((1, 2), repeat=len(free)):
            entries = [0] * (2 * k)
            for p in placement:
                entries[p], entries[p + 1] = 3, 4
            for pos, val in zip(free, fill):
                entries[pos] = val
            out.append(BlockSequence(tuple(entries)))
    return sorted(out, key=lambda s: s.entries)


def domino_placements(m: int) -> list[tuple[int, ...]]:
    """All sets of disjoint (l, l+1) dominoes in 0..m-1, no wrap-around."""
    placements = [()]
    for count in range(1, m // 2 + 1):
        for combo in itertools.combinations(range(m - 1), count):
            if all(b - a >= 2 for a, b in zip(combo, combo[1:])):
                placements.append(combo)
    return placements


def iota(seq: BlockSequence) -> complex:
    """Unit phase (-1)^{sum(i_l - l)} * i^{weight} attached to a sequence."""
    shift = sum(1 for s in seq.entries if s in (2, 4))
    return (-1.0) ** shift * 1j ** seq.weight


def expansion_sign(seq: BlockSequence) -> float:
    """Coefficient of the sequence in the block expansion of the commutator power.

    Each slot with s in {2,4} flips the sign; each (3,4) block contributes
    (-i)^2 = -1 in total, which the {2,4} count already records, so no
    residual factor of i remains.
    """
    shift = sum(1 for s in seq.entries if s in (2, 4))
    return (-1.0) ** shift
