"""Reshaping per-minute counts into consecutive blocks of averaged values."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ingest import HALF_LENGTH, N_MINUTES, MinuteCounts

BLOCK_SIZES = (2, 3, 5)


class Half(str, enum.Enum):
    FIRST = "first"
    SECOND = "second"
    FULL = "full"

    @property
    def minutes(self) -> tuple[range, ...]:
        if self is Half.FIRST:
            return (range(1, HALF_LENGTH + 1),)
        if self is Half.SECOND:
            return (range(HALF_LENGTH + 1, N_MINUTES + 1),)
        return (range(1, HALF_LENGTH + 1), range(HALF_LENGTH + 1, N_MINUTES + 1))

    @property
    def first_minute(self) -> int:
        return HALF_LENGTH + 1 if self is Half.SECOND else 1

    @property
    def length(self) -> int:
        return N_MINUTES if self is Half.FULL else HALF_LENGTH


@dataclass(frozen=True)
class BlockCounts:
    block_size: int
    half: Half
    values: np.ndarray
    blocks: tuple[tuple[int, ...], ...]  # member minutes of each block
    dropped_minutes: frozenset[int]

    @property
    def minutes(self) -> tuple[int, ...]:
        return tuple(m for block in self.blocks for m in block)

    @property
    def centers(self) -> np.ndarray:
        return np.array([np.mean(block) for block in self.blocks])

    def to_dict(self) -> dict:
        return {
            "block_size": self.block_size,
            "half": self.half.value,
            "values": [float(v) for v in self.values],
            "centers": [float(c) for c in self.centers],
            "spans": [[block[0], block[-1]] for block in self.blocks],
            "dropped_minutes": sorted(self.dropped_minutes),
        }


def _partition(minutes: range, block_size: int) -> tuple[list[tuple[int, ...]], list[int]]:
    usable = len(minutes) - len(minutes) % block_size
    blocks = [tuple(minutes[i:i + block_size]) for i in range(0, usable, block_size)]
    return blocks, list(minutes[usable:])


def reshape_blocks(counts: MinuteCounts, half: Half | str, block_size: int) -> BlockCounts:
    """Average counts over consecutive blocks, starting at the beginning of each half.

    Trailing minutes that do not fill a block (minute 45 and/or 90 for
    ``block_size=2``) are dropped. Blocks never cross the half-time boundary.
    """
    half = Half(half)
    if block_size not in BLOCK_SIZES:
        raise ValueError(f"block_size must be one of {BLOCK_SIZES}, got {block_size}")
    blocks, dropped = [], []
    for minutes in half.minutes:
        b, d = _partition(minutes, block_size)
        blocks.extend(b)
        dropped.extend(d)
    values = np.array([counts.counts[[m - 1 for m in block]].mean() for block in blocks])
    return BlockCounts(block_size, half, values, tuple(blocks), frozenset(dropped))


def block_probs(probs, blocking: BlockCounts) -> np.ndarray:
    """Collapse per-minute probabilities onto the blocks of ``blocking``.

    ``probs`` is either aligned with the minutes the blocking used, or spans the
    whole of ``blocking.half`` (dropped minutes are then removed). Each block
    gets the mean of its members' probabilities, renormalised to sum to 1.
    """
    p = np.asarray(probs, dtype=float)
    used = blocking.minutes
    if len(p) == blocking.half.length and len(p) != len(used):
        p = p[[m - blocking.half.first_minute for m in used]]
    elif len(p) != len(used):
        raise ValueError(f"probs has length {len(p)}, blocking uses {len(used)} minutes")
    size = blocking.block_size
    means = p.reshape(-1, size).mean(axis=1)
    return means / means.sum()
