"""Piecewise-constant blur schedule: a learning phase followed by evaluation blocks."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RangeError


@dataclass(frozen=True)
class Block:
    """One metric window: either a slice of the learning phase or an eval block.

    `index` numbers all reporting windows of the run consecutively from 0;
    `eval_index` is the 1-based evaluation block number (None while learning).
    Intervals are half-open: [start, end).
    """

    phase: str  # "learn" | "eval"
    index: int
    eval_index: int | None
    sigma: int
    start: int
    end: int


@dataclass(frozen=True)
class BlurSchedule:
    t_learn: int = 1000
    t_block: int = 200
    sigma_sequence: tuple[int, ...] = (0, 1, 2, 3, 4)

    def __post_init__(self):
        if self.t_learn < 0:
            raise ValueError("t_learn must be >= 0")
        if self.t_block < 1:
            raise ValueError("t_block must be >= 1")
        seq = tuple(self.sigma_sequence)
        if not seq or list(seq) != sorted(set(seq)):
            raise ValueError("sigma_sequence must be non-empty and strictly increasing")
        object.__setattr__(self, "sigma_sequence", seq)

    @property
    def total_ticks(self) -> int:
        return self.t_learn + len(self.sigma_sequence) * self.t_block

    def _check_range(self, t: int) -> None:
        if not 0 <= t < self.total_ticks:
            raise RangeError(f"tick {t} outside run range [0, {self.total_ticks})")

    def sigma_at(self, t: int) -> int:
        """Blur level in force at tick t: 0 while learning, then the block's sigma."""
        self._check_range(t)
        if t < self.t_learn:
            return 0
        return self.sigma_sequence[(t - self.t_learn) // self.t_block]

    def block_of(self, t: int) -> Block:
        """The reporting window containing t (boundary ticks open the new block)."""
        self._check_range(t)
        for block in self.windows():
            if block.start <= t < block.end:
                return block
        raise AssertionError("windows() must partition the run range")

    def windows(self) -> list[Block]:
        """All reporting windows in order; learning is split into t_block slices.

        Splitting the learning phase only affects metric reporting, never
        the sigma schedule itself.
        """
        out: list[Block] = []
        index = 0
        start = 0
        while start < self.t_learn:
            end = min(start + self.t_block, self.t_learn)
            out.append(Block("learn", index, None, 0, start, end))
            index += 1
            start = end
        for b, sigma in enumerate(self.sigma_sequence, start=1):
            begin = self.t_learn + (b - 1) * self.t_block
            out.append(Block("eval", index, b, sigma, begin, begin + self.t_block))
            index += 1
        return out
