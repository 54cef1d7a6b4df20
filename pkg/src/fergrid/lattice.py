"""Toroidal grid geometry, hard-exclusion occupancy, and movement."""

from __future__ import annotations

from dataclasses import dataclass

Position = tuple[int, int]

# Row-major over (dy, dx), matching the deterministic neighbor order everywhere.
_MOORE_OFFSETS = (
    (-1, -1), (0, -1), (1, -1),
    (-1, 0), (1, 0),
    (-1, 1), (0, 1), (1, 1),
)


@dataclass(frozen=True)
class Torus:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("torus dimensions must be >= 1")

    def wrap(self, x: int, y: int) -> Position:
        return x % self.width, y % self.height

    @property
    def cells(self) -> int:
        return self.width * self.height

    def all_positions(self) -> list[Position]:
        return [(x, y) for y in range(self.height) for x in range(self.width)]


def moore_neighbors(torus: Torus, pos: Position) -> list[Position]:
    """The wrap-around 8-neighborhood, deduplicated, never containing pos.

    On degenerate tori (width or height < 3) wrapped offsets can collide;
    first occurrence wins so the order stays deterministic.
    """
    x, y = pos
    out: list[Position] = []
    seen = {pos}
    for dx, dy in _MOORE_OFFSETS:
        q = torus.wrap(x + dx, y + dy)
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


class Occupancy:
    """Bidirectional cell<->agent map enforcing one agent per cell."""

    def __init__(self):
        self._by_pos: dict[Position, int] = {}
        self._by_agent: dict[int, Position] = {}

    def place(self, agent_id: int, pos: Position) -> None:
        if pos in self._by_pos:
            raise ValueError(f"cell {pos} already occupied by agent {self._by_pos[pos]}")
        if agent_id in self._by_agent:
            raise ValueError(f"agent {agent_id} already placed")
        self._by_pos[pos] = agent_id
        self._by_agent[agent_id] = pos

    def position_of(self, agent_id: int) -> Position:
        return self._by_agent[agent_id]

    def agent_at(self, pos: Position) -> int | None:
        return self._by_pos.get(pos)

    def is_free(self, pos: Position) -> bool:
        return pos not in self._by_pos

    def try_move(self, agent_id: int, dest: Position) -> bool:
        """Relocate if dest is free at call time; otherwise leave state untouched."""
        src = self._by_agent[agent_id]
        if dest in self._by_pos:
            return False
        del self._by_pos[src]
        self._by_pos[dest] = agent_id
        self._by_agent[agent_id] = dest
        return True

    def positions(self) -> dict[int, Position]:
        return dict(self._by_agent)

    def __len__(self) -> int:
        return len(self._by_agent)

    def check_consistent(self) -> None:
        assert len(self._by_pos) == len(self._by_agent)
        for pos, aid in self._by_pos.items():
            assert self._by_agent[aid] == pos


def free_adjacent(torus: Torus, occupancy: Occupancy, pos: Position) -> list[Position]:
    """Unoccupied Moore neighbors of pos, in the deterministic neighbor order."""
    return [q for q in moore_neighbors(torus, pos) if occupancy.is_free(q)]
