"""Expression label set, its canonical index order, and the valence partition."""

from __future__ import annotations

import enum
from typing import NamedTuple


class Expression(enum.IntEnum):
    """The seven expression categories in canonical index order.

    The index mapping is fixed: it is used verbatim in the binary store
    format, in confusion-matrix axes, and in classifier outputs.
    """

    NEUTRAL = 0
    HAPPY = 1
    SAD = 2
    ANGER = 3
    DISGUST = 4
    FEAR = 5
    SURPRISE = 6


EXPRESSION_NAMES: tuple[str, ...] = tuple(e.name.lower() for e in Expression)
N_CLASSES = len(Expression)

# Valence partition driving the avoidance rule. Total and disjoint over Expression.
NEGATIVE = frozenset({Expression.ANGER, Expression.DISGUST, Expression.FEAR, Expression.SAD})
POSITIVE = frozenset({Expression.HAPPY, Expression.SURPRISE, Expression.NEUTRAL})


def expression_from_name(name: str) -> Expression:
    try:
        return Expression[name.upper()]
    except KeyError:
        raise ValueError(f"unknown expression name: {name!r}") from None


class CultureGroup(NamedTuple):
    """A named cultural group; `index` is its position in the store header."""

    name: str
    index: int
