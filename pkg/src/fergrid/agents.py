"""Per-tick agent behaviors: display, perceive, learn, decide movement.

Agents are plain mutable records owned by the simulation loop. Every
stochastic operation takes an explicit Generator so the caller controls
substream assignment; each function documents exactly how many draws it
consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .adapter import (
    AdapterParams,
    OptimizerState,
    TrainingConfig,
    loss_and_grad,
    adamw_step,
    draw_dropout_mask,
    predict,
)
from .corpus import EmbeddingStore, sample_display
from .labels import NEGATIVE, POSITIVE
from .lattice import Position


class PerceptionEvent(NamedTuple):
    tick: int
    perceiver: int
    perceiver_group: int
    target: int
    target_group: int
    sigma: int
    true_label: int
    predicted_label: int
    confidence: float


@dataclass
class Agent:
    """One embodied classifier on the lattice.

    `frozen` tracks the schedule phase: false during learning, true forever
    after. `trust` is a smoothed correctness trace exported for rendering;
    nothing in the simulation reads it back.
    """

    id: int
    group: int
    identity: int
    expression_set: tuple[int, ...]
    position: Position
    params: AdapterParams
    opt: OptimizerState
    frozen: bool = False
    trust: float = 0.5


def display(agent: Agent, sigma: int, store: EmbeddingStore,
            rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Choose a displayed expression uniformly and fetch one sample vector.

    Consumes exactly two draws: label index, then instance index.
    """
    idx = int(rng.integers(len(agent.expression_set)))
    label = agent.expression_set[idx]
    x = sample_display(store, agent.group, agent.identity, label, sigma, rng)
    return label, x


def perceive_neighbors(agent: Agent, tick: int, sigma: int,
                       neighbor_displays, cfg: TrainingConfig | None = None,
                       ) -> list[PerceptionEvent]:
    """Classify every neighbor's current display in eval mode.

    `neighbor_displays` is a list of (target_agent, true_label, vector)
    triples rendered this tick. Ground-truth labels ride along in the
    events for metric computation and peer learning; the perceiver's own
    movement decisions never read them.
    """
    events = []
    for target, label, x in neighbor_displays:
        pred = predict(agent.params, x, cfg)
        events.append(PerceptionEvent(
            tick=tick,
            perceiver=agent.id,
            perceiver_group=agent.group,
            target=target.id,
            target_group=target.group,
            sigma=sigma,
            true_label=int(label),
            predicted_label=int(pred.label),
            confidence=pred.confidence,
        ))
    return events


def self_train(agent: Agent, label: int, x: np.ndarray, cfg: TrainingConfig,
               rng: np.random.Generator) -> float:
    """One optimizer step on the agent's own displayed sample."""
    mask = draw_dropout_mask(agent.params.hidden, cfg.dropout, rng,
                             dtype=agent.params.data.dtype)
    loss, grads = loss_and_grad(agent.params, x, label, cfg, mask)
    adamw_step(agent.params, agent.opt, grads, cfg)
    return loss


def peer_learn(agent: Agent, event: PerceptionEvent, x: np.ndarray,
               cfg: TrainingConfig, peer_threshold: float,
               rng: np.random.Generator) -> bool:
    """Train on a neighbor's sample when classified with high confidence.

    The training label is the neighbor's true displayed expression, not the
    perceiver's guess. Frozen agents never learn. Consumes one mask draw
    only when the step is applied.
    """
    if agent.frozen or event.confidence < peer_threshold:
        return False
    mask = draw_dropout_mask(agent.params.hidden, cfg.dropout, rng,
                             dtype=agent.params.data.dtype)
    _, grads = loss_and_grad(agent.params, x, event.true_label, cfg, mask)
    adamw_step(agent.params, agent.opt, grads, cfg)
    return True


class MoveIntent(NamedTuple):
    kind: str  # "avoid" | "random" | "stay"
    target: Position | None  # None means stay put


def valence_decision(agent: Agent, events: list[PerceptionEvent],
                     free_cells: list[Position], rng: np.random.Generator,
                     move_prob: float = 0.7, valence_threshold: int = 2,
                     valence_basis: str = "predicted") -> MoveIntent:
    """Decide this tick's movement from the perceived neighborhood valence.

    neg - pos >= valence_threshold forces an avoidance step; otherwise the
    agent takes a blind random step with probability move_prob. Both kinds
    pick uniformly among currently free adjacent cells and degrade to stay
    when boxed in.

    Draw order is pinned: avoid consumes one cell-index draw; the other
    branch consumes one Bernoulli draw, then one cell-index draw only if
    moving. Labels counted are the agent's predictions unless
    valence_basis="true".
    """
    if valence_basis == "predicted":
        labels = [e.predicted_label for e in events]
    elif valence_basis == "true":
        labels = [e.true_label for e in events]
    else:
        raise ValueError(f"unknown valence_basis {valence_basis!r}")
    neg = sum(1 for lab in labels if lab in NEGATIVE)
    pos = sum(1 for lab in labels if lab in POSITIVE)

    if neg - pos >= valence_threshold:
        if not free_cells:
            return MoveIntent("avoid", None)
        return MoveIntent("avoid", free_cells[int(rng.integers(len(free_cells)))])
    if rng.random() < move_prob:
        if not free_cells:
            return MoveIntent("random", None)
        return MoveIntent("random", free_cells[int(rng.integers(len(free_cells)))])
    return MoveIntent("stay", None)


def trust_update(agent: Agent, events: list[PerceptionEvent],
                 trust_lambda: float = 0.1) -> float:
    """EMA of the agent's per-tick prediction correctness, for export only.

    Ticks with no perceptions leave the trace untouched.
    """
    if events:
        correct = sum(1 for e in events if e.predicted_label == e.true_label)
        frac = correct / len(events)
        agent.trust = (1.0 - trust_lambda) * agent.trust + trust_lambda * frac
    return agent.trust
