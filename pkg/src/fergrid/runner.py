"""Experiment orchestration: cohort build, tick loop, file outputs.

Determinism contract: every random draw comes from a generator derived
from (run seed, purpose tag, tick, agent id) via SeedSequence, so draws
never depend on iteration order. The only order-sensitive steps are the
two permutation phases (perceive/train and move), and those use one
seeded permutation per tick.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .agents import (
    Agent,
    PerceptionEvent,
    display,
    perceive_neighbors,
    peer_learn,
    self_train,
    trust_update,
    valence_decision,
)
from .adapter import init_params
from .config import ExperimentConfig, serialize_config
from .corpus import EmbeddingStore, generate_synthetic, load_store
from .errors import ConfigError, ContractError
from .lattice import Occupancy, Torus, free_adjacent, moore_neighbors
from .metrics import BlockAccumulator, BlockMetrics, degradation_table
from .schedule import BlurSchedule

# SeedSequence purpose tags; never reuse or renumber.
TAG_COHORT = 0
TAG_INIT = 1
TAG_DISPLAY = 2
TAG_TRAIN = 3
TAG_MOVE = 4
TAG_PERM = 5

_RUNTIME_DTYPE = np.float32


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one (purpose, tick, agent) slot."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *path))))


@dataclass
class RunOutput:
    run_id: str
    out_dir: str
    manifest_path: str
    metrics_path: str
    degradation_path: str
    snapshot_path: str
    blocks: list[BlockMetrics] = field(repr=False)
    degradation: list[tuple[int, float]] = field(repr=False)
    agents: list[Agent] = field(repr=False)


def open_store(cfg: ExperimentConfig) -> EmbeddingStore:
    """Load or generate the embedding store named by the config."""
    cfg = cfg.resolved()
    if cfg.source == "file":
        return load_store(cfg.store_path)
    return generate_synthetic(cfg.synthetic)


def _check_store_coverage(cfg: ExperimentConfig, store: EmbeddingStore) -> None:
    needed = sorted({0, *cfg.sigma_levels})
    missing = [s for s in needed if s not in store.sigma_levels]
    if missing:
        raise ConfigError(f"store lacks sigma levels {missing}")
    for name in cfg.cohort:
        try:
            store.group_index(name)
        except KeyError:
            raise ConfigError(
                f"cohort group {name!r} not in store groups {list(store.groups)}"
            ) from None


def build_cohort(cfg: ExperimentConfig, store: EmbeddingStore,
                 seed: int) -> tuple[list[Agent], Occupancy, Torus]:
    """Create agents with unique identities and collision-free positions.

    Identities are sampled without replacement within each group; cell
    assignment is a uniform draw of distinct cells. Adapter weights get
    per-agent derived seeds.
    """
    torus = Torus(cfg.grid_width, cfg.grid_height)
    rng = substream(seed, TAG_COHORT)
    agents: list[Agent] = []
    aid = 0
    for name, count in cfg.cohort.items():
        g = store.group_index(name)
        available = store.identities_per_group[g]
        if count > available:
            raise ConfigError(
                f"cohort.{name} = {count} exceeds the {available} identities in the store")
        identities = rng.choice(available, size=count, replace=False)
        for ident in identities:
            ident = int(ident)
            expr_set = store.expression_set(g, ident)
            if not expr_set:
                raise ConfigError(f"identity {ident} of group {name} has no expressions")
            params, opt = init_params(store.dim, cfg.adapter.hidden,
                                      (seed, TAG_INIT, aid), dtype=_RUNTIME_DTYPE)
            agents.append(Agent(
                id=aid, group=g, identity=ident, expression_set=expr_set,
                position=(-1, -1), params=params, opt=opt,
            ))
            aid += 1
    cell_indices = rng.choice(torus.cells, size=len(agents), replace=False)
    cells = torus.all_positions()
    occupancy = Occupancy()
    for agent, idx in zip(agents, cell_indices):
        agent.position = cells[int(idx)]
        occupancy.place(agent.id, agent.position)
    return agents, occupancy, torus


def _snapshot_due(t: int, stride: int | None) -> bool:
    if stride is not None:
        return t % stride == 0
    return t < 10 or t % 50 == 0


def _snapshot_record(t: int, sigma: int, agents: list[Agent],
                     labels: dict[int, int], group_names) -> str:
    entries = [{
        "id": a.id,
        "group": group_names[a.group],
        "pos": [a.position[0], a.position[1]],
        "label": int(labels[a.id]),
        "trust": round(a.trust, 6),
    } for a in agents]
    return json.dumps({"t": t, "sigma": sigma, "agents": entries},
                      separators=(",", ":"))


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_metrics_csv(path: str, run_id: str, cohort: str,
                      blocks: list[BlockMetrics]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run_id,cohort,block,sigma,view,n_events,macro_f1,mean_conf,ece\n")
        for b in blocks:
            for view_name, vm in b.views.items():
                fh.write(",".join([
                    run_id, cohort, str(b.block), str(b.sigma), view_name,
                    str(vm.n_events), _fmt(vm.macro_f1), _fmt(vm.mean_conf),
                    _fmt(vm.ece),
                ]) + "\n")


def write_degradation_csv(path: str, run_id: str, cohort: str,
                          table: list[tuple[int, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run_id,cohort,sigma,delta\n")
        for sigma, delta in table:
            fh.write(f"{run_id},{cohort},{sigma},{delta!r}\n")


def run_experiment(cfg: ExperimentConfig, on_tick_end=None) -> RunOutput:
    """Execute one seeded run and write all artifacts under cfg.out_dir.

    The per-tick contract:
      1. every agent draws this tick's display (order-independent substreams);
      2. in a seeded permutation, each agent classifies all occupied Moore
         neighbors, then (while learning) trains on its own sample and on
         confident peer samples;
      3. in the same permutation, each agent decides movement from its
         perceived neighborhood valence, moves, and updates its trust trace;
      4. at t = t_learn all agents freeze for good.

    `on_tick_end(t, sigma, agents)` runs after phase 3, for diagnostics.
    """
    cfg = cfg.resolved()
    cfg.validate()
    store = open_store(cfg)
    store.validate()
    _check_store_coverage(cfg, store)

    schedule = BlurSchedule(cfg.t_learn, cfg.t_block, cfg.sigma_levels)
    agents, occupancy, torus = build_cohort(cfg, store, cfg.seed)
    group_names = store.groups
    windows = schedule.windows()
    run_id = cfg.run_id()
    cohort = cfg.cohort_label()

    os.makedirs(cfg.out_dir, exist_ok=True)
    manifest_path = os.path.join(cfg.out_dir, "manifest.cfg")
    metrics_path = os.path.join(cfg.out_dir, "metrics.csv")
    degradation_path = os.path.join(cfg.out_dir, "degradation.csv")
    snapshot_path = os.path.join(cfg.out_dir, "snapshots.jsonl")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_config(cfg))

    blocks: list[BlockMetrics] = []
    window_iter = iter(windows)
    current = next(window_iter)
    acc = BlockAccumulator(current.index, current.sigma, current.phase,
                           current.start, current.end, cfg.ece_bins)

    by_id = {a.id: a for a in agents}
    neighbors_of = {pos: moore_neighbors(torus, pos) for pos in torus.all_positions()}

    snap_fh = open(snapshot_path, "w", encoding="utf-8", newline="\n")
    try:
        for t in range(schedule.total_ticks):
            while t >= current.end:
                blocks.append(acc.finalize(group_names))
                current = next(window_iter)
                acc = BlockAccumulator(current.index, current.sigma, current.phase,
                                       current.start, current.end, cfg.ece_bins)
            sigma = schedule.sigma_at(t)
            if t == cfg.t_learn:
                for agent in agents:
                    agent.frozen = True

            # phase 1: simultaneous displays
            labels: dict[int, int] = {}
            vectors: dict[int, np.ndarray] = {}
            for agent in agents:
                rng_d = substream(cfg.seed, TAG_DISPLAY, t, agent.id)
                label, x = display(agent, sigma, store, rng_d)
                labels[agent.id] = label
                vectors[agent.id] = x

            order = substream(cfg.seed, TAG_PERM, t).permutation(len(agents))
            # independent recount target for the event accounting invariant
            expected_events = sum(
                1 for a in agents for pos in neighbors_of[a.position]
                if not occupancy.is_free(pos))

            # phase 2: perceive, then learn while unfrozen
            events_of: dict[int, list[PerceptionEvent]] = {}
            for idx in order:
                agent = agents[int(idx)]
                neighbor_displays = []
                for pos in neighbors_of[agent.position]:
                    occupant = occupancy.agent_at(pos)
                    if occupant is None:
                        continue
                    neighbor = by_id[occupant]
                    neighbor_displays.append(
                        (neighbor, labels[neighbor.id], vectors[neighbor.id]))
                events = perceive_neighbors(agent, t, sigma, neighbor_displays,
                                            cfg.adapter)
                events_of[agent.id] = events
                for event in events:
                    acc.add(event)
                if not agent.frozen:
                    rng_t = substream(cfg.seed, TAG_TRAIN, t, agent.id)
                    self_train(agent, labels[agent.id], vectors[agent.id],
                               cfg.adapter, rng_t)
                    for event, (neighbor, _, x) in zip(events, neighbor_displays):
                        peer_learn(agent, event, x, cfg.adapter,
                                   cfg.peer_threshold, rng_t)
            emitted = sum(len(ev) for ev in events_of.values())
            if emitted != expected_events:
                raise ContractError(
                    f"tick {t}: {emitted} events emitted, {expected_events} neighbors seen")

            # phase 3: move, then refresh the trust trace
            for idx in order:
                agent = agents[int(idx)]
                rng_m = substream(cfg.seed, TAG_MOVE, t, agent.id)
                free = free_adjacent(torus, occupancy, agent.position)
                intent = valence_decision(
                    agent, events_of[agent.id], free, rng_m,
                    cfg.move_prob, cfg.valence_threshold, cfg.valence_basis)
                if intent.target is not None and occupancy.try_move(agent.id, intent.target):
                    agent.position = intent.target
                trust_update(agent, events_of[agent.id], cfg.trust_lambda)

            if _snapshot_due(t, cfg.snapshot_stride):
                snap_fh.write(_snapshot_record(t, sigma, agents, labels,
                                               group_names) + "\n")
            if on_tick_end is not None:
                on_tick_end(t, sigma, agents)
    finally:
        snap_fh.close()

    blocks.append(acc.finalize(group_names))
    if len(blocks) != len(windows):
        raise ContractError("reporting windows and finalized blocks disagree")

    table = degradation_table(blocks, relative=cfg.relative_degradation)
    write_metrics_csv(metrics_path, run_id, cohort, blocks)
    write_degradation_csv(degradation_path, run_id, cohort, table)

    return RunOutput(
        run_id=run_id,
        out_dir=cfg.out_dir,
        manifest_path=manifest_path,
        metrics_path=metrics_path,
        degradation_path=degradation_path,
        snapshot_path=snapshot_path,
        blocks=blocks,
        degradation=table,
        agents=agents,
    )
