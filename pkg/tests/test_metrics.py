"""Macro-F1 conventions, ECE, block accumulation, degradation tables."""

import numpy as np
import pytest

from fergrid.agents import PerceptionEvent
from fergrid.errors import ContractError, DegenerateBaselineError
from fergrid.labels import N_CLASSES
from fergrid.metrics import (
    BlockAccumulator,
    BlockMetrics,
    ViewMetrics,
    degradation_table,
    ece,
    hand_examples,
    macro_f1,
)


def brute_force_macro_f1(mat):
    """Independent per-class reimplementation used as the oracle."""
    scores = []
    for c in range(N_CLASSES):
        tp = float(mat[c][c])
        fn = float(sum(mat[c])) - tp
        fp = float(sum(row[c] for row in mat)) - tp
        if tp == 0.0 and fn == 0.0 and fp == 0.0:
            continue
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        scores.append(2.0 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0)
    if not scores:
        return None
    return sum(scores) / len(scores)


def random_confusions(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        mat = rng.integers(0, 6, size=(N_CLASSES, N_CLASSES))
        # knock out rows and columns so the exclusion path gets exercised
        for c in rng.integers(0, N_CLASSES, size=rng.integers(0, 4)):
            mat[c, :] = 0
        for c in rng.integers(0, N_CLASSES, size=rng.integers(0, 4)):
            mat[:, c] = 0
        yield mat


def test_hand_examples_reproduce_exactly():
    for mat, expected in hand_examples():
        assert macro_f1(mat) == expected


def test_macro_f1_matches_brute_force():
    for mat in random_confusions(300, seed=7):
        expected = brute_force_macro_f1(mat.tolist())
        got = macro_f1(mat)
        if expected is None:
            assert got is None
        else:
            assert abs(got - expected) <= 1e-12


def test_macro_f1_empty_matrix_is_undefined():
    assert macro_f1(np.zeros((N_CLASSES, N_CLASSES), dtype=int)) is None


def test_macro_f1_zero_denominator_counts_as_zero():
    mat = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    mat[0, 1] = 1  # class 0 has support but no hits; class 1 only false positives
    assert macro_f1(mat) == 0.0


def test_macro_f1_shape_check():
    with pytest.raises(ValueError):
        macro_f1(np.zeros((3, 3), dtype=int))


def test_ece_examples():
    assert ece([1.0, 1.0], [1, 1]) == 0.0
    got = ece([0.8, 0.8], [1, 0])
    assert abs(got - 0.3) < 1e-12
    # one bin degenerates to |overall accuracy - mean confidence|
    conf = [0.2, 0.5, 0.9, 0.6]
    hits = [0, 1, 1, 0]
    assert abs(ece(conf, hits, n_bins=1) - abs(0.5 - np.mean(conf))) < 1e-12


def test_ece_edge_cases():
    assert ece([], []) is None
    assert ece([1.0], [1]) == 0.0  # confidence 1.0 clamps into the top bin
    with pytest.raises(ValueError):
        ece([0.5], [1], n_bins=0)
    with pytest.raises(ValueError):
        ece([0.5, 0.5], [1])


def make_event(tick=0, pg=0, tg=0, true=0, pred=0, conf=0.5):
    return PerceptionEvent(tick=tick, perceiver=0, perceiver_group=pg,
                           target=1, target_group=tg, sigma=0,
                           true_label=true, predicted_label=pred,
                           confidence=conf)


def test_accumulator_rejects_cross_window_events():
    acc = BlockAccumulator(block=0, sigma=0, phase="learn", start=10, end=20)
    acc.add(make_event(tick=10))
    acc.add(make_event(tick=19))
    with pytest.raises(ContractError):
        acc.add(make_event(tick=20))
    with pytest.raises(ContractError):
        acc.add(make_event(tick=9))


def test_view_aggregation_consistency():
    rng = np.random.default_rng(3)
    acc = BlockAccumulator(block=0, sigma=1, phase="eval", start=0, end=100)
    for _ in range(400):
        acc.add(make_event(
            tick=int(rng.integers(100)),
            pg=int(rng.integers(2)), tg=int(rng.integers(2)),
            true=int(rng.integers(N_CLASSES)), pred=int(rng.integers(N_CLASSES)),
            conf=float(rng.uniform(1 / 7, 1.0)),
        ))
    block = acc.finalize(("western", "asian"))
    views = block.views
    assert views["global"].n_events == 400
    assert views["intra"].n_events + views["cross"].n_events == 400
    pair_counts = sum(v.n_events for name, v in views.items()
                      if name.startswith("pair:"))
    assert pair_counts == 400
    total = sum(mat for mat in block.pair_confusions.values())
    assert np.array_equal(block.global_confusion(), total)
    assert macro_f1(block.global_confusion()) == views["global"].macro_f1


def test_event_order_never_changes_metrics():
    rng = np.random.default_rng(11)
    events = [make_event(
        tick=int(rng.integers(50)),
        pg=int(rng.integers(2)), tg=int(rng.integers(2)),
        true=int(rng.integers(N_CLASSES)), pred=int(rng.integers(N_CLASSES)),
        conf=float(rng.uniform(1 / 7, 1.0)),
    ) for _ in range(200)]

    def run(order):
        acc = BlockAccumulator(block=0, sigma=0, phase="learn", start=0, end=50)
        for e in order:
            acc.add(e)
        return acc.finalize(("a", "b"))

    base = run(events)
    shuffled = list(events)
    rng.shuffle(shuffled)
    other = run(shuffled)
    assert set(base.views) == set(other.views)
    for name, vm in base.views.items():
        assert vm == other.views[name]


def eval_block(sigma, f1, block=5):
    views = {"global": ViewMetrics(n_events=10, macro_f1=f1, mean_conf=0.5, ece=0.1)}
    return BlockMetrics(block=block, sigma=sigma, phase="eval",
                        pair_confusions={}, views=views)


def test_degradation_relative_and_absolute():
    blocks = [eval_block(0, 0.70), eval_block(1, 0.35), eval_block(2, 0.84)]
    rel = dict(degradation_table(blocks, relative=True))
    assert rel[0] == 0.0
    assert abs(rel[1] - 0.5) < 1e-12
    assert rel[2] < 0.0  # improvements come out negative
    absolute = dict(degradation_table(blocks, relative=False))
    assert abs(absolute[1] - 0.35) < 1e-12


def test_degradation_ignores_learning_blocks():
    learn = BlockMetrics(block=0, sigma=0, phase="learn", pair_confusions={},
                         views={"global": ViewMetrics(10, 0.9, 0.5, 0.1)})
    blocks = [learn, eval_block(0, 0.6), eval_block(3, 0.3)]
    table = dict(degradation_table(blocks))
    assert abs(table[3] - 0.5) < 1e-12


def test_degradation_requires_clean_baseline():
    with pytest.raises(DegenerateBaselineError):
        degradation_table([eval_block(1, 0.5), eval_block(2, 0.4)])
    with pytest.raises(DegenerateBaselineError):
        degradation_table([eval_block(0, 0.0), eval_block(1, 0.4)])
    with pytest.raises(DegenerateBaselineError):
        degradation_table([eval_block(0, None), eval_block(1, 0.4)])
