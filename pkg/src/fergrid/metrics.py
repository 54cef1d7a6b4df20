"""Block-wise recognition metrics disaggregated by perceiver/target group.

Confusion matrices are 7x7 integer counts with rows = true label and
columns = predicted label. Views aggregate group pairs into intra
(perceiver group == target group), cross (differing groups), and global.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateBaselineError
from .labels import N_CLASSES


def macro_f1(confusion: np.ndarray) -> float | None:
    """Unweighted mean of per-class F1 scores.

    Classes with neither true nor predicted instances are excluded from the
    mean; classes with any support but a zero precision/recall denominator
    contribute 0. An all-empty matrix has no defined value (None).
    """
    confusion = np.asarray(confusion)
    if confusion.shape != (N_CLASSES, N_CLASSES):
        raise ValueError(f"confusion must be {N_CLASSES}x{N_CLASSES}")
    total = confusion.sum()
    if total == 0:
        return None
    scores = []
    for c in range(N_CLASSES):
        tp = float(confusion[c, c])
        fn = float(confusion[c, :].sum()) - tp
        fp = float(confusion[:, c].sum()) - tp
        if tp == 0.0 and fn == 0.0 and fp == 0.0:
            continue
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        scores.append(f1)
    return sum(scores) / len(scores)


def hand_examples() -> list[tuple[np.ndarray, float]]:
    """Three worked (confusion, expected macro-F1) pairs, derived by hand.

    Kept next to the implementation so oracle tests cannot drift from the
    stated conventions.

    1. Perfect diagonal: every class all-correct, per-class F1 = 1 -> 1.0.
    2. Two active classes. A: tp=1, fp=1, fn=0 -> prec 1/2, rec 1, F1 2/3.
       B: tp=1, fp=0, fn=1 -> prec 1, rec 1/2, F1 2/3. The five untouched
       classes are excluded -> (2/3 + 2/3) / 2 = 2/3.
    3. Constant prediction of one class over uniform truth (n per class):
       predicted class has prec 1/7, rec 1 -> F1 1/4; the other six have
       support but score 0 -> 0.25 / 7.
    """
    perfect = np.diag([3] * N_CLASSES)
    two_active = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    two_active[0, 0] = 1
    two_active[1, 0] = 1
    two_active[1, 1] = 1
    constant = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    constant[:, 2] = 4
    return [(perfect, 1.0), (two_active, 2 / 3), (constant, 0.25 / 7)]


def ece(confidences, correct, n_bins: int = 10) -> float | None:
    """Expected calibration error over equal-width confidence bins on [0, 1]."""
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    conf = np.asarray(confidences, dtype=float)
    hits = np.asarray(correct, dtype=float)
    if conf.shape != hits.shape:
        raise ValueError("confidences and correctness must align")
    n = conf.shape[0]
    if n == 0:
        return None
    bins = np.minimum((conf * n_bins).astype(int), n_bins - 1)
    total = 0.0
    for b in range(n_bins):
        sel = bins == b
        count = int(sel.sum())
        if count == 0:
            continue
        total += (count / n) * abs(hits[sel].mean() - conf[sel].mean())
    return total


@dataclass
class ViewMetrics:
    n_events: int
    macro_f1: float | None
    mean_conf: float | None
    ece: float | None


@dataclass
class BlockMetrics:
    """Finalized metrics for one reporting window."""

    block: int
    sigma: int
    phase: str
    pair_confusions: dict[tuple[int, int], np.ndarray] = field(repr=False)
    views: dict[str, ViewMetrics] = field(default_factory=dict)

    def global_confusion(self) -> np.ndarray:
        out = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        for mat in self.pair_confusions.values():
            out += mat
        return out


class BlockAccumulator:
    """Single-writer event sink for one reporting window."""

    def __init__(self, block: int, sigma: int, phase: str, start: int, end: int,
                 n_bins: int = 10):
        self.block = block
        self.sigma = sigma
        self.phase = phase
        self.start = start
        self.end = end
        self.n_bins = n_bins
        self._confusions: dict[tuple[int, int], np.ndarray] = {}
        self._conf: dict[tuple[int, int], list[float]] = {}
        self._hits: dict[tuple[int, int], list[bool]] = {}

    def add(self, event) -> None:
        """Record one perception event; the event's tick must fall in this window."""
        if not self.start <= event.tick < self.end:
            raise ContractError(
                f"event at tick {event.tick} does not belong to window "
                f"[{self.start}, {self.end})"
            )
        pair = (event.perceiver_group, event.target_group)
        mat = self._confusions.get(pair)
        if mat is None:
            mat = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
            self._confusions[pair] = mat
            self._conf[pair] = []
            self._hits[pair] = []
        mat[int(event.true_label), int(event.predicted_label)] += 1
        self._conf[pair].append(event.confidence)
        self._hits[pair].append(int(event.true_label) == int(event.predicted_label))

    def _view(self, pairs) -> ViewMetrics:
        mat = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        paired: list[tuple[float, bool]] = []
        for p in pairs:
            mat += self._confusions[p]
            paired.extend(zip(self._conf[p], self._hits[p]))
        # summation order is pinned by sorting, so metrics are invariant
        # to the order events arrived in
        paired.sort()
        conf = [c for c, _ in paired]
        hits = [h for _, h in paired]
        n = int(mat.sum())
        return ViewMetrics(
            n_events=n,
            macro_f1=macro_f1(mat) if n else None,
            mean_conf=float(np.mean(conf)) if conf else None,
            ece=ece(conf, hits, self.n_bins),
        )

    def finalize(self, group_names) -> BlockMetrics:
        """Compute the pair, intra, cross, and global views for this window."""
        pairs = sorted(self._confusions)
        views: dict[str, ViewMetrics] = {
            "intra": self._view([p for p in pairs if p[0] == p[1]]),
            "cross": self._view([p for p in pairs if p[0] != p[1]]),
            "global": self._view(pairs),
        }
        for pg, tg in pairs:
            views[f"pair:{group_names[pg]}->{group_names[tg]}"] = self._view([(pg, tg)])
        return BlockMetrics(
            block=self.block,
            sigma=self.sigma,
            phase=self.phase,
            pair_confusions={p: m.copy() for p, m in self._confusions.items()},
            views=views,
        )


def degradation_table(blocks: list[BlockMetrics], relative: bool = True) -> list[tuple[int, float]]:
    """Per-sigma drop of global eval Macro-F1 against the sigma=0 eval block.

    The baseline is the sigma=0 evaluation block (post-freeze), never the
    learning phase. Relative form (F1_0 - F1_s) / F1_0 by default; the
    absolute difference is available behind the flag.
    """
    eval_blocks = [b for b in blocks if b.phase == "eval"]
    baseline = next((b for b in eval_blocks if b.sigma == 0), None)
    if baseline is None:
        raise DegenerateBaselineError("no sigma=0 evaluation block present")
    f1_0 = baseline.views["global"].macro_f1
    if not f1_0:
        raise DegenerateBaselineError("baseline Macro-F1 is zero or undefined")
    out = []
    for b in eval_blocks:
        f1_s = b.views["global"].macro_f1 or 0.0
        delta = (f1_0 - f1_s) / f1_0 if relative else f1_0 - f1_s
        out.append((b.sigma, delta))
    return out
