"""Prediction-to-ground-truth separator matching."""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bezier import separator_distance
from .errors import DomainError

DEFAULT_GROUP_THRESHOLD = 5.0


@dataclass(frozen=True)
class Assignment:
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_preds: List[int] = field(default_factory=list)
    unmatched_gts: List[int] = field(default_factory=list)
    total_cost: float = 0.0

    def gt_of(self, pred):
        for p, g in self.pairs:
            if p == pred:
                return g
        return None


@dataclass(frozen=True)
class GroupAssignment:
    """``groups[g]`` lists the preds assigned to gt ``g``, anchor first."""

    groups: Dict[int, Tuple[int, ...]] = field(default_factory=dict)


def cost_matrix(preds, gts, w_cls=1.0, w_reg=1.0):
    """``cost[i, j] = w_cls * (1 - credit_i(class_j)) + w_reg * D_sep(i, j)``."""
    if w_cls < 0 or w_reg < 0:
        raise DomainError("cost weights must be non-negative")
    lengths = {s.T for s in preds} | {s.T for s in gts}
    if len(lengths) > 1:
        raise DomainError(f"separators have mixed sample counts {sorted(lengths)}")
    cost = np.zeros((len(preds), len(gts)))
    for i, p in enumerate(preds):
        for j, g in enumerate(gts):
            cost[i, j] = w_cls * (1.0 - p.credit(g.cls)) + w_reg * separator_distance(p, g)
    return cost


def match_one_to_one(preds, gts, w_cls=1.0, w_reg=1.0):
    """Minimum-cost bipartite matching of size ``min(len(preds), len(gts))``.

    Surplus predictions or ground truths stay unmatched (background) and
    add nothing to the cost.
    """
    cost = cost_matrix(preds, gts, w_cls, w_reg)
    if cost.size == 0:
        return Assignment([], list(range(len(preds))), list(range(len(gts))), 0.0)
    rows, cols = linear_sum_assignment(cost)
    pairs = sorted(zip(rows.tolist(), cols.tolist()))
    matched_p = {p for p, _ in pairs}
    matched_g = {g for _, g in pairs}
    return Assignment(
        pairs,
        [i for i in range(len(preds)) if i not in matched_p],
        [j for j in range(len(gts)) if j not in matched_g],
        float(cost[rows, cols].sum()),
    )


def expand_one_to_many(assign, preds, threshold=DEFAULT_GROUP_THRESHOLD):
    """Grow each matched pred into a group with its unmatched neighbours.

    A neighbour is an unmatched pred strictly closer than ``threshold`` to the
    anchor. When several anchors qualify, the nearest wins and ties go to the
    lower gt index.
    """
    n = len(preds)
    for p, g in assign.pairs:
        if not 0 <= p < n:
            raise DomainError(f"assignment references pred {p} but only {n} preds given")
    anchors = sorted(assign.pairs, key=lambda pg: pg[1])
    anchored = {p for p, _ in anchors}
    members = {g: [] for _, g in anchors}
    for q in range(n):
        if q in anchored:
            continue
        best = None
        for p, g in anchors:
            d = separator_distance(preds[p], preds[q])
            if d < threshold and (best is None or d < best[0]):
                best = (d, g)
        if best is not None:
            members[best[1]].append(q)
    return GroupAssignment({g: (p, *members[g]) for p, g in anchors})
