"""Adjacency-relation F1, BLEU and the attention KL-diversity profile.

TEDS lives in :mod:`tabweave.teds`.
"""

from collections import Counter
from dataclasses import dataclass
from math import exp, floor, ceil, log
from typing import Optional

import numpy as np

from .errors import DomainError

DEFAULT_IOU = 0.6


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    teds: Optional[float] = None
    bleu: Optional[float] = None


def f1_score(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def adjacency_relations(structure):
    """Immediate-neighbour pairs on the logical grid: ``{(i, j, 'h'|'v')}``, i < j."""
    rels = set()
    cells = structure.cells
    for i, a in enumerate(cells):
        for j in range(i + 1, len(cells)):
            b = cells[j]
            rows_overlap = a.row < b.row + b.rowspan and b.row < a.row + a.rowspan
            cols_overlap = a.col < b.col + b.colspan and b.col < a.col + a.colspan
            if rows_overlap and (a.col + a.colspan == b.col or b.col + b.colspan == a.col):
                rels.add((i, j, "h"))
            if cols_overlap and (a.row + a.rowspan == b.row or b.row + b.rowspan == a.row):
                rels.add((i, j, "v"))
    return rels


def polygon_mask(polygon):
    """Even-odd rasterization at pixel centres.

    Returns ``(x0, y0, mask)`` where ``mask[v, u]`` covers pixel
    ``(x0 + u, y0 + v)``.
    """
    poly = np.asarray(polygon, dtype=float)
    x0, y0 = floor(poly[:, 0].min()), floor(poly[:, 1].min())
    x1, y1 = ceil(poly[:, 0].max()), ceil(poly[:, 1].max())
    px = np.arange(x0, x1) + 0.5
    py = np.arange(y0, y1) + 0.5
    X, Y = np.meshgrid(px, py)
    inside = np.zeros(X.shape, dtype=bool)
    a = poly
    b = np.roll(poly, -1, axis=0)
    for (ax, ay), (bx, by) in zip(a, b):
        if ay == by:
            continue
        crosses = (ay > Y) != (by > Y)
        xint = ax + (Y - ay) * (bx - ax) / (by - ay)
        inside ^= crosses & (X < xint)
    return x0, y0, inside


def _iou(ma, mb):
    (ax, ay, A), (bx, by, B) = ma, mb
    ix0, iy0 = max(ax, bx), max(ay, by)
    ix1, iy1 = min(ax + A.shape[1], bx + B.shape[1]), min(ay + A.shape[0], by + B.shape[0])
    inter = 0
    if ix0 < ix1 and iy0 < iy1:
        sa = A[iy0 - ay : iy1 - ay, ix0 - ax : ix1 - ax]
        sb = B[iy0 - by : iy1 - by, ix0 - bx : ix1 - bx]
        inter = int(np.count_nonzero(sa & sb))
    union = int(A.sum()) + int(B.sum()) - inter
    return inter / union if union else 0.0


def match_cells(pred, gt, iou_thresh=DEFAULT_IOU):
    """Greedy one-to-one cell matching by descending polygon IoU."""
    pm = [polygon_mask(c.polygon) for c in pred.cells]
    gm = [polygon_mask(c.polygon) for c in gt.cells]
    cands = []
    for i, a in enumerate(pm):
        for j, b in enumerate(gm):
            # bounding boxes must overlap for a non-zero IoU
            if a[0] >= b[0] + b[2].shape[1] or b[0] >= a[0] + a[2].shape[1]:
                continue
            if a[1] >= b[1] + b[2].shape[0] or b[1] >= a[1] + a[2].shape[0]:
                continue
            v = _iou(a, b)
            if v >= iou_thresh:
                cands.append((-v, i, j))
    cands.sort()
    mapping, used = {}, set()
    for _, i, j in cands:
        if i not in mapping and j not in used:
            mapping[i] = j
            used.add(j)
    return mapping


def adjacency_f1(pred, gt, iou_thresh=DEFAULT_IOU):
    """Relation P/R/F1; other 0/0 ratios are 0, but two relation-free tables score 1."""
    pred_rel = adjacency_relations(pred)
    gt_rel = adjacency_relations(gt)
    mapping = match_cells(pred, gt, iou_thresh)
    tp = 0
    for i, j, d in pred_rel:
        if i in mapping and j in mapping:
            a, b = sorted((mapping[i], mapping[j]))
            tp += (a, b, d) in gt_rel
    if not pred_rel and not gt_rel:
        return EvalReport(1.0, 1.0, 1.0, 0, 0, 0)
    p = tp / len(pred_rel) if pred_rel else 0.0
    r = tp / len(gt_rel) if gt_rel else 0.0
    return EvalReport(p, r, f1_score(p, r), tp, len(pred_rel) - tp, len(gt_rel) - tp)


def _ngrams(tokens, n):
    return Counter(tuple(tokens[k : k + n]) for k in range(len(tokens) - n + 1))


def bleu(pred_tokens, gt_tokens, max_n=4):
    """Sentence BLEU against a single reference, without smoothing."""
    if max_n < 1:
        raise DomainError(f"max_n must be >= 1, got {max_n}")
    pred, ref = list(pred_tokens), list(gt_tokens)
    if not pred:
        return 0.0
    logp = 0.0
    for n in range(1, max_n + 1):
        cand = _ngrams(pred, n)
        total = sum(cand.values())
        if total == 0:
            return 0.0
        ref_counts = _ngrams(ref, n)
        clipped = sum(min(c, ref_counts[g]) for g, c in cand.items())
        if clipped == 0:
            return 0.0
        logp += log(clipped / total)
    bp = exp(min(0.0, 1.0 - len(ref) / len(pred)))
    return bp * exp(logp / max_n)


def kl_profile(attention, epsilon=1e-12):
    """Mean KL divergence (nats) of each attention row against all rows.

    Entries are floored at ``epsilon`` and rows renormalized before taking
    logs, so zero entries give finite values.
    """
    P = np.asarray(attention, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise DomainError("attention must be a non-empty 2-D matrix")
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise DomainError("attention entries must be finite and non-negative")
    sums = P.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > 1e-6)[0]
    if len(bad):
        raise DomainError(f"row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
    Q = np.maximum(P, epsilon)
    Q = Q / Q.sum(axis=1, keepdims=True)
    L = np.log(Q)
    # row differences first so identical rows give exactly zero
    kl = np.array([(L[i] - L) @ Q[i] for i in range(len(Q))])
    return np.maximum(kl, 0.0).mean(axis=1)
