"""Row/column relation instances and their rasterized index masks."""

from dataclasses import dataclass, field
from math import ceil
from typing import List, Tuple

import numpy as np

from .errors import DomainError

STRIDES = (8, 16, 32, 64)


def _norm_pairs(pairs, n):
    out = set()
    for i, j in pairs:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError(f"pair ({i}, {j}) out of range for {n} elements")
        if i != j:
            out.add((min(i, j), max(i, j)))
    return sorted(out)


@dataclass(frozen=True)
class RelationSet:
    """``boxes[k] = (x0, y0, x1, y1)``; pairs are normalized to ``i < j``."""

    n: int
    boxes: List[Tuple[float, float, float, float]] = field(default_factory=list)
    row_pairs: List[Tuple[int, int]] = field(default_factory=list)
    col_pairs: List[Tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("element count must be non-negative")
        boxes = [tuple(float(v) for v in b) for b in self.boxes]
        if boxes and len(boxes) != self.n:
            raise DomainError(f"{len(boxes)} boxes for {self.n} elements")
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "row_pairs", _norm_pairs(self.row_pairs, self.n))
        object.__setattr__(self, "col_pairs", _norm_pairs(self.col_pairs, self.n))


@dataclass(frozen=True)
class RelationInstances:
    """Instance ``r`` (1-based) of a direction is ``row_instances[r - 1]``."""

    row_instances: List[Tuple[int, ...]]
    col_instances: List[Tuple[int, ...]]

    @property
    def M(self):
        return len(self.row_instances)

    @property
    def P(self):
        return len(self.col_instances)

    @staticmethod
    def labels(instances, n):
        """Per-element 1-based instance index."""
        lab = np.zeros(n, dtype=np.int64)
        for r, members in enumerate(instances, start=1):
            lab[list(members)] = r
        return lab


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def components(self):
        """Components as sorted tuples, ordered by smallest member."""
        groups = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def connected_instances(n, pairs):
    uf = UnionFind(n)
    for i, j in _norm_pairs(pairs, n):
        uf.union(i, j)
    return uf.components()


def build_relation_instances(rel):
    """Transitive closure of the pair graphs; isolated elements are singletons."""
    return RelationInstances(
        connected_instances(rel.n, rel.row_pairs),
        connected_instances(rel.n, rel.col_pairs),
    )


def rasterize_relation_mask(boxes, instances, W, H):
    """Paint each element box with its instance index on a ``(H, W)`` image.

    ``instances`` is either a list of member tuples (as in
    :class:`RelationInstances`) or a per-element label sequence. A pixel
    belongs to a box when its centre lies strictly inside; overlapping boxes
    resolve to the higher element index.
    """
    if W <= 0 or H <= 0:
        raise DomainError(f"mask size must be positive, got {W}x{H}")
    n = len(boxes)
    if instances and isinstance(instances[0], (tuple, list, set, frozenset)):
        labels = RelationInstances.labels(instances, n)
    else:
        labels = np.asarray(instances, dtype=np.int64)
    if len(labels) != n:
        raise DomainError(f"{len(labels)} labels for {n} boxes")
    mask = np.zeros((H, W), dtype=np.int64)
    cx = np.arange(W) + 0.5
    cy = np.arange(H) + 0.5
    for k, (x0, y0, x1, y1) in enumerate(boxes):
        if x0 < 0 or y0 < 0 or x1 > W or y1 > H or x0 > x1 or y0 > y1:
            raise DomainError(f"box {k} {(x0, y0, x1, y1)} outside the {W}x{H} canvas")
        cols = np.nonzero((cx > x0) & (cx < x1))[0]
        rows = np.nonzero((cy > y0) & (cy < y1))[0]
        if len(cols) and len(rows):
            mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = labels[k]
    return mask


@dataclass(frozen=True, eq=False)
class MaskPyramid:
    base: np.ndarray
    levels: dict

    @property
    def strides(self):
        return tuple(self.levels)


def build_mask_pyramid(mask, strides=STRIDES):
    """Nearest-neighbour downsampling anchored at each block's top-left pixel."""
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.size == 0:
        raise DomainError("mask must be a non-empty 2-D image")
    H, W = mask.shape
    levels = {}
    for s in strides:
        lvl = mask[::s, ::s].copy()
        assert lvl.shape == (ceil(H / s), ceil(W / s))
        levels[s] = lvl
    return MaskPyramid(mask, levels)
