"""Synthetic ground-truth tables: grids with merged cells, smooth warps and
separator noise.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence`` with a
``(seed, stream, entity)`` key, so each entity draws from its own stream and
adding one never shifts another's draws.
"""

from dataclasses import dataclass
from math import pi
from typing import List, Optional

import numpy as np

from .bezier import DEFAULT_T, SepClass, Separator, sample_uniform
from .composition import compose_structure, parse_sequence, serialize_sequence, to_html
from .errors import DomainError, GenerationError
from .relations import RelationSet
from .selection import OrderedSeparatorSet

RNG_VERSION = 1
_STREAM_SIZES, _STREAM_MERGE, _STREAM_VIS, _STREAM_PERTURB = 1, 2, 3, 4
DEFAULT_MARGIN = 32
ELEMENT_INSET = 0.2


def stream(seed, *key):
    """Independent generator for one named stream (and optional entity id)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([RNG_VERSION, int(seed), *key])))


@dataclass(frozen=True)
class WarpField:
    """Displacement ``d(x, y) = (A sin(2 pi y / period_y + phase_y), A sin(2 pi x / period_x + phase_x))``.

    ``phase_y`` drives the x displacement and ``phase_x`` the y displacement.
    """

    amplitude: float
    period_x: float
    period_y: float
    phase_x: float = 0.0
    phase_y: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError("warp amplitude must be non-negative")
        if self.period_x <= 0 or self.period_y <= 0:
            raise DomainError("warp periods must be positive")
        # keeps the Jacobian determinant positive everywhere
        if 2 * pi * self.amplitude / min(self.period_x, self.period_y) >= 1:
            raise DomainError(
                f"warp amplitude {self.amplitude} too large for periods "
                f"({self.period_x}, {self.period_y}); the map would fold"
            )

    def displace(self, points):
        p = np.asarray(points, dtype=float)
        out = p.copy()
        out[..., 0] += self.amplitude * np.sin(2 * pi * p[..., 1] / self.period_y + self.phase_y)
        out[..., 1] += self.amplitude * np.sin(2 * pi * p[..., 0] / self.period_x + self.phase_x)
        return out


@dataclass(frozen=True, eq=False)
class GroundTruth:
    separators: OrderedSeparatorSet
    relations: RelationSet
    tokens: List[object]
    structure: object
    html: str
    seed: int
    width: int
    height: int
    warp: Optional[WarpField] = None

    @property
    def quads(self):
        return parse_sequence(self.tokens, len(self.separators))


def _line_control(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.array([a, a + (b - a) / 3, a + 2 * (b - a) / 3, b])


def _place_merges(rows, cols, budget, rng):
    """Random non-overlapping rectangles (at least 2 slots each) using <= budget slots."""
    taken = np.zeros((rows, cols), dtype=bool)
    merges = []
    attempts = 0
    while budget >= 2 and attempts < 40 * rows * cols:
        attempts += 1
        r, c = int(rng.integers(rows)), int(rng.integers(cols))
        h = int(rng.integers(1, min(3, rows - r) + 1))
        w = int(rng.integers(1, min(3, cols - c) + 1))
        if h * w < 2 or h * w > budget or taken[r : r + h, c : c + w].any():
            continue
        taken[r : r + h, c : c + w] = True
        merges.append((r, c, h, w))
        budget -= h * w
    return merges, taken


def _span_pairs(structure, axis):
    cells = structure.cells
    pairs = []
    for i, a in enumerate(cells):
        for j in range(i + 1, len(cells)):
            b = cells[j]
            if axis == "row":
                lo_a, n_a, lo_b, n_b = a.row, a.rowspan, b.row, b.rowspan
            else:
                lo_a, n_a, lo_b, n_b = a.col, a.colspan, b.col, b.colspan
            if lo_a < lo_b + n_b and lo_b < lo_a + n_a:
                pairs.append((i, j))
    return pairs


def _element_boxes(structure):
    boxes = []
    for c in structure.cells:
        poly = np.asarray(c.polygon)
        x0, y0 = poly.min(axis=0)
        x1, y1 = poly.max(axis=0)
        dx, dy = ELEMENT_INSET * (x1 - x0), ELEMENT_INSET * (y1 - y0)
        boxes.append((float(x0 + dx), float(y0 + dy), float(x1 - dx), float(y1 - dy)))
    return boxes


def generate_grid(rows, cols, merge_fraction=0.0, cell_size_range=(60, 120), seed=0,
                  T=DEFAULT_T, margin=DEFAULT_MARGIN, explicit_fraction=0.5):
    """Axis-aligned ``rows x cols`` table with random rectangular merges.

    Separators span the full table; the border is always explicit and each
    interior separator is explicit with probability ``explicit_fraction``.
    Element boxes are the cells inset by 20% on every side.
    """
    if rows < 1 or cols < 1:
        raise GenerationError(f"grid needs at least one row and column, got {rows}x{cols}")
    if not 0.0 <= merge_fraction <= 0.5:
        raise GenerationError(f"merge_fraction must lie in [0, 0.5], got {merge_fraction}")
    lo, hi = (int(v) for v in cell_size_range)
    if not 0 < lo <= hi:
        raise GenerationError(f"invalid cell size range {cell_size_range}")
    budget = int(np.floor(merge_fraction * rows * cols))
    if merge_fraction > 0 and rows * cols < 2:
        raise GenerationError("cannot merge cells in a 1x1 grid")

    sizes = stream(seed, _STREAM_SIZES)
    widths = sizes.integers(lo, hi + 1, cols)
    heights = sizes.integers(lo, hi + 1, rows)
    xs = margin + np.concatenate([[0], np.cumsum(widths)]).astype(float)
    ys = margin + np.concatenate([[0], np.cumsum(heights)]).astype(float)
    width, height = int(xs[-1]) + margin, int(ys[-1]) + margin

    vis = stream(seed, _STREAM_VIS)
    n_h = rows + 1
    flags = vis.random(n_h + cols + 1) < explicit_fraction
    seps = []
    for k, y in enumerate(ys):
        border = k in (0, rows)
        cls = SepClass.EXPLICIT if border or flags[k] else SepClass.IMPLICIT
        ctrl = _line_control((xs[0], y), (xs[-1], y))
        seps.append(Separator(sample_uniform(ctrl, T), cls, 1.0, ctrl))
    for k, x in enumerate(xs):
        border = k in (0, cols)
        cls = SepClass.EXPLICIT if border or flags[n_h + k] else SepClass.IMPLICIT
        ctrl = _line_control((x, ys[0]), (x, ys[-1]))
        seps.append(Separator(sample_uniform(ctrl, T), cls, 1.0, ctrl))
    H = OrderedSeparatorSet(seps, n_h)

    merges, taken = _place_merges(rows, cols, budget, stream(seed, _STREAM_MERGE))
    rects = merges + [(r, c, 1, 1) for r in range(rows) for c in range(cols) if not taken[r, c]]
    rects.sort()
    quads = [(r, n_h + c, r + h, n_h + c + w) for r, c, h, w in rects]
    tokens = serialize_sequence(quads)
    structure = compose_structure(quads, H)
    relations = RelationSet(
        len(structure.cells),
        _element_boxes(structure),
        _span_pairs(structure, "row"),
        _span_pairs(structure, "col"),
    )
    return GroundTruth(H, relations, tokens, structure, to_html(structure), int(seed), width, height)


def min_cell_size(gt):
    """Smallest gap between consecutive horizontal (by mean y) or vertical (by mean x) separators."""
    ys = [float(np.mean(s.samples[:, 1])) for s in gt.separators.horizontals]
    xs = [float(np.mean(s.samples[:, 0])) for s in gt.separators.verticals]
    gaps = list(np.diff(ys)) + list(np.diff(xs))
    return min(gaps) if gaps else float("inf")


def apply_warp(gt, warp):
    """Push every separator sample, element box and cell through ``warp``.

    Separators are refit and resampled, then the cells are recomposed from
    them; the logical structure, relations, sequence and HTML are unchanged.
    """
    limit = min_cell_size(gt) / 4
    if warp.amplitude >= limit and warp.amplitude > 0:
        raise DomainError(f"warp amplitude {warp.amplitude} must stay below a quarter of the smallest cell ({limit})")
    if warp.amplitude == 0:
        return gt
    seps = [s.replace(samples=warp.displace(s.samples), control=None).refit() for s in gt.separators]
    H = OrderedSeparatorSet(seps, gt.separators.n_h)
    structure = compose_structure(gt.quads, H)
    if [c.grid for c in structure.cells] != [c.grid for c in gt.structure.cells]:
        raise GenerationError("warp changed the logical structure")
    boxes = []
    for x0, y0, x1, y1 in gt.relations.boxes:
        q = warp.displace([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        bx0, by0 = q.min(axis=0)
        bx1, by1 = q.max(axis=0)
        boxes.append((float(max(bx0, 0.0)), float(max(by0, 0.0)),
                      float(min(bx1, gt.width)), float(min(by1, gt.height))))
    rel = RelationSet(gt.relations.n, boxes, gt.relations.row_pairs, gt.relations.col_pairs)
    html = to_html(structure)
    assert html == gt.html
    return GroundTruth(H, rel, list(gt.tokens), structure, html, gt.seed, gt.width, gt.height, warp)


def random_warp(gt, amplitude, rng, period_scale=(1.0, 2.0)):
    """Warp with periods drawn between ``period_scale`` times the table extent.

    The extent is floored at ``7 * amplitude`` so small tables still get a
    fold-free field.
    """
    xs = [float(np.mean(s.samples[:, 0])) for s in gt.separators.verticals]
    ys = [float(np.mean(s.samples[:, 1])) for s in gt.separators.horizontals]
    floor_ = 7.0 * float(amplitude)
    tw, th = max(max(xs) - min(xs), floor_), max(max(ys) - min(ys), floor_)
    return WarpField(
        float(amplitude),
        float(tw * rng.uniform(*period_scale)),
        float(th * rng.uniform(*period_scale)),
        float(rng.uniform(0, 2 * pi)),
        float(rng.uniform(0, 2 * pi)),
    )


def perturb(gt, jitter_sigma=0.5, duplicate_prob=0.0, seed=0):
    """Noisy scored copies of the ground-truth separators.

    Each separator gets Gaussian jitter per sample point and a score in
    [0.5, 1); with probability ``duplicate_prob`` a near duplicate with
    ``jitter_sigma + 0.5`` px jitter and a lower score follows it.
    """
    if jitter_sigma < 0:
        raise DomainError("jitter_sigma must be non-negative")
    if not 0.0 <= duplicate_prob <= 1.0:
        raise DomainError("duplicate_prob must lie in [0, 1]")
    out = []
    for k, sep in enumerate(gt.separators):
        rng = stream(seed, _STREAM_PERTURB, k)
        noise = rng.standard_normal(sep.samples.shape)
        score = float(rng.uniform(0.5, 1.0))
        dup_noise = rng.standard_normal(sep.samples.shape)
        dup_draw = rng.random()
        dup_scale = rng.uniform(0.5, 0.95)
        samples = sep.samples + jitter_sigma * noise if jitter_sigma > 0 else sep.samples
        out.append(Separator(samples, sep.cls, score))
        if dup_draw < duplicate_prob:
            dup = sep.samples + (jitter_sigma + 0.5) * dup_noise
            out.append(Separator(dup, sep.cls, float(score * dup_scale)))
    return out


def grid_corners(gt):
    """Straight-grid corner points as ``{(h, v): (x, y)}`` for separator indexes."""
    out = {}
    for h in range(gt.separators.n_h):
        y = float(gt.separators[h].samples[0, 1])
        for v in range(gt.separators.n_h, len(gt.separators)):
            x = float(gt.separators[v].samples[0, 0])
            out[(h, v)] = (x, y)
    return out

