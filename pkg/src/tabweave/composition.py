"""Compose separator-index quadruples into table cells and serialize them.

A cell quadruple is ``(top, left, bottom, right)``: indexes into an
:class:`~tabweave.selection.OrderedSeparatorSet`. Token sequences look like
``["<S>", 0, 2, 1, 3, "<sep>", 0, 3, 1, 4, "<E>"]``.
"""

from dataclasses import dataclass, field
from html import escape
from typing import Optional, Tuple

import numpy as np

from .bezier import separator_distance
from .errors import (
    CompositionError,
    NoClosureError,
    OrientationError,
    ParseError,
    RemapError,
    StructureConflictError,
)

START, SEP, END = "<S>", "<sep>", "<E>"
DEFAULT_EPS_EXT = 20.0
_TOL = 1e-9

Point = Tuple[float, float]


def _is_index(tok):
    return isinstance(tok, (int, np.integer)) and not isinstance(tok, bool)


def serialize_sequence(quads):
    tokens = [START]
    for k, q in enumerate(quads):
        if k:
            tokens.append(SEP)
        tokens.extend(int(a) for a in q)
    tokens.append(END)
    return tokens


def parse_sequence(tokens, n_separators=None):
    """Parse a token sequence into a list of ``(top, left, bottom, right)`` tuples.

    Raises :class:`ParseError` carrying the offending token position.
    """
    tokens = list(tokens)
    if not tokens:
        raise ParseError("empty token sequence", 0)
    if tokens[0] != START:
        raise ParseError(f"expected {START!r}, got {tokens[0]!r}", 0)
    quads = []
    pos = 1
    if pos < len(tokens) and tokens[pos] == END:
        pos += 1
    else:
        while True:
            quad = []
            for _ in range(4):
                if pos >= len(tokens):
                    raise ParseError(f"sequence ends inside a quadruple; missing {END!r}", pos)
                tok = tokens[pos]
                if not _is_index(tok):
                    raise ParseError(f"quadruple has {len(quad)} indexes, expected 4 (got {tok!r})", pos)
                if tok < 0 or (n_separators is not None and tok >= n_separators):
                    raise ParseError(f"separator index {tok} out of range", pos)
                quad.append(int(tok))
                pos += 1
            quads.append(tuple(quad))
            if pos >= len(tokens):
                raise ParseError(f"missing {END!r}", pos)
            tok = tokens[pos]
            pos += 1
            if tok == END:
                break
            if tok != SEP:
                raise ParseError(f"expected {SEP!r} or {END!r} after a quadruple, got {tok!r}", pos - 1)
    if pos != len(tokens):
        raise ParseError(f"unexpected token {tokens[pos]!r} after {END!r}", pos)
    return quads


@dataclass(frozen=True)
class TableCell:
    """``logical`` is (SR, ER, SC, EC); ``grid`` is (row, col, rowspan, colspan).

    ``corners`` are the four separator intersections TL, TR, BR, BL;
    ``polygon`` is the full boundary starting at TL, clockwise on screen.
    """

    quad: Tuple[int, int, int, int]
    polygon: Tuple[Point, ...]
    corners: Tuple[Point, Point, Point, Point]
    logical: Tuple[int, int, int, int]
    grid: Tuple[int, int, int, int]
    content: str = ""

    @property
    def row(self):
        return self.grid[0]

    @property
    def col(self):
        return self.grid[1]

    @property
    def rowspan(self):
        return self.grid[2]

    @property
    def colspan(self):
        return self.grid[3]


@dataclass(frozen=True)
class TableStructure:
    cells: Tuple[TableCell, ...] = ()
    n_rows: int = 0
    n_cols: int = 0
    source: Optional[object] = field(default=None, compare=False, repr=False)

    def occupancy(self):
        """Map each covered grid slot to its cell index."""
        slots = {}
        for k, c in enumerate(self.cells):
            for r in range(c.row, c.row + c.rowspan):
                for q in range(c.col, c.col + c.colspan):
                    slots[(r, q)] = k
        return slots


# -- polyline geometry ---------------------------------------------------


def _extend(poly, eps):
    """Prepend/append points ``eps`` beyond each end along the terminal segments."""
    head = poly[0] - poly[1]
    tail = poly[-1] - poly[-2]
    nh, nt = np.hypot(*head), np.hypot(*tail)
    first = poly[0] + head / nh * eps if nh > 0 else poly[0]
    last = poly[-1] + tail / nt * eps if nt > 0 else poly[-1]
    return np.vstack([first, poly, last])


def _crossings(P, Q):
    """All segment-segment intersections as (param on P, param on Q)."""
    p, r = P[:-1], P[1:] - P[:-1]
    q, w = Q[:-1], Q[1:] - Q[:-1]
    d = q[None, :, :] - p[:, None, :]
    denom = r[:, None, 0] * w[None, :, 1] - r[:, None, 1] * w[None, :, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (d[..., 0] * w[None, :, 1] - d[..., 1] * w[None, :, 0]) / denom
        u = (d[..., 0] * r[:, None, 1] - d[..., 1] * r[:, None, 0]) / denom
    ok = (np.abs(denom) > 1e-12) & (s >= -_TOL) & (s <= 1 + _TOL) & (u >= -_TOL) & (u <= 1 + _TOL)
    i, j = np.nonzero(ok)
    return [(i[k] + np.clip(s[i[k], j[k]], 0, 1), j[k] + np.clip(u[i[k], j[k]], 0, 1)) for k in range(len(i))]


def _overshoot(pos, n_orig, eps):
    # extended polyline: index 0 is the head extension, 1..n_orig the original points
    if pos < 1:
        return (1 - pos) * eps
    if pos > n_orig:
        return (pos - n_orig) * eps
    return 0.0


def _intersect(A, B, eps):
    """Best crossing of two polylines, allowing terminal extension up to ``eps``.

    Positions are returned on the *extended* polylines.
    """
    EA, EB = _extend(A, eps), _extend(B, eps)
    hits = _crossings(EA, EB)
    if not hits:
        return None
    return min(hits, key=lambda h: (_overshoot(h[0], len(A), eps) + _overshoot(h[1], len(B), eps), h[0]))


def _at(E, pos):
    k = min(int(np.floor(pos)), len(E) - 2)
    f = pos - k
    return E[k] + f * (E[k + 1] - E[k])


def _path(E, a, b):
    """Points of polyline ``E`` from position ``a`` to ``b`` (either direction)."""
    if a > b:
        return _path(E, b, a)[::-1]
    inner = [E[k] for k in range(int(np.floor(a)) + 1, int(np.ceil(b))) if a < k < b]
    return [_at(E, a), *inner, _at(E, b)]


def _simplify(points):
    """Drop repeated and exactly collinear vertices of a closed ring."""
    pts = []
    for p in points:
        if not pts or np.hypot(*(p - pts[-1])) > _TOL:
            pts.append(p)
    if len(pts) > 1 and np.hypot(*(pts[0] - pts[-1])) <= _TOL:
        pts.pop()
    changed = True
    while changed and len(pts) > 3:
        changed = False
        for k in range(1, len(pts) + 1):
            a, b, c = pts[k - 1], pts[k % len(pts)], pts[(k + 1) % len(pts)]
            u, v = b - a, c - b
            cross = u[0] * v[1] - u[1] * v[0]
            if abs(cross) <= _TOL * np.hypot(*u) * np.hypot(*v) and u @ v > 0:
                # never drop the ring's first vertex (the TL corner)
                if k % len(pts) != 0:
                    del pts[k % len(pts)]
                    changed = True
                    break
    return pts


# -- cells ---------------------------------------------------------------


def compose_cell(quad, H, eps_ext=DEFAULT_EPS_EXT):
    top, left, bottom, right = (int(a) for a in quad)
    n = len(H)
    for a in (top, left, bottom, right):
        if not 0 <= a < n:
            raise CompositionError(f"separator index {a} out of range for {n} separators")
    if top == bottom or left == right:
        raise NoClosureError(f"degenerate quadruple {tuple(quad)}: a cell needs four distinct separators")
    if not (H.is_horizontal(top) and H.is_horizontal(bottom)):
        raise CompositionError(f"top/bottom of {tuple(quad)} must index horizontal separators")
    if H.is_horizontal(left) or H.is_horizontal(right):
        raise CompositionError(f"left/right of {tuple(quad)} must index vertical separators")
    if not np.mean(H[top].samples[:, 1]) < np.mean(H[bottom].samples[:, 1]):
        raise OrientationError(f"top separator {top} is not above bottom separator {bottom}")
    if not np.mean(H[left].samples[:, 0]) < np.mean(H[right].samples[:, 0]):
        raise OrientationError(f"left separator {left} is not left of right separator {right}")

    lines = {k: np.asarray(H[k].samples, dtype=float) for k in (top, left, bottom, right)}
    ext = {k: _extend(v, eps_ext) for k, v in lines.items()}
    hits = {}
    for h, v, name in ((top, left, "top-left"), (top, right, "top-right"),
                       (bottom, right, "bottom-right"), (bottom, left, "bottom-left")):
        hit = _intersect(lines[h], lines[v], eps_ext)
        if hit is None:
            raise NoClosureError(
                f"separators {h} and {v} do not meet ({name} corner) within {eps_ext} px extension"
            )
        hits[name] = hit

    tl, tr = hits["top-left"], hits["top-right"]
    br, bl = hits["bottom-right"], hits["bottom-left"]
    ring = (
        _path(ext[top], tl[0], tr[0])
        + _path(ext[right], tr[1], br[1])[1:]
        + _path(ext[bottom], br[0], bl[0])[1:]
        + _path(ext[left], bl[1], tl[1])[1:]
    )
    polygon = tuple((float(x), float(y)) for x, y in _simplify(ring))
    corners = tuple(
        (float(p[0]), float(p[1]))
        for p in (_at(ext[top], tl[0]), _at(ext[top], tr[0]), _at(ext[bottom], br[0]), _at(ext[bottom], bl[0]))
    )
    return TableCell(
        quad=(top, left, bottom, right),
        polygon=polygon,
        corners=corners,
        logical=(top, bottom, left, right),
        grid=(top, left - H.n_h, bottom - top, right - left),
    )


def compose_structure(quads, H, eps_ext=DEFAULT_EPS_EXT):
    """Compose every quadruple and lay the cells out on a rank-normalized grid.

    Rows and columns are delimited by the separators the cells actually use,
    so separators no cell refers to do not create empty rows or columns.
    """
    cells = []
    for k, quad in enumerate(quads):
        try:
            cells.append(compose_cell(quad, H, eps_ext))
        except CompositionError as e:
            raise type(e)(str(e), cell_index=k) from e
    used_h = sorted({c.quad[0] for c in cells} | {c.quad[2] for c in cells})
    used_v = sorted({c.quad[1] for c in cells} | {c.quad[3] for c in cells})
    rank_h = {a: i for i, a in enumerate(used_h)}
    rank_v = {a: i for i, a in enumerate(used_v)}
    placed = []
    slots = {}
    for k, c in enumerate(cells):
        top, left, bottom, right = c.quad
        grid = (rank_h[top], rank_v[left], rank_h[bottom] - rank_h[top], rank_v[right] - rank_v[left])
        for r in range(grid[0], grid[0] + grid[2]):
            for q in range(grid[1], grid[1] + grid[3]):
                if (r, q) in slots:
                    raise StructureConflictError(
                        f"grid slot ({r}, {q}) already occupied by cell {slots[(r, q)]}", cell_index=k
                    )
                slots[(r, q)] = k
        placed.append(TableCell(c.quad, c.polygon, c.corners, c.logical, grid))
    return TableStructure(
        tuple(placed),
        max(len(used_h) - 1, 0),
        max(len(used_v) - 1, 0),
        source=H,
    )


def remap_quadruples(quads, old_H, new_H, max_dist=5.0):
    """Re-express quadruples against a different separator set.

    Each index referenced by ``quads`` maps to the same-direction separator of
    ``new_H`` nearest in separator distance, which must be below ``max_dist``.
    """
    if not len(old_H) or not len(new_H):
        raise RemapError("both separator sets must be non-empty")
    mapping = {}
    for k in sorted({a for q in quads for a in q}):
        if not 0 <= k < len(old_H):
            raise RemapError(f"index {k} out of range for {len(old_H)} separators", index=k)
        horiz = old_H.is_horizontal(k)
        cands = range(new_H.n_h) if horiz else range(new_H.n_h, len(new_H))
        best = None
        for j in cands:
            d = separator_distance(old_H[k], new_H[j])
            if best is None or d < best[0]:
                best = (d, j)
        if best is None or not best[0] < max_dist:
            raise RemapError(f"separator {k} has no counterpart within {max_dist} px", index=k)
        mapping[k] = best[1]
    return [tuple(mapping[a] for a in q) for q in quads]


# -- serializers ---------------------------------------------------------


def to_html(structure):
    anchors = {(c.row, c.col): c for c in structure.cells}
    out = ["<table>"]
    for r in range(structure.n_rows):
        out.append("<tr>")
        for q in range(structure.n_cols):
            c = anchors.get((r, q))
            if c is None:
                continue
            attrs = ""
            if c.rowspan != 1:
                attrs += f' rowspan="{c.rowspan}"'
            if c.colspan != 1:
                attrs += f' colspan="{c.colspan}"'
            out.append(f"<td{attrs}>{escape(c.content)}</td>")
        out.append("</tr>")
    out.append("</table>")
    return "".join(out)


def to_logical_text(structure):
    """One ``SR<k>|SC<k>|ER<k>|EC<k>`` line per cell, in (row, col) order."""
    cells = sorted(structure.cells, key=lambda c: (c.row, c.col))
    return [f"SR{c.logical[0]}|SC{c.logical[2]}|ER{c.logical[1]}|EC{c.logical[3]}" for c in cells]

