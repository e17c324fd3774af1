import numpy as np
import pytest

from conftest import grid_set, line
from tabweave.bezier import Separator
from tabweave.composition import (
    compose_cell, compose_structure, parse_sequence, remap_quadruples,
    serialize_sequence, to_html, to_logical_text,
)
from tabweave.errors import (
    CompositionError, NoClosureError, OrientationError, ParseError, RemapError,
    StructureConflictError,
)
from tabweave.selection import order_regularize
from tabweave.synthetic import WarpField, apply_warp, generate_grid, grid_corners


# 2x2 grid: horizontals 0,1,2 at y=0,50,100; verticals 3,4,5 at x=0,100,200
def grid22():
    return grid_set([0, 100, 200], [0, 50, 100])


def test_parse_examples():
    assert parse_sequence(["<S>", 0, 2, 1, 3, "<E>"]) == [(0, 2, 1, 3)]
    assert parse_sequence(["<S>", 0, 2, 1, 3, "<sep>", 0, 3, 1, 4, "<E>"]) == [(0, 2, 1, 3), (0, 3, 1, 4)]
    assert parse_sequence(["<S>", "<E>"]) == []


@pytest.mark.parametrize("tokens, pos", [
    ([], 0),
    ([0, 2, 1, 3, "<E>"], 0),
    (["<S>", 0, 2, 1, "<E>"], 4),
    (["<S>", 0, 2, 1, 3], 5),
    (["<S>", 0, 2, 1, 3, 0, 3, 1, 4, "<E>"], 5),
    (["<S>", 0, 2, 1, 3, "<E>", "<E>"], 6),
    (["<S>", 0, 2, 1, 3, "<sep>", "<E>"], 6),
    (["<S>", 0, -1, 1, 3, "<E>"], 2),
    (["<S>", 0, 2, 1, True, "<E>"], 4),
])
def test_parse_errors(tokens, pos):
    with pytest.raises(ParseError) as e:
        parse_sequence(tokens)
    assert e.value.position == pos


def test_parse_range_check():
    with pytest.raises(ParseError) as e:
        parse_sequence(["<S>", 0, 2, 1, 9, "<E>"], n_separators=4)
    assert e.value.position == 4


def test_parse_serialize_roundtrip(rng):
    for _ in range(200):
        quads = [tuple(int(v) for v in rng.integers(0, 40, 4)) for _ in range(rng.integers(0, 12))]
        tokens = serialize_sequence(quads)
        assert parse_sequence(tokens) == quads
        assert serialize_sequence(parse_sequence(tokens)) == tokens


def test_unit_cell(unit_H):
    c = compose_cell((0, 2, 1, 3), unit_H)
    assert c.polygon == ((0, 0), (100, 0), (100, 50), (0, 50))
    assert c.corners == ((0, 0), (100, 0), (100, 50), (0, 50))
    s = compose_structure([(0, 2, 1, 3)], unit_H)
    assert to_html(s) == "<table><tr><td></td></tr></table>"
    assert to_logical_text(s) == ["SR0|SC2|ER1|EC3"]


def test_cell_errors(unit_H):
    with pytest.raises(NoClosureError):
        compose_cell((0, 2, 1, 2), unit_H)
    with pytest.raises(OrientationError):
        compose_cell((1, 2, 0, 3), unit_H)
    with pytest.raises(OrientationError):
        compose_cell((0, 3, 1, 2), unit_H)
    with pytest.raises(CompositionError):
        compose_cell((0, 1, 2, 3), unit_H)
    with pytest.raises(CompositionError):
        compose_cell((0, 2, 1, 7), unit_H)


def test_short_separator_extends_within_eps():
    # right separator stops 10 px short of the top line
    H = order_regularize([line((0, 0), (100, 0)), line((0, 50), (100, 50)),
                          line((0, 0), (0, 50)), line((100, 10), (100, 50))])
    c = compose_cell((0, 2, 1, 3), H, eps_ext=20)
    assert c.polygon[1] == pytest.approx((100, 0))
    with pytest.raises(NoClosureError):
        compose_cell((0, 2, 1, 3), H, eps_ext=5)


def test_grid_2x2():
    H = grid22()
    quads = [(0, 3, 1, 4), (0, 4, 1, 5), (1, 3, 2, 4), (1, 4, 2, 5)]
    s = compose_structure(quads, H)
    assert (s.n_rows, s.n_cols) == (2, 2)
    assert [c.grid for c in s.cells] == [(0, 0, 1, 1), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 1, 1)]
    assert to_html(s) == "<table><tr><td></td><td></td></tr><tr><td></td><td></td></tr></table>"


def test_rowspan():
    H = grid22()
    s = compose_structure([(0, 3, 2, 4), (0, 4, 1, 5), (1, 4, 2, 5)], H)
    assert s.cells[0].grid == (0, 0, 2, 1)
    assert to_html(s) == '<table><tr><td rowspan="2"></td><td></td></tr><tr><td></td></tr></table>'
    assert s.cells[0].polygon == ((0, 0), (100, 0), (100, 100), (0, 100))


def test_colspan_keeps_corners_only_in_polygon():
    H = grid22()
    c = compose_structure([(0, 3, 1, 5)], H).cells[0]
    # the crossing with vertical 4 is collinear and pruned
    assert c.polygon == ((0, 0), (200, 0), (200, 50), (0, 50))


def test_empty_structure():
    s = compose_structure([], grid22())
    assert (s.n_rows, s.n_cols, s.cells) == (0, 0, ())
    assert to_html(s) == "<table></table>"
    assert to_logical_text(s) == []


def test_overlap_conflict():
    with pytest.raises(StructureConflictError) as e:
        compose_structure([(0, 3, 2, 5), (1, 4, 2, 5)], grid22())
    assert e.value.cell_index == 1


def test_html_escapes_content():
    s = compose_structure([(0, 3, 1, 4)], grid22())
    from dataclasses import replace

    cell = replace(s.cells[0], content="a<b")
    s2 = replace(s, cells=(cell,))
    assert to_html(s2) == "<table><tr><td>a&lt;b</td></tr></table>"


TILINGS_2x2 = {
    "singles": [(0, 3, 1, 4), (0, 4, 1, 5), (1, 3, 2, 4), (1, 4, 2, 5)],
    "top": [(0, 3, 1, 5), (1, 3, 2, 4), (1, 4, 2, 5)],
    "bottom": [(0, 3, 1, 4), (0, 4, 1, 5), (1, 3, 2, 5)],
    "left": [(0, 3, 2, 4), (0, 4, 1, 5), (1, 4, 2, 5)],
    "right": [(0, 3, 1, 4), (0, 4, 2, 5), (1, 3, 2, 4)],
    "rows": [(0, 3, 1, 5), (1, 3, 2, 5)],
    "cols": [(0, 3, 2, 4), (0, 4, 2, 5)],
    "all": [(0, 3, 2, 5)],
}


def test_html_injective_on_2x2_tilings():
    H = grid22()
    htmls = {name: to_html(compose_structure(q, H)) for name, q in TILINGS_2x2.items()}
    assert len(set(htmls.values())) == len(htmls)


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return (orient(p1, p2, q1) * orient(p1, p2, q2) < 0) and (orient(q1, q2, p1) * orient(q1, q2, p2) < 0)


def _is_simple(poly):
    n = len(poly)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                return False
    return len(set(poly)) == n


def _signed_area(poly):
    p = np.asarray(poly)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def test_polygons_simple_and_clockwise():
    for seed in range(40):
        gt = generate_grid(3, 4, merge_fraction=0.3, seed=seed)
        rng = np.random.default_rng(seed)
        wgt = apply_warp(gt, WarpField(8, 2 * gt.width, 2 * gt.height, *rng.uniform(0, 6.28, 2)))
        for c in wgt.structure.cells:
            assert _is_simple(c.polygon)
            # y points down, so clockwise on screen has positive shoelace area
            assert _signed_area(c.polygon) > 0
            assert c.polygon[0] == c.corners[0]


def test_warped_single_cell_corners():
    gt = generate_grid(1, 1, seed=3)
    corners = grid_corners(gt)
    for k, A in enumerate((1.0, 3.0, 5.0)):
        w = WarpField(A, 3 * gt.width, 3 * gt.height, 0.3 * k, 1.1 + k)
        cell = apply_warp(gt, w).structure.cells[0]
        expect = w.displace([corners[(0, 2)], corners[(0, 3)], corners[(1, 3)], corners[(1, 2)]])
        assert np.abs(np.asarray(cell.corners) - expect).max() <= 0.5


def test_remap_identity_and_jitter(rng):
    H = grid22()
    quads = TILINGS_2x2["singles"]
    assert remap_quadruples(quads, H, H) == quads
    jittered = [s.replace(samples=s.samples + rng.uniform(-1, 1, s.samples.shape)) for s in H]
    H2 = order_regularize(list(reversed(jittered)))
    assert remap_quadruples(quads, H, H2) == quads


def test_remap_missing_separator():
    H = grid22()
    H2 = order_regularize([s for k, s in enumerate(H) if k != 4])
    assert remap_quadruples([(0, 3, 1, 5)], H, H2) == [(0, 3, 1, 4)]
    with pytest.raises(RemapError) as e:
        remap_quadruples([(0, 4, 1, 5)], H, H2)
    assert e.value.index == 4


def test_separators_shift_cell_indexes():
    # an extra separator no cell uses does not add a grid row
    H = order_regularize([line((0, 0), (100, 0)), line((0, 20), (100, 20)), line((0, 50), (100, 50)),
                          line((0, 0), (0, 50)), line((100, 0), (100, 50))])
    s = compose_structure([(0, 3, 2, 4)], H)
    assert (s.n_rows, s.n_cols) == (1, 1)
    assert s.cells[0].polygon == ((0, 0), (100, 0), (100, 50), (0, 50))


def test_curved_separator_polygon_follows_curve():
    xs = np.linspace(0, 100, 15)
    top = Separator(np.column_stack([xs, 5 * np.sin(np.pi * xs / 100)]))
    H = order_regularize([top, line((0, 50), (100, 50)), line((0, 0), (0, 50)), line((100, 0), (100, 50))])
    c = compose_cell((0, 2, 1, 3), H)
    assert len(c.polygon) > 4
    assert _is_simple(c.polygon)
