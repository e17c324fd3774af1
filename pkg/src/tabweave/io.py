"""JSON documents, portable graymaps and the pipeline config.

Every document carries ``"schema": 1`` and a ``"kind"``. Keys are written in
a fixed order, floats with 17 significant digits, and unknown keys are
rejected on read. Validation failures raise :class:`ValidationError` with a
JSON-pointer path.
"""

import json
import math
import os
from dataclasses import dataclass, fields

import numpy as np

from .assignment import Assignment, GroupAssignment
from .bezier import DEFAULT_T, SepClass, Separator
from .composition import TableCell, TableStructure
from .errors import TabweaveError, ValidationError
from .evaluation import EvalReport
from .relations import STRIDES, RelationSet
from .selection import DEFAULT_SIGMA, OrderedSeparatorSet
from .synthetic import GroundTruth, WarpField

SCHEMA_VERSION = 1
CONFIG_ENV = "TABWEAVE_CONFIG"


# -- writing -------------------------------------------------------------


def format_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    s = "%.17g" % x
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _scalar(v):
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _is_flat(v):
    return isinstance(v, (list, tuple)) and all(
        not isinstance(x, (dict, list, tuple)) or (isinstance(x, (list, tuple)) and _is_flat(x)) for x in v
    )


def _emit(v, indent, out):
    pad = "  " * indent
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(v.items()):
            out.append(f"{pad}  {json.dumps(key)}: ")
            _emit(val, indent + 1, out)
            out.append(",\n" if k < len(v) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, (list, tuple)):
        if _is_flat(v):
            out.append(_inline(v))
            return
        out.append("[\n")
        for k, val in enumerate(v):
            out.append(pad + "  ")
            _emit(val, indent + 1, out)
            out.append(",\n" if k < len(v) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(v))


def _inline(v):
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    return _scalar(v)


def dumps(doc):
    """Deterministic JSON text (LF line endings, trailing newline)."""
    out = []
    _emit(doc, 0, out)
    return "".join(out) + "\n"


# -- encoders ------------------------------------------------------------


def _pts(a):
    return [[float(x), float(y)] for x, y in np.asarray(a, dtype=float)]


def _canvas(width, height):
    if width is None or height is None:
        return None
    return {"width": int(width), "height": int(height)}


def encode_separator(s):
    return {
        "cls": s.cls.value,
        "score": float(s.score),
        "samples": _pts(s.samples),
        "control": None if s.control is None else _pts(s.control),
        "class_probs": None if s.class_probs is None else [float(p) for p in s.class_probs],
    }


def encode_ordered(H):
    return {"n_h": H.n_h, "separators": [encode_separator(s) for s in H]}


def encode_relations(rel):
    return {
        "n": rel.n,
        "boxes": [list(b) for b in rel.boxes],
        "row_pairs": [list(p) for p in rel.row_pairs],
        "col_pairs": [list(p) for p in rel.col_pairs],
    }


def encode_cell(c):
    sr, er, sc, ec = c.logical
    row, col, rs, cs = c.grid
    return {
        "quad": list(c.quad),
        "logical": {"SR": sr, "ER": er, "SC": sc, "EC": ec},
        "grid": {"row": row, "col": col, "rowspan": rs, "colspan": cs},
        "corners": _pts(c.corners),
        "polygon": _pts(c.polygon),
        "content": c.content,
    }


def encode_structure_body(st):
    return {"n_rows": st.n_rows, "n_cols": st.n_cols, "cells": [encode_cell(c) for c in st.cells]}


def encode_warp(w):
    if w is None:
        return None
    return {f.name: float(getattr(w, f.name)) for f in fields(w)}


def _doc(kind, **body):
    return {"schema": SCHEMA_VERSION, "kind": kind, **body}


def separators_doc(seps, width=None, height=None):
    return _doc("separators", canvas=_canvas(width, height), separators=[encode_separator(s) for s in seps])


def ordered_doc(H, width=None, height=None):
    return _doc("ordered_separators", canvas=_canvas(width, height), **encode_ordered(H))


def relations_doc(rel, width=None, height=None):
    return _doc("relations", canvas=_canvas(width, height), **encode_relations(rel))


def structure_doc(st, width=None, height=None):
    H = st.source if st.source is not None else OrderedSeparatorSet([], 0)
    return _doc("structure", canvas=_canvas(width, height), separators=encode_ordered(H),
                **encode_structure_body(st))


def composition_doc(H, tokens, width=None, height=None):
    return _doc("composition", canvas=_canvas(width, height), separators=encode_ordered(H), tokens=list(tokens))


def ground_truth_doc(gt):
    return _doc(
        "ground_truth",
        seed=gt.seed,
        canvas=_canvas(gt.width, gt.height),
        warp=encode_warp(gt.warp),
        separators=encode_ordered(gt.separators),
        relations=encode_relations(gt.relations),
        tokens=list(gt.tokens),
        structure=encode_structure_body(gt.structure),
        html=gt.html,
    )


def points_doc(points, width=None, height=None):
    return _doc("points", canvas=_canvas(width, height), points=_pts(points))


def bezier_doc(control, residual, width=None, height=None):
    return _doc("bezier", canvas=_canvas(width, height), control=_pts(control), residual=float(residual))


def assignment_doc(assign, groups=None):
    return _doc(
        "assignment",
        pairs=[list(p) for p in assign.pairs],
        unmatched_preds=list(assign.unmatched_preds),
        unmatched_gts=list(assign.unmatched_gts),
        total_cost=float(assign.total_cost),
        groups=None if groups is None else [{"gt": g, "preds": list(ps)} for g, ps in sorted(groups.groups.items())],
    )


def report_doc(rep):
    return _doc(
        "eval_report",
        precision=float(rep.precision),
        recall=float(rep.recall),
        f1=float(rep.f1),
        counts={"tp": rep.tp, "fp": rep.fp, "fn": rep.fn},
        teds=None if rep.teds is None else float(rep.teds),
        bleu=None if rep.bleu is None else float(rep.bleu),
    )


def metric_doc(name, value):
    return _doc("metric", name=name, value=float(value))


def kl_doc(profile, epsilon):
    return _doc("kl_profile", epsilon=float(epsilon), profile=[float(v) for v in profile])


# -- reading / validation ------------------------------------------------


def _fail(path, msg):
    raise ValidationError(path, msg)


def _obj(v, path, keys, optional=()):
    if not isinstance(v, dict):
        _fail(path, f"expected an object, got {type(v).__name__}")
    for k in v:
        if k not in keys and k not in optional:
            _fail(f"{path}/{k}", "unknown field")
    for k in keys:
        if k not in v:
            _fail(f"{path}/{k}", "missing field")
    return v


def _num(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        _fail(path, "number must be finite")
    return float(v)


def _int(v, path, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, f"expected an integer, got {type(v).__name__}")
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}")
    return v


def _str(v, path):
    if not isinstance(v, str):
        _fail(path, f"expected a string, got {type(v).__name__}")
    return v


def _list(v, path, length=None):
    if not isinstance(v, list):
        _fail(path, f"expected an array, got {type(v).__name__}")
    if length is not None and len(v) != length:
        _fail(path, f"expected {length} entries, got {len(v)}")
    return v


def _points(v, path, length=None):
    _list(v, path, length)
    out = []
    for k, p in enumerate(v):
        _list(p, f"{path}/{k}", 2)
        out.append((_num(p[0], f"{path}/{k}/0"), _num(p[1], f"{path}/{k}/1")))
    return out


def _check_header(doc, kind, keys, path=""):
    _obj(doc, path, ["schema", "kind", *keys])
    if doc["schema"] != SCHEMA_VERSION:
        _fail(f"{path}/schema", f"unsupported schema version {doc['schema']!r}")
    if doc["kind"] != kind:
        _fail(f"{path}/kind", f"expected {kind!r}, got {doc['kind']!r}")


def decode_canvas(v, path):
    if v is None:
        return None, None
    _obj(v, path, ["width", "height"])
    return _int(v["width"], f"{path}/width", 1), _int(v["height"], f"{path}/height", 1)


def decode_separator(v, path, T=DEFAULT_T):
    _obj(v, path, ["cls", "score", "samples", "control", "class_probs"])
    try:
        cls = SepClass(_str(v["cls"], f"{path}/cls"))
    except ValueError:
        _fail(f"{path}/cls", f"unknown class {v['cls']!r}")
    score = _num(v["score"], f"{path}/score")
    if not 0.0 <= score <= 1.0:
        _fail(f"{path}/score", "score must lie in [0, 1]")
    samples = _points(v["samples"], f"{path}/samples", T)
    control = None if v["control"] is None else _points(v["control"], f"{path}/control", 4)
    probs = None
    if v["class_probs"] is not None:
        _list(v["class_probs"], f"{path}/class_probs", 3)
        probs = [_num(p, f"{path}/class_probs/{k}") for k, p in enumerate(v["class_probs"])]
        if min(probs) < 0:
            _fail(f"{path}/class_probs", "probabilities must be non-negative")
    return Separator(samples, cls, score, control, probs)


def decode_ordered(v, path, T=DEFAULT_T):
    _obj(v, path, ["n_h", "separators"])
    seps = [decode_separator(s, f"{path}/separators/{k}", T) for k, s in enumerate(_list(v["separators"], f"{path}/separators"))]
    n_h = _int(v["n_h"], f"{path}/n_h", 0)
    if n_h > len(seps):
        _fail(f"{path}/n_h", f"{n_h} exceeds separator count {len(seps)}")
    if any(s.cls == SepClass.BACKGROUND for s in seps):
        _fail(f"{path}/separators", "ordered sets cannot contain background separators")
    return OrderedSeparatorSet(seps, n_h)


def decode_relations(v, path):
    _obj(v, path, ["n", "boxes", "row_pairs", "col_pairs"])
    n = _int(v["n"], f"{path}/n", 0)
    boxes = []
    for k, b in enumerate(_list(v["boxes"], f"{path}/boxes")):
        _list(b, f"{path}/boxes/{k}", 4)
        boxes.append(tuple(_num(x, f"{path}/boxes/{k}/{i}") for i, x in enumerate(b)))
    if boxes and len(boxes) != n:
        _fail(f"{path}/boxes", f"{len(boxes)} boxes for {n} elements")
    pairs = {}
    for name in ("row_pairs", "col_pairs"):
        out = []
        for k, p in enumerate(_list(v[name], f"{path}/{name}")):
            _list(p, f"{path}/{name}/{k}", 2)
            i, j = (_int(x, f"{path}/{name}/{k}/{m}", 0) for m, x in enumerate(p))
            if i >= n or j >= n:
                _fail(f"{path}/{name}/{k}", f"index out of range for {n} elements")
            out.append((i, j))
        pairs[name] = out
    return RelationSet(n, boxes, pairs["row_pairs"], pairs["col_pairs"])


def decode_cell(v, path):
    _obj(v, path, ["quad", "logical", "grid", "corners", "polygon", "content"])
    quad = tuple(_int(x, f"{path}/quad/{k}", 0) for k, x in enumerate(_list(v["quad"], f"{path}/quad", 4)))
    lg = _obj(v["logical"], f"{path}/logical", ["SR", "ER", "SC", "EC"])
    logical = tuple(_int(lg[k], f"{path}/logical/{k}", 0) for k in ("SR", "ER", "SC", "EC"))
    gd = _obj(v["grid"], f"{path}/grid", ["row", "col", "rowspan", "colspan"])
    grid = tuple(_int(gd[k], f"{path}/grid/{k}", 0) for k in ("row", "col", "rowspan", "colspan"))
    corners = tuple(_points(v["corners"], f"{path}/corners", 4))
    polygon = tuple(_points(v["polygon"], f"{path}/polygon"))
    return TableCell(quad, polygon, corners, logical, grid, _str(v["content"], f"{path}/content"))


def decode_structure_body(v, path, H):
    cells = tuple(decode_cell(c, f"{path}/cells/{k}", ) for k, c in enumerate(_list(v["cells"], f"{path}/cells")))
    return TableStructure(cells, _int(v["n_rows"], f"{path}/n_rows", 0), _int(v["n_cols"], f"{path}/n_cols", 0), source=H)


def decode_tokens(v, path):
    from .composition import END, SEP, START

    out = []
    for k, t in enumerate(_list(v, path)):
        if isinstance(t, str):
            if t not in (START, SEP, END):
                _fail(f"{path}/{k}", f"unknown token {t!r}")
            out.append(t)
        else:
            out.append(_int(t, f"{path}/{k}", 0))
    return out


def decode_warp(v, path):
    if v is None:
        return None
    names = [f.name for f in fields(WarpField)]
    _obj(v, path, names)
    try:
        return WarpField(**{k: _num(v[k], f"{path}/{k}") for k in names})
    except TabweaveError as e:
        _fail(path, str(e))


def read_document(doc, T=DEFAULT_T):
    """Decode any supported document into ``(kind, payload)``.

    Payloads: ``points`` -> (array, canvas); ``bezier`` -> (control,
    residual, canvas); ``separators`` -> (list, canvas); ``ordered_separators``
    -> (set, canvas); ``relations`` -> (RelationSet, canvas); ``structure``
    -> (TableStructure, canvas); ``composition`` -> (set, tokens, canvas);
    ``ground_truth`` -> GroundTruth; ``assignment`` -> (Assignment, groups);
    ``eval_report`` -> EvalReport; ``attention`` -> matrix;
    ``metric`` -> (name, value); ``kl_profile`` -> (profile, epsilon).
    """
    if not isinstance(doc, dict):
        _fail("", "document must be a JSON object")
    kind = doc.get("kind")
    if kind == "points":
        _check_header(doc, kind, ["canvas", "points"])
        return kind, (np.array(_points(doc["points"], "/points")), decode_canvas(doc["canvas"], "/canvas"))
    if kind == "bezier":
        _check_header(doc, kind, ["canvas", "control", "residual"])
        return kind, (np.array(_points(doc["control"], "/control", 4)), _num(doc["residual"], "/residual"),
                      decode_canvas(doc["canvas"], "/canvas"))
    if kind == "separators":
        _check_header(doc, kind, ["canvas", "separators"])
        seps = [decode_separator(s, f"/separators/{k}", T) for k, s in enumerate(_list(doc["separators"], "/separators"))]
        return kind, (seps, decode_canvas(doc["canvas"], "/canvas"))
    if kind == "ordered_separators":
        _check_header(doc, kind, ["canvas", "n_h", "separators"])
        body = {k: doc[k] for k in ("n_h", "separators")}
        return kind, (decode_ordered(body, "", T), decode_canvas(doc["canvas"], "/canvas"))
    if kind == "relations":
        _check_header(doc, kind, ["canvas", "n", "boxes", "row_pairs", "col_pairs"])
        body = {k: doc[k] for k in ("n", "boxes", "row_pairs", "col_pairs")}
        return kind, (decode_relations(body, ""), decode_canvas(doc["canvas"], "/canvas"))
    if kind == "structure":
        _check_header(doc, kind, ["canvas", "separators", "n_rows", "n_cols", "cells"])
        H = decode_ordered(doc["separators"], "/separators", T)
        return kind, (decode_structure_body(doc, "", H), decode_canvas(doc["canvas"], "/canvas"))
    if kind == "composition":
        _check_header(doc, kind, ["canvas", "separators", "tokens"])
        H = decode_ordered(doc["separators"], "/separators", T)
        return kind, (H, decode_tokens(doc["tokens"], "/tokens"), decode_canvas(doc["canvas"], "/canvas"))
    if kind == "ground_truth":
        _check_header(doc, kind, ["seed", "canvas", "warp", "separators", "relations", "tokens", "structure", "html"])
        H = decode_ordered(doc["separators"], "/separators", T)
        width, height = decode_canvas(doc["canvas"], "/canvas")
        _obj(doc["structure"], "/structure", ["n_rows", "n_cols", "cells"])
        return kind, GroundTruth(
            H,
            decode_relations(doc["relations"], "/relations"),
            decode_tokens(doc["tokens"], "/tokens"),
            decode_structure_body(doc["structure"], "/structure", H),
            _str(doc["html"], "/html"),
            _int(doc["seed"], "/seed"),
            width,
            height,
            decode_warp(doc["warp"], "/warp"),
        )
    if kind == "assignment":
        _check_header(doc, kind, ["pairs", "unmatched_preds", "unmatched_gts", "total_cost", "groups"])
        pairs = [tuple(_int(x, f"/pairs/{k}/{m}", 0) for m, x in enumerate(_list(p, f"/pairs/{k}", 2)))
                 for k, p in enumerate(_list(doc["pairs"], "/pairs"))]
        up = [_int(x, f"/unmatched_preds/{k}", 0) for k, x in enumerate(_list(doc["unmatched_preds"], "/unmatched_preds"))]
        ug = [_int(x, f"/unmatched_gts/{k}", 0) for k, x in enumerate(_list(doc["unmatched_gts"], "/unmatched_gts"))]
        groups = None
        if doc["groups"] is not None:
            groups = {}
            for k, g in enumerate(_list(doc["groups"], "/groups")):
                _obj(g, f"/groups/{k}", ["gt", "preds"])
                groups[_int(g["gt"], f"/groups/{k}/gt", 0)] = tuple(
                    _int(x, f"/groups/{k}/preds/{m}", 0) for m, x in enumerate(_list(g["preds"], f"/groups/{k}/preds"))
                )
            groups = GroupAssignment(groups)
        return kind, (Assignment(pairs, up, ug, _num(doc["total_cost"], "/total_cost")), groups)
    if kind == "eval_report":
        _check_header(doc, kind, ["precision", "recall", "f1", "counts", "teds", "bleu"])
        c = _obj(doc["counts"], "/counts", ["tp", "fp", "fn"])
        return kind, EvalReport(
            _num(doc["precision"], "/precision"), _num(doc["recall"], "/recall"), _num(doc["f1"], "/f1"),
            _int(c["tp"], "/counts/tp", 0), _int(c["fp"], "/counts/fp", 0), _int(c["fn"], "/counts/fn", 0),
            None if doc["teds"] is None else _num(doc["teds"], "/teds"),
            None if doc["bleu"] is None else _num(doc["bleu"], "/bleu"),
        )
    if kind == "attention":
        _check_header(doc, kind, ["matrix"])
        rows = _list(doc["matrix"], "/matrix")
        mat = [[_num(x, f"/matrix/{i}/{j}") for j, x in enumerate(_list(r, f"/matrix/{i}"))] for i, r in enumerate(rows)]
        if len({len(r) for r in mat}) > 1:
            _fail("/matrix", "rows have different lengths")
        return kind, np.array(mat)
    if kind == "metric":
        _check_header(doc, kind, ["name", "value"])
        return kind, (_str(doc["name"], "/name"), _num(doc["value"], "/value"))
    if kind == "kl_profile":
        _check_header(doc, kind, ["epsilon", "profile"])
        prof = [_num(x, f"/profile/{k}") for k, x in enumerate(_list(doc["profile"], "/profile"))]
        return kind, (np.array(prof), _num(doc["epsilon"], "/epsilon"))
    _fail("/kind", f"unknown document kind {kind!r}")


def write_document(kind, payload):
    """Inverse of :func:`read_document`."""
    if kind == "points":
        pts, (w, h) = payload
        return points_doc(pts, w, h)
    if kind == "bezier":
        ctrl, res, (w, h) = payload
        return bezier_doc(ctrl, res, w, h)
    if kind == "separators":
        seps, (w, h) = payload
        return separators_doc(seps, w, h)
    if kind == "ordered_separators":
        H, (w, h) = payload
        return ordered_doc(H, w, h)
    if kind == "relations":
        rel, (w, h) = payload
        return relations_doc(rel, w, h)
    if kind == "structure":
        st, (w, h) = payload
        return structure_doc(st, w, h)
    if kind == "composition":
        H, tokens, (w, h) = payload
        return composition_doc(H, tokens, w, h)
    if kind == "ground_truth":
        return ground_truth_doc(payload)
    if kind == "assignment":
        return assignment_doc(*payload)
    if kind == "eval_report":
        return report_doc(payload)
    if kind == "attention":
        return _doc("attention", matrix=[[float(x) for x in r] for r in np.asarray(payload)])
    if kind == "metric":
        return metric_doc(*payload)
    if kind == "kl_profile":
        return kl_doc(*payload)
    raise ValueError(f"unknown document kind {kind!r}")


def loads(text, T=DEFAULT_T):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError("", f"invalid JSON: {e}") from e
    return read_document(doc, T)


def load(path, T=DEFAULT_T):
    with open(path, encoding="utf-8") as f:
        return loads(f.read(), T)


def save(path, doc):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(doc))


def roundtrip(text, T=DEFAULT_T):
    """``dumps(write(read(text)))``; equals ``text`` for any document this module wrote."""
    return dumps(write_document(*loads(text, T)))


# -- graymaps ------------------------------------------------------------


def to_pgm(mask):
    """Plain (P2) graymap text for an integer image."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError("graymap needs a 2-D image")
    if m.size and m.min() < 0:
        raise ValueError("graymap values must be non-negative")
    maxval = max(1, int(m.max()) if m.size else 1)
    lines = ["P2", f"{m.shape[1]} {m.shape[0]}", str(maxval)]
    lines += [" ".join(str(int(v)) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def from_pgm(text):
    parts = [ln.split("#", 1)[0] for ln in text.splitlines()]
    tok = " ".join(parts).split()
    if not tok or tok[0] != "P2":
        raise ValidationError("", "not a plain P2 graymap")
    w, h = int(tok[1]), int(tok[2])
    vals = np.array([int(v) for v in tok[4 : 4 + w * h]], dtype=np.int64)
    if len(vals) != w * h:
        raise ValidationError("", f"expected {w * h} pixel values, got {len(vals)}")
    return vals.reshape(h, w)


# -- config --------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    T: int = DEFAULT_T
    sigma: float = DEFAULT_SIGMA
    eps_ext: float = 20.0
    iou_thresh: float = 0.6
    strides: tuple = STRIDES
    seed: int = 0

    def override(self, **kw):
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update({k: v for k, v in kw.items() if v is not None})
        return PipelineConfig(**vals)


def config_from_dict(v):
    names = [f.name for f in fields(PipelineConfig)]
    _obj(v, "", [], optional=names)
    kw = {}
    if "T" in v:
        kw["T"] = _int(v["T"], "/T", 2)
    for name in ("sigma", "eps_ext", "iou_thresh"):
        if name in v:
            x = _num(v[name], f"/{name}")
            if x < 0 or (name == "sigma" and x == 0):
                _fail(f"/{name}", "must be positive")
            kw[name] = x
    if "strides" in v:
        kw["strides"] = tuple(_int(s, f"/strides/{k}", 1) for k, s in enumerate(_list(v["strides"], "/strides")))
    if "seed" in v:
        kw["seed"] = _int(v["seed"], "/seed")
    return PipelineConfig(**kw)


def load_config(path=None):
    """Config from ``path``, else ``$TABWEAVE_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return PipelineConfig()
    with open(path, encoding="utf-8") as f:
        try:
            v = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError("", f"invalid JSON in config: {e}") from e
    return config_from_dict(v)
