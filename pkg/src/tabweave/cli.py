"""``tabweave`` command-line front end.

Exit status: 0 success, 2 input validation error, 3 composition or metric
domain error, 64 usage error. Errors go to stderr as
``tabweave: error[<category>]: <message>``.
"""

import argparse
import os
import re
import sys

from . import io
from .assignment import expand_one_to_many, match_one_to_one
from .bezier import fit_least_squares, sample_uniform
from .composition import (
    compose_structure,
    parse_sequence,
    remap_quadruples,
    serialize_sequence,
    to_html,
    to_logical_text,
)
from .errors import TabweaveError, ValidationError
from .evaluation import adjacency_f1, bleu, kl_profile
from .relations import build_mask_pyramid, build_relation_instances, rasterize_relation_mask
from .selection import order_regularize, separator_nms
from .synthetic import apply_warp, generate_grid, perturb, random_warp, stream
from .teds import parse_html, teds, tree_from_structure

EXIT_USAGE = 64
_WARP_STREAM = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write_text(path, text):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _save(path, doc):
    _write_text(path, io.dumps(doc))


def _load(path, cfg, kinds=None):
    try:
        kind, payload = io.load(path, cfg.T)
    except FileNotFoundError:
        raise ValidationError("", f"no such file: {path}")
    if kinds and kind not in kinds:
        raise ValidationError("/kind", f"{path}: expected one of {sorted(kinds)}, got {kind!r}")
    return kind, payload


def _separators_of(kind, payload):
    """Separator list and canvas from any document that carries separators."""
    if kind == "separators":
        return payload
    if kind == "ordered_separators":
        return list(payload[0]), payload[1]
    if kind == "composition":
        return list(payload[0]), payload[2]
    if kind == "ground_truth":
        return list(payload.separators), (payload.width, payload.height)
    raise ValidationError("/kind", f"{kind!r} documents carry no separators")


def _ordered_of(kind, payload):
    if kind == "ordered_separators":
        return payload
    if kind == "composition":
        return payload[0], payload[2]
    if kind == "ground_truth":
        return payload.separators, (payload.width, payload.height)
    if kind == "separators":
        return order_regularize(payload[0]), payload[1]
    raise ValidationError("/kind", f"{kind!r} documents carry no separators")


def _structure_of(path, cfg):
    kind, payload = _load(path, cfg, {"structure", "ground_truth"})
    return payload.structure if kind == "ground_truth" else payload[0]


def _tree_of(path, cfg):
    if path.endswith((".html", ".htm")):
        with open(path, encoding="utf-8") as f:
            return parse_html(f.read())
    kind, payload = _load(path, cfg, {"structure", "ground_truth"})
    if kind == "ground_truth":
        return parse_html(payload.html)
    return tree_from_structure(payload[0])


def _tokens_of(path, mode):
    with open(path, encoding="utf-8") as f:
        text = f.read()
    if mode == "auto":
        mode = "html" if path.endswith((".html", ".htm")) else "whitespace"
    if mode == "html":
        return re.findall(r"<[^>]+>|[^<\s]", text)
    return text.split()


# -- subcommands ---------------------------------------------------------


def cmd_fit(args, cfg):
    kind, payload = _load(args.input, cfg, {"points", "separators"})
    if kind == "points":
        pts, canvas = payload
        ctrl, res = fit_least_squares(pts)
        _save(args.output, io.bezier_doc(ctrl, res, *canvas))
    else:
        seps, canvas = payload
        fitted = [s.replace(control=fit_least_squares(s.samples)[0]) for s in seps]
        _save(args.output, io.separators_doc(fitted, *canvas))


def cmd_sample(args, cfg):
    _, (ctrl, _res, canvas) = _load(args.input, cfg, {"bezier"})
    _save(args.output, io.points_doc(sample_uniform(ctrl, cfg.T), *canvas))


def cmd_nms(args, cfg):
    kind, payload = _load(args.input, cfg)
    seps, canvas = _separators_of(kind, payload)
    _save(args.output, io.separators_doc(separator_nms(seps, cfg.sigma), *canvas))


def cmd_order(args, cfg):
    kind, payload = _load(args.input, cfg)
    seps, canvas = _separators_of(kind, payload)
    _save(args.output, io.ordered_doc(order_regularize(seps), *canvas))


def cmd_assign(args, cfg):
    preds, _ = _separators_of(*_load(args.input, cfg))
    gts, _ = _separators_of(*_load(args.gt, cfg))
    assign = match_one_to_one(preds, gts, args.w_cls, args.w_reg)
    groups = expand_one_to_many(assign, preds, args.threshold)
    _save(args.output, io.assignment_doc(assign, groups))


def cmd_compose(args, cfg):
    kind, payload = _load(args.input, cfg, {"composition", "ground_truth"})
    if kind == "ground_truth":
        H, tokens, canvas = payload.separators, payload.tokens, (payload.width, payload.height)
    else:
        H, tokens, canvas = payload
    structure = compose_structure(parse_sequence(tokens, len(H)), H, cfg.eps_ext)
    os.makedirs(args.output, exist_ok=True)
    _save(os.path.join(args.output, "table.json"), io.structure_doc(structure, *canvas))
    _write_text(os.path.join(args.output, "table.html"), to_html(structure) + "\n")
    lines = to_logical_text(structure)
    _write_text(os.path.join(args.output, "table.txt"), "".join(line + "\n" for line in lines))


def cmd_remap(args, cfg):
    kind, payload = _load(args.input, cfg, {"composition", "ground_truth"})
    if kind == "ground_truth":
        old_H, tokens, canvas = payload.separators, payload.tokens, (payload.width, payload.height)
    else:
        old_H, tokens, canvas = payload
    new_H, _ = _ordered_of(*_load(args.new, cfg))
    quads = remap_quadruples(parse_sequence(tokens, len(old_H)), old_H, new_H, args.max_dist)
    _save(args.output, io.composition_doc(new_H, serialize_sequence(quads), *canvas))


def cmd_relmask(args, cfg):
    kind, payload = _load(args.input, cfg, {"relations", "ground_truth"})
    if kind == "ground_truth":
        rel, canvas = payload.relations, (payload.width, payload.height)
    else:
        rel, canvas = payload
    W = args.width or canvas[0]
    H = args.height or canvas[1]
    if not W or not H:
        raise ValidationError("/canvas", "canvas size unknown; pass --width and --height")
    inst = build_relation_instances(rel)
    os.makedirs(args.output, exist_ok=True)
    for name, groups in (("row", inst.row_instances), ("col", inst.col_instances)):
        mask = rasterize_relation_mask(rel.boxes, groups, W, H)
        pyr = build_mask_pyramid(mask, cfg.strides)
        _write_text(os.path.join(args.output, f"{name}.pgm"), io.to_pgm(mask))
        for s, lvl in pyr.levels.items():
            _write_text(os.path.join(args.output, f"{name}_s{s}.pgm"), io.to_pgm(lvl))


def cmd_synth(args, cfg):
    gt = generate_grid(args.rows, args.cols, args.merge, (args.cell_min, args.cell_max), cfg.seed, cfg.T)
    if args.warp:
        gt = apply_warp(gt, random_warp(gt, args.warp, stream(cfg.seed, _WARP_STREAM)))
    _save(args.output, io.ground_truth_doc(gt))


def cmd_perturb(args, cfg):
    _, gt = _load(args.input, cfg, {"ground_truth"})
    seps = perturb(gt, args.jitter, args.dup, cfg.seed)
    _save(args.output, io.separators_doc(seps, gt.width, gt.height))


def _pairs(pred, gt, exts):
    """(name, pred_path, gt_path) for single files or same-stem files in two directories."""
    if os.path.isdir(pred) != os.path.isdir(gt):
        raise ValidationError("", "--pred and --gt must both be files or both be directories")
    if not os.path.isdir(pred):
        return [(os.path.basename(pred), pred, gt)]

    def index(d):
        out = {}
        for name in sorted(os.listdir(d)):
            stem, ext = os.path.splitext(name)
            if ext in exts:
                out.setdefault(stem, os.path.join(d, name))
        return out

    p, g = index(pred), index(gt)
    return [(stem, p[stem], g[stem]) for stem in sorted(p) if stem in g]


def _emit(rows, args, metric, value, to_doc):
    if len(rows) == 1 and not os.path.isdir(args.pred):
        print(f"{metric} {value(rows[0][1]):.17g}")
        if args.output:
            _save(args.output, to_doc(rows[0][1]))
        return
    for name, res in rows:
        print(f"{name} {metric} {value(res):.17g}")
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        for name, res in rows:
            _save(os.path.join(args.output, f"{name}.json"), to_doc(res))


def cmd_eval_f1(args, cfg):
    rows = []
    for name, p, g in _pairs(args.pred, args.gt, {".json"}):
        rows.append((name, adjacency_f1(_structure_of(p, cfg), _structure_of(g, cfg), cfg.iou_thresh)))
    _emit(rows, args, "F1", lambda r: r.f1, io.report_doc)


def cmd_eval_teds(args, cfg):
    rows = []
    for name, p, g in _pairs(args.pred, args.gt, {".json", ".html", ".htm"}):
        rows.append((name, teds(_tree_of(p, cfg), _tree_of(g, cfg), structure_only=not args.content)))
    _emit(rows, args, "TEDS", float, lambda v: io.metric_doc("teds", v))


def cmd_eval_bleu(args, cfg):
    v = bleu(_tokens_of(args.pred, args.tokens), _tokens_of(args.gt, args.tokens), args.max_n)
    print(f"BLEU {v:.17g}")
    if args.output:
        _save(args.output, io.metric_doc("bleu", v))


def cmd_kl(args, cfg):
    _, mat = _load(args.input, cfg, {"attention"})
    prof = kl_profile(mat, args.epsilon)
    _save(args.output, io.kl_doc(prof, args.epsilon))


# -- parser --------------------------------------------------------------


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file (falls back to $TABWEAVE_CONFIG)")
    common.add_argument("--seed", type=int)
    common.add_argument("--t", dest="T", type=int, help="sample points per separator")
    common.add_argument("--sigma", type=float, help="NMS distance threshold in pixels")
    common.add_argument("--eps-ext", type=float, help="terminal extension for cell closure in pixels")
    common.add_argument("--iou", dest="iou_thresh", type=float, help="cell matching IoU threshold")

    p = _Parser(prog="tabweave", description="Curved-separator table structure toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_, io_args=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if io_args:
            sp.add_argument("-i", "--input", required=True)
            sp.add_argument("-o", "--output", required=True)
        sp.set_defaults(func=fn)
        return sp

    add("fit", cmd_fit, "fit control points to sample points")
    add("sample", cmd_sample, "sample a Bezier curve uniformly in t")
    add("nms", cmd_nms, "separator non-maximum suppression")
    add("order", cmd_order, "order-regularize separators")
    sp = add("assign", cmd_assign, "match predicted to ground-truth separators")
    sp.add_argument("--gt", required=True)
    sp.add_argument("--w-cls", type=float, default=1.0)
    sp.add_argument("--w-reg", type=float, default=1.0)
    sp.add_argument("--threshold", type=float, default=5.0)
    add("compose", cmd_compose, "compose cells from separators and a sequence")
    sp = add("remap", cmd_remap, "re-express a sequence against new separators")
    sp.add_argument("--new", required=True)
    sp.add_argument("--max-dist", type=float, default=5.0)
    sp = add("relmask", cmd_relmask, "rasterize relation instance masks (P2 graymaps)")
    sp.add_argument("--width", type=int)
    sp.add_argument("--height", type=int)
    sp = add("synth", cmd_synth, "generate a synthetic ground-truth table", io_args=False)
    sp.add_argument("--rows", type=int, required=True)
    sp.add_argument("--cols", type=int, required=True)
    sp.add_argument("--merge", type=float, default=0.0)
    sp.add_argument("--cell-min", type=int, default=60)
    sp.add_argument("--cell-max", type=int, default=120)
    sp.add_argument("--warp", type=float, default=0.0, help="warp amplitude in pixels")
    sp.add_argument("-o", "--output", required=True)
    sp = add("perturb", cmd_perturb, "noisy scored separators from a ground truth")
    sp.add_argument("--jitter", type=float, default=0.5)
    sp.add_argument("--dup", type=float, default=0.0)
    for name, fn, help_ in (("eval-f1", cmd_eval_f1, "adjacency precision/recall/F1"),
                            ("eval-teds", cmd_eval_teds, "tree-edit-distance similarity")):
        sp = add(name, fn, help_, io_args=False)
        sp.add_argument("--pred", required=True)
        sp.add_argument("--gt", required=True)
        sp.add_argument("-o", "--output")
        if name == "eval-teds":
            sp.add_argument("--content", action="store_true", help="compare cell contents too")
    sp = add("eval-bleu", cmd_eval_bleu, "BLEU between two token files", io_args=False)
    sp.add_argument("--pred", required=True)
    sp.add_argument("--gt", required=True)
    sp.add_argument("--max-n", type=int, default=4)
    sp.add_argument("--tokens", choices=("auto", "html", "whitespace"), default="auto")
    sp.add_argument("-o", "--output")
    sp = add("kl", cmd_kl, "attention KL-diversity profile")
    sp.add_argument("--epsilon", type=float, default=1e-12)
    return p


def run(argv=None):
    """Run one subcommand; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"tabweave: error[usage]: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = io.load_config(args.config).override(
            T=args.T, sigma=args.sigma, eps_ext=args.eps_ext, iou_thresh=args.iou_thresh, seed=args.seed
        )
        args.func(args, cfg)
    except TabweaveError as e:
        print(f"tabweave: error[{e.category}]: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"tabweave: error[io]: {e}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
