"""Acceptance criteria 1-10.

Run with ``pytest tests/test_acceptance.py -s`` (or as a script) to see one
PASS/FAIL line per criterion.
"""

import os
import sys
import tempfile
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import brute_force_matchings, forest_distance, random_stochastic, random_tree  # noqa: E402
from pipeline import FIXTURES, SUBCOMMANDS, digest_tree, run_all  # noqa: E402
from tabweave.assignment import cost_matrix, match_one_to_one  # noqa: E402
from tabweave.bezier import Separator, fit_least_squares, sample_uniform, separator_distance  # noqa: E402
from tabweave.composition import compose_structure, remap_quadruples, to_html  # noqa: E402
from tabweave.evaluation import adjacency_f1, bleu, kl_profile  # noqa: E402
from tabweave.relations import build_mask_pyramid, connected_instances  # noqa: E402
from tabweave.selection import order_regularize, separator_nms  # noqa: E402
from tabweave.synthetic import apply_warp, generate_grid, perturb, random_warp  # noqa: E402
from tabweave.teds import teds, tree_edit_distance  # noqa: E402


def random_gt(seed, max_size=10, max_merge=0.3, max_warp=15.0):
    rng = np.random.default_rng([99, seed])
    rows, cols = (int(v) for v in rng.integers(1, max_size + 1, 2))
    merge = float(rng.uniform(0, max_merge)) if rows * cols > 1 else 0.0
    gt = generate_grid(rows, cols, merge, (64, 128), seed=seed)
    amp = float(rng.uniform(0, max_warp))
    return apply_warp(gt, random_warp(gt, amp, rng))


def criterion_1():
    t0 = time.perf_counter()
    bad, max_warp = [], 0.0
    for seed in range(200):
        gt = random_gt(seed)
        max_warp = max(max_warp, gt.warp.amplitude if gt.warp else 0.0)
        st = compose_structure(gt.quads, gt.separators)
        r = adjacency_f1(st, gt.structure)
        if teds(to_html(st), gt.html) != 1.0 or (r.precision, r.recall, r.f1) != (1.0, 1.0, 1.0):
            bad.append(seed)
    dt = time.perf_counter() - t0
    return not bad and dt < 60, f"200 tables, max warp {max_warp:.1f} px, failures {bad}, {dt:.1f} s"


def criterion_2():
    rng = np.random.default_rng(2)
    worst, dists = 0.0, []
    for _ in range(1000):
        ctrl = rng.uniform(0, 1000, (4, 2))
        pts = sample_uniform(ctrl, 15)
        worst = max(worst, float(np.abs(fit_least_squares(pts)[0] - ctrl).max()))
        noisy_fit, _ = fit_least_squares(pts + rng.normal(0, 1, pts.shape))
        dists.append(separator_distance(sample_uniform(noisy_fit, 15), pts))
    mean = float(np.mean(dists))
    return worst < 1e-6 and mean < 2, f"max control error {worst:.2e}, noisy mean distance {mean:.3f} px"


def _random_seps(rng, n):
    out = []
    for _ in range(n):
        a = rng.uniform(0, 200, 2)
        pts = np.linspace(a, a + rng.uniform(-100, 100, 2), 15)
        out.append(Separator.from_class_probs(pts, rng.dirichlet([1, 1, 1])))
    return out


def criterion_3():
    rng = np.random.default_rng(3)
    bad = 0
    for _ in range(100):
        n, m = (int(v) for v in rng.integers(1, 8, 2))
        preds, gts = _random_seps(rng, n), _random_seps(rng, m)
        a = match_one_to_one(preds, gts)
        cost = cost_matrix(preds, gts)
        ranked = brute_force_matchings(cost)
        best = ranked[0][0]
        ties = [pairs for total, pairs in ranked if total - best <= 1e-9]
        if abs(a.total_cost - best) > 1e-9 or a.pairs not in ties:
            bad += 1
    return bad == 0, f"{bad}/100 mismatches against exhaustive search"


def criterion_4():
    rng = np.random.default_rng(4)
    bad = []
    for trial in range(500):
        rows, cols = (int(v) for v in rng.integers(1, 7, 2))
        gt = generate_grid(rows, cols, 0.2 if rows * cols > 1 else 0.0, seed=trial)
        cands = perturb(gt, float(rng.uniform(0, 1)), 1.0, seed=trial)
        kept = separator_nms(cands, 5.0)
        again = separator_nms(kept, 5.0)
        ok = len(again) == len(kept) and all(x is y for x, y in zip(again, kept))
        ok &= all(separator_distance(kept[i], kept[j]) >= 5.0
                  for i in range(len(kept)) for j in range(i + 1, len(kept)))
        ok &= len(kept) == len(gt.separators)
        if not ok:
            bad.append(trial)
    return not bad, f"500 trials, failures {bad[:10]}"


def criterion_5():
    bad = []
    for seed in range(100):
        gt = random_gt(1000 + seed, max_size=6)
        kept = separator_nms(perturb(gt, 0.5, 1.0, seed=seed), 5.0)
        H = order_regularize(kept)
        quads = remap_quadruples(gt.quads, gt.separators, H)
        if teds(to_html(compose_structure(quads, H)), gt.html) != 1.0:
            bad.append(seed)
    return not bad, f"100 cases, failures {bad}"


def criterion_6():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(200):
        a = random_tree(rng, int(rng.integers(1, 9)))
        b = random_tree(rng, int(rng.integers(1, 9)))
        worst = max(worst, abs(tree_edit_distance(a, b) - forest_distance(a, b)))
    self_ok = all(teds(t, t) == 1.0 for t in (random_tree(rng, int(rng.integers(1, 21))) for _ in range(500)))
    return worst <= 1e-9 and self_ok, f"max oracle gap {worst:.1e}, teds(A,A)=1 on 500 trees: {self_ok}"


def criterion_7():
    rng = np.random.default_rng(7)
    sym, tri = True, 0.0
    for _ in range(1000):
        a, b, c = (rng.uniform(0, 1000, (15, 2)) for _ in range(3))
        sym &= separator_distance(a, b) == separator_distance(b, a)
        tri = max(tri, separator_distance(a, c) - separator_distance(a, b) - separator_distance(b, c))
    kl_ok = True
    for _ in range(200):
        n, m = (int(v) for v in rng.integers(1, 8, 2))
        P = random_stochastic(rng, n, m)
        kl_ok &= bool(np.all(kl_profile(P) >= 0))
        kl_ok &= bool(np.all(kl_profile(np.repeat(P[:1], n, axis=0)) == 0))
    return sym and tri <= 1e-9 and kl_ok, f"symmetric {sym}, worst triangle excess {tri:.1e}, KL ok {kl_ok}"


def _bfs(n, pairs):
    adj = [[] for _ in range(n)]
    for i, j in pairs:
        adj[i].append(j)
        adj[j].append(i)
    seen, comps = [False] * n, []
    for s in range(n):
        if seen[s]:
            continue
        seen[s], queue, comp = True, [s], []
        while queue:
            u = queue.pop(0)
            comp.append(u)
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        comps.append(tuple(sorted(comp)))
    return comps


def criterion_8():
    rng = np.random.default_rng(8)
    graphs_ok = True
    for _ in range(100):
        n = int(rng.integers(1, 51))
        pairs = [tuple(int(v) for v in rng.integers(0, n, 2)) for _ in range(int(rng.integers(0, 2 * n)))]
        graphs_ok &= connected_instances(n, pairs) == _bfs(n, pairs)
    masks_ok = True
    for _ in range(50):
        H, W = (int(v) for v in rng.integers(1, 300, 2))
        m = rng.integers(0, 9, (H, W))
        pyr = build_mask_pyramid(m)
        masks_ok &= set(pyr.levels) == {8, 16, 32, 64}
        for s, lvl in pyr.levels.items():
            ii, jj = np.meshgrid(np.arange(lvl.shape[0]), np.arange(lvl.shape[1]), indexing="ij")
            masks_ok &= lvl.shape == (-(-H // s), -(-W // s)) and bool(np.array_equal(lvl, m[ii * s, jj * s]))
    return graphs_ok and masks_ok, f"BFS agreement {graphs_ok}, pyramid {masks_ok}"


def criterion_9():
    v = bleu(list("abcde"), list("abcd"))
    return abs(v - 0.2 ** 0.25) <= 1e-9, f"BLEU {v:.12f} vs {0.2 ** 0.25:.12f}"


def criterion_10():
    from contextlib import redirect_stdout
    from io import StringIO

    with tempfile.TemporaryDirectory() as tmp:
        digests, codes = [], []
        for name in ("a", "b"):
            out = os.path.join(tmp, name)
            os.makedirs(out)
            buf = StringIO()
            with redirect_stdout(buf):
                codes.append(run_all(out))
            with open(os.path.join(out, "stdout.txt"), "w") as f:
                f.write(buf.getvalue())
            digests.append(digest_tree(out))
        with open(os.path.join(tmp, "a", "gt.json"), "rb") as a, open(os.path.join(FIXTURES, "gt.json"), "rb") as g:
            golden = a.read() == g.read()
    ok = codes[0] == codes[1] == {n: 0 for n in SUBCOMMANDS} and digests[0] == digests[1] and golden
    return ok, f"{len(SUBCOMMANDS)} subcommands, {len(digests[0])} files hashed, golden synth match {golden}"


CRITERIA = [
    (1, "oracle round trip", criterion_1),
    (2, "LSF recovery", criterion_2),
    (3, "Hungarian exactness", criterion_3),
    (4, "NMS contract", criterion_4),
    (5, "noise pipeline", criterion_5),
    (6, "TEDS exactness", criterion_6),
    (7, "metric axioms", criterion_7),
    (8, "relation instances", criterion_8),
    (9, "BLEU spot value", criterion_9),
    (10, "determinism", criterion_10),
]


def _line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {num:>2} {name}: {detail}"


@pytest.mark.parametrize("num, name, fn", CRITERIA, ids=[f"c{n}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num, name, fn in CRITERIA:
        ok, detail = fn()
        results.append(ok)
        print(_line(num, name, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
