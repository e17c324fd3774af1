# End to end: warped ground truth, noisy duplicated proposals, NMS, ordering,
# re-expressing the true sequence against the survivors, and composing again.
from tabweave import (
    apply_warp, compose_structure, generate_grid, order_regularize, perturb, random_warp,
    remap_quadruples, separator_nms, stream, teds, to_html,
)

scores = []
for seed in range(10):
    gt = generate_grid(4, 5, merge_fraction=0.2, cell_size_range=(64, 128), seed=seed)
    gt = apply_warp(gt, random_warp(gt, 10.0, stream(seed, 99)))
    H = order_regularize(separator_nms(perturb(gt, 0.5, 1.0, seed=seed), 5.0))
    quads = remap_quadruples(gt.quads, gt.separators, H)
    scores.append(teds(to_html(compose_structure(quads, H)), gt.html))
    print(f"seed {seed}: {len(H)} separators kept, TEDS {scores[-1]:.3f}")
print(f"mean TEDS {sum(scores) / len(scores):.3f}")
