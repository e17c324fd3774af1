# Duplicate separator proposals collapse under NMS, then the survivors are
# put in reading order: horizontals top to bottom, verticals left to right.
from tabweave import generate_grid, order_regularize, perturb, separator_nms

gt = generate_grid(3, 4, seed=1)
proposals = perturb(gt, jitter_sigma=0.8, duplicate_prob=1.0, seed=1)
print(f"ground truth separators: {len(gt.separators)}, proposals: {len(proposals)}")

kept = separator_nms(proposals, sigma=5.0)
print(f"after NMS: {len(kept)}")

H = order_regularize(kept)
print(f"ordered: {H.n_h} horizontal, {H.n_v} vertical")
for k, s in enumerate(H):
    kind = "h" if H.is_horizontal(k) else "v"
    x, y = s.samples.mean(axis=0)
    print(f"  {k:2d} {kind} mean=({x:6.1f}, {y:6.1f}) score={s.score:.2f} {s.cls.value}")
