# Match predicted separators to ground truth with the Hungarian algorithm,
# then attach the leftover near-duplicates to their anchors.
from tabweave import expand_one_to_many, generate_grid, match_one_to_one, perturb

gt = generate_grid(2, 3, seed=4)
preds = perturb(gt, jitter_sigma=1.0, duplicate_prob=0.5, seed=4)

assign = match_one_to_one(preds, list(gt.separators))
print(f"{len(preds)} predictions, {len(gt.separators)} ground truths")
print(f"matched pairs: {len(assign.pairs)}, total cost {assign.total_cost:.3f}")
print("unmatched predictions:", assign.unmatched_preds)

groups = expand_one_to_many(assign, preds, threshold=5.0)
for g, members in sorted(groups.groups.items()):
    print(f"  gt {g}: anchor {members[0]}, extras {list(members[1:])}")
