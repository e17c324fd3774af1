# Group elements into row/column instances and paint them into index masks
# at the full resolution and at each stride of the pyramid.
from tabweave import build_mask_pyramid, build_relation_instances, generate_grid, rasterize_relation_mask

gt = generate_grid(3, 3, merge_fraction=0.2, cell_size_range=(64, 64), seed=2)
inst = build_relation_instances(gt.relations)
print(f"{gt.relations.n} elements, {inst.M} row instances, {inst.P} column instances")
print("rows:", inst.row_instances)

mask = rasterize_relation_mask(gt.relations.boxes, inst.row_instances, gt.width, gt.height)
pyr = build_mask_pyramid(mask)
for s, lvl in pyr.levels.items():
    print(f"stride {s:2d}: shape {lvl.shape}")
print(pyr.levels[32])
