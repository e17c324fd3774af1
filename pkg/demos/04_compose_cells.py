# Turn a separator-index sequence into cell polygons, then print the HTML and
# the logical SR/SC/ER/EC lines. A gentle warp bends every separator first.
from tabweave import (
    WarpField, apply_warp, compose_structure, generate_grid, parse_sequence, to_html, to_logical_text,
)

gt = generate_grid(3, 3, merge_fraction=0.3, seed=8)
warped = apply_warp(gt, WarpField(6.0, 2 * gt.width, 2 * gt.height, 0.4, 1.3))

print("tokens:", " ".join(str(t) for t in warped.tokens))
structure = compose_structure(parse_sequence(warped.tokens), warped.separators)
print(f"{len(structure.cells)} cells on a {structure.n_rows}x{structure.n_cols} grid")
for cell in structure.cells:
    print(f"  quad {cell.quad}: {len(cell.polygon)} polygon vertices, grid {cell.grid}")

print(to_html(structure))
print("\n".join(to_logical_text(structure)))
