# Score a prediction that merged two cells against the ground truth with
# adjacency F1, TEDS and BLEU, then compute an attention KL profile.
import re

import numpy as np

from tabweave import adjacency_f1, bleu, compose_structure, generate_grid, kl_profile, teds, to_html

gt = generate_grid(2, 3, seed=5)
quads = gt.quads
# merge the first two cells of the top row
top = [q for q in quads if q[0] == 0]
merged = [(0, top[0][1], 1, top[1][3])] + [q for q in quads if q not in top[:2]]
pred = compose_structure(merged, gt.separators)

r = adjacency_f1(pred, gt.structure)
print(f"adjacency P={r.precision:.3f} R={r.recall:.3f} F1={r.f1:.3f} (tp={r.tp} fp={r.fp} fn={r.fn})")
print(f"TEDS {teds(to_html(pred), gt.html):.4f}")

tokens = lambda html: re.findall(r"<[^>]+>", html)  # noqa: E731
print(f"BLEU over HTML tags {bleu(tokens(to_html(pred)), tokens(gt.html)):.4f}")

attn = np.array([[0.9, 0.1], [0.5, 0.5], [0.5, 0.5]])
print("KL profile (nats):", np.round(kl_profile(attn), 5))
