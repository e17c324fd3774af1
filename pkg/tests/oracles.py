"""Slow reference implementations used only by the tests."""

from functools import lru_cache
from itertools import permutations

from tabweave.teds import MarkupTree


def as_tuple(node):
    return ((node.tag, node.rowspan, node.colspan), tuple(as_tuple(c) for c in node.children))


def _size(forest):
    return sum(1 + _size(ch) for _, ch in forest)


def forest_distance(a, b):
    """Ordered tree edit distance by the plain recursive forest definition."""

    @lru_cache(maxsize=None)
    def d(F, G):
        if not F and not G:
            return 0.0
        if not F:
            return float(_size(G))
        if not G:
            return float(_size(F))
        (lv, cv), (lw, cw) = F[-1], G[-1]
        return min(
            d(F[:-1] + cv, G) + 1,
            d(F, G[:-1] + cw) + 1,
            d(cv, cw) + d(F[:-1], G[:-1]) + (lv != lw),
        )

    return d((as_tuple(a),), (as_tuple(b),))


def random_tree(rng, n):
    """Random ordered tree with ``n`` nodes rooted at a table element."""
    nodes = [MarkupTree("table")]
    for _ in range(n - 1):
        parent = nodes[rng.integers(len(nodes))]
        tag = ["tr", "td", "th"][rng.integers(3)]
        if tag == "tr":
            child = MarkupTree(tag)
        else:
            child = MarkupTree(tag, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        parent.children.insert(int(rng.integers(len(parent.children) + 1)), child)
        nodes.append(child)
    return nodes[0]


def random_stochastic(rng, n, m):
    P = rng.random((n, m))
    P[rng.random((n, m)) < 0.2] = 0.0
    P[:, 0] += 1e-3
    return P / P.sum(axis=1, keepdims=True)


def brute_force_matchings(cost):
    """All maximum-cardinality matchings as ``(total, sorted pairs)``, cheapest first."""
    n, m = cost.shape
    out = []
    if n <= m:
        for p in permutations(range(m), n):
            out.append((sum(cost[i, p[i]] for i in range(n)), sorted((i, p[i]) for i in range(n))))
    else:
        for p in permutations(range(n), m):
            out.append((sum(cost[p[j], j] for j in range(m)), sorted((p[j], j) for j in range(m))))
    out.sort(key=lambda t: t[0])
    return out
