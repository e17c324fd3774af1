"""Tree-edit-distance similarity between HTML table trees."""

from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import List, Optional

from .errors import DomainError

_VOID = {"br", "img", "hr", "meta", "link", "input", "col", "wbr"}


@dataclass
class MarkupTree:
    tag: str
    rowspan: Optional[int] = None
    colspan: Optional[int] = None
    content: str = ""
    children: List["MarkupTree"] = field(default_factory=list)

    def size(self):
        return 1 + sum(c.size() for c in self.children)

    def bracket(self):
        """Compact bracket notation, handy in test failure messages."""
        label = self.tag
        if self.rowspan is not None:
            label += f"[{self.rowspan}x{self.colspan}]"
        return "{" + label + "".join(c.bracket() for c in self.children) + "}"


def tree_from_structure(structure):
    from .composition import to_html

    return parse_html(to_html(structure))


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = None
        self.stack = []

    def handle_starttag(self, tag, attrs):
        if tag in _VOID:
            if self.stack and self.stack[-1].tag in ("td", "th"):
                self.stack[-1].content += f"<{tag}>"
            return
        if self.root is None and tag != "table":
            return
        if self.stack and self.stack[-1].tag in ("td", "th"):
            # inline markup inside a cell counts as content
            self.stack.append(MarkupTree(tag))
            return
        attrs = dict(attrs)
        node = MarkupTree(tag)
        if tag in ("td", "th"):
            node.rowspan = int(attrs.get("rowspan") or 1)
            node.colspan = int(attrs.get("colspan") or 1)
        if self.root is None:
            self.root = node
        else:
            self.stack[-1].children.append(node)
        self.stack.append(node)

    def handle_endtag(self, tag):
        if not self.stack:
            return
        # pop to the matching open tag, tolerating unclosed inner tags
        for k in range(len(self.stack) - 1, -1, -1):
            if self.stack[k].tag == tag:
                del self.stack[k:]
                return

    def handle_data(self, data):
        for node in reversed(self.stack):
            if node.tag in ("td", "th"):
                node.content += data
                return


def parse_html(text):
    """Parse the first ``<table>`` of ``text`` into a :class:`MarkupTree`."""
    b = _TreeBuilder()
    b.feed(text)
    b.close()
    if b.root is None:
        raise DomainError("no <table> element found")
    return b.root


def levenshtein(a, b):
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def rename_cost(a, b, structure_only=True):
    if a.tag != b.tag or a.rowspan != b.rowspan or a.colspan != b.colspan:
        return 1.0
    if structure_only or a.tag not in ("td", "th"):
        return 0.0
    n = max(len(a.content), len(b.content))
    return levenshtein(a.content, b.content) / n if n else 0.0


def _postorder(root):
    nodes, lml = [], []

    def walk(node):
        first = None
        for c in node.children:
            leaf = walk(c)
            if first is None:
                first = leaf
        idx = len(nodes)
        nodes.append(node)
        lml.append(idx if first is None else first)
        return lml[idx]

    walk(root)
    return nodes, lml


def _keyroots(lml):
    seen = {}
    for i, l in enumerate(lml):
        seen[l] = i  # highest postorder index per leftmost leaf
    return sorted(seen.values())


def tree_edit_distance(a, b, rename=rename_cost):
    """Ordered tree edit distance (Zhang-Shasha) with unit insert/delete."""
    A, la = _postorder(a)
    B, lb = _postorder(b)
    td = [[0.0] * len(B) for _ in A]
    for i in _keyroots(la):
        for j in _keyroots(lb):
            li, lj = la[i], lb[j]
            m, n = i - li + 2, j - lj + 2
            fd = [[0.0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, m):
                ix = li + x - 1
                row, prev = fd[x], fd[x - 1]
                for y in range(1, n):
                    jy = lj + y - 1
                    if la[ix] == li and lb[jy] == lj:
                        best = min(prev[y] + 1, row[y - 1] + 1, prev[y - 1] + rename(A[ix], B[jy]))
                        row[y] = best
                        td[ix][jy] = best
                    else:
                        px = la[ix] - li
                        py = lb[jy] - lj
                        row[y] = min(prev[y] + 1, row[y - 1] + 1, fd[px][py] + td[ix][jy])
    return td[-1][-1]


def teds(pred, gt, structure_only=True):
    """``1 - TED(pred, gt) / max(|pred|, |gt|)``, counting every node.

    Very differently shaped trees can need more edits than the larger tree
    has nodes; the score is clamped at 0 for those.
    """
    if pred is None or gt is None:
        raise DomainError("TEDS needs two rooted trees")
    if isinstance(pred, str):
        pred = parse_html(pred)
    if isinstance(gt, str):
        gt = parse_html(gt)
    dist = tree_edit_distance(pred, gt, lambda x, y: rename_cost(x, y, structure_only))
    return max(0.0, 1.0 - dist / max(pred.size(), gt.size()))
