"""Tree edit distance between table trees and the derived TED / TEDS-Struct scores.

Distances use the Zhang-Shasha dynamic program over postorder numberings,
with unit insert/delete costs and a rename cost that depends on the cost
model: ``struct`` compares tags and spans only; ``content`` additionally
charges the normalized Levenshtein distance between ``td`` texts.
"""

from __future__ import annotations

from enum import Enum

from ..table import LogicalTable, TreeNode, to_tree
from .text import content_distance


class CostModel(str, Enum):
    STRUCT = "struct"
    CONTENT = "struct+content"


def _cell_text(node: TreeNode) -> str:
    return node.text.replace("\n", " ")


def rename_cost(a: TreeNode, b: TreeNode, cost: CostModel) -> float:
    if a.tag != b.tag:
        return 1.0
    if a.tag != "td":
        return 0.0
    if (a.col_span, a.row_span) != (b.col_span, b.row_span):
        return 1.0
    if cost == CostModel.STRUCT:
        return 0.0
    return content_distance(_cell_text(a), _cell_text(b))


class _Annotated:
    """Postorder numbering, leftmost-leaf table and keyroots of one tree."""

    def __init__(self, root: TreeNode):
        self.nodes: list[TreeNode] = []
        self.lmd: list[int] = []
        # iterative postorder; a node's leftmost leaf is its first child's
        lmd_of: dict[int, int] = {}
        stack = [(root, False)]
        while stack:
            node, visited = stack.pop()
            if visited:
                idx = len(self.nodes)
                self.nodes.append(node)
                lmd_of[id(node)] = lmd_of[id(node.children[0])] if node.children else idx
                self.lmd.append(lmd_of[id(node)])
                continue
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
        # keyroots: the highest node for each distinct leftmost leaf
        seen: dict[int, int] = {}
        for i, l in enumerate(self.lmd):
            seen[l] = i
        self.keyroots = sorted(seen.values())


def tree_edit_distance(a: TreeNode, b: TreeNode, cost: CostModel = CostModel.STRUCT) -> float:
    ta, tb = _Annotated(a), _Annotated(b)
    na, nb = len(ta.nodes), len(tb.nodes)
    td = [[0.0] * nb for _ in range(na)]

    for i in ta.keyroots:
        for j in tb.keyroots:
            li, lj = ta.lmd[i], tb.lmd[j]
            m, n = i - li + 2, j - lj + 2
            fd = [[0.0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + 1.0
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + 1.0
            for x in range(1, m):
                ii = li + x - 1
                for y in range(1, n):
                    jj = lj + y - 1
                    if ta.lmd[ii] == li and tb.lmd[jj] == lj:
                        fd[x][y] = min(
                            fd[x - 1][y] + 1.0,
                            fd[x][y - 1] + 1.0,
                            fd[x - 1][y - 1] + rename_cost(ta.nodes[ii], tb.nodes[jj], cost),
                        )
                        td[ii][jj] = fd[x][y]
                    else:
                        p = ta.lmd[ii] - li
                        q = tb.lmd[jj] - lj
                        fd[x][y] = min(
                            fd[x - 1][y] + 1.0,
                            fd[x][y - 1] + 1.0,
                            fd[p][q] + td[ii][jj],
                        )
    return td[na - 1][nb - 1]


def ted_score(pred: LogicalTable, gt: LogicalTable, cost: CostModel = CostModel.CONTENT) -> float:
    """1 - distance / max(node counts); TED with ``CONTENT``, TEDS-Struct with ``STRUCT``."""
    tp, tg = to_tree(pred), to_tree(gt)
    n = max(tp.size(), tg.size())
    score = 1.0 - tree_edit_distance(tp, tg, cost) / n
    return min(1.0, max(0.0, score))
