import copy
import random

import pytest

from generators import random_tree
from oracles import brute_force_ted, content_cost, struct_cost
from tabkg.metrics import CostModel, ted_score, tree_edit_distance
from tabkg.table import LogicalTable, TableCell, TreeNode, to_tree


ORACLE_COSTS = {"struct": struct_cost, "content": content_cost}


def grid(texts):
    return LogicalTable.from_cells(
        TableCell(r, c, text=t) for r, row in enumerate(texts) for c, t in enumerate(row))


def test_identical_tables():
    t = grid([["a", "b"], ["c", "d"]])
    assert tree_edit_distance(to_tree(t), to_tree(t)) == 0.0
    assert ted_score(t, t) == 1.0
    assert ted_score(t, t, CostModel.STRUCT) == 1.0


def test_empty_vs_one_cell():
    assert tree_edit_distance(to_tree(LogicalTable()), to_tree(grid([["x"]])), CostModel.STRUCT) == 2.0


def test_content_rename_is_normalized_levenshtein():
    a, b = grid([["abc"]]), grid([["abd"]])
    assert tree_edit_distance(to_tree(a), to_tree(b), CostModel.CONTENT) == pytest.approx(1 / 3)
    assert tree_edit_distance(to_tree(a), to_tree(b), CostModel.STRUCT) == 0.0


def test_span_mismatch_forces_full_rename():
    a = LogicalTable(1, 2, (TableCell(0, 0, 1, 2, "same"),))
    b = LogicalTable(1, 2, (TableCell(0, 0, 1, 1, "same"),))
    assert tree_edit_distance(to_tree(a), to_tree(b), CostModel.CONTENT) == 1.0


def test_newlines_count_as_spaces():
    a, b = grid([["Jan\nSmit"]]), grid([["Jan Smit"]])
    assert ted_score(a, b) == 1.0


def test_score_against_empty():
    gt = grid([["a", "b"], ["c", "d"]])
    assert ted_score(LogicalTable(), gt) == pytest.approx(1 - 6 / 7)
    assert ted_score(LogicalTable(), LogicalTable()) == 1.0


def test_hand_counted_distance():
    # table(tr(td a, td b)) vs table(tr(td a), tr(td b)): td b is not a child of
    # table, so a new tr cannot adopt it; delete the tr, insert two new ones
    a = TreeNode("table", children=[TreeNode("tr", children=[TreeNode("td", text="a"), TreeNode("td", text="b")])])
    b = TreeNode("table", children=[TreeNode("tr", children=[TreeNode("td", text="a")]),
                                    TreeNode("tr", children=[TreeNode("td", text="b")])])
    assert tree_edit_distance(a, b, CostModel.CONTENT) == 3.0
    assert brute_force_ted(a, b, ORACLE_COSTS)["content"] == 3.0


def test_oracle_on_small_random_trees():
    rng = random.Random(42)
    for _ in range(60):
        a, b = random_tree(rng), random_tree(rng)
        expected = brute_force_ted(a, b, ORACLE_COSTS)
        assert tree_edit_distance(a, b, CostModel.STRUCT) == pytest.approx(expected["struct"], abs=1e-12)
        assert tree_edit_distance(a, b, CostModel.CONTENT) == pytest.approx(expected["content"], abs=1e-12)


def test_metric_properties_struct():
    rng = random.Random(8)
    for _ in range(150):
        a, b, c = (random_tree(rng, 8) for _ in range(3))
        d = lambda x, y: tree_edit_distance(x, y, CostModel.STRUCT)  # noqa: E731
        assert d(a, copy.deepcopy(a)) == 0.0
        assert d(a, b) == d(b, a)
        assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


def test_score_bounds():
    rng = random.Random(9)
    for _ in range(100):
        cells_a = [TableCell(r, c, text=rng.choice(["", "x", "xy"])) for r in range(rng.randint(0, 3))
                   for c in range(rng.randint(0, 3))]
        cells_b = [TableCell(r, c, text=rng.choice(["", "x", "yz"])) for r in range(rng.randint(0, 3))
                   for c in range(rng.randint(0, 3))]
        a, b = LogicalTable.from_cells(cells_a), LogicalTable.from_cells(cells_b)
        for cost in CostModel:
            assert 0.0 <= ted_score(a, b, cost) <= 1.0
