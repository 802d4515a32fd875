"""
Tests for the golden corpus registry.
"""

import pytest

from gameproof.calculus import Proof
from gameproof.corpus import (
    ITEMS,
    check_item,
    get_item,
    get_item_descriptions,
    list_items,
    load_resource_proof,
    multiplication_table,
    run_corpus,
    solution_for,
)
from gameproof.runtime import DoNothing


class TestRegistry:
    """Test the item registry."""

    def test_list_items(self):
        items = list_items()
        assert "cube" in items
        assert "legal-run-census" in items
        assert len(items) == len(ITEMS)

    def test_get_item(self):
        item = get_item("choice-copycat")
        assert item.expect == "provable"
        assert isinstance(item.hand_proof(), Proof)

    def test_unknown_item(self):
        with pytest.raises(ValueError, match="Unknown corpus item"):
            get_item("nonexistent")

    def test_descriptions(self):
        descriptions = get_item_descriptions()
        assert set(descriptions) == set(ITEMS)
        assert all(descriptions.values())

    def test_every_sequent_parses(self):
        for item in ITEMS.values():
            assert item.parsed is not None

    def test_expectations_are_known(self):
        kinds = {"provable", "unprovable", "census", "compose"}
        assert {item.expect for item in ITEMS.values()} <= kinds

    def test_resource_proof(self):
        assert len(load_resource_proof("copycat.json")) == 3


class TestSolutions:
    def test_multiplication_table(self):
        table = multiplication_table()
        assert table.fn("11", "101") == "1111"
        assert table.fn("100", "100") is None

    def test_solution_for(self):
        assert isinstance(solution_for("do-nothing"), DoNothing)
        assert solution_for("mul-table").name == "mul-table"
        assert solution_for("succ").fn("1") == "10"


class TestRunning:
    """Check a few items end to end."""

    @pytest.mark.parametrize("name", [
        "choice-copycat",
        "swapped-choice",
        "legal-run-census",
        "cube-composition",
    ])
    def test_item_passes(self, name):
        result = check_item(name)
        assert result.passed, result.detail

    def test_census_detail(self):
        assert check_item("legal-run-census").detail == "13 runs, 10 won by ⊤"

    def test_run_selected(self):
        results = run_corpus(names=["elementary-valid", "elementary-invalid"])
        assert [r.name for r in results] == ["elementary-valid", "elementary-invalid"]
        assert all(r.passed for r in results)
        assert results[0].to_dict()["passed"] is True
