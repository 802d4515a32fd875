"""
Tests for the classical validity oracle.
"""

import pytest

from gameproof.classical import (
    CongruenceClosure,
    Invalid,
    Unknown,
    Valid,
    decide_validity,
    find_model,
    is_stable,
)
from gameproof.config import ClassicalBudget
from gameproof.syntax import App, Var, parse_formula, parse_sequent


class TestValidity:
    """Test decide_validity on small elementary formulas."""

    @pytest.mark.parametrize("text", [
        "p \\/ ~p",
        "(Ax: p(x)) -> p(0)",
        "(Ax: p(x)) -> Ex: p(x)",
        "Ax: Ay: (~(x = y) \\/ f(x) = f(y))",
        "(a = b /\\ p(a)) -> p(b)",
        "(Ex: Ay: r(x, y)) -> Ay: Ex: r(x, y)",
    ])
    def test_valid(self, text):
        assert isinstance(decide_validity(parse_formula(text)), Valid)

    @pytest.mark.parametrize("text", [
        "p",
        "p(0) -> Ax: p(x)",
        "(Ay: Ex: r(x, y)) -> Ex: Ay: r(x, y)",
        "f(a) = f(b) -> a = b",
    ])
    def test_invalid_with_countermodel(self, text):
        """An Invalid verdict carries a model that falsifies the formula."""
        f = parse_formula(text)
        verdict = decide_validity(f)
        assert isinstance(verdict, Invalid)
        assert not verdict.model.evaluate(f, verdict.valuation)

    def test_countermodel_is_small(self):
        verdict = decide_validity(parse_formula("p(0) -> Ax: p(x)"))
        assert verdict.model.size <= ClassicalBudget().max_domain

    @pytest.mark.parametrize("text", [
        "p(0) /\\ p(1) /\\ p(10) -> p(11)",
        "~(0 = 1) /\\ ~(10 = 11) -> q(100)",
    ])
    def test_many_constants_share_a_small_domain(self, text):
        """A saturated branch naming four or more constants still yields a small countermodel."""
        f = parse_formula(text)
        verdict = decide_validity(f)
        assert isinstance(verdict, Invalid)
        assert verdict.model.size <= ClassicalBudget().max_domain
        assert not verdict.model.evaluate(f, verdict.valuation)

    def test_rejects_choice_operators(self):
        with pytest.raises(ValueError):
            decide_validity(parse_formula("p | q"))

    def test_tiny_budget_is_unknown(self):
        f = parse_formula("(Ex: Ay: r(x, y)) -> Ay: Ex: r(x, y)")
        verdict = decide_validity(f, ClassicalBudget(steps=1))
        assert isinstance(verdict, Unknown)


class TestStability:
    """Test stability of sequents."""

    def test_stable(self):
        assert isinstance(is_stable(parse_sequent("p & q => p & q")), Valid)

    def test_unstable(self):
        assert isinstance(is_stable(parse_sequent("=> p | ~p")), Invalid)

    def test_cube_is_stable(self, cube_sequent):
        """⊓x in the succedent elementarizes to ⊤."""
        assert isinstance(is_stable(cube_sequent), Valid)


class TestCongruenceClosure:
    def test_congruence(self):
        a, b = Var("a"), Var("b")
        cc = CongruenceClosure()
        cc.add(App("f", (a,)))
        cc.add(App("f", (b,)))
        cc.merge(a, b)
        cc.close()
        assert cc.same(App("f", (a,)), App("f", (b,)))

    def test_distinct_until_merged(self):
        cc = CongruenceClosure()
        assert not cc.same(Var("a"), Var("b"))


class TestModelFinder:
    def test_finds_model(self):
        f = parse_formula("p(a) /\\ ~p(b)")
        found = find_model(f, 2)
        assert found is not None
        model, valuation = found
        assert model.evaluate(f, valuation)

    def test_unsatisfiable(self):
        assert find_model(parse_formula("p(a) /\\ ~p(a)"), 2) is None
