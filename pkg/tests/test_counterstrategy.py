"""
Tests for refuting machines on unprovable sequents.
"""

import random

import pytest

from gameproof.calculus import Proof, Unprovable, prove
from gameproof.corpus import ITEMS, get_item
from gameproof.counterstrategy import build_counterstrategy, counter_report, refute
from gameproof.errors import CounterstrategyError
from gameproof.extraction import extract
from gameproof.runtime import DoNothing, ReactiveScript
from gameproof.semantics import Interpretation, initial_state, top, winnable
from gameproof.syntax import Player, choice_count, format_sequent, parse_sequent


class TestRefute:
    def test_swapped_choice(self):
        """⊤ commits to y first; the counterstrategy picks a different x."""
        ref = refute(parse_sequent("=> ?y: !x: (p(x) -> p(y))"), ReactiveScript([(0, "#0")]))
        assert ref.run[0] == top("#0")
        assert ref.run[1].player is Player.BOTTOM
        assert ref.run[1].move != "#0"
        assert ref.verify()

    def test_do_nothing_without_replication(self):
        ref = refute(parse_sequent("=> (p & q) -> (p & q) /\\ (p & q)"), DoNothing())
        assert ref.verify()

    def test_illegal_move_is_its_own_refutation(self):
        ref = refute(parse_sequent("=> p | q"), ReactiveScript([(0, "2")]))
        assert ref.record.illegal.player is Player.TOP
        assert ref.verify()

    def test_report(self):
        ref = refute(parse_sequent("=> p | q"), DoNothing())
        report = counter_report(ref)
        assert report["run"] == []
        assert set(report) == {"sequent", "run", "interpretation"}


class TestBuild:
    def test_provable_sequent(self):
        with pytest.raises(CounterstrategyError, match="provable"):
            build_counterstrategy(parse_sequent("=> !x: ?y: (p(x) -> p(y))"))


UNPROVABLE_ITEMS = sorted(name for name, item in ITEMS.items() if item.expect == "unprovable")

MISMATCHED = [
    ("choice-copycat", "swapped-choice"),
    ("choice-copycat", "function-value"),
    ("blind-to-choice", "choice-to-blind"),
    ("replicated-choice", "unreplicated-choice"),
    ("replicated-exists", "unreplicated-exists"),
]


def random_choice_formula(rng, depth):
    if depth == 0 or rng.random() < 0.4:
        return rng.choice(["p", "q", "r", "~p", "~q", "~r"])
    op = rng.choice(["/\\", "\\/", "&", "|"])
    left = random_choice_formula(rng, depth - 1)
    right = random_choice_formula(rng, depth - 1)
    return f"({left}) {op} ({right})"


def random_sequents(count, seed):
    rng = random.Random(seed)
    found = []
    while len(found) < count:
        s = parse_sequent("=> " + random_choice_formula(rng, 6))
        if choice_count(s.succedent) <= 6:
            found.append(s)
    return found


class TestCorpusRefutations:
    """Every unprovable corpus sequent defeats machines, with countermodels of at most 3."""

    @pytest.mark.parametrize("name", UNPROVABLE_ITEMS)
    def test_do_nothing_loses(self, name):
        ref = refute(get_item(name).parsed, DoNothing())
        assert ref.verify()
        assert ref.interpretation.size <= 3

    @pytest.mark.parametrize("proved, target", MISMATCHED)
    def test_strategy_for_another_sequent_loses(self, proved, target):
        proof = prove(get_item(proved).parsed)
        assert isinstance(proof, Proof)
        ref = refute(get_item(target).parsed, extract(proof))
        assert ref.verify()
        assert ref.interpretation.size <= 3


class TestOracleAgreement:
    """On random quantifier-free sequents, search agrees with the game oracle and refutation."""

    def test_prove_winnable_refute_agree(self):
        rng = random.Random(7)
        for s in random_sequents(100, seed=2024):
            found = prove(s)
            assert isinstance(found, (Proof, Unprovable)), format_sequent(s)
            if isinstance(found, Proof):
                for _ in range(10):
                    interp = Interpretation(size=1, predicates={
                        name: frozenset({()}) if rng.random() < 0.5 else frozenset()
                        for name in ("p", "q", "r")
                    })
                    assert winnable(initial_state(s), interp), format_sequent(s)
            else:
                assert refute(s, DoNothing()).verify(), format_sequent(s)
