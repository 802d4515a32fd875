"""
Tests for composing a kernel strategy with solutions of its antecedent.
"""

import pytest

from gameproof.composition import (
    DirectComposition,
    RecomputeComposition,
    classify,
    compose,
    composition_bound,
)
from gameproof.extraction import extract
from gameproof.runtime import (
    DoNothing,
    Machine,
    RandomEnvironment,
    ReactiveScript,
    ScriptedEnvironment,
    get_solution,
    play,
)
from gameproof.semantics import bottom, parse_run, top
from gameproof.syntax import Player, Sequent, parse_formula, parse_sequent

ROUTED = (
    "(s1 & s2) /\\ (t1 | t2) => "
    "(p1 & q1) /\\ ((p2 & q2) /\\ ((r1 | r2) /\\ (p3 & q3)))"
)


def cube_composite(cube_proof, cube_sequent, recompute):
    return compose(extract(cube_proof), cube_sequent, [DoNothing(), get_solution("mul")], recompute)


class TestHelpers:
    def test_bound(self, cube_sequent):
        assert composition_bound(cube_sequent, 1) == 9

    @pytest.mark.parametrize("move, expected", [
        ("1.0", ("succ",)),
        ("0.1.:0", ("rep", 1, "0")),
        ("0.1.0.#10", ("ante", 1, "0")),
        ("2.0", None),
    ])
    def test_classify(self, move, expected):
        assert classify(move, False) == expected

    def test_solution_count(self, cube_proof, cube_sequent):
        with pytest.raises(ValueError):
            DirectComposition(extract(cube_proof), cube_sequent, [DoNothing()])

    def test_recompute_needs_closed_sequent(self):
        with pytest.raises(ValueError):
            RecomputeComposition(DoNothing(), Sequent((), parse_formula("p(x)")), [])


class TestCube:
    """The cube kernel fed by a multiplication solution solves the cube outright."""

    @pytest.mark.parametrize("recompute", [False, True])
    def test_answers(self, cube_proof, cube_sequent, standard, recompute):
        composite = cube_composite(cube_proof, cube_sequent, recompute)
        bare = Sequent((), cube_sequent.succedent)
        rec = play(composite, ScriptedEnvironment([(0, "#10")]), bare, standard)
        assert rec.run == (bottom("#10"), top("#1000"))
        assert rec.winner is Player.TOP

    @pytest.mark.parametrize("recompute", [False, True])
    @pytest.mark.parametrize("c", ["0", "1", "10"])
    def test_every_cube_in_the_universe(self, cube_proof, cube_sequent, standard, c, recompute):
        composite = cube_composite(cube_proof, cube_sequent, recompute)
        bare = Sequent((), cube_sequent.succedent)
        rec = play(composite, ScriptedEnvironment([(0, f"#{c}")]), bare, standard)
        assert rec.run == (bottom(f"#{c}"), top("#" + format(int(c, 2) ** 3, "b")))
        assert rec.winner is Player.TOP

    def test_recompute_keeps_no_move_text(self, cube_proof, cube_sequent, standard):
        composite = cube_composite(cube_proof, cube_sequent, True)
        bare = Sequent((), cube_sequent.succedent)
        rec = play(composite, ScriptedEnvironment([(0, "#10")]), bare, standard)
        assert rec.flags["audit.retained_strings"] == 0
        assert rec.flags["bound"] == 9


class TestRouting:
    """Moves reach the antecedent solution and come back to the kernel."""

    EXPECTED = parse_run("B 0.0\nB 1.0.0\nT 1.1.0.1\nB 1.1.1.0\n")

    def play_routed(self, recompute):
        s = parse_sequent(ROUTED)
        kernel = ReactiveScript([(2, "1.1.1.0.1"), (3, "0.0..0.0")])
        composite = compose(kernel, s, [ReactiveScript([(1, "1.0")])], recompute)
        env = ScriptedEnvironment([(0, "0.0"), (1, "1.0.0"), (3, "1.1.1.0")])
        return play(composite, env, Sequent((), s.succedent))

    def test_recompute(self):
        rec = self.play_routed(True)
        assert rec.run == self.EXPECTED
        assert rec.flags["audit.restarts"] == 6
        assert rec.flags["history"] == 6
        assert rec.flags["bound"] == 6

    def test_direct(self):
        rec = self.play_routed(False)
        assert rec.run == self.EXPECTED
        assert "aborted" not in rec.flags


class TestRandomEnvironments:
    """Both compositions agree on every play and the recompute audits stay within bounds."""

    def test_recompute_matches_direct(self, cube_proof, cube_sequent, standard):
        bare = Sequent((), cube_sequent.succedent)
        for seed in range(200):
            pool = ("0", "1", "10")
            direct = play(cube_composite(cube_proof, cube_sequent, False),
                          RandomEnvironment(seed, pool), bare, standard)
            rec = play(cube_composite(cube_proof, cube_sequent, True),
                       RandomEnvironment(seed, pool), bare, standard)
            assert rec.run == direct.run, seed
            assert rec.winner is Player.TOP
            bound = rec.flags["bound"]
            assert rec.flags["history"] <= bound
            assert rec.flags["audit.restarts"] <= bound
            assert rec.flags["audit.max_depth"] <= bound
            assert rec.flags["audit.max_index"] <= bound
            assert rec.flags["audit.index_checks"] > 0
            assert rec.flags["audit.retained_strings"] == 0


class Hoarder(Machine):
    """Keeps the text of every move it has seen."""

    def start(self):
        return ()

    def step(self, state, run):
        return state + tuple(lm.move for lm in run[len(state):]), None


class TestRetainedStrings:
    def test_state_holding_moves_is_counted(self):
        composite = RecomputeComposition(Hoarder(), Sequent((), parse_formula("!x: p(x)")), [])
        rec = play(composite, ScriptedEnvironment([(0, "#1")]),
                   Sequent((), parse_formula("!x: p(x)")))
        assert rec.run == (bottom("#1"),)
        assert rec.flags["audit.retained_strings"] >= 1

    def test_sizes_and_addresses_are_not_counted(self):
        composite = RecomputeComposition(DoNothing(), Sequent((), parse_formula("!x: p(x)")), [])
        rec = play(composite, ScriptedEnvironment([(0, "#1")]),
                   Sequent((), parse_formula("!x: p(x)")))
        assert rec.flags["audit.retained_strings"] == 0
