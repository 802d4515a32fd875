"""
Tests for machines, environments, the scheduler and the complexity meters.
"""

import json

import pytest

from gameproof.config import PlayConfig
from gameproof.errors import ScriptError
from gameproof.runtime import (
    DoNothing,
    FunctionSolution,
    ReactiveScript,
    ScriptedEnvironment,
    check_amplitude,
    get_solution,
    load_script,
    load_solution,
    magnitude,
    play,
    tricomplexity,
    unarify,
)
from gameproof.semantics import bottom, top
from gameproof.syntax import Player, parse_sequent

DOUBLE = "=> !x: ?y: y = x + x"


class TestMagnitude:
    def test_magnitude(self):
        assert magnitude("0.1.#101") == 3
        assert magnitude("#0") == 0
        assert magnitude("1.0") == 0

    def test_malformed_numeral(self):
        with pytest.raises(ScriptError):
            magnitude("#2")


class TestScripts:
    """Test timed environment scripts."""

    def test_load_script(self):
        script = load_script("tick 2\nmove #1\nmove 0\n\ntick 5\nmove 1.1\n")
        assert script == [(2, "#1"), (2, "0"), (5, "1.1")]

    def test_moves_before_first_tick_line(self):
        assert load_script("move #1\n") == [(0, "#1")]

    def test_bad_line(self):
        with pytest.raises(ScriptError, match="line 1"):
            load_script("jump 3\n")


class TestSolutions:
    """Test function solutions."""

    def test_builtin(self):
        assert get_solution("double").arity == 1
        assert get_solution("mul").arity == 2

    def test_unknown_builtin(self):
        with pytest.raises(ValueError, match="Available"):
            get_solution("sqrt")

    def test_table_file(self, temp_dir):
        path = temp_dir / "neg.json"
        path.write_text(json.dumps({"arity": 1, "rows": [["0", "1"], ["1", "0"]]}))
        solution = load_solution(str(path))
        assert solution.name == "neg"
        assert solution.fn("1") == "0"

    def test_table_bad_row(self, temp_dir):
        path = temp_dir / "bad.json"
        path.write_text(json.dumps({"arity": 1, "rows": [["2", "1"]]}))
        with pytest.raises(ScriptError):
            load_solution(str(path))

    def test_table_without_answer_waits(self, standard):
        solution = FunctionSolution.from_table(1, {("1",): "10"})
        rec = play(solution, ScriptedEnvironment([(0, "#11")]), parse_sequent(DOUBLE), standard)
        assert rec.run == (bottom("#11"),)
        assert rec.winner is Player.BOTTOM


class TestPlay:
    """Test the scheduler."""

    def test_double(self, standard):
        rec = play(get_solution("double"), ScriptedEnvironment([(0, "#11")]),
                   parse_sequent(DOUBLE), standard)
        assert rec.run == (bottom("#11"), top("#110"))
        assert rec.winner is Player.TOP
        assert rec.meters.amplitude == 3
        assert rec.meters.time == 0
        [meter] = rec.meters.moves
        assert meter.background == 2
        assert meter.timecost == 0

    def test_do_nothing_loses_a_choice_conjunction(self, standard):
        rec = play(DoNothing(), ScriptedEnvironment([(0, "1")]),
                   parse_sequent("=> 0 = 0 & 0 = 1"), standard)
        assert rec.winner is Player.BOTTOM

    def test_illegal_machine_move(self, standard):
        rec = play(ReactiveScript([(0, "1")]), ScriptedEnvironment([]),
                   parse_sequent("=> 0 = 0 & 0 = 1"), standard)
        assert rec.illegal.player is Player.TOP
        assert rec.winner is Player.BOTTOM

    def test_illegal_environment_move(self, standard):
        rec = play(DoNothing(), ScriptedEnvironment([(0, "0")]),
                   parse_sequent("=> 0 = 0 | 0 = 1"), standard)
        assert rec.illegal.player is Player.BOTTOM
        assert rec.winner is Player.TOP

    def test_clean_environment_rejects(self, standard):
        """Rejected moves are dropped; ⊤ still owes a choice."""
        rec = play(DoNothing(), ScriptedEnvironment([(0, "0")]),
                   parse_sequent("=> 0 = 0 | 0 = 1"), standard,
                   PlayConfig(clean_environment=True))
        assert rec.flags["rejected"] == ["0"]
        assert rec.run == ()
        assert rec.winner is Player.BOTTOM

    def test_no_interpretation_no_winner(self):
        rec = play(DoNothing(), ScriptedEnvironment([]), parse_sequent("=> p"))
        assert rec.winner is None

    def test_record_to_dict(self, standard):
        rec = play(get_solution("double"), ScriptedEnvironment([(0, "#1")]),
                   parse_sequent(DOUBLE), standard)
        data = rec.to_dict()
        assert data["run"] == ["B #1", "T #10"]
        assert data["winner"] == "T"
        assert data["illegal"] is None


class TestComplexity:
    """Test amplitude, space and time checks."""

    def test_unarify(self):
        assert unarify(lambda a, b: a + b)(3) == 6
        assert unarify(lambda a: a * 2)(3) == 6

    def test_double_bounds(self, standard):
        rec = play(get_solution("double"), ScriptedEnvironment([(0, "#11")]),
                   parse_sequent(DOUBLE), standard)
        assert check_amplitude(rec, lambda ell: ell + 1)
        assert not check_amplitude(rec, lambda ell: ell)
        assert tricomplexity(rec, (lambda ell: ell + 1, lambda ell: 0, lambda ell: 0))
