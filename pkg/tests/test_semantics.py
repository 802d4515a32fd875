"""
Tests for positions, moves, runs and interpretations.
"""

import random

import pytest

from gameproof.config import OracleConfig
from gameproof.errors import InterpretationError, ScriptError
from gameproof.semantics import (
    GameState,
    Illegal,
    Interpretation,
    Legal,
    apply_run,
    bottom,
    check_move,
    format_run,
    initial_state,
    is_delay,
    legal_moves,
    legal_runs,
    locate_choice,
    parse_labmove,
    parse_run,
    projection_bits,
    recurrence_state,
    top,
    winnable,
    winner_of_run,
    wn,
)
from gameproof.syntax import Atom, Const, Player, parse_formula, parse_sequent

CENSUS = "=> (0 = 0 & 0 = 1) -> (10 = 11 & 10 = 10)"

CUBE_RUN = """\
B 1.#10
T 0.1.:
T 0.1.0.#10
T 0.1.0.#10
B 0.1.0.#100
T 0.1.1.#100
T 0.1.1.#10
B 0.1.1.#1000
T 1.#1000
"""


class TestLabmoves:
    """Test the run text format."""

    def test_parse_run(self):
        assert parse_run("T 0.1\nB #10\n") == (top("0.1"), bottom("#10"))

    def test_glyph_form(self):
        assert parse_labmove("⊥1.#10") == bottom("1.#10")

    def test_format_run(self):
        assert format_run((top("0"), bottom("#1"))) == "T 0\nB #1\n"

    def test_bad_labmove(self):
        with pytest.raises(ScriptError):
            parse_labmove("X 1")


class TestMoves:
    """Test move legality."""

    def test_choice_belongs_to_its_mover(self):
        st = initial_state(parse_sequent("=> p | q"))
        assert isinstance(check_move(st, top("0")), Legal)
        verdict = check_move(st, bottom("0"))
        assert isinstance(verdict, Illegal)
        assert verdict.player is Player.BOTTOM

    def test_parallel_addressing(self):
        st = initial_state(parse_sequent(CENSUS))
        verdict = check_move(st, bottom("1.0"))
        assert isinstance(verdict, Legal)
        assert isinstance(check_move(st, top("1.0")), Illegal)
        assert isinstance(check_move(st, top("2.0")), Illegal)

    def test_closure_choices(self):
        """Free variables are chosen by ⊥ before anything else."""
        st = initial_state(parse_sequent("=> p(x)"))
        assert st.pending == ("x",)
        assert isinstance(check_move(st, top("#1")), Illegal)
        assert isinstance(check_move(st, bottom("0")), Illegal)
        after = check_move(st, bottom("#1")).state
        assert after.valuation == (("x", "1"),)
        assert after.succedent == Atom("p", (Const("1"),))

    def test_locate_choice(self):
        f = parse_formula("p /\\ (q | r)")
        assert locate_choice(f, "1.0") == ((1,), "0")
        assert locate_choice(f, "0") is None

    def test_legal_moves_in_closure(self):
        st = initial_state(parse_sequent("=> p(x)"))
        assert legal_moves(st, Player.BOTTOM, ("0", "1")) == ["#0", "#1"]
        assert legal_moves(st, Player.TOP, ("0", "1")) == []


class TestRuns:
    """Test whole runs and their winners."""

    def test_census(self, standard):
        """Thirteen legal runs, ten won by ⊤."""
        start = initial_state(parse_sequent(CENSUS))
        runs = legal_runs(start)
        assert len(runs) == 13
        assert runs[0] == ()
        lost = {run for run in runs if winner_of_run(start, run, standard) is Player.BOTTOM}
        assert lost == {
            (bottom("1.0"),),
            (top("0.0"), bottom("1.0")),
            (bottom("1.0"), top("0.0")),
        }

    def test_choice_disjunction_runs(self):
        runs = legal_runs(initial_state(parse_sequent("=> p | q")))
        assert runs == [(), (top("0"),), (top("1"),)]

    def test_cube_run(self, cube_sequent, standard):
        """The standard cube play is legal and won by ⊤."""
        start = initial_state(cube_sequent)
        final = apply_run(start, parse_run(CUBE_RUN))
        assert isinstance(final, GameState)
        assert final.antecedent[1].addresses == ("0", "1")
        assert wn(final, standard) is Player.TOP

    def test_wrong_answer_loses(self, cube_sequent, standard):
        run = parse_run(CUBE_RUN.replace("T 1.#1000", "T 1.#111"))
        assert winner_of_run(initial_state(cube_sequent), run, standard) is Player.BOTTOM

    def test_illegal_run_lost_by_offender(self, standard):
        start = initial_state(parse_sequent(CENSUS))
        assert winner_of_run(start, (top("1.1"),), standard) is Player.BOTTOM
        final = apply_run(start, (bottom("1.1"), bottom("1.0")))
        assert isinstance(final, Illegal)
        assert final.index == 1

    def test_empty_closure_run(self, standard):
        """A play stopped during the closure is won by ⊤."""
        start = initial_state(parse_sequent("=> x = 1"))
        assert winner_of_run(start, (), standard) is Player.TOP

    def test_delay(self):
        gamma = (top("0"), bottom("#1"))
        phi = (bottom("#1"), top("0"))
        assert is_delay(phi, gamma, Player.TOP)
        assert not is_delay(gamma, phi, Player.TOP)

    def test_winnable(self, standard):
        assert winnable(initial_state(parse_sequent("=> 0 = 0 | 0 = 1")), standard)
        assert not winnable(initial_state(parse_sequent("=> 0 = 1 & 0 = 0")), standard)

    def test_winnable_quantified(self, standard):
        """⊤ copies ⊥'s constant; the swapped order has no winning strategy."""
        config = OracleConfig(pool=("0", "1", "10"))
        assert winnable(initial_state(parse_sequent("=> !x: ?y: y = x")), standard, config)
        assert not winnable(initial_state(parse_sequent("=> ?y: !x: y = x")), standard, config)


DELAY_SOURCES = [
    CENSUS,
    "=> (0 = 0 & 0 = 1) -> (0 = 0 & 0 = 1)",
    "=> !x: ?y: y = x",
    "=> ?x: (!y: (x = y \\/ ~(x = y)))",
]


def random_top_delay(gamma, rng):
    """Reinterleave gamma so each ⊤ move follows at least the ⊥ moves it followed before."""
    tops = [lm for lm in gamma if lm.player is Player.TOP]
    bottoms = [lm for lm in gamma if lm.player is Player.BOTTOM]
    needed, seen = [], 0
    for lm in gamma:
        if lm.player is Player.TOP:
            needed.append(seen)
        else:
            seen += 1
    phi, t, b = [], 0, 0
    while t < len(tops) or b < len(bottoms):
        may_top = t < len(tops) and b >= needed[t]
        if may_top and (b == len(bottoms) or rng.random() < 0.5):
            phi.append(tops[t])
            t += 1
        else:
            phi.append(bottoms[b])
            b += 1
    return tuple(phi)


class TestDelays:
    """Delaying ⊤'s moves never turns a ⊤-won run into a loss."""

    def test_random_delays_of_won_runs(self, standard):
        won = []
        for text in DELAY_SOURCES:
            start = initial_state(parse_sequent(text))
            won.extend(
                (start, run) for run in legal_runs(start, OracleConfig(pool=("0", "1", "10")))
                if winner_of_run(start, run, standard) is Player.TOP
            )
        rng = random.Random(12)
        for start, gamma in rng.sample(won, min(100, len(won))):
            phi = random_top_delay(gamma, rng)
            assert is_delay(phi, gamma, Player.TOP)
            final = apply_run(start, phi)
            if isinstance(final, Illegal):
                assert final.player is Player.BOTTOM
            assert winner_of_run(start, phi, standard) is Player.TOP

    def test_moving_earlier_is_not_a_delay(self):
        gamma = (bottom("1.0"), top("0.0"))
        assert not is_delay((top("0.0"), bottom("1.0")), gamma, Player.TOP)


class TestRecurrence:
    """Test a standalone branching recurrence."""

    def test_replication_and_projection(self):
        st = recurrence_state(parse_formula("p & q"))
        run = (bottom(":"), bottom("0.0"), bottom("1.1"))
        final = apply_run(st, run)
        assert final.tree.addresses == ("0", "1")
        assert final.tree.leaf("0") == Atom("p")
        assert final.tree.leaf("1") == Atom("q")
        assert projection_bits(run, "0") == (bottom("0"),)
        assert projection_bits(run, "1") == (bottom("1"),)

    def test_replication_is_bottom_move(self):
        st = recurrence_state(parse_formula("p & q"))
        assert isinstance(check_move(st, top(":")), Illegal)


class TestInterpretation:
    """Test finite interpretations."""

    def test_standard(self, standard):
        assert standard.size == 16
        assert standard.constant("1111") == 15
        with pytest.raises(InterpretationError):
            standard.constant("10000")

    def test_wraps_by_default(self, standard):
        assert standard.apply("mul", (4, 4)) == 0

    def test_overflow_error(self):
        strict = Interpretation(size=16, overflow="error")
        with pytest.raises(InterpretationError):
            strict.apply("mul", (4, 4))

    def test_overflow_errors_unless_asked_to_wrap(self, standard):
        """Only the standard interpretation wraps; others and loaded files raise."""
        with pytest.raises(InterpretationError):
            Interpretation(size=16).apply("mul", (4, 4))
        loaded = Interpretation.from_dict({"universe": 16})
        assert loaded.overflow == "error"
        with pytest.raises(InterpretationError):
            loaded.apply("add", (15, 1))
        assert standard.overflow == "wrap"

    def test_evaluate(self, standard):
        assert standard.evaluate(parse_formula("Ax: (Even(x) \\/ Odd(x))"))
        assert not standard.evaluate(parse_formula("Ex: (Even(x) /\\ Odd(x))"))
        assert standard.evaluate(parse_formula("x = 10 + 1"), {"x": 3})

    def test_choice_operators_cannot_be_evaluated(self, standard):
        with pytest.raises(InterpretationError):
            standard.evaluate(parse_formula("0 = 0 | 0 = 1"))

    def test_file_round_trip(self, temp_dir):
        interp = Interpretation(
            size=3,
            naming={"0": 0, "1": 2},
            functions={"f": {(0,): 1, (1,): 2, (2,): 0}},
            predicates={"p": frozenset({(1,), (2,)})},
        )
        path = temp_dir / "interp.json"
        interp.dump(path)
        assert Interpretation.load(path) == interp

    def test_bad_naming(self):
        with pytest.raises(InterpretationError):
            Interpretation(size=2, naming={"0": 5})
