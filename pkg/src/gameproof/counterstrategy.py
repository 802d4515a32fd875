"""
Counterstrategies for unprovable sequents.

The counter-environment tracks an unprovable sequent Y that the current position
instantiates, together with the constants it has chosen for Y's free variables. While Y
is stable it moves into an unprovable Wait premise. Otherwise it waits, and each
machine move turns Y into the premise of the matching Choose or Replicate rule, which
stays unprovable. Where the play ends, Y's elementarization under the chosen constants
is classically refutable, and that refutation is the countermodel.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from typing import Dict, Final, Iterable, Optional, Tuple

from .calculus import (
    ChooseAll,
    ChooseConj,
    ChooseDisj,
    ChooseExists,
    Proof,
    Unprovable,
    choose_premise,
    prove,
    wait_premises,
)
from .classical import Invalid, Valid, decide_validity, is_stable
from .config import PlayConfig, SearchBudget
from .errors import CounterstrategyError, SubstitutionCollision
from .runtime import Environment, Machine, RunRecord, play
from .semantics import GameState, Interpretation, Run, initial_state, locate_choice, winner_of_run
from .syntax import (
    Binary,
    Player,
    Sequent,
    conjoin,
    constants,
    elementarize,
    format_sequent,
    free_vars,
    implies,
    move_prefix,
    pretty_sequent,
    subformula,
    substitute_sequent,
)

LOGGER: Final = logging.getLogger(__name__)


@dataclass(frozen=True)
class CounterState:
    goal: Sequent
    names: Tuple[Tuple[str, str], ...] = ()
    members: Tuple[Tuple[int, str], ...] = ()
    cursor: int = 0
    closed: bool = False
    waiting: bool = False

    @property
    def named_goal(self) -> Sequent:
        return substitute_sequent(self.goal, dict(self.names))


def _fresh_numerals(taken: Iterable[str]) -> Iterable[str]:
    taken = set(taken)
    for n in itertools.count():
        numeral = format(n, "b")
        if numeral not in taken:
            yield numeral


class CounterEnvironment(Environment):
    """The ⊥ seat of a counterstrategy for one unprovable sequent."""

    name = "counter"

    def __init__(self, s: Sequent, budget: SearchBudget = SearchBudget()):
        self.sequent = s
        self.budget = budget
        self.bare = not s.antecedent

    def start(self) -> CounterState:
        members = tuple((i, "") for i in range(len(self.sequent.antecedent)))
        return CounterState(goal=self.sequent, members=members)

    def exhausted(self, state: CounterState) -> bool:
        return state.waiting

    def step(self, state: CounterState, position: GameState, run: Run, tick: int):
        if not state.closed:
            return self._close(state, run)
        for lm in run[state.cursor:]:
            if lm.player is Player.TOP:
                state = self._follow(state, lm.move)
        state = replace(state, cursor=len(run))
        verdict = is_stable(state.goal, self.budget.classical)
        if isinstance(verdict, Invalid):
            return replace(state, waiting=True), []
        if not isinstance(verdict, Valid):
            raise CounterstrategyError(f"stability of {pretty_sequent(state.goal)} is undecided")
        state, move = self._demand(state)
        return replace(state, waiting=False), [move]

    def _close(self, state: CounterState, run: Run):
        names = list(zip(free_vars(self.sequent), _fresh_numerals(constants(self.sequent))))
        moves = [f"#{c}" for _, c in names]
        LOGGER.debug("closure choices %s", moves)
        return replace(state, names=tuple(names), closed=True, cursor=len(run)), moves

    # -- machine moves

    def _follow(self, state: CounterState, move: str) -> CounterState:
        """Turn the goal into the premise the machine's move selects."""
        goal, members = state.goal, list(state.members)
        try:
            if self.bare or move.startswith("1."):
                located = locate_choice(goal.succedent, move if self.bare else move[2:])
                if located is None:
                    return state
                goal = choose_premise(goal, self._rule(state, goal.succedent, None, *located))
            elif move.startswith("0."):
                i_text, _, rest = move[2:].partition(".")
                if rest.startswith(":"):
                    j = members.index((int(i_text), rest[1:]))
                    i, w = members[j]
                    goal = goal.appended(goal.antecedent[j])
                    members[j] = (i, w + "0")
                    members.append((i, w + "1"))
                else:
                    u, _, beta = rest.partition(".")
                    for j, (i, w) in enumerate(members):
                        if str(i) == i_text and w.startswith(u):
                            located = locate_choice(goal.antecedent[j], beta)
                            if located is None:
                                return state
                            goal = choose_premise(
                                goal, self._rule(state, goal.antecedent[j], j, *located))
        except (ValueError, SubstitutionCollision) as exc:
            LOGGER.info("machine move %r does not fit %s: %s", move, pretty_sequent(goal), exc)
            return state
        return replace(state, goal=goal, members=tuple(members))

    @staticmethod
    def _rule(state: CounterState, formula, member: Optional[int], path, choice: str):
        node = subformula(formula, path)
        if isinstance(node, Binary):
            if member is None:
                return ChooseDisj(path, int(choice))
            return ChooseConj(member, path, int(choice))
        numeral = choice[1:]
        term = next((var for var, c in state.names if c == numeral), numeral)
        if member is None:
            return ChooseExists(path, term)
        return ChooseAll(member, path, term)

    # -- own moves

    def _demand(self, state: CounterState) -> Tuple[CounterState, str]:
        """Move into the first unprovable Wait premise, in text order."""
        taken = constants(state.named_goal) | constants(self.sequent) | {c for _, c in state.names}
        numeral = next(iter(_fresh_numerals(taken)))
        candidates = sorted(wait_premises(state.goal), key=lambda item: format_sequent(item[1]))
        undecided = False
        for link, premise in candidates:
            verdict = prove(premise, self.budget)
            if isinstance(verdict, Proof):
                continue
            if not isinstance(verdict, Unprovable):
                undecided = True
                continue
            if link.member is None:
                prefix = ("" if self.bare else "1.") + move_prefix(state.goal.succedent, link.path)
            else:
                i, w = state.members[link.member]
                prefix = f"0.{i}.{w}." + move_prefix(state.goal.antecedent[link.member], link.path)
            names = state.names
            if link.choice is not None:
                move = prefix + str(link.choice)
            else:
                move = prefix + f"#{numeral}"
                if link.var is not None:
                    names = names + ((link.var, numeral),)
            LOGGER.debug("counter move %s into %s", move, pretty_sequent(premise))
            return replace(state, goal=premise, names=names), move
        reason = "undecided" if undecided else "provable"
        raise CounterstrategyError(
            f"every Wait premise of {pretty_sequent(state.goal)} is {reason}"
        )


def build_counterstrategy(s: Sequent, budget: SearchBudget = SearchBudget()) -> CounterEnvironment:
    verdict = prove(s, budget)
    if isinstance(verdict, Proof):
        raise CounterstrategyError(f"{pretty_sequent(s)} is provable")
    if not isinstance(verdict, Unprovable):
        raise CounterstrategyError(f"provability of {pretty_sequent(s)} is undecided: {verdict.reason}")
    return CounterEnvironment(s, budget)


@dataclass(frozen=True)
class Refutation:
    """A run the machine loses, with an interpretation under which it loses."""
    sequent: Sequent
    run: Run
    interpretation: Interpretation
    record: RunRecord

    def verify(self) -> bool:
        winner = winner_of_run(initial_state(self.sequent), self.run, self.interpretation)
        return winner is Player.BOTTOM


def refute(
    s: Sequent,
    machine: Machine,
    budget: SearchBudget = SearchBudget(),
    config: PlayConfig = PlayConfig(),
) -> Refutation:
    """Play the counterstrategy against ``machine`` and extract a countermodel."""
    env = build_counterstrategy(s, budget)
    record = play(machine, env, s, None, config)
    if record.illegal is not None:
        if record.illegal.player is Player.BOTTOM:
            raise CounterstrategyError(f"the counterstrategy moved illegally: {record.illegal.reason}")
        return Refutation(s, record.run, Interpretation(size=1, naming={}), record)
    final = record.final
    query = implies(
        conjoin(elementarize(leaf) for _, _, leaf in final.leaf_positions()),
        elementarize(final.succedent),
    )
    verdict = decide_validity(query, budget.classical)
    if not isinstance(verdict, Invalid):
        raise CounterstrategyError(f"the final position {final.describe()} is not refuted: {verdict}")
    refutation = Refutation(s, record.run, verdict.model, record)
    if not refutation.verify():
        raise CounterstrategyError("the countermodel does not make the machine lose")
    return refutation


def counter_report(ref: Refutation) -> Dict[str, object]:
    return {
        "sequent": pretty_sequent(ref.sequent),
        "run": [lm.to_line() for lm in ref.run],
        "interpretation": ref.interpretation.to_dict(),
    }

