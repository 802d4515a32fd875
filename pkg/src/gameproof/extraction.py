"""
Strategy extraction: a proof read as a machine.

The machine walks the proof from its conclusion toward the leaves. At a Choose or
Replicate step it makes the corresponding move; at a Wait step it waits for an
environment move and follows the premise that move selects. Free variables of the
current step are resolved against the run by remembering which run entry supplied them,
so the state never holds a copy of a move string.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Final, List, Optional, Sequence, Tuple

from .calculus import (
    ChooseAll,
    ChooseConj,
    ChooseDisj,
    ChooseExists,
    Proof,
    Replicate,
    Wait,
    WaitLink,
    link_wait_premises,
)
from .runtime import Machine
from .semantics import LabMove, locate_choice
from .syntax import App, Const, Player, Sequent, constants, free_vars, move_prefix, term_of

LOGGER: Final = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionState:
    """Where the machine is in the proof.

    ``valuation`` maps a proof variable to the run index whose move supplied its value
    (None stands for ``0``). ``members`` gives, for each antecedent member of the current
    step, the real antecedent index and the copy address it plays in. ``pending`` holds
    environment moves not yet followed, each with the copy addresses already served.
    """
    node: Optional[int]
    valuation: Tuple[Tuple[str, Optional[int]], ...] = ()
    members: Tuple[Tuple[int, str], ...] = ()
    pending: Tuple[Tuple[int, Tuple[str, ...]], ...] = ()
    cursor: int = 0
    failure: Optional[str] = None


class ExtractedStrategy(Machine):
    name = "proof"

    def __init__(self, proof: Proof):
        self.proof = proof
        self.root = len(proof.steps) - 1
        self.closure = free_vars(proof.conclusion)
        self.native = frozenset(constants(proof.conclusion))
        self.bare = not proof.conclusion.antecedent
        self.links: Dict[int, List[WaitLink]] = {}
        for index, step in enumerate(proof.steps):
            if isinstance(step.rule, Wait):
                links = link_wait_premises(
                    step.sequent, [proof.steps[k].sequent for k in step.premises]
                )
                if not isinstance(links, list):
                    raise ValueError(f"step {index}: {links}")
                self.links[index] = links
        self.replication_bound = self._replications(self.root, {})

    def _replications(self, index: int, memo: Dict[int, int]) -> int:
        if index not in memo:
            step = self.proof.steps[index]
            below = max((self._replications(k, memo) for k in step.premises), default=0)
            memo[index] = below + (1 if isinstance(step.rule, Replicate) else 0)
        return memo[index]

    def start(self) -> ExtractionState:
        members = tuple((i, "") for i in range(len(self.proof.conclusion.antecedent)))
        return ExtractionState(node=None, members=members)

    def scratch_size(self, state: ExtractionState) -> int:
        return len(state.valuation) + len(state.members) + len(state.pending) + 1

    def flags(self, state: ExtractionState) -> Dict[str, object]:
        return {"stuck": state.failure} if state.failure else {}

    # -- stepping

    def step(self, state: ExtractionState, run: Sequence[LabMove]):
        if state.failure:
            return state, None
        state = self._observe(state, run)
        if state.node is None:
            return state, None
        while True:
            step = self.proof.steps[state.node]
            if not isinstance(step.rule, Wait):
                return self._choose(state, run)
            if not state.pending:
                return state, None
            state = self._dispatch(state, run)
            if state.failure:
                LOGGER.warning("extracted strategy stuck: %s", state.failure)
                return state, None

    def _observe(self, state: ExtractionState, run: Sequence[LabMove]) -> ExtractionState:
        cursor, valuation, pending = state.cursor, list(state.valuation), list(state.pending)
        node = state.node
        if node is None and not self.closure:
            node = self.root
        while cursor < len(run):
            lm = run[cursor]
            if lm.player is Player.BOTTOM:
                if node is None:
                    valuation.append((self.closure[len(valuation)], cursor))
                else:
                    pending.append((cursor, ()))
            cursor += 1
            if node is None and len(valuation) == len(self.closure):
                node = self.root
        return replace(state, node=node, valuation=tuple(valuation),
                       pending=tuple(pending), cursor=cursor)

    def _value(self, state: ExtractionState, name: str, run: Sequence[LabMove]) -> Tuple[str, ExtractionState]:
        term = term_of(name)
        if isinstance(term, Const):
            # constants foreign to the conclusion are renamed to 0
            return (term.numeral if term.numeral in self.native else "0"), state
        if isinstance(term, App):
            return "", replace(state, failure=f"cannot play the compound term {name}")
        table = dict(state.valuation)
        if term.name not in table:
            return "0", replace(state, valuation=state.valuation + ((term.name, None),))
        index = table[term.name]
        if index is None:
            return "0", state
        return run[index].move.rpartition("#")[2], state

    def _choose(self, state: ExtractionState, run: Sequence[LabMove]):
        step = self.proof.steps[state.node]
        rule, sequent = step.rule, step.sequent
        members = list(state.members)
        if isinstance(rule, ChooseDisj):
            move = self._succedent_prefix() + move_prefix(sequent.succedent, rule.path) + str(rule.choice)
        elif isinstance(rule, ChooseExists):
            value, state = self._value(state, rule.term, run)
            move = self._succedent_prefix() + move_prefix(sequent.succedent, rule.path) + f"#{value}"
        elif isinstance(rule, ChooseConj):
            move = self._member_prefix(state, rule.member) + move_prefix(
                sequent.antecedent[rule.member], rule.path) + str(rule.choice)
        elif isinstance(rule, ChooseAll):
            value, state = self._value(state, rule.term, run)
            move = self._member_prefix(state, rule.member) + move_prefix(
                sequent.antecedent[rule.member], rule.path) + f"#{value}"
        elif isinstance(rule, Replicate):
            i, w = members[rule.member]
            move = f"0.{i}.:{w}"
            members[rule.member] = (i, w + "0")
            members.append((i, w + "1"))
        else:
            return state, None
        if state.failure:
            return state, None
        return replace(state, node=step.premises[0], members=tuple(members)), move

    def _succedent_prefix(self) -> str:
        return "" if self.bare else "1."

    @staticmethod
    def _member_prefix(state: ExtractionState, member: int) -> str:
        i, w = state.members[member]
        return f"0.{i}.{w}."

    def _dispatch(self, state: ExtractionState, run: Sequence[LabMove]) -> ExtractionState:
        """Follow the earliest pending environment move into the premise it selects."""
        index, served = state.pending[0]
        move = run[index].move
        step = self.proof.steps[state.node]
        sequent: Sequent = step.sequent
        if self.bare or move.startswith("1."):
            located = locate_choice(sequent.succedent, move if self.bare else move[2:])
            target, rest_pending = None, state.pending[1:]
        else:
            i_text, _, rest = move[2:].partition(".")
            u, _, beta = rest.partition(".")
            target = next(
                (j for j, (i, w) in enumerate(state.members)
                 if str(i) == i_text and w.startswith(u)
                 and not any(w.startswith(done) for done in served)),
                None,
            )
            if target is None:
                return replace(
                    state, failure=f"move {move!r} addresses no copy at step {state.node}")
            located = locate_choice(sequent.antecedent[target], beta)
            w = state.members[target][1]
            if any(w2.startswith(u) and not any(w2.startswith(d) for d in served + (w,))
                   for i2, w2 in state.members if str(i2) == i_text):
                rest_pending = ((index, served + (w,)),) + state.pending[1:]
            else:
                rest_pending = state.pending[1:]
        if located is None:
            return replace(state, failure=f"move {move!r} matches no choice at step {state.node}")
        path, choice = located
        link = next(
            (ln for ln in self.links[state.node]
             if ln.member == target and ln.path == path
             and (ln.choice is None or str(ln.choice) == choice)),
            None,
        )
        if link is None:
            return replace(state, failure=f"move {move!r} is not answered by step {state.node}")
        valuation = state.valuation
        if link.var is not None:
            valuation = tuple(p for p in valuation if p[0] != link.var) + ((link.var, index),)
        return replace(state, node=step.premises[link.premise], valuation=valuation,
                       pending=rest_pending)


def extract(proof: Proof) -> ExtractedStrategy:
    return ExtractedStrategy(proof)
