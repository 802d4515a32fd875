"""
Rules, proofs, the proof checker and bounded backward proof search.

A proof is a list of steps, each a sequent justified by one rule from earlier steps.
Proof files are JSON arrays of ``{seq, rule, params, premises}`` objects.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Dict, Final, List, Optional, Sequence, Set, Tuple, Union

from .classical import Invalid, Unknown, Valid, decide_validity, is_stable
from .config import ClassicalBudget, SearchBudget
from .errors import FormulaSyntaxError, ProofFormatError, SubstitutionCollision
from .syntax import (
    Binary,
    Formula,
    Op,
    Path,
    Quantified,
    Sequent,
    Var,
    VACUOUS,
    all_vars,
    alpha_equal,
    bound_vars,
    canonical_sequent,
    choice_count,
    constants,
    elementarize_sequent,
    format_sequent,
    free_vars,
    fresh_variable,
    is_elementary,
    is_surface_path,
    match_instance,
    parse_sequent,
    pretty_sequent,
    replace_at,
    sequents_alpha_equal,
    subformula,
    substitute,
    substitute_sequent,
    surface_occurrences,
    term_of,
)

LOGGER: Final = logging.getLogger(__name__)

SUCCEDENT_DEMANDS: Final = (Op.CHOICE_AND, Op.CHOICE_ALL)
ANTECEDENT_DEMANDS: Final = (Op.CHOICE_OR, Op.CHOICE_EXISTS)


# -------------------------------------------------------------------------- rules


@dataclass(frozen=True)
class ChooseDisj:
    """⊔-Choose in the succedent."""
    path: Path
    choice: int


@dataclass(frozen=True)
class ChooseConj:
    """⊓-Choose in an antecedent member."""
    member: int
    path: Path
    choice: int


@dataclass(frozen=True)
class ChooseExists:
    """⊔x-Choose in the succedent."""
    path: Path
    term: str


@dataclass(frozen=True)
class ChooseAll:
    """⊓x-Choose in an antecedent member."""
    member: int
    path: Path
    term: str


@dataclass(frozen=True)
class Replicate:
    member: int


@dataclass(frozen=True)
class Wait:
    pass


Rule = Union[ChooseDisj, ChooseConj, ChooseExists, ChooseAll, Replicate, Wait]

RULE_NAMES: Final = {
    Wait: "wait",
    ChooseDisj: "choose-disj",
    ChooseConj: "choose-conj",
    ChooseExists: "choose-exists",
    ChooseAll: "choose-all",
    Replicate: "replicate",
}


def rule_name(rule: Rule) -> str:
    return RULE_NAMES[type(rule)]


@dataclass(frozen=True)
class ProofStep:
    sequent: Sequent
    rule: Rule
    premises: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Proof:
    steps: Tuple[ProofStep, ...]

    @property
    def conclusion(self) -> Sequent:
        return self.steps[-1].sequent

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class Unprovable:
    """Backward search exhausted its finite space with every stability query decided."""
    goals: int


# ---------------------------------------------------------------- choose premises


def resolve_choice(f: Formula, path: Path, ops: Sequence[Op], choice: Union[int, str]) -> Formula:
    """Resolve the surface choice occurrence at ``path`` by a component or a term."""
    try:
        node = subformula(f, path)
        surface = is_surface_path(f, path)
    except IndexError:
        raise ValueError(f"path {list(path)} leaves the formula") from None
    if not isinstance(node, (Binary, Quantified)) or node.op not in ops:
        raise ValueError(f"no {'/'.join(op.glyph for op in ops)} at path {list(path)}")
    if not surface:
        raise ValueError(f"path {list(path)} is inside a choice operator")
    if isinstance(node, Binary):
        if choice not in (0, 1):
            raise ValueError(f"choice must be 0 or 1, not {choice!r}")
        return replace_at(f, path, node.left if choice == 0 else node.right)
    return replace_at(f, path, substitute(node.body, {node.var: term_of(str(choice))}))


def choose_premise(conclusion: Sequent, rule: Rule) -> Sequent:
    """The single premise a Choose or Replicate rule demands; ValueError if inapplicable."""
    if isinstance(rule, ChooseDisj):
        return conclusion.with_succedent(
            resolve_choice(conclusion.succedent, rule.path, (Op.CHOICE_OR,), rule.choice))
    if isinstance(rule, ChooseExists):
        return conclusion.with_succedent(
            resolve_choice(conclusion.succedent, rule.path, (Op.CHOICE_EXISTS,), rule.term))
    if isinstance(rule, (ChooseConj, ChooseAll, Replicate)):
        if not 0 <= rule.member < len(conclusion.antecedent):
            raise ValueError(f"no antecedent member {rule.member}")
        member = conclusion.antecedent[rule.member]
        if isinstance(rule, Replicate):
            return conclusion.appended(member)
        if isinstance(rule, ChooseConj):
            resolved = resolve_choice(member, rule.path, (Op.CHOICE_AND,), rule.choice)
        else:
            resolved = resolve_choice(member, rule.path, (Op.CHOICE_ALL,), rule.term)
        return conclusion.with_member(rule.member, resolved)
    raise ValueError("Wait has no single premise")


# ----------------------------------------------------------------- wait premises


@dataclass(frozen=True)
class WaitLink:
    """One demanded Wait premise: where it comes from and which premise meets it.

    ``member`` is None for the succedent. ``choice`` is set for binary operators,
    ``var`` for quantifiers (None when the quantifier is vacuous).
    """
    member: Optional[int]
    path: Path
    choice: Optional[int]
    var: Optional[str]
    premise: int


def _demanded(conclusion: Sequent) -> List[Tuple[Optional[int], Path, Formula]]:
    found = [(None, p, conclusion.succedent)
             for p in surface_occurrences(conclusion.succedent, SUCCEDENT_DEMANDS)]
    for i, member in enumerate(conclusion.antecedent):
        found.extend((i, p, member) for p in surface_occurrences(member, ANTECEDENT_DEMANDS))
    return found


def _place(conclusion: Sequent, member: Optional[int], formula: Formula) -> Sequent:
    if member is None:
        return conclusion.with_succedent(formula)
    return conclusion.with_member(member, formula)


def wait_premises(conclusion: Sequent) -> List[Tuple[WaitLink, Sequent]]:
    """Exactly the premises Wait demands, with fresh variables for quantifiers."""
    taken: Set[str] = set(all_vars(conclusion))
    result: List[Tuple[WaitLink, Sequent]] = []
    for member, path, formula in _demanded(conclusion):
        node = subformula(formula, path)
        if isinstance(node, Binary):
            for choice, child in enumerate((node.left, node.right)):
                link = WaitLink(member, path, choice, None, len(result))
                result.append((link, _place(conclusion, member, replace_at(formula, path, child))))
        else:
            y = fresh_variable(node.var, taken)
            taken.add(y)
            body = substitute(node.body, {node.var: Var(y)})
            link = WaitLink(member, path, None, y, len(result))
            result.append((link, _place(conclusion, member, replace_at(formula, path, body))))
    return result


def _same_except(a: Sequent, b: Sequent, member: Optional[int]) -> bool:
    if len(a.antecedent) != len(b.antecedent):
        return False
    pairs = list(enumerate(zip(a.antecedent, b.antecedent)))
    if member is not None:
        pairs = [(i, pair) for i, pair in pairs if i != member]
    ok = all(alpha_equal(x, y) for _, (x, y) in pairs)
    return ok and (member is None or alpha_equal(a.succedent, b.succedent))


def link_wait_premises(
    conclusion: Sequent, premises: Sequence[Sequent]
) -> Union[List[WaitLink], Violation]:
    """Match every demanded Wait premise against the supplied ones."""
    taken = set(all_vars(conclusion))
    links: List[WaitLink] = []
    for member, path, formula in _demanded(conclusion):
        node = subformula(formula, path)
        where = "succedent" if member is None else f"antecedent member {member}"
        if isinstance(node, Binary):
            for choice, child in enumerate((node.left, node.right)):
                wanted = _place(conclusion, member, replace_at(formula, path, child))
                index = next((k for k, p in enumerate(premises)
                              if sequents_alpha_equal(p, wanted)), None)
                if index is None:
                    return Violation(
                        "missing-premise",
                        f"{node.op.glyph} at {where} path {list(path)}: no premise "
                        f"{pretty_sequent(wanted)}",
                    )
                links.append(WaitLink(member, path, choice, None, index))
            continue
        z = fresh_variable("_z", taken | {"_z"})
        pattern = replace_at(formula, path, substitute(node.body, {node.var: Var(z)}))
        found = None
        for k, premise in enumerate(premises):
            if not _same_except(conclusion, premise, member):
                continue
            target = premise.succedent if member is None else premise.antecedent[member]
            term = match_instance(pattern, z, target)
            if term is VACUOUS:
                found = WaitLink(member, path, None, None, k)
            elif isinstance(term, Var) and term.name not in taken:
                found = WaitLink(member, path, None, term.name, k)
            if found:
                break
        if found is None:
            return Violation(
                "missing-premise",
                f"{node.op.glyph}{node.var} at {where} path {list(path)}: no premise with a "
                "variable fresh for the conclusion",
            )
        links.append(found)
    return links


# ------------------------------------------------------------------------ checking


def check_step(
    conclusion: Sequent,
    rule: Rule,
    premises: Sequence[Sequent],
    budget: ClassicalBudget = ClassicalBudget(),
) -> Optional[Violation]:
    """None when the rule derives ``conclusion`` from ``premises``."""
    if isinstance(rule, Wait):
        links = link_wait_premises(conclusion, premises)
        if isinstance(links, Violation):
            return links
        verdict = is_stable(conclusion, budget)
        if isinstance(verdict, Invalid):
            return Violation("unstable", f"{pretty_sequent(conclusion)} is not stable")
        if isinstance(verdict, Unknown):
            return Violation("unknown-stability", verdict.reason)
        return None
    if len(premises) != 1:
        return Violation("premise-count", f"{rule_name(rule)} takes one premise, got {len(premises)}")
    try:
        expected = choose_premise(conclusion, rule)
    except (ValueError, SubstitutionCollision) as exc:
        return Violation("inapplicable", str(exc))
    if isinstance(rule, (ChooseExists, ChooseAll)):
        term = term_of(rule.term)
        if isinstance(term, Var) and term.name in bound_vars(premises[0]):
            return Violation("freshness", f"{rule.term} has bound occurrences in the premise")
    if not sequents_alpha_equal(expected, premises[0]):
        return Violation(
            "mismatch",
            f"expected premise {pretty_sequent(expected)}, got {pretty_sequent(premises[0])}",
        )
    return None


def check_proof(
    proof: Proof, budget: ClassicalBudget = ClassicalBudget()
) -> Optional[Tuple[int, Violation]]:
    """None for a correct proof, else the first bad step with its violation."""
    if not proof.steps:
        return 0, Violation("empty", "a proof has at least one step")
    for index, step in enumerate(proof.steps):
        if any(not 0 <= k < index for k in step.premises):
            return index, Violation("premise-order", "premises must be earlier steps")
        violation = check_step(
            step.sequent, step.rule, [proof.steps[k].sequent for k in step.premises], budget
        )
        if violation is not None:
            LOGGER.info("step %d fails: %s", index, violation)
            return index, violation
    return None


# ------------------------------------------------------------------------- search


@dataclass
class _Node:
    sequent: Sequent
    rule: Rule
    children: List["_Node"] = field(default_factory=list)


def _failure_key(goal: Sequent, reps: int) -> Tuple[Sequent, int]:
    goal = canonical_sequent(goal)
    renaming = {name: Var(f"_f{k}") for k, name in enumerate(free_vars(goal))}
    return substitute_sequent(goal, renaming), reps


class _Search:
    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self.failed: Set[Tuple[Sequent, int]] = set()
        self.solved: Dict[Tuple[Sequent, int], _Node] = {}
        self.goals = 0

    def solve(self, goal: Sequent, depth: int, reps: int) -> Tuple[Optional[_Node], bool]:
        """A derivation of ``goal``, or None with whether the failure is exhaustive."""
        key = _failure_key(goal, reps)
        if key in self.failed:
            return None, True
        if (goal, reps) in self.solved:
            return self.solved[(goal, reps)], True
        if depth == 0:
            return None, False
        self.goals += 1
        node, exhaustive = self._expand(goal, depth, reps)
        if node is not None:
            self.solved[(goal, reps)] = node
        elif exhaustive:
            self.failed.add(key)
        return node, exhaustive

    def _all(self, goals: List[Sequent], depth: int, reps: int) -> Tuple[Optional[List[_Node]], bool]:
        nodes = []
        for goal in goals:
            node, exhaustive = self.solve(goal, depth, reps)
            if node is None:
                return None, exhaustive
            nodes.append(node)
        return nodes, True

    def _candidates(self, goal: Sequent) -> List[str]:
        return sorted(constants(goal) | set(free_vars(goal)) | {"0"})

    def _choose_rules(self, goal: Sequent) -> List[Rule]:
        rules: List[Rule] = []
        terms = self._candidates(goal)
        for path in surface_occurrences(goal.succedent, (Op.CHOICE_OR, Op.CHOICE_EXISTS)):
            node = subformula(goal.succedent, path)
            if node.op is Op.CHOICE_OR:
                rules.extend(ChooseDisj(path, i) for i in (0, 1))
            else:
                rules.extend(ChooseExists(path, t) for t in terms)
        for i, member in enumerate(goal.antecedent):
            for path in surface_occurrences(member, (Op.CHOICE_AND, Op.CHOICE_ALL)):
                node = subformula(member, path)
                if node.op is Op.CHOICE_AND:
                    rules.extend(ChooseConj(i, path, c) for c in (0, 1))
                else:
                    rules.extend(ChooseAll(i, path, t) for t in terms)
        return rules

    def _expand(self, goal: Sequent, depth: int, reps: int) -> Tuple[Optional[_Node], bool]:
        exhaustive = True
        verdict = is_stable(goal, self.budget.classical)
        if isinstance(verdict, Valid):
            premises = [p for _, p in wait_premises(goal)]
            nodes, complete = self._all(premises, depth - 1, reps)
            if nodes is not None:
                return _Node(goal, Wait(), nodes), True
            exhaustive &= complete
        elif isinstance(verdict, Unknown):
            exhaustive = False
        for rule in self._choose_rules(goal):
            try:
                premise = choose_premise(goal, rule)
            except SubstitutionCollision:
                continue
            node, complete = self.solve(premise, depth - 1, reps)
            if node is not None:
                return _Node(goal, rule, [node]), True
            exhaustive &= complete
        if reps > 0:
            for i, member in enumerate(goal.antecedent):
                if choice_count(member) == 0:
                    continue
                rule = Replicate(i)
                node, complete = self.solve(choose_premise(goal, rule), depth - 1, reps - 1)
                if node is not None:
                    return _Node(goal, rule, [node]), True
                exhaustive &= complete
        return None, exhaustive


def _linearize(root: _Node) -> Proof:
    steps: List[ProofStep] = []
    index: Dict[Sequent, int] = {}

    def emit(node: _Node) -> int:
        if node.sequent in index:
            return index[node.sequent]
        premises = tuple(emit(child) for child in node.children)
        steps.append(ProofStep(node.sequent, node.rule, premises))
        index[node.sequent] = len(steps) - 1
        return index[node.sequent]

    emit(root)
    return Proof(tuple(steps))


def prove(s: Sequent, budget: SearchBudget = SearchBudget()) -> Union[Proof, Unprovable, Unknown]:
    """Backward proof search within the depth and replication caps."""
    search = _Search(budget)
    node, exhaustive = search.solve(s, budget.depth, budget.replicate_cap)
    LOGGER.info("proof search visited %d goals", search.goals)
    if node is not None:
        return _linearize(node)
    if exhaustive:
        return Unprovable(search.goals)
    return Unknown(f"search incomplete after {search.goals} goals")


def is_conservative_case(s: Sequent, budget: SearchBudget = SearchBudget()) -> Optional[bool]:
    """For elementary ``s``: whether proof search and the classical oracle agree.

    None when either side is undecided.
    """
    if not is_elementary(s):
        raise ValueError("conservativity is only defined for elementary sequents")
    verdict = decide_validity(elementarize_sequent(s), budget.classical)
    found = prove(s, budget)
    if isinstance(verdict, Unknown) or isinstance(found, Unknown):
        return None
    return isinstance(found, Proof) == isinstance(verdict, Valid)


# -------------------------------------------------------------------- persistence


def _rule_from(name: str, params: dict) -> Rule:
    path = tuple(int(k) for k in params.get("path", []))
    if name == "wait":
        return Wait()
    if name == "choose-disj":
        return ChooseDisj(path, int(params["choice"]))
    if name == "choose-conj":
        return ChooseConj(int(params["member"]), path, int(params["choice"]))
    if name == "choose-exists":
        return ChooseExists(path, str(params["term"]))
    if name == "choose-all":
        return ChooseAll(int(params["member"]), path, str(params["term"]))
    if name == "replicate":
        return Replicate(int(params["member"]))
    raise ProofFormatError(f"Unknown rule: {name}. Available: {', '.join(RULE_NAMES.values())}")


def _rule_params(rule: Rule) -> dict:
    params = {}
    for key in ("member", "path", "choice", "term"):
        if hasattr(rule, key):
            value = getattr(rule, key)
            params[key] = list(value) if key == "path" else value
    return params


def proof_from_json(data: list) -> Proof:
    if not isinstance(data, list):
        raise ProofFormatError("a proof is a JSON array of steps")
    steps = []
    for k, item in enumerate(data):
        try:
            sequent = parse_sequent(item["seq"])
            rule = _rule_from(item["rule"], item.get("params", {}))
            premises = tuple(int(p) for p in item.get("premises", []))
        except FormulaSyntaxError as exc:
            raise ProofFormatError(f"step {k}: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ProofFormatError):
                raise
            raise ProofFormatError(f"step {k}: malformed step ({exc})") from exc
        steps.append(ProofStep(sequent, rule, premises))
    if not steps:
        raise ProofFormatError("a proof has at least one step")
    return Proof(tuple(steps))


def proof_to_json(proof: Proof) -> list:
    return [
        {
            "seq": format_sequent(step.sequent),
            "rule": rule_name(step.rule),
            "params": _rule_params(step.rule),
            "premises": list(step.premises),
        }
        for step in proof.steps
    ]


def load_proof(path: Union[str, FilePath]) -> Proof:
    try:
        data = json.loads(FilePath(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProofFormatError(f"{path}: not JSON ({exc})") from exc
    return proof_from_json(data)


def dump_proof(proof: Proof, path: Union[str, FilePath]) -> None:
    FilePath(path).write_text(json.dumps(proof_to_json(proof), indent=2) + "\n")
