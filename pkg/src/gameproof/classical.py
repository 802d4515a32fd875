"""
Classical first-order validity with equality.

Three-valued: ``Valid`` when a tableau for the negation closes, ``Invalid`` with a
countermodel that has been re-checked by direct evaluation, ``Unknown`` when the step
budget runs out. Equality is handled by congruence closure on each branch; free
variables behave as constants.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Final, Iterator, List, Optional, Set, Tuple, Union

from .config import ClassicalBudget
from .semantics import Interpretation
from .syntax import (
    App,
    Atom,
    Binary,
    Bot,
    Const,
    Formula,
    Op,
    Quantified,
    Sequent,
    Term,
    Top,
    Var,
    constants,
    elementarize_sequent,
    free_vars,
    is_elementary,
    negate,
    pretty_formula,
    substitute,
    symbols,
)

LOGGER: Final = logging.getLogger(__name__)

PARAMETER_PREFIX: Final = "%"


@dataclass(frozen=True)
class Valid:
    certificate: str

    def __str__(self) -> str:
        return "valid"


@dataclass(frozen=True)
class Invalid:
    model: Interpretation
    valuation: Dict[str, int] = field(default_factory=dict)

    def __str__(self) -> str:
        return "invalid"


@dataclass(frozen=True)
class Unknown:
    reason: str

    def __str__(self) -> str:
        return "unknown"


Verdict = Union[Valid, Invalid, Unknown]


class _OutOfSteps(Exception):
    pass


class _Steps:
    def __init__(self, limit: int):
        self.left = limit

    def tick(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise _OutOfSteps


# ------------------------------------------------------------ congruence closure


class CongruenceClosure:
    """Union-find over ground terms, closed under function congruence."""

    def __init__(self):
        self.parent: Dict[Term, Term] = {}

    def add(self, t: Term) -> None:
        if t in self.parent:
            return
        self.parent[t] = t
        if isinstance(t, App):
            for arg in t.args:
                self.add(arg)

    def find(self, t: Term) -> Term:
        self.add(t)
        root = t
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[t] != root:
            self.parent[t], t = root, self.parent[t]
        return root

    def merge(self, a: Term, b: Term) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def close(self) -> None:
        changed = True
        while changed:
            changed = False
            signatures: Dict[Tuple, Term] = {}
            for t in [t for t in self.parent if isinstance(t, App)]:
                key = (t.func, tuple(self.find(a) for a in t.args))
                other = signatures.setdefault(key, t)
                if self.find(other) != self.find(t):
                    self.merge(other, t)
                    changed = True

    def same(self, a: Term, b: Term) -> bool:
        return self.find(a) == self.find(b)

    def classes(self) -> Dict[Term, int]:
        roots: Dict[Term, int] = {}
        return {t: roots.setdefault(self.find(t), len(roots)) for t in sorted(self.parent, key=str)}


# ------------------------------------------------------------------------ tableau


@dataclass
class _Open:
    literals: List[Atom]
    saturated: bool


def _subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for arg in t.args:
            yield from _subterms(arg)


def _branch_closes(literals: List[Atom]) -> bool:
    cc = CongruenceClosure()
    for lit in literals:
        for arg in lit.args:
            cc.add(arg)
    for lit in literals:
        if lit.is_equality and not lit.negated:
            cc.merge(lit.args[0], lit.args[1])
    cc.close()
    positives: Dict[str, List[Tuple[Term, ...]]] = {}
    for lit in literals:
        if lit.is_equality:
            if lit.negated and cc.same(lit.args[0], lit.args[1]):
                return True
        elif not lit.negated:
            positives.setdefault(lit.pred, []).append(lit.args)
    for lit in literals:
        if lit.negated and not lit.is_equality:
            for args in positives.get(lit.pred, []):
                if all(cc.same(a, b) for a, b in zip(args, lit.args)):
                    return True
    return False


class _Tableau:
    def __init__(self, steps: _Steps):
        self.steps = steps
        self.fresh = itertools.count(1)

    def parameter(self) -> Var:
        return Var(f"{PARAMETER_PREFIX}p{next(self.fresh)}")

    def expand(
        self,
        todo: List[Formula],
        literals: List[Atom],
        gammas: List[Quantified],
        done: Set[Tuple[Quantified, Term]],
        rounds: int,
    ) -> Optional[_Open]:
        """None when every branch closes, else the first open branch."""
        while todo:
            self.steps.tick()
            f = todo.pop()
            if isinstance(f, Top):
                continue
            if isinstance(f, Bot):
                return None
            if isinstance(f, Atom):
                if any(
                    lit.pred == f.pred and lit.args == f.args and lit.negated != f.negated
                    for lit in literals
                ):
                    return None
                literals.append(f)
            elif isinstance(f, Binary) and f.op is Op.AND:
                todo.extend([f.right, f.left])
            elif isinstance(f, Binary):
                for side in (f.left, f.right):
                    branch = self.expand(todo + [side], list(literals), list(gammas),
                                         set(done), rounds)
                    if branch is not None:
                        return branch
                return None
            elif f.op is Op.EXISTS:
                todo.append(substitute(f.body, {f.var: self.parameter()}))
            else:
                gammas.append(f)
        if _branch_closes(literals):
            return None
        if not gammas:
            return _Open(literals, saturated=True)
        if rounds == 0:
            return _Open(literals, saturated=False)
        terms = {t for lit in literals for arg in lit.args for t in _subterms(arg)}
        if not terms:
            terms = {self.parameter()}
        fresh = [(g, t) for g in gammas for t in sorted(terms, key=str) if (g, t) not in done]
        if not fresh:
            return _Open(literals, saturated=True)
        done |= set(fresh)
        todo = [substitute(g.body, {g.var: t}) for g, t in fresh]
        return self.expand(todo, literals, gammas, done, rounds - 1)


def _model_from_branch(f: Formula, branch: _Open) -> Tuple[Interpretation, Dict[str, int]]:
    cc = CongruenceClosure()
    for lit in branch.literals:
        for arg in lit.args:
            cc.add(arg)
    for numeral in constants(f):
        cc.add(Const(numeral))
    for name in free_vars(f):
        cc.add(Var(name))
    for lit in branch.literals:
        if lit.is_equality and not lit.negated:
            cc.merge(lit.args[0], lit.args[1])
    cc.close()
    classes = cc.classes()
    size = max(len(set(classes.values())), 1)
    preds, funcs = symbols(f)
    functions: Dict[str, Dict[Tuple[int, ...], int]] = {}
    for name, arity in funcs.items():
        table = {args: 0 for args in itertools.product(range(size), repeat=arity)}
        for t, element in classes.items():
            if isinstance(t, App) and t.func == name:
                table[tuple(classes[a] for a in t.args)] = element
        functions[name] = table
    predicates = {name: set() for name in preds if name != "="}
    for lit in branch.literals:
        if not lit.negated and not lit.is_equality:
            predicates[lit.pred].add(tuple(classes[a] for a in lit.args))
    model = Interpretation(
        size=size,
        naming={numeral: classes[Const(numeral)] for numeral in constants(f)},
        functions=functions,
        predicates={name: frozenset(rows) for name, rows in predicates.items()},
    )
    return model, {name: classes[Var(name)] for name in free_vars(f)}


# ------------------------------------------------------------------- model search


class _ModelSearch:
    """Backtracking search for a structure of a fixed size satisfying a formula."""

    def __init__(self, size: int, steps: _Steps):
        self.size = size
        self.steps = steps

    def find(self, goal: Formula) -> Optional[Dict[Tuple, object]]:
        for assignment in self._solve([(goal, {})], {}):
            return assignment
        return None

    def _cell(self, key: Tuple, asg: Dict) -> Iterator[Tuple[int, Dict]]:
        if key in asg:
            yield asg[key], asg
            return
        for d in range(self.size):
            yield d, {**asg, key: d}

    def _term(self, t: Term, env: Dict[str, int], asg: Dict) -> Iterator[Tuple[int, Dict]]:
        self.steps.tick()
        if isinstance(t, Var) and t.name in env:
            yield env[t.name], asg
        elif isinstance(t, Var):
            yield from self._cell(("var", t.name), asg)
        elif isinstance(t, Const):
            yield from self._cell(("const", t.numeral), asg)
        else:
            for values, asg1 in self._terms(t.args, env, asg):
                yield from self._cell(("fn", t.func, values), asg1)

    def _terms(self, ts, env, asg) -> Iterator[Tuple[Tuple[int, ...], Dict]]:
        if not ts:
            yield (), asg
            return
        for value, asg1 in self._term(ts[0], env, asg):
            for rest, asg2 in self._terms(ts[1:], env, asg1):
                yield (value,) + rest, asg2

    def _solve(self, goals: List[Tuple[Formula, Dict[str, int]]], asg: Dict) -> Iterator[Dict]:
        goals = list(goals)
        while goals:
            self.steps.tick()
            f, env = goals.pop()
            if isinstance(f, Top):
                continue
            if isinstance(f, Bot):
                return
            if isinstance(f, Atom):
                for values, asg1 in self._terms(f.args, env, asg):
                    if f.is_equality:
                        if (values[0] == values[1]) != f.negated:
                            yield from self._solve(goals, asg1)
                        continue
                    key = ("pred", f.pred, values)
                    want = not f.negated
                    if key not in asg1:
                        yield from self._solve(goals, {**asg1, key: want})
                    elif asg1[key] == want:
                        yield from self._solve(goals, asg1)
                return
            if isinstance(f, Binary) and f.op is Op.AND:
                goals.extend([(f.right, env), (f.left, env)])
            elif isinstance(f, Binary):
                for side in (f.left, f.right):
                    yield from self._solve(goals + [(side, env)], asg)
                return
            elif f.op is Op.FORALL:
                goals.extend((f.body, {**env, f.var: d}) for d in range(self.size))
            else:
                for d in range(self.size):
                    yield from self._solve(goals + [(f.body, {**env, f.var: d})], asg)
                return
        yield asg


def _model_from_cells(
    f: Formula, size: int, cells: Dict[Tuple, object]
) -> Tuple[Interpretation, Dict[str, int]]:
    preds, funcs = symbols(f)
    functions = {
        name: {
            args: cells.get(("fn", name, args), 0)
            for args in itertools.product(range(size), repeat=arity)
        }
        for name, arity in funcs.items()
    }
    predicates = {
        name: frozenset(
            args for args in itertools.product(range(size), repeat=arity)
            if cells.get(("pred", name, args), False)
        )
        for name, arity in preds.items() if name != "="
    }
    model = Interpretation(
        size=size,
        naming={numeral: cells.get(("const", numeral), 0) for numeral in constants(f)},
        functions=functions,
        predicates=predicates,
    )
    return model, {name: cells.get(("var", name), 0) for name in free_vars(f)}


def find_model(f: Formula, size: int, steps: int = 100_000) -> Optional[Tuple[Interpretation, Dict[str, int]]]:
    """A structure of the given size, with a valuation of free variables, satisfying f."""
    try:
        cells = _ModelSearch(size, _Steps(steps)).find(f)
    except _OutOfSteps:
        return None
    return None if cells is None else _model_from_cells(f, size, cells)


# ---------------------------------------------------------------------- pipeline


def _refutes(f: Formula, model: Interpretation, valuation: Dict[str, int]) -> bool:
    return not model.evaluate(f, valuation)


def _small_countermodel(
    f: Formula, goal: Formula, budget: ClassicalBudget
) -> Optional[Tuple[Interpretation, Dict[str, int]]]:
    """A countermodel of at most ``max_domain`` elements, searched on a budget of its own."""
    steps = _Steps(budget.steps)
    for size in range(1, budget.max_domain + 1):
        try:
            cells = _ModelSearch(size, steps).find(goal)
        except _OutOfSteps:
            return None
        if cells is not None:
            model, valuation = _model_from_cells(f, size, cells)
            if _refutes(f, model, valuation):
                return model, valuation
    return None


@lru_cache(maxsize=8192)
def decide_validity(f: Formula, budget: ClassicalBudget = ClassicalBudget()) -> Verdict:
    """Decide classical validity of an elementary formula within a step budget."""
    if not is_elementary(f):
        raise ValueError(f"not elementary: {pretty_formula(f)}")
    steps = _Steps(budget.steps)
    goal = negate(f)
    try:
        for rounds in range(0, budget.max_domain + 4):
            branch = _Tableau(steps).expand([goal], [], [], set(), rounds)
            if branch is None:
                return Valid(f"closed tableau, {rounds} instantiation rounds")
            if branch.saturated:
                model, valuation = _model_from_branch(f, branch)
                if _refutes(f, model, valuation):
                    if model.size > budget.max_domain:
                        smaller = _small_countermodel(f, goal, budget)
                        model, valuation = smaller or (model, valuation)
                    return Invalid(model, valuation)
            size = rounds + 1
            if size <= budget.max_domain:
                cells = _ModelSearch(size, steps).find(goal)
                if cells is not None:
                    model, valuation = _model_from_cells(f, size, cells)
                    if _refutes(f, model, valuation):
                        return Invalid(model, valuation)
                    LOGGER.warning("discarding a countermodel that failed re-evaluation")
    except _OutOfSteps:
        LOGGER.debug("classical budget of %d steps exhausted on %s", budget.steps, pretty_formula(f))
        return Unknown(f"{budget.steps} steps exhausted")
    return Unknown("no closed tableau or countermodel within the bounds")


def is_stable(s: Sequent, budget: ClassicalBudget = ClassicalBudget()) -> Verdict:
    """Classical validity of the sequent's elementarization."""
    return decide_validity(elementarize_sequent(s), budget)
