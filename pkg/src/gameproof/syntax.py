"""
Formulas and sequents of the game language.

Formulas are stored in negation normal form: ``~`` over compound formulas and ``->``
are accepted by the parser and rewritten on the spot. Terms and formulas are frozen
dataclasses, so they hash, compare structurally and can be shared freely.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, Final, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Set, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from .config import NUMERAL_RE
from .errors import ArityError, FormulaSyntaxError, SubstitutionCollision

LOGGER: Final = logging.getLogger(__name__)

BUILTIN_FUNCTIONS: Final = {"succ": 1, "add": 2, "mul": 2, "cube": 1}
BUILTIN_PREDICATES: Final = {"=": 2, "Even": 1, "Odd": 1}


# --------------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    numeral: str

    def __post_init__(self):
        if not NUMERAL_RE.fullmatch(self.numeral):
            raise FormulaSyntaxError(f"Malformed constant {self.numeral!r}")

    def __str__(self) -> str:
        return self.numeral


@dataclass(frozen=True)
class App:
    func: str
    args: Tuple["Term", ...]

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Const, App]


def term_of(text: str) -> Term:
    """A constant for a binary numeral, a variable otherwise."""
    if text and text[0] in "01":
        return Const(text)
    return Var(text)


def numeral_size(numeral: str) -> int:
    """Bit length of a numeral, with the numeral ``0`` counting as empty."""
    return 0 if numeral == "0" else len(numeral)


def term_vars(t: Term) -> Set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        return set().union(*(term_vars(a) for a in t.args)) if t.args else set()
    return set()


def term_constants(t: Term) -> Set[str]:
    if isinstance(t, Const):
        return {t.numeral}
    if isinstance(t, App):
        return set().union(*(term_constants(a) for a in t.args)) if t.args else set()
    return set()


# ------------------------------------------------------------------------ formulas


class Player(Enum):
    """The machine (⊤) and its environment (⊥)."""
    TOP = "T"
    BOTTOM = "B"

    @property
    def opponent(self) -> "Player":
        return Player.BOTTOM if self is Player.TOP else Player.TOP

    @property
    def glyph(self) -> str:
        return "⊤" if self is Player.TOP else "⊥"


class Op(Enum):
    """Connectives and quantifiers. Values are the ASCII spellings."""
    AND = "/\\"
    OR = "\\/"
    CHOICE_AND = "&"
    CHOICE_OR = "|"
    FORALL = "A"
    EXISTS = "E"
    CHOICE_ALL = "!"
    CHOICE_EXISTS = "?"

    @property
    def glyph(self) -> str:
        glyphs = {
            "/\\": "∧",
            "\\/": "∨",
            "&": "⊓",
            "|": "⊔",
            "A": "∀",
            "E": "∃",
            "!": "⊓",
            "?": "⊔",
        }
        return glyphs[self.value]

    @property
    def is_quantifier(self) -> bool:
        return self in (Op.FORALL, Op.EXISTS, Op.CHOICE_ALL, Op.CHOICE_EXISTS)

    @property
    def is_choice(self) -> bool:
        return self in (Op.CHOICE_AND, Op.CHOICE_OR, Op.CHOICE_ALL, Op.CHOICE_EXISTS)

    @property
    def dual(self) -> "Op":
        duals = {
            Op.AND: Op.OR,
            Op.OR: Op.AND,
            Op.CHOICE_AND: Op.CHOICE_OR,
            Op.CHOICE_OR: Op.CHOICE_AND,
            Op.FORALL: Op.EXISTS,
            Op.EXISTS: Op.FORALL,
            Op.CHOICE_ALL: Op.CHOICE_EXISTS,
            Op.CHOICE_EXISTS: Op.CHOICE_ALL,
        }
        return duals[self]

    @property
    def mover(self) -> Optional[Player]:
        """The player whose move resolves a choice operator."""
        if self in (Op.CHOICE_AND, Op.CHOICE_ALL):
            return Player.BOTTOM
        if self in (Op.CHOICE_OR, Op.CHOICE_EXISTS):
            return Player.TOP
        return None

    @property
    def level(self) -> int:
        return 2 if self in (Op.AND, Op.CHOICE_AND) else 1


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "T"


@dataclass(frozen=True)
class Bot:
    def __str__(self) -> str:
        return "F"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: Tuple[Term, ...] = ()
    negated: bool = False

    @property
    def is_equality(self) -> bool:
        return self.pred == "="

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Binary:
    op: Op
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Quantified:
    op: Op
    var: str
    body: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Top, Bot, Atom, Binary, Quantified]
Path = Tuple[int, ...]

TOP: Final = Top()
BOT: Final = Bot()


@dataclass(frozen=True)
class Sequent:
    """``E1, ..., En => F``; an empty antecedent stands for the bare formula F."""
    antecedent: Tuple[Formula, ...]
    succedent: Formula

    @property
    def formulas(self) -> Tuple[Formula, ...]:
        return self.antecedent + (self.succedent,)

    def with_member(self, index: int, formula: Formula) -> "Sequent":
        members = list(self.antecedent)
        members[index] = formula
        return Sequent(tuple(members), self.succedent)

    def with_succedent(self, formula: Formula) -> "Sequent":
        return Sequent(self.antecedent, formula)

    def appended(self, formula: Formula) -> "Sequent":
        return Sequent(self.antecedent + (formula,), self.succedent)

    def __str__(self) -> str:
        return format_sequent(self)


def negate(f: Formula) -> Formula:
    """The De Morgan dual, keeping negation on atoms."""
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    if isinstance(f, Atom):
        return replace(f, negated=not f.negated)
    if isinstance(f, Binary):
        return Binary(f.op.dual, negate(f.left), negate(f.right))
    return Quantified(f.op.dual, f.var, negate(f.body))


def implies(antecedent: Formula, consequent: Formula) -> Formula:
    return Binary(Op.OR, negate(antecedent), consequent)


def conjoin(items: Iterable[Formula], op: Op = Op.AND) -> Formula:
    """Right-nested conjunction; the empty conjunction is ⊤."""
    items = list(items)
    if not items:
        return TOP if op in (Op.AND, Op.CHOICE_AND) else BOT
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Binary(op, item, result)
    return result


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, Binary):
        return (f.left, f.right)
    if isinstance(f, Quantified):
        return (f.body,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    yield f
    for child in children(f):
        yield from walk(child)


# ------------------------------------------------------------------ variable queries


def _free(f: Formula, bound: FrozenSet[str], out: Set[str]) -> None:
    if isinstance(f, Atom):
        for arg in f.args:
            out.update(term_vars(arg) - bound)
    elif isinstance(f, Binary):
        _free(f.left, bound, out)
        _free(f.right, bound, out)
    elif isinstance(f, Quantified):
        _free(f.body, bound | {f.var}, out)


def free_vars(x: Union[Formula, Sequent]) -> Tuple[str, ...]:
    """Free variables in lexicographic order."""
    out: Set[str] = set()
    for f in _formulas_of(x):
        _free(f, frozenset(), out)
    return tuple(sorted(out))


def bound_vars(x: Union[Formula, Sequent]) -> Set[str]:
    return {g.var for f in _formulas_of(x) for g in walk(f) if isinstance(g, Quantified)}


def all_vars(x: Union[Formula, Sequent]) -> Set[str]:
    names = bound_vars(x)
    for f in _formulas_of(x):
        for g in walk(f):
            if isinstance(g, Atom):
                for arg in g.args:
                    names |= term_vars(arg)
    return names


def constants(x: Union[Formula, Sequent]) -> Set[str]:
    out: Set[str] = set()
    for f in _formulas_of(x):
        for g in walk(f):
            if isinstance(g, Atom):
                for arg in g.args:
                    out |= term_constants(arg)
    return out


def _formulas_of(x: Union[Formula, Sequent]) -> Tuple[Formula, ...]:
    return x.formulas if isinstance(x, Sequent) else (x,)


def fresh_variable(base: str, taken: Iterable[str]) -> str:
    """First of ``base1, base2, ...`` not in ``taken``."""
    taken = set(taken)
    stem = base.rstrip("'0123456789") or "v"
    for k in itertools.count(1):
        name = f"{stem}{k}"
        if name not in taken:
            return name
    raise AssertionError("unreachable")


def native_magnitude(x: Union[Formula, Sequent]) -> int:
    """Largest bit length of a constant occurring in ``x``."""
    return max((numeral_size(c) for c in constants(x)), default=0)


def choice_count(f: Formula) -> int:
    """Number of choice-operator occurrences, surface or not."""
    return sum(1 for g in walk(f) if isinstance(g, (Binary, Quantified)) and g.op.is_choice)


def is_elementary(x: Union[Formula, Sequent]) -> bool:
    return all(choice_count(f) == 0 for f in _formulas_of(x))


def symbols(x: Union[Formula, Sequent]) -> Tuple[Dict[str, int], Dict[str, int]]:
    """Predicate and function letters with their arities."""
    preds: Dict[str, int] = {}
    funcs: Dict[str, int] = {}

    def note(table: Dict[str, int], name: str, arity: int, builtin: Mapping[str, int]) -> None:
        expected = builtin.get(name, table.get(name, arity))
        if expected != arity:
            raise ArityError(f"{name} used with {arity} arguments, expected {expected}")
        table[name] = arity

    def visit_term(t: Term) -> None:
        if isinstance(t, App):
            note(funcs, t.func, len(t.args), BUILTIN_FUNCTIONS)
            for arg in t.args:
                visit_term(arg)

    for f in _formulas_of(x):
        for g in walk(f):
            if isinstance(g, Atom):
                note(preds, g.pred, len(g.args), BUILTIN_PREDICATES)
                for arg in g.args:
                    visit_term(arg)
    return preds, funcs


# --------------------------------------------------------------------- substitution


def _subst_term(t: Term, bindings: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return bindings.get(t.name, t)
    if isinstance(t, App):
        return App(t.func, tuple(_subst_term(a, bindings) for a in t.args))
    return t


def _subst(f: Formula, bindings: Mapping[str, Term]) -> Formula:
    if not bindings or isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_subst_term(a, bindings) for a in f.args), f.negated)
    if isinstance(f, Binary):
        return Binary(f.op, _subst(f.left, bindings), _subst(f.right, bindings))
    inner = {k: v for k, v in bindings.items() if k != f.var}
    live = set(free_vars(f.body))
    for name, value in inner.items():
        if name in live and f.var in term_vars(value):
            raise SubstitutionCollision(
                f"substituting {value} for {name} would be captured by {f.op.value}{f.var}"
            )
    return Quantified(f.op, f.var, _subst(f.body, inner))


def substitute(f: Formula, bindings: Mapping[str, Union[Term, str]]) -> Formula:
    """Simultaneously replace free variables; string values go through term_of."""
    terms = {k: term_of(v) if isinstance(v, str) else v for k, v in bindings.items()}
    return _subst(f, terms)


def substitute_sequent(s: Sequent, bindings: Mapping[str, Union[Term, str]]) -> Sequent:
    return Sequent(
        tuple(substitute(f, bindings) for f in s.antecedent), substitute(s.succedent, bindings)
    )


# ---------------------------------------------------------------- occurrence paths


def subformula(f: Formula, path: Path) -> Formula:
    for step in path:
        kids = children(f)
        if step >= len(kids):
            raise IndexError(f"path {path} leaves the formula")
        f = kids[step]
    return f


def replace_at(f: Formula, path: Path, new: Formula) -> Formula:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(f, Binary):
        if head == 0:
            return Binary(f.op, replace_at(f.left, rest, new), f.right)
        if head == 1:
            return Binary(f.op, f.left, replace_at(f.right, rest, new))
    if isinstance(f, Quantified) and head == 0:
        return Quantified(f.op, f.var, replace_at(f.body, rest, new))
    raise IndexError(f"path {path} leaves the formula")


def surface_occurrences(f: Formula, ops: Union[Op, Iterable[Op]]) -> List[Path]:
    """Paths of occurrences of ``ops`` that are not inside any choice operator."""
    wanted = {ops} if isinstance(ops, Op) else set(ops)
    found: List[Path] = []

    def visit(g: Formula, path: Path) -> None:
        if isinstance(g, (Binary, Quantified)):
            if g.op in wanted:
                found.append(path)
            if g.op.is_choice:
                return
            for k, child in enumerate(children(g)):
                visit(child, path + (k,))

    visit(f, ())
    return found


def is_surface_path(f: Formula, path: Path) -> bool:
    for k in range(len(path)):
        g = subformula(f, path[:k])
        if isinstance(g, (Binary, Quantified)) and g.op.is_choice:
            return False
    subformula(f, path)
    return True


def move_prefix(f: Formula, path: Path) -> str:
    """Move-string prefix addressing the node at ``path`` (``j.`` per parallel node)."""
    parts = []
    for k in range(len(path)):
        g = subformula(f, path[:k])
        if isinstance(g, Binary):
            parts.append(f"{path[k]}.")
    return "".join(parts)


# ------------------------------------------------------------------ elementarization


def elementarize(f: Formula) -> Formula:
    """Replace ⊓/⊓x subformulas by ⊤ and ⊔/⊔x subformulas by ⊥."""
    if isinstance(f, Binary):
        if f.op is Op.CHOICE_AND:
            return TOP
        if f.op is Op.CHOICE_OR:
            return BOT
        return Binary(f.op, elementarize(f.left), elementarize(f.right))
    if isinstance(f, Quantified):
        if f.op is Op.CHOICE_ALL:
            return TOP
        if f.op is Op.CHOICE_EXISTS:
            return BOT
        return Quantified(f.op, f.var, elementarize(f.body))
    return f


def elementarize_sequent(s: Sequent) -> Formula:
    succedent = elementarize(s.succedent)
    if not s.antecedent:
        return succedent
    return implies(conjoin(elementarize(g) for g in s.antecedent), succedent)


# -------------------------------------------------------------- alpha-equivalence


class Vacuous:
    """Marker returned by match_instance when the variable does not occur."""

    def __repr__(self) -> str:
        return "VACUOUS"


VACUOUS: Final = Vacuous()


class _Matcher:
    def __init__(self, var: Optional[str]):
        self.var = var
        self.found: Optional[Term] = None

    def term(self, p: Term, t: Term, pmap: Dict[str, int], tmap: Dict[str, int]) -> bool:
        if isinstance(p, Var):
            if p.name in pmap:
                return isinstance(t, Var) and tmap.get(t.name) == pmap[p.name]
            if p.name == self.var:
                if any(v in tmap for v in term_vars(t)):
                    return False
                if self.found is None:
                    self.found = t
                    return True
                return self.found == t
            return isinstance(t, Var) and t.name == p.name and t.name not in tmap
        if isinstance(p, Const):
            return p == t
        return (
            isinstance(t, App)
            and t.func == p.func
            and len(t.args) == len(p.args)
            and all(self.term(a, b, pmap, tmap) for a, b in zip(p.args, t.args))
        )

    def formula(
        self, p: Formula, t: Formula, pmap: Dict[str, int], tmap: Dict[str, int], depth: int = 0
    ) -> bool:
        if isinstance(p, (Top, Bot)):
            return type(p) is type(t)
        if isinstance(p, Atom):
            return (
                isinstance(t, Atom)
                and p.pred == t.pred
                and p.negated == t.negated
                and len(p.args) == len(t.args)
                and all(self.term(a, b, pmap, tmap) for a, b in zip(p.args, t.args))
            )
        if isinstance(p, Binary):
            return (
                isinstance(t, Binary)
                and p.op is t.op
                and self.formula(p.left, t.left, pmap, tmap, depth)
                and self.formula(p.right, t.right, pmap, tmap, depth)
            )
        if not isinstance(t, Quantified) or p.op is not t.op:
            return False
        return self.formula(
            p.body, t.body, {**pmap, p.var: depth}, {**tmap, t.var: depth}, depth + 1
        )


def alpha_equal(a: Formula, b: Formula) -> bool:
    """Structural equality up to renaming of bound variables."""
    return _Matcher(None).formula(a, b, {}, {})


def sequents_alpha_equal(a: Sequent, b: Sequent) -> bool:
    return len(a.antecedent) == len(b.antecedent) and all(
        alpha_equal(f, g) for f, g in zip(a.formulas, b.formulas)
    )


def match_instance(body: Formula, var: str, target: Formula) -> Union[Term, Vacuous, None]:
    """Find t with ``body[var := t]`` alpha-equal to ``target``."""
    matcher = _Matcher(var)
    if not matcher.formula(body, target, {}, {}):
        return None
    return matcher.found if matcher.found is not None else VACUOUS


def canonical(f: Formula, counter: Optional[Iterator[int]] = None) -> Formula:
    """Rename bound variables to ``_b0, _b1, ...`` in traversal order."""
    counter = counter if counter is not None else itertools.count()

    def rename_term(t: Term, env: Mapping[str, str]) -> Term:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, App):
            return App(t.func, tuple(rename_term(a, env) for a in t.args))
        return t

    def go(g: Formula, env: Mapping[str, str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(rename_term(a, env) for a in g.args), g.negated)
        if isinstance(g, Binary):
            return Binary(g.op, go(g.left, env), go(g.right, env))
        if isinstance(g, Quantified):
            new = f"_b{next(counter)}"
            return Quantified(g.op, new, go(g.body, {**env, g.var: new}))
        return g

    return go(f, {})


def canonical_sequent(s: Sequent) -> Sequent:
    counter = itertools.count()
    return Sequent(
        tuple(canonical(f, counter) for f in s.antecedent), canonical(s.succedent, counter)
    )


def separate_variables(s: Sequent) -> Sequent:
    """Rename binders whose variable also occurs free in the sequent."""
    clash = set(free_vars(s)) & bound_vars(s)
    if not clash:
        return s
    taken = all_vars(s)

    def go(f: Formula) -> Formula:
        if isinstance(f, Binary):
            return Binary(f.op, go(f.left), go(f.right))
        if isinstance(f, Quantified):
            body = go(f.body)
            if f.var not in clash:
                return Quantified(f.op, f.var, body)
            new = f.var + "'"
            while new in taken:
                new += "'"
            taken.add(new)
            return Quantified(f.op, new, substitute(body, {f.var: Var(new)}))
        return f

    LOGGER.debug("renaming bound variables %s apart from free ones", sorted(clash))
    return Sequent(tuple(go(f) for f in s.antecedent), go(s.succedent))


# --------------------------------------------------------------------------- parser

GRAMMAR = r"""
    start: sequent

    sequent: [antecedent] "=>" imp      -> with_antecedent
           | imp                         -> bare
    antecedent: imp ("," imp)*

    ?imp: disj
        | disj "->" imp                  -> implies

    ?disj: conj
         | conj "\\/" disj               -> par_or
         | conj "|" disj                 -> choice_or

    ?conj: unary
         | unary "/\\" conj              -> par_and
         | unary "&" conj                -> choice_and

    ?unary: "~" unary                    -> neg
          | QUANT unary                  -> quantified
          | "T"                          -> top
          | "F"                          -> bot
          | NAME "(" sum ("," sum)* ")"  -> predicate
          | NAME                         -> predicate
          | sum "=" sum                  -> equation
          | "(" imp ")"

    ?sum: product
        | sum "+" product                -> add
    ?product: power
            | product "*" power          -> mul
    ?power: primary
          | primary "^" "3"              -> cube
    ?primary: NUMERAL                    -> const
            | NAME                       -> var
            | NAME "(" sum ("," sum)* ")" -> func
            | "(" sum ")"

    QUANT.2: /[AE!?][ \t]*[a-z][A-Za-z0-9_]*'*[ \t]*:/
    NAME: /(?![TF](?![A-Za-z0-9_']))[A-Za-z][A-Za-z0-9_]*'*/
    NUMERAL: /[01]+/

    %import common.WS
    %ignore WS
"""

_QUANTIFIERS: Final = {"A": Op.FORALL, "E": Op.EXISTS, "!": Op.CHOICE_ALL, "?": Op.CHOICE_EXISTS}


class _ToAst(Transformer):
    def start(self, items):
        return items[0]

    def with_antecedent(self, items):
        members, succedent = items
        return Sequent(tuple(members or ()), succedent)

    def bare(self, items):
        return Sequent((), items[0])

    def antecedent(self, items):
        return list(items)

    def implies(self, items):
        return implies(items[0], items[1])

    def par_or(self, items):
        return Binary(Op.OR, items[0], items[1])

    def choice_or(self, items):
        return Binary(Op.CHOICE_OR, items[0], items[1])

    def par_and(self, items):
        return Binary(Op.AND, items[0], items[1])

    def choice_and(self, items):
        return Binary(Op.CHOICE_AND, items[0], items[1])

    def neg(self, items):
        return negate(items[0])

    def quantified(self, items):
        token: Token = items[0]
        text = str(token)
        return Quantified(_QUANTIFIERS[text[0]], text[1:-1].strip(), items[1])

    def top(self, _):
        return TOP

    def bot(self, _):
        return BOT

    def predicate(self, items):
        return Atom(str(items[0]), tuple(items[1:]))

    def equation(self, items):
        return Atom("=", (items[0], items[1]))

    def add(self, items):
        return App("add", (items[0], items[1]))

    def mul(self, items):
        return App("mul", (items[0], items[1]))

    def cube(self, items):
        return App("cube", (items[0],))

    def const(self, items):
        return Const(str(items[0]))

    def var(self, items):
        return Var(str(items[0]))

    def func(self, items):
        return App(str(items[0]), tuple(items[1:]))


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(GRAMMAR, start="start", parser="earley")


def parse_sequent(text: str) -> Sequent:
    """Parse ``G1, ..., Gn => F`` (or a bare formula) into a normalized sequent."""
    try:
        tree = _parser().parse(text)
        sequent = _ToAst().transform(tree)
    except UnexpectedInput as exc:
        line = getattr(exc, "line", None)
        column = getattr(exc, "column", None)
        if line is not None and line < 0:
            line = column = None
        raise FormulaSyntaxError(f"Cannot parse {text!r}", line, column) from exc
    except VisitError as exc:
        if isinstance(exc.orig_exc, FormulaSyntaxError):
            raise exc.orig_exc from exc
        raise
    symbols(sequent)
    return separate_variables(sequent)


def parse_formula(text: str) -> Formula:
    sequent = parse_sequent(text)
    if sequent.antecedent or "=>" in text:
        raise FormulaSyntaxError("Expected a formula, got a sequent")
    return sequent.succedent


# ------------------------------------------------------------------------- printing

_TERM_SPELLING: Final = {"add": ("+", 1), "mul": ("*", 2)}
_PRETTY_TERM: Final = {"add": "+", "mul": "×"}


def _term_text(t: Term, pretty: bool) -> Tuple[str, int]:
    if isinstance(t, (Var, Const)):
        return str(t), 4
    if t.func in _TERM_SPELLING and len(t.args) == 2:
        symbol, level = _TERM_SPELLING[t.func]
        if pretty:
            symbol = _PRETTY_TERM[t.func]
        left, ll = _term_text(t.args[0], pretty)
        right, rl = _term_text(t.args[1], pretty)
        left = f"({left})" if ll < level else left
        right = f"({right})" if rl <= level else right
        return f"{left} {symbol} {right}", level
    if t.func == "cube" and len(t.args) == 1:
        inner, level = _term_text(t.args[0], pretty)
        inner = f"({inner})" if level < 4 else inner
        return f"{inner}{'³' if pretty else '^3'}", 3
    args = ", ".join(_term_text(a, pretty)[0] for a in t.args)
    return f"{t.func}({args})", 4


def format_term(t: Term) -> str:
    return _term_text(t, False)[0]


def _atom_text(f: Atom, pretty: bool) -> str:
    if f.is_equality:
        body = f"{_term_text(f.args[0], pretty)[0]} = {_term_text(f.args[1], pretty)[0]}"
        if f.negated:
            return f"¬({body})" if pretty else f"~({body})"
        return body
    text = f.pred
    if f.args:
        text += "(" + ", ".join(_term_text(a, pretty)[0] for a in f.args) + ")"
    if f.negated:
        return ("¬" if pretty else "~") + text
    return text


def _formula_text(f: Formula, pretty: bool) -> Tuple[str, int]:
    if isinstance(f, Top):
        return ("⊤" if pretty else "T"), 3
    if isinstance(f, Bot):
        return ("⊥" if pretty else "F"), 3
    if isinstance(f, Atom):
        return _atom_text(f, pretty), 3
    if isinstance(f, Quantified):
        body, _ = _formula_text(f.body, pretty)
        if isinstance(f.body, Binary):
            body = f"({body})"
        if pretty:
            glue = "" if isinstance(f.body, (Binary, Quantified)) else " "
            return f"{f.op.glyph}{f.var}{glue}{body}", 3
        return f"{f.op.value}{f.var}: {body}", 3
    level = f.op.level
    left, ll = _formula_text(f.left, pretty)
    right, rl = _formula_text(f.right, pretty)
    left = f"({left})" if ll <= level else left
    right = f"({right})" if rl < level else right
    symbol = f.op.glyph if pretty else f.op.value
    return f"{left} {symbol} {right}", level


def format_formula(f: Formula) -> str:
    """Canonical ASCII text; parses back to the same formula."""
    return _formula_text(f, False)[0]


def pretty_formula(f: Formula) -> str:
    return _formula_text(f, True)[0]


def format_sequent(s: Sequent) -> str:
    members = ", ".join(format_formula(f) for f in s.antecedent)
    prefix = f"{members} " if members else ""
    return f"{prefix}=> {format_formula(s.succedent)}"


def pretty_sequent(s: Sequent) -> str:
    members = ", ".join(pretty_formula(f) for f in s.antecedent)
    prefix = f"{members} " if members else ""
    return f"{prefix}∘– {pretty_formula(s.succedent)}"
