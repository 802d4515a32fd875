"""
Game semantics for sequents.

A position is an immutable ``GameState``: the closure variables ⊥ still has to choose,
one tree of copies per antecedent member, and what is left of the succedent. Move
strings follow the addressing scheme ``#c`` / ``1.rest`` / ``0.i.rest`` with ``u.β`` and
``:w`` inside trees, ``j.`` through parallel connectives and ``0``/``1``/``#c`` at choice
operators.
"""

import json
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Final, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .config import NUMERAL_RE, OracleConfig
from .errors import BudgetExceeded, InterpretationError, ScriptError
from .syntax import (
    Atom,
    Binary,
    Bot,
    Const,
    Formula,
    Op,
    Player,
    Quantified,
    Sequent,
    Term,
    Top,
    Var,
    elementarize,
    free_vars,
    pretty_formula,
    substitute,
)

LOGGER: Final = logging.getLogger(__name__)

_BITS_RE: Final = re.compile(r"[01]*")
_MEMBER_RE: Final = re.compile(r"(0|[1-9][0-9]*)\.(.*)", re.DOTALL)


# ------------------------------------------------------------------------ labmoves


@dataclass(frozen=True)
class LabMove:
    player: Player
    move: str

    def __str__(self) -> str:
        return f"{self.player.glyph}{self.move}"

    def to_line(self) -> str:
        return f"{self.player.value} {self.move}"


Run = Tuple[LabMove, ...]


def top(move: str) -> LabMove:
    return LabMove(Player.TOP, move)


def bottom(move: str) -> LabMove:
    return LabMove(Player.BOTTOM, move)


def parse_labmove(text: str) -> LabMove:
    """Accept ``T <move>``, ``B <move>`` or the glyph forms ``⊤move`` / ``⊥move``."""
    text = text.strip()
    if text[:1] in ("⊤", "⊥"):
        return LabMove(Player.TOP if text[0] == "⊤" else Player.BOTTOM, text[1:].strip())
    head, _, move = text.partition(" ")
    if head not in ("T", "B"):
        raise ScriptError(f"Not a labmove: {text!r}")
    return LabMove(Player(head), move.strip())


def parse_run(text: str) -> Run:
    return tuple(parse_labmove(line) for line in text.splitlines() if line.strip())


def format_run(run: Iterable[LabMove]) -> str:
    return "".join(lm.to_line() + "\n" for lm in run)


def show_run(run: Iterable[LabMove]) -> str:
    return "⟨" + ", ".join(str(lm) for lm in run) + "⟩"


# ---------------------------------------------------------------- formula moves


def formula_move(f: Formula, move: str, player: Player) -> Optional[Formula]:
    """The formula a legal move brings ``f`` down to, or None when illegal."""
    if isinstance(f, Quantified) and not f.op.is_choice:
        body = formula_move(f.body, move, player)
        return None if body is None else Quantified(f.op, f.var, body)
    if isinstance(f, Binary) and not f.op.is_choice:
        if len(move) < 2 or move[0] not in "01" or move[1] != ".":
            return None
        child = f.left if move[0] == "0" else f.right
        result = formula_move(child, move[2:], player)
        if result is None:
            return None
        if move[0] == "0":
            return Binary(f.op, result, f.right)
        return Binary(f.op, f.left, result)
    if isinstance(f, Binary) and f.op.mover is player and move in ("0", "1"):
        return f.left if move == "0" else f.right
    if isinstance(f, Quantified) and f.op.mover is player and move.startswith("#"):
        if NUMERAL_RE.fullmatch(move[1:]):
            return substitute(f.body, {f.var: Const(move[1:])})
    return None


def formula_moves(f: Formula, player: Player, pool: Sequence[str]) -> List[str]:
    """Every legal move of ``player`` in ``f`` with quantifier choices from ``pool``."""
    if isinstance(f, Quantified) and not f.op.is_choice:
        return formula_moves(f.body, player, pool)
    if isinstance(f, Binary) and not f.op.is_choice:
        return [f"{j}.{m}" for j, child in enumerate((f.left, f.right))
                for m in formula_moves(child, player, pool)]
    if isinstance(f, Binary) and f.op.mover is player:
        return ["0", "1"]
    if isinstance(f, Quantified) and f.op.mover is player:
        return [f"#{c}" for c in pool]
    return []


def locate_choice(f: Formula, move: str) -> Optional[Tuple[Tuple[int, ...], str]]:
    """Path of the choice occurrence a move resolves, with the choice (``0``/``1``/``#c``)."""
    path: List[int] = []
    while True:
        if isinstance(f, Quantified) and not f.op.is_choice:
            path.append(0)
            f = f.body
        elif isinstance(f, Binary) and not f.op.is_choice:
            if len(move) < 2 or move[0] not in "01" or move[1] != ".":
                return None
            path.append(int(move[0]))
            f = f.left if move[0] == "0" else f.right
            move = move[2:]
        elif isinstance(f, (Binary, Quantified)):
            return tuple(path), move
        else:
            return None


# -------------------------------------------------------------------------- trees


@dataclass(frozen=True)
class GameTree:
    """A tree of copies of a game, stored as its leaves keyed by bit-string address."""
    leaves: Tuple[Tuple[str, Formula], ...]

    @classmethod
    def single(cls, formula: Formula) -> "GameTree":
        return cls((("", formula),))

    @property
    def addresses(self) -> Tuple[str, ...]:
        return tuple(address for address, _ in self.leaves)

    def leaf(self, address: str) -> Formula:
        for a, f in self.leaves:
            if a == address:
                return f
        raise KeyError(address)

    def describe(self, pretty: bool = True) -> str:
        table = dict(self.leaves)
        show = pretty_formula if pretty else str

        def build(prefix: str) -> str:
            if prefix in table:
                return show(table[prefix])
            return f"({build(prefix + '0')} ∘ {build(prefix + '1')})"

        text = build("")
        return text[1:-1] if text.startswith("(") and "" not in table else text


def tree_move(tree: GameTree, move: str, player: Player) -> Optional[GameTree]:
    """Apply a move inside a tree; replicative moves belong to ⊥ at this level."""
    if move.startswith(":"):
        address = move[1:]
        if player is not Player.BOTTOM or address not in tree.addresses:
            return None
        leaves = []
        for a, f in tree.leaves:
            leaves.extend([(a + "0", f), (a + "1", f)] if a == address else [(a, f)])
        return GameTree(tuple(sorted(leaves)))
    u, dot, beta = move.partition(".")
    if not dot or not _BITS_RE.fullmatch(u):
        return None
    affected = [a for a in tree.addresses if a.startswith(u)]
    if not affected:
        return None
    leaves = []
    for a, f in tree.leaves:
        if a.startswith(u):
            f = formula_move(f, beta, player)
            if f is None:
                return None
        leaves.append((a, f))
    return GameTree(tuple(leaves))


def tree_moves(tree: GameTree, player: Player, pool: Sequence[str], cap: int) -> List[str]:
    moves: List[str] = []
    prefixes = sorted({a[:k] for a in tree.addresses for k in range(len(a) + 1)})
    for u in prefixes:
        affected = [f for a, f in tree.leaves if a.startswith(u)]
        for beta in formula_moves(affected[0], player, pool):
            if all(formula_move(f, beta, player) is not None for f in affected[1:]):
                moves.append(f"{u}.{beta}")
    if player is Player.BOTTOM and len(tree.leaves) - 1 < cap:
        moves.extend(f":{a}" for a in tree.addresses)
    return moves


# ------------------------------------------------------------------------- states


@dataclass(frozen=True)
class GameState:
    """A position of the ⊓-closure of a sequent."""
    sequent: Sequent
    pending: Tuple[str, ...]
    valuation: Tuple[Tuple[str, str], ...]
    antecedent: Tuple[GameTree, ...]
    succedent: Formula

    @property
    def bare(self) -> bool:
        return not self.sequent.antecedent

    @property
    def in_closure(self) -> bool:
        return bool(self.pending)

    def leaf_positions(self) -> List[Tuple[int, str, Formula]]:
        return [(i, a, f) for i, tree in enumerate(self.antecedent) for a, f in tree.leaves]

    def describe(self) -> str:
        succedent = pretty_formula(self.succedent)
        if self.bare:
            return succedent
        members = ", ".join(tree.describe() for tree in self.antecedent)
        return f"{members} ∘– {succedent}"


@dataclass(frozen=True)
class RecurrenceState:
    """A standalone branching recurrence ∘|G, where replications are ⊥'s."""
    tree: GameTree

    def describe(self) -> str:
        return f"∘|{self.tree.describe()}"


@dataclass(frozen=True)
class Legal:
    state: Union[GameState, RecurrenceState]


@dataclass(frozen=True)
class Illegal:
    player: Player
    reason: str
    index: int = -1


def initial_state(s: Sequent) -> GameState:
    return GameState(
        sequent=s,
        pending=free_vars(s),
        valuation=(),
        antecedent=tuple(GameTree.single(f) for f in s.antecedent),
        succedent=s.succedent,
    )


def recurrence_state(formula: Formula) -> RecurrenceState:
    return RecurrenceState(GameTree.single(formula))


def _close(st: GameState, numeral: str) -> GameState:
    var = st.pending[0]
    binding = {var: Const(numeral)}
    return GameState(
        sequent=st.sequent,
        pending=st.pending[1:],
        valuation=st.valuation + ((var, numeral),),
        antecedent=tuple(
            GameTree(tuple((a, substitute(f, binding)) for a, f in tree.leaves))
            for tree in st.antecedent
        ),
        succedent=substitute(st.succedent, binding),
    )


def check_move(st: Union[GameState, RecurrenceState], lm: LabMove) -> Union[Legal, Illegal]:
    """Judge one labmove; legal moves come back with the position they lead to."""
    player, move = lm.player, lm.move
    if isinstance(st, RecurrenceState):
        tree = tree_move(st.tree, move, player)
        if tree is None:
            return Illegal(player, f"{lm} is not a legal move of {st.describe()}")
        return Legal(RecurrenceState(tree))
    if st.pending:
        if player is not Player.BOTTOM:
            return Illegal(player, "closure choices belong to ⊥")
        if not move.startswith("#") or not NUMERAL_RE.fullmatch(move[1:]):
            return Illegal(player, f"expected #c for {st.pending[0]}, got {move!r}")
        return Legal(_close(st, move[1:]))
    if st.bare:
        result = formula_move(st.succedent, move, player)
        if result is None:
            return Illegal(player, f"{lm} is not legal in {pretty_formula(st.succedent)}")
        return Legal(replace_succedent(st, result))
    if move.startswith("1."):
        result = formula_move(st.succedent, move[2:], player)
        if result is None:
            return Illegal(player, f"{lm} is not legal in the succedent")
        return Legal(replace_succedent(st, result))
    if move.startswith("0."):
        match = _MEMBER_RE.fullmatch(move[2:])
        if match and int(match.group(1)) < len(st.antecedent):
            i = int(match.group(1))
            tree = tree_move(st.antecedent[i], match.group(2), player.opponent)
            if tree is not None:
                trees = st.antecedent[:i] + (tree,) + st.antecedent[i + 1:]
                return Legal(GameState(st.sequent, st.pending, st.valuation, trees, st.succedent))
    return Illegal(player, f"{lm} is not a legal move here")


def replace_succedent(st: GameState, formula: Formula) -> GameState:
    return GameState(st.sequent, st.pending, st.valuation, st.antecedent, formula)


def apply_run(
    st: Union[GameState, RecurrenceState], run: Iterable[LabMove]
) -> Union[GameState, RecurrenceState, Illegal]:
    """Fold check_move over a run, stopping at the first illegal labmove."""
    for index, lm in enumerate(run):
        verdict = check_move(st, lm)
        if isinstance(verdict, Illegal):
            return Illegal(verdict.player, verdict.reason, index)
        st = verdict.state
    return st


def wn(st: Union[GameState, RecurrenceState], interp: "Interpretation") -> Player:
    """The winner of a play that ends in ``st``."""
    if isinstance(st, RecurrenceState):
        won = all(interp.evaluate(elementarize(f)) for _, f in st.tree.leaves)
        return Player.TOP if won else Player.BOTTOM
    if st.pending:
        return Player.TOP
    if interp.evaluate(elementarize(st.succedent)):
        return Player.TOP
    for _, _, leaf in st.leaf_positions():
        if not interp.evaluate(elementarize(leaf)):
            return Player.TOP
    return Player.BOTTOM


def winner_of_run(
    st: Union[GameState, RecurrenceState], run: Iterable[LabMove], interp: "Interpretation"
) -> Player:
    """Winner of a possibly illegal run: the first illegal mover loses."""
    final = apply_run(st, run)
    if isinstance(final, Illegal):
        return final.player.opponent
    return wn(final, interp)


# --------------------------------------------------------------------- projections


def projection_component(run: Iterable[LabMove], i: int) -> Run:
    prefix = f"{i}."
    return tuple(LabMove(lm.player, lm.move[len(prefix):]) for lm in run
                 if lm.move.startswith(prefix))


def projection_bits(run: Iterable[LabMove], v: str) -> Run:
    """Moves ``u.α`` with ``u`` a prefix of ``v``, stripped to ``α``."""
    kept = []
    for lm in run:
        u, dot, rest = lm.move.partition(".")
        if dot and _BITS_RE.fullmatch(u) and v.startswith(u):
            kept.append(LabMove(lm.player, rest))
    return tuple(kept)


def is_delay(phi: Sequence[LabMove], gamma: Sequence[LabMove], p: Player) -> bool:
    """Whether ``phi`` is a ``p``-delay of ``gamma``."""
    def positions(run: Sequence[LabMove], who: Player) -> List[int]:
        return [k for k, lm in enumerate(run) if lm.player is who]

    for who in Player:
        if [lm for lm in phi if lm.player is who] != [lm for lm in gamma if lm.player is who]:
            return False
    gp, gq = positions(gamma, p), positions(gamma, p.opponent)
    fp, fq = positions(phi, p), positions(phi, p.opponent)
    return all(
        fp[n] > fq[k]
        for n in range(len(gp))
        for k in range(len(gq))
        if gp[n] > gq[k]
    )


# ---------------------------------------------------------------- enumeration


def legal_moves(
    st: Union[GameState, RecurrenceState], player: Player, pool: Sequence[str], cap: int = 4
) -> List[str]:
    """Legal moves of ``player``, drawing quantifier choices from ``pool``."""
    if isinstance(st, RecurrenceState):
        return tree_moves(st.tree, player, pool, cap)
    if st.pending:
        return [f"#{c}" for c in pool] if player is Player.BOTTOM else []
    if st.bare:
        return formula_moves(st.succedent, player, pool)
    moves = [f"1.{m}" for m in formula_moves(st.succedent, player, pool)]
    for i, tree in enumerate(st.antecedent):
        moves.extend(f"0.{i}.{m}" for m in tree_moves(tree, player.opponent, pool, cap))
    return moves


def _after(st, player: Player, move: str):
    verdict = check_move(st, LabMove(player, move))
    assert isinstance(verdict, Legal), verdict
    return verdict.state


def legal_runs(
    st: Union[GameState, RecurrenceState], config: OracleConfig = OracleConfig()
) -> List[Run]:
    """Every finite legal run, shortest first."""
    runs: List[Run] = []
    queue = deque([((), st)])
    while queue:
        run, position = queue.popleft()
        runs.append(run)
        if len(runs) > config.max_runs:
            raise BudgetExceeded(f"more than {config.max_runs} legal runs")
        for player in (Player.TOP, Player.BOTTOM):
            for move in legal_moves(position, player, config.pool, config.replication_cap):
                queue.append((run + (LabMove(player, move),), _after(position, player, move)))
    return runs


def winnable(
    st: Union[GameState, RecurrenceState],
    interp: "Interpretation",
    config: OracleConfig = OracleConfig(),
) -> bool:
    """Whether ⊤ can force a win in the finite game cut down by the pool and caps."""
    memo: Dict[object, bool] = {}
    visited = [0]

    def won(position) -> bool:
        if position in memo:
            return memo[position]
        visited[0] += 1
        if visited[0] > config.node_budget:
            raise BudgetExceeded(f"oracle visited more than {config.node_budget} positions")
        pool, cap = config.pool, config.replication_cap
        result = any(
            won(_after(position, Player.TOP, m))
            for m in legal_moves(position, Player.TOP, pool, cap)
        ) or (
            wn(position, interp) is Player.TOP
            and all(
                won(_after(position, Player.BOTTOM, m))
                for m in legal_moves(position, Player.BOTTOM, pool, cap)
            )
        )
        memo[position] = result
        return result

    return won(st)


# ------------------------------------------------------------------ interpretations

Table = Dict[Tuple[int, ...], int]
Relation = FrozenSet[Tuple[int, ...]]


@dataclass
class Interpretation:
    """A finite universe ``0..size-1`` with meanings for constants, functions, predicates.

    ``naming`` is either ``"ideal"`` (a numeral denotes its binary value) or an explicit
    dict. Builtin arithmetic raises on overflow unless ``overflow`` is ``"wrap"``.
    """
    size: int
    naming: Union[str, Dict[str, int]] = "ideal"
    functions: Dict[str, Union[str, Table]] = field(default_factory=dict)
    predicates: Dict[str, Union[str, Relation]] = field(default_factory=dict)
    overflow: str = "error"

    BUILTIN_FUNCTIONS = ("succ", "add", "mul", "cube")
    BUILTIN_PREDICATES = ("Even", "Odd")

    def __post_init__(self):
        if self.size <= 0:
            raise InterpretationError("universe must be non-empty")
        if self.overflow not in ("wrap", "error"):
            raise InterpretationError(f"overflow must be 'wrap' or 'error', not {self.overflow!r}")
        if isinstance(self.naming, str) and self.naming != "ideal":
            raise InterpretationError(f"unknown naming {self.naming!r}")
        if isinstance(self.naming, dict):
            for numeral, element in self.naming.items():
                if not 0 <= element < self.size:
                    raise InterpretationError(f"{numeral} names {element}, outside the universe")

    @classmethod
    def standard(cls, bits: int = 4) -> "Interpretation":
        """Arithmetic modulo ``2^bits`` on ``{0, ..., 2^bits - 1}`` with ideal naming."""
        return cls(size=2 ** bits, overflow="wrap")

    @property
    def universe(self) -> range:
        return range(self.size)

    def constant(self, numeral: str) -> int:
        if self.naming == "ideal":
            value = int(numeral, 2)
            if value >= self.size:
                raise InterpretationError(f"constant {numeral} exceeds the universe of {self.size}")
            return value
        try:
            return self.naming[numeral]
        except KeyError:
            raise InterpretationError(f"constant {numeral} has no meaning") from None

    def apply(self, func: str, args: Tuple[int, ...]) -> int:
        meaning = self.functions.get(func, func if func in self.BUILTIN_FUNCTIONS else None)
        if meaning is None:
            raise InterpretationError(f"function {func} has no meaning")
        if isinstance(meaning, dict):
            try:
                return meaning[args]
            except KeyError:
                raise InterpretationError(f"{func}{args} missing from its table") from None
        if meaning not in self.BUILTIN_FUNCTIONS:
            raise InterpretationError(f"unknown builtin function {meaning!r}")
        raw = {
            "succ": lambda a: a[0] + 1,
            "add": lambda a: a[0] + a[1],
            "mul": lambda a: a[0] * a[1],
            "cube": lambda a: a[0] ** 3,
        }[meaning](args)
        if raw >= self.size and self.overflow == "error":
            raise InterpretationError(f"{func}{args} = {raw} overflows the universe")
        return raw % self.size

    def holds(self, pred: str, args: Tuple[int, ...]) -> bool:
        if pred == "=":
            return args[0] == args[1]
        meaning = self.predicates.get(pred, pred if pred in self.BUILTIN_PREDICATES else None)
        if meaning is None:
            raise InterpretationError(f"predicate {pred} has no meaning")
        if meaning == "Even":
            return args[0] % 2 == 0
        if meaning == "Odd":
            return args[0] % 2 == 1
        if isinstance(meaning, str):
            raise InterpretationError(f"unknown builtin predicate {meaning!r}")
        return args in meaning

    def value(self, t: Term, env: Mapping[str, int]) -> int:
        if isinstance(t, Const):
            return self.constant(t.numeral)
        if isinstance(t, Var):
            if t.name not in env:
                raise InterpretationError(f"variable {t.name} is unassigned")
            return env[t.name]
        return self.apply(t.func, tuple(self.value(a, env) for a in t.args))

    def evaluate(self, f: Formula, valuation: Optional[Mapping[str, int]] = None) -> bool:
        """Classical truth of an elementary formula."""
        env = dict(valuation or {})
        return self._truth(f, env)

    def _truth(self, f: Formula, env: Dict[str, int]) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Atom):
            result = self.holds(f.pred, tuple(self.value(a, env) for a in f.args))
            return result != f.negated
        if isinstance(f, Binary):
            if f.op is Op.AND:
                return self._truth(f.left, env) and self._truth(f.right, env)
            if f.op is Op.OR:
                return self._truth(f.left, env) or self._truth(f.right, env)
        if isinstance(f, Quantified) and not f.op.is_choice:
            outcomes = (self._truth(f.body, {**env, f.var: d}) for d in self.universe)
            return all(outcomes) if f.op is Op.FORALL else any(outcomes)
        raise InterpretationError(f"cannot evaluate a choice operator in {pretty_formula(f)}")

    # -- persistence

    def to_dict(self) -> dict:
        def rows(table: Table) -> List[List[int]]:
            return [list(args) + [value] for args, value in sorted(table.items())]

        return {
            "universe": self.size,
            "naming": self.naming if isinstance(self.naming, str) else dict(self.naming),
            "functions": {
                name: meaning if isinstance(meaning, str) else rows(meaning)
                for name, meaning in sorted(self.functions.items())
            },
            "predicates": {
                name: meaning if isinstance(meaning, str) else sorted(list(t) for t in meaning)
                for name, meaning in sorted(self.predicates.items())
            },
            "overflow": self.overflow,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Interpretation":
        try:
            size = data["universe"]
            if isinstance(size, list):
                size = len(size)
            functions: Dict[str, Union[str, Table]] = {}
            for name, meaning in data.get("functions", {}).items():
                functions[name] = meaning if isinstance(meaning, str) else {
                    tuple(row[:-1]): row[-1] for row in meaning
                }
            predicates: Dict[str, Union[str, Relation]] = {}
            for name, meaning in data.get("predicates", {}).items():
                predicates[name] = meaning if isinstance(meaning, str) else frozenset(
                    tuple(row) for row in meaning
                )
            return cls(
                size=int(size),
                naming=data.get("naming", "ideal"),
                functions=functions,
                predicates=predicates,
                overflow=data.get("overflow", "error"),
            )
        except (KeyError, TypeError) as exc:
            raise InterpretationError(f"malformed interpretation: {exc}") from exc

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Interpretation":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def dump(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")
