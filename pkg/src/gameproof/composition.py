"""
Composition: a machine for F built from a machine K for E1, ..., En ∘– F and machines
N1, ..., Nn for the Ei.

Two implementations produce the same real run. The direct one keeps every embedded
run in memory. The recompute one keeps only a global history of move sizes and
authors, plus a sketch of each machine's state, and recovers a move's symbols by
replaying its author from the start whenever they are needed.
"""

import logging
from collections import deque
from collections.abc import Sequence as SequenceABC
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from typing import Any, Deque, Dict, Final, List, Optional, Sequence, Set, Tuple, Union

from .errors import RecomputeInvariantError, ReplayDivergence
from .runtime import Machine
from .semantics import GameState, Illegal, LabMove, bottom, check_move, initial_state, top
from .syntax import Player, Sequent, choice_count, free_vars

LOGGER: Final = logging.getLogger(__name__)

KERNEL: Final = "K"
ENVIRONMENT: Final = "env"

Author = Union[str, Tuple[int, str]]


def composition_bound(s: Sequent, r: int) -> int:
    """Most moves a composed play can record: F's choices, each copy's, and the replications."""
    return choice_count(s.succedent) + sum(choice_count(e) * (1 + r) for e in s.antecedent) + r


def classify(move: str, bare: bool) -> Optional[Tuple]:
    """Which component a move of K touches: ``("succ",)``, ``("ante", i, u)`` or ``("rep", i, w)``."""
    if bare or move.startswith("1."):
        return ("succ",)
    if not move.startswith("0."):
        return None
    member, _, rest = move[2:].partition(".")
    if not member.isdigit():
        return None
    if rest.startswith(":"):
        return ("rep", int(member), rest[1:])
    u, dot, _ = rest.partition(".")
    if dot and set(u) <= {"0", "1"}:
        return ("ante", int(member), u)
    return None


def _solution_sequent(formula) -> Sequent:
    return Sequent((), formula)


# ------------------------------------------------------------------ direct embedding


@dataclass
class _Embedded:
    state: Any
    run: List[LabMove]
    position: GameState


@dataclass
class _DirectState:
    """Mutable: the composite is the outermost machine and is never forked."""
    cursor: int = 0
    closure: List[str] = field(default_factory=list)
    kernel: Optional[_Embedded] = None
    copies: Dict[int, Dict[str, _Embedded]] = field(default_factory=dict)
    queue: Deque[str] = field(default_factory=deque)
    aborted: Optional[str] = None
    internal_moves: int = 0


class DirectComposition(Machine):
    name = "compose-direct"

    def __init__(self, kernel: Machine, s: Sequent, solutions: Sequence[Machine], max_rounds: int = 64):
        if len(solutions) != len(s.antecedent):
            raise ValueError(
                f"{len(s.antecedent)} antecedent members need as many solutions, got {len(solutions)}"
            )
        self.kernel = kernel
        self.sequent = s
        self.solutions = tuple(solutions)
        self.max_rounds = max_rounds
        self.bare = not s.antecedent
        self.real_closure = free_vars(s.succedent)

    def start(self) -> _DirectState:
        return _DirectState()

    def scratch_size(self, st: _DirectState) -> int:
        if st.kernel is None:
            return len(st.closure)
        size = len(st.kernel.run) + self.kernel.scratch_size(st.kernel.state) + len(st.queue)
        for i, copies in st.copies.items():
            for c in copies.values():
                size += len(c.run) + self.solutions[i].scratch_size(c.state)
        return size

    def flags(self, st: _DirectState) -> Dict[str, Any]:
        out: Dict[str, Any] = {"internal_moves": st.internal_moves}
        if st.aborted:
            out["aborted"] = st.aborted
        if st.kernel is not None:
            out.update({f"kernel.{k}": v for k, v in self.kernel.flags(st.kernel.state).items()})
        return out

    def step(self, st: _DirectState, run: Sequence[LabMove]):
        if st.aborted:
            return st, None
        if st.kernel is None and not self.real_closure:
            self._launch(st)
        while st.cursor < len(run):
            lm = run[st.cursor]
            st.cursor += 1
            if lm.player is not Player.BOTTOM:
                continue
            if st.kernel is None:
                st.closure.append(lm.move[1:])
                if len(st.closure) == len(self.real_closure):
                    self._launch(st)
            else:
                self._feed(st, st.kernel, bottom(lm.move if self.bare else f"1.{lm.move}"), "K")
        if st.kernel is None:
            return st, None
        for _ in range(self.max_rounds):
            if st.aborted or not self._round(st):
                break
        if st.aborted:
            LOGGER.warning("composition aborted: %s", st.aborted)
            return st, None
        return st, (st.queue.popleft() if st.queue else None)

    def _launch(self, st: _DirectState) -> None:
        values = dict(zip(self.real_closure, st.closure))
        st.kernel = self._embed(self.kernel, self.sequent, values)
        for i, formula in enumerate(self.sequent.antecedent):
            st.copies[i] = {"": self._embed(self.solutions[i], _solution_sequent(formula), values)}

    @staticmethod
    def _embed(machine: Machine, s: Sequent, values: Dict[str, str]) -> _Embedded:
        embedded = _Embedded(machine.start(), [], initial_state(s))
        for var in free_vars(s):
            lm = bottom("#" + values.get(var, "0"))
            embedded.position = check_move(embedded.position, lm).state
            embedded.run.append(lm)
        return embedded

    def _feed(self, st: _DirectState, target: _Embedded, lm: LabMove, who: str) -> bool:
        verdict = check_move(target.position, lm)
        if isinstance(verdict, Illegal):
            st.aborted = f"{who}: {verdict.reason}"
            return False
        target.position = verdict.state
        target.run.append(lm)
        st.internal_moves += 1
        return True

    def _round(self, st: _DirectState) -> bool:
        """One step of every embedded machine; False once nothing moves or changes."""
        busy = False
        kernel = st.kernel
        state, move = self.kernel.step(kernel.state, tuple(kernel.run))
        busy |= state != kernel.state
        kernel.state = state
        if move is not None:
            busy = True
            if not self._feed(st, kernel, top(move), "K"):
                return False
            self._route(st, move)
            if st.aborted:
                return False
        for i in sorted(st.copies):
            for w in sorted(st.copies[i]):
                copy = st.copies[i].get(w)
                if copy is None:
                    continue
                state, move = self.solutions[i].step(copy.state, tuple(copy.run))
                busy |= state != copy.state
                copy.state = state
                if move is None:
                    continue
                busy = True
                if not self._feed(st, copy, top(move), f"N{i}[{w}]"):
                    return False
                if not self._feed(st, kernel, bottom(f"0.{i}.{w}.{move}"), "K"):
                    return False
        return busy

    def _route(self, st: _DirectState, move: str) -> None:
        component = classify(move, self.bare)
        if component[0] == "succ":
            st.queue.append(move if self.bare else move[2:])
        elif component[0] == "rep":
            _, i, w = component
            parent = st.copies[i].pop(w)
            st.copies[i][w + "0"] = parent
            st.copies[i][w + "1"] = _Embedded(parent.state, list(parent.run), parent.position)
        else:
            _, i, u = component
            beta = move[len(f"0.{i}.{u}."):]
            for w in sorted(st.copies[i]):
                if w.startswith(u) and not self._feed(st, st.copies[i][w], bottom(beta), f"N{i}[{w}]"):
                    return


# ------------------------------------------------------------------- recomputation


@dataclass(frozen=True)
class HistoryEntry:
    """One move of the global history: who made it and how long it is, never what it is.

    Environment entries point at the real run; K's entries name the component they touch.
    """
    author: Author
    size: int
    component: Optional[Tuple] = None
    run_index: Optional[int] = None


@dataclass(frozen=True)
class Sketch:
    """A machine's state with the count and size of the moves it has made."""
    state: Any
    moves_made: int = 0
    output_length: int = 0
    component: Optional[Tuple] = None


@dataclass
class RecomputeAudit:
    restarts: int = 0
    fetch_calls: int = 0
    replays: int = 0
    max_depth: int = 0
    max_index: int = 0
    index_checks: int = 0
    retained_strings: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


class LazyRunView(SequenceABC):
    """A machine's run as seen from the history, materialized item by item on access."""

    def __init__(self, mediator: "RecomputeMediator", g: Author, limit: int):
        self._mediator = mediator
        self._g = g
        self._limit = limit
        history = mediator.history
        self._positions = [p for p in range(limit) if mediator.relevant(g, history[p])]
        self._cache: Dict[int, LabMove] = {}

    def __len__(self) -> int:
        return len(self._positions)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return tuple(self[j] for j in range(*k.indices(len(self))))
        if k < 0:
            k += len(self)
        if not 0 <= k < len(self):
            raise IndexError(k)
        if k not in self._cache:
            self._cache[k] = self._mediator.materialize(self._g, self._positions[k], self._limit)
        return self._cache[k]


def _move_text_in(value: Any, seen: Set[int]) -> int:
    """Labmoves and move-shaped strings reachable from a machine state."""
    if isinstance(value, LabMove):
        return 1
    if isinstance(value, str):
        return int(any(mark in value for mark in "#.:"))
    if value is None or isinstance(value, (bool, int, float)) or id(value) in seen:
        return 0
    seen.add(id(value))
    if isinstance(value, LazyRunView):
        return len(value._cache)
    if isinstance(value, (Machine, RecomputeMediator)):
        return 0
    if is_dataclass(value):
        return sum(_move_text_in(getattr(value, f.name), seen) for f in fields(value))
    if isinstance(value, dict):
        return sum(_move_text_in(k, seen) + _move_text_in(v, seen) for k, v in value.items())
    if isinstance(value, (tuple, list, set, frozenset, deque)):
        return sum(_move_text_in(item, seen) for item in value)
    if hasattr(value, "__dict__"):
        return _move_text_in(vars(value), seen)
    return 0


class RecomputeMediator:
    """The state of a recomputing composite: history, sketches and the audit counters."""

    def __init__(self, kernel: Machine, s: Sequent, solutions: Sequence[Machine],
                 bound: Optional[int], max_rounds: int, replay_cap: int):
        self.kernel = kernel
        self.solutions = tuple(solutions)
        self.bare = not s.antecedent
        self.bound = bound
        self.max_rounds = max_rounds
        self.replay_cap = replay_cap
        self.history: List[HistoryEntry] = []
        self.sketches: Dict[Author, Sketch] = {}
        self.fresh = True
        self.real_run: Sequence[LabMove] = ()
        self.audit = RecomputeAudit()
        self.aborted: Optional[str] = None
        self._depth = 0

    # -- history queries

    def own(self, g: Author, entry: HistoryEntry) -> bool:
        if g == KERNEL or entry.author in (KERNEL, ENVIRONMENT):
            return entry.author == g
        return entry.author[0] == g[0] and g[1].startswith(entry.author[1])

    def relevant(self, g: Author, entry: HistoryEntry) -> bool:
        if g == KERNEL or self.own(g, entry):
            return True
        component = entry.component
        return (entry.author == KERNEL and component[0] == "ante"
                and component[1] == g[0] and g[1].startswith(component[2]))

    def index(self, g: Author, m: int) -> int:
        """Position of g's (m+1)-th own entry, or the history length when there is none."""
        count = 0
        for p, entry in enumerate(self.history):
            if self.own(g, entry):
                if count == m:
                    return p
                count += 1
        return len(self.history)

    def own_count(self, g: Author) -> int:
        return sum(1 for entry in self.history if self.own(g, entry))

    def players(self) -> List[Author]:
        live = {i: {""} for i in range(len(self.solutions))}
        for entry in self.history:
            if entry.author == KERNEL and entry.component[0] == "rep":
                _, i, w = entry.component
                if w in live[i]:
                    live[i] -= {w}
                    live[i] |= {w + "0", w + "1"}
        return [KERNEL] + [(i, w) for i in sorted(live) for w in sorted(live[i])]

    def machine(self, g: Author) -> Machine:
        return self.kernel if g == KERNEL else self.solutions[g[0]]

    def initial_sketch(self, g: Author) -> Sketch:
        return Sketch(self.machine(g).start())

    # -- replay

    def materialize(self, g: Author, p: int, limit: int) -> LabMove:
        """History entry ``p`` as a labmove of g's run."""
        entry = self.history[p]
        if entry.author == ENVIRONMENT:
            move = self.real_run[entry.run_index].move
            return bottom(move if self.bare else f"1.{move}")
        ordinal = sum(1 for q in range(p) if self.own(entry.author, self.history[q]))
        text = self.fetch_move(entry.author, ordinal, caller=limit)
        if g == KERNEL:
            if entry.author == KERNEL:
                return top(text)
            i, v = entry.author
            return bottom(f"0.{i}.{v}.{text}")
        if entry.author == KERNEL:
            _, i, u = entry.component
            return bottom(text[len(f"0.{i}.{u}."):])
        return top(text)

    def update_sketch(self, g: Author, sk: Sketch, bound: Optional[int] = None) -> Tuple[Sketch, Optional[str]]:
        """One step of g, seeing the history up to its next recorded move."""
        limit = self.index(g, sk.moves_made)
        self.audit.index_checks += 1
        self.audit.max_index = max(self.audit.max_index, limit)
        if bound is not None and limit > bound:
            raise RecomputeInvariantError(f"update of {g} at index {limit} above {bound}")
        view = LazyRunView(self, g, limit)
        state, move = self.machine(g).step(sk.state, view)
        if move is None:
            return Sketch(state, sk.moves_made, 0, None), None
        component = classify(move, self.bare) if g == KERNEL else None
        return Sketch(state, sk.moves_made + 1, len(move), component), move

    def fetch_move(self, g: Author, x: int, caller: Optional[int] = None) -> str:
        """Replay g from scratch until it makes its (x+1)-th move."""
        target = self.index(g, x)
        self.audit.index_checks += 1
        if caller is not None and target >= caller:
            raise RecomputeInvariantError(f"fetch of {g} move {x} at index {target} not below {caller}")
        self.audit.fetch_calls += 1
        self._depth += 1
        self.audit.max_depth = max(self.audit.max_depth, self._depth)
        if self.bound is not None and self._depth > self.bound:
            raise RecomputeInvariantError(f"fetch nesting {self._depth} exceeds {self.bound}")
        try:
            sk = self.initial_sketch(g)
            for _ in range(self.replay_cap):
                self.audit.replays += 1
                new, move = self.update_sketch(g, sk, bound=target)
                if move is not None and sk.moves_made == x:
                    return move
                sk = new
            raise ReplayDivergence(f"{g} did not make move {x + 1} within {self.replay_cap} steps")
        finally:
            self._depth -= 1

    def fetch_symbol(self, g: Author, x: int, y: int) -> str:
        """The y-th symbol (from 1) of g's (x+1)-th move."""
        text = self.fetch_move(g, x)
        if not 1 <= y <= len(text):
            raise ReplayDivergence(f"{g} move {x + 1} has no symbol {y}")
        return text[y - 1]

    # -- the per-tick driver

    def _record(self, entry: HistoryEntry) -> None:
        self.history.append(entry)
        self.audit.restarts += 1
        self.fresh = True
        if self.bound is not None and len(self.history) > self.bound:
            raise RecomputeInvariantError(f"history grew past {self.bound} entries")
        LOGGER.debug("history entry %d by %s, restarting", len(self.history), entry.author)

    def make_history(self, run: Sequence[LabMove]) -> Optional[str]:
        """Advance the global simulation until it has a real move to make or goes quiet."""
        self.real_run = run
        for _ in range(self.max_rounds):
            if self.aborted:
                return None
            if self.fresh:
                self.sketches = {g: self.initial_sketch(g) for g in self.players()}
                self.fresh = False
            env_moves = [k for k, lm in enumerate(run) if lm.player is Player.BOTTOM]
            seen = sum(1 for entry in self.history if entry.author == ENVIRONMENT)
            if len(env_moves) > seen:
                k = env_moves[seen]
                self._record(HistoryEntry(ENVIRONMENT, len(run[k].move), run_index=k))
                continue
            outcome, real = self._round()
            self.audit.retained_strings = self.stored_move_text()
            if outcome == "emit":
                return real
            if outcome == "idle":
                return None
        return None

    def _round(self) -> Tuple[str, Optional[str]]:
        busy = False
        for g in self.players():
            sk = self.sketches[g]
            new, move = self.update_sketch(g, sk)
            busy |= move is not None or new.state != sk.state
            self.sketches[g] = new
            if move is None:
                continue
            if new.moves_made <= self.own_count(g):
                entry = self.history[self.index(g, sk.moves_made)]
                if entry.size != len(move) or (g == KERNEL and entry.component != new.component):
                    raise ReplayDivergence(f"{g} replayed move {new.moves_made} differently")
                continue
            if g != KERNEL:
                self._record(HistoryEntry(g, len(move)))
                return "restart", None
            if new.component is None:
                self.aborted = f"K made the unaddressable move {move!r}"
                LOGGER.warning("composition aborted: %s", self.aborted)
                return "idle", None
            if new.component[0] != "succ":
                self._record(HistoryEntry(KERNEL, len(move), new.component))
                return "restart", None
            skip = 0 if self.bare else 2
            x = sk.moves_made
            real = "".join(self.fetch_symbol(KERNEL, x, y) for y in range(skip + 1, len(move) + 1))
            if real != move[skip:]:
                raise ReplayDivergence(f"K's move {x + 1} changed between replays")
            self._record(HistoryEntry(KERNEL, len(move), new.component))
            return "emit", real
        return ("busy" if busy else "idle"), None

    def stored_move_text(self) -> int:
        """Values in the history and sketches that hold move symbols rather than sizes, authors
        and addresses."""
        def address(text) -> bool:
            return isinstance(text, str) and set(text) <= {"0", "1"}

        count = 0
        for entry in self.history:
            if isinstance(entry.author, tuple):
                count += not address(entry.author[1])
            if entry.component is not None:
                count += sum(1 for part in entry.component[1:]
                             if isinstance(part, str) and not address(part))
        seen: Set[int] = set()
        for sk in self.sketches.values():
            count += sum(1 for value in (sk.moves_made, sk.output_length)
                         if not isinstance(value, int))
            count += _move_text_in(sk.state, seen)
        return count

    def scratch_size(self) -> int:
        size = len(self.history) + len(self.sketches)
        for g, sk in self.sketches.items():
            size += self.machine(g).scratch_size(sk.state)
        return size


class RecomputeComposition(Machine):
    name = "compose-recompute"

    def __init__(self, kernel: Machine, s: Sequent, solutions: Sequence[Machine],
                 max_rounds: int = 10000, replay_cap: int = 10000):
        if free_vars(s):
            raise ValueError("recomputing composition needs a sequent without free variables")
        if len(solutions) != len(s.antecedent):
            raise ValueError(
                f"{len(s.antecedent)} antecedent members need as many solutions, got {len(solutions)}"
            )
        self.kernel = kernel
        self.sequent = s
        self.solutions = tuple(solutions)
        self.max_rounds = max_rounds
        self.replay_cap = replay_cap
        r = getattr(kernel, "replication_bound", None)
        self.bound = None if r is None else composition_bound(s, r)

    def start(self) -> RecomputeMediator:
        return RecomputeMediator(self.kernel, self.sequent, self.solutions, self.bound,
                                 self.max_rounds, self.replay_cap)

    def step(self, mediator: RecomputeMediator, run: Sequence[LabMove]):
        return mediator, mediator.make_history(run)

    def scratch_size(self, mediator: RecomputeMediator) -> int:
        return mediator.scratch_size()

    def flags(self, mediator: RecomputeMediator) -> Dict[str, Any]:
        out: Dict[str, Any] = {f"audit.{k}": v for k, v in mediator.audit.to_dict().items()}
        out["history"] = len(mediator.history)
        if self.bound is not None:
            out["bound"] = self.bound
        if mediator.aborted:
            out["aborted"] = mediator.aborted
        return out


def compose(kernel: Machine, s: Sequent, solutions: Sequence[Machine], recompute: bool = False) -> Machine:
    if recompute:
        return RecomputeComposition(kernel, s, solutions)
    return DirectComposition(kernel, s, solutions)
