"""
Reactive machines, environment agents and the play scheduler.

A machine sees the run so far from its own side (its moves are ⊤'s) and on each step
either waits or emits one complete move. Machine states are immutable values, so an
embedded simulation can be forked by copying a reference. Time is counted in scheduler
ticks and space in the scratch size each machine declares for its state.
"""

import inspect
import json
import logging
import random
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Final, List, Optional, Sequence, Tuple, Union

from .config import NUMERAL_RE, PlayConfig
from .errors import ScriptError
from .semantics import (
    GameState,
    Illegal,
    Interpretation,
    LabMove,
    Run,
    bottom,
    check_move,
    initial_state,
    legal_moves,
    top,
    wn,
)
from .syntax import Player, Sequent, numeral_size, pretty_sequent

LOGGER: Final = logging.getLogger(__name__)

_HASH_RE: Final = re.compile(r"#([01]*)")


def magnitude(move: str) -> int:
    """Size of the largest constant ``c`` with ``#c`` in the move, 0 without ``#``."""
    sizes = []
    for match in _HASH_RE.finditer(move):
        numeral = match.group(1)
        if not NUMERAL_RE.fullmatch(numeral):
            raise ScriptError(f"Malformed numeral after # in {move!r}")
        sizes.append(numeral_size(numeral))
    return max(sizes, default=0)


def numeral(n: int) -> str:
    return format(n, "b")


# ------------------------------------------------------------------------ machines


class Machine(ABC):
    """A deterministic reactive strategy."""

    name = "machine"

    def start(self) -> Any:
        return None

    @abstractmethod
    def step(self, state: Any, run: Sequence[LabMove]) -> Tuple[Any, Optional[str]]:
        """Advance one step on the observed run; return the new state and a move or None."""

    def scratch_size(self, state: Any) -> int:
        return 0

    def flags(self, state: Any) -> Dict[str, Any]:
        return {}


class DoNothing(Machine):
    name = "do-nothing"

    def step(self, state, run):
        return state, None


class FunctionSolution(Machine):
    """Solves ⊓x1...⊓xn ⊔y(y = f(x1,...,xn)): reads n constants, answers one.

    ``fn`` maps numeral strings to a numeral string, or None when it has no answer.
    """

    def __init__(self, arity: int, fn: Callable[..., Optional[str]], name: str = "function"):
        self.arity = arity
        self.fn = fn
        self.name = name

    @classmethod
    def from_table(cls, arity: int, table: Dict[Tuple[str, ...], str], name: str = "table"):
        return cls(arity, lambda *args: table.get(tuple(args)), name)

    def start(self) -> bool:
        return False

    def step(self, moved: bool, run):
        if moved:
            return moved, None
        inputs = [lm.move[1:] for lm in run if lm.player is Player.BOTTOM and lm.move.startswith("#")]
        if len(inputs) < self.arity:
            return moved, None
        answer = self.fn(*inputs[: self.arity])
        if answer is None:
            return moved, None
        return True, f"#{answer}"


BUILTIN_SOLUTIONS: Final = {
    "double": (1, lambda a: numeral(2 * int(a, 2))),
    "succ": (1, lambda a: numeral(int(a, 2) + 1)),
    "cube": (1, lambda a: numeral(int(a, 2) ** 3)),
    "add": (2, lambda a, b: numeral(int(a, 2) + int(b, 2))),
    "mul": (2, lambda a, b: numeral(int(a, 2) * int(b, 2))),
}


def get_solution(name: str) -> FunctionSolution:
    if name not in BUILTIN_SOLUTIONS:
        available = ", ".join(sorted(BUILTIN_SOLUTIONS))
        raise ValueError(f"Unknown solution: {name}. Available: {available}")
    arity, fn = BUILTIN_SOLUTIONS[name]
    return FunctionSolution(arity, fn, name)


def load_solution(spec: str) -> FunctionSolution:
    """A builtin solution name, or a JSON table ``{"arity": n, "rows": [[in..., out], ...]}``."""
    if spec in BUILTIN_SOLUTIONS:
        return get_solution(spec)
    path = Path(spec)
    if not path.exists():
        return get_solution(spec)
    try:
        data = json.loads(path.read_text())
        arity = int(data["arity"])
        table = {tuple(row[:-1]): row[-1] for row in data["rows"]}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ScriptError(f"{spec}: malformed solution table ({exc})") from exc
    for key, value in table.items():
        if len(key) != arity or not all(NUMERAL_RE.fullmatch(c) for c in key + (value,)):
            raise ScriptError(f"{spec}: bad row {list(key) + [value]}")
    return FunctionSolution.from_table(arity, table, path.stem)


class ReactiveScript(Machine):
    """Emits its moves in order, each once enough adversary moves have been seen."""

    name = "script"

    def __init__(self, rules: Sequence[Tuple[int, str]]):
        self.rules = tuple(rules)
        self.replication_bound = sum(1 for _, move in self.rules if ":" in move)

    def start(self) -> int:
        return 0

    def step(self, index: int, run):
        if index >= len(self.rules):
            return index, None
        threshold, move = self.rules[index]
        seen = sum(1 for lm in run if lm.player is Player.BOTTOM)
        if seen < threshold:
            return index, None
        return index + 1, move


# -------------------------------------------------------------------- environments


class Environment(ABC):
    """The ⊥ seat: may inject any number of moves per tick."""

    name = "environment"

    def start(self) -> Any:
        return None

    @abstractmethod
    def step(
        self, state: Any, position: GameState, run: Run, tick: int
    ) -> Tuple[Any, List[str]]:
        """Moves to append at this tick."""

    def exhausted(self, state: Any) -> bool:
        return True


class ScriptedEnvironment(Environment):
    name = "scripted"

    def __init__(self, script: Sequence[Tuple[int, str]]):
        self.script = tuple(sorted(script, key=lambda item: item[0]))

    def start(self) -> int:
        return 0

    def step(self, index: int, position, run, tick):
        moves = []
        while index < len(self.script) and self.script[index][0] <= tick:
            moves.append(self.script[index][1])
            index += 1
        return index, moves

    def exhausted(self, index: int) -> bool:
        return index >= len(self.script)


def load_script(text: str) -> List[Tuple[int, str]]:
    """Parse ``tick N`` / ``move <string>`` lines into a timed script."""
    tick = 0
    script = []
    for number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "tick" and rest.strip().isdigit():
            tick = int(rest)
        elif keyword == "move" and rest.strip():
            script.append((tick, rest.strip()))
        else:
            raise ScriptError(f"line {number}: expected 'tick N' or 'move <string>', got {line!r}")
    return script


@dataclass
class _RandomState:
    rng: random.Random
    moves: int = 0
    stuck: bool = False


class RandomEnvironment(Environment):
    """Seeded random legal moves from a constant pool."""

    name = "random"

    def __init__(self, seed: int, pool: Sequence[str], prob: float = 0.5,
                 max_moves: int = 8, cap: int = 2):
        self.seed = seed
        self.pool = tuple(pool)
        self.prob = prob
        self.max_moves = max_moves
        self.cap = cap

    def start(self) -> _RandomState:
        return _RandomState(random.Random(self.seed))

    def step(self, state: _RandomState, position, run, tick):
        if state.moves >= self.max_moves:
            return state, []
        options = legal_moves(position, Player.BOTTOM, self.pool, self.cap)
        state.stuck = not options
        if not options or state.rng.random() >= self.prob:
            return state, []
        state.moves += 1
        return state, [state.rng.choice(sorted(options))]

    def exhausted(self, state: _RandomState) -> bool:
        return state.moves >= self.max_moves or state.stuck


class InteractiveEnvironment(Environment):
    """Asks a callback for moves; the callback returns None to quit."""

    name = "interactive"

    def __init__(self, callback: Callable[[GameState, Run], Optional[List[str]]]):
        self.callback = callback

    def start(self) -> bool:
        return False

    def step(self, quit: bool, position, run, tick):
        if quit:
            return quit, []
        moves = self.callback(position, run)
        if moves is None:
            return True, []
        return False, list(moves)

    def exhausted(self, quit: bool) -> bool:
        return quit


# ------------------------------------------------------------------------- meters


@dataclass(frozen=True)
class MoveMeter:
    tick: int
    labmove: LabMove
    magnitude: int
    background: int
    timecost: int


@dataclass
class Meters:
    amplitude: int = 0
    space: int = 0
    time: int = 0
    moves: List[MoveMeter] = field(default_factory=list)
    space_samples: List[Tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"amplitude": self.amplitude, "space": self.space, "time": self.time}


@dataclass
class RunRecord:
    sequent: Sequent
    run: Run
    ticks: Tuple[int, ...]
    final: GameState
    meters: Meters
    flags: Dict[str, Any]
    winner: Optional[Player]
    illegal: Optional[Illegal] = None
    ticks_used: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sequent": pretty_sequent(self.sequent),
            "run": [lm.to_line() for lm in self.run],
            "ticks": list(self.ticks),
            "final": self.final.describe(),
            "meters": self.meters.to_dict(),
            "flags": {key: value for key, value in self.flags.items()},
            "winner": self.winner.value if self.winner else None,
            "illegal": None if self.illegal is None else {
                "player": self.illegal.player.value,
                "reason": self.illegal.reason,
                "index": self.illegal.index,
            },
            "ticks_used": self.ticks_used,
        }


def play(
    machine: Machine,
    env: Environment,
    s: Sequent,
    interp: Optional[Interpretation] = None,
    config: PlayConfig = PlayConfig(),
) -> RunRecord:
    """Run ``machine`` against ``env`` on ``s``; the winner needs an interpretation."""
    position = initial_state(s)
    run: List[LabMove] = []
    stamps: List[int] = []
    meters = Meters()
    flags: Dict[str, Any] = {"rejected": []}
    illegal: Optional[Illegal] = None
    mstate, estate = machine.start(), env.start()
    background, last_env_tick, quiet, tick = 0, 0, 0, 0

    for tick in range(config.max_ticks):
        estate, moves = env.step(estate, position, tuple(run), tick)
        for move in moves:
            verdict = check_move(position, bottom(move))
            if isinstance(verdict, Illegal):
                if config.clean_environment:
                    LOGGER.warning("rejecting illegal environment move %r: %s", move, verdict.reason)
                    flags["rejected"].append(move)
                    continue
                illegal = Illegal(Player.BOTTOM, verdict.reason, len(run))
                run.append(bottom(move))
                stamps.append(tick)
                break
            position = verdict.state
            run.append(bottom(move))
            stamps.append(tick)
            background = max(background, magnitude(move))
            last_env_tick = tick
        if illegal:
            break

        mstate, move = machine.step(mstate, tuple(run))
        scratch = machine.scratch_size(mstate)
        meters.space = max(meters.space, scratch)
        meters.space_samples.append((background, scratch))
        if move is not None:
            lm = top(move)
            verdict = check_move(position, lm)
            run.append(lm)
            stamps.append(tick)
            if isinstance(verdict, Illegal):
                illegal = Illegal(Player.TOP, verdict.reason, len(run) - 1)
                break
            position = verdict.state
            size = magnitude(move)
            timecost = tick - last_env_tick
            meters.moves.append(MoveMeter(tick, lm, size, background, timecost))
            meters.amplitude = max(meters.amplitude, size)
            meters.time = max(meters.time, timecost)

        idle = not moves and move is None
        quiet = quiet + 1 if idle and env.exhausted(estate) else 0
        if quiet >= config.quiet_ticks:
            break

    flags.update(machine.flags(mstate))
    if illegal is not None:
        winner: Optional[Player] = illegal.player.opponent
        LOGGER.info("illegal move by %s: %s", illegal.player.glyph, illegal.reason)
    else:
        winner = wn(position, interp) if interp is not None else None
    return RunRecord(
        sequent=s,
        run=tuple(run),
        ticks=tuple(stamps),
        final=position,
        meters=meters,
        flags=flags,
        winner=winner,
        illegal=illegal,
        ticks_used=tick + 1,
    )


# ---------------------------------------------------------------------- monitors


def check_amplitude(rec: RunRecord, h: Callable[[int], int]) -> bool:
    """Every ⊤ move's magnitude is within ``h`` of its background."""
    if rec.illegal is not None and rec.illegal.player is Player.BOTTOM:
        return True
    return all(m.magnitude <= h(m.background) for m in rec.meters.moves)


@dataclass(frozen=True)
class MonitorReport:
    replications: int
    within_cap: Optional[bool]
    unfocused: Tuple[str, ...]
    providence: str = "automatic: moves are emitted whole"
    not_modeled: Tuple[str, ...] = ("run-tape head revisits", "single work tape")

    @property
    def focused(self) -> bool:
        return not self.unfocused


def well_behaved_monitor(rec: RunRecord, max_replications: Optional[int] = None) -> MonitorReport:
    """Count ⊤'s replications and list its unfocused antecedent moves."""
    position = initial_state(rec.sequent)
    replications = 0
    unfocused: List[str] = []
    for lm in rec.run:
        if (lm.player is Player.TOP and isinstance(position, GameState)
                and not position.in_closure and not position.bare and lm.move.startswith("0.")):
            member, _, rest = lm.move[2:].partition(".")
            if rest.startswith(":"):
                replications += 1
            elif member.isdigit() and int(member) < len(position.antecedent):
                u = rest.partition(".")[0]
                if u not in position.antecedent[int(member)].addresses:
                    unfocused.append(lm.move)
        verdict = check_move(position, lm)
        if isinstance(verdict, Illegal):
            break
        position = verdict.state
    within = None if max_replications is None else replications <= max_replications
    return MonitorReport(replications, within, tuple(unfocused))


def unarify(h: Callable[..., int]) -> Callable[[int], int]:
    """``h'(l) = h(l, ..., l)``."""
    params = [
        p for p in inspect.signature(h).parameters.values()
        if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD) and p.default is p.empty
    ]
    arity = max(len(params), 1)
    if arity == 1:
        return h
    return lambda l: h(*([l] * arity))


Bound = Callable[..., int]


def tricomplexity(rec: RunRecord, bounds: Tuple[Bound, Bound, Bound]) -> bool:
    """Amplitude, space and time bounds at once, each read against the background."""
    amplitude, space, time = (unarify(h) for h in bounds)
    if rec.illegal is not None and rec.illegal.player is Player.BOTTOM:
        return True
    return (
        check_amplitude(rec, amplitude)
        and all(scratch <= space(ell) for ell, scratch in rec.meters.space_samples)
        and all(m.timecost <= time(m.background) for m in rec.meters.moves)
    )


Agent = Union[Machine, Environment]
