"""
Golden Corpus

Named sequents with their expected verdicts, plus the hand proofs, scripts and
solutions that exercise them end to end.

Items:
- provable items: the prover finds a proof, the checker accepts it (and the hand proof)
- unprovable items: the prover says Unprovable and the counterstrategy refutes a
  do-nothing machine
- census items: the number of legal runs and how many of them ⊤ wins
- compose items: both composition modes produce the expected real run

Usage:
    gameproof corpus list
    gameproof corpus run --jobs 4
"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Dict, Final, List, Optional, Sequence, Tuple

from ..calculus import Proof, Unprovable, check_proof, proof_from_json, prove
from ..composition import compose
from ..counterstrategy import refute
from ..errors import GameproofError
from ..extraction import extract
from ..runtime import (
    DoNothing,
    FunctionSolution,
    Machine,
    ScriptedEnvironment,
    load_solution,
    numeral,
    play,
)
from ..semantics import Interpretation, initial_state, legal_runs, parse_run, winner_of_run
from ..syntax import Player, Sequent, parse_sequent

LOGGER: Final = logging.getLogger(__name__)

CUBE: Final = "Ax: x^3 = x * x * x, !x: !y: ?z: z = x * y => !x: ?y: y = x^3"


@dataclass
class CorpusItem:
    """Definition of a golden item."""

    name: str
    description: str
    sequent: str
    expect: str  # provable | unprovable | census | compose
    proof: Optional[str] = None  # resource file name
    script: Tuple[Tuple[int, str], ...] = ()
    expected_run: str = ""  # labmove lines
    runs: Optional[int] = None
    top_wins: Optional[int] = None
    solutions: Tuple[str, ...] = ()

    @property
    def parsed(self) -> Sequent:
        return parse_sequent(self.sequent)

    def hand_proof(self) -> Optional[Proof]:
        if self.proof is None:
            return None
        return load_resource_proof(self.proof)


ITEMS: Final = {
    "cube": CorpusItem(
        name="cube",
        description="Cube from multiplication and the cube law; hand proof replayed on a script",
        sequent=CUBE,
        expect="provable",
        proof="cube.json",
        script=((0, "1.#10"), (3, "0.1.0.#100"), (5, "0.1.1.#1000")),
        expected_run=(
            "B 1.#10\nT 0.1.:\nT 0.1.0.#10\nT 0.1.0.#10\nB 0.1.0.#100\n"
            "T 0.1.1.#100\nT 0.1.1.#10\nB 0.1.1.#1000\nT 1.#1000\n"
        ),
    ),
    "choice-copycat": CorpusItem(
        name="choice-copycat",
        description="⊓x⊔y(p(x)→p(y)): answer the environment's constant with itself",
        sequent="=> !x: ?y: (p(x) -> p(y))",
        expect="provable",
        proof="copycat.json",
    ),
    "blind-to-choice": CorpusItem(
        name="blind-to-choice",
        description="∀xp(x) → ⊓xp(x)",
        sequent="=> (Ax: p(x)) -> !x: p(x)",
        expect="provable",
    ),
    "replicated-choice": CorpusItem(
        name="replicated-choice",
        description="p⊓q ∘– (p⊓q)∧(p⊓q): one replication covers both conjuncts",
        sequent="p & q => (p & q) /\\ (p & q)",
        expect="provable",
    ),
    "replicated-exists": CorpusItem(
        name="replicated-exists",
        description="⊔x⊓y p(x,y) ∘– ⊔x(⊓y p(x,y) ∧ ⊓y p(x,y))",
        sequent="?x: !y: p(x, y) => ?x: ((!y: p(x, y)) /\\ (!y: p(x, y)))",
        expect="provable",
    ),
    "elementary-valid": CorpusItem(
        name="elementary-valid",
        description="A classically valid elementary sequent",
        sequent="=> (Ax: p(x)) -> p(0)",
        expect="provable",
    ),
    "choice-to-blind": CorpusItem(
        name="choice-to-blind",
        description="⊓xp(x) → ∀xp(x)",
        sequent="=> (!x: p(x)) -> Ax: p(x)",
        expect="unprovable",
    ),
    "swapped-choice": CorpusItem(
        name="swapped-choice",
        description="⊔y⊓x(p(x)→p(y)): the choice for y cannot wait for x",
        sequent="=> ?y: !x: (p(x) -> p(y))",
        expect="unprovable",
    ),
    "unreplicated-choice": CorpusItem(
        name="unreplicated-choice",
        description="p⊓q → (p⊓q)∧(p⊓q): a single copy cannot serve two conjuncts",
        sequent="=> (p & q) -> (p & q) /\\ (p & q)",
        expect="unprovable",
    ),
    "unreplicated-exists": CorpusItem(
        name="unreplicated-exists",
        description="⊔x⊓y p(x,y) → ⊔x(⊓y p(x,y) ∧ ⊓y p(x,y))",
        sequent="=> (?x: !y: p(x, y)) -> ?x: ((!y: p(x, y)) /\\ (!y: p(x, y)))",
        expect="unprovable",
    ),
    "function-value": CorpusItem(
        name="function-value",
        description="⊓x⊔y(y=f(x)): no variable or constant names f(x)",
        sequent="=> !x: ?y: y = f(x)",
        expect="unprovable",
    ),
    "elementary-invalid": CorpusItem(
        name="elementary-invalid",
        description="A classically invalid elementary sequent",
        sequent="=> p(0) -> Ax: p(x)",
        expect="unprovable",
    ),
    "legal-run-census": CorpusItem(
        name="legal-run-census",
        description="(0=0⊓0=1)→(10=11⊓10=10) has 13 legal runs, 10 of them won by ⊤",
        sequent="=> (0 = 0 & 0 = 1) -> (10 = 11 & 10 = 10)",
        expect="census",
        runs=13,
        top_wins=10,
    ),
    "cube-composition": CorpusItem(
        name="cube-composition",
        description="Cube solved by composing the cube proof with a multiplication table",
        sequent=CUBE,
        expect="compose",
        proof="cube.json",
        script=((0, "#10"),),
        expected_run="B #10\nT #1000\n",
        solutions=("do-nothing", "mul-table"),
    ),
}


def get_item(name: str) -> CorpusItem:
    """Get a corpus item by name."""
    if name not in ITEMS:
        available = ", ".join(ITEMS.keys())
        raise ValueError(f"Unknown corpus item: {name}. Available: {available}")
    return ITEMS[name]


def list_items() -> List[str]:
    return list(ITEMS.keys())


def get_item_descriptions() -> Dict[str, str]:
    return {name: item.description for name, item in ITEMS.items()}


def load_resource_proof(filename: str) -> Proof:
    text = resources.files(__name__).joinpath(filename).read_text(encoding="utf-8")
    return proof_from_json(json.loads(text))


def multiplication_table(bits: int = 4) -> FunctionSolution:
    """Multiplication on the universe of ``bits``-bit numbers, silent on overflow."""
    size = 2 ** bits
    table = {
        (numeral(a), numeral(b)): numeral(a * b)
        for a in range(size) for b in range(size) if a * b < size
    }
    return FunctionSolution.from_table(2, table, "mul-table")


def solution_for(name: str) -> Machine:
    if name == "do-nothing":
        return DoNothing()
    if name == "mul-table":
        return multiplication_table()
    return load_solution(name)


# ------------------------------------------------------------------------ running


@dataclass
class CorpusResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def _check(item: CorpusItem) -> Tuple[bool, str]:
    s = item.parsed
    interp = Interpretation.standard()
    if item.expect == "provable":
        found = prove(s)
        if not isinstance(found, Proof):
            return False, f"prover returned {type(found).__name__}"
        bad = check_proof(found)
        if bad is not None:
            return False, f"found proof fails at step {bad[0]}: {bad[1]}"
        hand = item.hand_proof()
        if hand is not None:
            bad = check_proof(hand)
            if bad is not None:
                return False, f"hand proof fails at step {bad[0]}: {bad[1]}"
        detail = f"proof of {len(found)} steps"
        if item.script:
            record = play(extract(hand or found), ScriptedEnvironment(item.script), s, interp)
            if record.winner is not Player.TOP:
                return False, f"extracted strategy lost: {record.run}"
            if item.expected_run and record.run != parse_run(item.expected_run):
                return False, "extracted strategy produced a different run"
            detail += f", scripted play won in {len(record.run)} moves"
        return True, detail
    if item.expect == "unprovable":
        verdict = prove(s)
        if not isinstance(verdict, Unprovable):
            return False, f"prover returned {type(verdict).__name__}"
        refutation = refute(s, DoNothing())
        return refutation.verify(), f"refuted in {len(refutation.run)} moves"
    if item.expect == "census":
        start = initial_state(s)
        runs = legal_runs(start)
        wins = sum(1 for run in runs if winner_of_run(start, run, interp) is Player.TOP)
        ok = len(runs) == item.runs and wins == item.top_wins
        return ok, f"{len(runs)} runs, {wins} won by ⊤"
    if item.expect == "compose":
        kernel = extract(item.hand_proof())
        real = Sequent((), s.succedent)
        runs = []
        for recompute in (False, True):
            machine = compose(kernel, s, [solution_for(n) for n in item.solutions], recompute)
            record = play(machine, ScriptedEnvironment(item.script), real, interp)
            if record.winner is not Player.TOP:
                return False, f"{machine.name} lost: {record.run}"
            runs.append(record.run)
        ok = runs[0] == runs[1] == parse_run(item.expected_run)
        return ok, "direct and recompute runs agree" if ok else "composition runs differ"
    raise ValueError(f"Unknown expectation: {item.expect}")


def check_item(name: str) -> CorpusResult:
    item = get_item(name)
    started = time.perf_counter()
    try:
        passed, detail = _check(item)
    except GameproofError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - started
    LOGGER.info("corpus item %s: %s (%s)", name, "ok" if passed else "FAILED", detail)
    return CorpusResult(name, passed, detail, seconds)


def run_corpus(jobs: int = 1, names: Optional[Sequence[str]] = None) -> List[CorpusResult]:
    """Check every named item (all of them by default), in parallel when ``jobs > 1``."""
    names = list(names or ITEMS)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(check_item, names))
    return [check_item(name) for name in names]
