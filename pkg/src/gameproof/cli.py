#!/usr/bin/env python3
"""
gameproof - CLI Entry Point

Exit codes: 0 success, 1 semantic failure (unprovable, lost, refuted check),
2 undecided within budget, 3 usage or malformed input.
"""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.prompt import Prompt
from rich.table import Table
from rich.text import Text

from . import __version__
from .calculus import Proof, Unprovable, check_proof, dump_proof, load_proof, proof_to_json, prove
from .classical import Invalid, Valid, is_stable
from .composition import compose
from .config import (
    ClassicalBudget,
    EnvironmentKind,
    MachineKind,
    Mode,
    OracleConfig,
    PlayConfig,
    SearchBudget,
    parse_pool,
)
from .corpus import get_item_descriptions, run_corpus
from .counterstrategy import build_counterstrategy, counter_report, refute
from .errors import (
    ArityError,
    BudgetExceeded,
    FormulaSyntaxError,
    GameproofError,
    InterpretationError,
    ProofFormatError,
    ScriptError,
)
from .extraction import extract
from .report import ReportRenderer
from .runtime import (
    DoNothing,
    Environment,
    InteractiveEnvironment,
    Machine,
    RandomEnvironment,
    RunRecord,
    ScriptedEnvironment,
    check_amplitude,
    load_script,
    load_solution,
    magnitude,
    play,
    well_behaved_monitor,
)
from .semantics import (
    GameState,
    Illegal,
    Interpretation,
    Run,
    bottom,
    check_move,
    initial_state,
    legal_runs,
    show_run,
    winnable,
    winner_of_run,
)
from .syntax import (
    Player,
    Sequent,
    constants,
    elementarize_sequent,
    format_sequent,
    free_vars,
    native_magnitude,
    parse_sequent,
    pretty_formula,
    pretty_sequent,
)

console = Console()
err_console = Console(stderr=True)

OK, FAILED, UNDECIDED, USAGE = 0, 1, 2, 3

_INPUT_ERRORS = (FormulaSyntaxError, ArityError, ProofFormatError, ScriptError, InterpretationError)


class GameproofGroup(click.Group):
    """Click group whose usage errors exit with code 3."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as exc:
            exc.exit_code = USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = USAGE
            raise


def _fail(message: str, code: int) -> None:
    console.print(f"[red]Error: {escape(message)}[/red]")
    sys.exit(code)


def handle_errors(fn: Callable) -> Callable:
    """Map library exceptions onto exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BudgetExceeded as exc:
            _fail(str(exc), UNDECIDED)
        except _INPUT_ERRORS as exc:
            _fail(str(exc), USAGE)
        except GameproofError as exc:
            _fail(str(exc), FAILED)
        except ValueError as exc:
            _fail(str(exc), USAGE)
        except OSError as exc:
            _fail(str(exc), USAGE)

    return wrapper


def emit_json(data: Any) -> None:
    click.echo(json.dumps(data, indent=2, ensure_ascii=False))


def show_text(text: str, title: Optional[str] = None) -> None:
    body = Text(text.rstrip("\n"))
    console.print(Panel(body, title=title, border_style="blue") if title else body)


# ---------------------------------------------------------------- shared options


def budget_options(fn: Callable) -> Callable:
    options = [
        click.option("--depth", default=24, show_default=True, help="Proof search depth"),
        click.option("--replicate-cap", default=2, show_default=True,
                     help="Replications per search branch"),
        click.option("--steps", default=100_000, show_default=True,
                     help="Classical oracle step budget"),
        click.option("--max-domain", default=3, show_default=True,
                     help="Largest universe tried by the model finder"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def search_budget(depth: int, replicate_cap: int, steps: int, max_domain: int) -> SearchBudget:
    return SearchBudget(depth, replicate_cap, ClassicalBudget(steps, max_domain))


def interpretation_options(fn: Callable) -> Callable:
    fn = click.option("--bits", default=4, show_default=True,
                      help="Standard arithmetic on {0..2^bits-1} when no --interp is given")(fn)
    fn = click.option("--interp", "interp_path", type=click.Path(exists=True, dir_okay=False),
                      help="Interpretation JSON file")(fn)
    return fn


def interpretation(interp_path: Optional[str], bits: int) -> Interpretation:
    return Interpretation.load(interp_path) if interp_path else Interpretation.standard(bits)


def play_options(fn: Callable) -> Callable:
    options = [
        click.option("--env", "env_kind",
                     type=click.Choice([e.value for e in EnvironmentKind]),
                     help="Environment agent (default: scripted with --script, else random)"),
        click.option("--script", "script_path", type=click.Path(exists=True, dir_okay=False),
                     help="Environment script of 'tick N' / 'move S' lines"),
        click.option("--seed", default=0, show_default=True, help="Random environment seed"),
        click.option("--max-ticks", default=200, show_default=True, help="Scheduler tick budget"),
        click.option("--pool", default="0,1,10", show_default=True,
                     help="Constants the random environment draws from"),
        click.option("--clean", is_flag=True,
                     help="Reject illegal environment moves instead of scoring them"),
        click.option("--report", "report_path", type=click.Path(dir_okay=False),
                     help="Also write a text report"),
        click.option("--json", "as_json", is_flag=True, help="Print the run record as JSON"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def play_config(seed: int, max_ticks: int, pool: str, clean: bool) -> PlayConfig:
    return PlayConfig(max_ticks=max_ticks, seed=seed, pool=parse_pool(pool), clean_environment=clean)


def build_machine(kind: str, proof_path: Optional[str], solution: Optional[str]) -> Machine:
    kind = MachineKind(kind)
    if kind is MachineKind.PROOF:
        if not proof_path:
            raise click.UsageError("--machine proof needs --proof FILE")
        return extract(load_proof(proof_path))
    if kind is MachineKind.TABLE:
        if not solution:
            raise click.UsageError("--machine table needs --solution NAME|FILE")
        return load_solution(solution)
    return DoNothing()


def build_environment(
    kind: Optional[str],
    s: Sequent,
    script_path: Optional[str],
    config: PlayConfig,
    budget: SearchBudget = SearchBudget(),
) -> Environment:
    if kind is None:
        kind = EnvironmentKind.SCRIPTED.value if script_path else EnvironmentKind.RANDOM.value
    kind = EnvironmentKind(kind)
    if kind is EnvironmentKind.SCRIPTED:
        script = load_script(Path(script_path).read_text()) if script_path else []
        return ScriptedEnvironment(script)
    if kind is EnvironmentKind.RANDOM:
        return RandomEnvironment(config.seed, config.pool)
    if kind is EnvironmentKind.COUNTER:
        return build_counterstrategy(s, budget)
    return InteractiveEnvironment(PromptedMoves())


def finish_play(rec: RunRecord, as_json: bool, report_path: Optional[str], extra=None) -> None:
    renderer = ReportRenderer()
    if as_json:
        data = rec.to_dict()
        data.update(extra or {})
        emit_json(data)
    else:
        show_text(renderer.render_record(rec), title="Play")
        for key, value in (extra or {}).items():
            console.print(f"[bold]{escape(key)}:[/bold] {escape(str(value))}")
    if report_path:
        renderer.write(report_path, renderer.render_record(rec))
    if rec.winner is Player.BOTTOM:
        sys.exit(FAILED)


class PromptedMoves:
    """Asks the user for ⊥'s moves; shows ⊤'s moves and meters as they arrive."""

    def __init__(self):
        self.shown = 0

    def __call__(self, position: GameState, run: Run) -> Optional[List[str]]:
        for lm in run[self.shown:]:
            if lm.player is Player.TOP:
                console.print(f"[green]{escape(str(lm))}[/green]  magnitude {magnitude(lm.move)}")
        self.shown = len(run)
        console.print(Panel(Text(position.describe()), title="Position", border_style="blue"))
        while True:
            try:
                answer = Prompt.ask("⊥ move, [bold]wait[/bold] or [bold]quit[/bold]",
                                    default="wait", console=console)
            except EOFError:
                return None
            answer = answer.strip()
            if answer == "quit":
                return None
            if answer == "wait":
                return []
            verdict = check_move(position, bottom(answer))
            if isinstance(verdict, Illegal):
                console.print(f"[red]Illegal: {escape(verdict.reason)}[/red]")
                continue
            return [answer]


# ----------------------------------------------------------------------- commands


@click.group(cls=GameproofGroup)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for search internals")
@click.version_option(version=__version__, prog_name="gameproof")
def main(verbose: int):
    """
    Games, proofs and machines for the CL12 sequent calculus.

    \b
    Examples:
        gameproof prove "=> !x: ?y: (p(x) -> p(y))"
        gameproof legal-runs "=> (0 = 0 & 0 = 1) -> (10 = 11 & 10 = 10)"
        gameproof corpus run --jobs 4
    """
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@main.command("parse")
@click.argument("sequent")
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def parse_cmd(sequent: str, as_json: bool):
    """Parse a sequent and show its canonical and display forms."""
    s = parse_sequent(sequent)
    data = {
        "canonical": format_sequent(s),
        "pretty": pretty_sequent(s),
        "free": list(free_vars(s)),
        "constants": sorted(constants(s)),
        "native_magnitude": native_magnitude(s),
    }
    if as_json:
        emit_json(data)
        return
    table = Table(show_header=False, box=None)
    table.add_column("Field", style="cyan")
    table.add_column("Value")
    for key, value in data.items():
        table.add_row(key, escape(str(value)))
    console.print(table)


@main.command("elementarize")
@click.argument("sequent")
@click.option("--steps", default=100_000, show_default=True)
@click.option("--max-domain", default=3, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def elementarize_cmd(sequent: str, steps: int, max_domain: int, as_json: bool):
    """Show the elementarization and whether the sequent is stable."""
    s = parse_sequent(sequent)
    verdict = is_stable(s, ClassicalBudget(steps, max_domain))
    stable = True if isinstance(verdict, Valid) else False if isinstance(verdict, Invalid) else None
    if as_json:
        emit_json({"elementarization": pretty_formula(elementarize_sequent(s)), "stable": stable})
    else:
        console.print(f"[bold]‖·‖:[/bold] {escape(pretty_formula(elementarize_sequent(s)))}")
        label = {True: "[green]stable[/green]", False: "[yellow]unstable[/yellow]"}
        console.print(f"[bold]Stability:[/bold] {label.get(stable, '[red]unknown[/red]')}")
    if stable is None:
        sys.exit(UNDECIDED)


@main.command("legal-runs")
@click.argument("sequent")
@click.option("--pool", default="0,1,10", show_default=True, help="Constants for quantifier moves")
@click.option("--cap", default=4, show_default=True, help="Replications per copy tree")
@click.option("--max-runs", default=10_000, show_default=True)
@interpretation_options
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def legal_runs_cmd(sequent, pool, cap, max_runs, interp_path, bits, as_json):
    """Enumerate every legal run with its winner."""
    s = parse_sequent(sequent)
    interp = interpretation(interp_path, bits)
    start = initial_state(s)
    runs = legal_runs(start, OracleConfig(pool=parse_pool(pool), replication_cap=cap,
                                          max_runs=max_runs))
    rows = [(run, winner_of_run(start, run, interp)) for run in runs]
    if as_json:
        emit_json([
            {"run": [lm.to_line() for lm in run], "winner": winner.value} for run, winner in rows
        ])
        return
    table = Table(title=pretty_sequent(s))
    table.add_column("#", style="dim")
    table.add_column("Run")
    table.add_column("Winner")
    for number, (run, winner) in enumerate(rows, 1):
        table.add_row(str(number), escape(show_run(run)), winner.glyph)
    console.print(table)
    wins = sum(1 for _, winner in rows if winner is Player.TOP)
    console.print(f"{len(rows)} runs, {wins} won by ⊤")


@main.command("play")
@click.argument("sequent")
@click.option("--machine", "machine_kind", default=MachineKind.DO_NOTHING.value,
              type=click.Choice([m.value for m in MachineKind]), show_default=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--solution", help="Builtin solution name or table JSON file")
@play_options
@interpretation_options
@handle_errors
def play_cmd(sequent, machine_kind, proof_path, solution, env_kind, script_path, seed,
             max_ticks, pool, clean, report_path, as_json, interp_path, bits):
    """Play a machine against an environment on a sequent."""
    s = parse_sequent(sequent)
    config = play_config(seed, max_ticks, pool, clean)
    machine = build_machine(machine_kind, proof_path, solution)
    env = build_environment(env_kind, s, script_path, config)
    rec = play(machine, env, s, interpretation(interp_path, bits), config)
    finish_play(rec, as_json, report_path)


@main.command("prove")
@click.argument("sequent")
@budget_options
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Save the proof as JSON")
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def prove_cmd(sequent, depth, replicate_cap, steps, max_domain, out_path, report_path, as_json):
    """Search for a CL12 proof."""
    s = parse_sequent(sequent)
    verdict = prove(s, search_budget(depth, replicate_cap, steps, max_domain))
    if isinstance(verdict, Proof):
        renderer = ReportRenderer()
        if as_json:
            emit_json(proof_to_json(verdict))
        else:
            show_text(renderer.render_proof(verdict), title="Proof")
        if out_path:
            dump_proof(verdict, out_path)
        if report_path:
            renderer.write(report_path, renderer.render_proof(verdict))
        return
    if isinstance(verdict, Unprovable):
        if as_json:
            emit_json({"verdict": "unprovable", "goals": verdict.goals})
        else:
            console.print(f"[yellow]Unprovable[/yellow] ({verdict.goals} goals searched)")
        sys.exit(FAILED)
    if as_json:
        emit_json({"verdict": "unknown", "reason": verdict.reason})
    else:
        console.print(f"[red]Unknown:[/red] {escape(verdict.reason)}")
    sys.exit(UNDECIDED)


@main.command("check-proof")
@click.argument("proof_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--steps", default=100_000, show_default=True)
@click.option("--max-domain", default=3, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def check_proof_cmd(proof_path, steps, max_domain, as_json):
    """Check a proof file step by step."""
    proof = load_proof(proof_path)
    bad = check_proof(proof, ClassicalBudget(steps, max_domain))
    if as_json:
        emit_json(
            {"ok": True, "steps": len(proof)} if bad is None
            else {"ok": False, "step": bad[0], "kind": bad[1].kind, "message": bad[1].message}
        )
    elif bad is None:
        console.print(f"[green]✓[/green] {len(proof)} steps prove "
                      f"{escape(pretty_sequent(proof.conclusion))}")
    else:
        console.print(f"[red]✗ step {bad[0]}:[/red] {escape(str(bad[1]))}")
    if bad is not None:
        sys.exit(UNDECIDED if bad[1].kind == "unknown-stability" else FAILED)


@main.command("extract-play")
@click.argument("proof_path", type=click.Path(exists=True, dir_okay=False))
@play_options
@interpretation_options
@handle_errors
def extract_play_cmd(proof_path, env_kind, script_path, seed, max_ticks, pool, clean,
                     report_path, as_json, interp_path, bits):
    """Play the strategy a proof encodes on the proof's conclusion."""
    proof = load_proof(proof_path)
    bad = check_proof(proof)
    if bad is not None:
        _fail(f"step {bad[0]}: {bad[1]}", FAILED)
    s = proof.conclusion
    config = play_config(seed, max_ticks, pool, clean)
    machine = extract(proof)
    rec = play(machine, build_environment(env_kind, s, script_path, config), s,
               interpretation(interp_path, bits), config)
    native = native_magnitude(s)
    monitor = well_behaved_monitor(rec, machine.replication_bound)
    extra = {
        "replications": monitor.replications,
        "replication_bound": machine.replication_bound,
        "focused": monitor.focused,
        "minimal_amplitude": check_amplitude(rec, lambda ell: max(ell, native)),
    }
    finish_play(rec, as_json, report_path, extra)


def parse_solutions(specs: Sequence[str], count: int) -> List[Machine]:
    solutions: List[Machine] = [DoNothing() for _ in range(count)]
    for spec in specs:
        index, sep, name = spec.partition("=")
        if not sep or not index.isdigit() or not 0 <= int(index) < count:
            raise click.BadParameter(f"expected i=<solution> with 0 <= i < {count}, got {spec!r}",
                                     param_hint="--solution")
        solutions[int(index)] = DoNothing() if name == "do-nothing" else load_solution(name)
    return solutions


@main.command("compose")
@click.option("--proof", "proof_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--solution", "solution_specs", multiple=True,
              help="i=<builtin|table file> solving the i-th antecedent formula")
@click.option("--mode", default=Mode.DIRECT.value, show_default=True,
              type=click.Choice([m.value for m in Mode]))
@play_options
@interpretation_options
@handle_errors
def compose_cmd(proof_path, solution_specs, mode, env_kind, script_path, seed, max_ticks, pool,
                clean, report_path, as_json, interp_path, bits):
    """Solve a proof's succedent from solutions of its antecedent."""
    proof = load_proof(proof_path)
    s = proof.conclusion
    solutions = parse_solutions(solution_specs, len(s.antecedent))
    machine = compose(extract(proof), s, solutions, recompute=Mode(mode) is Mode.RECOMPUTE)
    real = Sequent((), s.succedent)
    config = play_config(seed, max_ticks, pool, clean)
    rec = play(machine, build_environment(env_kind, real, script_path, config), real,
               interpretation(interp_path, bits), config)
    finish_play(rec, as_json, report_path, {"mode": Mode(mode).display_name})


@main.command("counter")
@click.argument("sequent")
@click.option("--machine", "machine_kind", default=MachineKind.DO_NOTHING.value,
              type=click.Choice([m.value for m in MachineKind]), show_default=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--solution", help="Builtin solution name or table JSON file")
@budget_options
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Save the refutation as JSON")
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def counter_cmd(sequent, machine_kind, proof_path, solution, depth, replicate_cap, steps,
                max_domain, out_path, report_path, as_json):
    """Refute a machine on an unprovable sequent."""
    s = parse_sequent(sequent)
    machine = build_machine(machine_kind, proof_path, solution)
    ref = refute(s, machine, search_budget(depth, replicate_cap, steps, max_domain))
    renderer = ReportRenderer()
    data = counter_report(ref)
    if as_json:
        emit_json(data)
    else:
        show_text(renderer.render_refutation(ref), title="Refutation")
    if out_path:
        renderer.write(out_path, json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    if report_path:
        renderer.write(report_path, renderer.render_refutation(ref))


@main.command("oracle")
@click.argument("sequent")
@click.option("--pool", default="0,1,10", show_default=True)
@click.option("--cap", default=4, show_default=True, help="Replications per copy tree")
@click.option("--node-budget", default=200_000, show_default=True)
@interpretation_options
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def oracle_cmd(sequent, pool, cap, node_budget, interp_path, bits, as_json):
    """Decide by exhaustive search whether ⊤ can force a win in the bounded game."""
    s = parse_sequent(sequent)
    config = OracleConfig(pool=parse_pool(pool), replication_cap=cap, node_budget=node_budget)
    won = winnable(initial_state(s), interpretation(interp_path, bits), config)
    if as_json:
        emit_json({"winnable": won})
    elif won:
        console.print("[green]⊤ can force a win[/green]")
    else:
        console.print("[yellow]⊤ has no winning strategy in the bounded game[/yellow]")
    if not won:
        sys.exit(FAILED)


@main.group("corpus", cls=GameproofGroup)
def corpus_group():
    """The golden corpus."""


@corpus_group.command("list")
def corpus_list():
    """List corpus items."""
    table = Table(title="Corpus")
    table.add_column("Name", style="cyan")
    table.add_column("Description")
    for name, description in get_item_descriptions().items():
        table.add_row(name, escape(description))
    console.print(table)


@corpus_group.command("run")
@click.argument("names", nargs=-1)
@click.option("--jobs", default=1, show_default=True, help="Items checked in parallel")
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@handle_errors
def corpus_run(names, jobs, report_path, as_json):
    """Check corpus items (all of them by default)."""
    results = run_corpus(jobs=jobs, names=names or None)
    renderer = ReportRenderer()
    if as_json:
        emit_json([r.to_dict() for r in results])
    else:
        table = Table(title="Corpus")
        table.add_column("Item", style="cyan")
        table.add_column("Result")
        table.add_column("Seconds", justify="right")
        table.add_column("Detail")
        for r in results:
            status = "[green]ok[/green]" if r.passed else "[red]FAIL[/red]"
            table.add_row(r.name, status, f"{r.seconds:.2f}", escape(r.detail))
        console.print(table)
    if report_path:
        renderer.write(report_path, renderer.render_corpus(results))
    if not all(r.passed for r in results):
        sys.exit(FAILED)


@main.command("repl")
@click.argument("sequent")
@click.option("--machine", "machine_kind", default=MachineKind.DO_NOTHING.value,
              type=click.Choice([m.value for m in MachineKind]), show_default=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--solution", help="Builtin solution name or table JSON file")
@click.option("--max-ticks", default=200, show_default=True)
@interpretation_options
@handle_errors
def repl_cmd(sequent, machine_kind, proof_path, solution, max_ticks, interp_path, bits):
    """Play ⊥ yourself against a machine."""
    s = parse_sequent(sequent)
    machine = build_machine(machine_kind, proof_path, solution)
    console.print(Panel(Text(pretty_sequent(s)), title=f"gameproof {__version__}",
                        border_style="blue"))
    config = PlayConfig(max_ticks=max_ticks)
    rec = play(machine, InteractiveEnvironment(PromptedMoves()), s,
               interpretation(interp_path, bits), config)
    show_text(ReportRenderer().render_record(rec), title="Play")


if __name__ == "__main__":
    main()
