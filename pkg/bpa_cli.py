#!/usr/bin/env python3
"""
bpa - bisimilarity of Basic Process Algebra processes

Main CLI entry point. Verdicts and reports go to stdout (the verdict is always
the last line); diagnostics and logs go to stderr.
"""

import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import click
import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from bpa.bpa_core import BpaSystem, complete_dead, completion_symbol, parse_system, validate
from bpa.decomposition import (
    decomposition_footprint,
    decomposition_problem,
    format_pair,
    parse_decomposition,
)
from bpa.equivalence import MEMO_CAP_ENV, EqLevelOracle
from bpa.errors import (
    BpaError,
    ContractViolation,
    InconclusiveError,
    SelfCheckFailure,
)
from bpa.events import Event, EventBus, EventType
from bpa.game import (
    CompleteProver,
    GameConfig,
    GameOutcome,
    Move,
    RandomProver,
    RandomRefuter,
    Role,
    SoundRefuter,
    Strategy,
    TranscriptRecord,
    legal_moves,
    run_game,
)
from bpa.game_solver import solve_game
from bpa.lts import norm_reducing_path, transitions
from bpa.normed_analysis import decide_normed, eqlevel_bound
from bpa.regular_strings import (
    RegularString,
    canonicalize,
    concat,
    norm_of,
    parse_regular_string,
    truncate_unnormed,
)
from bpa.reports import (
    CanonReport,
    CheckDecompReport,
    ConstantsReport,
    DecideNormedReport,
    EqLevelReport,
    GameReport,
    NormEntry,
    NormsReport,
    PathReport,
    SolveReport,
    StepEntry,
    StepReport,
    render,
    report_schemas,
)
from utils import FileOperations, setup_logging

# Load environment variables
load_dotenv()

console = Console(highlight=False, soft_wrap=True, emoji=False)
err_console = Console(stderr=True, highlight=False, soft_wrap=True, emoji=False)

app = typer.Typer(
    name="bpa",
    help="Bisimilarity of Basic Process Algebra processes: norms, eq-levels, decompositions and the Prover-Refuter game",
    add_completion=False,
)

DEFAULT_CONFIG = Path(__file__).parent / "bpa_config.yaml"

EXIT_USAGE = 1
EXIT_INCONCLUSIVE = 2
EXIT_SELF_CHECK = 3


@dataclass
class CliState:
    """Settings shared by all commands of one invocation."""

    config: Dict[str, Any] = field(default_factory=dict)
    complete_dead: bool = False

    def setting(self, section: str, key: str, default: Any = None) -> Any:
        value = (self.config.get(section) or {}).get(key)
        return default if value is None else value

    @property
    def memo_cap(self) -> Optional[int]:
        if os.getenv(MEMO_CAP_ENV):
            return int(os.environ[MEMO_CAP_ENV])
        return self.setting("oracle", "memo_cap")


def emit(line: str) -> None:
    console.print(line, markup=False)


def fail(message: str, code: int) -> None:
    err_console.print(f"error: {message}", markup=False)
    raise typer.Exit(code=code)


@contextmanager
def reported_errors() -> Iterator[None]:
    """Map library errors onto exit codes with a one-line diagnostic."""
    try:
        yield
    except InconclusiveError as e:
        fail(f"inconclusive: {e}", EXIT_INCONCLUSIVE)
    except SelfCheckFailure as e:
        fail(f"self-check failed: {e}", EXIT_SELF_CHECK)
    except BpaError as e:
        fail(str(e), EXIT_USAGE)
    except OSError as e:
        fail(str(e), EXIT_USAGE)


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj if isinstance(ctx.obj, CliState) else CliState()


@dataclass
class Loaded:
    """A validated system and the system as written, for query rewriting."""

    system: BpaSystem
    original: BpaSystem

    @property
    def loop_symbol(self) -> Optional[str]:
        return completion_symbol(self.original, self.system)

    def string(self, text: str) -> RegularString:
        """Parse a query string; with dead completion, X becomes X D."""
        x = parse_regular_string(text, self.system.nonterminals)
        loop = self.loop_symbol
        if loop is not None and x.is_finite:
            x = concat(x, RegularString.of((loop,)))
        return truncate_unnormed(x, self.system.norms)


def load_grammar(ctx: typer.Context, grammar: Path) -> Loaded:
    original = parse_system(FileOperations().read_text(grammar))
    system = complete_dead(original) if _state(ctx).complete_dead else original
    return Loaded(validate(system), original)


def make_oracle(ctx: typer.Context, system: BpaSystem) -> EqLevelOracle:
    return EqLevelOracle(system, memo_cap=_state(ctx).memo_cap)


@app.callback()
def main_callback(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Option(
        None,
        "--config",
        "-c",
        help="Path to a configuration file (defaults to bpa_config.yaml)",
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
    log_json: bool = typer.Option(False, "--log-json", help="Emit JSON-formatted logs on stderr"),
    complete_dead_flag: bool = typer.Option(
        False,
        "--complete-dead",
        help="Give dead nonterminals a loop and rewrite queries X ~ Y into X D ~ Y D",
    ),
):
    """Shared options."""
    config: Dict[str, Any] = {}
    path = config_file or DEFAULT_CONFIG
    if config_file is not None and not config_file.exists():
        fail(f"configuration file not found: {config_file}", EXIT_USAGE)
    if path.exists():
        loaded = FileOperations().read_yaml(path)
        if loaded is None:
            fail(f"invalid configuration file: {path}", EXIT_USAGE)
        config = loaded or {}
    state = CliState(config=config, complete_dead=complete_dead_flag)
    level = "DEBUG" if verbose else state.setting("logging", "level", "WARNING")
    log_file = state.setting("logging", "file")
    setup_logging(
        level=level,
        log_file=Path(log_file) if log_file else None,
        json_logs=log_json or bool(state.setting("logging", "json", False)),
    )
    ctx.obj = state


# ---------------------------------------------------------------------------
# System inspection
# ---------------------------------------------------------------------------

@app.command()
def norms(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Print the norm of every nonterminal."""
    with reported_errors():
        system = load_grammar(ctx, grammar).system
        table = system.norms
        if as_json:
            entries = [
                NormEntry(nonterminal=s, norm=table[s].value) for s in system.nonterminals
            ]
            emit(render(NormsReport(norms=entries, normed=system.is_normed)))
            return
        for symbol in system.nonterminals:
            emit(f"{symbol} {table[symbol]}")


@app.command()
def constants(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Print M, M_rhs, S_rhs and E."""
    with reported_errors():
        values = load_grammar(ctx, grammar).system.constants
        report = ConstantsReport(
            M=values.M,
            M_rhs=values.M_rhs,
            S_rhs=values.S_rhs,
            E=values.E,
            nonterminal_count=values.nonterminal_count,
            decomposition_threshold=values.decomposition_threshold,
            prover_pair_space=values.prover_pair_space,
        )
        if as_json:
            emit(render(report))
            return
        for name in ("M", "M_rhs", "S_rhs", "E"):
            emit(f"{name} {getattr(values, name)}")


@app.command()
def canon(
    prefix: str = typer.Option("", "--prefix", help="Finite prefix, symbols separated by spaces"),
    cycle: str = typer.Option("", "--cycle", help="Cycle repeated forever; empty for a finite string"),
    literal: Optional[str] = typer.Argument(None, help="A string literal such as 'A B (C D)^w'"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Print the canonical form of a regular string."""
    with reported_errors():
        if literal is not None:
            if prefix or cycle:
                raise ContractViolation("give either a literal or --prefix/--cycle, not both")
            x = parse_regular_string(literal)
        else:
            x = canonicalize(prefix.split(), cycle.split())
        if as_json:
            emit(render(CanonReport(prefix=list(x.prefix), cycle=list(x.cycle), text=str(x))))
            return
        emit(str(x))


@app.command()
def step(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    string: str = typer.Argument(..., help="Source string"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Print the one-step transitions of a string."""
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        x = loaded.string(string)
        found = transitions(loaded.system, x)
        if as_json:
            entries = [StepEntry(action=t.action, target=str(t.target), rule=str(t.rule)) for t in found]
            emit(render(StepReport(source=str(x), transitions=entries)))
            return
        for transition in found:
            emit(f"{transition.action} -> {transition.target}")
        emit(f"{len(found)} transitions")


@app.command()
def path(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    string: str = typer.Argument(..., help="Normed source string"),
    steps: Optional[int] = typer.Option(None, "--steps", "-n", help="Number of steps (default: the norm)"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Print a norm-reducing path."""
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        x = loaded.string(string)
        if steps is None:
            norm = norm_of(x, loaded.system.norms)
            if norm.is_omega:
                raise ContractViolation(f"{x} is unnormed; there is no norm-reducing path")
            steps = norm.finite
        witness = norm_reducing_path(loaded.system, x, steps)
        if as_json:
            report = PathReport(
                source=str(x), actions=list(witness.actions), states=[str(s) for s in witness.states]
            )
            emit(render(report))
            return
        emit(str(witness.start))
        for action, state in zip(witness.actions, witness.states[1:]):
            emit(f"--{action}--> {state}")


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------

@app.command()
def eqlevel(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    left: str = typer.Argument(..., help="Left string"),
    right: str = typer.Argument(..., help="Right string"),
    depth: Optional[int] = typer.Option(
        None, "--depth", "-d", help="Depth budget (default on normed systems: the eq-level bound + 2)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Print the bounded eq-level of two strings."""
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        system = loaded.system
        x, y = loaded.string(left), loaded.string(right)
        if depth is None:
            depth = _state(ctx).setting("oracle", "depth")
        if depth is None:
            if not system.is_normed or not (x.is_finite and y.is_finite):
                raise ContractViolation("--depth is required for unnormed systems")
            depth = eqlevel_bound(system, x, y) + 2
        result = make_oracle(ctx, system).eqlevel(x, y, depth)
        if as_json:
            report = EqLevelReport(
                left=str(x), right=str(y), depth=depth, kind=result.kind.value, level=result.level, verdict=str(result)
            )
            emit(render(report))
            return
        emit(str(result))


@app.command("decide-normed")
def decide_normed_command(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file of a normed system"),
    left: str = typer.Argument(..., help="Left string"),
    right: str = typer.Argument(..., help="Right string"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Decide bisimilarity in a normed system."""
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        x, y = loaded.string(left), loaded.string(right)
        verdict = decide_normed(loaded.system, x, y, oracle=make_oracle(ctx, loaded.system))
        if as_json:
            report = DecideNormedReport(
                left=str(x),
                right=str(y),
                bound=verdict.bound,
                depth=verdict.depth,
                bisimilar=verdict.bisimilar,
                eqlevel=verdict.eqlevel,
                verdict=str(verdict),
            )
            emit(render(report))
            return
        emit(f"bound {verdict.bound}")
        emit(str(verdict))


# ---------------------------------------------------------------------------
# Games
# ---------------------------------------------------------------------------

class HumanStrategy(Strategy):
    """Reads numbered choices from the move menu on standard input."""

    def __init__(self, system: BpaSystem, role: Role, oracle_depth: int):
        super().__init__(system, name=f"human {role.value}")
        self.role = role
        self.oracle_depth = oracle_depth

    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        menu = legal_moves(self.system, config, self.oracle_depth)
        table = Table(title=f"Phase {config.phase}: {format_pair(config.current_pair)}", show_header=True)
        table.add_column("#", style="cyan")
        table.add_column(f"{self.role.value} move")
        for index, move in enumerate(menu, start=1):
            table.add_row(str(index), move.describe())
        err_console.print(table)
        while True:
            choice = typer.prompt(f"{self.role.value} choice", type=int, err=True)
            if 1 <= choice <= len(menu):
                return menu[choice - 1]
            err_console.print(f"[red]Choose a number between 1 and {len(menu)}[/red]")


def _build_player(kind: str, role: Role, system: BpaSystem, oracle: EqLevelOracle, depth: int, seed: int) -> Strategy:
    if kind == "human":
        return HumanStrategy(system, role, depth)
    if kind == "random":
        return RandomProver(system, seed=seed, oracle_depth=depth) if role is Role.PROVER else RandomRefuter(system, seed)
    if role is Role.PROVER and kind == "complete":
        return CompleteProver(system, depth, oracle)
    if role is Role.REFUTER and kind == "sound":
        return SoundRefuter(system, depth, oracle)
    raise ContractViolation(f"unknown {role.value} strategy '{kind}'")


@app.command()
def game(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    left: str = typer.Argument(..., help="Left string"),
    right: str = typer.Argument(..., help="Right string"),
    prover: str = typer.Option("complete", "--prover", help="complete, random or human"),
    refuter: str = typer.Option("sound", "--refuter", help="sound, random or human"),
    interactive: bool = typer.Option(False, "--interactive", "-i", help="Play Prover yourself"),
    max_phases: Optional[int] = typer.Option(None, "--max-phases", help="Cut the play off after this many phases"),
    oracle_depth: Optional[int] = typer.Option(None, "--oracle-depth", help="Depth of the strategies' oracle"),
    pair_space: Optional[int] = typer.Option(None, "--pair-space", help="Space for the current pair"),
    free_space: Optional[int] = typer.Option(None, "--free-space", help="Space for offered decompositions"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the random strategies"),
    transcript_file: Optional[Path] = typer.Option(
        None, "--transcript", "-o", help="Also write the transcript (.json for JSON, text otherwise)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Play the Prover-Refuter game and print the transcript."""
    state = _state(ctx)
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        system = loaded.system
        x, y = loaded.string(left), loaded.string(right)
        depth = oracle_depth if oracle_depth is not None else state.setting("game", "oracle_depth", 8)
        phases = max_phases if max_phases is not None else state.setting("game", "max_phases", 50)
        chosen_seed = seed if seed is not None else state.setting("game", "seed", 0)
        oracle = make_oracle(ctx, system)
        if interactive:
            prover = "human"
        prover_player = _build_player(prover, Role.PROVER, system, oracle, depth, chosen_seed)
        refuter_player = _build_player(refuter, Role.REFUTER, system, oracle, depth, chosen_seed)

        bus = EventBus()
        if "human" in (prover, refuter):

            def on_move(event: Event) -> None:
                record: TranscriptRecord = event.data["record"]
                err_console.print(f"[dim]{record.phase} {record.mover.value}: {record.move.describe()}[/dim]")

            bus.subscribe(EventType.MOVE_APPLIED, on_move)

        transcript = run_game(
            system,
            x,
            y,
            prover_player,
            refuter_player,
            max_phases=phases,
            pair_space=pair_space,
            free_space=free_space,
            free_space_factor=state.setting("game", "free_space_factor", 8),
            event_bus=bus,
        )

        if transcript_file is not None:
            if not FileOperations().write_transcript(transcript_file, transcript):
                raise OSError(f"could not write {transcript_file}")

        if as_json:
            emit(render(GameReport(**transcript.to_dict())))
        else:
            console.print(transcript.to_text(), markup=False, end="")
        if transcript.outcome is GameOutcome.INCONCLUSIVE:
            raise typer.Exit(code=EXIT_INCONCLUSIVE)


@app.command()
def solve(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    left: str = typer.Argument(..., help="Left string"),
    right: str = typer.Argument(..., help="Right string"),
    pair_space: Optional[int] = typer.Option(None, "--pair-space", help="Space for the current pair"),
    free_space: Optional[int] = typer.Option(None, "--free-space", help="Space for offered decompositions"),
    max_configs: Optional[int] = typer.Option(None, "--max-configs", help="Configuration budget"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Solve the space-bounded game by exhaustive search."""
    state = _state(ctx)
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        x, y = loaded.string(left), loaded.string(right)
        result = solve_game(
            loaded.system,
            x,
            y,
            pair_space=pair_space,
            max_configs=max_configs if max_configs is not None else state.setting("solver", "max_configs", 200_000),
            free_space=free_space,
            oracle_depth=state.setting("solver", "oracle_depth", 8),
        )
        if as_json:
            emit(render(SolveReport(**result.to_dict())))
        else:
            emit(f"configurations {result.configurations}")
            emit(result.verdict.value)
        if not result.conclusive:
            raise typer.Exit(code=EXIT_INCONCLUSIVE)


@app.command("check-decomp")
def check_decomp(
    ctx: typer.Context,
    grammar: Path = typer.Argument(..., help="Grammar file"),
    decomposition_file: Path = typer.Argument(..., help="Decomposition with its congruence proof"),
    as_json: bool = typer.Option(False, "--json", help="Print a JSON report"),
):
    """Check a decomposition file against its target pair."""
    with reported_errors():
        loaded = load_grammar(ctx, grammar)
        system = loaded.system
        decomposition = parse_decomposition(
            FileOperations().read_text(decomposition_file), system.nonterminals
        )
        target = decomposition.target
        problem = decomposition_problem(system, target, decomposition)
        valid = problem is None
        footprint = decomposition_footprint(decomposition, system.norms) if valid else 0
        verdict = "Valid" if valid else "Invalid"
        if as_json:
            report = CheckDecompReport(
                target=[str(s) for s in target],
                generators=[[str(s) for s in g] for g in decomposition.generators],
                valid=valid,
                footprint=footprint,
                reason=problem,
                verdict=verdict,
            )
            emit(render(report))
            return
        if problem is not None:
            emit(f"reason: {problem}")
        else:
            emit(f"footprint {footprint}")
        emit(verdict)


@app.command()
def schema(
    command: Optional[str] = typer.Argument(None, help="Only the schema of this command's report"),
):
    """Print the JSON schemas of the --json reports."""
    schemas = report_schemas()
    if command is not None:
        if command not in schemas:
            fail(f"no report for command '{command}'", EXIT_USAGE)
        emit(json.dumps(schemas[command], indent=2, sort_keys=True))
        return
    emit(json.dumps(schemas, indent=2, sort_keys=True))


def main(argv: Optional[List[str]] = None) -> None:
    """Console entry point; usage errors exit with status 1."""
    try:
        code = app(args=argv, standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        err_console.print("Aborted.")
        sys.exit(EXIT_USAGE)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
