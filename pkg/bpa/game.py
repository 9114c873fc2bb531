"""
The Prover-Refuter game.

Each phase starts with a terminal check of the current pair. Prover may then
offer a decomposition, from which Refuter picks the next pair; otherwise
Refuter challenges with a transition of either side and Prover answers with
a transition of the other side under the same action. Answers that do not fit
into the pair space lose for Prover. Plays are cut off after `max_phases`,
which is reported as Ongoing rather than adjudicated.
"""

import logging
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import structlog

from .bpa_core import BpaSystem
from .decomposition import (
    Decomposition,
    decomposition_footprint,
    decomposition_problem,
    format_decomposition,
    format_pair,
    prover_decompositions,
)
from .equivalence import EqLevelOracle, shared_oracle
from .errors import ContractViolation, IllegalMoveError, InconclusiveError
from .events import Event, EventBus, EventType
from .lts import Side, enabled_actions, successors, transitions
from .regular_strings import Pair, RegularString, prefix_size, size_of_pair

log = structlog.get_logger(__name__)

DEFAULT_FREE_SPACE_FACTOR = 8
DEFAULT_ORACLE_DEPTH = 8


class GameStage(Enum):
    TERMINAL_CHECK = "terminal_check"
    PROVER_DECOMPOSE = "prover_decompose"
    REFUTER_PICK_PAIR = "refuter_pick_pair"
    REFUTER_CHALLENGE = "refuter_challenge"
    PROVER_RESPOND = "prover_respond"
    FINISHED = "finished"


class Role(Enum):
    PROVER = "prover"
    REFUTER = "refuter"
    REFEREE = "referee"


STAGE_MOVER = {
    GameStage.TERMINAL_CHECK: Role.REFEREE,
    GameStage.PROVER_DECOMPOSE: Role.PROVER,
    GameStage.REFUTER_PICK_PAIR: Role.REFUTER,
    GameStage.REFUTER_CHALLENGE: Role.REFUTER,
    GameStage.PROVER_RESPOND: Role.PROVER,
}


class GameOutcome(Enum):
    PROVER_WINS = "ProverWins"
    REFUTER_WINS = "RefuterWins"
    ONGOING = "Ongoing"
    INCONCLUSIVE = "Inconclusive"


class TerminalResult(Enum):
    REFUTER_WINS = "RefuterWins"
    PROVER_WINS = "ProverWins"
    CONTINUE = "Continue"


# ---------------------------------------------------------------------------
# Moves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TerminalCheck:
    result: TerminalResult

    def describe(self) -> str:
        return f"check {self.result.value}"


@dataclass(frozen=True)
class DecompositionOffered:
    decomposition: Decomposition

    def describe(self) -> str:
        pairs = "; ".join(format_pair(g) for g in self.decomposition.generators)
        return f"decompose [{pairs}]"


@dataclass(frozen=True)
class ProverPassed:
    def describe(self) -> str:
        return "pass"


@dataclass(frozen=True)
class PairChosen:
    """1-based index into the offered generators."""

    index: int

    def describe(self) -> str:
        return f"pick {self.index}"


@dataclass(frozen=True)
class TransitionChosen:
    side: Side
    action: str
    target: RegularString

    def describe(self) -> str:
        return f"challenge {self.side.value} {self.action} -> {self.target}"


@dataclass(frozen=True)
class ResponseChosen:
    target: RegularString

    def describe(self) -> str:
        return f"respond -> {self.target}"


Move = Union[TerminalCheck, DecompositionOffered, ProverPassed, PairChosen, TransitionChosen, ResponseChosen]


# ---------------------------------------------------------------------------
# Configurations and transcripts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GameConfig:
    """
    A game position. `pair_space` bounds the size of the stored pair and
    `free_space` the footprint of an offered decomposition.
    """

    current_pair: Pair
    phase: int
    pair_space: int
    free_space: int
    stage: GameStage = GameStage.TERMINAL_CHECK
    offered: Optional[Decomposition] = None
    challenge: Optional[TransitionChosen] = None
    outcome: Optional[GameOutcome] = None
    reason: str = ""

    @property
    def finished(self) -> bool:
        return self.stage is GameStage.FINISHED

    @property
    def mover(self) -> Optional[Role]:
        return STAGE_MOVER.get(self.stage)


@dataclass(frozen=True)
class TranscriptRecord:
    phase: int
    mover: Role
    move: Move
    pair_before: Pair
    pair_after: Pair


@dataclass
class GameTranscript:
    """Moves of one play from the initial pair, and how it ended."""

    initial_pair: Pair
    pair_space: int
    free_space: int
    records: List[TranscriptRecord] = field(default_factory=list)
    outcome: GameOutcome = GameOutcome.ONGOING
    phases: int = 0
    reason: str = ""

    @property
    def moves(self) -> List[Move]:
        return [record.move for record in self.records]

    @property
    def verdict(self) -> str:
        if self.outcome is GameOutcome.ONGOING:
            return f"Ongoing({self.phases})"
        return self.outcome.value

    def to_text(self) -> str:
        """One move per line; the verdict is the last line."""
        lines = [f"start {format_pair(self.initial_pair)}"]
        for record in self.records:
            line = f"{record.phase} {record.mover.value} {record.move.describe()}"
            if record.pair_after != record.pair_before:
                line += f" => {format_pair(record.pair_after)}"
            lines.append(line)
            if isinstance(record.move, DecompositionOffered):
                body = format_decomposition(record.move.decomposition).rstrip("\n")
                lines.extend(f"    {part}" for part in body.splitlines())
        if self.reason:
            lines.append(f"# {self.reason}")
        lines.append(self.verdict)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "initial_pair": [str(s) for s in self.initial_pair],
            "pair_space": self.pair_space,
            "free_space": self.free_space,
            "moves": [
                {
                    "phase": r.phase,
                    "mover": r.mover.value,
                    "move": r.move.describe(),
                    "pair_before": [str(s) for s in r.pair_before],
                    "pair_after": [str(s) for s in r.pair_after],
                }
                for r in self.records
            ],
            "outcome": self.outcome.value,
            "phases": self.phases,
            "reason": self.reason,
            "verdict": self.verdict,
        }


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

def terminal_check(system: BpaSystem, pair: Pair) -> TerminalResult:
    """RefuterWins on different enabled actions, ProverWins on (eps, eps)."""
    x, y = pair
    if enabled_actions(system, x) != enabled_actions(system, y):
        return TerminalResult.REFUTER_WINS
    if x.is_empty and y.is_empty:
        return TerminalResult.PROVER_WINS
    return TerminalResult.CONTINUE


def default_spaces(system: BpaSystem, free_space_factor: int = DEFAULT_FREE_SPACE_FACTOR):
    """(pair_space, free_space) = (2(2M + 2E + S_rhs), d.E)."""
    constants = system.constants
    return constants.prover_pair_space, free_space_factor * max(constants.E, 1)


def initial_config(
    system: BpaSystem,
    pair: Pair,
    pair_space: Optional[int] = None,
    free_space: Optional[int] = None,
    free_space_factor: int = DEFAULT_FREE_SPACE_FACTOR,
) -> GameConfig:
    default_pair, default_free = default_spaces(system, free_space_factor)
    return GameConfig(
        current_pair=pair,
        phase=1,
        pair_space=default_pair if pair_space is None else pair_space,
        free_space=default_free if free_space is None else free_space,
    )


class GameEngine:
    """Deterministic transition function over game configurations."""

    def __init__(self, system: BpaSystem):
        self.system = system
        self.norms = system.norms
        self.logger = logging.getLogger(self.__class__.__name__)

    def _illegal(self, config: GameConfig, reason: str) -> IllegalMoveError:
        return IllegalMoveError(reason, config.phase)

    def apply_move(self, config: GameConfig, move: Move) -> GameConfig:
        """
        Apply a move to a configuration.

        Returns:
            The next configuration; overflowing answers end the play for Refuter

        Raises:
            IllegalMoveError: If the move is not legal in `config`
        """
        stage = config.stage
        if stage is GameStage.FINISHED:
            raise self._illegal(config, "the play is over")

        if stage is GameStage.TERMINAL_CHECK:
            if not isinstance(move, TerminalCheck):
                raise self._illegal(config, "a terminal check is due")
            actual = terminal_check(self.system, config.current_pair)
            if move.result is not actual:
                raise self._illegal(config, f"terminal check gives {actual.value}, not {move.result.value}")
            if actual is TerminalResult.CONTINUE:
                return replace(config, stage=GameStage.PROVER_DECOMPOSE)
            outcome = GameOutcome.REFUTER_WINS if actual is TerminalResult.REFUTER_WINS else GameOutcome.PROVER_WINS
            reason = "different enabled actions" if outcome is GameOutcome.REFUTER_WINS else "both strings are dead"
            return replace(config, stage=GameStage.FINISHED, outcome=outcome, reason=reason)

        if stage is GameStage.PROVER_DECOMPOSE:
            if isinstance(move, ProverPassed):
                return replace(config, stage=GameStage.REFUTER_CHALLENGE)
            if not isinstance(move, DecompositionOffered):
                raise self._illegal(config, "Prover must offer a decomposition or pass")
            problem = decomposition_problem(self.system, config.current_pair, move.decomposition, self.norms)
            if problem is not None:
                raise self._illegal(config, problem)
            footprint = decomposition_footprint(move.decomposition, self.norms)
            if footprint > config.free_space:
                raise self._illegal(
                    config, f"decomposition needs {footprint} but the free space is {config.free_space}"
                )
            return replace(config, stage=GameStage.REFUTER_PICK_PAIR, offered=move.decomposition)

        if stage is GameStage.REFUTER_PICK_PAIR:
            if not isinstance(move, PairChosen):
                raise self._illegal(config, "Refuter must pick a generator pair")
            generators = config.offered.generators  # type: ignore[union-attr]
            if not 1 <= move.index <= len(generators):
                raise self._illegal(config, f"no generator {move.index}")
            return replace(
                config,
                current_pair=generators[move.index - 1],
                phase=config.phase + 1,
                stage=GameStage.TERMINAL_CHECK,
                offered=None,
            )

        if stage is GameStage.REFUTER_CHALLENGE:
            if not isinstance(move, TransitionChosen):
                raise self._illegal(config, "Refuter must choose a transition")
            source = config.current_pair[0] if move.side is Side.LEFT else config.current_pair[1]
            if move.target not in successors(self.system, source, move.action):
                raise self._illegal(config, f"{source} has no transition {move.action} -> {move.target}")
            return replace(config, stage=GameStage.PROVER_RESPOND, challenge=move)

        if not isinstance(move, ResponseChosen):
            raise self._illegal(config, "Prover must answer the challenge")
        challenge = config.challenge
        x, y = config.current_pair
        answerer = y if challenge.side is Side.LEFT else x  # type: ignore[union-attr]
        if move.target not in successors(self.system, answerer, challenge.action):  # type: ignore[union-attr]
            raise self._illegal(
                config, f"{answerer} has no transition {challenge.action} -> {move.target}"  # type: ignore[union-attr]
            )
        if challenge.side is Side.LEFT:  # type: ignore[union-attr]
            pair = (challenge.target, move.target)  # type: ignore[union-attr]
        else:
            pair = (move.target, challenge.target)  # type: ignore[union-attr]
        size = size_of_pair(pair, self.norms)
        if size > config.pair_space:
            return replace(
                config,
                current_pair=pair,
                stage=GameStage.FINISHED,
                challenge=None,
                outcome=GameOutcome.REFUTER_WINS,
                reason=f"pair of size {size} does not fit into space {config.pair_space}",
            )
        return replace(
            config, current_pair=pair, phase=config.phase + 1, stage=GameStage.TERMINAL_CHECK, challenge=None
        )


def apply_move(system: BpaSystem, config: GameConfig, move: Move) -> GameConfig:
    return GameEngine(system).apply_move(config, move)


def legal_moves(system: BpaSystem, config: GameConfig, oracle_depth: int = DEFAULT_ORACLE_DEPTH) -> List[Move]:
    """
    The move menu of the current stage.

    Prover's decomposition offers are the Prover shapes that fit into the
    free space (not validated by the oracle); passing is always listed first.
    """
    stage = config.stage
    x, y = config.current_pair
    if stage is GameStage.TERMINAL_CHECK:
        return [TerminalCheck(terminal_check(system, config.current_pair))]
    if stage is GameStage.PROVER_DECOMPOSE:
        menu: List[Move] = [ProverPassed()]
        for candidate in prover_decompositions(system, config.current_pair, oracle_depth, validate_with_oracle=False):
            if decomposition_footprint(candidate, system.norms) <= config.free_space:
                menu.append(DecompositionOffered(candidate))
        return menu
    if stage is GameStage.REFUTER_PICK_PAIR:
        return [PairChosen(i) for i in range(1, len(config.offered.generators) + 1)]  # type: ignore[union-attr]
    if stage is GameStage.REFUTER_CHALLENGE:
        menu = []
        for side, source in ((Side.LEFT, x), (Side.RIGHT, y)):
            for transition in transitions(system, source):
                move = TransitionChosen(side, transition.action, transition.target)
                if move not in menu:
                    menu.append(move)
        return menu
    if stage is GameStage.PROVER_RESPOND:
        challenge = config.challenge
        answerer = y if challenge.side is Side.LEFT else x  # type: ignore[union-attr]
        return [ResponseChosen(t) for t in successors(system, answerer, challenge.action)]  # type: ignore[union-attr]
    return []


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

class Strategy(ABC):
    """A player; `choose_move` is called on the stages owned by `role`."""

    role: Role

    def __init__(self, system: BpaSystem, name: Optional[str] = None):
        self.system = system
        self.name = name or self.__class__.__name__
        self.logger = logging.getLogger(self.__class__.__name__)

    @abstractmethod
    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        """
        Choose a move for the current stage.

        Raises:
            InconclusiveError: If the strategy cannot decide at its oracle depth
        """


class SoundRefuter(Strategy):
    """
    Refuter keeping the eq-level decreasing.

    Picks the generator with the least bounded eq-level and challenges with a
    transition after which every answer has a smaller eq-level. A pair it
    cannot tell apart at its oracle depth ends the play as inconclusive.
    """

    role = Role.REFUTER

    def __init__(self, system: BpaSystem, oracle_depth: int, oracle: Optional[EqLevelOracle] = None):
        super().__init__(system)
        self.oracle_depth = oracle_depth
        self.oracle = oracle or shared_oracle(system)

    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        if config.stage is GameStage.REFUTER_PICK_PAIR:
            levels = [
                self.oracle.eqlevel(g[0], g[1], self.oracle_depth)
                for g in config.offered.generators  # type: ignore[union-attr]
            ]
            least = min(range(len(levels)), key=lambda i: levels[i].rank())
            return PairChosen(least + 1)

        x, y = config.current_pair
        level = self.oracle.eqlevel(x, y, self.oracle_depth)
        if not level.is_exact:
            raise InconclusiveError(
                f"{format_pair(config.current_pair)} is {level}; no certified difference to play on"
            )
        lowering = self.oracle.lowering_challenges(x, y, self.oracle_depth)
        if not lowering:
            raise InconclusiveError(
                f"no challenge lowers {level} at {format_pair(config.current_pair)}"
            )
        chosen = lowering[0]
        return TransitionChosen(chosen.side, chosen.transition.action, chosen.transition.target)


class CompleteProver(Strategy):
    """
    Prover keeping the current pair small and equivalent.

    Offers the first oracle-validated decomposition fitting the free space
    whenever a canonical prefix exceeds 2M + E, and otherwise answers with the
    response of highest bounded eq-level.
    """

    role = Role.PROVER

    def __init__(self, system: BpaSystem, oracle_depth: int, oracle: Optional[EqLevelOracle] = None):
        super().__init__(system)
        self.oracle_depth = oracle_depth
        self.oracle = oracle or shared_oracle(system)
        self.threshold = system.constants.decomposition_threshold

    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        norms = self.system.norms
        x, y = config.current_pair
        if config.stage is GameStage.PROVER_DECOMPOSE:
            if max(prefix_size(x, norms), prefix_size(y, norms)) > self.threshold:
                for candidate in prover_decompositions(
                    self.system, config.current_pair, self.oracle_depth, oracle=self.oracle
                ):
                    if decomposition_footprint(candidate, norms) <= config.free_space:
                        return DecompositionOffered(candidate)
                self.logger.debug(f"No decomposition fits for {format_pair(config.current_pair)}")
            return ProverPassed()

        challenge = config.challenge
        answerer = y if challenge.side is Side.LEFT else x  # type: ignore[union-attr]
        best = None
        for target in successors(self.system, answerer, challenge.action):  # type: ignore[union-attr]
            pair = (challenge.target, target) if challenge.side is Side.LEFT else (target, challenge.target)  # type: ignore[union-attr]
            level = self.oracle.eqlevel(pair[0], pair[1], self.oracle_depth)
            # identical answers first among equals
            key = (level.rank(), pair[0] == pair[1])
            if best is None or key > best[1]:
                best = (target, key)
        if best is None:
            raise ContractViolation("no answer exists; the terminal check should have ended the play")
        return ResponseChosen(best[0])


class RandomProver(Strategy):
    """Prover choosing uniformly from its menu; decompositions with probability `offer_rate`."""

    role = Role.PROVER

    def __init__(self, system: BpaSystem, seed: int = 0, offer_rate: float = 0.3, oracle_depth: int = DEFAULT_ORACLE_DEPTH):
        super().__init__(system)
        self.rng = random.Random(seed)
        self.offer_rate = offer_rate
        self.oracle_depth = oracle_depth

    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        if config.stage is GameStage.PROVER_DECOMPOSE:
            if self.rng.random() >= self.offer_rate:
                return ProverPassed()
            offers = legal_moves(self.system, config, self.oracle_depth)[1:]
            return self.rng.choice(offers) if offers else ProverPassed()
        return self.rng.choice(legal_moves(self.system, config))


class RandomRefuter(Strategy):
    role = Role.REFUTER

    def __init__(self, system: BpaSystem, seed: int = 0):
        super().__init__(system)
        self.rng = random.Random(seed)

    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        return self.rng.choice(legal_moves(self.system, config))


class ScriptedStrategy(Strategy):
    """Plays a fixed list of moves, or 1-based indices into the move menu."""

    def __init__(self, system: BpaSystem, role: Role, script: Sequence[Union[Move, int]], oracle_depth: int = DEFAULT_ORACLE_DEPTH):
        super().__init__(system)
        self.role = role
        self.script = list(script)
        self.oracle_depth = oracle_depth
        self._position = 0

    def choose_move(self, config: GameConfig, history: Sequence[TranscriptRecord]) -> Move:
        if self._position >= len(self.script):
            raise InconclusiveError(f"the {self.role.value} script is exhausted")
        entry = self.script[self._position]
        self._position += 1
        if isinstance(entry, int):
            menu = legal_moves(self.system, config, self.oracle_depth)
            if not 1 <= entry <= len(menu):
                raise IllegalMoveError(f"menu has no entry {entry}", config.phase)
            return menu[entry - 1]
        return entry


# ---------------------------------------------------------------------------
# Plays
# ---------------------------------------------------------------------------

def _as_string(system: BpaSystem, value: Union[str, RegularString]) -> RegularString:
    if isinstance(value, RegularString):
        return value
    if value not in system.nonterminals:
        raise ContractViolation(f"'{value}' is not a nonterminal of the system")
    return RegularString.of((value,))


def run_game(
    system: BpaSystem,
    x: Union[str, RegularString],
    y: Union[str, RegularString],
    prover: Strategy,
    refuter: Strategy,
    max_phases: int,
    pair_space: Optional[int] = None,
    free_space: Optional[int] = None,
    free_space_factor: int = DEFAULT_FREE_SPACE_FACTOR,
    event_bus: Optional[EventBus] = None,
) -> GameTranscript:
    """
    Play from (X, Y) until a win, an inconclusive strategy, or the phase cutoff.

    Returns:
        The transcript; a cutoff is recorded as Ongoing(max_phases)

    Raises:
        IllegalMoveError: If a strategy plays an illegal move
    """
    engine = GameEngine(system)
    start = (_as_string(system, x), _as_string(system, y))
    config = initial_config(system, start, pair_space, free_space, free_space_factor)
    transcript = GameTranscript(start, config.pair_space, config.free_space)
    players = {Role.PROVER: prover, Role.REFUTER: refuter}
    bus = event_bus or EventBus()
    bus.publish(Event(EventType.GAME_STARTED, "engine", 0, {"pair": format_pair(start)}))
    log.info("game_started", pair=format_pair(start), pair_space=config.pair_space, free_space=config.free_space)

    while not config.finished:
        if config.phase > max_phases:
            transcript.outcome = GameOutcome.ONGOING
            transcript.reason = f"cut off after {max_phases} phases"
            break
        mover = config.mover
        if config.stage is GameStage.TERMINAL_CHECK:
            bus.publish(Event(EventType.PHASE_STARTED, "engine", config.phase, {}))
            move: Move = TerminalCheck(terminal_check(system, config.current_pair))
        else:
            try:
                move = players[mover].choose_move(config, transcript.records)  # type: ignore[index]
            except InconclusiveError as e:
                transcript.outcome = GameOutcome.INCONCLUSIVE
                transcript.reason = str(e)
                break
        following = engine.apply_move(config, move)
        record = TranscriptRecord(config.phase, mover, move, config.current_pair, following.current_pair)  # type: ignore[arg-type]
        transcript.records.append(record)
        bus.publish(Event(EventType.MOVE_APPLIED, mover.value, config.phase, {"record": record}))  # type: ignore[union-attr]
        config = following

    if config.finished:
        transcript.outcome = config.outcome  # type: ignore[assignment]
        transcript.reason = config.reason
    transcript.phases = min(config.phase, max_phases)
    bus.publish(Event(EventType.GAME_FINISHED, "engine", transcript.phases, {"outcome": transcript.verdict}))
    log.info("game_finished", outcome=transcript.verdict, phases=transcript.phases, reason=transcript.reason)
    return transcript


def replay_transcript(system: BpaSystem, transcript: GameTranscript) -> List[GameConfig]:
    """
    Re-apply the moves of a transcript from its initial pair.

    Returns:
        Every configuration of the play, the initial one first

    Raises:
        IllegalMoveError: If a move is illegal, or a recorded pair differs
            from the replayed one
    """
    engine = GameEngine(system)
    config = initial_config(
        system, transcript.initial_pair, transcript.pair_space, transcript.free_space
    )
    configs = [config]
    for record in transcript.records:
        if record.pair_before != config.current_pair:
            raise IllegalMoveError("recorded pair differs from the replayed pair", config.phase)
        config = engine.apply_move(config, record.move)
        if record.pair_after != config.current_pair:
            raise IllegalMoveError("recorded result differs from the replayed pair", config.phase)
        configs.append(config)
    return configs
