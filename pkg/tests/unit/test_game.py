"""
Unit tests for the Prover-Refuter game engine, strategies and plays.
"""

from dataclasses import replace

import pytest

from bpa.equivalence import EqLevelOracle
from bpa.errors import IllegalMoveError
from bpa.events import EventBus, EventType
from bpa.game import (
    CompleteProver,
    DecompositionOffered,
    GameEngine,
    GameOutcome,
    GameStage,
    ProverPassed,
    RandomProver,
    RandomRefuter,
    ResponseChosen,
    Role,
    ScriptedStrategy,
    SoundRefuter,
    TerminalCheck,
    TerminalResult,
    TransitionChosen,
    default_spaces,
    initial_config,
    legal_moves,
    replay_transcript,
    run_game,
    terminal_check,
)
from bpa.lts import Side
from bpa.regular_strings import EPSILON, size_of_pair
from tests.conftest import rs

EX2_TRANSCRIPT = """\
start X ~ Y
1 referee check Continue
1 prover pass
1 refuter challenge right a -> eps
1 prover respond -> U => U ~ eps
2 referee check RefuterWins
# different enabled actions
RefuterWins
"""


def players(system, depth=8):
    return CompleteProver(system, depth), SoundRefuter(system, depth)


@pytest.fixture
def chain_pair():
    """Create the bisimilar chain pair fixture."""
    return (rs("A2 A1"), rs("A1 A1 A1 A1"))


def test_terminal_check(xyz, branching):
    """Test the three terminal check results."""
    assert terminal_check(branching, (rs("X"), rs("Y"))) is TerminalResult.REFUTER_WINS
    assert terminal_check(xyz, (EPSILON, EPSILON)) is TerminalResult.PROVER_WINS
    assert terminal_check(xyz, (rs("X"), rs("Y"))) is TerminalResult.CONTINUE
    assert terminal_check(xyz, (EPSILON, rs("Z"))) is TerminalResult.REFUTER_WINS


def test_default_spaces(chain3):
    """Test default pair and free space."""
    assert default_spaces(chain3) == (2 * (14 + 1036 + 6), 8 * 518)
    assert default_spaces(chain3, 2)[1] == 1036


def test_sound_refuter_wins_unnormed(ex2):
    """Test the sound refuter wins on a looping process against a stopping one."""
    prover, refuter = players(ex2)
    transcript = run_game(ex2, "X", "Y", prover, refuter, max_phases=10)
    assert transcript.outcome is GameOutcome.REFUTER_WINS
    assert transcript.phases == 2
    assert transcript.to_text() == EX2_TRANSCRIPT


def test_sound_refuter_wins_chain(chain3):
    """Test the eq-level drops by one per phase on the chain."""
    prover, refuter = players(chain3)
    transcript = run_game(chain3, "A3", "A2", prover, refuter, max_phases=10)
    assert transcript.outcome is GameOutcome.REFUTER_WINS
    assert transcript.phases == 4
    assert transcript.records[-1].pair_before == (rs("A1 A2"), EPSILON)


def test_different_actions_lose_immediately(branching):
    """Test different enabled actions end the play in the first check."""
    prover, refuter = players(branching)
    transcript = run_game(branching, "X", "Y", prover, refuter, max_phases=10)
    assert transcript.outcome is GameOutcome.REFUTER_WINS
    assert transcript.phases == 1
    assert transcript.moves == [TerminalCheck(TerminalResult.REFUTER_WINS)]


def test_prover_wins_on_dead_pair(two_eps):
    """Test Prover wins once both strings are empty."""
    prover = CompleteProver(two_eps, 8)
    transcript = run_game(two_eps, "X", "Y", prover, RandomRefuter(two_eps, seed=1), max_phases=10)
    assert transcript.outcome is GameOutcome.PROVER_WINS
    assert transcript.verdict == "ProverWins"
    assert transcript.phases == 2


def test_sound_refuter_gives_up_on_bisimilar_pair(renamed_copy, two_eps):
    """Test the sound refuter ends the play as inconclusive when nothing separates the pair."""
    for system, left, right in ((renamed_copy, "X", "X2"), (two_eps, "X", "Y"), (renamed_copy, "X", "X")):
        prover, refuter = players(system)
        transcript = run_game(system, left, right, prover, refuter, max_phases=20)
        assert transcript.outcome is GameOutcome.INCONCLUSIVE
        assert transcript.verdict == "Inconclusive"
        assert "no certified difference" in transcript.reason
        assert transcript.phases == 1
        assert [type(m) for m in transcript.moves] == [TerminalCheck, ProverPassed]


def test_renamed_copy_survives(renamed_copy):
    """Test Prover survives on bisimilar recursive processes within the pair space."""
    prover = CompleteProver(renamed_copy, 8)
    transcript = run_game(renamed_copy, "X", "X2", prover, RandomRefuter(renamed_copy, seed=4), max_phases=20)
    assert transcript.outcome in (GameOutcome.ONGOING, GameOutcome.PROVER_WINS)
    assert transcript.pair_space == 440
    norms = renamed_copy.norms
    assert all(size_of_pair(r.pair_after, norms) <= 440 for r in transcript.records)


def test_identical_pair_stays_identical(ex2):
    """Test Prover answers identical pairs identically."""
    prover = CompleteProver(ex2, 8)
    transcript = run_game(ex2, "X", "X", prover, RandomRefuter(ex2, seed=2), max_phases=5)
    assert transcript.outcome is GameOutcome.ONGOING
    assert transcript.verdict == "Ongoing(5)"
    assert transcript.reason == "cut off after 5 phases"
    assert all(r.pair_after[0] == r.pair_after[1] for r in transcript.records)


def test_offered_decomposition(chain3, chain_pair):
    """Test a decomposition offer moves the play to a generator pair."""
    prover = ScriptedStrategy(chain3, Role.PROVER, [2])
    refuter = ScriptedStrategy(chain3, Role.REFUTER, [1])
    transcript = run_game(chain3, chain_pair[0], chain_pair[1], prover, refuter, max_phases=5)
    assert transcript.outcome is GameOutcome.INCONCLUSIVE
    assert "script is exhausted" in transcript.reason
    offer = transcript.records[1]
    assert isinstance(offer.move, DecompositionOffered)
    assert transcript.records[2].pair_after == (rs("A1 A1 A1"), rs("A2"))
    text = transcript.to_text()
    assert "1 prover decompose [A1 A1 A1 ~ A2; A1 A1 A1 ~ A1 A1 A1]" in text
    assert "    gen 1" in text
    assert text.endswith("Inconclusive\n")


def test_legal_moves_menu(chain3, chain_pair):
    """Test the menus of each stage."""
    config = initial_config(chain3, chain_pair)
    assert legal_moves(chain3, config) == [TerminalCheck(TerminalResult.CONTINUE)]
    config = replace(config, stage=GameStage.PROVER_DECOMPOSE)
    menu = legal_moves(chain3, config)
    assert menu[0] == ProverPassed()
    assert [m.decomposition.template for m in menu[1:]] == ["2b-i"]
    assert legal_moves(chain3, replace(config, free_space=1)) == [ProverPassed()]
    config = replace(config, stage=GameStage.REFUTER_CHALLENGE)
    assert legal_moves(chain3, config) == [
        TransitionChosen(Side.LEFT, "a", rs("A1 A1 A1")),
        TransitionChosen(Side.RIGHT, "a", rs("A1 A1 A1")),
    ]


def test_illegal_moves(xyz):
    """Test moves out of stage or off the transition relation are refused."""
    engine = GameEngine(xyz)
    config = initial_config(xyz, (rs("X"), rs("Y")))
    with pytest.raises(IllegalMoveError):
        engine.apply_move(config, ProverPassed())
    with pytest.raises(IllegalMoveError):
        engine.apply_move(config, TerminalCheck(TerminalResult.PROVER_WINS))
    config = engine.apply_move(config, TerminalCheck(TerminalResult.CONTINUE))
    config = engine.apply_move(config, ProverPassed())
    with pytest.raises(IllegalMoveError):
        engine.apply_move(config, TransitionChosen(Side.LEFT, "a", rs("Z")))
    config = engine.apply_move(config, TransitionChosen(Side.LEFT, "a", EPSILON))
    with pytest.raises(IllegalMoveError) as excinfo:
        engine.apply_move(config, ResponseChosen(EPSILON))
    assert excinfo.value.phase == 1


def test_oversized_answer_loses(xyz):
    """Test an answer that does not fit into the pair space loses for Prover."""
    engine = GameEngine(xyz)
    config = initial_config(xyz, (rs("X"), rs("Y")), pair_space=0)
    for move in (
        TerminalCheck(TerminalResult.CONTINUE),
        ProverPassed(),
        TransitionChosen(Side.LEFT, "a", EPSILON),
        ResponseChosen(rs("Z")),
    ):
        config = engine.apply_move(config, move)
    assert config.finished
    assert config.outcome is GameOutcome.REFUTER_WINS
    assert "does not fit" in config.reason
    with pytest.raises(IllegalMoveError):
        engine.apply_move(config, TerminalCheck(TerminalResult.CONTINUE))


def test_replay_transcript(ex2):
    """Test replaying a transcript reproduces its configurations."""
    prover, refuter = players(ex2)
    transcript = run_game(ex2, "X", "Y", prover, refuter, max_phases=10)
    configs = replay_transcript(ex2, transcript)
    assert len(configs) == len(transcript.records) + 1
    assert configs[-1].outcome is GameOutcome.REFUTER_WINS

    forged = transcript.records[3]
    transcript.records[3] = replace(forged, pair_after=(rs("U"), rs("U")))
    with pytest.raises(IllegalMoveError):
        replay_transcript(ex2, transcript)


def test_events_published(xyz):
    """Test the play publishes start, move and finish events."""
    bus = EventBus()
    seen = []
    bus.subscribe(EventType.MOVE_APPLIED, seen.append)
    prover, refuter = players(xyz)
    transcript = run_game(xyz, "X", "Y", prover, refuter, max_phases=10, event_bus=bus)
    assert len(seen) == len(transcript.records)
    assert len(bus.get_history(EventType.GAME_STARTED)) == 1
    finished = bus.get_history(EventType.GAME_FINISHED)
    assert finished[0].data["outcome"] == "RefuterWins"

    first_phase = bus.get_history(EventType.MOVE_APPLIED, phase=1)
    assert first_phase
    assert all(e.data["record"].phase == 1 for e in first_phase)
    phases = {record.phase for record in transcript.records}
    assert len(bus.get_history(EventType.PHASE_STARTED)) == len(phases)


def test_failing_subscriber_does_not_stop_play(xyz):
    """Test a subscriber error is logged and the play still finishes."""
    bus = EventBus()

    def broken(event):
        raise RuntimeError("observer bug")

    bus.subscribe(EventType.MOVE_APPLIED, broken)
    prover, refuter = players(xyz)
    transcript = run_game(xyz, "X", "Y", prover, refuter, max_phases=10, event_bus=bus)
    assert transcript.verdict == "RefuterWins"


def test_random_players_are_reproducible(renamed_copy):
    """Test seeded random players replay the same play."""

    def play():
        return run_game(
            renamed_copy,
            "X",
            "X2",
            RandomProver(renamed_copy, seed=3),
            RandomRefuter(renamed_copy, seed=5),
            max_phases=6,
        )

    first, second = play(), play()
    assert first.to_text() == second.to_text()
    replay_transcript(renamed_copy, first)


def test_transcript_dict(xyz):
    """Test the dictionary form of a transcript."""
    prover, refuter = players(xyz)
    data = run_game(xyz, "X", "Y", prover, refuter, max_phases=10).to_dict()
    assert data["initial_pair"] == ["X", "Y"]
    assert data["outcome"] == "RefuterWins"
    assert data["verdict"] == "RefuterWins"
    assert data["moves"][0] == {
        "phase": 1,
        "mover": "referee",
        "move": "check Continue",
        "pair_before": ["X", "Y"],
        "pair_after": ["X", "Y"],
    }


@pytest.mark.parametrize(
    "fixture_name, left, right",
    [("xyz", "X", "Y"), ("chain3", "A3", "A2"), ("ex2", "X", "Y"), ("branching", "X", "Y")],
)
def test_sound_refuter_measure_decreases(request, fixture_name, left, right):
    """Test every phase against random Provers lowers (eq-level, size) and Refuter wins."""
    system = request.getfixturevalue(fixture_name)
    oracle = EqLevelOracle(system)
    norms = system.norms
    start_level = oracle.eqlevel(rs(left), rs(right), 10)
    assert start_level.is_exact

    for seed in range(10):
        prover = RandomProver(system, seed=seed, offer_rate=0.5)
        refuter = SoundRefuter(system, 10, oracle)
        transcript = run_game(system, left, right, prover, refuter, max_phases=100)
        assert transcript.outcome is GameOutcome.REFUTER_WINS, transcript.to_text()
        responses = [m for m in transcript.moves if isinstance(m, ResponseChosen)]
        assert len(responses) <= start_level.level

        measures = []
        for record in transcript.records:
            if isinstance(record.move, TerminalCheck):
                x, y = record.pair_before
                level = oracle.eqlevel(x, y, 10)
                assert level.is_exact
                measures.append((level.level, size_of_pair(record.pair_before, norms)))
        assert all(later < earlier for earlier, later in zip(measures, measures[1:])), measures
        replay_transcript(system, transcript)


@pytest.mark.parametrize(
    "fixture_name, left, right",
    [("renamed_copy", "X", "X2"), ("chain3", "A2 A1", "A1 A1 A1 A1"), ("two_eps", "X", "Y"), ("ex2", "X", "U")],
)
def test_complete_prover_never_loses(request, fixture_name, left, right):
    """Test random Refuters never beat the complete Prover on bisimilar pairs and the pair space holds."""
    system = request.getfixturevalue(fixture_name)
    oracle = EqLevelOracle(system)
    norms = system.norms
    bound = 2 * (2 * system.constants.M + 2 * system.constants.E + system.constants.S_rhs)

    for seed in range(25):
        prover = CompleteProver(system, 8, oracle)
        transcript = run_game(system, rs(left), rs(right), prover, RandomRefuter(system, seed=seed), max_phases=50)
        assert transcript.outcome in (GameOutcome.ONGOING, GameOutcome.PROVER_WINS), transcript.to_text()
        assert transcript.pair_space == bound
        assert all(size_of_pair(r.pair_after, norms) <= bound for r in transcript.records)
