"""
Integration tests for the bpa command line.
"""

import json
import logging

import pytest
from typer.testing import CliRunner

from bpa.equivalence import MEMO_CAP_ENV
from bpa_cli import EXIT_INCONCLUSIVE, EXIT_USAGE, app, main

GAME_EX2 = """\
start X ~ Y
1 referee check Continue
1 prover pass
1 refuter challenge right a -> eps
1 prover respond -> U => U ~ eps
2 referee check RefuterWins
# different enabled actions
RefuterWins
"""

HEAD_AND_TAIL = """\
target: A2 A1 ~ A1 A1 A1 A1
gen: A1 A1 A1 ~ A2
gen: A1 A1 A1 ~ A1 A1 A1
proof:
gen 1
gen 2
refl A1
concat 1 3
refl A1
concat 5 2
trans 6 4
sym 7
"""


@pytest.fixture
def runner():
    """Create CLI runner fixture."""
    return CliRunner()


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop the handlers the CLI installs on captured streams."""
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)


@pytest.fixture
def chain3_file(grammar_dir):
    """Create chain grammar path fixture."""
    return str(grammar_dir / "chain3.bpa")


@pytest.fixture
def dead_file(tmp_path):
    """Create grammar file fixture with a dead nonterminal."""
    path = tmp_path / "dead.bpa"
    path.write_text("nonterminals: A B\nactions: a\nrules:\nA a -> B\n")
    return str(path)


def lines(result):
    return result.stdout.splitlines()


def test_norms(runner, chain3_file, grammar_dir):
    """Test norms are printed one per line."""
    result = runner.invoke(app, ["norms", chain3_file])
    assert result.exit_code == 0
    assert lines(result) == ["A1 1", "A2 3", "A3 7"]

    result = runner.invoke(app, ["norms", str(grammar_dir / "ex2.bpa")])
    assert lines(result) == ["X omega", "Y 1", "U omega"]


def test_norms_json(runner, chain3_file):
    """Test the JSON norms report."""
    result = runner.invoke(app, ["norms", chain3_file, "--json"])
    report = json.loads(result.stdout)
    assert report["command"] == "norms"
    assert report["normed"] is True
    assert report["norms"][2] == {"nonterminal": "A3", "norm": 7}


def test_constants(runner, chain3_file):
    """Test the size constants."""
    result = runner.invoke(app, ["constants", chain3_file])
    assert result.exit_code == 0
    assert lines(result) == ["M 7", "M_rhs 6", "S_rhs 6", "E 518"]


def test_canon(runner):
    """Test canonical forms from parts and from literals."""
    result = runner.invoke(app, ["canon", "--prefix", "B A A", "--cycle", "B B A B B A B B A"])
    assert lines(result) == ["B A (A B B)^w"]
    result = runner.invoke(app, ["canon", "A (B A)^w"])
    assert lines(result) == ["(A B)^w"]
    result = runner.invoke(app, ["canon", "A (B"])
    assert result.exit_code == EXIT_USAGE


def test_step_and_path(runner, chain3_file):
    """Test one-step transitions and norm-reducing paths."""
    result = runner.invoke(app, ["step", chain3_file, "A2 A1"])
    assert lines(result) == ["a -> A1 A1 A1", "1 transitions"]
    result = runner.invoke(app, ["path", chain3_file, "A2"])
    assert lines(result) == ["A2", "--a--> A1 A1", "--a--> A1", "--a--> eps"]
    result = runner.invoke(app, ["path", chain3_file, "A2", "-n", "5"])
    assert result.exit_code == EXIT_USAGE


def test_eqlevel(runner, chain3_file, grammar_dir):
    """Test bounded eq-levels with default and explicit depths."""
    result = runner.invoke(app, ["eqlevel", chain3_file, "A3", "A2"])
    assert lines(result)[-1] == "Exact 3"
    result = runner.invoke(app, ["eqlevel", chain3_file, "A3", "A2", "--depth", "3"])
    assert lines(result)[-1] == "AtLeast 3"
    ex2 = str(grammar_dir / "ex2.bpa")
    result = runner.invoke(app, ["eqlevel", ex2, "X", "Y", "-d", "8"])
    assert lines(result)[-1] == "Exact 1"
    result = runner.invoke(app, ["eqlevel", ex2, "X", "Y"])
    assert result.exit_code == EXIT_USAGE
    assert "--depth is required" in result.output


def test_eqlevel_json(runner, grammar_dir):
    """Test the JSON eq-level report."""
    result = runner.invoke(app, ["eqlevel", str(grammar_dir / "xyz.bpa"), "X", "Y", "--json"])
    report = json.loads(result.stdout)
    assert report["kind"] == "Exact"
    assert report["level"] == 1
    assert report["verdict"] == "Exact 1"


def test_memo_cap_env(runner, chain3_file, monkeypatch):
    """Test an exhausted memo table is inconclusive."""
    monkeypatch.setenv(MEMO_CAP_ENV, "1")
    result = runner.invoke(app, ["eqlevel", chain3_file, "A3", "A2"])
    assert result.exit_code == EXIT_INCONCLUSIVE
    assert "inconclusive" in result.output


def test_decide_normed(runner, chain3_file, grammar_dir):
    """Test the normed decision procedure."""
    result = runner.invoke(app, ["decide-normed", chain3_file, "A3", "A2"])
    assert result.exit_code == 0
    assert lines(result) == ["bound 57", "NotBisimilar(3)"]
    result = runner.invoke(app, ["decide-normed", chain3_file, "A2 A1", "A1 A1 A1 A1"])
    assert lines(result)[-1] == "Bisimilar"
    result = runner.invoke(app, ["decide-normed", str(grammar_dir / "ex2.bpa"), "X", "Y"])
    assert result.exit_code == EXIT_USAGE


def test_game_transcript(runner, grammar_dir):
    """Test the transcript of a won play."""
    result = runner.invoke(app, ["game", str(grammar_dir / "ex2.bpa"), "X", "Y"])
    assert result.exit_code == 0
    assert result.stdout == GAME_EX2


def test_game_cutoff(runner, grammar_dir):
    """Test a cut-off play reports Ongoing."""
    result = runner.invoke(
        app,
        ["game", str(grammar_dir / "ex2.bpa"), "X", "X", "--refuter", "random", "--max-phases", "3"],
    )
    assert result.exit_code == 0
    assert lines(result)[-1] == "Ongoing(3)"


def test_game_sound_refuter_inconclusive(runner, grammar_dir):
    """Test the sound refuter gives up on a bisimilar pair with exit status 2."""
    result = runner.invoke(app, ["game", str(grammar_dir / "renamed_copy.bpa"), "X", "X2"])
    assert result.exit_code == EXIT_INCONCLUSIVE
    assert lines(result)[-1] == "Inconclusive"
    assert "no certified difference" in result.stdout


def test_game_outputs(runner, grammar_dir, tmp_path):
    """Test JSON reports and transcript files."""
    target = tmp_path / "play.json"
    result = runner.invoke(
        app, ["game", str(grammar_dir / "xyz.bpa"), "X", "Y", "--json", "-o", str(target)]
    )
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["verdict"] == "RefuterWins"
    assert report["phases"] == 2
    assert json.loads(target.read_text())["verdict"] == "RefuterWins"

    text_target = tmp_path / "play.txt"
    runner.invoke(app, ["game", str(grammar_dir / "xyz.bpa"), "X", "Y", "-o", str(text_target)])
    assert text_target.read_text().splitlines()[-1] == "RefuterWins"


def test_game_random_players(runner, grammar_dir):
    """Test random players run to a verdict line."""
    result = runner.invoke(
        app,
        [
            "game",
            str(grammar_dir / "renamed_copy.bpa"),
            "X",
            "X2",
            "--prover",
            "random",
            "--refuter",
            "random",
            "--seed",
            "7",
            "--max-phases",
            "5",
        ],
    )
    assert result.exit_code == 0
    assert lines(result)[-1] in {"ProverWins", "RefuterWins", "Ongoing(5)"}


def test_game_unknown_strategy(runner, grammar_dir):
    """Test unknown strategy names are usage errors."""
    result = runner.invoke(app, ["game", str(grammar_dir / "xyz.bpa"), "X", "Y", "--prover", "sound"])
    assert result.exit_code == EXIT_USAGE


def test_game_interactive(runner, grammar_dir):
    """Test a human Prover choosing from numbered menus."""
    result = runner.invoke(
        app, ["game", str(grammar_dir / "two_eps.bpa"), "X", "Y", "--interactive", "--refuter", "random"], input="1\n1\n"
    )
    assert result.exit_code == 0
    assert "ProverWins" in result.stdout.splitlines()[-1]


def test_solve(runner, grammar_dir, chain3_file):
    """Test the exhaustive solver verdicts."""
    result = runner.invoke(app, ["solve", str(grammar_dir / "xyz.bpa"), "X", "Y"])
    assert result.exit_code == 0
    assert lines(result)[-1] == "RefuterWins"
    assert lines(result)[0].startswith("configurations ")
    result = runner.invoke(app, ["solve", str(grammar_dir / "two_eps.bpa"), "X", "Y"])
    assert lines(result)[-1] == "ProverWins"
    result = runner.invoke(app, ["solve", chain3_file, "A3", "A2", "--max-configs", "3"])
    assert result.exit_code == EXIT_INCONCLUSIVE
    assert "BudgetExceeded" in lines(result)


def test_check_decomp(runner, chain3_file, tmp_path):
    """Test valid and invalid decomposition files."""
    valid = tmp_path / "valid.dec"
    valid.write_text(HEAD_AND_TAIL)
    result = runner.invoke(app, ["check-decomp", chain3_file, str(valid)])
    assert result.exit_code == 0
    assert lines(result) == ["footprint 8", "Valid"]

    invalid = tmp_path / "invalid.dec"
    invalid.write_text("target: A2 ~ A1 A1 A1\ngen: A2 ~ A1 A1 A1\nproof:\ngen 1\n")
    result = runner.invoke(app, ["check-decomp", chain3_file, str(invalid)])
    assert result.exit_code == 0
    assert lines(result)[0].startswith("reason: generator 1 is not smaller")
    assert lines(result)[-1] == "Invalid"

    malformed = tmp_path / "malformed.dec"
    malformed.write_text("target: A2 ~ A1\nproof:\nsplit 1\n")
    result = runner.invoke(app, ["check-decomp", chain3_file, str(malformed)])
    assert result.exit_code == EXIT_USAGE


def test_schema(runner):
    """Test report schemas are printed as JSON."""
    result = runner.invoke(app, ["schema", "game"])
    assert result.exit_code == 0
    assert "verdict" in json.loads(result.stdout)["properties"]
    result = runner.invoke(app, ["schema", "nothing"])
    assert result.exit_code == EXIT_USAGE


def test_grammar_errors(runner, tmp_path):
    """Test unreadable and malformed grammars exit with a diagnostic."""
    result = runner.invoke(app, ["norms", str(tmp_path / "missing.bpa")])
    assert result.exit_code == EXIT_USAGE
    assert "error:" in result.output

    broken = tmp_path / "broken.bpa"
    broken.write_text("nonterminals: A\nactions: a\nrules:\nA b -> eps\n")
    result = runner.invoke(app, ["norms", str(broken)])
    assert result.exit_code == EXIT_USAGE
    assert "line 4, column 3" in result.output


def test_complete_dead(runner, dead_file):
    """Test dead nonterminals are rejected unless completed."""
    result = runner.invoke(app, ["norms", dead_file])
    assert result.exit_code == EXIT_USAGE
    assert "dead nonterminals: B" in result.output
    result = runner.invoke(app, ["--complete-dead", "norms", dead_file])
    assert result.exit_code == 0
    assert lines(result) == ["A omega", "B omega", "D omega"]


def test_missing_config(runner, chain3_file, tmp_path):
    """Test an explicit configuration file must exist."""
    result = runner.invoke(app, ["--config", str(tmp_path / "none.yaml"), "norms", chain3_file])
    assert result.exit_code == EXIT_USAGE


def test_config_depth(runner, grammar_dir, tmp_path):
    """Test the oracle depth setting of a configuration file."""
    config = tmp_path / "bpa.yaml"
    config.write_text("oracle:\n  depth: 4\n")
    result = runner.invoke(
        app, ["--config", str(config), "eqlevel", str(grammar_dir / "two_eps.bpa"), "X", "Y"]
    )
    assert lines(result)[-1] == "AtLeast 4"


def test_main_usage_error(capsys):
    """Test usage errors exit with status 1."""
    with pytest.raises(SystemExit) as excinfo:
        main(["norms"])
    assert excinfo.value.code == EXIT_USAGE


def test_main_success(chain3_file, capsys):
    """Test the console entry point exits cleanly."""
    with pytest.raises(SystemExit) as excinfo:
        main(["constants", chain3_file])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.splitlines()[-1] == "E 518"
