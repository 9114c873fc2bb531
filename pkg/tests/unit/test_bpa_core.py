"""
Unit tests for BPA systems, grammar parsing, norms and constants.
"""

from collections import deque

import pytest
from hypothesis import given, settings

from bpa.bpa_core import (
    OMEGA,
    ExtNat,
    complete_dead,
    completion_symbol,
    compute_norms,
    dead_nonterminals,
    fresh_name,
    parse_system,
    serialize_system,
    validate,
)
from bpa.errors import (
    ContractViolation,
    DeadNonterminalError,
    EmptyDeclarationError,
    GrammarSyntaxError,
    UndeclaredSymbolError,
)
from tests.conftest import SYMBOLS, chain_text, systems


@pytest.fixture
def dead_system():
    """Create system fixture with a dead nonterminal B."""
    return parse_system("nonterminals: A B\nactions: a\nrules:\nA a -> B\n")


def test_extnat_arithmetic():
    """Test omega absorbs addition and subtraction."""
    assert ExtNat(2) + 3 == 5
    assert OMEGA + 4 == OMEGA
    assert OMEGA - 4 == OMEGA
    assert ExtNat(3) < OMEGA
    assert str(OMEGA) == "omega"
    assert str(ExtNat(7)) == "7"


def test_extnat_rejects_negative():
    """Test negative values are refused."""
    with pytest.raises(ContractViolation):
        ExtNat(-1)
    with pytest.raises(ContractViolation):
        OMEGA.finite


def test_parse_chain(chain3):
    """Test parsing keeps declaration order and rule text."""
    assert chain3.nonterminals == ("A1", "A2", "A3")
    assert chain3.actions == ("a",)
    assert [str(rule) for rule in chain3.rules] == [
        "A3 a -> A2 A2",
        "A2 a -> A1 A1",
        "A1 a -> eps",
    ]


def test_serialize_reparses(chain3):
    """Test serialized grammar text parses to the same system."""
    assert parse_system(serialize_system(chain3)) == chain3


def test_undeclared_action_position():
    """Test undeclared symbols are reported with line and column."""
    text = "nonterminals: A\nactions: a\nrules:\nA b -> eps\n"
    with pytest.raises(UndeclaredSymbolError) as excinfo:
        parse_system(text)
    assert excinfo.value.symbol == "b"
    assert (excinfo.value.line, excinfo.value.column) == (4, 3)


def test_undeclared_body_symbol():
    """Test an undeclared body nonterminal is rejected."""
    with pytest.raises(UndeclaredSymbolError) as excinfo:
        parse_system("nonterminals: A\nactions: a\nrules:\nA a -> A Q\n")
    assert excinfo.value.symbol == "Q"


def test_missing_header():
    """Test text before any section header is a syntax error."""
    with pytest.raises(GrammarSyntaxError) as excinfo:
        parse_system("A a -> eps\n")
    assert (excinfo.value.line, excinfo.value.column) == (1, 1)


def test_missing_arrow():
    """Test a rule without an arrow is a syntax error."""
    with pytest.raises(GrammarSyntaxError):
        parse_system("nonterminals: A\nactions: a\nrules:\nA a A\n")


def test_empty_declarations():
    """Test empty nonterminal or action sets are rejected."""
    with pytest.raises(EmptyDeclarationError):
        parse_system("nonterminals: A\nrules:\n")
    with pytest.raises(EmptyDeclarationError):
        parse_system("actions: a\nrules:\n")


def test_validate_dead(dead_system):
    """Test validation reports dead nonterminals."""
    assert dead_nonterminals(dead_system) == ("B",)
    with pytest.raises(DeadNonterminalError) as excinfo:
        validate(dead_system)
    assert excinfo.value.symbols == ("B",)


def test_complete_dead(dead_system):
    """Test dead completion adds a looping symbol and action."""
    completed = complete_dead(dead_system)
    validate(completed)
    assert completed.nonterminals == ("A", "B", "D")
    assert completed.actions == ("a", "d")
    assert "B d -> B" in [str(rule) for rule in completed.rules]
    assert "D d -> D" in [str(rule) for rule in completed.rules]
    assert completion_symbol(dead_system, completed) == "D"
    assert completed.norms["A"] == OMEGA


def test_complete_dead_is_identity_without_dead(chain3):
    """Test completion leaves live systems unchanged."""
    assert complete_dead(chain3) is chain3
    assert completion_symbol(chain3, chain3) is None


def test_fresh_name():
    """Test fresh names avoid taken identifiers."""
    assert fresh_name("D", {"A"}) == "D"
    assert fresh_name("D", {"D", "D1"}) == "D2"


@pytest.mark.parametrize("length", [1, 2, 5, 10, 20])
def test_chain_norms_double(length):
    """Test chain norms are 2^i - 1."""
    system = parse_system(chain_text(length))
    norms = compute_norms(system)
    for i in range(1, length + 1):
        assert norms[f"A{i}"] == 2 ** i - 1


def test_unnormed_norms(ex2):
    """Test nonterminals that cannot terminate get omega."""
    norms = ex2.norms
    assert norms["X"] == OMEGA
    assert norms["Y"] == 1
    assert norms["U"] == OMEGA
    assert not ex2.is_normed


def test_chain_constants(chain3):
    """Test M, M_rhs, S_rhs and E of the chain."""
    c = chain3.constants
    assert (c.M, c.M_rhs, c.S_rhs, c.E) == (7, 6, 6, 518)
    assert c.decomposition_threshold == 2 * 7 + 518
    assert c.prover_pair_space == 2 * (2 * 7 + 2 * 518 + 6)


def test_renamed_copy_constants(renamed_copy):
    """Test constants of the renamed copy system."""
    c = renamed_copy.constants
    assert (c.M, c.M_rhs, c.S_rhs, c.E) == (1, 2, 2, 108)
    assert c.prover_pair_space == 440


def test_constants_unnormed(ex2):
    """Test unnormed rule bodies only contribute their normed prefix."""
    c = ex2.constants
    assert c.M == 1
    assert c.M_rhs == 0
    assert c.S_rhs == 0
    assert c.E == (2 + 9 * 0 + 0) * 1


def shortest_erasure(system, symbol, max_length=7):
    """Breadth-first search for the empty word; erasures never need longer words."""
    seen = {(symbol,)}
    queue = deque([((symbol,), 0)])
    while queue:
        word, distance = queue.popleft()
        if not word:
            return ExtNat(distance)
        for rule in system.rules_for(word[0]):
            successor = rule.body + word[1:]
            if len(successor) <= max_length and successor not in seen:
                seen.add(successor)
                queue.append((successor, distance + 1))
    return OMEGA


@given(systems)
@settings(max_examples=200, deadline=None)
def test_norms_match_shortest_erasure(system):
    """Test saturation norms agree with a breadth-first erasure search."""
    norms = compute_norms(system)
    for symbol in SYMBOLS:
        assert norms[symbol] == shortest_erasure(system, symbol)


@given(systems)
@settings(max_examples=200, deadline=None)
def test_complete_dead_is_idempotent(system):
    """Test dead completion leaves nothing dead, keeps norms and is stable."""
    completed = complete_dead(system)
    validate(completed)
    assert complete_dead(completed) is completed
    assert completed.rules[: len(system.rules)] == system.rules
    for symbol in system.nonterminals:
        assert completed.norms[symbol] == system.norms[symbol]


@given(systems)
@settings(max_examples=200, deadline=None)
def test_constants_are_ordered(system):
    """Test M_rhs never exceeds S_rhs and E covers both."""
    c = system.constants
    assert c.M_rhs <= c.S_rhs
    assert c.E >= 2 * c.M + c.S_rhs
    assert c.prover_pair_space == 2 * (2 * c.M + 2 * c.E + c.S_rhs)
