"""
Shared fixtures for the bpa-bisim test suite.
"""

from pathlib import Path

import pytest
from hypothesis import strategies as st

from bpa.bpa_core import BpaSystem, Rule, parse_system
from bpa.regular_strings import RegularString, canonicalize, parse_regular_string, truncate_unnormed

GRAMMAR_DIR = Path(__file__).resolve().parent.parent / "grammars"

SYMBOLS = ("A", "B", "C")
ACTIONS = ("a", "b")

words = st.lists(st.sampled_from(SYMBOLS), max_size=3).map(tuple)
rules = st.builds(
    Rule,
    st.sampled_from(SYMBOLS),
    st.sampled_from(ACTIONS),
    st.lists(st.sampled_from(SYMBOLS), max_size=2).map(tuple),
)
systems = st.lists(rules, max_size=6).map(
    lambda found: BpaSystem(SYMBOLS, ACTIONS, tuple(dict.fromkeys(found)))
)


@st.composite
def normed_systems(draw):
    """Random systems where each symbol can erase itself through the symbols declared before it."""
    found = []
    for index, symbol in enumerate(SYMBOLS):
        body = draw(st.lists(st.sampled_from(SYMBOLS[:index]), max_size=2)) if index else []
        found.append(Rule(symbol, draw(st.sampled_from(ACTIONS)), tuple(body)))
    found.extend(draw(st.lists(rules, max_size=3)))
    return BpaSystem(SYMBOLS, ACTIONS, tuple(dict.fromkeys(found)))


def strings(system: BpaSystem, periodic: bool = True):
    """Canonical truncated strings of `system` with a prefix and a cycle of up to three symbols."""
    cycles = words if periodic else st.just(())
    return st.builds(lambda p, c: truncate_unnormed(canonicalize(p, c), system.norms), words, cycles)


def load(name: str) -> BpaSystem:
    return parse_system((GRAMMAR_DIR / f"{name}.bpa").read_text())


def chain_text(length: int) -> str:
    """Grammar text of the doubling chain A1 ... A<length>."""
    symbols = [f"A{i}" for i in range(1, length + 1)]
    rules = ["A1 a -> eps"]
    rules += [f"A{i} a -> A{i - 1} A{i - 1}" for i in range(2, length + 1)]
    return f"nonterminals: {' '.join(symbols)}\nactions: a\nrules:\n" + "\n".join(rules) + "\n"


def rs(text: str) -> RegularString:
    """Shorthand for parse_regular_string."""
    return parse_regular_string(text)


@pytest.fixture
def grammar_dir():
    """Create grammar directory fixture."""
    return GRAMMAR_DIR


@pytest.fixture
def chain3():
    """Create doubling-chain system fixture (norms 1, 3, 7)."""
    return load("chain3")


@pytest.fixture
def xyz():
    """Create system fixture where X stops after one a and Y after two."""
    return load("xyz")


@pytest.fixture
def ex2():
    """Create unnormed system fixture with a looping U."""
    return load("ex2")


@pytest.fixture
def two_eps():
    """Create system fixture with two bisimilar one-step nonterminals."""
    return load("two_eps")


@pytest.fixture
def renamed_copy():
    """Create system fixture holding a renamed copy of a recursive process."""
    return load("renamed_copy")


@pytest.fixture
def branching():
    """Create system fixture where Y can do an extra action b."""
    return parse_system(
        "nonterminals: X Y\nactions: a b\nrules:\nX a -> eps\nY a -> eps\nY b -> eps\n"
    )
