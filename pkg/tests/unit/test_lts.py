"""
Unit tests for the labelled transition system.
"""

from itertools import product

import pytest
from hypothesis import given, settings

from bpa.errors import ContractViolation
from bpa.lts import (
    Side,
    enabled_actions,
    fixed_pair_path,
    matching_ends,
    matching_paths,
    norm_reducing_erasure,
    norm_reducing_path,
    successors,
    transitions,
)
from bpa.regular_strings import (
    EPSILON,
    canonicalize,
    cycle_size,
    prefix_size,
    rotations,
    size_of,
    truncate_unnormed,
)
from tests.conftest import SYMBOLS, rs, systems


def test_side_other():
    """Test sides flip."""
    assert Side.LEFT.other is Side.RIGHT
    assert Side.RIGHT.other is Side.LEFT


def test_transitions_replace_head(chain3):
    """Test the head rule body replaces the head symbol."""
    steps = transitions(chain3, rs("A2 A1"))
    assert [(t.action, t.target) for t in steps] == [("a", rs("A1 A1 A1"))]
    assert str(steps[0].rule) == "A2 a -> A1 A1"


def test_transitions_of_empty(chain3):
    """Test the empty string has no transitions."""
    assert transitions(chain3, EPSILON) == ()
    assert enabled_actions(chain3, EPSILON) == frozenset()


def test_transitions_of_infinite(chain3):
    """Test transitions unroll the cycle and stay canonical."""
    steps = transitions(chain3, rs("(A1)^w"))
    assert [t.target for t in steps] == [rs("(A1)^w")]


def test_transitions_truncate(ex2):
    """Test targets are truncated after an unnormed nonterminal."""
    steps = transitions(ex2, rs("X Y"))
    assert [t.target for t in steps] == [rs("U")]


def test_successors_in_rule_order(ex2):
    """Test successors are distinct and in declaration order."""
    assert successors(ex2, rs("Y"), "a") == [rs("U"), EPSILON]
    assert successors(ex2, rs("U"), "a") == [rs("U")]
    assert successors(ex2, rs("U"), "b") == []
    assert enabled_actions(ex2, rs("Y")) == frozenset({"a"})


def test_norm_reducing_path(chain3):
    """Test each step lowers the norm by one."""
    path = norm_reducing_path(chain3, rs("A2"), 3)
    assert path.actions == ("a", "a", "a")
    assert path.states == (rs("A2"), rs("A1 A1"), rs("A1"), EPSILON)
    assert path.start == rs("A2")
    assert path.end == EPSILON
    assert len(path) == 3


def test_norm_reducing_path_limits(chain3, ex2):
    """Test too many steps or unnormed starts are refused."""
    with pytest.raises(ContractViolation):
        norm_reducing_path(chain3, rs("A2"), 4)
    with pytest.raises(ContractViolation):
        norm_reducing_path(ex2, rs("X"), 1)
    with pytest.raises(ContractViolation):
        norm_reducing_path(chain3, rs("(A1)^w"), 1)


def test_norm_reducing_erasure(chain3):
    """Test erasure reaches eps in norm-many steps."""
    path = norm_reducing_erasure(chain3, rs("A3"))
    assert len(path) == 7
    assert path.end == EPSILON


def test_fixed_pair_path(chain3):
    """Test the fixed path from A2 has length norm(A1)."""
    u, gamma = fixed_pair_path(chain3, "A1", "A2")
    assert u == ("a",)
    assert gamma == ("A1", "A1")
    assert fixed_pair_path(chain3, "A1", "A2") is fixed_pair_path(chain3, "A1", "A2")
    assert fixed_pair_path(chain3, "A1", "A1") == (("a",), ())


def test_fixed_pair_path_order(chain3, ex2):
    """Test fixed paths need normed nonterminals in norm order."""
    with pytest.raises(ContractViolation):
        fixed_pair_path(chain3, "A3", "A2")
    with pytest.raises(ContractViolation):
        fixed_pair_path(ex2, "Y", "X")


def test_matching_paths(ex2):
    """Test paths labelled by an action word."""
    paths = matching_paths(ex2, rs("Y"), ["a", "a"])
    assert [p.states for p in paths] == [(rs("Y"), rs("U"), rs("U"))]
    assert matching_ends(ex2, rs("Y"), ["a"]) == [rs("U"), EPSILON]
    assert matching_ends(ex2, rs("Y"), []) == [rs("Y")]
    assert matching_ends(ex2, rs("Y"), ["b"]) == []


def states_up_to(system, max_size=12):
    """Canonical truncated strings with a prefix and a cycle of up to three symbols, by size."""
    words = [w for n in range(4) for w in product(SYMBOLS, repeat=n)]
    found = {truncate_unnormed(canonicalize(p, c), system.norms) for p in words for c in words}
    return [x for x in found if size_of(x, system.norms) <= max_size]


@given(systems)
@settings(max_examples=100, deadline=None)
def test_step_keeps_cycle_and_bounds_prefix_growth(system):
    """Test every transition rotates or drops the cycle and grows the prefix by at most S_rhs."""
    norms = system.norms
    growth = system.constants.S_rhs
    for x in states_up_to(system):
        for step in transitions(system, x):
            y = step.target
            assert y.cycle == () or y.cycle in rotations(x.cycle), (x, y)
            assert cycle_size(y, norms) <= cycle_size(x, norms)
            assert prefix_size(y, norms) <= prefix_size(x, norms) + growth, (x, y)
