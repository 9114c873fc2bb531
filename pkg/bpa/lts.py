"""
The labelled transition system over canonical truncated regular strings.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .bpa_core import BpaSystem, Rule, Word
from .errors import ContractViolation
from .regular_strings import RegularString, concat, norm_of, truncate_unnormed


class Side(Enum):
    """Which string of a pair a transition is taken from."""

    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass(frozen=True)
class Transition:
    """x --action--> target, produced by `rule` applied at the head of x."""

    action: str
    target: RegularString
    rule: Optional[Rule] = field(default=None, compare=False)


@dataclass(frozen=True)
class PathWitness:
    actions: Tuple[str, ...]
    states: Tuple[RegularString, ...]

    @property
    def start(self) -> RegularString:
        return self.states[0]

    @property
    def end(self) -> RegularString:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.actions)


def transitions(system: BpaSystem, x: RegularString) -> Tuple[Transition, ...]:
    """
    One-step transitions of x, in rule declaration order.

    The head rule body replaces the head symbol; the result is canonicalized and
    truncated after its first unnormed nonterminal.
    """
    cache = system.cache("transitions")
    found = cache.get(x)
    if found is not None:
        return found
    head = x.head
    if head is None:
        result: Tuple[Transition, ...] = ()
    else:
        tail = x.tail()
        norms = system.norms
        result = tuple(
            Transition(
                rule.action,
                truncate_unnormed(concat(RegularString.of(rule.body), tail), norms),
                rule,
            )
            for rule in system.rules_for(head)
        )
    cache[x] = result
    return result


def enabled_actions(system: BpaSystem, x: RegularString) -> FrozenSet[str]:
    return frozenset(t.action for t in transitions(system, x))


def successors(system: BpaSystem, x: RegularString, action: str) -> List[RegularString]:
    """Distinct targets of `action`-transitions of x, in first-seen order."""
    targets: List[RegularString] = []
    for transition in transitions(system, x):
        if transition.action == action and transition.target not in targets:
            targets.append(transition.target)
    return targets


def norm_reducing_path(system: BpaSystem, x: RegularString, steps: int) -> PathWitness:
    """
    A path of `steps` transitions from x, each lowering the norm by exactly 1.

    At every state the first rule (declaration order) of the head whose body
    norm is the head norm minus one is taken.

    Raises:
        ContractViolation: If x is unnormed or steps exceeds its norm
    """
    norms = system.norms
    norm = norm_of(x, norms)
    if norm.is_omega:
        raise ContractViolation(f"norm_reducing_path needs a normed string, got {x}")
    if steps < 0 or steps > norm.finite:
        raise ContractViolation(f"cannot take {steps} norm-reducing steps from {x} (norm {norm})")

    actions: List[str] = []
    states = [x]
    current = x
    for _ in range(steps):
        head = current.head
        wanted = norms[head].finite - 1  # type: ignore[index]
        rule = next(r for r in system.rules_for(head) if norms.word_norm(r.body) == wanted)  # type: ignore[arg-type]
        current = concat(RegularString.of(rule.body), current.tail())
        actions.append(rule.action)
        states.append(current)
    return PathWitness(tuple(actions), tuple(states))


def norm_reducing_erasure(system: BpaSystem, x: RegularString) -> PathWitness:
    """The greedy norm-reducing path from a normed x down to eps."""
    return norm_reducing_path(system, x, norm_of(x, system.norms).finite)


def fixed_pair_path(system: BpaSystem, a1: str, a2: str) -> Tuple[Tuple[str, ...], Word]:
    """
    The fixed norm-reducing path A2 --u--> gamma with |u| = ||A1||.

    The same (u, gamma) is returned on every call for a given system, so that
    constructions replaying it see one fixing per nonterminal pair.
    """
    cache = system.cache("fixed_pair_path")
    key = (a1, a2)
    if key in cache:
        return cache[key]
    norms = system.norms
    n1, n2 = norms[a1], norms[a2]
    if n1.is_omega or n2.is_omega:
        raise ContractViolation(f"fixed_pair_path needs normed nonterminals, got {a1}, {a2}")
    if n1 > n2:
        raise ContractViolation(f"fixed_pair_path needs ||{a1}|| <= ||{a2}||")
    path = norm_reducing_path(system, RegularString.of((a2,)), n1.finite)
    result = (path.actions, path.end.prefix)
    cache[key] = result
    return result


def iter_matching_paths(
    system: BpaSystem, x: RegularString, actions: Sequence[str]
) -> Iterator[PathWitness]:
    """All paths from x labelled by the action word, depth-first in rule order."""

    def walk(state: RegularString, index: int, trail: Tuple[RegularString, ...]) -> Iterator[PathWitness]:
        if index == len(actions):
            yield PathWitness(tuple(actions), trail)
            return
        for transition in transitions(system, state):
            if transition.action == actions[index]:
                yield from walk(transition.target, index + 1, trail + (transition.target,))

    yield from walk(x, 0, (x,))


def matching_paths(system: BpaSystem, x: RegularString, actions: Sequence[str]) -> List[PathWitness]:
    return list(iter_matching_paths(system, x, actions))


def matching_ends(system: BpaSystem, x: RegularString, actions: Sequence[str]) -> List[RegularString]:
    """Distinct end states of the paths matching `actions`, in enumeration order."""
    frontier: List[RegularString] = [x]
    for action in actions:
        reached: Dict[RegularString, None] = {}
        for state in frontier:
            for target in successors(system, state, action):
                reached.setdefault(target, None)
        frontier = list(reached)
    return frontier
