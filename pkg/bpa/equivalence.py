"""
Bisimulation approximants and the bounded eq-level oracle.

x ~_0 y always holds and x ~_{i+1} y holds when every transition of either
side is answered by a transition of the other landing in ~_i. The eq-level is
the largest i with x ~_i y. The oracle explores the pairs reachable from its
arguments up to a depth budget and never claims bisimilarity.
"""

import logging
import os
import sys
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Collection, Dict, List, Optional, Tuple, Union

from .bpa_core import BpaSystem
from .errors import OracleBudgetExceeded
from .lts import Side, Transition, successors, transitions
from .regular_strings import Pair, RegularString

DEFAULT_MEMO_CAP = 2_000_000
MEMO_CAP_ENV = "BPA_MEMO_CAP"


class EqLevelKind(Enum):
    EXACT = "Exact"
    AT_LEAST = "AtLeast"


@dataclass(frozen=True)
class EqLevelResult:
    """Exact(k): x ~_k y but not x ~_{k+1} y. AtLeast(k): x ~_k y, budget spent."""

    kind: EqLevelKind
    level: int

    @classmethod
    def exact(cls, level: int) -> "EqLevelResult":
        return cls(EqLevelKind.EXACT, level)

    @classmethod
    def at_least(cls, level: int) -> "EqLevelResult":
        return cls(EqLevelKind.AT_LEAST, level)

    @property
    def is_exact(self) -> bool:
        return self.kind is EqLevelKind.EXACT

    def rank(self) -> Tuple[int, int]:
        """Ordering key; AtLeast(k) ranks above Exact(k)."""
        return (self.level, 0 if self.is_exact else 1)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.level}"


@dataclass(frozen=True)
class Challenge:
    """A transition of one side of a pair and the eq-levels of the other side's answers."""

    side: Side
    transition: Transition
    responses: Tuple[Tuple[RegularString, EqLevelResult], ...]

    def pair_after(self, response: RegularString) -> Pair:
        """The next pair, oriented like the pair the challenge was taken from."""
        if self.side is Side.LEFT:
            return (self.transition.target, response)
        return (response, self.transition.target)

    def best_response(self) -> Optional[Tuple[RegularString, EqLevelResult]]:
        """The first response of maximal eq-level, or None when there is no answer."""
        best = None
        for response, level in self.responses:
            if best is None or level.rank() > best[1].rank():
                best = (response, level)
        return best


def memo_cap_from_env() -> int:
    value = os.getenv(MEMO_CAP_ENV)
    return int(value) if value else DEFAULT_MEMO_CAP


class EqLevelOracle:
    """
    Memoized min-max computation of bounded eq-levels for one system.

    The memo maps an ordered pair to either its exact eq-level or the largest
    depth at which the pair was certified equivalent, so queries at different
    depths share work. Queries are serialized by a lock.
    """

    def __init__(self, system: BpaSystem, memo_cap: Optional[int] = None):
        self.system = system
        self.memo_cap = memo_cap if memo_cap is not None else memo_cap_from_env()
        self.logger = logging.getLogger(self.__class__.__name__)
        self._memo: Dict[Pair, Tuple[bool, int]] = {}
        self._lock = threading.RLock()

    @property
    def memo_size(self) -> int:
        return len(self._memo)

    def eqlevel(self, x: RegularString, y: RegularString, depth: int) -> EqLevelResult:
        """
        Bounded eq-level of (x, y).

        The search deepens one level at a time up to `depth` and stops at the
        first level that tells the pair apart, so a low eq-level is found
        without exploring the tree at the full budget.

        Args:
            x: Canonical truncated string
            y: Canonical truncated string
            depth: Depth budget

        Returns:
            Exact(k) for k < depth, or AtLeast(depth)

        Raises:
            OracleBudgetExceeded: If the memo table outgrows its cap
        """
        if depth < 0:
            raise ValueError(f"depth must be non-negative, got {depth}")
        with self._lock:
            wanted = 8 * depth + 1000
            if sys.getrecursionlimit() < wanted:
                sys.setrecursionlimit(wanted)
            value = depth
            for level in range(1, depth + 1):
                value = self._level(x, y, level)
                if value < level:
                    break
        result = EqLevelResult.exact(value) if value < depth else EqLevelResult.at_least(depth)
        self.logger.debug(f"eqlevel({x}, {y}, depth={depth}) = {result} [memo {len(self._memo)}]")
        return result

    def approximates(self, x: RegularString, y: RegularString, level: int) -> bool:
        """Whether x ~_level y."""
        return not self.eqlevel(x, y, level).is_exact

    def challenges(self, x: RegularString, y: RegularString, depth: int) -> List["Challenge"]:
        """Every transition of either side with the eq-levels of all its responses."""
        found = []
        for side, left, right in ((Side.LEFT, x, y), (Side.RIGHT, y, x)):
            for transition in transitions(self.system, left):
                responses = tuple(
                    (response, self.eqlevel(transition.target, response, depth))
                    for response in successors(self.system, right, transition.action)
                )
                found.append(Challenge(side, transition, responses))
        return found

    def lowering_challenges(self, x: RegularString, y: RegularString, depth: int) -> List["Challenge"]:
        """
        Transitions after which every response has a strictly smaller eq-level.

        Empty unless eqlevel(x, y) is Exact at `depth`.
        """
        level = self.eqlevel(x, y, depth)
        if not level.is_exact:
            return []
        return [
            challenge
            for challenge in self.challenges(x, y, depth)
            if all(r.is_exact and r.level < level.level for _, r in challenge.responses)
        ]

    def _store(self, key: Pair, entry: Tuple[bool, int]) -> None:
        if key not in self._memo and len(self._memo) >= self.memo_cap:
            raise OracleBudgetExceeded(
                f"eq-level memo table exceeded {self.memo_cap} entries (set {MEMO_CAP_ENV} to raise it)"
            )
        self._memo[key] = entry

    def _level(self, x: RegularString, y: RegularString, depth: int) -> int:
        if depth == 0 or x == y:
            return depth
        key = (x, y) if x.sort_key() <= y.sort_key() else (y, x)
        entry = self._memo.get(key)
        if entry is not None:
            exact, value = entry
            if exact:
                return min(value, depth)
            if value >= depth:
                return depth

        best = depth
        for left, right in ((x, y), (y, x)):
            for challenge in transitions(self.system, left):
                responses = successors(self.system, right, challenge.action)
                if not responses:
                    best = 0
                    break
                limit = best - 1
                reply = -1
                for response in responses:
                    reply = max(reply, self._level(challenge.target, response, limit))
                    if reply >= limit:
                        break
                best = min(best, 1 + reply)
                if best == 0:
                    break
            if best == 0:
                break

        if best < depth:
            self._store(key, (True, best))
        else:
            self._store(key, (False, depth))
        return best


def shared_oracle(system: BpaSystem) -> EqLevelOracle:
    """The oracle attached to `system`, created on first use."""
    cache = system.cache("oracle")
    oracle = cache.get("shared")
    if oracle is None:
        oracle = cache.setdefault("shared", EqLevelOracle(system))
    return oracle


def eqlevel_bounded(
    system: BpaSystem,
    x: RegularString,
    y: RegularString,
    depth: int,
    oracle: Optional[EqLevelOracle] = None,
) -> EqLevelResult:
    """Bounded eq-level of (x, y) using `oracle` or the system's shared one."""
    return (oracle or shared_oracle(system)).eqlevel(x, y, depth)


Candidate = Union[Collection[Pair], Callable[[RegularString, RegularString], bool]]


def covers(system: BpaSystem, candidate: Candidate, pair: Pair) -> bool:
    """
    Whether `candidate` covers `pair`.

    Every transition x --a--> x' needs some y --a--> y' with (x', y') in the
    candidate, and every transition of y needs a matching one of x likewise.
    The candidate is a collection of pairs or a predicate on two strings.
    """
    if callable(candidate):
        contains = candidate
    else:
        members = candidate

        def contains(a: RegularString, b: RegularString) -> bool:
            return (a, b) in members

    x, y = pair
    for challenge in transitions(system, x):
        if not any(contains(challenge.target, r) for r in successors(system, y, challenge.action)):
            return False
    for challenge in transitions(system, y):
        if not any(contains(r, challenge.target) for r in successors(system, x, challenge.action)):
            return False
    return True
