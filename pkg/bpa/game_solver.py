"""
Exhaustive solver for the space-bounded game.

The configuration graph is built breadth-first from the initial pair. Prover
positions are the decomposition choice and the answer to a challenge; Refuter
positions are the pair pick and the challenge. Refuter's attractor to his
terminal wins is the least fixpoint; every other position is a Prover win,
infinite plays included.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Tuple, Union

import structlog

from .bpa_core import BpaSystem
from .decomposition import decomposition_footprint, format_pair, prover_decompositions
from .errors import ContractViolation
from .game import DEFAULT_ORACLE_DEPTH, TerminalResult, default_spaces, terminal_check
from .lts import Side, transitions, successors
from .regular_strings import Pair, RegularString, size_of_pair

log = structlog.get_logger(__name__)

DEFAULT_MAX_CONFIGS = 200_000


class SolverVerdict(Enum):
    REFUTER_WINS = "RefuterWins"
    PROVER_WINS = "ProverWins"
    BUDGET_EXCEEDED = "BudgetExceeded"


@dataclass
class SolveResult:
    verdict: SolverVerdict
    configurations: int
    attractor_size: int = 0
    pair_space: int = 0
    free_space: int = 0
    reason: str = ""

    @property
    def conclusive(self) -> bool:
        return self.verdict is not SolverVerdict.BUDGET_EXCEEDED

    def to_dict(self) -> Dict[str, object]:
        return {
            "verdict": self.verdict.value,
            "configurations": self.configurations,
            "attractor_size": self.attractor_size,
            "pair_space": self.pair_space,
            "free_space": self.free_space,
            "reason": self.reason,
        }


# Node keys. A leaf "lost" node is Refuter's terminal win.
Node = Tuple
LOST: Node = ("lost",)


@dataclass
class _NodeInfo:
    refuter_moves: bool
    successors: List[Node] = field(default_factory=list)


class _BudgetExceeded(Exception):
    pass


class GameSolver:
    """Builds the configuration graph and computes Refuter's attractor."""

    def __init__(
        self,
        system: BpaSystem,
        pair_space: int,
        free_space: int,
        max_configs: int = DEFAULT_MAX_CONFIGS,
        oracle_depth: int = DEFAULT_ORACLE_DEPTH,
    ):
        self.system = system
        self.norms = system.norms
        self.pair_space = pair_space
        self.free_space = free_space
        self.max_configs = max_configs
        self.oracle_depth = oracle_depth
        self.logger = logging.getLogger(self.__class__.__name__)
        self.nodes: Dict[Node, _NodeInfo] = {}

    def _fits(self, pair: Pair) -> bool:
        return size_of_pair(pair, self.norms) <= self.pair_space

    def _expand(self, node: Node) -> _NodeInfo:
        kind = node[0]
        if kind == "lost":
            return _NodeInfo(refuter_moves=True)

        if kind == "pair":
            pair = node[1]
            result = terminal_check(self.system, pair)
            if result is TerminalResult.REFUTER_WINS:
                return _NodeInfo(refuter_moves=True, successors=[LOST])
            if result is TerminalResult.PROVER_WINS:
                # Prover position without moves: never attracted
                return _NodeInfo(refuter_moves=False, successors=[])
            moves: List[Node] = [("challenge", pair)]
            offers = prover_decompositions(self.system, pair, self.oracle_depth, validate_with_oracle=False)
            for candidate in offers:
                if decomposition_footprint(candidate, self.norms) > self.free_space:
                    continue
                if not all(self._fits(g) for g in candidate.generators):
                    continue
                moves.append(("offer", tuple(candidate.generators)))
            return _NodeInfo(refuter_moves=False, successors=moves)

        if kind == "offer":
            return _NodeInfo(refuter_moves=True, successors=[("pair", g) for g in node[1]])

        if kind == "challenge":
            x, y = node[1]
            moves = []
            for side, source in ((Side.LEFT, x), (Side.RIGHT, y)):
                for transition in transitions(self.system, source):
                    move = ("respond", node[1], side, transition.action, transition.target)
                    if move not in moves:
                        moves.append(move)
            return _NodeInfo(refuter_moves=True, successors=moves)

        # respond: Prover answers from the other side
        _, (x, y), side, action, target = node
        answerer = y if side is Side.LEFT else x
        answers: List[Node] = []
        for response in successors(self.system, answerer, action):
            pair = (target, response) if side is Side.LEFT else (response, target)
            answers.append(("pair", pair) if self._fits(pair) else LOST)
        if not answers:
            answers.append(LOST)
        return _NodeInfo(refuter_moves=False, successors=answers)

    def build(self, start: Pair) -> None:
        """
        Breadth-first construction of every position reachable from `start`.

        Raises:
            _BudgetExceeded: If more than `max_configs` positions are reached
        """
        root: Node = ("pair", start)
        queue: Deque[Node] = deque([root])
        self.nodes = {}
        seen = {root}
        while queue:
            node = queue.popleft()
            info = self._expand(node)
            self.nodes[node] = info
            for following in info.successors:
                if following not in seen:
                    seen.add(following)
                    if len(seen) > self.max_configs:
                        raise _BudgetExceeded()
                    queue.append(following)

    def attractor(self) -> set:
        """Least fixpoint of Refuter's controlled predecessors of LOST."""
        predecessors: Dict[Node, List[Node]] = {node: [] for node in self.nodes}
        pending: Dict[Node, int] = {}
        for node, info in self.nodes.items():
            pending[node] = len(set(info.successors))
            for following in set(info.successors):
                predecessors[following].append(node)

        won = {LOST} if LOST in self.nodes else set()
        queue: Deque[Node] = deque(won)
        while queue:
            node = queue.popleft()
            for parent in predecessors[node]:
                if parent in won:
                    continue
                info = self.nodes[parent]
                if info.refuter_moves:
                    won.add(parent)
                    queue.append(parent)
                else:
                    pending[parent] -= 1
                    if pending[parent] == 0:
                        won.add(parent)
                        queue.append(parent)
        return won

    def solve(self, start: Pair) -> SolveResult:
        try:
            self.build(start)
        except _BudgetExceeded:
            log.warning("solver_budget_exceeded", pair=format_pair(start), max_configs=self.max_configs)
            return SolveResult(
                SolverVerdict.BUDGET_EXCEEDED,
                len(self.nodes),
                pair_space=self.pair_space,
                free_space=self.free_space,
                reason=f"more than {self.max_configs} configurations",
            )
        won = self.attractor()
        verdict = SolverVerdict.REFUTER_WINS if ("pair", start) in won else SolverVerdict.PROVER_WINS
        self.logger.info(f"Solved {format_pair(start)}: {verdict.value} over {len(self.nodes)} configurations")
        return SolveResult(
            verdict,
            len(self.nodes),
            attractor_size=len(won),
            pair_space=self.pair_space,
            free_space=self.free_space,
        )


def solve_game(
    system: BpaSystem,
    x: Union[str, RegularString],
    y: Union[str, RegularString],
    pair_space: Optional[int] = None,
    max_configs: int = DEFAULT_MAX_CONFIGS,
    free_space: Optional[int] = None,
    oracle_depth: int = DEFAULT_ORACLE_DEPTH,
) -> SolveResult:
    """
    Decide the space-bounded game from (X, Y) by exhaustive search.

    Prover's decompositions are restricted to the four Prover shapes.

    Returns:
        RefuterWins or ProverWins, or BudgetExceeded when the graph does not
        close within `max_configs` positions
    """
    start = []
    for value in (x, y):
        if isinstance(value, str):
            if value not in system.nonterminals:
                raise ContractViolation(f"'{value}' is not a nonterminal of the system")
            value = RegularString.of((value,))
        start.append(value)
    default_pair, default_free = default_spaces(system)
    solver = GameSolver(
        system,
        default_pair if pair_space is None else pair_space,
        default_free if free_space is None else free_space,
        max_configs,
        oracle_depth,
    )
    return solver.solve((start[0], start[1]))
