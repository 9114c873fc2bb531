"""
Normed BPA systems: the completion with an absorbing unnormed nonterminal,
the eq-level bound, and the decision procedure built on it.

For non-bisimilar x, y of a normed system

    eqlevel(x, y) <= min(||x||, ||y||) + |N|^2 * M_rhs

so x ~_{B+1} y already implies x ~ y. decide_normed runs the bounded oracle
one level past that bound.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import structlog

from .bpa_core import BpaSystem, Rule, fresh_name
from .decomposition import HeadSplit, _join, format_pair, head_pair_moves, split_heads
from .equivalence import EqLevelOracle, EqLevelResult, shared_oracle
from .errors import ContractViolation, InconclusiveError, SelfCheckFailure
from .regular_strings import EPSILON, Pair, RegularString, norm_of

logger = logging.getLogger(__name__)
log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class CompletedSystem:
    """A normed system extended with U --a--> U and A --a--> U for every A and a."""

    base: BpaSystem
    completed: BpaSystem
    u_symbol: str

    @property
    def u(self) -> RegularString:
        return RegularString.of((self.u_symbol,))


def _require_normed(system: BpaSystem) -> None:
    if not system.is_normed:
        unnormed = [s for s in system.nonterminals if not system.norms.is_normed(s)]
        raise ContractViolation(f"the system is not normed: {', '.join(unnormed)} have norm omega")


def _require_finite(*strings: RegularString) -> None:
    for x in strings:
        if not x.is_finite:
            raise ContractViolation(f"expected a finite string, got {x}")


def complete_unnormed(system: BpaSystem) -> CompletedSystem:
    """
    Build the completion of a normed system.

    Raises:
        ContractViolation: If the system is not normed
    """
    _require_normed(system)
    u_symbol = fresh_name("U", set(system.nonterminals) | set(system.actions))
    extra = tuple(Rule(u_symbol, a, (u_symbol,)) for a in system.actions)
    extra += tuple(Rule(head, a, (u_symbol,)) for head in system.nonterminals for a in system.actions)
    completed = BpaSystem(
        nonterminals=system.nonterminals + (u_symbol,),
        actions=system.actions,
        rules=system.rules + extra,
    )
    logger.debug(f"Completed normed system with {u_symbol} ({len(extra)} extra rules)")
    return CompletedSystem(system, completed, u_symbol)


def eqlevel_bound(system: BpaSystem, x: RegularString, y: RegularString) -> int:
    """min(||x||, ||y||) + |N|^2 * M_rhs."""
    _require_normed(system)
    _require_finite(x, y)
    norms = system.norms
    constants = system.constants
    smaller = min(norm_of(x, norms).finite, norm_of(y, norms).finite)
    return smaller + constants.nonterminal_count ** 2 * constants.M_rhs


@dataclass(frozen=True)
class NormedVerdict:
    bisimilar: bool
    eqlevel: Optional[int]
    bound: int
    depth: int

    def __str__(self) -> str:
        return "Bisimilar" if self.bisimilar else f"NotBisimilar({self.eqlevel})"


def decide_normed(
    system: BpaSystem,
    x: RegularString,
    y: RegularString,
    oracle: Optional[EqLevelOracle] = None,
) -> NormedVerdict:
    """
    Decide x ~ y in a normed system.

    Returns:
        Bisimilar, or NotBisimilar(k) with the exact eq-level k <= bound

    Raises:
        ContractViolation: If the system is not normed or a string is infinite
        OracleBudgetExceeded: If the oracle memo outgrows its cap
        SelfCheckFailure: If the oracle reports Exact(bound + 1)
    """
    bound = eqlevel_bound(system, x, y)
    depth = bound + 2
    result = (oracle or shared_oracle(system)).eqlevel(x, y, depth)
    if result.is_exact and result.level > bound:
        raise SelfCheckFailure(
            f"eqlevel({x}, {y}) = {result.level} exceeds the normed bound {bound}"
        )
    if result.is_exact:
        verdict = NormedVerdict(False, result.level, bound, depth)
    else:
        verdict = NormedVerdict(True, None, bound, depth)
    log.info("decide_normed", pair=format_pair((x, y)), bound=bound, verdict=str(verdict))
    return verdict


def check_additivity(
    completed: CompletedSystem,
    sigma1: RegularString,
    sigma2: RegularString,
    mu: RegularString,
    depth: int,
    oracle: Optional[EqLevelOracle] = None,
) -> bool:
    """
    Whether eqlevel(sigma1 mu, sigma2 mu) = eqlevel(sigma1, sigma2) + ||mu|| in the completion.

    Only checked when both eq-levels are Exact within `depth`.
    """
    system = completed.completed
    norms = system.norms
    mu_norm = norm_of(mu, norms)
    if mu_norm.is_omega:
        raise ContractViolation(f"check_additivity needs a normed mu, got {mu}")
    oracle = oracle or shared_oracle(system)
    plain = oracle.eqlevel(sigma1, sigma2, depth)
    extended = oracle.eqlevel(_join(norms, sigma1, mu), _join(norms, sigma2, mu), depth)
    if not (plain.is_exact and extended.is_exact):
        return True
    return extended.level == plain.level + mu_norm.finite


# ---------------------------------------------------------------------------
# Replay of the bound construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundStep:
    """
    One triple (rho, rho', mu) with its head eq-level, its overall eq-level
    e = eqlevel(rho mu, rho' mu) and slack d = e - min(||rho mu||, ||rho' mu||).
    """

    rho: RegularString
    rho_prime: RegularString
    mu: RegularString
    head_level: int
    overall_level: int
    slack: int
    case: str


@dataclass
class BoundTrace:
    steps: List[BoundStep] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def cases(self) -> Tuple[str, ...]:
        return tuple(step.case for step in self.steps)

    @property
    def head_pair_steps(self) -> int:
        return sum(1 for step in self.steps if step.case.startswith("1"))

    @property
    def ok(self) -> bool:
        return not self.violations


class BoundTracer:
    """
    Replays the sequence construction behind the eq-level bound on a concrete
    non-bisimilar pair of equal norm, in the completion of the system.
    """

    def __init__(self, system: BpaSystem, depth: int):
        self.completion = complete_unnormed(system)
        self.system = self.completion.completed
        self.norms = self.system.norms
        self.m_rhs = system.constants.M_rhs
        self.case_one_budget = len(system.nonterminals) ** 2
        self.depth = depth
        self.oracle = EqLevelOracle(self.system)
        self.logger = logging.getLogger(self.__class__.__name__)

    def _exact(self, x: RegularString, y: RegularString) -> int:
        result = self.oracle.eqlevel(x, y, self.depth)
        if not result.is_exact:
            raise InconclusiveError(f"eqlevel({x}, {y}) is not settled at depth {self.depth}")
        return result.level

    def _step(self, rho: RegularString, rho_prime: RegularString, mu: RegularString, case: str) -> BoundStep:
        norms = self.norms
        left, right = _join(norms, rho, mu), _join(norms, rho_prime, mu)
        overall = self._exact(left, right)
        smaller = min(norm_of(left, norms), norm_of(right, norms))
        slack = overall - smaller.finite if not smaller.is_omega else 0
        return BoundStep(rho, rho_prime, mu, self._exact(rho, rho_prime), overall, slack, case)

    def _classify(self, split: HeadSplit) -> str:
        if split.is_head_pair():
            return "1"
        norms = self.norms
        a1 = RegularString.of((split.a1,))
        a2_delta2 = _join(norms, RegularString.of((split.a2,)), split.delta2)
        same = self._exact(_join(norms, a1, split.gamma, split.delta2), a2_delta2) == self._exact(
            _join(norms, a1, split.delta1), a2_delta2
        )
        return "2" if same else "3"

    def _head_pair_successor(self, split: HeadSplit, head_level: int) -> Pair:
        for pair, level in head_pair_moves(self.system, split, self.depth, self.oracle):
            if level.is_exact and level.level == head_level - 1:
                return pair
        raise InconclusiveError(
            f"no move of ({split.a1} {split.gamma}, {split.a2}) lowers the eq-level by exactly one"
        )

    def trace(self, x: RegularString, y: RegularString, max_steps: int = 10_000) -> BoundTrace:
        """
        Run the construction from (x, y, eps).

        Raises:
            ContractViolation: If x, y have different norms
            InconclusiveError: If an eq-level is not settled at the depth
        """
        norms = self.norms
        if norm_of(x, norms) != norm_of(y, norms):
            raise ContractViolation(f"the construction starts from strings of equal norm, got {x} and {y}")
        trace = BoundTrace()
        rho, rho_prime, mu = x, y, EPSILON
        previous: Optional[BoundStep] = None

        for _ in range(max_steps):
            if norm_of(rho, norms) != norm_of(rho_prime, norms):
                last = self._step(rho, rho_prime, mu, "end")
                trace.steps.append(last)
                if last.slack != 0:
                    trace.violations.append(f"final slack is {last.slack}, expected 0")
                self._check(trace, previous, last)
                break

            split = split_heads(self.system, rho, rho_prime)
            case = self._classify(split)
            current = self._step(rho, rho_prime, mu, case)
            self._check(trace, previous, current)
            trace.steps.append(current)
            if trace.head_pair_steps > self.case_one_budget:
                trace.violations.append(f"more than {self.case_one_budget} head-pair steps")
                break

            if case == "1":
                rho, rho_prime = self._head_pair_successor(split, current.head_level)
            elif case == "2":
                rho = _join(norms, RegularString.of((split.a1,)), split.gamma)
                rho_prime = RegularString.of((split.a2,))
                mu = _join(norms, split.delta2, mu)
            else:
                rho, rho_prime = split.delta1, _join(norms, split.gamma, split.delta2)
            previous = current
        else:
            trace.violations.append(f"construction did not end within {max_steps} steps")

        self.logger.debug(f"Bound construction for {format_pair((x, y))}: {' '.join(trace.cases)}")
        return trace

    def _check(self, trace: BoundTrace, previous: Optional[BoundStep], current: BoundStep) -> None:
        if previous is None:
            return
        if previous.case == "1":
            if current.head_level != previous.head_level - 1:
                trace.violations.append(
                    f"head eq-level went from {previous.head_level} to {current.head_level} in a head-pair step"
                )
            if current.slack < previous.slack - self.m_rhs:
                trace.violations.append(
                    f"slack dropped from {previous.slack} to {current.slack}, more than M_rhs = {self.m_rhs}"
                )
        else:
            if current.head_level > previous.head_level:
                trace.violations.append(
                    f"head eq-level grew from {previous.head_level} to {current.head_level} in case {previous.case}"
                )
            if current.slack != previous.slack:
                trace.violations.append(
                    f"slack changed from {previous.slack} to {current.slack} in case {previous.case}"
                )
        if previous.case == "2" and current.case not in ("1", "end"):
            trace.violations.append(f"case {current.case} followed case 2")


def trace_bound_construction(
    system: BpaSystem,
    x: RegularString,
    y: RegularString,
    depth: Optional[int] = None,
) -> BoundTrace:
    """
    Replay the eq-level bound construction for a non-bisimilar pair of equal norm.

    The default depth is the eq-level bound plus two.
    """
    _require_normed(system)
    _require_finite(x, y)
    if depth is None:
        depth = eqlevel_bound(system, x, y) + 2
    return BoundTracer(system, depth).trace(x, y)


def eqlevel_in_completion(
    completed: CompletedSystem, x: RegularString, y: RegularString, depth: int
) -> EqLevelResult:
    """Bounded eq-level of (x, y) in the completed system."""
    return shared_oracle(completed.completed).eqlevel(x, y, depth)
