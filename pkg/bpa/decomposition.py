"""
Decompositions of string pairs and their least-congruence proofs.

A decomposition of a target pair is a set of at most three strictly smaller
generator pairs together with a proof that the target lies in the least
congruence (under concatenation) containing them. This module checks such
proofs, builds the four kinds of decompositions offered by the complete Prover,
and extracts the periodic tails (delta with beta ~ delta.beta) those need.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple

from .bpa_core import BpaSystem, NormTable
from .equivalence import EqLevelOracle, EqLevelResult, shared_oracle
from .errors import ContractViolation, InconclusiveError, ProofError, SelfCheckFailure
from .lts import fixed_pair_path, matching_ends, norm_reducing_erasure, norm_reducing_path, transitions
from .regular_strings import (
    EPSILON,
    Pair,
    RegularString,
    concat,
    has_bounded_cycle,
    norm_of,
    parse_regular_string,
    power_omega,
    size_of,
    size_of_pair,
    truncate_unnormed,
)

logger = logging.getLogger(__name__)

MAX_GENERATORS = 3


# ---------------------------------------------------------------------------
# Congruence proofs
# ---------------------------------------------------------------------------

class StepKind(Enum):
    GENERATOR = "gen"
    REFLEXIVITY = "refl"
    SYMMETRY = "sym"
    TRANSITIVITY = "trans"
    CONCATENATION = "concat"


_ARITY = {
    StepKind.GENERATOR: 1,
    StepKind.REFLEXIVITY: 0,
    StepKind.SYMMETRY: 1,
    StepKind.TRANSITIVITY: 2,
    StepKind.CONCATENATION: 2,
}


@dataclass(frozen=True)
class ProofStep:
    """
    One proof step. `refs` holds the 1-based generator index for GENERATOR and
    1-based earlier step numbers for SYMMETRY, TRANSITIVITY and CONCATENATION.
    """

    kind: StepKind
    refs: Tuple[int, ...] = ()
    string: Optional[RegularString] = None

    @classmethod
    def gen(cls, index: int) -> "ProofStep":
        return cls(StepKind.GENERATOR, (index,))

    @classmethod
    def refl(cls, string: RegularString) -> "ProofStep":
        return cls(StepKind.REFLEXIVITY, (), string)

    @classmethod
    def sym(cls, step: int) -> "ProofStep":
        return cls(StepKind.SYMMETRY, (step,))

    @classmethod
    def trans(cls, first: int, second: int) -> "ProofStep":
        return cls(StepKind.TRANSITIVITY, (first, second))

    @classmethod
    def concat(cls, first: int, second: int) -> "ProofStep":
        return cls(StepKind.CONCATENATION, (first, second))

    def __str__(self) -> str:
        if self.kind is StepKind.REFLEXIVITY:
            return f"refl {self.string}"
        return " ".join([self.kind.value] + [str(r) for r in self.refs])


@dataclass(frozen=True)
class CongruenceProof:
    steps: Tuple[ProofStep, ...]
    conclusion: Pair


@dataclass(frozen=True)
class Decomposition:
    """Generator pairs plus a congruence proof of the target pair."""

    generators: Tuple[Pair, ...]
    proof: CongruenceProof
    template: str = field(default="", compare=False)

    @property
    def target(self) -> Pair:
        return self.proof.conclusion


def _join(norms: Optional[NormTable], *parts: RegularString) -> RegularString:
    joined = reduce(concat, parts, EPSILON)
    return truncate_unnormed(joined, norms) if norms is not None else joined


def _apply_step(
    step: ProofStep,
    number: int,
    derived: Sequence[Pair],
    generators: Sequence[Pair],
    norms: Optional[NormTable],
) -> Pair:
    if len(step.refs) != _ARITY[step.kind]:
        raise ProofError(f"'{step.kind.value}' takes {_ARITY[step.kind]} reference(s)", number)
    if step.kind is StepKind.GENERATOR:
        index = step.refs[0]
        if not 1 <= index <= len(generators):
            raise ProofError(f"no generator {index}", number)
        return generators[index - 1]
    if step.kind is StepKind.REFLEXIVITY:
        if step.string is None:
            raise ProofError("reflexivity needs a string", number)
        return (step.string, step.string)
    for ref in step.refs:
        if not 1 <= ref < number:
            raise ProofError(f"reference {ref} does not name an earlier step", number)
    first = derived[step.refs[0] - 1]
    if step.kind is StepKind.SYMMETRY:
        return (first[1], first[0])
    second = derived[step.refs[1] - 1]
    if step.kind is StepKind.TRANSITIVITY:
        if first[1] != second[0]:
            raise ProofError(
                f"transitivity needs matching midpoints, got {first[1]} and {second[0]}", number
            )
        return (first[0], second[1])
    return (_join(norms, first[0], second[0]), _join(norms, first[1], second[1]))


def derive_proof_pairs(
    proof: CongruenceProof, generators: Sequence[Pair], norms: Optional[NormTable] = None
) -> List[Pair]:
    """
    Replay a proof and return the pair established by every step.

    Concatenation results are truncated when `norms` is given.

    Raises:
        ProofError: On the first malformed step, or when the last pair is not
            the conclusion
    """
    if not proof.steps:
        raise ProofError("the proof has no steps")
    derived: List[Pair] = []
    for number, step in enumerate(proof.steps, start=1):
        derived.append(_apply_step(step, number, derived, generators, norms))
    if derived[-1] != proof.conclusion:
        raise ProofError(
            f"the last step derives {format_pair(derived[-1])}, not {format_pair(proof.conclusion)}",
            len(proof.steps),
        )
    return derived


def verify_congruence_proof(
    proof: CongruenceProof, generators: Sequence[Pair], norms: Optional[NormTable] = None
) -> bool:
    """Whether every step checks against earlier steps and the conclusion matches."""
    try:
        derive_proof_pairs(proof, generators, norms)
    except ProofError as e:
        logger.debug(f"Congruence proof rejected: {e}")
        return False
    return True


class ProofBuilder:
    """Accumulates proof steps, tracking the pair each step establishes."""

    def __init__(self, generators: Sequence[Pair], norms: Optional[NormTable] = None):
        self.generators = tuple(generators)
        self.norms = norms
        self.steps: List[ProofStep] = []
        self.pairs: List[Pair] = []

    def _add(self, step: ProofStep) -> int:
        number = len(self.steps) + 1
        self.pairs.append(_apply_step(step, number, self.pairs, self.generators, self.norms))
        self.steps.append(step)
        return number

    def gen(self, index: int) -> int:
        return self._add(ProofStep.gen(index))

    def refl(self, string: RegularString) -> int:
        return self._add(ProofStep.refl(string))

    def sym(self, step: int) -> int:
        return self._add(ProofStep.sym(step))

    def trans(self, first: int, second: int) -> int:
        return self._add(ProofStep.trans(first, second))

    def concat(self, first: int, second: int) -> int:
        return self._add(ProofStep.concat(first, second))

    def build(self, template: str = "") -> Decomposition:
        proof = CongruenceProof(tuple(self.steps), self.pairs[-1])
        return Decomposition(self.generators, proof, template)


# ---------------------------------------------------------------------------
# Checking decompositions
# ---------------------------------------------------------------------------

def decomposition_problem(
    system: BpaSystem, target: Pair, decomposition: Decomposition, norms: Optional[NormTable] = None
) -> Optional[str]:
    """The reason `decomposition` is not a decomposition of `target`, or None."""
    norms = norms or system.norms
    count = len(decomposition.generators)
    if not 1 <= count <= MAX_GENERATORS:
        return f"expected 1 to {MAX_GENERATORS} generators, got {count}"
    try:
        target_size = size_of_pair(target, norms)
        for index, generator in enumerate(decomposition.generators, start=1):
            if size_of_pair(generator, norms) >= target_size:
                return f"generator {index} is not smaller than the target (size {target_size})"
    except ContractViolation as e:
        return str(e)
    if decomposition.proof.conclusion != target:
        return "the proof does not conclude the target pair"
    try:
        derive_proof_pairs(decomposition.proof, decomposition.generators, norms)
    except ProofError as e:
        return f"invalid proof: {e}"
    return None


def check_decomposition(
    system: BpaSystem, target: Pair, decomposition: Decomposition, norms: Optional[NormTable] = None
) -> bool:
    """Whether all generators are strictly smaller than the target and the proof checks."""
    problem = decomposition_problem(system, target, decomposition, norms)
    if problem is not None:
        logger.debug(f"Decomposition rejected: {problem}")
    return problem is None


def decomposition_footprint(decomposition: Decomposition, norms: NormTable) -> int:
    """Work space needed to present a decomposition and its proof."""
    generators = sum(size_of_pair(g, norms) for g in decomposition.generators)
    strings = sum(
        size_of(step.string, norms)
        for step in decomposition.proof.steps
        if step.kind is StepKind.REFLEXIVITY and step.string is not None
    )
    return generators + strings


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def format_pair(pair: Pair) -> str:
    return f"{pair[0]} ~ {pair[1]}"


def parse_pair(text: str, nonterminals: Optional[Iterable[str]] = None) -> Pair:
    left, sep, right = text.partition("~")
    if not sep:
        raise ProofError(f"expected '<string> ~ <string>', got '{text.strip()}'")
    known = list(nonterminals) if nonterminals is not None else None
    return (parse_regular_string(left, known), parse_regular_string(right, known))


def format_decomposition(decomposition: Decomposition) -> str:
    """Line-oriented text: target, generators, then one proof step per line."""
    lines = [f"target: {format_pair(decomposition.target)}"]
    lines.extend(f"gen: {format_pair(g)}" for g in decomposition.generators)
    lines.append("proof:")
    lines.extend(str(step) for step in decomposition.proof.steps)
    return "\n".join(lines) + "\n"


def _parse_step(line: str, number: int, nonterminals: Optional[List[str]]) -> ProofStep:
    keyword, _, rest = line.partition(" ")
    try:
        kind = StepKind(keyword)
    except ValueError:
        raise ProofError(f"unknown step '{keyword}'", number)
    if kind is StepKind.REFLEXIVITY:
        return ProofStep.refl(parse_regular_string(rest, nonterminals))
    refs = rest.split()
    if len(refs) != _ARITY[kind] or not all(r.isdigit() for r in refs):
        raise ProofError(f"'{keyword}' takes {_ARITY[kind]} numeric reference(s)", number)
    return ProofStep(kind, tuple(int(r) for r in refs))


def parse_decomposition(text: str, nonterminals: Optional[Iterable[str]] = None) -> Decomposition:
    """Parse the text produced by format_decomposition."""
    known = list(nonterminals) if nonterminals is not None else None
    target: Optional[Pair] = None
    generators: List[Pair] = []
    steps: List[ProofStep] = []
    in_proof = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if in_proof:
            steps.append(_parse_step(line, len(steps) + 1, known))
        elif line.startswith("target:"):
            target = parse_pair(line[len("target:"):], known)
        elif line.startswith("gen:"):
            generators.append(parse_pair(line[len("gen:"):], known))
        elif line == "proof:":
            in_proof = True
        else:
            raise ProofError(f"unexpected line '{line}'")
    if target is None:
        raise ProofError("missing 'target:' line")
    if not in_proof:
        raise ProofError("missing 'proof:' section")
    return Decomposition(tuple(generators), CongruenceProof(tuple(steps), target))


# ---------------------------------------------------------------------------
# Periodic tails
# ---------------------------------------------------------------------------

def omega_of(delta: RegularString, norms: NormTable) -> RegularString:
    """delta^w under the truncation convention; an infinite or unnormed delta is its own power."""
    if not delta.is_finite:
        return delta
    return truncate_unnormed(power_omega(delta.prefix), norms)


def _require_finite(operation: str, *strings: RegularString) -> None:
    for x in strings:
        if not x.is_finite:
            raise ContractViolation(f"{operation} needs finite strings, got {x}")


def extract_delta_simple(
    system: BpaSystem,
    sigma: RegularString,
    sigma2: RegularString,
    beta: RegularString,
    oracle_depth: int,
    oracle: Optional[EqLevelOracle] = None,
) -> RegularString:
    """
    A nonempty delta with beta ~ delta.beta from sigma.beta ~ sigma2.beta, ||sigma|| < ||sigma2||.

    Erases sigma along the greedy norm-reducing path v and picks, among the
    nonempty residues sigma2 --v--> delta, the first one maximizing the bounded
    eq-level of (beta, delta.beta). That residue must reach AtLeast(oracle_depth).

    Raises:
        ContractViolation: If sigma or sigma2 is infinite, ||sigma|| >= ||sigma2||
            or no nonempty residue exists
        InconclusiveError: If no residue keeps beta ~ delta.beta at oracle_depth
        SelfCheckFailure: If delta exceeds size(sigma, sigma2) * (1 + S_rhs)
    """
    norms = system.norms
    oracle = oracle or shared_oracle(system)
    _require_finite("extract_delta_simple", sigma, sigma2)
    if not norm_of(sigma, norms) < norm_of(sigma2, norms):
        raise ContractViolation(
            f"extract_delta_simple needs ||{sigma}|| < ||{sigma2}||"
        )
    erasure = norm_reducing_erasure(system, sigma)
    residues = [d for d in matching_ends(system, sigma2, erasure.actions) if not d.is_empty]
    if not residues:
        raise ContractViolation(
            f"no nonempty residue of {sigma2} along {' '.join(erasure.actions) or 'eps'}"
        )

    best: Optional[Tuple[RegularString, EqLevelResult]] = None
    for delta in residues:
        level = oracle.eqlevel(beta, _join(norms, delta, beta), oracle_depth)
        if best is None or level.rank() > best[1].rank():
            best = (delta, level)
    delta, level = best  # type: ignore[misc]
    if level.is_exact:
        raise InconclusiveError(
            f"no residue of {sigma2} keeps beta ~ delta.beta at depth {oracle_depth} (best {delta}: {level})"
        )

    bound = size_of_pair((sigma, sigma2), norms) * (1 + system.constants.S_rhs)
    if size_of(delta, norms) > bound:
        raise SelfCheckFailure(f"residue {delta} exceeds the size bound {bound}")
    return delta


@dataclass(frozen=True)
class HeadSplit:
    """rho = A1 delta1 and rho' = A2 delta2 with ||A1|| <= ||A2|| and the fixed path A2 --u--> gamma."""

    a1: str
    delta1: RegularString
    a2: str
    delta2: RegularString
    u: Tuple[str, ...]
    gamma: RegularString
    swapped: bool

    def is_head_pair(self) -> bool:
        """Whether (rho, rho') is exactly (A1 gamma, A2)."""
        return self.delta1 == self.gamma and self.delta2.is_empty


def split_heads(system: BpaSystem, rho: RegularString, rho_prime: RegularString) -> HeadSplit:
    norms = system.norms
    if rho.is_empty or rho_prime.is_empty:
        raise ContractViolation("split_heads needs two nonempty strings")
    swapped = norms[rho.head] > norms[rho_prime.head]  # type: ignore[index]
    first, second = (rho_prime, rho) if swapped else (rho, rho_prime)
    a1, a2 = first.head, second.head
    u, gamma = fixed_pair_path(system, a1, a2)  # type: ignore[arg-type]
    return HeadSplit(
        a1=a1,  # type: ignore[arg-type]
        delta1=first.tail(),
        a2=a2,  # type: ignore[arg-type]
        delta2=second.tail(),
        u=u,
        gamma=RegularString.of(gamma),
        swapped=swapped,
    )


def head_pair_moves(
    system: BpaSystem,
    split: HeadSplit,
    depth: int,
    oracle: EqLevelOracle,
) -> List[Tuple[Pair, EqLevelResult]]:
    """
    Candidate successors of the head pair (A1 gamma, A2).

    For every transition of either side after which all answers have a
    smaller eq-level, lists the (sigma1 gamma, sigma2) pairs it can lead to,
    best answers first.
    """
    norms = system.norms
    left = _join(norms, RegularString.of((split.a1,)), split.gamma)
    right = RegularString.of((split.a2,))
    moves: List[Tuple[Pair, EqLevelResult]] = []
    for challenge in oracle.lowering_challenges(left, right, depth):
        ranked = sorted(challenge.responses, key=lambda item: item[1].rank(), reverse=True)
        moves.extend((challenge.pair_after(response), level) for response, level in ranked)
    return moves


@dataclass(frozen=True)
class SequenceEntry:
    """One triple (rho, rho', mu) of the construction and the case applied to it."""

    rho: RegularString
    rho_prime: RegularString
    mu: RegularString
    head_level: EqLevelResult
    case: str


@dataclass(frozen=True)
class DeltaDerivation:
    delta: RegularString
    entries: Tuple[SequenceEntry, ...]
    final_pair: Pair

    @property
    def cases(self) -> Tuple[str, ...]:
        return tuple(entry.case for entry in self.entries)


class DeltaDeriver:
    """
    Derives a periodic tail delta from alpha1 !~ alpha2 and alpha1.beta ~ alpha2.beta.

    Equal-norm pairs are driven to a pair of different norms by the
    case analysis on the heads of (rho, rho'), carrying a growing normed
    suffix mu; the bounded oracle at `oracle_depth` decides every side
    condition.
    """

    def __init__(self, system: BpaSystem, oracle_depth: int, oracle: Optional[EqLevelOracle] = None):
        self.system = system
        self.norms = system.norms
        self.depth = oracle_depth
        self.oracle = oracle or shared_oracle(system)
        self.logger = logging.getLogger(self.__class__.__name__)

    def _equivalent(self, x: RegularString, y: RegularString) -> bool:
        return not self.oracle.eqlevel(x, y, self.depth).is_exact

    def derive(self, alpha1: RegularString, alpha2: RegularString, beta: RegularString) -> DeltaDerivation:
        norms = self.norms
        _require_finite("derive_delta", alpha1, alpha2)
        if not self.oracle.eqlevel(alpha1, alpha2, self.depth).is_exact:
            raise InconclusiveError(
                f"cannot certify {alpha1} !~ {alpha2} at depth {self.depth}"
            )
        if not self._equivalent(_join(norms, alpha1, beta), _join(norms, alpha2, beta)):
            raise InconclusiveError(
                f"{alpha1}.beta and {alpha2}.beta are distinguished at depth {self.depth}"
            )

        count = self.system.constants.nonterminal_count
        case_one_budget = count * count
        start_norm = norm_of(alpha1, norms)
        step_guard = 4 * (case_one_budget + 1) * (
            (0 if start_norm.is_omega else start_norm.finite) + case_one_budget * self.system.constants.M_rhs + 2
        )

        rho, rho_prime, mu = alpha1, alpha2, EPSILON
        entries: List[SequenceEntry] = []
        case_one_count = 0
        while norm_of(rho, norms) == norm_of(rho_prime, norms):
            if norm_of(rho, norms).is_omega:
                raise InconclusiveError(f"both {rho} and {rho_prime} are unnormed")
            if len(entries) > step_guard:
                raise InconclusiveError("tail derivation did not terminate within its step guard")
            head_level = self.oracle.eqlevel(rho, rho_prime, self.depth)
            if not head_level.is_exact:
                raise InconclusiveError(f"cannot certify {rho} !~ {rho_prime} at depth {self.depth}")
            split = split_heads(self.system, rho, rho_prime)

            if split.is_head_pair():
                case_one_count += 1
                if case_one_count > case_one_budget:
                    raise InconclusiveError(f"head-pair case applied more than {case_one_budget} times")
                case, next_mu = "1", mu
                next_rho, next_prime = self._head_pair_step(split, mu, beta)
            else:
                case, next_rho, next_prime, next_mu = self._split_step(split, head_level, mu, beta)
            entries.append(SequenceEntry(rho, rho_prime, mu, head_level, case))
            self.logger.debug(f"case {case}: ({next_rho}, {next_prime}, {next_mu})")
            rho, rho_prime, mu = next_rho, next_prime, next_mu

        entries.append(
            SequenceEntry(rho, rho_prime, mu, self.oracle.eqlevel(rho, rho_prime, self.depth), "end")
        )
        sigma, sigma2 = _join(norms, rho, mu), _join(norms, rho_prime, mu)
        if norm_of(sigma2, norms) < norm_of(sigma, norms):
            sigma, sigma2 = sigma2, sigma
        try:
            delta = extract_delta_simple(self.system, sigma, sigma2, beta, self.depth, self.oracle)
        except ContractViolation as e:
            raise InconclusiveError(f"tail extraction failed: {e}")

        constants = self.system.constants
        bound = (
            size_of_pair((alpha1, alpha2), norms) + count * count * constants.M_rhs + constants.S_rhs
        ) * (1 + constants.S_rhs)
        if size_of(delta, norms) > bound:
            raise SelfCheckFailure(f"derived tail {delta} exceeds the size bound {bound}")
        return DeltaDerivation(delta, tuple(entries), (sigma, sigma2))

    def _head_pair_step(self, split: HeadSplit, mu: RegularString, beta: RegularString) -> Pair:
        for (next_rho, next_prime), _ in head_pair_moves(self.system, split, self.depth, self.oracle):
            if self._equivalent(_join(self.norms, next_rho, mu, beta), _join(self.norms, next_prime, mu, beta)):
                return next_rho, next_prime
        raise InconclusiveError(
            f"no answer of the head pair ({split.a1} {split.gamma}, {split.a2}) keeps the tails equivalent"
        )

    def _split_step(self, split: HeadSplit, head_level: EqLevelResult, mu: RegularString, beta: RegularString):
        norms = self.norms
        a1 = RegularString.of((split.a1,))
        a2 = RegularString.of((split.a2,))
        a1_gamma = _join(norms, a1, split.gamma)
        gamma_delta2 = _join(norms, split.gamma, split.delta2)

        head_pair_level = self.oracle.eqlevel(a1_gamma, a2, self.depth)
        if head_pair_level.rank() <= head_level.rank() and self._equivalent(
            _join(norms, a1_gamma, split.delta2, mu, beta), _join(norms, a2, split.delta2, mu, beta)
        ):
            return "2", a1_gamma, a2, _join(norms, split.delta2, mu)

        if not self._equivalent(_join(norms, split.delta1, mu, beta), _join(norms, gamma_delta2, mu, beta)):
            rho, rho_prime = self._diverging_step(split, mu, beta)
            return "3a", rho, rho_prime, mu

        return "3b", split.delta1, gamma_delta2, mu

    def _diverging_step(self, split: HeadSplit, mu: RegularString, beta: RegularString) -> Pair:
        """Follow the fixed path of A2 from A1 until the norms of the two sides part."""
        norms = self.norms
        path2 = norm_reducing_path(self.system, RegularString.of((split.a2,)), len(split.u)).states
        context1 = _join(norms, split.delta1, mu, beta)
        context2 = _join(norms, split.delta2, mu, beta)
        seen = set()

        def search(sigma1: RegularString, index: int) -> Optional[Pair]:
            if index == len(split.u) or (sigma1, index) in seen:
                return None
            seen.add((sigma1, index))
            tau2 = path2[index + 1]
            for transition in transitions(self.system, sigma1):
                if transition.action != split.u[index]:
                    continue
                tau1 = transition.target
                if not self._equivalent(_join(norms, tau1, context1), _join(norms, tau2, context2)):
                    continue
                left, right = _join(norms, tau1, split.delta1), _join(norms, tau2, split.delta2)
                n1, n2 = norm_of(left, norms), norm_of(right, norms)
                if n1 > n2:
                    return left, right
                if n1 == n2:
                    found = search(tau1, index + 1)
                    if found is not None:
                        return found
            return None

        found = search(RegularString.of((split.a1,)), 0)
        if found is None:
            raise InconclusiveError(
                f"no diverging match of {split.a2} --{' '.join(split.u)}--> from {split.a1} at depth {self.depth}"
            )
        return found


def derive_delta(
    system: BpaSystem,
    alpha1: RegularString,
    alpha2: RegularString,
    beta: RegularString,
    oracle_depth: int,
    oracle: Optional[EqLevelOracle] = None,
) -> DeltaDerivation:
    """
    Derive delta != eps with beta ~ delta.beta, with the full case trace.

    Pairs of different norms go straight to extract_delta_simple.

    Raises:
        ContractViolation: If alpha1 or alpha2 is infinite
        InconclusiveError: If the bounded oracle cannot settle a premise or a
            case, or the head-pair case exceeds its budget
        SelfCheckFailure: If the derived delta breaks its size bound
    """
    norms = system.norms
    oracle = oracle or shared_oracle(system)
    _require_finite("derive_delta", alpha1, alpha2)
    n1, n2 = norm_of(alpha1, norms), norm_of(alpha2, norms)
    if n1 != n2:
        if oracle.eqlevel(_join(norms, alpha1, beta), _join(norms, alpha2, beta), oracle_depth).is_exact:
            raise InconclusiveError(
                f"{alpha1}.beta and {alpha2}.beta are distinguished at depth {oracle_depth}"
            )
        sigma, sigma2 = (alpha1, alpha2) if n1 < n2 else (alpha2, alpha1)
        try:
            delta = extract_delta_simple(system, sigma, sigma2, beta, oracle_depth, oracle)
        except ContractViolation as e:
            raise InconclusiveError(f"tail extraction failed: {e}")
        return DeltaDerivation(delta, (), (sigma, sigma2))
    return DeltaDeriver(system, oracle_depth, oracle).derive(alpha1, alpha2, beta)


def yield_delta(
    system: BpaSystem,
    alpha1: RegularString,
    alpha2: RegularString,
    beta: RegularString,
    oracle_depth: int,
    oracle: Optional[EqLevelOracle] = None,
) -> RegularString:
    """The delta of derive_delta."""
    return derive_delta(system, alpha1, alpha2, beta, oracle_depth, oracle).delta


# ---------------------------------------------------------------------------
# Prover decompositions
# ---------------------------------------------------------------------------

class TemplateBuilder:
    """Instantiates the four decomposition shapes for one head-normalized pair."""

    def __init__(self, system: BpaSystem, swapped: bool):
        self.system = system
        self.norms = system.norms
        self.swapped = swapped

    def join(self, *parts: RegularString) -> RegularString:
        return _join(self.norms, *parts)

    def _finish(self, builder: ProofBuilder, last: int, template: str) -> Decomposition:
        if self.swapped:
            builder.sym(last)
        return builder.build(template)

    def unnormed_right(self, a, alpha, b, gamma) -> Decomposition:
        """{(alpha, gamma), (A gamma, B)}."""
        p = ProofBuilder([(alpha, gamma), (self.join(a, gamma), b)], self.norms)
        g1, g2 = p.gen(1), p.gen(2)
        ra = p.refl(a)
        step = p.concat(ra, g1)
        return self._finish(p, p.trans(step, g2), "1")

    def periodic_pair(self, a, alpha, b, beta, gamma, delta) -> Decomposition:
        """{(alpha, (gamma delta)^w), (beta, (delta gamma)^w), (A (gamma delta)^w, B (delta gamma)^w)}."""
        gd = omega_of(self.join(gamma, delta), self.norms)
        dg = omega_of(self.join(delta, gamma), self.norms)
        p = ProofBuilder(
            [(alpha, gd), (beta, dg), (self.join(a, gd), self.join(b, dg))], self.norms
        )
        g1, g2, g3 = p.gen(1), p.gen(2), p.gen(3)
        left = p.trans(p.concat(p.refl(a), g1), g3)
        right = p.sym(p.concat(p.refl(b), g2))
        return self._finish(p, p.trans(left, right), "2a")

    def head_and_tail(self, a, alpha, b, beta, gamma) -> Decomposition:
        """{(A gamma, B), (alpha, gamma beta)}."""
        p = ProofBuilder([(self.join(a, gamma), b), (alpha, self.join(gamma, beta))], self.norms)
        g1, g2 = p.gen(1), p.gen(2)
        shifted = p.concat(g1, p.refl(beta))
        prefixed = p.concat(p.refl(a), g2)
        return self._finish(p, p.trans(prefixed, shifted), "2b-i")

    def periodic_tail(self, a, alpha, b, beta, gamma, delta) -> Decomposition:
        """{(alpha, gamma beta), (beta, delta^w), (A gamma delta^w, B delta^w)}."""
        dw = omega_of(delta, self.norms)
        a_gamma = self.join(a, gamma)
        p = ProofBuilder(
            [(alpha, self.join(gamma, beta)), (beta, dw), (self.join(a_gamma, dw), self.join(b, dw))],
            self.norms,
        )
        g1, g2, g3 = p.gen(1), p.gen(2), p.gen(3)
        left = p.concat(p.refl(a), g1)
        left = p.trans(left, p.concat(p.refl(a_gamma), g2))
        left = p.trans(left, g3)
        right = p.sym(p.concat(p.refl(b), g2))
        return self._finish(p, p.trans(left, right), "2b-ii")


def prover_decompositions(
    system: BpaSystem,
    pair: Pair,
    oracle_depth: int,
    validate_with_oracle: bool = True,
    oracle: Optional[EqLevelOracle] = None,
) -> List[Decomposition]:
    """
    Candidate decompositions of (A alpha, B beta) from the four Prover shapes.

    Residues gamma come from matching A's greedy norm-reducing erasure u on
    B, and (for the periodic pair shape) residues delta != eps from matching
    B's erasure on A; periodic tails come from yield_delta. Every returned
    candidate passes check_decomposition and has cycles bounded by E. With
    `validate_with_oracle`, all generators must also be equivalent at
    `oracle_depth`.

    Returns:
        Candidates in shape order, then instantiation order; possibly empty
    """
    x, y = pair
    if x.is_empty or y.is_empty:
        return []
    norms = system.norms
    oracle = oracle or shared_oracle(system)
    swapped = norms[x.head] > norms[y.head]  # type: ignore[index]
    first, second = (y, x) if swapped else (x, y)
    a, alpha = RegularString.of((first.head,)), first.tail()  # type: ignore[arg-type]
    b, beta = RegularString.of((second.head,)), second.tail()  # type: ignore[arg-type]
    if not norms.is_normed(first.head):  # type: ignore[arg-type]
        return []

    templates = TemplateBuilder(system, swapped)
    u = norm_reducing_erasure(system, a).actions
    gammas = matching_ends(system, b, u)
    candidates: List[Decomposition] = []

    if not norms.is_normed(second.head):  # type: ignore[arg-type]
        candidates.extend(templates.unnormed_right(a, alpha, b, g) for g in gammas)
    else:
        v = norm_reducing_erasure(system, b).actions
        deltas = [d for d in matching_ends(system, a, v) if not d.is_empty]
        candidates.extend(
            templates.periodic_pair(a, alpha, b, beta, g, d) for g in gammas for d in deltas
        )
        candidates.extend(templates.head_and_tail(a, alpha, b, beta, g) for g in gammas)
        for g in gammas:
            a_gamma = _join(norms, a, g)
            if not oracle.eqlevel(a_gamma, b, oracle_depth).is_exact:
                continue
            try:
                delta = yield_delta(system, a_gamma, b, beta, oracle_depth, oracle)
            except InconclusiveError as e:
                logger.debug(f"No periodic tail for ({a_gamma}, {b}): {e}")
                continue
            candidates.append(templates.periodic_tail(a, alpha, b, beta, g, delta))

    e_bound = system.constants.E
    accepted: List[Decomposition] = []
    for candidate in candidates:
        if candidate in accepted:
            continue
        if not check_decomposition(system, pair, candidate, norms):
            continue
        if not all(
            has_bounded_cycle(s, e_bound, norms) for g in candidate.generators for s in g
        ):
            continue
        if validate_with_oracle and any(
            oracle.eqlevel(g[0], g[1], oracle_depth).is_exact for g in candidate.generators
        ):
            continue
        accepted.append(candidate)
    logger.debug(f"{len(accepted)} of {len(candidates)} decompositions kept for {format_pair(pair)}")
    return accepted
