"""
BPA systems: grammar representation, parsing, validation, dead-nonterminal
completion, norms and the size constants M, M_rhs, S_rhs and E.
"""

import logging
import re
from dataclasses import dataclass
from functools import cached_property, total_ordering
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (
    ContractViolation,
    DeadNonterminalError,
    EmptyDeclarationError,
    GrammarSyntaxError,
    UndeclaredSymbolError,
)

logger = logging.getLogger(__name__)

EPSILON_TOKEN = "eps"
Word = Tuple[str, ...]

_IDENT = re.compile(r"[A-Za-z0-9_]+")
_HEADER = re.compile(r"^\s*(nonterminals|actions|rules)\s*:")
_RULE_TOKEN = re.compile(r"->|[A-Za-z0-9_]+|\S")


# ---------------------------------------------------------------------------
# Extended naturals
# ---------------------------------------------------------------------------

@total_ordering
class ExtNat:
    """A natural number or omega, with omega + n = omega - n = omega."""

    __slots__ = ("_value",)

    def __init__(self, value: Optional[int] = None):
        if value is not None and value < 0:
            raise ContractViolation(f"ExtNat cannot be negative: {value}")
        self._value = value

    @property
    def value(self) -> Optional[int]:
        """The natural number, or None for omega."""
        return self._value

    @property
    def is_omega(self) -> bool:
        return self._value is None

    @property
    def finite(self) -> int:
        """The natural number; raises on omega."""
        if self._value is None:
            raise ContractViolation("expected a finite value, got omega")
        return self._value

    @staticmethod
    def _coerce(other: Union["ExtNat", int]) -> "ExtNat":
        if isinstance(other, ExtNat):
            return other
        if isinstance(other, int):
            return ExtNat(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: Union["ExtNat", int]) -> "ExtNat":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_omega or other.is_omega:
            return OMEGA
        return ExtNat(self._value + other._value)  # type: ignore[operator]

    __radd__ = __add__

    def __sub__(self, other: Union["ExtNat", int]) -> "ExtNat":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_omega:
            return OMEGA
        if other.is_omega:
            raise ContractViolation("cannot subtract omega from a natural number")
        return ExtNat(self._value - other._value)  # type: ignore[operator]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            return self._value == other
        if isinstance(other, ExtNat):
            return self._value == other._value
        return NotImplemented

    def __lt__(self, other: Union["ExtNat", int]) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_omega:
            return False
        if other.is_omega:
            return True
        return self._value < other._value  # type: ignore[operator]

    def __hash__(self) -> int:
        return hash(("ExtNat", self._value))

    def __int__(self) -> int:
        return self.finite

    def __repr__(self) -> str:
        return "OMEGA" if self.is_omega else f"ExtNat({self._value})"

    def __str__(self) -> str:
        return "omega" if self.is_omega else str(self._value)


OMEGA = ExtNat(None)


# ---------------------------------------------------------------------------
# Grammar types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """A rule head --action--> body in Greibach normal form."""

    head: str
    action: str
    body: Word = ()

    def __str__(self) -> str:
        body = " ".join(self.body) if self.body else EPSILON_TOKEN
        return f"{self.head} {self.action} -> {body}"


class NormTable:
    """Norms of nonterminals, extended additively to words."""

    def __init__(self, values: Mapping[str, ExtNat]):
        self._values = MappingProxyType(dict(values))

    def __getitem__(self, symbol: str) -> ExtNat:
        return self._values[symbol]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormTable):
            return NotImplemented
        return dict(self._values) == dict(other._values)

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def items(self):
        return self._values.items()

    def is_normed(self, symbol: str) -> bool:
        return not self._values[symbol].is_omega

    def word_norm(self, word: Sequence[str]) -> ExtNat:
        """Norm of a finite word; omega as soon as one symbol is unnormed."""
        total = 0
        for symbol in word:
            norm = self._values[symbol]
            if norm.is_omega:
                return OMEGA
            total += norm.finite
        return ExtNat(total)

    def prefix_size(self, word: Sequence[str]) -> int:
        """Norm of the longest normed prefix of a finite word."""
        total = 0
        for symbol in word:
            norm = self._values[symbol]
            if norm.is_omega:
                break
            total += norm.finite
        return total


@dataclass(frozen=True)
class SystemConstants:
    """The size constants of a system."""

    M: int
    M_rhs: int
    S_rhs: int
    E: int
    nonterminal_count: int

    @property
    def decomposition_threshold(self) -> int:
        """Prefix size above which the complete Prover decomposes (2M + E)."""
        return 2 * self.M + self.E

    @property
    def prover_pair_space(self) -> int:
        """Pair space sufficient for the complete Prover, 2(2M + 2E + S_rhs)."""
        return 2 * (2 * self.M + 2 * self.E + self.S_rhs)


@dataclass(frozen=True)
class BpaSystem:
    """A BPA system (nonterminals, actions, rules); immutable."""

    nonterminals: Tuple[str, ...]
    actions: Tuple[str, ...]
    rules: Tuple[Rule, ...]

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.nonterminals, self.actions, self.rules))

    @cached_property
    def _rules_by_head(self) -> Dict[str, Tuple[Rule, ...]]:
        grouped: Dict[str, List[Rule]] = {symbol: [] for symbol in self.nonterminals}
        for rule in self.rules:
            grouped.setdefault(rule.head, []).append(rule)
        return {head: tuple(rules) for head, rules in grouped.items()}

    @cached_property
    def _caches(self) -> Dict[str, dict]:
        return {}

    def rules_for(self, head: str) -> Tuple[Rule, ...]:
        """Rules with the given head, in declaration order."""
        return self._rules_by_head.get(head, ())

    def cache(self, name: str) -> dict:
        """A per-system memo table; entries are write-once."""
        return self._caches.setdefault(name, {})

    @cached_property
    def norms(self) -> NormTable:
        return compute_norms(self)

    @cached_property
    def constants(self) -> SystemConstants:
        return constants(self, self.norms)

    @property
    def is_normed(self) -> bool:
        return all(self.norms.is_normed(symbol) for symbol in self.nonterminals)

    def __str__(self) -> str:
        return serialize_system(self)


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

def _declared_identifiers(segment: str, lineno: int, offset: int) -> List[Tuple[str, int]]:
    found = []
    for match in re.finditer(r"[^\s,]+", segment):
        token = match.group(0)
        column = offset + match.start() + 1
        if not _IDENT.fullmatch(token):
            raise GrammarSyntaxError(f"invalid identifier '{token}'", lineno, column)
        if token == EPSILON_TOKEN:
            raise GrammarSyntaxError(f"'{EPSILON_TOKEN}' is reserved", lineno, column)
        found.append((token, column))
    return found


def _rule_tokens(segment: str, offset: int) -> List[Tuple[str, int]]:
    return [(m.group(0), offset + m.start() + 1) for m in _RULE_TOKEN.finditer(segment)]


def _build_rule(
    tokens: List[Tuple[str, int]],
    lineno: int,
    nonterminals: Mapping[str, int],
    actions: Mapping[str, int],
) -> Rule:
    for token, column in tokens:
        if token != "->" and not _IDENT.fullmatch(token):
            raise GrammarSyntaxError(f"unexpected character '{token}'", lineno, column)
    if len(tokens) < 3 or tokens[2][0] != "->":
        column = tokens[min(2, len(tokens) - 1)][1]
        raise GrammarSyntaxError("expected '<Head> <action> -> <body>'", lineno, column)
    (head, head_col), (action, action_col) = tokens[0], tokens[1]
    if head not in nonterminals:
        raise UndeclaredSymbolError(head, lineno, head_col, kind="nonterminal")
    if action not in actions:
        raise UndeclaredSymbolError(action, lineno, action_col, kind="action")
    body_tokens = tokens[3:]
    if not body_tokens:
        raise GrammarSyntaxError(
            f"empty body; write '{EPSILON_TOKEN}'", lineno, tokens[2][1] + 2
        )
    if [t for t, _ in body_tokens] == [EPSILON_TOKEN]:
        return Rule(head, action, ())
    body: List[str] = []
    for token, column in body_tokens:
        if token == "->":
            raise GrammarSyntaxError("unexpected '->'", lineno, column)
        if token == EPSILON_TOKEN:
            raise GrammarSyntaxError(f"'{EPSILON_TOKEN}' must stand alone", lineno, column)
        if token not in nonterminals:
            raise UndeclaredSymbolError(token, lineno, column, kind="nonterminal")
        body.append(token)
    return Rule(head, action, tuple(body))


def parse_system(text: str) -> BpaSystem:
    """
    Parse grammar text into a BpaSystem.

    Args:
        text: Grammar source with `nonterminals:`, `actions:` and `rules:` sections

    Returns:
        The declared system, rules in declaration order (not yet validated
        for dead nonterminals)
    """
    declared: Dict[str, Dict[str, int]] = {"nonterminals": {}, "actions": {}}
    raw_rules: List[Tuple[int, List[Tuple[str, int]]]] = []
    section: Optional[str] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        header = _HEADER.match(line)
        if header:
            section = header.group(1)
            rest, offset = line[header.end():], header.end()
        elif section is None:
            column = len(line) - len(line.lstrip()) + 1
            raise GrammarSyntaxError("expected a section header", lineno, column)
        else:
            rest, offset = line, 0
        if not rest.strip():
            continue
        if section == "rules":
            raw_rules.append((lineno, _rule_tokens(rest, offset)))
            continue
        table = declared[section]  # type: ignore[index]
        for token, column in _declared_identifiers(rest, lineno, offset):
            if token in table:
                raise GrammarSyntaxError(f"duplicate declaration of '{token}'", lineno, column)
            table[token] = lineno

    rules = tuple(
        _build_rule(tokens, lineno, declared["nonterminals"], declared["actions"])
        for lineno, tokens in raw_rules
    )
    if not declared["nonterminals"]:
        raise EmptyDeclarationError("the nonterminal set is empty")
    if not declared["actions"]:
        raise EmptyDeclarationError("the action set is empty")

    system = BpaSystem(
        nonterminals=tuple(declared["nonterminals"]),
        actions=tuple(declared["actions"]),
        rules=rules,
    )
    logger.debug(
        f"Parsed system: {len(system.nonterminals)} nonterminals, "
        f"{len(system.actions)} actions, {len(system.rules)} rules"
    )
    return system


def serialize_system(system: BpaSystem) -> str:
    """Canonical grammar text; declarations and rules in stored order."""
    lines = [
        f"nonterminals: {' '.join(system.nonterminals)}",
        f"actions: {' '.join(system.actions)}",
        "rules:",
    ]
    lines.extend(str(rule) for rule in system.rules)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation and completion
# ---------------------------------------------------------------------------

def dead_nonterminals(system: BpaSystem) -> Tuple[str, ...]:
    """Nonterminals heading no rule, in declaration order."""
    return tuple(symbol for symbol in system.nonterminals if not system.rules_for(symbol))


def validate(system: BpaSystem) -> BpaSystem:
    """
    Check the BPA system invariants.

    Returns:
        The same system, for chaining

    Raises:
        EmptyDeclarationError, GrammarSyntaxError, UndeclaredSymbolError,
        DeadNonterminalError
    """
    if not system.nonterminals:
        raise EmptyDeclarationError("the nonterminal set is empty")
    if not system.actions:
        raise EmptyDeclarationError("the action set is empty")
    for kind, symbols in (("nonterminal", system.nonterminals), ("action", system.actions)):
        if len(set(symbols)) != len(symbols):
            raise GrammarSyntaxError(f"duplicate {kind} declaration", 0, 0)
    declared_nt, declared_act = set(system.nonterminals), set(system.actions)
    for index, rule in enumerate(system.rules, start=1):
        if rule.head not in declared_nt:
            raise UndeclaredSymbolError(rule.head, index, 1, kind="nonterminal")
        if rule.action not in declared_act:
            raise UndeclaredSymbolError(rule.action, index, 2, kind="action")
        for symbol in rule.body:
            if symbol not in declared_nt:
                raise UndeclaredSymbolError(symbol, index, 4, kind="nonterminal")
    dead = dead_nonterminals(system)
    if dead:
        raise DeadNonterminalError(dead)
    return system


def fresh_name(base: str, taken) -> str:
    """`base`, or `base` with the smallest integer suffix not in `taken`."""
    if base not in taken:
        return base
    index = 1
    while f"{base}{index}" in taken:
        index += 1
    return f"{base}{index}"


def complete_dead(system: BpaSystem) -> BpaSystem:
    """
    Add a looping nonterminal D and action d so that no nonterminal is dead.

    Every dead nonterminal A gets the rule A --d--> A, and D gets D --d--> D.
    Systems without dead nonterminals are returned unchanged.
    """
    dead = dead_nonterminals(system)
    if not dead:
        return system
    taken = set(system.nonterminals) | set(system.actions)
    loop_symbol = fresh_name("D", taken)
    taken.add(loop_symbol)
    loop_action = fresh_name("d", taken)
    extra = tuple(Rule(symbol, loop_action, (symbol,)) for symbol in dead)
    extra += (Rule(loop_symbol, loop_action, (loop_symbol,)),)
    logger.info(f"Completed {len(dead)} dead nonterminal(s) with {loop_symbol}/{loop_action}")
    return BpaSystem(
        nonterminals=system.nonterminals + (loop_symbol,),
        actions=system.actions + (loop_action,),
        rules=system.rules + extra,
    )


def completion_symbol(original: BpaSystem, completed: BpaSystem) -> Optional[str]:
    """The looping nonterminal added by complete_dead, or None if nothing was added."""
    added = [s for s in completed.nonterminals if s not in set(original.nonterminals)]
    return added[-1] if added else None


# ---------------------------------------------------------------------------
# Norms and constants
# ---------------------------------------------------------------------------

def compute_norms(system: BpaSystem) -> NormTable:
    """
    Compute the norm of every nonterminal by saturation.

    Repeatedly picks the unfinished nonterminal owning a rule whose body is made
    of finished nonterminals with minimal body norm m, and assigns it 1 + m.
    Ties go to the first nonterminal in declaration order. Whatever remains is
    unnormed.
    """
    finished: Dict[str, int] = {}
    while True:
        best: Optional[Tuple[int, str]] = None
        for symbol in system.nonterminals:
            if symbol in finished:
                continue
            for rule in system.rules_for(symbol):
                if all(b in finished for b in rule.body):
                    m = sum(finished[b] for b in rule.body)
                    if best is None or m < best[0]:
                        best = (m, symbol)
        if best is None:
            break
        finished[best[1]] = best[0] + 1

    return NormTable(
        {
            symbol: ExtNat(finished[symbol]) if symbol in finished else OMEGA
            for symbol in system.nonterminals
        }
    )


def constants(system: BpaSystem, norms: NormTable) -> SystemConstants:
    """M, M_rhs, S_rhs and the cycle bound E; max over the empty set is 0."""
    finite_norms = [norms[s].finite for s in system.nonterminals if norms.is_normed(s)]
    m = max(finite_norms, default=0)

    body_norms = [norms.word_norm(rule.body) for rule in system.rules]
    m_rhs = max((n.finite for n in body_norms if not n.is_omega), default=0)
    s_rhs = max((norms.prefix_size(rule.body) for rule in system.rules), default=0)

    count = len(system.nonterminals)
    e = (2 * m + count * count * m_rhs + s_rhs) * (1 + s_rhs)
    return SystemConstants(M=m, M_rhs=m_rhs, S_rhs=s_rhs, E=e, nonterminal_count=count)
