"""
Regular (lasso) strings over nonterminals.

A RegularString stores a prefix and a cycle and always holds the canonical
presentation of prefix.cycle^w: the shortest cycle and then the shortest
prefix. Finite strings have an empty cycle.
"""

import re
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Sequence, Set, Tuple

from .bpa_core import EPSILON_TOKEN, OMEGA, ExtNat, NormTable, Word
from .errors import ContractViolation, StringSyntaxError

_LITERAL = re.compile(
    r"^\s*(?P<prefix>[^()]*?)\s*(?:\(\s*(?P<cycle>[^()]*?)\s*\)\s*\^\s*w\s*)?$"
)
_IDENT = re.compile(r"[A-Za-z0-9_]+")


def _primitive_root(word: Word) -> Word:
    n = len(word)
    for period in range(1, n + 1):
        if n % period == 0 and word[:period] * (n // period) == word:
            return word[:period]
    return word


def _canonical_parts(prefix: Word, cycle: Word) -> Tuple[Word, Word]:
    if not cycle:
        return prefix, ()
    cycle = _primitive_root(cycle)
    # fold trailing prefix symbols into the cycle while they repeat it
    while prefix and prefix[-1] == cycle[-1]:
        cycle = (cycle[-1],) + cycle[:-1]
        prefix = prefix[:-1]
    return prefix, cycle


@dataclass(frozen=True)
class RegularString:
    """
    A canonical lasso string prefix.cycle^w.

    Construction always canonicalizes, so equality of RegularString values is
    equality of the denoted strings.
    """

    prefix: Word = ()
    cycle: Word = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        prefix, cycle = _canonical_parts(tuple(self.prefix), tuple(self.cycle))
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "cycle", cycle)
        object.__setattr__(self, "_hash", hash((prefix, cycle)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def of(cls, word: Iterable[str]) -> "RegularString":
        """The finite string spelled by `word`."""
        return cls(tuple(word), ())

    @classmethod
    def parse(cls, text: str, nonterminals: Optional[Iterable[str]] = None) -> "RegularString":
        return parse_regular_string(text, nonterminals)

    @property
    def is_finite(self) -> bool:
        return not self.cycle

    @property
    def is_empty(self) -> bool:
        return not self.prefix and not self.cycle

    @property
    def head(self) -> Optional[str]:
        """First symbol, or None for the empty string."""
        if self.prefix:
            return self.prefix[0]
        if self.cycle:
            return self.cycle[0]
        return None

    def tail(self) -> "RegularString":
        """The string without its first symbol (unrolling the cycle if needed)."""
        if self.prefix:
            return RegularString(self.prefix[1:], self.cycle)
        if self.cycle:
            return RegularString(self.cycle[1:], self.cycle)
        raise ContractViolation("the empty string has no tail")

    def unroll(self, length: int) -> Word:
        """The first `length` symbols (fewer for a short finite string)."""
        if self.is_finite or length <= len(self.prefix):
            return self.prefix[:length]
        missing = length - len(self.prefix)
        repeats = -(-missing // len(self.cycle))
        return (self.prefix + self.cycle * repeats)[:length]

    def symbols(self) -> FrozenSet[str]:
        return frozenset(self.prefix) | frozenset(self.cycle)

    def sort_key(self) -> Tuple[int, Word, Word]:
        """A total order on canonical strings (shorter presentations first)."""
        return (len(self.prefix) + len(self.cycle), self.prefix, self.cycle)

    def __str__(self) -> str:
        parts = []
        if self.prefix:
            parts.append(" ".join(self.prefix))
        if self.cycle:
            parts.append(f"({' '.join(self.cycle)})^w")
        return " ".join(parts) if parts else EPSILON_TOKEN


EPSILON = RegularString()
Pair = Tuple[RegularString, RegularString]


def parse_regular_string(text: str, nonterminals: Optional[Iterable[str]] = None) -> RegularString:
    """
    Parse the literal syntax `A B`, `A B (C D)^w`, `(C D)^w` or `eps`.

    Args:
        text: String literal
        nonterminals: When given, every symbol must be one of these

    Returns:
        The canonical RegularString
    """
    match = _LITERAL.match(text)
    if match is None:
        raise StringSyntaxError(f"malformed string literal '{text}'")

    def tokens(segment: Optional[str]) -> Word:
        if segment is None:
            return ()
        found = tuple(segment.split())
        if found == (EPSILON_TOKEN,):
            return ()
        for token in found:
            if token == EPSILON_TOKEN:
                raise StringSyntaxError(f"'{EPSILON_TOKEN}' must stand alone in '{text}'")
            if not _IDENT.fullmatch(token):
                raise StringSyntaxError(f"invalid symbol '{token}' in '{text}'")
        return found

    prefix, cycle = tokens(match.group("prefix")), tokens(match.group("cycle"))
    if nonterminals is not None:
        known = set(nonterminals)
        unknown = [s for s in prefix + cycle if s not in known]
        if unknown:
            raise StringSyntaxError(f"unknown nonterminal '{unknown[0]}' in '{text}'")
    return RegularString(prefix, cycle)


def canonicalize(prefix: Sequence[str], cycle: Sequence[str]) -> RegularString:
    """Canonical presentation of prefix.cycle^w; idempotent."""
    return RegularString(tuple(prefix), tuple(cycle))


def same_omega_word(p1: Sequence[str], c1: Sequence[str], p2: Sequence[str], c2: Sequence[str]) -> bool:
    """Whether p1.c1^w and p2.c2^w denote the same string."""
    p1, c1, p2, c2 = tuple(p1), tuple(c1), tuple(p2), tuple(c2)
    if not c1 or not c2:
        return not c1 and not c2 and p1 == p2
    length = max(len(p1), len(p2)) + len(c1) * len(c2)

    def unroll(p: Word, c: Word) -> Word:
        repeats = -(-(length - len(p)) // len(c)) if length > len(p) else 0
        return (p + c * repeats)[:length]

    return unroll(p1, c1) == unroll(p2, c2)


def canonicalize_by_partitions(prefix: Sequence[str], cycle: Sequence[str]) -> Tuple[Word, Word]:
    """
    Brute-force canonicalization over partitions of the unrolled string.

    Tries every split delta1 delta2 delta3 of an unrolling with delta2 as the
    candidate cycle, shortest cycle first and then shortest prefix, and keeps
    the first presentation denoting the same string. Slow; used as a
    reference for the eager canonical form.
    """
    prefix, cycle = tuple(prefix), tuple(cycle)
    if not cycle:
        return prefix, ()
    word = prefix + cycle + cycle
    for cycle_length in range(1, len(cycle) + 1):
        for prefix_length in range(0, len(prefix) + 1):
            delta1 = word[:prefix_length]
            delta2 = word[prefix_length:prefix_length + cycle_length]
            if same_omega_word(delta1, delta2, prefix, cycle):
                return delta1, delta2
    return prefix, cycle


def rotations(word: Sequence[str]) -> Set[Word]:
    """All cyclic rotations gamma.beta of word = beta.gamma."""
    word = tuple(word)
    if not word:
        return {()}
    return {word[i:] + word[:i] for i in range(len(word))}


def concat(x: RegularString, y: RegularString) -> RegularString:
    """x.y; an infinite left operand absorbs the right one."""
    if not x.is_finite:
        return x
    if x.is_empty:
        return y
    return RegularString(x.prefix + y.prefix, y.cycle)


def power_omega(word: Sequence[str]) -> RegularString:
    """word^w, with eps^w = eps."""
    return RegularString((), tuple(word))


def truncate_unnormed(x: RegularString, norms: NormTable) -> RegularString:
    """Cut the string right after its first unnormed nonterminal."""
    for index, symbol in enumerate(x.prefix):
        if not norms.is_normed(symbol):
            if index == len(x.prefix) - 1 and x.is_finite:
                return x
            return RegularString(x.prefix[:index + 1], ())
    for index, symbol in enumerate(x.cycle):
        if not norms.is_normed(symbol):
            return RegularString(x.prefix + x.cycle[:index + 1], ())
    return x


def is_truncated(x: RegularString, norms: NormTable) -> bool:
    return truncate_unnormed(x, norms) == x


def norm_of(x: RegularString, norms: NormTable) -> ExtNat:
    if not x.is_finite:
        return OMEGA
    return norms.word_norm(x.prefix)


def size_of(x: RegularString, norms: NormTable) -> int:
    """
    Size of a truncated string.

    Finite strings measure the norm of their longest normed prefix; infinite
    ones the norm of prefix.cycle of the canonical presentation.

    Raises:
        ContractViolation: If x is not truncated
    """
    if not is_truncated(x, norms):
        raise ContractViolation(f"size_of expects a truncated string, got {x}")
    if x.is_finite:
        return norms.prefix_size(x.prefix)
    return norms.word_norm(x.prefix + x.cycle).finite


def size_of_pair(pair: Pair, norms: NormTable) -> int:
    return max(size_of(pair[0], norms), size_of(pair[1], norms))


def cycle_size(x: RegularString, norms: NormTable) -> int:
    """Norm of the cycle of a truncated string; 0 when finite."""
    if x.is_finite:
        return 0
    return norms.word_norm(x.cycle).finite


def prefix_size(x: RegularString, norms: NormTable) -> int:
    """Size of the canonical prefix of a truncated string."""
    return norms.prefix_size(x.prefix)


def has_bounded_cycle(x: RegularString, bound: int, norms: NormTable) -> bool:
    """Whether the canonical cycle has size at most `bound`."""
    return cycle_size(x, norms) <= bound
