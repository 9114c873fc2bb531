"""
Exception hierarchy for bpa-bisim.

Every error raised by the library derives from BpaError so that the CLI can
map whole families onto exit codes.
"""

from typing import Iterable, Optional


class BpaError(Exception):
    """Base class for all library errors."""


class GrammarError(BpaError):
    """Problems with a grammar file or a BPA system."""


class GrammarSyntaxError(GrammarError):
    """Malformed grammar text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndeclaredSymbolError(GrammarError):
    """A rule mentions a nonterminal or action that was never declared."""

    def __init__(self, symbol: str, line: int, column: int, kind: str = "symbol"):
        super().__init__(f"line {line}, column {column}: undeclared {kind} '{symbol}'")
        self.symbol = symbol
        self.line = line
        self.column = column


class EmptyDeclarationError(GrammarError):
    """The nonterminal or action set is empty."""


class DeadNonterminalError(GrammarError):
    """Some nonterminals have no rule; complete_dead must be applied first."""

    def __init__(self, symbols: Iterable[str]):
        self.symbols = tuple(symbols)
        super().__init__(f"dead nonterminals: {', '.join(self.symbols)}")


class StringSyntaxError(BpaError):
    """Malformed regular-string literal."""


class ContractViolation(BpaError):
    """A precondition of a library operation does not hold."""


class InconclusiveError(BpaError):
    """The bounded machinery could not reach a verdict (never a wrong answer)."""


class OracleBudgetExceeded(InconclusiveError):
    """The eq-level memo table grew beyond its cap."""


class SelfCheckFailure(BpaError):
    """An internal consistency check failed; indicates a bug."""


class ProofError(BpaError):
    """A malformed congruence proof or decomposition text."""

    def __init__(self, message: str, step: Optional[int] = None):
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(f"{prefix}{message}")
        self.step = step


class IllegalMoveError(BpaError):
    """A move that the game rules do not allow in the current configuration."""

    def __init__(self, reason: str, phase: int):
        super().__init__(f"phase {phase}: {reason}")
        self.reason = reason
        self.phase = phase
