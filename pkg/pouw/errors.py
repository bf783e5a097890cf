"""Exception hierarchy for pouw.

Every error raised on purpose by the package derives from :class:`PouwError`,
so the CLI can map domain failures to exit status 1 and configuration
problems to exit status 2 with a single ``except`` clause.
"""

from __future__ import annotations


class PouwError(Exception):
    """Root of all pouw errors."""


class LengthMismatch(PouwError):
    """Two sequences that must line up have different lengths."""


# -- field --------------------------------------------------------------------

class FieldError(PouwError):
    pass


class InversionOfZero(FieldError, ZeroDivisionError):
    pass


class MixedFields(FieldError):
    pass


# -- circuit language -----------------------------------------------------------

class CircuitError(PouwError):
    pass


class CircuitSyntaxError(CircuitError):
    """Parse failure with the position of the offending token."""

    def __init__(self, line: int, col: int, expected: str, found: str = "") -> None:
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found else ""
        super().__init__(f"line {line}, col {col}: expected {expected}{detail}")


class UndeclaredIdentifier(CircuitError):
    def __init__(self, name: str, line: int = 0) -> None:
        self.name = name
        self.line = line
        where = f" (line {line})" if line else ""
        super().__init__(f"undeclared identifier {name!r}{where}")


class DuplicateDeclaration(CircuitError):
    def __init__(self, name: str, line: int = 0) -> None:
        self.name = name
        self.line = line
        where = f" (line {line})" if line else ""
        super().__init__(f"identifier {name!r} declared twice{where}")


class CompileError(CircuitError):
    pass


class FieldMismatch(CompileError):
    pass


class DegreeTooHigh(CompileError):
    pass


class NoConstraints(CompileError):
    pass


class WitnessError(CircuitError):
    pass


class ArityMismatch(WitnessError):
    pass


class UnsatisfiedAssertion(WitnessError):
    def __init__(self, statement_index: int, detail: str = "") -> None:
        self.statement_index = statement_index
        suffix = f": {detail}" if detail else ""
        super().__init__(f"assertion at statement {statement_index} not satisfied{suffix}")


# -- protocol -------------------------------------------------------------------

class ProtocolError(PouwError):
    pass


class EmptyChain(ProtocolError):
    pass


class PrefixTooLong(ProtocolError):
    pass


class DomainError(ProtocolError):
    pass


# -- proofs and WOO -----------------------------------------------------------

class ProverError(PouwError):
    pass


class NoContributions(ProverError):
    pass


class KeyMismatch(ProverError):
    pass


class UnsatisfiedWitness(ProverError):
    pass


class WooError(PouwError):
    pass


class NameCollision(WooError):
    pass


class Mismatch(WooError):
    pass


# -- registry -------------------------------------------------------------------

class RegistryError(PouwError):
    pass


class CompileFailed(RegistryError):
    pass


class IntegrityParamUnused(RegistryError):
    pass


class FeeTooLow(RegistryError):
    pass


class NoActiveNodes(RegistryError):
    pass


class NoValidContributions(RegistryError):
    pass


class NotFound(RegistryError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else "not found"


class UnknownNode(RegistryError):
    pass


class AlreadyInactive(RegistryError):
    pass


# -- simulation -----------------------------------------------------------------

class SimulationError(PouwError):
    pass


class Empty(SimulationError, ValueError):
    pass


class AllZero(SimulationError, ValueError):
    pass


# -- configuration ------------------------------------------------------------

class ConfigError(PouwError):
    """Invalid configuration file, override or simulation config."""
