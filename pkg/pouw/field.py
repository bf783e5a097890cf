"""Prime-field arithmetic.

`PrimeField` validates its modulus once (deterministic Miller-Rabin below
2^64) and hands out `FieldElement` values that always hold the canonical
representative in ``[0, modulus)``.  Hot paths (compilation, satisfaction
checks) work on plain ints reduced by the field; `FieldElement` is the
user-facing carrier for masks, inputs and witness entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from pouw.errors import InversionOfZero, MixedFields

DEFAULT_MODULUS = 2**61 - 1
MIN_PRODUCTION_MODULUS = 2**16

# Sufficient for a deterministic answer for every n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin with a fixed witness set (deterministic for n < 2^64)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    modulus: int = DEFAULT_MODULUS

    def __post_init__(self) -> None:
        if not isinstance(self.modulus, int) or not is_prime(self.modulus):
            raise ValueError(f"field modulus must be prime, got {self.modulus!r}")

    @classmethod
    def production(cls, modulus: int = DEFAULT_MODULUS) -> "PrimeField":
        """A field large enough for meaningful masking (modulus > 2^16)."""
        if modulus <= MIN_PRODUCTION_MODULUS:
            raise ValueError(f"field modulus must exceed 2^16, got {modulus}")
        return cls(modulus)

    @property
    def byte_width(self) -> int:
        return (self.modulus.bit_length() + 7) // 8

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.modulus, self)

    def element(self, value: int) -> "FieldElement":
        return self(value)

    def elements(self, values: Iterable[int]) -> tuple["FieldElement", ...]:
        return tuple(self(v) for v in values)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def from_bytes(self, data: bytes) -> "FieldElement":
        """Interpret *data* big-endian and reduce modulo the field."""
        return self(int.from_bytes(data, "big"))

    def encode(self, value: int) -> bytes:
        """Fixed-width big-endian encoding of a canonical value."""
        return (value % self.modulus).to_bytes(self.byte_width, "big")

    def inv(self, value: int) -> int:
        value %= self.modulus
        if value == 0:
            raise InversionOfZero(f"0 has no inverse mod {self.modulus}")
        return pow(value, self.modulus - 2, self.modulus)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.field.modulus:
            raise ValueError(f"{self.value} is not a canonical element mod {self.field.modulus}")

    def _peer(self, other: "FieldElement | int") -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MixedFields(
                    f"operands live in different fields "
                    f"({self.field.modulus} vs {other.field.modulus})"
                )
            return other.value
        return other

    def __add__(self, other: "FieldElement | int") -> "FieldElement":
        return self.field(self.value + self._peer(other))

    __radd__ = __add__

    def __sub__(self, other: "FieldElement | int") -> "FieldElement":
        return self.field(self.value - self._peer(other))

    def __rsub__(self, other: int) -> "FieldElement":
        return self.field(other - self.value)

    def __mul__(self, other: "FieldElement | int") -> "FieldElement":
        return self.field(self.value * self._peer(other))

    __rmul__ = __mul__

    def __neg__(self) -> "FieldElement":
        return self.field(-self.value)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.field.modulus})"

    def to_bytes(self) -> bytes:
        return self.field.encode(self.value)


def field_arith(op: str, a: FieldElement, b: FieldElement | None = None) -> FieldElement:
    """Apply one of ``add``, ``sub``, ``mul``, ``inv``, ``neg``."""
    if op == "inv":
        return a.inverse()
    if op == "neg":
        return -a
    if b is None:
        raise ValueError(f"operation {op!r} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown field operation {op!r}")
