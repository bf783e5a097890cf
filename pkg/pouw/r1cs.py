"""Compilation of circuits to R1CS, witness generation and satisfaction checks.

Variables are laid out as::

    0                      the constant ONE
    1 .. n_public          public parameters, in declaration order
    n_public+1 ..          private parameters, in declaration order
    ...                    auxiliaries, in first-use order

Expressions flatten to linear combinations (``{index: coeff}``).  A product
of two non-constant combinations gets an auxiliary ``t`` and the constraint
``(L1, L2, t)``; an assert whose left (or right) side is such a product uses
the product directly as its one constraint.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from pouw.circuit import Assert, BinOp, Circuit, Const, Define, Expr, Var, synthetic_chain_circuit
from pouw.errors import (
    ArityMismatch,
    DegreeTooHigh,
    FieldMismatch,
    LengthMismatch,
    MixedFields,
    NoConstraints,
    UnsatisfiedAssertion,
    WitnessError,
)
from pouw.field import FieldElement, PrimeField

Row = tuple[tuple[int, int], ...]
Constraint = tuple[Row, Row, Row]

ONE = 0


@dataclass(frozen=True)
class R1CS:
    field: PrimeField
    n_vars: int
    n_public: int
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        if self.n_vars < 1 or not 0 <= self.n_public < self.n_vars:
            raise ValueError(f"bad layout: n_vars={self.n_vars} n_public={self.n_public}")
        for i, constraint in enumerate(self.constraints):
            for row in constraint:
                for idx, _ in row:
                    if not 0 <= idx < self.n_vars:
                        raise ValueError(f"constraint {i} references variable {idx}")

    @property
    def nonzeros(self) -> int:
        return sum(len(row) for c in self.constraints for row in c)

    def row_elements(self, i: int) -> tuple[dict[int, FieldElement], ...]:
        """Constraint *i* as three sparse maps ``index -> FieldElement``."""
        f = self.field
        return tuple({idx: f(coeff) for idx, coeff in row} for row in self.constraints[i])

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_json().encode("utf-8")).digest()

    def to_dict(self) -> dict:
        return {
            "modulus": str(self.field.modulus),
            "n_vars": self.n_vars,
            "n_public": self.n_public,
            "constraints": [
                [{str(idx): str(coeff) for idx, coeff in row} for row in c]
                for c in self.constraints
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "R1CS":
        field = PrimeField(int(data["modulus"]))
        constraints = tuple(
            tuple(
                tuple(sorted((int(k), int(v) % field.modulus) for k, v in row.items()))
                for row in c
            )
            for c in data["constraints"]
        )
        return cls(field, int(data["n_vars"]), int(data["n_public"]), constraints)

    @classmethod
    def from_json(cls, text: str) -> "R1CS":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Witness:
    """Dense assignment; ``values[0]`` is 1 for every witness the compiler produces."""

    field: PrimeField
    values: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def elements(self) -> tuple[FieldElement, ...]:
        return self.field.elements(self.values)

    def public_values(self, n_public: int) -> tuple[int, ...]:
        return self.values[1:n_public + 1]

    def to_bytes(self) -> bytes:
        return b"".join(self.field.encode(v) for v in self.values)


def constraint_count(r1cs: R1CS) -> int:
    return len(r1cs.constraints)


# -- flattening -----------------------------------------------------------------

LC = dict[int, int]


class _Flattener:
    """Walks a circuit once, emitting constraints and (optionally) values.

    With ``values`` set, every allocated variable gets a concrete value and
    each assert is checked as it is reached.
    """

    def __init__(
        self,
        circuit: Circuit,
        field: PrimeField,
        values: list[int] | None = None,
        check: bool = True,
    ):
        self.circuit = circuit
        self.field = field
        self.p = field.modulus
        self.values = values
        self.check = check and values is not None
        self.env: dict[str, LC] = {}
        self.locals: dict[str, int] = {}
        self.constraints: list[Constraint] = []
        self.n_vars = 1
        publics = circuit.public_params
        for param in publics + circuit.private_params:
            self.env[param.name] = {self.n_vars: 1}
            self.n_vars += 1
        self.n_public = len(publics)

    def _alloc(self, value: int | None = None) -> int:
        idx = self.n_vars
        self.n_vars += 1
        if self.values is not None:
            self.values.append(value % self.p)
        return idx

    def _eval(self, lc: LC) -> int:
        vals = self.values
        return sum(coeff * vals[idx] for idx, coeff in lc.items()) % self.p

    def _row(self, lc: LC) -> Row:
        return tuple(sorted((idx, c) for idx, c in lc.items() if c % self.p))

    def _emit(self, a: LC, b: LC, c: LC) -> None:
        constraint = (self._row(a), self._row(b), self._row(c))
        for row in constraint:
            if any(not isinstance(idx, int) or idx >= self.n_vars for idx, _ in row):
                raise DegreeTooHigh("internal: constraint row is not a linear combination")
        self.constraints.append(constraint)

    def _combine(self, a: LC, b: LC, sign: int) -> LC:
        out = dict(a)
        for idx, coeff in b.items():
            out[idx] = (out.get(idx, 0) + sign * coeff) % self.p
        return {idx: c for idx, c in out.items() if c}

    @staticmethod
    def _constant(lc: LC) -> int | None:
        if not lc:
            return 0
        if len(lc) == 1 and ONE in lc:
            return lc[ONE]
        return None

    def _scale(self, lc: LC, k: int) -> LC:
        return {idx: c * k % self.p for idx, c in lc.items() if c * k % self.p}

    def expr(self, node: Expr) -> LC:
        if isinstance(node, Const):
            if node.value >= self.p:
                raise FieldMismatch(f"literal {node.value} does not fit modulus {self.p}")
            return {ONE: node.value} if node.value else {}
        if isinstance(node, Var):
            return dict(self.env[node.name])
        left = self.expr(node.left)
        right = self.expr(node.right)
        if node.op == "+":
            return self._combine(left, right, 1)
        if node.op == "-":
            return self._combine(left, right, -1)
        return self._product(left, right)

    def _product(self, left: LC, right: LC) -> LC:
        k = self._constant(left)
        if k is not None:
            return self._scale(right, k)
        k = self._constant(right)
        if k is not None:
            return self._scale(left, k)
        value = self._eval(left) * self._eval(right) if self.values is not None else None
        t = self._alloc(value)
        self._emit(left, right, {t: 1})
        return {t: 1}

    def _side(self, node: Expr) -> LC | tuple[LC, LC]:
        """Flatten one assert operand, keeping a top-level non-constant product unexpanded."""
        if not (isinstance(node, BinOp) and node.op == "*"):
            return self.expr(node)
        left = self.expr(node.left)
        right = self.expr(node.right)
        if self._constant(left) is not None or self._constant(right) is not None:
            return self._product(left, right)
        return left, right

    def _as_lc(self, side: LC | tuple[LC, LC]) -> LC:
        return self._product(*side) if isinstance(side, tuple) else side

    def run(self) -> None:
        for index, stmt in enumerate(self.circuit.statements):
            if isinstance(stmt, Define):
                self._define(stmt)
            else:
                self._assert(index, stmt)

    def _define(self, stmt: Define) -> None:
        lc = self.expr(stmt.expr)
        if not stmt.constrained:
            self.env[stmt.name] = lc
        else:
            value = self._eval(lc) if self.values is not None else None
            x = self._alloc(value)
            self._emit(self._combine(lc, {x: 1}, -1), {ONE: 1}, {})
            self.env[stmt.name] = {x: 1}
        if self.values is not None:
            self.locals[stmt.name] = self._eval(self.env[stmt.name])

    def _assert(self, index: int, stmt: Assert) -> None:
        if stmt.op == "!=":
            diff = self._combine(self.expr(stmt.left), self.expr(stmt.right), -1)
            value = None
            if self.values is not None:
                d = self._eval(diff)
                if d == 0 and self.check:
                    raise UnsatisfiedAssertion(index, "operands are equal")
                value = self.field.inv(d) if d else 0
            v = self._alloc(value)
            self._emit(diff, {v: 1}, {ONE: 1})
            return

        left = self._side(stmt.left)
        right = self._side(stmt.right)
        if isinstance(left, tuple) or isinstance(right, tuple):
            if isinstance(left, tuple):
                (a, b), c = left, self._as_lc(right)
            else:
                (a, b), c = right, left
            if self.check and self._eval(a) * self._eval(b) % self.p != self._eval(c):
                raise UnsatisfiedAssertion(index, "product does not match")
            self._emit(a, b, c)
            return

        diff = self._combine(left, right, -1)
        if self.check and self._eval(diff) != 0:
            raise UnsatisfiedAssertion(index, "sides differ")
        self._emit(diff, {ONE: 1}, {})


def compile_circuit(circuit: Circuit, field: PrimeField) -> R1CS:
    flat = _Flattener(circuit, field)
    flat.run()
    if not flat.constraints:
        raise NoConstraints(f"circuit {circuit.name!r} produces no constraints")
    return R1CS(field, flat.n_vars, flat.n_public, tuple(flat.constraints))


def _coerce(field: PrimeField, values: Iterable[FieldElement | int]) -> list[int]:
    out = []
    for v in values:
        if isinstance(v, FieldElement):
            if v.field != field:
                raise MixedFields(f"input from field {v.field.modulus}, expected {field.modulus}")
            out.append(v.value)
        else:
            out.append(int(v) % field.modulus)
    return out


def _run_with_values(
    circuit: Circuit,
    field: PrimeField,
    public_inputs: Sequence[FieldElement | int],
    private_inputs: Sequence[FieldElement | int],
    check: bool = True,
) -> _Flattener:
    n_pub, n_priv = len(circuit.public_params), len(circuit.private_params)
    if len(public_inputs) != n_pub or len(private_inputs) != n_priv:
        raise ArityMismatch(
            f"expected {n_pub} public and {n_priv} private inputs, "
            f"got {len(public_inputs)} and {len(private_inputs)}"
        )
    values = [1] + _coerce(field, public_inputs) + _coerce(field, private_inputs)
    flat = _Flattener(circuit, field, values, check)
    flat.run()
    return flat


def generate_witness(
    circuit: Circuit,
    r1cs: R1CS,
    public_inputs: Sequence[FieldElement | int],
    private_inputs: Sequence[FieldElement | int],
    *,
    check: bool = True,
) -> Witness:
    """Fill every variable from the inputs.

    With *check* off, failing asserts do not raise and the witness simply
    fails `check_satisfaction`.
    """
    flat = _run_with_values(circuit, r1cs.field, public_inputs, private_inputs, check)
    if flat.n_vars != r1cs.n_vars or flat.n_public != r1cs.n_public:
        raise WitnessError("R1CS was not compiled from this circuit")
    return Witness(r1cs.field, tuple(flat.values))


def evaluate_locals(
    circuit: Circuit,
    field: PrimeField,
    public_inputs: Sequence[FieldElement | int],
    private_inputs: Sequence[FieldElement | int],
    *,
    check: bool = True,
) -> dict[str, int]:
    """Values of every local definition, checking asserts along the way unless *check* is off."""
    return _run_with_values(circuit, field, public_inputs, private_inputs, check).locals


def check_satisfaction(r1cs: R1CS, witness: Witness) -> bool:
    if len(witness.values) != r1cs.n_vars:
        raise LengthMismatch(f"witness has {len(witness.values)} values, R1CS {r1cs.n_vars}")
    if witness.field != r1cs.field:
        raise MixedFields("witness and R1CS use different fields")
    w = witness.values
    p = r1cs.field.modulus
    for a, b, c in r1cs.constraints:
        lhs = sum(k * w[i] for i, k in a) * sum(k * w[i] for i, k in b)
        if (lhs - sum(k * w[i] for i, k in c)) % p:
            return False
    return True


# -- cost model -----------------------------------------------------------------

def fit_linear_cost(sizes: Sequence[float], times: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares fit of ``T(n) = a*n + b``; returns ``(a, b, r_squared)``."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(times, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise LengthMismatch("need at least two matching (size, time) points")
    a, b = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (a * x + b)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


def measure_check_cost(
    sizes: Sequence[int], field: PrimeField | None = None, repeats: int = 3
) -> list[float]:
    """Best-of-*repeats* satisfaction-check time for synthetic circuits of each size."""
    field = field or PrimeField()
    times = []
    for n in sizes:
        circuit = synthetic_chain_circuit(n)
        r1cs = compile_circuit(circuit, field)
        witness = generate_witness(circuit, r1cs, [], [3, 5])
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            check_satisfaction(r1cs, witness)
            best = min(best, time.perf_counter() - start)
        times.append(best)
    return times
