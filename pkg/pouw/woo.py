"""Witness-obfuscating outsourcing.

The client hides its private inputs with additive masks, ``ŝ = s + r``, and
the circuit is rewritten so the masks are hard-coded constants:

* every private parameter ``s`` becomes a private ``__woo_in_s`` plus the
  constrained local ``field s <== __woo_in_s - r;``
* every declared output ``out_x`` gets a public twin ``__woo_out_out_x``
  with ``assert(__woo_out_out_x == out_x + r);``
* a public ``integrity`` parameter is appended with ``assert(integrity != 0);``

A worker proves the rewritten circuit from the masked values alone, and
only the client can strip the output masks again.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from pouw.circuit import (
    Assert,
    BinOp,
    Circuit,
    Const,
    Define,
    Param,
    Var,
)
from pouw.encoding import sha256, u64
from pouw.errors import LengthMismatch, Mismatch, NameCollision
from pouw.field import FieldElement, PrimeField
from pouw.prover import mock_prove, mock_setup
from pouw.r1cs import R1CS, compile_circuit, constraint_count, evaluate_locals, generate_witness

INTEGRITY_PARAM = "integrity"
RESERVED_PREFIX = "__woo_"
IN_PREFIX = "__woo_in_"
OUT_PREFIX = "__woo_out_"
DEFAULT_ETA = 7


@dataclass(frozen=True)
class MaskVector:
    r_in: tuple[FieldElement, ...]
    r_out: tuple[FieldElement, ...]

    def to_dict(self, circuit: Circuit) -> dict:
        return {
            "r_in": {p.name: str(r.value) for p, r in zip(circuit.private_params, self.r_in)},
            "r_out": {o: str(r.value) for o, r in zip(circuit.outputs, self.r_out)},
        }

    @classmethod
    def from_dict(cls, data: dict, circuit: Circuit, field: PrimeField) -> "MaskVector":
        try:
            r_in = tuple(field(int(data["r_in"][p.name])) for p in circuit.private_params)
            r_out = tuple(field(int(data["r_out"][o])) for o in circuit.outputs)
        except KeyError as exc:
            raise Mismatch(f"mask file has no entry for {exc.args[0]!r}") from None
        return cls(r_in, r_out)


def _uniform_stream(seed: bytes, field: PrimeField):
    """Uniform field elements by rejection sampling over a SHA-256 counter stream."""
    width = max(8, field.byte_width)
    space = 1 << (8 * width)
    limit = space - space % field.modulus
    buf = b""
    counter = 0
    while True:
        while len(buf) < width:
            buf += sha256(seed, u64(counter))
            counter += 1
        chunk, buf = buf[:width], buf[width:]
        value = int.from_bytes(chunk, "big")
        if value < limit:
            yield field(value % field.modulus)


def sample_masks(circuit: Circuit, seed: bytes, field: PrimeField | None = None) -> MaskVector:
    field = field or PrimeField()
    stream = _uniform_stream(seed, field)
    r_in = tuple(next(stream) for _ in circuit.private_params)
    r_out = tuple(next(stream) for _ in circuit.outputs)
    return MaskVector(r_in, r_out)


def _coerce(values: Sequence[FieldElement | int], field: PrimeField) -> list[FieldElement]:
    return [v if isinstance(v, FieldElement) else field(int(v)) for v in values]


def mask_inputs(
    private_inputs: Sequence[FieldElement | int], masks: MaskVector
) -> tuple[FieldElement, ...]:
    if len(private_inputs) != len(masks.r_in):
        raise LengthMismatch(
            f"{len(private_inputs)} private inputs but {len(masks.r_in)} input masks"
        )
    if not masks.r_in:
        return ()
    field = masks.r_in[0].field
    return tuple(s + r for s, r in zip(_coerce(private_inputs, field), masks.r_in))


def unmask(value: FieldElement, r: FieldElement) -> FieldElement:
    return value - r


# -- circuit transformation -----------------------------------------------------

@dataclass(frozen=True)
class TransformedCircuit:
    base: Circuit
    masks: MaskVector
    circuit: Circuit
    compiled: R1CS
    integrity_param: str = INTEGRITY_PARAM

    @property
    def source(self) -> str:
        return self.circuit.to_source()

    @property
    def integrity_position(self) -> int:
        """Index of the integrity parameter among the public inputs."""
        return [p.name for p in self.circuit.public_params].index(self.integrity_param)


def _declared_names(circuit: Circuit) -> list[str]:
    return list(circuit.param_names()) + [
        s.name for s in circuit.statements if isinstance(s, Define)
    ]


def transform_circuit(circuit: Circuit, masks: MaskVector, field: PrimeField) -> TransformedCircuit:
    for name in _declared_names(circuit):
        if name == INTEGRITY_PARAM or name.startswith(RESERVED_PREFIX):
            raise NameCollision(f"circuit already declares reserved name {name!r}")
    privates = circuit.private_params
    outputs = circuit.outputs
    if len(masks.r_in) != len(privates) or len(masks.r_out) != len(outputs):
        raise LengthMismatch(
            f"masks cover {len(masks.r_in)}/{len(masks.r_out)} inputs/outputs, "
            f"circuit has {len(privates)}/{len(outputs)}"
        )
    for r in masks.r_in + masks.r_out:
        if r.field != field:
            raise Mismatch("masks were sampled in a different field")

    params = (
        circuit.public_params
        + tuple(Param("public", OUT_PREFIX + o) for o in outputs)
        + (Param("public", INTEGRITY_PARAM),)
        + tuple(Param("private", IN_PREFIX + p.name, p.type) for p in privates)
    )
    unmasking = tuple(
        Define(p.name, BinOp("-", Var(IN_PREFIX + p.name), Const(r.value)), constrained=True)
        for p, r in zip(privates, masks.r_in)
    )
    output_masking = tuple(
        Assert(Var(OUT_PREFIX + o), "==", BinOp("+", Var(o), Const(r.value)))
        for o, r in zip(outputs, masks.r_out)
    )
    integrity = (Assert(Var(INTEGRITY_PARAM), "!=", Const(0)),)
    rewritten = Circuit(
        circuit.name, params, unmasking + circuit.statements + output_masking + integrity
    )
    return TransformedCircuit(circuit, masks, rewritten, compile_circuit(rewritten, field))


# -- client workflow ------------------------------------------------------------

@dataclass(frozen=True)
class WooRequest:
    """What the client publishes: public inputs (with masked output twins) and masked privates."""

    public_inputs: tuple[FieldElement, ...]
    masked_private: tuple[FieldElement, ...]


def client_request(
    transformed: TransformedCircuit,
    public_inputs: Sequence[FieldElement | int],
    private_inputs: Sequence[FieldElement | int],
    *,
    check: bool = True,
) -> WooRequest:
    field = transformed.compiled.field
    base = transformed.base
    local_values = evaluate_locals(base, field, public_inputs, private_inputs, check=check)
    twins = tuple(
        field(local_values[o]) + r for o, r in zip(base.outputs, transformed.masks.r_out)
    )
    return WooRequest(
        public_inputs=tuple(_coerce(public_inputs, field)) + twins,
        masked_private=mask_inputs(_coerce(private_inputs, field), transformed.masks),
    )


def with_integrity(
    transformed: TransformedCircuit, public_inputs: Sequence[FieldElement | int], eta: int
) -> tuple[int, ...]:
    """Public inputs of the rewritten circuit with η placed at its slot."""
    values = [int(v) for v in public_inputs]
    values.insert(transformed.integrity_position, eta % transformed.compiled.field.modulus)
    return tuple(values)


def decode_outputs(
    transformed: TransformedCircuit, public_inputs: Sequence[FieldElement | int]
) -> dict[str, FieldElement]:
    """Strip the output masks from the public twins (η may or may not be present)."""
    field = transformed.compiled.field
    names = [p.name for p in transformed.circuit.public_params]
    if len(public_inputs) == len(names) - 1:
        names.remove(transformed.integrity_param)
    if len(public_inputs) != len(names):
        raise LengthMismatch(f"expected {len(names)} public inputs, got {len(public_inputs)}")
    by_name = dict(zip(names, _coerce(public_inputs, field)))
    return {
        o: unmask(by_name[OUT_PREFIX + o], r)
        for o, r in zip(transformed.base.outputs, transformed.masks.r_out)
    }


# -- overhead benchmark ---------------------------------------------------------

def _best_prove_time(
    circuit: Circuit,
    r1cs: R1CS,
    public: Sequence[FieldElement | int],
    private: Sequence[FieldElement | int],
    repeats: int,
) -> float:
    keys = mock_setup(r1cs, [bytes(32)])
    witness = generate_witness(circuit, r1cs, public, private)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        mock_prove(keys.proving_key, r1cs, witness, witness.public_values(r1cs.n_public))
        best = min(best, time.perf_counter() - start)
    return best


def woo_overhead(
    base: Circuit,
    transformed: TransformedCircuit,
    *,
    public_inputs: Sequence[int] | None = None,
    private_inputs: Sequence[int] | None = None,
    eta: int = DEFAULT_ETA,
    repeats: int = 3,
) -> tuple[int, float]:
    """Constraint and best-of-*repeats* proving-time deltas of the rewrite.

    Inputs default to no publics and privates ``2, 3, 4, ...``, which satisfy
    the synthetic chain circuits.
    """
    if transformed.base != base:
        raise Mismatch("transformed circuit was not derived from this base circuit")
    field = transformed.compiled.field
    public = list(public_inputs or [])
    private = list(private_inputs or [i + 2 for i in range(len(base.private_params))])
    base_r1cs = compile_circuit(base, field)
    delta_constraints = constraint_count(transformed.compiled) - constraint_count(base_r1cs)

    request = client_request(transformed, public, private)
    full_public = with_integrity(transformed, request.public_inputs, eta)
    t_base = _best_prove_time(base, base_r1cs, public, private, repeats)
    t_woo = _best_prove_time(
        transformed.circuit, transformed.compiled, full_public, request.masked_private, repeats
    )
    return delta_constraints, t_woo - t_base
