"""Mock proof system: setup ceremony, prover, verifier and outer wrapping.

This is NOT a sound proof system.  A `MockProof` commits to the witness and
binds the statement (circuit and public inputs, η included), but a verifier
only checks the statement binding; it trusts the prover to have run the
satisfaction check.  What it does reproduce is the cost profile: proving
runs a full R1CS satisfaction check (linear in constraints), verifying
touches only digests, and a proof serializes to a fixed 160 bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from pouw.circuit import CircuitId
from pouw.encoding import Hash256, check_hash, encode_fields, sha256, u32
from pouw.errors import KeyMismatch, NoContributions, UnsatisfiedWitness
from pouw.field import FieldElement
from pouw.r1cs import R1CS, Witness, check_satisfaction

PROOF_SIZE = 160
ADDRESS_LEN = 20
CONTRIBUTION_LEN = 32


@dataclass(frozen=True)
class KeyMaterial:
    circuit_id: CircuitId
    r1cs_digest: Hash256
    setup_seed: Hash256
    modulus: int

    def to_dict(self) -> dict:
        return {
            "circuit_id": self.circuit_id.hex,
            "r1cs_digest": self.r1cs_digest.hex(),
            "setup_seed": self.setup_seed.hex(),
            "modulus": str(self.modulus),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KeyMaterial":
        return cls(
            CircuitId.from_hex(data["circuit_id"]),
            bytes.fromhex(data["r1cs_digest"]),
            bytes.fromhex(data["setup_seed"]),
            int(data["modulus"]),
        )


ProvingKey = KeyMaterial
VerifyingKey = KeyMaterial


@dataclass(frozen=True)
class MockKeys:
    proving_key: ProvingKey
    verifying_key: VerifyingKey

    def to_dict(self) -> dict:
        return {"proving_key": self.proving_key.to_dict(),
                "verifying_key": self.verifying_key.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "MockKeys":
        return cls(KeyMaterial.from_dict(data["proving_key"]),
                   KeyMaterial.from_dict(data["verifying_key"]))


@dataclass(frozen=True)
class MockProof:
    circuit_id: CircuitId
    public_input_digest: Hash256
    witness_commitment: Hash256

    def to_bytes(self) -> bytes:
        body = self.circuit_id.digest + self.public_input_digest + self.witness_commitment
        return body + bytes(PROOF_SIZE - len(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "MockProof":
        if len(data) != PROOF_SIZE or any(data[96:]):
            raise ValueError(f"a mock proof is exactly {PROOF_SIZE} bytes with zero padding")
        return cls(CircuitId(data[:32]), data[32:64], data[64:96])

    @property
    def digest(self) -> Hash256:
        return sha256(self.to_bytes())


def public_input_digest(modulus: int, public_inputs: Sequence[FieldElement | int]) -> Hash256:
    width = (modulus.bit_length() + 7) // 8
    encoded = [(int(v) % modulus).to_bytes(width, "big") for v in public_inputs]
    return sha256(encode_fields(u32(len(encoded)), *encoded))


def mock_setup(
    r1cs: R1CS,
    contributions: Sequence[bytes],
    *,
    circuit_id: CircuitId | None = None,
) -> MockKeys:
    """Aggregate ceremony contributions into a shared setup seed.

    The seed is the hash of all contributions in order, so changing (or
    reordering) any one of them changes both keys.
    """
    if not contributions:
        raise NoContributions("trusted setup needs at least one contribution")
    for c in contributions:
        if len(c) != CONTRIBUTION_LEN:
            raise ValueError(f"contributions are {CONTRIBUTION_LEN} bytes, got {len(c)}")
    seed = sha256(b"".join(contributions))
    digest = r1cs.digest()
    cid = circuit_id or CircuitId(digest)
    key = KeyMaterial(cid, digest, seed, r1cs.field.modulus)
    return MockKeys(proving_key=key, verifying_key=key)


def mock_prove(
    pk: ProvingKey,
    r1cs: R1CS,
    witness: Witness,
    public_inputs: Sequence[FieldElement | int],
) -> MockProof:
    if pk.r1cs_digest != r1cs.digest() or pk.modulus != r1cs.field.modulus:
        raise KeyMismatch("proving key was not generated for this R1CS")
    values = [int(v) % pk.modulus for v in public_inputs]
    if len(values) != r1cs.n_public or tuple(values) != witness.public_values(r1cs.n_public):
        raise UnsatisfiedWitness("public inputs do not match the witness")
    if not check_satisfaction(r1cs, witness):
        raise UnsatisfiedWitness("witness does not satisfy the constraint system")
    return MockProof(
        circuit_id=pk.circuit_id,
        public_input_digest=public_input_digest(pk.modulus, values),
        witness_commitment=sha256(pk.setup_seed, witness.to_bytes()),
    )


def mock_verify(
    vk: VerifyingKey, proof: MockProof, public_inputs: Sequence[FieldElement | int]
) -> bool:
    return (
        proof.circuit_id == vk.circuit_id
        and proof.public_input_digest == public_input_digest(vk.modulus, public_inputs)
    )


# -- outer wrapping -------------------------------------------------------------

@dataclass(frozen=True)
class OuterProof:
    """Published wrapper: the inner proof itself stays with the miner."""

    inner_digest: Hash256
    prev_block_hash: Hash256
    miner_addr: bytes
    outer_commitment: Hash256

    def to_bytes(self) -> bytes:
        return self.inner_digest + self.prev_block_hash + self.miner_addr + self.outer_commitment


def _outer_commitment(inner_digest: bytes, prev_block_hash: bytes, miner_addr: bytes) -> Hash256:
    return sha256(inner_digest, prev_block_hash, miner_addr)


def wrap_outer(inner: MockProof, prev_block_hash: Hash256, miner_addr: bytes) -> OuterProof:
    check_hash("prev_block_hash", prev_block_hash)
    if len(miner_addr) != ADDRESS_LEN:
        raise ValueError(f"miner_addr must be {ADDRESS_LEN} bytes")
    digest = inner.digest
    return OuterProof(
        digest, prev_block_hash, miner_addr, _outer_commitment(digest, prev_block_hash, miner_addr)
    )


def verify_outer(outer: OuterProof, expected_prev_hash: Hash256, expected_miner: bytes) -> bool:
    if outer.prev_block_hash != expected_prev_hash or outer.miner_addr != expected_miner:
        return False
    return outer.outer_commitment == _outer_commitment(
        outer.inner_digest, expected_prev_hash, expected_miner
    )
