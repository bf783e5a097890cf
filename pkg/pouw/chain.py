"""Chain data model: transactions, headers, proof links and blocks.

Every digest in the protocol is SHA-256 over the canonical encoding from
:mod:`pouw.encoding`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from pouw.circuit import CircuitId
from pouw.encoding import (
    Hash256,
    check_hash,
    encode_fields,
    encode_values,
    sha256,
    u32,
    u64,
)
from pouw.prover import ADDRESS_LEN, MockProof


def merkle_root(leaves: Sequence[Hash256]) -> Hash256:
    """Binary SHA-256 tree; an odd level duplicates its last node."""
    if not leaves:
        return sha256(b"")
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [sha256(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


# -- transactions ---------------------------------------------------------------

@dataclass(frozen=True)
class CoinTransaction:
    payload: bytes
    fee: int = 0

    @property
    def txid(self) -> Hash256:
        return sha256(encode_fields(b"coin", self.payload, u64(self.fee)))


@dataclass(frozen=True)
class ProofTransaction:
    """A client's request for a proof of one registered circuit.

    ``public_inputs`` exclude the integrity parameter, which the miner binds
    at proving time.  ``private_inputs`` are the (possibly masked) witness
    values the client publishes.
    """

    circuit_id: CircuitId
    public_inputs: tuple[int, ...]
    private_inputs: tuple[int, ...]
    fee: int
    complexity: int
    nonce: int = 0

    @classmethod
    def create(
        cls,
        circuit_id: CircuitId,
        complexity: int,
        public_inputs: Sequence[int],
        private_inputs: Sequence[int],
        fee_rate: int,
        nonce: int = 0,
    ) -> "ProofTransaction":
        return cls(
            circuit_id,
            tuple(int(v) for v in public_inputs),
            tuple(int(v) for v in private_inputs),
            fee_rate * complexity,
            complexity,
            nonce,
        )

    def canonical(self) -> bytes:
        return encode_fields(
            b"proof",
            self.circuit_id.digest,
            encode_values(self.public_inputs),
            encode_values(self.private_inputs),
            u64(self.fee),
            u64(self.complexity),
            u64(self.nonce),
        )

    @property
    def txid(self) -> Hash256:
        return sha256(self.canonical())


# -- blocks ---------------------------------------------------------------------

@dataclass(frozen=True)
class BlockHeader:
    prev_hash: Hash256
    miner_addr: bytes
    bucket_index: int
    coin_root: Hash256
    timestamp: int

    def __post_init__(self) -> None:
        check_hash("prev_hash", self.prev_hash)
        check_hash("coin_root", self.coin_root)
        if len(self.miner_addr) != ADDRESS_LEN:
            raise ValueError(f"miner_addr must be {ADDRESS_LEN} bytes")
        if self.bucket_index < 0 or self.timestamp < 0:
            raise ValueError("bucket_index and timestamp must be non-negative")

    def canonical(self) -> bytes:
        return encode_fields(
            self.prev_hash,
            self.miner_addr,
            u32(self.bucket_index),
            self.coin_root,
            u64(self.timestamp),
        )


@dataclass(frozen=True)
class ProofLink:
    proof_tx: ProofTransaction
    eta: Hash256
    proof: MockProof

    def canonical(self) -> bytes:
        return encode_fields(self.proof_tx.txid, self.eta, self.proof.to_bytes())


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    coin_txs: tuple[CoinTransaction, ...]
    proof_chain: tuple[ProofLink, ...]
    block_hash: Hash256

    @staticmethod
    def compute_hash(header: BlockHeader, proof_chain: Sequence[ProofLink]) -> Hash256:
        return sha256(header.canonical(), *(link.canonical() for link in proof_chain))

    @classmethod
    def assemble(
        cls,
        header: BlockHeader,
        coin_txs: Sequence[CoinTransaction],
        proof_chain: Sequence[ProofLink],
    ) -> "Block":
        chain = tuple(proof_chain)
        return cls(header, tuple(coin_txs), chain, cls.compute_hash(header, chain))

    @property
    def coin_txids(self) -> list[Hash256]:
        return [tx.txid for tx in self.coin_txs]

    @property
    def complexities(self) -> list[int]:
        return [link.proof_tx.complexity for link in self.proof_chain]

    @property
    def total_fees(self) -> int:
        return sum(link.proof_tx.fee for link in self.proof_chain) + sum(
            tx.fee for tx in self.coin_txs
        )


def block_to_dict(block: Block) -> dict:
    h = block.header
    return {
        "block_hash": block.block_hash.hex(),
        "header": {
            "prev_hash": h.prev_hash.hex(),
            "miner_addr": h.miner_addr.hex(),
            "bucket_index": h.bucket_index,
            "coin_root": h.coin_root.hex(),
            "timestamp": h.timestamp,
        },
        "coin_txs": [
            {"txid": tx.txid.hex(), "payload": tx.payload.hex(), "fee": tx.fee}
            for tx in block.coin_txs
        ],
        "proof_chain": [
            {
                "txid": link.proof_tx.txid.hex(),
                "circuit_id": link.proof_tx.circuit_id.hex,
                "public_inputs": [str(v) for v in link.proof_tx.public_inputs],
                "fee": link.proof_tx.fee,
                "complexity": link.proof_tx.complexity,
                "eta": link.eta.hex(),
                "proof": link.proof.to_bytes().hex(),
            }
            for link in block.proof_chain
        ],
    }


def block_to_json(block: Block, indent: int | None = 2) -> str:
    return json.dumps(block_to_dict(block), indent=indent)
