"""Integrity chain, block production and block verification.

Each proof in a block is bound to its context through the integrity
parameter η: η₀ hashes the block header and its coin transactions, and every
proof extends the chain, ``η' = SHA-256(η ‖ proof)``.  η is injected as the
circuit's ``integrity`` public input, so a proof cannot be moved to another
block or reordered within one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

from pouw.chain import (
    Block,
    BlockHeader,
    CoinTransaction,
    ProofLink,
    ProofTransaction,
    merkle_root,
)
from pouw.encoding import ZERO_HASH, Hash256, sha256
from pouw.errors import RegistryError
from pouw.field import FieldElement, PrimeField
from pouw.lottery import (
    LotteryParams,
    adjust_difficulty,
    bucket_count_policy,
    bucket_of,
    lottery_draw,
    p_win_psi,
)
from pouw.prover import MockProof, mock_prove, mock_verify
from pouw.r1cs import generate_witness

if TYPE_CHECKING:
    from pouw.circuit import CircuitId
    from pouw.registry import CircuitRecord

RegistryLookup = Callable[["CircuitId"], "CircuitRecord"]


# -- integrity chain ------------------------------------------------------------

def initial_integrity(header: BlockHeader, coin_txids: Iterable[Hash256]) -> Hash256:
    return sha256(header.canonical(), *coin_txids)


def next_integrity(prev_eta: Hash256, proof: MockProof | bytes) -> Hash256:
    data = proof.to_bytes() if isinstance(proof, MockProof) else proof
    return sha256(prev_eta, data)


def eta_to_field(eta: Hash256, field: PrimeField) -> FieldElement:
    return field.from_bytes(eta)


def bind_integrity(
    record: "CircuitRecord", public_inputs: Sequence[int], eta: Hash256
) -> tuple[int, ...]:
    """Full public input vector with η inserted at the integrity position."""
    field = record.r1cs.field
    values = [int(v) % field.modulus for v in public_inputs]
    values.insert(record.integrity_position, eta_to_field(eta, field).value)
    return tuple(values)


# -- verification ---------------------------------------------------------------

class Rejection(enum.Enum):
    EMPTY_CHAIN = "empty_chain"
    PREV_HASH_MISMATCH = "prev_hash_mismatch"
    BLOCK_HASH_MISMATCH = "block_hash_mismatch"
    COIN_ROOT_MISMATCH = "coin_root_mismatch"
    DUPLICATE_TX = "duplicate_tx"
    INTEGRITY_CHAIN_BROKEN = "integrity_chain_broken"
    COMPLEXITY_MISMATCH = "complexity_mismatch"
    PROOF_INVALID = "proof_invalid"
    BUCKET_VIOLATION = "bucket_violation"
    LOTTERY_NOT_WON = "lottery_not_won"


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: Rejection | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "accepted"
        suffix = f" ({self.detail})" if self.detail else ""
        return f"rejected: {self.reason.value}{suffix}"


ACCEPTED = Verdict(True)


def _reject(reason: Rejection, detail: object = "") -> Verdict:
    return Verdict(False, reason, str(detail))


def block_txids(block: Block) -> list[Hash256]:
    """Proof txids in chain order, then coin txids."""
    return [link.proof_tx.txid for link in block.proof_chain] + block.coin_txids


def _first_duplicate(txids: Iterable[Hash256]) -> Hash256 | None:
    seen: set[Hash256] = set()
    for txid in txids:
        if txid in seen:
            return txid
        seen.add(txid)
    return None


def verify_block(
    block: Block,
    prev_hash: Hash256,
    kappa: int,
    params: LotteryParams,
    registry_lookup: RegistryLookup,
    *,
    k_bits: int = 0,
) -> Verdict:
    """Check every validity condition of *block*; the first failure wins.

    Cost is linear in the number of proofs: the mock verifier touches only
    digests, never witnesses.
    """
    if not block.proof_chain:
        return _reject(Rejection.EMPTY_CHAIN)
    header = block.header
    if header.prev_hash != prev_hash:
        return _reject(Rejection.PREV_HASH_MISMATCH)
    if Block.compute_hash(header, block.proof_chain) != block.block_hash:
        return _reject(Rejection.BLOCK_HASH_MISMATCH)
    if merkle_root(block.coin_txids) != header.coin_root:
        return _reject(Rejection.COIN_ROOT_MISMATCH)
    duplicate = _first_duplicate(block_txids(block))
    if duplicate is not None:
        return _reject(Rejection.DUPLICATE_TX, duplicate.hex())

    eta = initial_integrity(header, block.coin_txids)
    for i, link in enumerate(block.proof_chain):
        if link.eta != eta:
            return _reject(Rejection.INTEGRITY_CHAIN_BROKEN, i)
        eta = next_integrity(eta, link.proof)

    records = []
    for i, link in enumerate(block.proof_chain):
        try:
            record = registry_lookup(link.proof_tx.circuit_id)
        except (KeyError, RegistryError):
            return _reject(Rejection.PROOF_INVALID, i)
        if link.proof_tx.complexity != record.complexity:
            return _reject(Rejection.COMPLEXITY_MISMATCH, i)
        records.append(record)

    for i, (link, record) in enumerate(zip(block.proof_chain, records)):
        public = bind_integrity(record, link.proof_tx.public_inputs, link.eta)
        if not mock_verify(record.keys.verifying_key, link.proof, public):
            return _reject(Rejection.PROOF_INVALID, i)

    if header.bucket_index >= 1 << k_bits:
        return _reject(Rejection.BUCKET_VIOLATION, f"bucket {header.bucket_index}")
    for txid in block_txids(block):
        if bucket_of(txid, k_bits) != header.bucket_index:
            return _reject(Rejection.BUCKET_VIOLATION, txid.hex())

    if not lottery_draw(block, p_win_psi(block.complexities, kappa, params)):
        return _reject(Rejection.LOTTERY_NOT_WON)
    return ACCEPTED


# -- production -----------------------------------------------------------------

def produce_block(
    prev_hash: Hash256,
    miner_addr: bytes,
    pending: Sequence[ProofTransaction],
    registry_lookup: RegistryLookup,
    kappa: int,
    params: LotteryParams,
    *,
    bucket_index: int = 0,
    k_bits: int = 0,
    coin_txs: Sequence[CoinTransaction] = (),
    timestamp: int = 0,
) -> Block | None:
    """Prove bucket transactions one by one until the lottery is won.

    Returns the winning block, or ``None`` once the bucket's transactions are
    exhausted without a win.
    """
    coins = [tx for tx in coin_txs if bucket_of(tx.txid, k_bits) == bucket_index]
    header = BlockHeader(
        prev_hash=prev_hash,
        miner_addr=miner_addr,
        bucket_index=bucket_index,
        coin_root=merkle_root([tx.txid for tx in coins]),
        timestamp=timestamp,
    )
    eta = initial_integrity(header, [tx.txid for tx in coins])
    chain: list[ProofLink] = []
    used: set[Hash256] = set()
    for tx in pending:
        if bucket_of(tx.txid, k_bits) != bucket_index or tx.txid in used:
            continue
        used.add(tx.txid)
        record = registry_lookup(tx.circuit_id)
        public = bind_integrity(record, tx.public_inputs, eta)
        witness = generate_witness(record.circuit, record.r1cs, public, tx.private_inputs)
        proof = mock_prove(record.keys.proving_key, record.r1cs, witness, public)
        chain.append(ProofLink(tx, eta, proof))
        candidate = Block.assemble(header, coins, chain)
        if lottery_draw(candidate, p_win_psi(candidate.complexities, kappa, params)):
            return candidate
        eta = next_integrity(eta, proof)
    return None


# -- chain state ----------------------------------------------------------------

@dataclass
class ChainState:
    """Accepted blocks plus the consensus parameters in force at each height.

    Single writer: only `append` mutates the state.  A transaction, coin or
    proof, is part of at most one accepted block.
    """

    registry_lookup: RegistryLookup
    kappa: int
    params: LotteryParams = field(default_factory=LotteryParams)
    retarget_window: int = 64
    target_block_time: float = 600.0
    k_bits: int = 0
    target_per_bucket: int | None = None
    genesis_time: int = 0
    blocks: list[Block] = field(default_factory=list)
    kappa_history: list[int] = field(default_factory=list)
    k_bits_history: list[int] = field(default_factory=list)
    included: set[Hash256] = field(default_factory=set)

    @property
    def height(self) -> int:
        return len(self.blocks)

    @property
    def tip_hash(self) -> Hash256:
        return self.blocks[-1].block_hash if self.blocks else ZERO_HASH

    def k_bits_at(self, height: int) -> int:
        return self.k_bits_history[height] if height < len(self.k_bits_history) else self.k_bits

    def append(self, block: Block, pending_proof_txs: int | None = None) -> Verdict:
        verdict = verify_block(
            block, self.tip_hash, self.kappa, self.params, self.registry_lookup,
            k_bits=self.k_bits,
        )
        if not verdict:
            return verdict
        txids = block_txids(block)
        reused = next((txid for txid in txids if txid in self.included), None)
        if reused is not None:
            return _reject(Rejection.DUPLICATE_TX, reused.hex())
        self.included.update(txids)
        self.blocks.append(block)
        self.kappa_history.append(self.kappa)
        self.k_bits_history.append(self.k_bits)
        if self.retarget_window and self.height % self.retarget_window == 0:
            self._retarget(pending_proof_txs)
        return verdict

    def _retarget(self, pending_proof_txs: int | None) -> None:
        if self.height > self.retarget_window:
            start = self.blocks[-self.retarget_window - 1].header.timestamp
        else:
            start = self.genesis_time
        actual = self.blocks[-1].header.timestamp - start
        target = Fraction(self.target_block_time) * self.retarget_window
        if actual > 0:
            self.kappa = adjust_difficulty(self.kappa, actual, target)
        if self.target_per_bucket and pending_proof_txs is not None:
            self.k_bits = bucket_count_policy(pending_proof_txs, self.target_per_bucket)
