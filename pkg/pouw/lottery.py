"""Lottery mathematics, difficulty retargeting and transaction bucketing.

Probabilities are exact `Fraction` values.  The simulator uses the float
shortcut `chain_win_probability`, which evaluates the same formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence, Union

from pouw.errors import DomainError, EmptyChain, PrefixTooLong

if TYPE_CHECKING:
    from pouw.chain import Block

HASH_SPACE = 2**256
RETARGET_CLAMP = 4
MAX_PREFIX_BITS = 32

Probability = Union[Fraction, int, float]


@dataclass(frozen=True)
class Difficulty:
    kappa: int

    def __post_init__(self) -> None:
        if self.kappa < 1:
            raise ValueError(f"difficulty must be >= 1, got {self.kappa}")


@dataclass(frozen=True)
class LotteryParams:
    psi: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi", Fraction(self.psi))
        if not 0 <= self.psi <= 1:
            raise ValueError(f"psi must lie in [0, 1], got {self.psi}")


def _kappa(kappa: Difficulty | int) -> int:
    k = kappa.kappa if isinstance(kappa, Difficulty) else int(kappa)
    if k < 1:
        raise ValueError(f"difficulty must be >= 1, got {k}")
    return k


def _psi(params: LotteryParams | Probability) -> Fraction:
    return params.psi if isinstance(params, LotteryParams) else LotteryParams(params).psi


def p_win(c_i: int, kappa: Difficulty | int) -> Fraction:
    """Win probability of a block whose newest proof has complexity *c_i*."""
    if c_i < 1:
        raise ValueError("complexity must be >= 1")
    return min(Fraction(c_i, _kappa(kappa)), Fraction(1))


def p_win_psi(
    chain_complexities: Sequence[int],
    kappa: Difficulty | int,
    params: LotteryParams | Probability = Fraction(0),
) -> Fraction:
    """Win probability with earlier proofs of the chain weighted by psi."""
    if not chain_complexities:
        raise EmptyChain("win probability needs at least one proof")
    *prior, c_i = chain_complexities
    if c_i < 1 or any(c < 1 for c in prior):
        raise ValueError("complexities must be >= 1")
    k = _kappa(kappa)
    p = Fraction(c_i, k) + _psi(params) * Fraction(sum(prior), k)
    return min(p, Fraction(1))


def chain_win_probability(c_i: float, prior_sum: float, kappa: float, psi: float) -> float:
    return min((c_i + psi * prior_sum) / kappa, 1.0)


def lottery_target(p: Probability) -> int:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return math.floor(p * HASH_SPACE)


def lottery_draw(candidate_block: "Block", p: Probability) -> bool:
    if not candidate_block.proof_chain:
        raise EmptyChain("a candidate block needs at least one proof")
    return int.from_bytes(candidate_block.block_hash, "big") < lottery_target(p)


def adjust_difficulty(
    kappa: Difficulty | int,
    actual_window_time: float | Fraction,
    target_window_time: float | Fraction,
) -> int:
    """Scale kappa by target/actual, clamped to a factor of 4 either way."""
    if actual_window_time <= 0 or target_window_time <= 0:
        raise DomainError("window durations must be positive")
    k = Fraction(_kappa(kappa))
    scaled = k * Fraction(target_window_time) / Fraction(actual_window_time)
    scaled = min(max(scaled, k / RETARGET_CLAMP), k * RETARGET_CLAMP)
    return max(1, math.floor(scaled + Fraction(1, 2)))


def bucket_of(txid: bytes, k_bits: int) -> int:
    """The first *k_bits* bits of *txid* as an integer."""
    if k_bits > MAX_PREFIX_BITS:
        raise PrefixTooLong(f"prefix length {k_bits} exceeds {MAX_PREFIX_BITS} bits")
    if k_bits <= 0:
        return 0
    return int.from_bytes(txid[:4], "big") >> (MAX_PREFIX_BITS - k_bits)


def bucket_count_policy(pending_proof_txs: int, target_per_bucket: int) -> int:
    """``floor(log2(pending / target))`` clamped to ``[0, 32]``."""
    if target_per_bucket < 1:
        raise ValueError("target_per_bucket must be >= 1")
    ratio = pending_proof_txs // target_per_bucket
    if ratio < 1:
        return 0
    return min(ratio.bit_length() - 1, MAX_PREFIX_BITS)


def p_overlap(m: int, t: int) -> Fraction:
    """Probability that two uniform t-subsets of an m-pool share an element."""
    if t < 1 or m < 2 * t:
        raise DomainError(f"need m >= 2t >= 2, got m={m} t={t}")
    return 1 - Fraction(math.comb(m - t, t), math.comb(m, t))


def p_overlap_float(m: int, t: int) -> float:
    """`p_overlap` as the nearest float, for tables and Monte Carlo comparisons."""
    return float(p_overlap(m, t))
