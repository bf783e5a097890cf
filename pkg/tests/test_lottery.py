import hashlib
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.stats import chisquare, hypergeom

from pouw.errors import DomainError, EmptyChain, PrefixTooLong
from pouw.lottery import (
    HASH_SPACE,
    Difficulty,
    LotteryParams,
    adjust_difficulty,
    bucket_count_policy,
    bucket_of,
    chain_win_probability,
    lottery_draw,
    lottery_target,
    p_overlap,
    p_overlap_float,
    p_win,
    p_win_psi,
)


def test_p_win():
    assert p_win(50, 100) == Fraction(1, 2)
    assert p_win(50, Difficulty(100)) == Fraction(1, 2)
    assert p_win(500, 100) == 1
    with pytest.raises(ValueError):
        p_win(0, 100)
    with pytest.raises(ValueError):
        Difficulty(0)


def test_p_win_psi():
    assert p_win_psi([10, 20], 100, Fraction(1, 2)) == Fraction(1, 4)
    assert p_win_psi([10, 20], 100) == Fraction(1, 5)
    assert p_win_psi([10, 20], 100, LotteryParams(1)) == Fraction(3, 10)
    assert p_win_psi([90, 90], 100, 1) == 1


def test_p_win_psi_needs_a_proof():
    with pytest.raises(EmptyChain):
        p_win_psi([], 100)


def test_psi_range():
    with pytest.raises(ValueError):
        LotteryParams(Fraction(3, 2))
    with pytest.raises(ValueError):
        p_win_psi([1, 2], 100, -1)


def test_float_shortcut_matches():
    exact = p_win_psi([30, 40, 25], 1000, Fraction(1, 4))
    assert chain_win_probability(25, 70, 1000, 0.25) == pytest.approx(float(exact))


def test_lottery_target():
    assert lottery_target(Fraction(1, 2)) == 2**255
    assert lottery_target(0) == 0
    assert lottery_target(1) == HASH_SPACE
    with pytest.raises(ValueError):
        lottery_target(Fraction(3, 2))


def test_adjust_difficulty():
    assert adjust_difficulty(1000, 50, 100) == 2000
    assert adjust_difficulty(1000, 200, 100) == 500
    assert adjust_difficulty(1000, 100, 100) == 1000


def test_adjust_difficulty_is_clamped():
    assert adjust_difficulty(1000, 1, 100) == 4000
    assert adjust_difficulty(1000, 1000, 1) == 250
    assert adjust_difficulty(1, 1000, 1) == 1


def test_adjust_difficulty_needs_positive_windows():
    with pytest.raises(DomainError):
        adjust_difficulty(1000, 0, 100)
    with pytest.raises(DomainError):
        adjust_difficulty(1000, 100, -1)


def test_bucket_of():
    txid = bytes([0b10100000]) + bytes(31)
    assert bucket_of(txid, 3) == 5
    assert bucket_of(txid, 1) == 1
    assert bucket_of(txid, 0) == 0
    assert bucket_of(b"\xff" * 32, 32) == 2**32 - 1
    with pytest.raises(PrefixTooLong):
        bucket_of(txid, 33)


def test_bucket_of_spreads_hashes_uniformly():
    counts = [0] * 16
    for i in range(100_000):
        counts[bucket_of(hashlib.sha256(i.to_bytes(4, "big")).digest(), 4)] += 1
    assert chisquare(counts).pvalue > 0.01


def test_bucket_count_policy():
    assert bucket_count_policy(64, 4) == 4
    assert bucket_count_policy(63, 4) == 3
    assert bucket_count_policy(3, 4) == 0
    assert bucket_count_policy(0, 4) == 0
    assert bucket_count_policy(2**40, 1) == 32
    with pytest.raises(ValueError):
        bucket_count_policy(10, 0)


def test_p_overlap_exact():
    assert p_overlap(2, 1) == Fraction(1, 2)
    assert p_overlap(4, 2) == Fraction(5, 6)


@pytest.mark.parametrize("m,t", [(20, 5), (100, 10), (1000, 50)])
def test_p_overlap_matches_hypergeometric(m, t):
    assert float(p_overlap(m, t)) == pytest.approx(1 - hypergeom(m, t, t).pmf(0), abs=1e-9)


def test_p_overlap_domain():
    with pytest.raises(DomainError):
        p_overlap(3, 2)
    with pytest.raises(DomainError):
        p_overlap(10, 0)


def test_p_overlap_float():
    assert p_overlap_float(4, 2) == pytest.approx(5 / 6)
    assert isinstance(p_overlap_float(100, 10), float)
    with pytest.raises(DomainError):
        p_overlap_float(3, 2)


def test_p_win_psi_is_monotone():
    chain = [30, 40, 25]
    psis = [Fraction(i, 20) for i in range(21)]
    probs = [p_win_psi(chain, 10_000, psi) for psi in psis]
    assert probs == sorted(probs)
    for psi in (0, Fraction(1, 2), 1):
        base = p_win_psi(chain, 10_000, psi)
        for j in range(len(chain)):
            bumped = list(chain)
            bumped[j] += 5
            assert p_win_psi(bumped, 10_000, psi) >= base


def test_bucket_count_policy_is_monotone():
    levels = [bucket_count_policy(pending, 16) for pending in range(0, 1_000_001, 97)]
    assert levels == sorted(levels)
    assert levels[0] == 0
    assert levels[-1] == 15


def test_lottery_draw_win_rate():
    rng = np.random.default_rng(2024)
    link = object()
    wins = sum(
        lottery_draw(SimpleNamespace(proof_chain=[link], block_hash=rng.bytes(32)), 0.01)
        for _ in range(100_000)
    )
    assert 0.008 <= wins / 100_000 <= 0.012


def test_lottery_draw_needs_a_proof():
    with pytest.raises(EmptyChain):
        lottery_draw(SimpleNamespace(proof_chain=[], block_hash=bytes(32)), 1)
