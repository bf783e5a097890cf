from fractions import Fraction

import pytest

from pouw.errors import AllZero, ConfigError, DomainError, Empty
from pouw.lottery import p_overlap_float
from pouw.simulator import (
    EventKind,
    MempoolModel,
    MinerSpec,
    PowerChange,
    SimConfig,
    equal_miners,
    gini,
    overlap_montecarlo,
    run_sim,
)


def _config(**changes) -> SimConfig:
    values = dict(
        miners=equal_miners(2),
        kappa0=1000,
        mempool=MempoolModel(c_min=50, c_max=150),
        max_blocks=200,
        seed=7,
    )
    values.update(changes)
    return SimConfig(**values)


# -- gini -------------------------------------------------------------------------

def test_gini_exact():
    assert gini([1, 2, 3, 4, 5]) == Fraction(4, 15)
    assert gini([5, 1, 4, 2, 3]) == Fraction(4, 15)
    assert gini([3, 3, 3]) == 0
    assert gini([0, 0, 0, 7]) == Fraction(3, 4)


def test_gini_floats():
    assert gini([1.0, 2.0, 3.0, 4.0, 5.0]) == pytest.approx(4 / 15)


def test_gini_errors():
    with pytest.raises(Empty):
        gini([])
    with pytest.raises(AllZero):
        gini([0, 0])
    with pytest.raises(ValueError):
        gini([1, -1])


# -- overlap ------------------------------------------------------------------------

@pytest.mark.parametrize("m,t", [(2, 1), (4, 2), (20, 5), (100, 10), (1000, 50)])
def test_overlap_montecarlo_matches(m, t):
    estimate = overlap_montecarlo(m, t, 1_000_000, seed=3)
    assert estimate == pytest.approx(p_overlap_float(m, t), abs=0.005)


def test_overlap_montecarlo_domain():
    with pytest.raises(DomainError):
        overlap_montecarlo(3, 2, 100)
    with pytest.raises(DomainError):
        overlap_montecarlo(10, 2, 0)


# -- configuration --------------------------------------------------------------

def test_miner_spec_validation():
    with pytest.raises(ConfigError):
        MinerSpec(0, power=0)
    with pytest.raises(ConfigError):
        MinerSpec(0, preference="greedy")
    with pytest.raises(ConfigError):
        MinerSpec(0, preference="fixed")
    with pytest.raises(ConfigError):
        MinerSpec(0, bucket_strategy="busiest")


def test_mempool_validation():
    with pytest.raises(ConfigError):
        MempoolModel(kind="lifo")
    with pytest.raises(ConfigError):
        MempoolModel(c_min=10, c_max=5)
    assert MempoolModel(c_min=100, c_max=300).mean_complexity == 200


def test_sim_config_validation():
    with pytest.raises(ConfigError):
        _config(miners=())
    with pytest.raises(ConfigError):
        _config(miners=(MinerSpec(0), MinerSpec(0)))
    with pytest.raises(ConfigError):
        _config(psi=1.5)
    with pytest.raises(ConfigError):
        _config(k_bits=33)
    with pytest.raises(ConfigError):
        _config(k_bits="auto")
    with pytest.raises(ConfigError):
        _config(proof_time_a=0, proof_time_b=0)
    with pytest.raises(ConfigError):
        _config(max_blocks=None, max_time=None)
    with pytest.raises(ConfigError):
        _config(power_changes=(PowerChange(1.0, 9, 2.0),))


def test_expected_block_time():
    config = _config(miners=equal_miners(4), kappa0=10_000, proof_time_b=20)
    # 100 proofs of size 100 per block, each 120 time units, shared by 4 miners
    assert config.expected_block_time == pytest.approx(3000)


def test_event_ranks():
    assert [k.name for k in sorted(EventKind)] == [
        "BLOCK_PUBLISHED", "RETARGET_BOUNDARY", "TX_ARRIVAL", "PROOF_COMPLETED", "POWER_CHANGE",
    ]


# -- runs ---------------------------------------------------------------------------

def test_same_seed_same_run():
    first = run_sim(_config(record_trace=True))
    second = run_sim(_config(record_trace=True))
    assert first.trace == second.trace
    assert first.summary() == second.summary()
    other = run_sim(_config(seed=8, record_trace=True))
    assert other.trace != first.trace


def test_run_stops_at_max_blocks():
    metrics = run_sim(_config(max_blocks=25))
    assert metrics.blocks == 25
    assert sum(m.blocks_won for m in metrics.miners) == 25
    assert len(metrics.inter_block_times) == 25
    assert metrics.sim_time == pytest.approx(sum(metrics.inter_block_times))


def test_run_stops_at_max_time():
    metrics = run_sim(_config(max_blocks=None, max_time=5000.0))
    assert metrics.sim_time == 5000.0
    assert metrics.blocks > 0


def test_work_is_conserved():
    metrics = run_sim(_config(miners=equal_miners(3), psi=0.5, k_bits=1))
    assert metrics.completed_work == metrics.useful_work + metrics.wasted_work
    assert metrics.open_work <= metrics.wasted_work
    assert sum(m.proofs_completed for m in metrics.miners) >= sum(metrics.proofs_per_block)
    assert 0 < metrics.wasted_fraction < 1


def test_rewards_follow_fee_rate():
    metrics = run_sim(_config(block_reward=50, proof_fee_rate=2))
    for m in metrics.miners:
        assert m.block_rewards == 50 * m.blocks_won
        assert m.proof_rewards == 2 * m.useful_work


def test_single_miner_wastes_only_the_open_chain():
    metrics = run_sim(_config(miners=equal_miners(1)))
    assert metrics.wasted_work == metrics.open_work
    assert metrics.miners[0].interrupted_work == 0


def test_separate_buckets_do_not_interfere():
    miners = (
        MinerSpec(0, bucket_strategy="fixed", fixed_bucket=0),
        MinerSpec(1, bucket_strategy="fixed", fixed_bucket=1),
    )
    metrics = run_sim(_config(miners=miners, k_bits=1))
    assert metrics.wasted_work == metrics.open_work


def test_least_loaded_spreads_miners():
    metrics = run_sim(
        _config(miners=equal_miners(4, bucket_strategy="least_loaded"), k_bits=2, max_blocks=100)
    )
    assert metrics.wasted_work == metrics.open_work


def test_shared_bucket_wastes_work():
    metrics = run_sim(_config(miners=equal_miners(4), kappa0=10_000, max_blocks=300))
    assert metrics.wasted_fraction == pytest.approx(0.75, abs=0.05)


def test_power_change_shifts_shares():
    config = _config(power_changes=(PowerChange(0.0, 1, 3.0),), max_blocks=2000)
    shares = run_sim(config).block_shares
    assert shares[1] == pytest.approx(0.75, abs=0.05)


def test_psi_shortens_chains():
    base = run_sim(_config(max_blocks=300))
    weighted = run_sim(_config(max_blocks=300, psi=1.0))
    assert weighted.mean_proofs_per_block < base.mean_proofs_per_block


def test_retarget_tracks_target():
    config = _config(
        kappa0=2000,
        mempool=MempoolModel(c_min=100, c_max=100),
        retarget_window=50,
        target_block_time=500.0,
        max_blocks=2000,
    )
    assert config.expected_block_time == pytest.approx(1000)
    metrics = run_sim(config)
    assert metrics.kappa_trace[0][0] == 50
    assert all(height % 50 == 0 for height, _ in metrics.kappa_trace)
    assert metrics.final_kappa < 2000
    late = metrics.inter_block_times[1000:]
    assert sum(late) / len(late) == pytest.approx(500, rel=0.15)


def test_poisson_mempool_with_auto_buckets():
    config = _config(
        miners=equal_miners(4),
        k_bits="auto",
        mempool=MempoolModel(
            kind="poisson", c_min=50, c_max=150, rate=0.05, initial_pending=64,
            target_per_bucket=4,
        ),
        retarget_window=10,
        max_blocks=60,
        max_time=1e7,
    )
    metrics = run_sim(config)
    assert 0 < metrics.blocks <= 60
    assert 0 <= metrics.final_k_bits <= 32
    assert metrics.completed_work == metrics.useful_work + metrics.wasted_work


def test_empty_poisson_mempool_idles():
    config = _config(
        mempool=MempoolModel(kind="poisson", c_min=10, c_max=10),
        max_blocks=None,
        max_time=100.0,
    )
    metrics = run_sim(config)
    assert metrics.blocks == 0
    assert metrics.completed_work == 0


def test_real_work_gives_the_same_run():
    fast = run_sim(_config(max_blocks=5))
    real = run_sim(_config(max_blocks=5, real_work=True))
    assert real.summary() == fast.summary()


def test_summary_keys():
    summary = run_sim(_config(max_blocks=10)).summary()
    assert set(summary) == {
        "blocks", "sim_time", "mean_block_time", "block_time_variance",
        "mean_proofs_per_block", "useful_work", "wasted_work", "wasted_fraction",
        "open_work", "reward_gini", "final_kappa",
    }


# -- statistical acceptance ------------------------------------------------------

@pytest.mark.slow
def test_single_miner_block_statistics():
    config = _config(
        miners=equal_miners(1),
        kappa0=1000,
        mempool=MempoolModel(c_min=10, c_max=10),
        max_blocks=10_000,
        seed=11,
    )
    metrics = run_sim(config)
    assert 95 <= metrics.mean_proofs_per_block <= 105
    assert 0.9 <= metrics.block_time_cv <= 1.1


@pytest.mark.slow
def test_equal_miners_share_equally():
    metrics = run_sim(_config(kappa0=2000, max_blocks=5000, seed=12))
    for share in metrics.block_shares:
        assert 0.47 <= share <= 0.53


@pytest.mark.slow
def test_retarget_recovers_after_power_doubling():
    change_at = 200_000.0
    config = _config(
        kappa0=1000,
        mempool=MempoolModel(c_min=100, c_max=100),
        retarget_window=200,
        target_block_time=500.0,
        max_blocks=2000,
        power_changes=(PowerChange(change_at, 0, 2.0), PowerChange(change_at, 1, 2.0)),
        seed=21,
    )
    assert config.expected_block_time == pytest.approx(500)
    metrics = run_sim(config)
    times = metrics.inter_block_times
    elapsed, change_index = 0.0, 0
    while elapsed < change_at:
        elapsed += times[change_index]
        change_index += 1
    settled = times[change_index + 600:change_index + 1200]
    assert len(settled) == 600
    assert sum(settled) / len(settled) == pytest.approx(500, rel=0.15)
    assert 1600 <= metrics.final_kappa <= 2500
