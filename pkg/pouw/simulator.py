"""Deterministic discrete-event simulation of lottery-based block production.

Each miner repeatedly picks a proof transaction from its bucket, works on it
for ``(a*C + b) / power`` time units, appends it to its proof chain and runs
the lottery.  A win publishes a block: the winner collects the block reward
plus the fees of its chain, and every other miner in the same bucket loses
its partial chain (wasted work) and starts over.

Events are processed in ``(time, kind rank, miner index, sequence)`` order.
Stale events are recognised by a per-miner epoch that increments on every
reset.  All randomness comes from one seeded numpy ``Generator``, so a
(config, seed) pair always yields the same trace and metrics.
"""

from __future__ import annotations

import dataclasses
import enum
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from pouw.circuit import synthetic_chain_circuit
from pouw.errors import AllZero, ConfigError, DomainError, Empty
from pouw.field import PrimeField
from pouw.lottery import (
    MAX_PREFIX_BITS,
    adjust_difficulty,
    bucket_count_policy,
    bucket_of,
    chain_win_probability,
)
from pouw.r1cs import check_satisfaction, compile_circuit, generate_witness

PREFERENCES = ("uniform_random", "prefer_small", "prefer_large", "fixed")
BUCKET_STRATEGIES = ("random", "least_loaded", "fixed")
MEMPOOL_KINDS = ("infinite", "poisson")
_UNIFORM_BATCH = 4096


class EventKind(enum.IntEnum):
    """Event kinds; the value is the tie-break rank at equal times."""

    BLOCK_PUBLISHED = 0
    RETARGET_BOUNDARY = 1
    TX_ARRIVAL = 2
    PROOF_COMPLETED = 3
    POWER_CHANGE = 4


# -- configuration --------------------------------------------------------------

@dataclass(frozen=True)
class MinerSpec:
    miner_id: int
    power: float = 1.0
    preference: str = "uniform_random"
    fixed_size: int | None = None
    bucket_strategy: str = "random"
    fixed_bucket: int = 0

    def __post_init__(self) -> None:
        if not self.power > 0:
            raise ConfigError(f"miner {self.miner_id}: power must be positive")
        if self.preference not in PREFERENCES:
            raise ConfigError(f"miner {self.miner_id}: unknown preference {self.preference!r}")
        if self.preference == "fixed" and (self.fixed_size is None or self.fixed_size < 1):
            raise ConfigError(f"miner {self.miner_id}: fixed preference needs fixed_size >= 1")
        if self.bucket_strategy not in BUCKET_STRATEGIES:
            raise ConfigError(
                f"miner {self.miner_id}: unknown bucket strategy {self.bucket_strategy!r}"
            )


@dataclass(frozen=True)
class MempoolModel:
    """Source of proof transactions.

    ``infinite`` draws a fresh complexity for every proof; ``poisson`` keeps a
    real pending set fed by arrivals at *rate* per time unit.
    """

    kind: str = "infinite"
    c_min: int = 100
    c_max: int = 100
    rate: float = 0.0
    initial_pending: int = 0
    target_per_bucket: int = 4

    def __post_init__(self) -> None:
        if self.kind not in MEMPOOL_KINDS:
            raise ConfigError(f"unknown mempool model {self.kind!r}")
        if not 1 <= self.c_min <= self.c_max:
            raise ConfigError("need 1 <= c_min <= c_max")
        if self.rate < 0 or self.initial_pending < 0 or self.target_per_bucket < 1:
            raise ConfigError("mempool rate, initial_pending and target_per_bucket are invalid")

    @property
    def mean_complexity(self) -> float:
        return (self.c_min + self.c_max) / 2


@dataclass(frozen=True)
class PowerChange:
    time: float
    miner_id: int
    power: float


@dataclass(frozen=True)
class SimConfig:
    miners: tuple[MinerSpec, ...]
    kappa0: int = 10_000
    psi: float = 0.0
    k_bits: int | str = 0
    proof_time_a: float = 1.0
    proof_time_b: float = 0.0
    block_reward: int = 100
    proof_fee_rate: int = 1
    retarget_window: int = 0
    target_block_time: float | None = None
    mempool: MempoolModel = field(default_factory=MempoolModel)
    max_blocks: int | None = 1000
    max_time: float | None = None
    seed: int = 0
    power_changes: tuple[PowerChange, ...] = ()
    real_work: bool = False
    record_trace: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "miners", tuple(self.miners))
        object.__setattr__(self, "power_changes", tuple(self.power_changes))
        object.__setattr__(self, "psi", float(self.psi))
        self.validate()

    def validate(self) -> None:
        if not self.miners:
            raise ConfigError("at least one miner is required")
        ids = [m.miner_id for m in self.miners]
        if len(set(ids)) != len(ids):
            raise ConfigError("miner ids must be unique")
        if self.kappa0 < 1:
            raise ConfigError("kappa0 must be >= 1")
        if not 0 <= self.psi <= 1:
            raise ConfigError(f"psi must lie in [0, 1], got {self.psi}")
        if self.k_bits == "auto":
            if self.mempool.kind != "poisson":
                raise ConfigError("k_bits = 'auto' needs the poisson mempool model")
        elif not isinstance(self.k_bits, int) or not 0 <= self.k_bits <= MAX_PREFIX_BITS:
            raise ConfigError(f"k_bits must be 'auto' or an integer in [0, 32]: {self.k_bits!r}")
        a, b = self.proof_time_a, self.proof_time_b
        if a < 0 or b < 0 or a + b == 0:
            raise ConfigError("proof time coefficients must be non-negative and not both zero")
        if self.block_reward < 0 or self.proof_fee_rate < 0:
            raise ConfigError("rewards must be non-negative")
        if self.retarget_window < 0:
            raise ConfigError("retarget_window must be >= 0")
        if self.target_block_time is not None and self.target_block_time <= 0:
            raise ConfigError("target_block_time must be positive")
        if self.max_blocks is None and self.max_time is None:
            raise ConfigError("set max_blocks or max_time")
        if self.max_blocks is not None and self.max_blocks < 1:
            raise ConfigError("max_blocks must be >= 1")
        known = set(ids)
        for change in self.power_changes:
            if change.miner_id not in known or not change.power > 0 or change.time < 0:
                raise ConfigError(f"invalid power change {change}")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    @property
    def expected_block_time(self) -> float:
        """Mean block time for one bucket under the initial parameters."""
        c = self.mempool.mean_complexity
        per_proof = self.proof_time_a * c + self.proof_time_b
        total_power = sum(m.power for m in self.miners)
        return self.kappa0 / c * per_proof / total_power


def equal_miners(n: int, **spec) -> tuple[MinerSpec, ...]:
    return tuple(MinerSpec(miner_id=i, **spec) for i in range(n))


# -- metrics --------------------------------------------------------------------

@dataclass
class MinerMetrics:
    miner_id: int
    power: float = 1.0
    blocks_won: int = 0
    block_rewards: int = 0
    proof_rewards: int = 0
    useful_work: int = 0
    wasted_work: int = 0
    interrupted_work: float = 0.0
    proofs_completed: int = 0

    @property
    def total_work(self) -> int:
        return self.useful_work + self.wasted_work

    @property
    def total_rewards(self) -> int:
        return self.block_rewards + self.proof_rewards


@dataclass
class Metrics:
    miners: list[MinerMetrics]
    blocks: int = 0
    sim_time: float = 0.0
    inter_block_times: list[float] = field(default_factory=list)
    proofs_per_block: list[int] = field(default_factory=list)
    kappa_trace: list[tuple[int, int]] = field(default_factory=list)
    open_work: int = 0
    completed_work: int = 0
    final_kappa: int = 0
    final_k_bits: int = 0
    trace: list[tuple[float, str, int]] | None = None

    def miner(self, miner_id: int) -> MinerMetrics:
        return next(m for m in self.miners if m.miner_id == miner_id)

    @property
    def useful_work(self) -> int:
        return sum(m.useful_work for m in self.miners)

    @property
    def wasted_work(self) -> int:
        return sum(m.wasted_work for m in self.miners)

    @property
    def total_work(self) -> int:
        return self.useful_work + self.wasted_work

    @property
    def wasted_fraction(self) -> float:
        total = self.total_work
        return self.wasted_work / total if total else 0.0

    @property
    def mean_block_time(self) -> float:
        return float(np.mean(self.inter_block_times)) if self.inter_block_times else 0.0

    @property
    def block_time_variance(self) -> float:
        return float(np.var(self.inter_block_times)) if self.inter_block_times else 0.0

    @property
    def block_time_cv(self) -> float:
        mean = self.mean_block_time
        return float(np.std(self.inter_block_times)) / mean if mean else 0.0

    @property
    def mean_proofs_per_block(self) -> float:
        return float(np.mean(self.proofs_per_block)) if self.proofs_per_block else 0.0

    @property
    def block_shares(self) -> list[float]:
        return [m.blocks_won / self.blocks if self.blocks else 0.0 for m in self.miners]

    @property
    def reward_gini(self) -> float:
        rewards = [m.total_rewards for m in self.miners]
        return float(gini(rewards)) if any(rewards) else 0.0

    def summary(self) -> dict[str, float | int]:
        return {
            "blocks": self.blocks,
            "sim_time": self.sim_time,
            "mean_block_time": self.mean_block_time,
            "block_time_variance": self.block_time_variance,
            "mean_proofs_per_block": self.mean_proofs_per_block,
            "useful_work": self.useful_work,
            "wasted_work": self.wasted_work,
            "wasted_fraction": self.wasted_fraction,
            "open_work": self.open_work,
            "reward_gini": self.reward_gini,
            "final_kappa": self.final_kappa,
        }


def gini(values: Sequence[float | int | Fraction]) -> Fraction | float:
    """Gini coefficient via sorted cumulative shares.

    Exact (a `Fraction`) when every value is an int or Fraction.
    """
    xs = sorted(values)
    if not xs:
        raise Empty("gini of an empty sequence")
    if xs[0] < 0:
        raise ValueError("gini needs non-negative values")
    total = sum(xs)
    if total == 0:
        raise AllZero("gini is undefined when every value is zero")
    n = len(xs)
    weighted = sum(i * x for i, x in enumerate(xs, 1))
    if all(isinstance(x, (int, Fraction)) for x in xs):
        return Fraction(2 * weighted) / (n * total) - Fraction(n + 1, n)
    return 2 * weighted / (n * total) - (n + 1) / n


def overlap_montecarlo(m: int, t: int, trials: int, seed: int = 0) -> float:
    """Fraction of trials in which two uniform t-subsets of an m-pool intersect.

    By symmetry the first subset is fixed; the overlap size of a uniform
    second subset is hypergeometric.
    """
    if t < 1 or m < 2 * t:
        raise DomainError(f"need m >= 2t >= 2, got m={m} t={t}")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    shared = rng.hypergeometric(t, m - t, t, size=trials)
    return float(np.count_nonzero(shared)) / trials


# -- engine ---------------------------------------------------------------------

@dataclass
class _Tx:
    seq: int
    txid: bytes
    complexity: int


@dataclass
class _Job:
    complexity: int
    start: float
    duration: float
    tx: _Tx | None


@dataclass
class _Miner:
    index: int
    spec: MinerSpec
    power: float
    bucket: int = 0
    chain_work: int = 0
    chain_len: int = 0
    chain_txs: list[_Tx] = field(default_factory=list)
    job: _Job | None = None
    epoch: int = 0
    idle: bool = False


class Simulation:
    def __init__(self, config: SimConfig) -> None:
        config.validate()
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self._uniforms = np.empty(0)
        self._u = 0
        self.heap: list[tuple] = []
        self._seq = 0
        self.now = 0.0
        self.kappa = config.kappa0
        self.psi = config.psi
        self.miners = [_Miner(i, spec, spec.power) for i, spec in enumerate(config.miners)]
        self._index = {spec.miner_id: i for i, spec in enumerate(config.miners)}
        self.metrics = Metrics(
            miners=[MinerMetrics(spec.miner_id, spec.power) for spec in config.miners],
            trace=[] if config.record_trace else None,
        )
        self.mempool: dict[int, _Tx] = {}
        self._tx_seq = 0
        self.k_bits = 0 if config.k_bits == "auto" else int(config.k_bits)
        self.target_block_time = config.target_block_time or config.expected_block_time
        self._last_block_time = 0.0
        self._window_start = 0.0
        self._work_cache: dict[int, tuple] = {}

    # -- plumbing -----------------------------------------------------------

    def _push(self, time: float, kind: EventKind, miner: int = -1, payload=None, epoch=0) -> None:
        self._seq += 1
        heapq.heappush(self.heap, (time, kind, miner, self._seq, payload, epoch))

    def _uniform(self) -> float:
        if self._u >= len(self._uniforms):
            self._uniforms = self.rng.random(_UNIFORM_BATCH)
            self._u = 0
        value = self._uniforms[self._u]
        self._u += 1
        return float(value)

    @property
    def poisson(self) -> bool:
        return self.config.mempool.kind == "poisson"

    # -- mempool ------------------------------------------------------------

    def _new_tx(self) -> _Tx:
        pool = self.config.mempool
        self._tx_seq += 1
        tx = _Tx(
            self._tx_seq,
            self.rng.bytes(32),
            int(self.rng.integers(pool.c_min, pool.c_max + 1)),
        )
        self.mempool[tx.seq] = tx
        return tx

    def _bucket_txs(self, bucket: int) -> list[_Tx]:
        return [tx for tx in self.mempool.values() if bucket_of(tx.txid, self.k_bits) == bucket]

    def _pick_size(self, miner: _Miner, sizes: Sequence[int]) -> int:
        """Index into *sizes* chosen per the miner's preference."""
        pref = miner.spec.preference
        if pref == "prefer_small":
            return min(range(len(sizes)), key=sizes.__getitem__)
        if pref == "prefer_large":
            return max(range(len(sizes)), key=sizes.__getitem__)
        if pref == "fixed":
            return min(range(len(sizes)), key=lambda i: abs(sizes[i] - miner.spec.fixed_size))
        return int(self.rng.integers(len(sizes)))

    def _next_job_size(self, miner: _Miner) -> tuple[int, _Tx | None] | None:
        pool = self.config.mempool
        if not self.poisson:
            pref = miner.spec.preference
            if pref == "fixed":
                return miner.spec.fixed_size, None
            if pref == "prefer_small" or pool.c_min == pool.c_max:
                return pool.c_min, None
            if pref == "prefer_large":
                return pool.c_max, None
            return int(self.rng.integers(pool.c_min, pool.c_max + 1)), None
        taken = {tx.seq for tx in miner.chain_txs}
        candidates = [tx for tx in self._bucket_txs(miner.bucket) if tx.seq not in taken]
        if not candidates and not miner.chain_len and miner.spec.bucket_strategy != "fixed":
            miner.bucket = self._choose_bucket(miner, nonempty_only=True)
            candidates = self._bucket_txs(miner.bucket)
        if not candidates:
            return None
        tx = candidates[self._pick_size(miner, [tx.complexity for tx in candidates])]
        return tx.complexity, tx

    # -- miner actions ------------------------------------------------------

    def _choose_bucket(self, miner: _Miner, nonempty_only: bool = False) -> int:
        n = 1 << self.k_bits
        if n == 1:
            return 0
        strategy = miner.spec.bucket_strategy
        if strategy == "fixed":
            return miner.spec.fixed_bucket % n
        options = list(range(n))
        if nonempty_only:
            filled = {bucket_of(tx.txid, self.k_bits) for tx in self.mempool.values()}
            options = sorted(filled) or options
        if strategy == "random":
            return options[int(self.rng.integers(len(options)))]
        load = {b: 0 for b in options}
        for other in self.miners:
            if other is not miner and other.bucket in load:
                load[other.bucket] += 1
        lowest = min(load.values())
        if load.get(miner.bucket) == lowest:
            return miner.bucket
        return next(b for b in options if load[b] == lowest)

    def _start_proof(self, miner: _Miner) -> None:
        picked = self._next_job_size(miner)
        if picked is None:
            miner.idle = True
            return
        miner.idle = False
        complexity, tx = picked
        cfg = self.config
        duration = (cfg.proof_time_a * complexity + cfg.proof_time_b) / miner.power
        miner.job = _Job(complexity, self.now, duration, tx)
        self._push(self.now + duration, EventKind.PROOF_COMPLETED, miner.index, None, miner.epoch)

    def _discard(self, miner: _Miner) -> None:
        """Throw away the miner's partial chain and in-flight proof."""
        stats = self.metrics.miners[miner.index]
        stats.wasted_work += miner.chain_work
        job = miner.job
        if job is not None and job.duration > 0:
            stats.interrupted_work += job.complexity * (self.now - job.start) / job.duration
        self._reset(miner)

    def _reset(self, miner: _Miner) -> None:
        miner.chain_work = 0
        miner.chain_len = 0
        miner.chain_txs = []
        miner.job = None
        miner.epoch += 1
        miner.idle = False

    def _real_work(self, complexity: int) -> None:
        cached = self._work_cache.get(complexity)
        if cached is None:
            circuit = synthetic_chain_circuit(complexity)
            r1cs = compile_circuit(circuit, PrimeField())
            cached = (r1cs, generate_witness(circuit, r1cs, [], [3, 5]))
            self._work_cache[complexity] = cached
        check_satisfaction(*cached)

    # -- event handlers -----------------------------------------------------

    def _on_proof_completed(self, miner: _Miner, epoch: int) -> None:
        if epoch != miner.epoch or miner.job is None:
            return
        job = miner.job
        miner.job = None
        if self.config.real_work:
            self._real_work(job.complexity)
        stats = self.metrics.miners[miner.index]
        stats.proofs_completed += 1
        self.metrics.completed_work += job.complexity
        prior = miner.chain_work
        miner.chain_work += job.complexity
        miner.chain_len += 1
        if job.tx is not None:
            miner.chain_txs.append(job.tx)
        p = chain_win_probability(job.complexity, prior, self.kappa, self.psi)
        if self._uniform() < p:
            self._push(self.now, EventKind.BLOCK_PUBLISHED, miner.index, miner.bucket, miner.epoch)
        else:
            self._start_proof(miner)

    def _on_block_published(self, winner: _Miner, epoch: int) -> None:
        if epoch != winner.epoch:
            return
        cfg = self.config
        m = self.metrics
        stats = m.miners[winner.index]
        stats.blocks_won += 1
        stats.block_rewards += cfg.block_reward
        stats.proof_rewards += cfg.proof_fee_rate * winner.chain_work
        stats.useful_work += winner.chain_work
        m.blocks += 1
        m.inter_block_times.append(self.now - self._last_block_time)
        m.proofs_per_block.append(winner.chain_len)
        self._last_block_time = self.now
        for tx in winner.chain_txs:
            self.mempool.pop(tx.seq, None)

        bucket = winner.bucket
        restart = [winner]
        self._reset(winner)
        for other in self.miners:
            if other is not winner and other.bucket == bucket:
                self._discard(other)
                restart.append(other)
        restart.sort(key=lambda mn: mn.index)
        for miner in restart:
            miner.bucket = self._choose_bucket(miner)
        for miner in restart:
            self._start_proof(miner)
        if cfg.retarget_window and m.blocks % cfg.retarget_window == 0:
            self._push(self.now, EventKind.RETARGET_BOUNDARY)

    def _on_retarget(self) -> None:
        cfg = self.config
        actual = self.now - self._window_start
        target = cfg.retarget_window * self.target_block_time
        if actual > 0:
            self.kappa = adjust_difficulty(self.kappa, Fraction(actual), Fraction(target))
        self._window_start = self.now
        self.metrics.kappa_trace.append((self.metrics.blocks, self.kappa))
        if cfg.k_bits == "auto":
            k = bucket_count_policy(len(self.mempool), cfg.mempool.target_per_bucket)
            if k != self.k_bits:
                self._rebucket(k)

    def _rebucket(self, k_bits: int) -> None:
        """Switch prefix length; chains built under the old buckets are void."""
        self.k_bits = k_bits
        for miner in self.miners:
            self._discard(miner)
        for miner in self.miners:
            miner.bucket = self._choose_bucket(miner)
        for miner in self.miners:
            self._start_proof(miner)

    def _on_tx_arrival(self) -> None:
        tx = self._new_tx()
        rate = self.config.mempool.rate
        self._push(self.now + float(self.rng.exponential(1 / rate)), EventKind.TX_ARRIVAL)
        bucket = bucket_of(tx.txid, self.k_bits)
        for miner in self.miners:
            if miner.idle and (miner.bucket == bucket or not miner.chain_len):
                self._start_proof(miner)

    def _on_power_change(self, miner: _Miner, power: float) -> None:
        miner.power = power

    # -- main loop ----------------------------------------------------------

    def run(self) -> Metrics:
        cfg = self.config
        m = self.metrics
        for change in cfg.power_changes:
            self._push(change.time, EventKind.POWER_CHANGE, self._index[change.miner_id],
                       change.power)
        if self.poisson:
            for _ in range(cfg.mempool.initial_pending):
                self._new_tx()
            if cfg.mempool.rate > 0:
                self._push(float(self.rng.exponential(1 / cfg.mempool.rate)), EventKind.TX_ARRIVAL)
            if cfg.k_bits == "auto":
                self.k_bits = bucket_count_policy(len(self.mempool), cfg.mempool.target_per_bucket)
        for miner in self.miners:
            miner.bucket = self._choose_bucket(miner)
        for miner in self.miners:
            self._start_proof(miner)

        while self.heap:
            time, kind, index, _, payload, epoch = heapq.heappop(self.heap)
            if cfg.max_time is not None and time > cfg.max_time:
                self.now = cfg.max_time
                break
            self.now = time
            if m.trace is not None:
                mid = self.miners[index].spec.miner_id if index >= 0 else -1
                m.trace.append((time, kind.name, mid))
            if kind is EventKind.PROOF_COMPLETED:
                self._on_proof_completed(self.miners[index], epoch)
            elif kind is EventKind.BLOCK_PUBLISHED:
                self._on_block_published(self.miners[index], epoch)
                if cfg.max_blocks is not None and m.blocks >= cfg.max_blocks:
                    break
            elif kind is EventKind.RETARGET_BOUNDARY:
                self._on_retarget()
            elif kind is EventKind.TX_ARRIVAL:
                self._on_tx_arrival()
            else:
                self._on_power_change(self.miners[index], payload)

        for miner in self.miners:
            m.miners[miner.index].wasted_work += miner.chain_work
            m.open_work += miner.chain_work
        m.sim_time = self.now
        m.final_kappa = self.kappa
        m.final_k_bits = self.k_bits
        return m


def run_sim(config: SimConfig) -> Metrics:
    return Simulation(config).run()
