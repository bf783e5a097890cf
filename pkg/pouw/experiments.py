"""Experiment harnesses for the fairness, preference, psi and bucketing studies.

Each harness builds a grid of `SimConfig` values, runs every (label, seed)
pair through `run_many` and reduces the metrics into a `Table`.  Runs are
independent, so they can be fanned out over a process pool; results are
keyed by (label, seed) and never depend on completion order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from pouw.lottery import p_overlap_float
from pouw.report import Table
from pouw.simulator import (
    MempoolModel,
    Metrics,
    MinerSpec,
    SimConfig,
    equal_miners,
    overlap_montecarlo,
    run_sim,
)

EXPERIMENTS = ("h1", "h2", "h3", "h4", "overlap")

DEFAULT_SEEDS = (1, 2, 3, 4, 5)
H1_RATIOS = (1, 2, 3, 4)
H3_PSIS = (0.0, 0.25, 0.5, 0.75, 1.0)
H3_POWERS = (1, 2, 3, 4, 5)
H4_K_BITS = (0, 1, 2, 3)
OVERLAP_GRID = ((2, 1), (4, 2), (20, 5), (100, 10), (1000, 50))


@dataclass(frozen=True)
class Run:
    label: str
    seed: int
    config: SimConfig


def run_many(
    runs: Sequence[Run],
    workers: int = 1,
    on_done: Callable[[Run, Metrics], None] | None = None,
) -> dict[tuple[str, int], Metrics]:
    """Run every config, in a process pool when *workers* > 1."""
    results: dict[tuple[str, int], Metrics] = {}
    if workers <= 1 or len(runs) <= 1:
        for run in runs:
            results[run.label, run.seed] = metrics = run_sim(run.config)
            if on_done:
                on_done(run, metrics)
        return results

    with ProcessPoolExecutor(max_workers=min(len(runs), workers)) as pool:
        futures = {}
        for run in runs:
            f = pool.submit(run_sim, run.config)
            futures[f] = run

        for future in as_completed(futures):
            run = futures[future]
            results[run.label, run.seed] = metrics = future.result()
            if on_done:
                on_done(run, metrics)
    return results


def _ratio(a: float, b: float) -> float:
    return a / b if b else float("inf")


def _by_label(
    results: dict[tuple[str, int], Metrics], label: str, seeds: Iterable[int]
) -> list[Metrics]:
    return [results[label, seed] for seed in seeds]


# -- H1: reward vs computational power ------------------------------------------

def experiment_h1(
    ratios: Sequence[int] = H1_RATIOS,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    blocks: int = 5000,
    kappa: int = 10_000,
    complexity: int = 100,
    workers: int = 1,
    on_done: Callable[[Run, Metrics], None] | None = None,
) -> Table:
    """Two miners, the second *ratio* times stronger; one bucket, psi = 0.

    Block rewards should scale with the ratio and proof rewards with its
    square, since the stronger miner's chain is also longer when it wins.
    """
    runs = [
        Run(
            f"ratio={ratio}",
            seed,
            SimConfig(
                miners=(MinerSpec(0, power=1.0), MinerSpec(1, power=float(ratio))),
                kappa0=kappa,
                mempool=MempoolModel(c_min=complexity, c_max=complexity),
                max_blocks=blocks,
                seed=seed,
            ),
        )
        for ratio in ratios
        for seed in seeds
    ]
    results = run_many(runs, workers, on_done)
    table = Table("h1", ("ratio", "block_reward_ratio", "proof_reward_ratio"))
    for ratio in ratios:
        block_ratios, proof_ratios = [], []
        for m in _by_label(results, f"ratio={ratio}", seeds):
            weak, strong = m.miners
            block_ratios.append(_ratio(strong.block_rewards, weak.block_rewards))
            proof_ratios.append(_ratio(strong.proof_rewards, weak.proof_rewards))
        table.add(ratio, float(np.mean(block_ratios)), float(np.mean(proof_ratios)))
    return table


# -- H2: proof-size preference ----------------------------------------------------

def h2_pairs(c_min: int) -> dict[str, tuple[MinerSpec, MinerSpec]]:
    return {
        "uniform_random/uniform_random": (MinerSpec(0), MinerSpec(1)),
        "prefer_small/prefer_large": (
            MinerSpec(0, preference="prefer_small"),
            MinerSpec(1, preference="prefer_large"),
        ),
        f"fixed({c_min})/fixed({2 * c_min})": (
            MinerSpec(0, preference="fixed", fixed_size=c_min),
            MinerSpec(1, preference="fixed", fixed_size=2 * c_min),
        ),
    }


def experiment_h2(
    seeds: Sequence[int] = DEFAULT_SEEDS,
    blocks: int = 5000,
    kappa: int = 100_000,
    c_min: int = 100,
    c_max: int = 1000,
    workers: int = 1,
    on_done: Callable[[Run, Metrics], None] | None = None,
) -> Table:
    """Two equal-power miners that only differ in the proof sizes they pick."""
    pairs = h2_pairs(c_min)
    runs = [
        Run(
            label,
            seed,
            SimConfig(
                miners=pair,
                kappa0=kappa,
                mempool=MempoolModel(c_min=c_min, c_max=c_max),
                max_blocks=blocks,
                seed=seed,
            ),
        )
        for label, pair in pairs.items()
        for seed in seeds
    ]
    results = run_many(runs, workers, on_done)
    table = Table("h2", ("pair", "preference", "block_reward_share"))
    for label, pair in pairs.items():
        metrics = _by_label(results, label, seeds)
        for i, spec in enumerate(pair):
            shares = [
                _ratio(m.miners[i].block_rewards, sum(x.block_rewards for x in m.miners))
                for m in metrics
            ]
            preference = spec.preference
            if spec.preference == "fixed":
                preference = f"fixed({spec.fixed_size})"
            table.add(label, preference, float(np.mean(shares)))
    return table


# -- H3: psi vs wasted work and centralisation --------------------------------------

def experiment_h3(
    psis: Sequence[float] = H3_PSIS,
    powers: Sequence[float] = H3_POWERS,
    seeds: Sequence[int] = (1, 2, 3),
    blocks: int = 3000,
    kappa: int = 10_000,
    complexity: int = 100,
    workers: int = 1,
    on_done: Callable[[Run, Metrics], None] | None = None,
) -> Table:
    """Miners of unequal power in one bucket under a sweep of psi.

    The Gini coefficient of total rewards is the centralisation measure.
    """
    miners = tuple(MinerSpec(i, power=float(p)) for i, p in enumerate(powers))
    runs = [
        Run(
            f"psi={psi}",
            seed,
            SimConfig(
                miners=miners,
                kappa0=kappa,
                psi=psi,
                mempool=MempoolModel(c_min=complexity, c_max=complexity),
                max_blocks=blocks,
                seed=seed,
            ),
        )
        for psi in psis
        for seed in seeds
    ]
    results = run_many(runs, workers, on_done)
    table = Table("h3", ("psi", "wasted_fraction", "gini"))
    for psi in psis:
        metrics = _by_label(results, f"psi={psi}", seeds)
        wasted = float(np.mean([m.wasted_fraction for m in metrics]))
        inequality = float(np.mean([m.reward_gini for m in metrics]))
        table.add(float(psi), wasted, inequality)
    return table


# -- H4: bucketing -------------------------------------------------------------------

def experiment_h4(
    k_values: Sequence[int] = H4_K_BITS,
    miners: int = 8,
    seeds: Sequence[int] = (1, 2, 3),
    blocks: int = 2000,
    kappa: int = 10_000,
    complexity: int = 100,
    tiny_mempool: bool = False,
    workers: int = 1,
    on_done: Callable[[Run, Metrics], None] | None = None,
) -> Table:
    """Equal miners spread over ``2**k`` buckets with the least-loaded strategy.

    With *tiny_mempool* an extra exploratory sweep runs against a Poisson
    mempool holding fewer transactions than two per miner.
    """
    specs = equal_miners(miners, bucket_strategy="least_loaded")
    variants = {"infinite": MempoolModel(c_min=complexity, c_max=complexity)}
    if tiny_mempool:
        variants["tiny"] = MempoolModel(
            kind="poisson",
            c_min=complexity,
            c_max=complexity,
            rate=miners / complexity,
            initial_pending=miners,
        )
    runs = []
    for mempool_name, mempool in variants.items():
        for k in k_values:
            base = SimConfig(
                miners=specs,
                kappa0=kappa,
                k_bits=k,
                mempool=mempool,
                max_blocks=blocks,
            )
            for seed in seeds:
                config = base.replace(seed=seed)
                if mempool.kind == "poisson":
                    config = config.replace(max_time=blocks * base.expected_block_time * 50)
                runs.append(Run(f"{mempool_name}:k={k}", seed, config))
    results = run_many(runs, workers, on_done)
    table = Table("h4", ("mempool", "k_bits", "buckets", "wasted_fraction"))
    for mempool_name in variants:
        for k in k_values:
            metrics = _by_label(results, f"{mempool_name}:k={k}", seeds)
            wasted = float(np.mean([m.wasted_fraction for m in metrics]))
            table.add(mempool_name, k, 1 << k, wasted)
    return table


# -- overlap oracle ------------------------------------------------------------------

def experiment_overlap(
    grid: Sequence[tuple[int, int]] = OVERLAP_GRID,
    trials: int = 1_000_000,
    seed: int = 0,
) -> Table:
    table = Table("overlap", ("m", "t", "analytic", "montecarlo", "abs_diff"))
    for m, t in grid:
        analytic = p_overlap_float(m, t)
        estimate = overlap_montecarlo(m, t, trials, seed)
        table.add(m, t, analytic, estimate, abs(analytic - estimate))
    return table
