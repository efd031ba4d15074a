"""Reproducible, parallel Monte Carlo outage estimation.

Trials are split into blocks whose layout depends only on ``(trials, K)``.
Block ``b`` draws from its own stream ``SeedSequence(seed, spawn_key=(1, b))``,
so the number of workers never changes what is drawn, and the reduction is a
sum of integer counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.stats import beta as beta_dist
from scipy.stats import norm

from .protocol import ProtocolParams, phase2_power_per_node
from .simcore import BlockCounts, run_trial, simulate_block, simulate_cooperation_free_block

# gains drawn per block in the vectorized engine
BLOCK_GAINS = 1 << 20
CP_THRESHOLD = 30
_Z95 = float(norm.ppf(0.975))

ESTIMATE_FIELDS = ("K", "mode", "p_hat", "std_err", "ci95_low", "ci95_high", "trials", "seed")


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    trials: int
    std_err: float
    ci95_low: float
    ci95_high: float
    seed: int
    mode: str
    count: int

    @classmethod
    def from_count(cls, count: int, trials: int, seed: int, mode: str) -> "OutageEstimate":
        """Normal-approximation CI, or Clopper-Pearson when fewer than 30 outages."""
        if trials < 1:
            raise ValueError("trials must be >= 1")
        p = count / trials
        se = math.sqrt(p * (1.0 - p) / trials)
        if count < CP_THRESHOLD:
            lo = 0.0 if count == 0 else float(beta_dist.ppf(0.025, count, trials - count + 1))
            hi = 1.0 if count == trials else float(beta_dist.ppf(0.975, count + 1, trials - count))
        else:
            lo, hi = p - _Z95 * se, p + _Z95 * se
        return cls(
            p_hat=p, trials=trials, std_err=se,
            ci95_low=max(0.0, min(lo, p)), ci95_high=min(1.0, max(hi, p)),
            seed=seed, mode=mode, count=count,
        )

    def row(self, K: int) -> dict:
        return {
            "K": K, "mode": self.mode, "p_hat": self.p_hat, "std_err": self.std_err,
            "ci95_low": self.ci95_low, "ci95_high": self.ci95_high,
            "trials": self.trials, "seed": self.seed,
        }


@dataclass(frozen=True)
class SimulationResult:
    params: ProtocolParams
    K: int
    seed: int
    counts: BlockCounts

    @property
    def unicast(self) -> OutageEstimate:
        return OutageEstimate.from_count(self.counts.uc_outages, self.counts.trials, self.seed, "uc")

    @property
    def multicast(self) -> OutageEstimate:
        return OutageEstimate.from_count(self.counts.mc_outages, self.counts.trials, self.seed, "mc")

    @property
    def mean_k1(self) -> float:
        return self.counts.k1_total / self.counts.trials

    def mean_phase2_power(self, P: float = 1.0) -> float:
        """Average phase-2 sum power, ``k1`` relays at ``P / (alpha K)`` each."""
        return self.mean_k1 * phase2_power_per_node(self.params, self.K, P)

    def phase2_power_std_err(self, P: float = 1.0) -> float:
        """Standard error of :meth:`mean_phase2_power` from the sample variance of ``k1``."""
        n = self.counts.trials
        if n < 2:
            return math.inf
        var = (self.counts.k1_sq_total - n * self.mean_k1**2) / (n - 1)
        return math.sqrt(max(var, 0.0) / n) * phase2_power_per_node(self.params, self.K, P)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index`` of run ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, index)))


def block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, index)))


def block_layout(trials: int, K: int) -> list[tuple[int, int]]:
    """``(block index, block size)`` pairs covering ``trials``; independent of workers."""
    size = max(1, BLOCK_GAINS // K)
    full, rest = divmod(trials, size)
    layout = [(b, size) for b in range(full)]
    if rest:
        layout.append((full, rest))
    return layout


def _run_block(task) -> BlockCounts:
    params, K, seed, index, n = task
    return simulate_block(params, K, n, block_rng(seed, index))


def _run_trial_range(task) -> BlockCounts:
    params, K, seed, start, stop = task
    uc = mc = k1 = k1_sq = 0
    for i in range(start, stop):
        out = run_trial(params, K, trial_rng(seed, i))
        uc += out.unicast_outage
        mc += out.multicast_outage
        k1 += out.k1
        k1_sq += out.k1 * out.k1
    return BlockCounts(stop - start, uc, mc, k1, k1_sq)


def parallel_map(fn, tasks, workers: int):
    """Ordered map over ``tasks``; a process pool when ``workers > 1``."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def simulate(
    params: ProtocolParams,
    K: int,
    trials: int,
    seed: int,
    workers: int = 1,
    engine: str = "block",
) -> SimulationResult:
    """Run ``trials`` trials; both outage modes are scored on the same realizations.

    ``engine="block"`` is the vectorized path; ``engine="trial"`` runs
    :func:`run_trial` on per-trial streams (slow, used as a reference).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if engine == "block":
        tasks = [(params, K, seed, b, n) for b, n in block_layout(trials, K)]
        parts = parallel_map(_run_block, tasks, workers)
    elif engine == "trial":
        chunk = max(1, -(-trials // max(1, workers)))
        tasks = [(params, K, seed, s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
        parts = parallel_map(_run_trial_range, tasks, workers)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return SimulationResult(params, K, seed, reduce(BlockCounts.__add__, parts))


def estimate_outage(
    params: ProtocolParams,
    K: int,
    trials: int,
    seed: int,
    workers: int = 1,
    engine: str = "block",
) -> tuple[OutageEstimate, OutageEstimate]:
    """Return ``(unicast, multicast)`` outage estimates."""
    res = simulate(params, K, trials, seed, workers, engine)
    return res.unicast, res.multicast


def derive_seed(seed: int, K: int) -> int:
    """Per-network-size seed for sweeps (64-bit)."""
    return int(np.random.SeedSequence([seed, K]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepRow:
    K: int
    uc: OutageEstimate
    mc: OutageEstimate


def sweep_outage_vs_k(
    params: ProtocolParams, k_list, trials: int, seed: int, workers: int = 1
) -> list[SweepRow]:
    if len(k_list) == 0:
        raise ValueError("k_list must be nonempty")
    rows = []
    for K in k_list:
        uc, mc = estimate_outage(params, int(K), trials, derive_seed(seed, int(K)), workers)
        rows.append(SweepRow(int(K), uc, mc))
    return rows


def _run_cf_block(task):
    rate, snr, K, seed, index, n = task
    return simulate_cooperation_free_block(rate, snr, K, n, block_rng(seed, index))


def estimate_cooperation_free(
    rate: float, snr: float, K: int, trials: int, seed: int, workers: int = 1
) -> tuple[OutageEstimate, OutageEstimate]:
    """Outage when only the source transmits (no relaying)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [(rate, snr, K, seed, b, n) for b, n in block_layout(trials, K)]
    parts = parallel_map(_run_cf_block, tasks, workers)
    uc = sum(p[0] for p in parts)
    mc = sum(p[1] for p in parts)
    return (
        OutageEstimate.from_count(uc, trials, seed, "uc"),
        OutageEstimate.from_count(mc, trials, seed, "mc"),
    )
