"""Channel sampling and outage evaluation for single trials.

Channel power gains ``|h|^2`` are unit-mean exponentials.  Node indices are
0-based; the unicast destination is node ``K - 1``.

Two evaluation paths share the same outage rules:

* :func:`run_trial` walks one :class:`NetworkInstance`, drawing individual
  relay-to-listener gains only when a listener is inspected.
* :func:`simulate_block` evaluates many trials at once with numpy.  The sum
  of ``k1`` unit exponentials seen by a listener is drawn directly as a
  Gamma(k1, 1) variate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .protocol import ProtocolParams, gain_threshold, phase2_power_per_node


@dataclass(frozen=True)
class TrialOutcome:
    k1: int
    unicast_outage: bool
    multicast_outage: bool
    phase2_power_used: float


@dataclass
class NetworkInstance:
    """One channel realization.

    ``phase1_gains[i]`` is the source-to-node-i gain.  Phase-2 gains are
    looked up in ``phase2_gains`` keyed by ``(relay, listener)`` and, if an
    ``rng`` is attached, drawn on first use.
    """

    k: int
    phase1_gains: np.ndarray
    phase2_gains: dict = field(default_factory=dict)
    rng: np.random.Generator | None = None

    def __post_init__(self):
        self.phase1_gains = np.asarray(self.phase1_gains, dtype=float)
        if self.phase1_gains.shape != (self.k,):
            raise ValueError(f"expected {self.k} phase-1 gains, got shape {self.phase1_gains.shape}")
        if np.any(self.phase1_gains < 0):
            raise ValueError("channel gains must be nonnegative")

    @classmethod
    def from_gains(cls, phase1_gains, phase2_gains: Mapping | np.ndarray | None = None):
        """Gain-injection hook: build an instance from explicit gains, no RNG.

        ``phase2_gains`` may be a mapping ``{(relay, listener): gain}`` or a
        full K x K matrix.
        """
        phase1 = np.asarray(phase1_gains, dtype=float)
        k = phase1.shape[0]
        if phase2_gains is None:
            table = {}
        elif isinstance(phase2_gains, Mapping):
            table = {(int(j), int(l)): float(g) for (j, l), g in phase2_gains.items()}
        else:
            mat = np.asarray(phase2_gains, dtype=float)
            table = {(j, l): float(mat[j, l]) for j in range(k) for l in range(k) if j != l}
        if any(g < 0 for g in table.values()):
            raise ValueError("channel gains must be nonnegative")
        return cls(k=k, phase1_gains=phase1, phase2_gains=table)

    def phase2_gain(self, relay: int, listener: int) -> float:
        key = (relay, listener)
        if key not in self.phase2_gains:
            if self.rng is None:
                raise KeyError(f"no phase-2 gain injected for pair {key}")
            self.phase2_gains[key] = float(self.rng.exponential())
        return self.phase2_gains[key]


def sample_instance(K: int, rng: np.random.Generator) -> NetworkInstance:
    """Draw phase-1 gains now; phase-2 gains are drawn lazily from ``rng``."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return NetworkInstance(k=K, phase1_gains=rng.exponential(size=K), rng=rng)


def listener_fails(params: ProtocolParams, instance: NetworkInstance, relays, listener: int) -> bool:
    """True if the listener's effective MISO gain is at most ``1 - beta``."""
    total = sum(instance.phase2_gain(j, listener) for j in relays)
    return total / (params.alpha * instance.k) <= 1.0 - params.beta


def evaluate_instance(params: ProtocolParams, instance: NetworkInstance, P: float = 1.0) -> TrialOutcome:
    K = instance.k
    decoded = instance.phase1_gains > gain_threshold(params.alpha)
    relays = np.flatnonzero(decoded).tolist()
    k1 = len(relays)
    power = k1 * phase2_power_per_node(params, K, P)
    dest = K - 1
    uc = False
    if not decoded[dest]:
        uc = listener_fails(params, instance, relays, dest)
    mc = uc
    if not mc:
        for listener in np.flatnonzero(~decoded):
            if listener != dest and listener_fails(params, instance, relays, int(listener)):
                mc = True
                break
    return TrialOutcome(k1=k1, unicast_outage=bool(uc), multicast_outage=bool(mc), phase2_power_used=power)


def run_trial(params: ProtocolParams, K: int, rng: np.random.Generator, P: float = 1.0) -> TrialOutcome:
    """Sample one network and evaluate both outage events on it."""
    return evaluate_instance(params, sample_instance(K, rng), P)


@dataclass(frozen=True)
class BlockCounts:
    trials: int
    uc_outages: int
    mc_outages: int
    k1_total: int
    k1_sq_total: int = 0

    def __add__(self, other: "BlockCounts") -> "BlockCounts":
        return BlockCounts(
            self.trials + other.trials,
            self.uc_outages + other.uc_outages,
            self.mc_outages + other.mc_outages,
            self.k1_total + other.k1_total,
            self.k1_sq_total + other.k1_sq_total,
        )


def simulate_block(params: ProtocolParams, K: int, n: int, rng: np.random.Generator) -> BlockCounts:
    """Vectorized evaluation of ``n`` independent trials."""
    x = params.alpha * K * (1.0 - params.beta)
    decoded = rng.exponential(size=(n, K)) > gain_threshold(params.alpha)
    k1 = decoded.sum(axis=1)
    dest_listens = ~decoded[:, -1]

    uc = np.zeros(n, dtype=bool)
    idx = np.flatnonzero(dest_listens)
    uc[idx] = rng.gamma(k1[idx].astype(float)) <= x

    # remaining listeners only matter where the destination did not already fail
    open_ = np.flatnonzero(~uc)
    n_other = K - k1[open_] - dest_listens[open_]
    shapes = np.repeat(k1[open_], n_other).astype(float)
    fails = rng.gamma(shapes) <= x
    owner = np.repeat(np.arange(open_.size), n_other)
    other_fail = np.bincount(owner, weights=fails, minlength=open_.size) > 0
    mc = uc.copy()
    mc[open_] = other_fail
    k1 = k1.astype(np.int64)
    return BlockCounts(n, int(uc.sum()), int(mc.sum()), int(k1.sum()), int((k1 * k1).sum()))


def simulate_cooperation_free_block(
    rate: float, snr: float, K: int, n: int, rng: np.random.Generator
) -> tuple[int, int]:
    """Direct-link-only trials: returns (unicast outages, multicast outages).

    A node is in outage when ``log2(1 + |h|^2 snr) < rate``.
    """
    need = np.expm1(rate * np.log(2.0)) / snr
    fail = rng.exponential(size=(n, K)) < need
    return int(fail[:, -1].sum()), int(fail.any(axis=1).sum())
