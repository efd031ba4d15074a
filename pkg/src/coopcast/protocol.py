"""Closed-form quantities of the two-phase cooperative protocol.

Rates are in bits per channel use (log base 2).  ``snr`` is always the
linear ratio P/N0; P and N0 appear separately only in
:func:`phase2_power_per_node`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ProtocolParams:
    """Design pair ``(alpha, beta)`` plus linear SNR.

    ``alpha`` is the target fraction of nodes decoding in phase 1, ``beta``
    the phase-2 SNR back-off.
    """

    alpha: float
    beta: float
    snr: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.snr > 0.0:
            raise ValueError(f"snr must be positive, got {self.snr}")

    @classmethod
    def from_threshold(cls, g: float, beta: float, snr: float = 1.0) -> "ProtocolParams":
        """Build from the phase-1 gain threshold instead of ``alpha``."""
        if g < 0:
            raise ValueError(f"gain threshold must be nonnegative, got {g}")
        return cls(alpha=math.exp(-g), beta=beta, snr=snr)

    @property
    def threshold(self) -> float:
        return gain_threshold(self.alpha)


@dataclass(frozen=True)
class RateProfile:
    r1: float
    r2: float
    r_eff: float
    phase1_fraction: float
    phase2_fraction: float
    capacity: float
    rate_fraction: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def exponential_cdf(g: float) -> float:
    """CDF of a unit-mean exponential channel gain."""
    return -math.expm1(-g) if g > 0 else 0.0


def gain_threshold(alpha: float) -> float:
    """Phase-1 gain threshold: the (1 - alpha)-quantile of Exp(1), i.e. ``-ln(alpha)``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return -math.log(alpha)


def capacity(snr: float) -> float:
    """Unicast and multicast capacity ``log2(1 + snr)``."""
    return math.log2(1.0 + snr)


def rate_profile(params: ProtocolParams) -> RateProfile:
    """Phase rates, effective rate, time split and capacity fraction."""
    if params.alpha >= 1.0:
        raise ValueError("alpha = 1 gives a zero phase-1 rate; the effective rate is degenerate")
    r1 = math.log2(1.0 + gain_threshold(params.alpha) * params.snr)
    r2 = math.log2(1.0 + params.snr * (1.0 - params.beta))
    r_eff = r1 * r2 / (r1 + r2)
    c = capacity(params.snr)
    # n1 R1 = n2 R2 with n1 + n2 = n
    return RateProfile(
        r1=r1,
        r2=r2,
        r_eff=r_eff,
        phase1_fraction=r2 / (r1 + r2),
        phase2_fraction=r1 / (r1 + r2),
        capacity=c,
        rate_fraction=r_eff / c,
    )


def phase2_power_per_node(params: ProtocolParams, K: int, P: float = 1.0) -> float:
    """Per-relay phase-2 power ``P / (alpha K)`` meeting the expected sum-power budget."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return P / (params.alpha * K)


def converse_outage_floor(rate: float, snr: float) -> float:
    """K-independent lower bound ``max(0, 1 - C / rate)`` on MISO outage."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    # (R - C)/R rather than 1 - C/R: no cancellation, and 0.25/1.25 is exactly 0.2
    return max(0.0, (rate - capacity(snr)) / rate)


def cooperation_free_outage(rate: float, snr: float) -> float:
    """Outage of a direct Rayleigh link at ``rate``: ``Pr{log2(1 + |h|^2 snr) < rate}``.

    Positive for every positive rate and independent of network size, which
    is why cooperation-free protocols have zero capacity.
    """
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return -math.expm1(-math.expm1(rate * math.log(2.0)) / snr)


def capacity_multiantenna(mode: str, antennas: Sequence[int], snr: float) -> float:
    """Capacity with ``antennas[i]`` antennas at node i (last entry is the unicast destination)."""
    if len(antennas) == 0:
        raise ValueError("antenna list must be nonempty")
    if any(int(t) < 1 for t in antennas):
        raise ValueError("antenna counts must be positive integers")
    if mode in ("uc", "unicast"):
        return antennas[-1] * capacity(snr)
    if mode in ("mc", "multicast"):
        return min(antennas) * capacity(snr)
    raise ValueError(f"unknown mode {mode!r}")


def achievability_schedule(K: int, snr: float = 1.0) -> ProtocolParams:
    """Shrinking design pair ``alpha = 1/ln K``, ``beta = 1/K``."""
    if K < 3:
        raise ValueError("schedule needs K >= 3 so that 1/ln K < 1")
    return ProtocolParams(alpha=1.0 / math.log(K), beta=1.0 / K, snr=snr)
