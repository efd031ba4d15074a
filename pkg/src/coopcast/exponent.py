"""Network scaling exponents, (alpha, beta) sweeps and required network sizes.

Exponents are in nats per node.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytics import chernoff_exponent, log_exact_outage, normalize_mode, solve_gamma_star
from .protocol import ProtocolParams, rate_profile

K_LIMIT = 10**6
# sizes checked exhaustively before the doubling search
LINEAR_SCAN = 64


class UnattainableTarget(RuntimeError):
    """No network size up to the search limit reaches the target outage."""


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    beta: float
    rate_fraction: float
    exponent: float
    chernoff_exponent: float

    @property
    def chernoff_exceeds(self) -> bool:
        """True when the optimized Chernoff bound promises faster decay than the approximation exponent."""
        return self.chernoff_exponent > self.exponent * (1.0 + 1e-9)

    @property
    def chernoff_limited(self) -> bool:
        """True when the rigorous Chernoff rate falls short of the approximation exponent."""
        return self.chernoff_exponent < self.exponent * (1.0 - 1e-9)


def asymptotic_exponent(params: ProtocolParams) -> float:
    """Per-node decay rate of ``ln Pr{outage}``; identical for unicast and multicast."""
    return solve_gamma_star(params.alpha, params.beta).exponent_per_node


def empirical_slope(params: ProtocolParams, K: int, mode: str = "uc", factor: int = 2) -> float:
    """``-(ln P(factor K) - ln P(K)) / ((factor - 1) K)`` from the exact outage."""
    lo = log_exact_outage(params, K, mode)
    hi = log_exact_outage(params, factor * K, mode)
    return -(hi - lo) / ((factor - 1) * K)


def _point(args) -> SweepPoint:
    alpha, beta, snr = args
    p = ProtocolParams(alpha, beta, snr)
    return SweepPoint(
        alpha=alpha, beta=beta,
        rate_fraction=rate_profile(p).rate_fraction,
        exponent=asymptotic_exponent(p),
        chernoff_exponent=chernoff_exponent(p),
    )


def sweep_points(snr: float, alpha_grid, beta_grid, workers: int = 1) -> list[SweepPoint]:
    """One point per grid cell, ordered alpha-major."""
    alpha_grid = [float(a) for a in alpha_grid]
    beta_grid = [float(b) for b in beta_grid]
    if not alpha_grid or not beta_grid:
        raise ValueError("alpha and beta grids must be nonempty")
    cells = [(a, b, snr) for a in alpha_grid for b in beta_grid]
    for a, b, _ in cells:
        if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
            raise ValueError(f"grid cell ({a}, {b}) outside (0,1) x (0,1)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_point, cells, chunksize=max(1, len(cells) // (4 * workers))))
    return [_point(c) for c in cells]


def upper_envelope(points: list[SweepPoint], bins: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Best exponent among points whose rate fraction reaches each bin's lower edge.

    Returns ``(bin lower edges, envelope)``; nonincreasing by construction.
    Bins above every point's rate get 0, the trivial exponent.
    """
    if not points:
        raise ValueError("no sweep points")
    edges = np.arange(bins) / bins
    r = np.array([p.rate_fraction for p in points])
    e = np.array([p.exponent for p in points])
    idx = np.clip(np.floor(r * bins).astype(int), 0, bins - 1)
    per_bin = np.zeros(bins)
    np.maximum.at(per_bin, idx, e)
    env = np.maximum.accumulate(per_bin[::-1])[::-1]
    return edges, env


def envelope_at(edges: np.ndarray, env: np.ndarray, r: float) -> float:
    """Envelope value of the bin containing rate fraction ``r``."""
    i = int(np.searchsorted(edges, r, side="right")) - 1
    return float(env[max(i, 0)])


def sweep_exponent(snr: float, alpha_grid, beta_grid, bins: int = 100, workers: int = 1):
    """Return ``(points, (edges, envelope))`` for a rectangular parameter grid."""
    points = sweep_points(snr, alpha_grid, beta_grid, workers)
    return points, upper_envelope(points, bins)


def default_grid(n: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Log-spaced alpha and beta grids on [1e-3, 0.999]."""
    g = np.geomspace(1e-3, 0.999, n)
    return g, g


def required_network_size(params: ProtocolParams, mode: str, target_eps: float, k_limit: int = K_LIMIT) -> int:
    """Smallest K whose exact outage is at most ``target_eps``.

    Small sizes are scanned one by one, since the multicast curve can rise
    before it falls; beyond that, doubling then bisection, which assumes the
    curve is decreasing past the first doubling step that meets the target.
    """
    mode = normalize_mode(mode)
    if not 0.0 < target_eps <= 1.0:
        raise ValueError(f"target_eps must lie in (0, 1], got {target_eps}")
    log_eps = math.log(target_eps)

    def ok(K: int) -> bool:
        return log_exact_outage(params, K, mode) <= log_eps

    for K in range(1, min(LINEAR_SCAN, k_limit) + 1):
        if ok(K):
            return K
    if k_limit <= LINEAR_SCAN:
        raise UnattainableTarget(f"outage {target_eps} not reached for K <= {k_limit} ({mode})")
    lo, hi = LINEAR_SCAN, min(2 * LINEAR_SCAN, k_limit)
    while not ok(hi):
        if hi >= k_limit:
            raise UnattainableTarget(f"outage {target_eps} not reached for K <= {k_limit} ({mode})")
        lo, hi = hi, min(2 * hi, k_limit)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class SizeGap:
    k_uc: int
    k_mc: int
    exponent: float
    predicted_gap: float

    @property
    def gap(self) -> int:
        return self.k_mc - self.k_uc

    @property
    def relative_error(self) -> float:
        if self.predicted_gap == 0:
            return 0.0 if self.gap == 0 else math.inf
        return abs(self.gap - self.predicted_gap) / self.predicted_gap


def network_size_gap(params: ProtocolParams, target_eps: float) -> SizeGap:
    """Unicast/multicast required sizes and the ``ln(K_uc) / E`` gap prediction."""
    k_uc = required_network_size(params, "uc", target_eps)
    k_mc = required_network_size(params, "mc", target_eps)
    e = asymptotic_exponent(params)
    return SizeGap(k_uc, k_mc, e, math.log(k_uc) / e)
