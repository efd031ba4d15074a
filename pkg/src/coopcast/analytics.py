"""Exact outage, Chernoff bounds and the large-K approximation.

Every probability here is computed and returned as a natural log unless the
function name says otherwise; exponents are in nats per node.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .numerics import (
    binary_relative_entropy,
    log1mexp,
    log_binomial_pmf,
    log_erlang_cdf_table,
)
from .protocol import ProtocolParams, converse_outage_floor, rate_profile

log = logging.getLogger(__name__)

MODES = ("uc", "mc")


def normalize_mode(mode: str) -> str:
    m = {"uc": "uc", "unicast": "uc", "mc": "mc", "multicast": "mc"}.get(mode)
    if m is None:
        raise ValueError(f"mode must be 'uc' or 'mc', got {mode!r}")
    return m


def _check_alpha(params: ProtocolParams):
    if params.alpha >= 1.0:
        raise ValueError("analytics need alpha < 1")


def _log_pmf_all(n: int, alpha: float) -> np.ndarray:
    return log_binomial_pmf(n, np.arange(n + 1), alpha)


# ---------------------------------------------------------------------------
# exact outage
# ---------------------------------------------------------------------------


def log_exact_outage(params: ProtocolParams, K: int, mode: str) -> float:
    """Natural log of the exact outage probability.

    Conditioned on ``k1`` phase-1 decoders, a listener fails with the
    Erlang(k1) CDF at ``alpha K (1 - beta)``; listeners use disjoint gains, so
    for multicast the conditional outage is ``1 - (1 - P)^(K - k1)``.
    """
    _check_alpha(params)
    mode = normalize_mode(mode)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    alpha = params.alpha
    x = alpha * K * (1.0 - params.beta)
    log_p, log_q = log_erlang_cdf_table(K, x)
    if mode == "uc":
        # destination misses phase 1, relays drawn from the other K - 1 nodes
        terms = _log_pmf_all(K - 1, alpha) + log_p[:K]
        return math.log1p(-alpha) + float(logsumexp(terms))
    k1 = np.arange(K + 1)
    m = K - k1
    with np.errstate(invalid="ignore"):
        cond = log1mexp(np.where(m > 0, m * log_q, 0.0))
    cond[m == 0] = -np.inf
    return float(logsumexp(_log_pmf_all(K, alpha) + cond))


def exact_outage(params: ProtocolParams, K: int, mode: str) -> float:
    """Exact unicast (``"uc"``) or multicast (``"mc"``) outage probability."""
    return math.exp(log_exact_outage(params, K, mode))


# ---------------------------------------------------------------------------
# Chernoff bounds
# ---------------------------------------------------------------------------


def chernoff_conditional_bound(alpha_k: float, beta: float, k1: float) -> float:
    """Log of the Chernoff bound on the conditional outage given ``k1`` relays.

    Requires ``k1 >= alpha_k (1 - beta)``; the bound equals 1 at equality.
    """
    x = alpha_k * (1.0 - beta)
    if k1 < x:
        raise ValueError(f"bound needs k1 >= alphaK(1-beta) = {x}, got {k1}")
    if k1 == 0:
        return 0.0
    return k1 * (math.log(x / k1) + 1.0) - x


def chernoff_gamma(beta: float, eps: float) -> float:
    """Exponent ``beta - eps + (1 - eps) ln((1 - beta)/(1 - eps))``; negative for 0 < eps < beta."""
    return beta - eps + (1.0 - eps) * (math.log1p(-beta) - math.log1p(-eps))


def _log_chernoff_uc(alpha_k: float, beta: float, eps: float) -> float:
    return float(np.logaddexp(-alpha_k * eps * eps / 4.0, alpha_k * chernoff_gamma(beta, eps)))


def _golden_section(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def optimal_chernoff_eps(params: ProtocolParams, K: int) -> float:
    """Free parameter in (0, beta) minimizing the unicast Chernoff bound."""
    alpha_k = params.alpha * K
    eps, _ = _golden_section(lambda e: _log_chernoff_uc(alpha_k, params.beta, e), 0.0, params.beta)
    return eps


def chernoff_unicast_bound(params: ProtocolParams, K: int, eps: float | None = None) -> float:
    """Log of ``exp(-alpha K eps^2/4) + exp(alpha K gamma(beta, eps))``.

    With ``eps=None`` the bound is minimized over eps by golden-section search.
    The result may exceed 0 (bound above one).
    """
    if eps is None:
        eps = optimal_chernoff_eps(params, K)
    elif not 0.0 < eps < params.beta:
        raise ValueError(f"eps must lie in (0, beta={params.beta}), got {eps}")
    return _log_chernoff_uc(params.alpha * K, params.beta, eps)


def chernoff_multicast_bound(params: ProtocolParams, K: int, eps: float | None = None) -> float:
    """Union bound: ``ln K`` plus the unicast Chernoff bound."""
    return math.log(K) + chernoff_unicast_bound(params, K, eps)


def asymptotic_chernoff_eps(beta: float) -> tuple[float, float]:
    """``eps`` maximizing ``min(eps^2/4, -gamma(beta, eps))`` and that maximum."""
    eps, val = _golden_section(
        lambda e: -min(e * e / 4.0, -chernoff_gamma(beta, e)), 0.0, beta
    )
    return eps, -val


def chernoff_exponent(params: ProtocolParams) -> float:
    """Per-node decay rate guaranteed by the optimized Chernoff bound as K grows.

    ``alpha * max_eps min(eps^2/4, -gamma(beta, eps))``.
    """
    return params.alpha * asymptotic_chernoff_eps(params.beta)[1]


# ---------------------------------------------------------------------------
# large-K approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproxInternals:
    mu: float
    gamma_star: float
    exponent_per_node: float
    chernoff_eps: float | None = None
    chernoff_gamma: float | None = None


def approx_exponent_at(alpha: float, beta: float, gamma):
    """Per-node exponent of the largest summand when ``k1 = gamma K``.

    ``alpha(1-beta) + D(gamma||alpha) - gamma ln(alpha(1-beta) e / gamma)``.
    Vectorized over ``gamma``.
    """
    a1b = alpha * (1.0 - beta)
    gamma = np.asarray(gamma, dtype=float)
    out = a1b + binary_relative_entropy(gamma, alpha) - gamma * (np.log(a1b / gamma) + 1.0)
    return out if np.ndim(out) else float(out)


def solve_gamma_star(alpha: float, beta: float) -> ApproxInternals:
    """Stationary point of the approximation exponent, root of ``g^2/(1-g) = mu``."""
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise ValueError(f"need alpha, beta in (0, 1), got {alpha}, {beta}")
    mu = alpha * alpha * (1.0 - beta) / (1.0 - alpha)
    # positive root of g^2 + mu g - mu = 0, rearranged to avoid cancellation
    g = 2.0 * mu / (mu + math.sqrt(mu * mu + 4.0 * mu))
    if log.isEnabledFor(logging.DEBUG):
        alt = (math.sqrt(1.0 + 4.0 * mu) - 1.0) / (2.0 * mu)
        log.debug(
            "mu=%.12g stationary gamma=%.12g (residual %.3g); "
            "closed form (sqrt(1+4mu)-1)/(2mu)=%.12g (residual %.3g)",
            mu, g, g * g / (1 - g) - mu, alt, alt * alt / (1 - alt) - mu,
        )
    eps, _ = asymptotic_chernoff_eps(beta)
    return ApproxInternals(
        mu=mu,
        gamma_star=g,
        exponent_per_node=approx_exponent_at(alpha, beta, g),
        chernoff_eps=eps,
        chernoff_gamma=chernoff_gamma(beta, eps),
    )


def approx_outage(params: ProtocolParams, K: int, mode: str) -> float:
    """Log of the large-K approximation; multicast adds ``ln K``."""
    _check_alpha(params)
    mode = normalize_mode(mode)
    internals = solve_gamma_star(params.alpha, params.beta)
    log_uc = -0.5 * math.log(K) - K * internals.exponent_per_node
    return log_uc if mode == "uc" else log_uc + math.log(K)


# ---------------------------------------------------------------------------
# bundled report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundSet:
    """Exact values, bounds and approximations for one ``(params, K)``; all natural logs."""

    K: int
    log_exact_uc: float
    log_exact_mc: float
    log_chernoff_uc: float
    log_chernoff_mc: float
    log_approx_uc: float
    log_approx_mc: float
    log_converse_floor: float

    def linear(self) -> dict:
        """Linear-scale values; Chernoff bounds are left unclamped."""
        out = {"K": self.K}
        for name in (
            "exact_uc", "exact_mc", "chernoff_uc", "chernoff_mc",
            "approx_uc", "approx_mc", "converse_floor",
        ):
            out[name] = math.exp(getattr(self, "log_" + name))
        return out


def bound_set(params: ProtocolParams, K: int) -> BoundSet:
    eps = optimal_chernoff_eps(params, K)
    floor = converse_outage_floor(rate_profile(params).r_eff, params.snr)
    return BoundSet(
        K=K,
        log_exact_uc=log_exact_outage(params, K, "uc"),
        log_exact_mc=log_exact_outage(params, K, "mc"),
        log_chernoff_uc=chernoff_unicast_bound(params, K, eps),
        log_chernoff_mc=chernoff_multicast_bound(params, K, eps),
        log_approx_uc=approx_outage(params, K, "uc"),
        log_approx_mc=approx_outage(params, K, "mc"),
        log_converse_floor=math.log(floor) if floor > 0 else -math.inf,
    )
