"""Log-domain special functions used by the analytics and exponent modules.

Probabilities are carried as natural logs wherever they can underflow.
Relative entropies are in nats.
"""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-15
_MAX_ITER = 100_000

# Clamp range for relative-entropy arguments coming from sweep grids.
CLAMP_LO = 1e-15
CLAMP_HI = 1.0 - 1e-15


def clamp_probability(p):
    """Clip ``p`` into ``[1e-15, 1 - 1e-15]``."""
    return np.clip(p, CLAMP_LO, CLAMP_HI)


def log1mexp(a):
    """Return ``log(1 - exp(a))`` for ``a <= 0`` without cancellation.

    ``a == 0`` maps to ``-inf``.
    """
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, -np.inf)
    small = a > -math.log(2.0)
    with np.errstate(divide="ignore"):
        out[small] = np.log(-np.expm1(a[small]))
        out[~small] = np.log1p(-np.exp(a[~small]))
    out[a == 0.0] = -np.inf
    return out if out.ndim else float(out)


def _log_series_lower(a: float, x: float) -> float:
    # sum_{n>=0} x^n / ((a+1)...(a+n)), scaled by x^a e^-x / Gamma(a+1)
    term = 1.0
    total = 1.0
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            break
    else:
        raise ArithmeticError(f"series for P({a}, {x}) did not converge")
    return a * math.log(x) - x - math.lgamma(a + 1.0) + math.log(total)


def _log_cf_upper(a: float, x: float) -> float:
    # modified Lentz on the Legendre continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"continued fraction for Q({a}, {x}) did not converge")
    return a * math.log(x) - x - math.lgamma(a) + math.log(h)


def log_regularized_gamma(k: float, x: float) -> tuple[float, float]:
    """Return ``(log P(k, x), log Q(k, x))`` for the regularized incomplete gamma.

    Uses the power series when ``x < k + 1`` and the continued fraction
    otherwise; the complementary value is obtained from the computed one.
    """
    if k < 0 or x < 0 or math.isnan(k) or math.isnan(x):
        raise ValueError(f"regularized gamma needs k >= 0 and x >= 0, got k={k}, x={x}")
    if k == 0:
        return 0.0, -math.inf
    if x == 0:
        return -math.inf, 0.0
    if math.isinf(x):
        return 0.0, -math.inf
    if x < k + 1.0:
        log_p = _log_series_lower(k, x)
        log_q = math.log1p(-math.exp(log_p)) if log_p < 0 else -math.inf
    else:
        log_q = _log_cf_upper(k, x)
        log_p = math.log1p(-math.exp(log_q)) if log_q < 0 else -math.inf
    return min(log_p, 0.0), min(log_q, 0.0)


def regularized_lower_gamma(k: float, x: float) -> float:
    """Erlang CDF: probability that a sum of ``k`` unit-mean exponentials is <= ``x``.

    ``k = 0`` gives 1 (the empty sum is zero).

    >>> regularized_lower_gamma(1, 5.0)  # doctest: +ELLIPSIS
    0.99326...
    """
    return math.exp(log_regularized_gamma(k, x)[0])


def log_erlang_cdf_table(kmax: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Tabulate ``log P(k, x)`` and ``log Q(k, x)`` for ``k = 0..kmax``.

    Relies on ``P(k, x) = Pr{Poisson(x) >= k}``: both tails are cumulative
    log-sum-exps of Poisson log-masses, so no subtraction ever occurs.
    """
    if kmax < 0 or x < 0:
        raise ValueError("need kmax >= 0 and x >= 0")
    k = np.arange(kmax + 1)
    if x == 0:
        log_p = np.full(kmax + 1, -np.inf)
        log_p[0] = 0.0
        log_q = np.zeros(kmax + 1)
        log_q[0] = -np.inf
        return log_p, log_q
    # masses beyond jmax are below exp(-1800) relative to the tail head
    jmax = int(max(kmax, x) + 60.0 * math.sqrt(x) + 200)
    j = np.arange(jmax + 1)
    log_pois = _log_poisson_pmf(j, x)
    upper = np.logaddexp.accumulate(log_pois[::-1])[::-1]  # log Pr{N >= j}
    lower = np.logaddexp.accumulate(log_pois)  # log Pr{N <= j}
    log_p = np.minimum(upper[k], 0.0)
    log_q = np.empty(kmax + 1)
    log_q[0] = -np.inf
    log_q[1:] = np.minimum(lower[k[1:] - 1], 0.0)
    log_p[0] = 0.0
    # a cumulative sum near 1 carries absolute rounding error; take that side
    # from the complement whenever the other tail is small
    half = -math.log(2.0)
    p_small = log_p < half
    log_q = np.where(p_small, log1mexp(np.minimum(log_p, 0.0)), log_q)
    log_p = np.where(~p_small & (log_q < half), log1mexp(np.minimum(log_q, 0.0)), log_p)
    return log_p, log_q


_SFE = np.array([math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - 0.5 * math.log(2 * math.pi)
                 if n > 0 else 1.0 - 0.5 * math.log(2 * math.pi) for n in range(16)])
_SFE[0] = 0.0


def _stirling_error(n: np.ndarray) -> np.ndarray:
    """``ln n! - ln(sqrt(2 pi n) (n/e)^n)`` for integer ``n >= 1``."""
    n = np.asarray(n, dtype=float)
    out = np.empty(n.shape)
    small = n <= 15
    out[small] = _SFE[n[small].astype(int)]
    nn = n[~small]
    inv2 = 1.0 / (nn * nn)
    out[~small] = (1.0 / 12 - (1.0 / 360 - (1.0 / 1260 - (1.0 / 1680 - inv2 / 1188) * inv2) * inv2) * inv2) / nn
    return out


def _deviance(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """``x ln(x/m) + m - x`` without cancellation when ``x`` is close to ``m``."""
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float) * np.ones_like(x)
    out = np.empty(x.shape)
    near = np.abs(x - m) < 0.1 * (x + m)
    far = ~near
    out[far] = x[far] * np.log(x[far] / m[far]) + m[far] - x[far]
    xn, mn = x[near], m[near]
    v = (xn - mn) / (xn + mn)
    s = (xn - mn) * v
    ej = 2.0 * xn * v
    v2 = v * v
    for j in range(1, 200):
        ej = ej * v2
        s1 = s + ej / (2 * j + 1)
        if np.all(s1 == s):
            break
        s = s1
    out[near] = s
    return out


def _log_poisson_pmf(j: np.ndarray, x: float) -> np.ndarray:
    out = np.empty(j.shape)
    out[j == 0] = -x
    pos = j > 0
    jp = j[pos].astype(float)
    out[pos] = -_stirling_error(jp) - _deviance(jp, x) - 0.5 * (math.log(2 * math.pi) + np.log(jp))
    return out


def log_binomial_pmf(K, k1, alpha: float):
    """Natural log of ``C(K, k1) alpha^k1 (1 - alpha)^(K - k1)``.

    Vectorized over ``k1``; ``alpha`` must lie strictly inside (0, 1).  Uses
    the saddle-point form (Stirling-series error terms plus deviances) rather
    than differences of log-gammas, which lose ~1e-11 absolute accuracy at
    K ~ 1e4.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    scalar = np.ndim(k1) == 0
    k = np.atleast_1d(np.asarray(k1))
    if np.any((k < 0) | (k > K)):
        raise ValueError(f"k1 must lie in [0, {K}]")
    k = k.astype(float)
    out = np.empty(k.shape)
    lo, hi = k == 0, k == K
    out[lo] = K * math.log1p(-alpha)
    out[hi] = K * math.log(alpha)
    mid = ~(lo | hi)
    if np.any(mid):
        km = k[mid]
        rest = K - km
        out[mid] = (
            _stirling_error(np.array([K]))[0]
            - _stirling_error(km)
            - _stirling_error(rest)
            - _deviance(km, K * alpha)
            - _deviance(rest, K * (1.0 - alpha))
            - 0.5 * (math.log(2 * math.pi) + np.log(km) + np.log1p(-km / K))
        )
    if K == 0:
        out[:] = 0.0
    return float(out[0]) if scalar else out


def binary_relative_entropy(p, q):
    """Binary relative entropy ``D(p || q)`` in nats.

    Both arguments must lie strictly inside (0, 1); callers working on
    sweep grids clamp first with :func:`clamp_probability`.
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1) | (q_arr <= 0) | (q_arr >= 1)):
        raise ValueError("relative entropy arguments must lie in (0, 1)")
    out = p_arr * np.log(p_arr / q_arr) + (1.0 - p_arr) * np.log1p(
        -p_arr
    ) - (1.0 - p_arr) * np.log1p(-q_arr)
    out = np.where(p_arr == q_arr, 0.0, np.maximum(out, 0.0))
    return out if out.ndim else float(out)
