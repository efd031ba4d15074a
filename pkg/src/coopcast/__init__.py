"""Outage analysis of two-phase cooperative unicasting and multicasting in
large Rayleigh-fading networks."""

from .analytics import (
    BoundSet,
    approx_outage,
    bound_set,
    chernoff_conditional_bound,
    chernoff_multicast_bound,
    chernoff_unicast_bound,
    exact_outage,
    log_exact_outage,
    solve_gamma_star,
)
from .exponent import (
    asymptotic_exponent,
    network_size_gap,
    required_network_size,
    sweep_exponent,
)
from .montecarlo import OutageEstimate, estimate_outage, sweep_outage_vs_k
from .protocol import ProtocolParams, RateProfile, gain_threshold, rate_profile
from .simcore import NetworkInstance, TrialOutcome, run_trial, sample_instance

__version__ = "0.1.0"

__all__ = [
    "BoundSet", "NetworkInstance", "OutageEstimate", "ProtocolParams", "RateProfile", "TrialOutcome",
    "approx_outage", "asymptotic_exponent", "bound_set", "chernoff_conditional_bound",
    "chernoff_multicast_bound", "chernoff_unicast_bound", "estimate_outage", "exact_outage",
    "gain_threshold", "log_exact_outage", "network_size_gap", "rate_profile", "required_network_size",
    "run_trial", "sample_instance", "solve_gamma_star", "sweep_exponent", "sweep_outage_vs_k",
]
