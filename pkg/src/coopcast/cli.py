"""Command-line experiment driver.

Exit codes: 0 success, 2 invalid arguments, 3 unattainable target, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytics, exponent, montecarlo, protocol
from .tables import render_csv, render_json

EXIT_OK, EXIT_USAGE, EXIT_UNATTAINABLE, EXIT_IO = 0, 2, 3, 4

DEFAULT_K_LIST = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]

FIG3_FIELDS = ("alpha", "beta", "rate_fraction", "exponent", "chernoff_exponent", "chernoff_limited")
BOUND_FIELDS = ("K", "exact_uc", "exact_mc", "chernoff_uc", "chernoff_mc", "approx_uc", "approx_mc")
FIG2_FIELDS = (
    "K", "sim_uc", "sim_uc_se", "sim_mc", "sim_mc_se",
) + BOUND_FIELDS[1:]


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of integers, got {text!r}")


def _add_params(p: argparse.ArgumentParser):
    g = p.add_argument_group("protocol")
    g.add_argument("--alpha", type=float, help="phase-1 decoding fraction in (0, 1]")
    g.add_argument("--g", dest="g_threshold", type=float, help="phase-1 gain threshold G(alpha)")
    g.add_argument("--beta", type=float, default=0.5)
    g.add_argument("--snr-db", type=float, default=0.0)


def _add_output(p: argparse.ArgumentParser, default_format: str):
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def _add_sim(p: argparse.ArgumentParser, trials: int):
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)


def _add_k(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int)
    p.add_argument("--k-list", type=_int_list)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopcast", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file supplying flag values (flags override it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="phase rates, effective rate, capacity fraction")
    _add_params(p)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out")

    p = sub.add_parser("capacity", help="capacity, multi-antenna capacity, converse floor")
    p.add_argument("--snr-db", type=float, default=0.0)
    p.add_argument("--antennas", type=_int_list)
    p.add_argument("--mode", choices=("uc", "mc"), default="uc")
    p.add_argument("--rate", type=float, help="rate in bits for the converse / cooperation-free outage")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="Monte Carlo outage estimates")
    _add_params(p)
    _add_k(p)
    _add_sim(p, 100_000)
    _add_output(p, "csv")

    for name, text in (("exact", "exact outage"), ("bounds", "exact values, bounds, approximations")):
        p = sub.add_parser(name, help=text)
        _add_params(p)
        _add_k(p)
        p.add_argument("--workers", type=int, default=1)
        _add_output(p, "csv")

    p = sub.add_parser("figure2", help="outage vs network size table")
    _add_params(p)
    _add_k(p)
    _add_sim(p, 100_000)
    _add_output(p, "csv")

    p = sub.add_parser("figure3", help="scaling-exponent sweep and envelope")
    p.add_argument("--snr-db", type=float, default=0.0)
    p.add_argument("--grid-n", type=int, default=100)
    p.add_argument("--alpha-grid", type=str, help="comma-separated alpha values")
    p.add_argument("--beta-grid", type=str, help="comma-separated beta values")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="points CSV path (stdout if omitted)")
    p.add_argument("--envelope-out", help="envelope CSV path (default: <out stem>_envelope.csv)")
    p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("required-k", help="network size needed for a target outage")
    _add_params(p)
    p.add_argument("--eps", type=float, required=False, default=1e-3)
    p.add_argument("--mode", choices=("uc", "mc", "both"), default="both")
    p.add_argument("--out")

    p = sub.add_parser("exponent", help="asymptotic network scaling exponent")
    _add_params(p)
    p.add_argument("--slope-k", type=int, help="also report the exact-curve slope between K and 2K")
    p.add_argument("--out")
    parser.subcommands = sub.choices
    return parser


def _params(args) -> protocol.ProtocolParams:
    snr = protocol.db_to_linear(args.snr_db)
    if args.alpha is not None and args.g_threshold is not None:
        raise UsageError("give exactly one of --alpha and --g")
    if args.alpha is None and args.g_threshold is None:
        args.g_threshold = 0.5
    try:
        if args.alpha is not None:
            return protocol.ProtocolParams(args.alpha, args.beta, snr)
        return protocol.ProtocolParams.from_threshold(args.g_threshold, args.beta, snr)
    except ValueError as exc:
        raise UsageError(str(exc))


def _k_values(args, default=None) -> list[int]:
    if args.k is not None and args.k_list is not None:
        raise UsageError("give only one of --k and --k-list")
    ks = [args.k] if args.k is not None else args.k_list or default
    if not ks:
        raise UsageError("--k or --k-list is required")
    if any(k < 1 for k in ks):
        raise UsageError("network sizes must be >= 1")
    return ks


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _table(rows, fields, schema, args) -> str:
    if args.format == "json":
        return render_json({"schema": schema, "rows": [{f: r[f] for f in fields} for r in rows]})
    return render_csv(rows, fields, schema)


def cmd_rates(args):
    params = _params(args)
    try:
        prof = protocol.rate_profile(params)
    except ValueError as exc:
        raise UsageError(f"degenerate phase-1 rate: {exc}")
    report = {"alpha": params.alpha, "g_threshold": params.threshold, "beta": params.beta,
              "snr": params.snr, **prof.as_dict()}
    if args.format == "json":
        _emit(render_json(report), args.out)
    else:
        width = max(len(k) for k in report)
        _emit("".join(f"{k:<{width}}  {v:.6f}\n" for k, v in report.items()), args.out)


def cmd_capacity(args):
    snr = protocol.db_to_linear(args.snr_db)
    report = {"snr": snr, "capacity": protocol.capacity(snr)}
    try:
        if args.antennas:
            report["antennas"] = args.antennas
            report["mode"] = args.mode
            report["capacity_multiantenna"] = protocol.capacity_multiantenna(args.mode, args.antennas, snr)
        if args.rate is not None:
            report["rate"] = args.rate
            report["converse_outage_floor"] = protocol.converse_outage_floor(args.rate, snr)
            report["cooperation_free_outage"] = protocol.cooperation_free_outage(args.rate, snr)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(render_json(report), args.out)


def _check_sim(args):
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")


def cmd_simulate(args):
    params = _params(args)
    _check_sim(args)
    ks = _k_values(args)
    rows = []
    for r in montecarlo.sweep_outage_vs_k(params, ks, args.trials, args.seed, args.workers):
        rows += [r.uc.row(r.K), r.mc.row(r.K)]
    _emit(_table(rows, montecarlo.ESTIMATE_FIELDS, "simulate", args), args.out)


def _exact_row(task) -> dict:
    params, K = task
    return {"K": K,
            "exact_uc": analytics.exact_outage(params, K, "uc"),
            "exact_mc": analytics.exact_outage(params, K, "mc")}


def _bound_row(task) -> dict:
    params, K = task
    return analytics.bound_set(params, K).linear()


def _per_k(fn, args) -> list[dict]:
    params = _params(args)
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    return montecarlo.parallel_map(fn, [(params, K) for K in _k_values(args)], args.workers)


def cmd_exact(args):
    rows = _per_k(_exact_row, args)
    _emit(_table(rows, ("K", "exact_uc", "exact_mc"), "exact", args), args.out)


def cmd_bounds(args):
    rows = _per_k(_bound_row, args)
    _emit(_table(rows, BOUND_FIELDS, "bounds", args), args.out)


def figure2_rows(params, k_list, trials, seed, workers=1) -> list[dict]:
    rows = []
    for r in montecarlo.sweep_outage_vs_k(params, k_list, trials, seed, workers):
        row = analytics.bound_set(params, r.K).linear()
        row.update(sim_uc=r.uc.p_hat, sim_uc_se=r.uc.std_err, sim_mc=r.mc.p_hat, sim_mc_se=r.mc.std_err)
        rows.append(row)
    return rows


def cmd_figure2(args):
    params = _params(args)
    _check_sim(args)
    rows = figure2_rows(params, _k_values(args, DEFAULT_K_LIST), args.trials, args.seed, args.workers)
    _emit(_table(rows, FIG2_FIELDS, "figure2", args), args.out)


def _grid(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}")


def cmd_figure3(args):
    snr = protocol.db_to_linear(args.snr_db)
    alpha_grid, beta_grid = exponent.default_grid(args.grid_n)
    if args.alpha_grid:
        alpha_grid = _grid(args.alpha_grid)
    if args.beta_grid:
        beta_grid = _grid(args.beta_grid)
    if args.bins < 1 or args.workers < 1:
        raise UsageError("--bins and --workers must be >= 1")
    try:
        points, (edges, env) = exponent.sweep_exponent(snr, alpha_grid, beta_grid, args.bins, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc))
    prow = [{"alpha": p.alpha, "beta": p.beta, "rate_fraction": p.rate_fraction, "exponent": p.exponent,
             "chernoff_exponent": p.chernoff_exponent, "chernoff_limited": int(p.chernoff_limited)}
            for p in points]
    erow = [{"r_bin": float(e), "envelope_exponent": float(v)} for e, v in zip(edges, env)]
    points_csv = render_csv(prow, FIG3_FIELDS, "figure3-points")
    env_csv = render_csv(erow, ("r_bin", "envelope_exponent"), "figure3-envelope")
    if args.out is None:
        _emit(points_csv, None)
        _emit(env_csv, args.envelope_out)
        return
    env_out = args.envelope_out or str(Path(args.out).with_name(Path(args.out).stem + "_envelope.csv"))
    _emit(points_csv, args.out)
    _emit(env_csv, env_out)


def cmd_required_k(args):
    params = _params(args)
    if not 0.0 < args.eps <= 1.0:
        raise UsageError("--eps must lie in (0, 1]")
    report = {"alpha": params.alpha, "beta": params.beta, "eps": args.eps}
    if args.mode == "both":
        gap = exponent.network_size_gap(params, args.eps)
        report.update(k_uc=gap.k_uc, k_mc=gap.k_mc, gap=gap.gap, exponent=gap.exponent,
                      predicted_gap=gap.predicted_gap, relative_gap_error=gap.relative_error)
    else:
        report["k_" + args.mode] = exponent.required_network_size(params, args.mode, args.eps)
    _emit(render_json(report), args.out)


def cmd_exponent(args):
    params = _params(args)
    if params.alpha >= 1.0:
        raise UsageError("alpha must be < 1")
    internals = analytics.solve_gamma_star(params.alpha, params.beta)
    e = internals.exponent_per_node
    report = {
        "alpha": params.alpha, "beta": params.beta, "snr": params.snr,
        "rate_fraction": protocol.rate_profile(params).rate_fraction,
        "mu": internals.mu, "gamma_star": internals.gamma_star,
        "exponent": e, "chernoff_exponent": analytics.chernoff_exponent(params),
    }
    if args.slope_k:
        for m in ("uc", "mc"):
            report[f"slope_{m}"] = exponent.empirical_slope(params, args.slope_k, m)
    _emit(render_json(report), args.out)


COMMANDS = {
    "rates": cmd_rates, "capacity": cmd_capacity, "simulate": cmd_simulate,
    "exact": cmd_exact, "bounds": cmd_bounds, "figure2": cmd_figure2,
    "figure3": cmd_figure3, "required-k": cmd_required_k, "exponent": cmd_exponent,
}


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad config file {args.config}: {exc}")
        sub = parser.subcommands[args.command]
        known = {a.dest for a in sub._actions}
        values = {k.replace("-", "_"): v for k, v in config.items()}
        if "g" in values:
            values["g_threshold"] = values.pop("g")
        # a threshold given on the command line replaces either form from the file
        if getattr(args, "alpha", None) is not None or getattr(args, "g_threshold", None) is not None:
            values.pop("alpha", None)
            values.pop("g_threshold", None)
        unknown = set(values) - known
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        for key in ("k_list", "antennas"):
            if isinstance(values.get(key), str):
                values[key] = _int_list(values[key])
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"coopcast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except exponent.UnattainableTarget as exc:
        print(f"coopcast: unattainable: {exc}", file=sys.stderr)
        return EXIT_UNATTAINABLE
    except OSError as exc:
        print(f"coopcast: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
