"""Command-line front end: validate, solve, simulate, compare, gen-weather.

Exit codes: 0 success, 1 domain failure (invalid network, non-convergence),
2 I/O or usage error.  Set AIRNET_LOG=debug|info|warning for verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

from .assembly import BoundaryState
from .network import (
    NetworkFormatError,
    NetworkValidationError,
    load_network,
    validate,
)
from .scenario import (
    WeatherFormatError,
    generate_weather,
    parse_weather,
    run_simulation,
    serialize_weather,
    summarize,
    write_timestep_csv,
)
from .solvers import (
    NonConvergenceError,
    SingularJacobianError,
    SolverConfig,
    solve,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

log = logging.getLogger("airnet")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_network_or_exit(path: str):
    try:
        return load_network(path), EXIT_OK
    except FileNotFoundError:
        print(f"error: network file not found: {path}", file=sys.stderr)
        return None, EXIT_USAGE
    except NetworkFormatError as exc:
        print(f"error: cannot parse {path}: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except NetworkValidationError as exc:
        for violation in exc.violations:
            print(f"invalid: {violation}", file=sys.stderr)
        return None, EXIT_DOMAIN


def _load_weather_or_exit(path: str):
    try:
        return parse_weather(Path(path).read_text()), EXIT_OK
    except FileNotFoundError:
        print(f"error: weather file not found: {path}", file=sys.stderr)
        return None, EXIT_USAGE
    except WeatherFormatError as exc:
        print(f"error: cannot parse {path}: {exc}", file=sys.stderr)
        return None, EXIT_USAGE


def _config_from(args) -> SolverConfig:
    return SolverConfig(
        tolerance=args.tol,
        max_newton_iters=args.max_iter,
        fixed_relax=args.relax,
        picard_iters=args.picard_iters,
        accel=args.accel,
        trunc_dp_max=args.trunc_pa,
    )


def _boundary_from(args) -> BoundaryState:
    return BoundaryState(
        wind_speed=args.wind_speed,
        wind_direction_deg=args.wind_dir,
        outdoor_temp_k=args.temp_out_c + 273.15,
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-3, help="mass-balance tolerance, kg/s")
    parser.add_argument("--max-iter", type=int, default=500, help="Newton iteration budget")
    parser.add_argument("--relax", type=float, default=0.1, help="fixed under-relaxation for NR")
    parser.add_argument("--picard-iters", type=int, default=10, help="Picard initializer budget")
    parser.add_argument("--accel", type=float, default=0.5, help="Picard damping factor")
    parser.add_argument("--trunc-pa", type=float, default=60.0, help="Picard update cap, Pa")


def cmd_check(args) -> int:
    try:
        net = load_network(args.network)
    except FileNotFoundError:
        print(f"error: network file not found: {args.network}", file=sys.stderr)
        return EXIT_USAGE
    except NetworkFormatError as exc:
        print(f"error: cannot parse {args.network}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetworkValidationError as exc:
        for violation in exc.violations:
            print(violation)
        return EXIT_DOMAIN
    violations = validate(net)
    if violations:
        for violation in violations:
            print(violation)
        return EXIT_DOMAIN
    print(f"OK: {len(net.zones)} zones, {len(net.external_nodes)} external nodes, {len(net.links)} links")
    return EXIT_OK


def cmd_solve(args) -> int:
    net, code = _load_network_or_exit(args.network)
    if net is None:
        return code
    cfg = _config_from(args)
    bc = _boundary_from(args)
    try:
        outcome = solve(net, bc, None, args.strategy, cfg)
    except (NonConvergenceError, SingularJacobianError) as exc:
        diagnostics = {
            "error": type(exc).__name__,
            "message": str(exc),
            "pressures": {z.id: float(p) for z, p in zip(net.zones, exc.pressures)},
        }
        print(json.dumps(diagnostics, indent=2), file=sys.stderr)
        return EXIT_DOMAIN
    result = {
        "network": args.network,
        "strategy": outcome.strategy,
        "boundary": {
            "wind_speed_m_s": bc.wind_speed,
            "wind_dir_deg": bc.wind_direction_deg,
            "outdoor_temp_k": bc.outdoor_temp_k,
        },
        "pressures_pa": {z.id: float(p) for z, p in zip(net.zones, outcome.pressures)},
        "link_flows_kg_s": {
            fl.link_id: {
                "flow": fl.flow,
                "forward": fl.flow_forward,
                "reverse": fl.flow_reverse,
                "neutral_height_m": fl.neutral_height,
            }
            for fl in outcome.link_flows.values()
        },
        "newton_iters": outcome.newton_iters,
        "picard_iters_used": outcome.picard_iters_used,
        "converged_in_picard": outcome.converged_in_picard,
        "picard_aborted": outcome.picard_aborted,
        "max_residual_kg_s": outcome.max_residual,
        "config": asdict(cfg),
    }
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    net, code = _load_network_or_exit(args.network)
    if net is None:
        return code
    weather, code = _load_weather_or_exit(args.weather)
    if weather is None:
        return code
    cfg = _config_from(args)
    records = run_simulation(net, weather, args.strategy, cfg, warm_start=not args.no_warm_start)
    _atomic_write(Path(args.out), write_timestep_csv(records, net))
    failures = sum(1 for r in records if r.failed is not None)
    print(f"wrote {len(records)} timesteps to {args.out} ({failures} failures)")
    return EXIT_OK


def cmd_compare(args) -> int:
    strategies = [s.upper() for s in args.strategies]
    if len(strategies) < 2:
        print("error: compare needs at least 2 strategies", file=sys.stderr)
        return EXIT_USAGE
    if len(set(strategies)) != len(strategies):
        print("error: duplicate strategies requested", file=sys.stderr)
        return EXIT_USAGE
    net, code = _load_network_or_exit(args.network)
    if net is None:
        return code
    weather, code = _load_weather_or_exit(args.weather)
    if weather is None:
        return code
    cfg = _config_from(args)

    all_records = {}
    for strategy in strategies:
        log.info("running %s over %d timesteps", strategy, len(weather))
        all_records[strategy] = run_simulation(
            net, weather, strategy, cfg, warm_start=not args.no_warm_start
        )

    prefix = Path(args.out)

    # Long format: one row per timestep per strategy.
    lines = ["timestamp,strategy,picard_iters,newton_iters,converged_in_picard,picard_aborted,max_residual_kg_s,failed"]
    for strategy in strategies:
        for rec in all_records[strategy]:
            lines.append(
                ",".join(
                    [
                        rec.timestamp,
                        rec.strategy,
                        str(rec.picard_iters),
                        str(rec.newton_iters),
                        "true" if rec.converged_in_picard else "false",
                        rec.picard_aborted or "",
                        f"{rec.max_residual:.9g}",
                        rec.failed or "",
                    ]
                )
            )
    _atomic_write(prefix.with_name(prefix.name + "_iterations.csv"), "\n".join(lines) + "\n")

    # Wide format: timestep rows, one Newton-iteration column per strategy.
    wide = ["timestamp," + ",".join(f"newton_iters_{s.lower()}" for s in strategies)]
    for i, rec in enumerate(weather):
        row = [rec.timestamp]
        for strategy in strategies:
            row.append(str(all_records[strategy][i].newton_iters))
        wide.append(",".join(row))
    _atomic_write(prefix.with_name(prefix.name + "_wide.csv"), "\n".join(wide) + "\n")

    summaries = {
        strategy: asdict(summarize(records)[strategy])
        for strategy, records in all_records.items()
    }
    report = {
        "network": args.network,
        "weather": args.weather,
        "timesteps": len(weather),
        "strategies": summaries,
        "warm_start": not args.no_warm_start,
        "config": asdict(cfg),
    }
    _atomic_write(prefix.with_name(prefix.name + "_summary.json"), json.dumps(report, indent=2) + "\n")

    print(f"{'strategy':<10}{'mean newton':>12}{'(+picard)':>12}{'%picard':>10}{'failures':>10}")
    for strategy in strategies:
        s = summaries[strategy]
        print(
            f"{strategy:<10}{s['mean_newton_iters']:>12}{s['mean_iters_with_picard_cost']:>12}"
            f"{s['pct_converged_in_picard']:>10}{s['failures']:>10}"
        )
    return EXIT_OK


def cmd_gen_weather(args) -> int:
    if args.days < 1 or args.step_min < 1:
        print("error: --days and --step-min must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    records = generate_weather(days=args.days, step_minutes=args.step_min, seed=args.seed)
    _atomic_write(Path(args.out), serialize_weather(records))
    print(f"wrote {len(records)} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airnet",
        description="Multizone building airflow-network solver and strategy benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="validate a network file")
    p_check.add_argument("--network", required=True)
    p_check.set_defaults(handler=cmd_check)

    p_solve = sub.add_parser("solve", help="single steady-state solve")
    p_solve.add_argument("--network", required=True)
    p_solve.add_argument("--strategy", choices=["nr", "wm", "pnr", "pwm"], default="wm")
    p_solve.add_argument("--wind-speed", type=float, default=0.0, help="m/s")
    p_solve.add_argument("--wind-dir", type=float, default=0.0, help="degrees from north")
    p_solve.add_argument("--temp-out-c", type=float, default=20.0)
    _add_config_flags(p_solve)
    p_solve.set_defaults(handler=cmd_solve)

    p_sim = sub.add_parser("simulate", help="run one strategy over a weather series")
    p_sim.add_argument("--network", required=True)
    p_sim.add_argument("--weather", required=True)
    p_sim.add_argument("--strategy", choices=["nr", "wm", "pnr", "pwm"], default="wm")
    p_sim.add_argument("--out", required=True, help="timestep CSV output path")
    p_sim.add_argument("--no-warm-start", action="store_true")
    _add_config_flags(p_sim)
    p_sim.set_defaults(handler=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="benchmark strategies over a weather series")
    p_cmp.add_argument("--network", required=True)
    p_cmp.add_argument("--weather", required=True)
    p_cmp.add_argument(
        "--strategies",
        nargs="+",
        choices=["nr", "wm", "pnr", "pwm"],
        default=["nr", "wm", "pnr", "pwm"],
    )
    p_cmp.add_argument("--out", required=True, help="output path prefix")
    p_cmp.add_argument("--no-warm-start", action="store_true")
    _add_config_flags(p_cmp)
    p_cmp.set_defaults(handler=cmd_compare)

    p_gen = sub.add_parser("gen-weather", help="write a synthetic weather CSV")
    p_gen.add_argument("--days", type=int, default=10)
    p_gen.add_argument("--step-min", type=int, default=30)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(handler=cmd_gen_weather)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("AIRNET_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(message)s")
    args = build_parser().parse_args(argv)
    return args.handler(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
