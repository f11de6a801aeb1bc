"""Command-line front end: clear one market, sweep an axis, or verify.

Subcommands
-----------
clear   Clear a scenario under one or more mechanisms and emit one result
        row per (mechanism, supplier).
sweep   Re-run the scenario while varying supplier uncertainty or the
        penalty price; one row per (axis value, mechanism, supplier),
        ordered by axis value.
verify  Run the equilibrium / duality / price-chain verifiers and exit 0
        only if all of them pass.

Output rows use the fixed column set
axis_value,mechanism,supplier,price,expected_price,profit,epsilon,lost_load
in CSV (default) or JSON. Identical scenario and seed produce byte-identical
output. Exit codes: 0 ok, 1 verification failure, 2 usage or config error.
"""

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .market import supplier_profit
from .pay_as_bid import (EquilibriumNotFound, PriceGrid, build_bimatrix,
                         pab_summary, solve_mixed_equilibrium)
from .regulated import check_duality, clear_rup, compare_mechanism_prices
from .scenario import (ScenarioError, SweepSpec, load_scenario,
                       parse_mechanisms, resolved_config_text)
from .uniform_price import (clear_up_zero, construct_up_equilibrium,
                            verify_quantity_equilibrium)

COLUMNS = ("axis_value", "mechanism", "supplier", "price", "expected_price",
           "profit", "epsilon", "lost_load")

_EXIT_OK = 0
_EXIT_VERIFICATION = 1
_EXIT_USAGE = 2


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _mechanism_rows(spec, mechanism, axis_value=None, seed=None):
    """Result rows for one scenario under one mechanism."""
    market = spec.market
    options = spec.options
    models = spec.build_models()
    policy = options.tie_break_policy(seed=seed)
    rows = []
    warnings = []
    if mechanism == "up":
        split = options.resolve_up_split(len(models))
        profile = construct_up_equilibrium(models, market, split=split)
        outcome = clear_up_zero(profile, market, policy)
        price = outcome.prices[0]
        for i, (model, x) in enumerate(zip(models, outcome.commitments), 1):
            profit = supplier_profit(model, x, price, market.penalty).profit
            rows.append({"axis_value": axis_value, "mechanism": "up",
                         "supplier": i, "price": price,
                         "expected_price": price, "profit": profit,
                         "epsilon": None, "lost_load": outcome.lost_load})
    elif mechanism == "rup":
        outcome = clear_rup(models, market)
        price = outcome.prices[0]
        for i, (model, x) in enumerate(zip(models, outcome.commitments), 1):
            profit = supplier_profit(model, x, price, market.penalty).profit
            rows.append({"axis_value": axis_value, "mechanism": "rup",
                         "supplier": i, "price": price,
                         "expected_price": price, "profit": profit,
                         "epsilon": None, "lost_load": outcome.lost_load})
    elif mechanism == "pab":
        grid = PriceGrid.uniform(market.price_cap, options.pab_grid_levels)
        game = build_bimatrix(models, market, grid=grid, policy=policy)
        tolerance = options.resolve_pab_tolerance(market)
        try:
            strategies = solve_mixed_equilibrium(
                game, tolerance, max_iterations=options.pab_max_iterations)
        except EquilibriumNotFound as err:
            strategies = err.strategies
            warnings.append(
                f"pab solver did not reach tolerance {tolerance:.3g} at "
                f"axis_value={axis_value}: epsilon={err.epsilon:.3g}")
        summary = pab_summary(strategies, game, models, market)
        for i in (1, 2):
            rows.append({"axis_value": axis_value, "mechanism": "pab",
                         "supplier": i, "price": summary.market_price,
                         "expected_price": summary.expected_prices[i - 1],
                         "profit": summary.expected_profits[i - 1],
                         "epsilon": summary.epsilon, "lost_load": None})
    else:
        raise ScenarioError(f"mechanism: unknown mechanism {mechanism!r}")
    return rows, warnings


def _sweep_point(args):
    sweep, index, mechanisms, base_seed = args
    value = sweep.values[index]
    spec = sweep.scenario_at(value)
    seed = int(np.random.SeedSequence((base_seed, index)).generate_state(1)[0])
    rows = []
    warnings = []
    for mech in mechanisms:
        r, w = _mechanism_rows(spec, mech, axis_value=float(value), seed=seed)
        rows.extend(r)
        warnings.extend(w)
    return rows, warnings


def _write_rows(rows, fmt, out_path):
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in COLUMNS])
        text = buffer.getvalue()
    else:
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_clear(args):
    spec = load_scenario(args.scenario)
    if args.print_config:
        sys.stdout.write(resolved_config_text(spec))
        return _EXIT_OK
    mechanisms = parse_mechanisms(args.mechanism)
    seed = args.seed if args.seed is not None else spec.options.seed
    rows = []
    for mech in mechanisms:
        r, warnings = _mechanism_rows(spec, mech, seed=seed)
        rows.extend(r)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
    _write_rows(rows, args.format, args.out)
    return _EXIT_OK


def _cmd_sweep(args):
    spec = load_scenario(args.scenario)
    if args.print_config:
        sys.stdout.write(resolved_config_text(spec))
        return _EXIT_OK
    mechanisms = parse_mechanisms(args.mechanism)
    try:
        values = tuple(float(v) for v in args.sweep_values.split(","))
    except ValueError as exc:
        raise ScenarioError(f"sweep.values: {exc}") from exc
    sweep = SweepSpec(base=spec, axis=args.sweep_axis, values=values,
                      mechanisms=mechanisms,
                      sweep_supplier=args.sweep_supplier)
    base_seed = args.seed if args.seed is not None else spec.options.seed
    tasks = [(sweep, i, mechanisms, base_seed) for i in range(len(values))]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = []
    for point_rows, warnings in results:
        rows.extend(point_rows)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
    _write_rows(rows, args.format, args.out)
    return _EXIT_OK


def _cmd_verify(args):
    spec = load_scenario(args.scenario)
    if args.print_config:
        sys.stdout.write(resolved_config_text(spec))
        return _EXIT_OK
    mechanisms = parse_mechanisms(args.mechanism)
    checks = list(mechanisms)
    if args.mechanism == "all":
        checks.append("chain")
    market = spec.market
    options = spec.options
    models = spec.build_models()
    failures = 0

    if "up" in checks:
        tol = (args.tolerance_eq if args.tolerance_eq is not None
               else options.resolve_eq_tolerance(market))
        split = options.resolve_up_split(len(models))
        profile = construct_up_equilibrium(models, market, split=split)
        cert = verify_quantity_equilibrium(profile, models, market,
                                           tolerance=tol)
        print(f"up quantity equilibrium: {cert.verdict.upper()} "
              f"epsilon={cert.epsilon:.3e} tolerance={cert.tolerance:.3e}")
        if not cert.passed:
            failures += 1
            supplier, dev, gain = cert.worst_deviation
            print(f"  worst deviation: supplier {supplier + 1} -> "
                  f"quantity {dev:.6g} MWh gains {gain:.6g} k$")

    if "pab" in checks:
        tol = (args.tolerance_pab if args.tolerance_pab is not None
               else options.resolve_pab_tolerance(market))
        grid = PriceGrid.uniform(market.price_cap, options.pab_grid_levels)
        game = build_bimatrix(models, market, grid=grid,
                              policy=options.tie_break_policy())
        try:
            strategies = solve_mixed_equilibrium(
                game, tol, max_iterations=options.pab_max_iterations)
            summary = pab_summary(strategies, game, models, market)
            print(f"pab mixed equilibrium: PASS epsilon={summary.epsilon:.3e} "
                  f"tolerance={tol:.3e} expected prices="
                  f"({summary.expected_prices[0]:.4g}, "
                  f"{summary.expected_prices[1]:.4g})")
        except EquilibriumNotFound as err:
            failures += 1
            print(f"pab mixed equilibrium: FAIL best epsilon="
                  f"{err.epsilon:.3e} tolerance={tol:.3e}")

    if "rup" in checks:
        tol_price = (args.tolerance_price if args.tolerance_price is not None
                     else options.resolve_price_tolerance(market))
        tol_qty = (args.tolerance_qty if args.tolerance_qty is not None
                   else options.quantity_tolerance)
        check = check_duality(models, market, tol_price=tol_price,
                              tol_qty=tol_qty)
        status = "PASS" if check.passed else "FAIL"
        print(f"rup least-cost duality: {status} "
              f"price={check.price_clearing:.6g} "
              f"benchmark={check.price_benchmark:.6g} "
              f"objective={check.objective_clearing:.6g} "
              f"benchmark={check.objective_benchmark:.6g}")
        if check.notes:
            print(f"  note: {check.notes}")
        if not check.passed:
            failures += 1

    if "chain" in checks:
        if len(models) != 2:
            print("price chain: SKIP (defined for duopolies)")
        else:
            report = compare_mechanism_prices(
                models, market,
                grid=PriceGrid.uniform(market.price_cap,
                                       options.pab_grid_levels),
                pab_tolerance=options.resolve_pab_tolerance(market),
                max_iterations=options.pab_max_iterations)
            status = "PASS" if report.holds else "FAIL"
            print(f"price chain: {status} cap={report.price_cap:.6g} >= "
                  f"pab={report.pab_price:.6g} >= rup={report.rup_price:.6g} "
                  f"> 0 (grid step {report.grid_step:.4g}, "
                  f"shortage={report.shortage})")
            if not report.holds:
                failures += 1

    return _EXIT_VERIFICATION if failures else _EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="vremarket",
        description="Two-settlement renewable electricity market simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True,
                       help="scenario INI file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--print-config", action="store_true",
                       help="print the resolved configuration and exit")

    clear_p = sub.add_parser("clear", help="clear one market")
    common(clear_p)
    clear_p.add_argument("--mechanism", default="all",
                         help="up, pab, rup, a comma list, or all")
    clear_p.add_argument("--out", default=None, help="output file path")
    clear_p.add_argument("--format", choices=("csv", "json"), default="csv")
    clear_p.set_defaults(func=_cmd_clear)

    sweep_p = sub.add_parser("sweep", help="sweep an experiment axis")
    common(sweep_p)
    sweep_p.add_argument("--mechanism", default="all")
    sweep_p.add_argument("--sweep-axis", required=True,
                         choices=("supplier-std", "penalty-price"))
    sweep_p.add_argument("--sweep-values", required=True,
                         help="comma-separated ascending axis values")
    sweep_p.add_argument("--sweep-supplier", type=int, default=2,
                         help="1-based supplier whose std is swept")
    sweep_p.add_argument("--workers", type=int, default=1,
                         help="parallel worker processes for sweep points")
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep_p.set_defaults(func=_cmd_sweep)

    verify_p = sub.add_parser("verify", help="run equilibrium verifiers")
    common(verify_p)
    verify_p.add_argument("--mechanism", default="all",
                          help="up, pab, rup, a comma list, or all "
                               "(all adds the price-chain check)")
    verify_p.add_argument("--tolerance-eq", type=float, default=None,
                          help="unilateral-gain tolerance for UP (k$)")
    verify_p.add_argument("--tolerance-pab", type=float, default=None,
                          help="pure-deviation tolerance for PAB (k$)")
    verify_p.add_argument("--tolerance-price", type=float, default=None,
                          help="price tolerance for the duality check")
    verify_p.add_argument("--tolerance-qty", type=float, default=None,
                          help="quantity tolerance for the duality check")
    verify_p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
