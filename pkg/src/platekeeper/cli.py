"""Administration commands: serve the API, seed stores, simulate load,
print reports, and dry-run policy configs against scenario files.

Exit codes: 0 ok, 2 corrupt journal, 3 policy config error, 4 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date
from pathlib import Path

from .domain import Money
from .jsonutil import dumps_canonical
from .persistence import (
    CorruptJournal,
    JOURNAL_FILENAME,
    MaintenanceMapper,
    PlateMapper,
    Store,
)
from .policy import (
    DEFAULT_POLICY_CONFIG,
    EvaluationContext,
    MalformedPolicy,
    PolicyNode,
    build_policy,
    evaluate,
)
from .rng import SplitMix64
from .seeding import NonEmptyStore, SeedSpec, seed_store, simulate_day
from .service import InvalidRange, MaintenanceService

EXIT_OK = 0
EXIT_CORRUPT_JOURNAL = 2
EXIT_POLICY_ERROR = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; 2 is reserved for corrupt
    # journals here, so route usage problems through UsageError instead.
    def error(self, message: str):
        raise UsageError(message)


def _store_dir(args: argparse.Namespace) -> Path:
    store = args.store or os.environ.get("PLATEKEEPER_STORE")
    if not store:
        raise UsageError("--store is required (or set PLATEKEEPER_STORE)")
    return Path(store)


def _open_existing_store(args: argparse.Namespace) -> Store:
    directory = _store_dir(args)
    if not (directory / JOURNAL_FILENAME).exists():
        raise UsageError(f"no store at {directory} (seed it first)")
    return Store.open(directory)


def _load_policy(policy_file: str | None) -> PolicyNode:
    if policy_file is None:
        return build_policy(DEFAULT_POLICY_CONFIG)
    try:
        with open(policy_file, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise MalformedPolicy(f"cannot read policy file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedPolicy(f"policy file is not valid JSON: {exc}") from exc
    return build_policy(config)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    policy = _load_policy(args.policy)
    store = Store.open(_store_dir(args))
    service = MaintenanceService(store, policy)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"--listen must be HOST:PORT, got {args.listen!r}")
    uvicorn.run(create_app(service), host=host, port=int(port), log_level="warning")
    store.close()
    return EXIT_OK


def cmd_seed(args: argparse.Namespace) -> int:
    spec = SeedSpec(
        plate_count=args.plates,
        companies=args.companies,
        rng_seed=args.rng_seed,
        registered_on=args.registered_on,
    )
    try:
        counts = seed_store(_store_dir(args), spec)
    except NonEmptyStore as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for key in ("plates", "companies", "tasks", "conditions"):
        print(f"{key}: {counts[key]}")
    return EXIT_OK


def cmd_simulate_day(args: argparse.Namespace) -> int:
    store = _open_existing_store(args)
    with store:
        service = MaintenanceService(store, _load_policy(args.policy))
        summary = simulate_day(
            service,
            sim_date=args.date,
            rng=SplitMix64(args.rng_seed),
            count=args.count,
            sample=args.sample,
        )
    for line in summary.lines():
        print(line)
    return EXIT_OK


def _print_or_json(args: argparse.Namespace, body, table_lines) -> None:
    if args.json:
        print(dumps_canonical(body))
    else:
        for line in table_lines:
            print(line)


def cmd_report(args: argparse.Namespace) -> int:
    # Deferred: pulls in fastapi, which plain reports don't need at parse time.
    from .api import period_comparison_body, replacement_body, top_cost_body

    with _open_existing_store(args) as store:
        service = MaintenanceService(store, build_policy(DEFAULT_POLICY_CONFIG))
        if args.report == "top-cost":
            rows = service.report_top_cost(args.limit)
            header = f"{'PLATE':<12} {'COST':>12} {'COUNT':>6}"
            lines = [header] + [
                f"{r.plate_id.value:<12} {r.cumulative_cost.amount:>12} {r.maintenance_count:>6}"
                for r in rows
            ]
            _print_or_json(args, top_cost_body(rows), lines)
        elif args.report == "period":
            comparison = service.report_period_comparison(
                args.a_start, args.a_end, args.b_start, args.b_end
            )
            if comparison.zero_baseline:
                pct_line = "reduction: undefined (zero baseline)"
            else:
                pct_line = f"reduction: {comparison.reduction_pct}%"
            lines = [
                f"period A total: {comparison.period_a_total.amount}",
                f"period B total: {comparison.period_b_total.amount}",
                pct_line,
            ]
            _print_or_json(args, period_comparison_body(comparison), lines)
        else:
            critical_point = Money(args.critical_point)
            plate_ids = service.recommend_replacement(critical_point)
            lines = [pid.value for pid in plate_ids]
            _print_or_json(args, replacement_body(critical_point, plate_ids), lines)
    return EXIT_OK


def cmd_policy_check(args: argparse.Namespace) -> int:
    policy = _load_policy(args.policy)
    try:
        with open(args.scenarios, encoding="utf-8") as fh:
            scenarios = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read scenarios file: {exc}") from exc
    if not isinstance(scenarios, list):
        raise UsageError("scenarios file must be a JSON array")

    plate_mapper = PlateMapper()
    maintenance_mapper = MaintenanceMapper()
    for i, scenario in enumerate(scenarios):
        try:
            name = scenario.get("name", f"scenario-{i}")
            ctx = EvaluationContext(
                plate=plate_mapper.materialize(scenario["plate"]),
                proposal=maintenance_mapper.materialize(scenario["proposal"]),
                history=tuple(
                    maintenance_mapper.materialize(r) for r in scenario.get("history", [])
                ),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise UsageError(f"scenario {i} is malformed: {exc}") from exc
        verdict = evaluate(policy, ctx)
        if verdict.allowed:
            print(f"{name:<32} ALLOW")
        else:
            print(f"{name:<32} DENY {verdict.deny_code}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="platekeeper", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p: argparse.ArgumentParser) -> None:
        p.add_argument("--store", help="store directory (or env PLATEKEEPER_STORE)")

    p = sub.add_parser("serve", help="run the HTTP API")
    add_store(p)
    p.add_argument("--listen", default="127.0.0.1:8080", help="HOST:PORT to bind")
    p.add_argument("--policy", help="policy config JSON file (default: shipped config)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("seed", help="populate a fresh store")
    add_store(p)
    p.add_argument("--plates", type=int, default=16_000)
    p.add_argument("--companies", type=int, default=3)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--registered-on", type=date.fromisoformat, default=date(2024, 1, 1))
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("simulate-day", help="push one day of captures through the API path")
    add_store(p)
    volume = p.add_mutually_exclusive_group(required=True)
    volume.add_argument("--count", type=int)
    volume.add_argument("--sample", action="store_true", help="draw volume from [200, 250]")
    p.add_argument("--date", type=date.fromisoformat, required=True)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--policy", help="policy config JSON file (default: shipped config)")
    p.set_defaults(func=cmd_simulate_day)

    p = sub.add_parser("report", help="print a report")
    report_sub = p.add_subparsers(dest="report", required=True)

    rp = report_sub.add_parser("top-cost")
    add_store(rp)
    rp.add_argument("--limit", type=int, default=20)
    rp.add_argument("--json", action="store_true", help="emit the API response body")
    rp.set_defaults(func=cmd_report)

    rp = report_sub.add_parser("period")
    add_store(rp)
    rp.add_argument("--a-start", type=date.fromisoformat, required=True)
    rp.add_argument("--a-end", type=date.fromisoformat, required=True)
    rp.add_argument("--b-start", type=date.fromisoformat, required=True)
    rp.add_argument("--b-end", type=date.fromisoformat, required=True)
    rp.add_argument("--json", action="store_true")
    rp.set_defaults(func=cmd_report)

    rp = report_sub.add_parser("replacement")
    add_store(rp)
    rp.add_argument("--critical-point", type=int, required=True)
    rp.add_argument("--json", action="store_true")
    rp.set_defaults(func=cmd_report)

    p = sub.add_parser("policy-check", help="evaluate a policy against scenario files")
    p.add_argument("--policy", required=True)
    p.add_argument("--scenarios", required=True)
    p.set_defaults(func=cmd_policy_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MalformedPolicy as exc:
        print(f"policy error: {exc}", file=sys.stderr)
        return EXIT_POLICY_ERROR
    except CorruptJournal as exc:
        print(f"corrupt journal: {exc}", file=sys.stderr)
        return EXIT_CORRUPT_JOURNAL


if __name__ == "__main__":
    sys.exit(main())
