"""Deterministic store seeding and the day-load simulator.

Seeding populates the catalogs and the plate pool (16,000 plates by
default, the scale of the real plant's pool); the simulator then pushes a
day's worth of capture submissions (200-250 in production) through the
exact same validation and command path the HTTP API uses. Both are pure
functions of their SeedSpec / flags plus the RNG seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, time, timezone
from pathlib import Path

from .domain import Company, ConditionTag, Money, OperatorId, Position, Task
from .persistence import Store
from .policy import build_policy
from .rng import SplitMix64
from .service import MaintenanceService, parse_capture_submission

SEED_TASKS = (
    Task("pulido", "Pulido", Money(1200)),
    Task("limpieza", "Limpieza", Money(800)),
    Task("enderezado", "Enderezado", Money(2500)),
    Task("soldadura", "Soldadura de marco", Money(4000)),
)

SEED_CONDITIONS = (
    ConditionTag("pandeada", "Pandeada"),
    ConditionTag("corrosion", "Corrosión"),
    ConditionTag("desgaste", "Desgaste de borde"),
)

SEED_OPERATOR = OperatorId("OP-SEED")
SIM_OPERATOR = "OP-SIM"


@dataclass(frozen=True)
class SeedSpec:
    plate_count: int = 16_000
    companies: int = 3
    rng_seed: int = 0
    registered_on: date = date(2024, 1, 1)

    def __post_init__(self) -> None:
        if self.plate_count < 1:
            raise ValueError("plate_count must be positive")
        if self.companies < 1:
            raise ValueError("companies must be positive")


def seed_clock(spec: SeedSpec):
    """Fixed-instant clock so identical specs produce identical journals."""
    instant = datetime.combine(spec.registered_on, time(0, 0), tzinfo=timezone.utc)
    return lambda: instant


class NonEmptyStore(Exception):
    pass


def seed_store(directory: Path, spec: SeedSpec) -> dict[str, int]:
    """Populate a fresh store; refuses a directory that already has data."""
    journal = Path(directory) / "journal.jsonl"
    if journal.exists() and journal.stat().st_size > 0:
        raise NonEmptyStore(f"store at {directory} is not empty")

    rng = SplitMix64(spec.rng_seed)
    with Store.open(directory, clock=seed_clock(spec)) as store:
        for task in SEED_TASKS:
            store.put("task", task)
        for condition in SEED_CONDITIONS:
            store.put("condition", condition)
        for i in range(1, spec.companies + 1):
            store.put("company", Company(f"EMP-{i:02d}", f"Empresa Contratista {i}"))

        # Policy is irrelevant while registering plates; pass a trivial one.
        service = MaintenanceService(store, build_policy({"type": "same_date"}))
        width = max(5, len(str(spec.plate_count)))
        for n in range(1, spec.plate_count + 1):
            position = Position(
                bank=rng.randint(1, 10), cell=rng.randint(1, 40), slot=rng.randint(1, 40)
            )
            outcome = service.register_new_plate(
                f"P-{n:0{width}d}", position, spec.registered_on, SEED_OPERATOR
            )
            assert outcome.accepted

    return {
        "plates": spec.plate_count,
        "companies": spec.companies,
        "tasks": len(SEED_TASKS),
        "conditions": len(SEED_CONDITIONS),
    }


@dataclass
class SimulationSummary:
    submitted: int = 0
    accepted: int = 0
    rejected_by_code: dict[str, int] = field(default_factory=dict)

    @property
    def rejected(self) -> int:
        return sum(self.rejected_by_code.values())

    def lines(self) -> list[str]:
        out = [
            f"submitted: {self.submitted}",
            f"accepted:  {self.accepted}",
            f"rejected:  {self.rejected}",
        ]
        for code in sorted(self.rejected_by_code):
            out.append(f"  {code}: {self.rejected_by_code[code]}")
        return out


def simulate_day(
    service: MaintenanceService,
    sim_date: date,
    rng: SplitMix64,
    count: int | None = None,
    sample: bool = False,
) -> SimulationSummary:
    """Submit a day's worth of captures through the API's own code path.

    `count` fixes the volume; `sample=True` draws it uniformly from the
    production range [200, 250]. Plates are drawn uniformly, tasks as 1-3
    distinct catalog picks, arrival conditions as 0-2 picks.
    """
    if sample:
        count = rng.randint(200, 250)
    if count is None:
        raise ValueError("either count or sample is required")

    plate_ids = service.store.ids("plate")
    task_codes = sorted(service.task_catalog())
    condition_codes = sorted(service.condition_catalog())
    company_ids = sorted(service.company_catalog())
    if not plate_ids:
        raise ValueError("store has no plates; seed it first")

    summary = SimulationSummary()
    for _ in range(count):
        payload = {
            "plate_id": rng.choice(plate_ids),
            "company_id": rng.choice(company_ids),
            "arrival_conditions": rng.distinct_choices(condition_codes, rng.below(3)),
            "tasks": [
                {"task_code": code}
                for code in rng.distinct_choices(task_codes, rng.randint(1, 3))
            ],
            "kind": rng.choice(["major", "minor"]),
            "date": sim_date.isoformat(),
            "operator_id": SIM_OPERATOR,
        }
        submission = parse_capture_submission(payload)
        outcome = service.create_maintenance(submission)
        summary.submitted += 1
        if outcome.accepted:
            summary.accepted += 1
        else:
            assert outcome.deny_code is not None
            summary.rejected_by_code[outcome.deny_code] = (
                summary.rejected_by_code.get(outcome.deny_code, 0) + 1
            )
    return summary
