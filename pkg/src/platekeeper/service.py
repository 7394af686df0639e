"""Facade controller for the system operations, plus the analytics reports.

One class receives every state-changing command (register plate, change
position, decommission, create/delete maintenance) and serializes them, so
no command ever observes another's half-applied effects. Maintenance
assembly, including building task entries and condition associations from
the catalogs, lives in its own step; the controller only orchestrates.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from datetime import date, datetime, time, timezone
from enum import Enum
from typing import Any, Mapping

from .domain import (
    Company,
    ConditionTag,
    MaintenanceKind,
    MaintenanceRecord,
    MalformedId,
    Money,
    OperatorId,
    Plate,
    PlateId,
    PlateStatus,
    Position,
    Task,
    TaskEntry,
    new_plate,
    set_conditions,
    sum_task_costs,
    transition_status,
)
from .jsonutil import parse_iso_date
from .persistence import NotFound, Store
from .policy import EvaluationContext, PolicyNode, evaluate

# Rejection codes produced by the controller itself (policy deny codes pass
# through verbatim on top of these).
DUPLICATE_PLATE = "DUPLICATE_PLATE"
MALFORMED_ID = "MALFORMED_ID"
NOT_FOUND = "NOT_FOUND"
PLATE_DECOMMISSIONED = "PLATE_DECOMMISSIONED"
ALREADY_DECOMMISSIONED = "ALREADY_DECOMMISSIONED"
UNKNOWN_COMPANY = "UNKNOWN_COMPANY"
UNKNOWN_TASK = "UNKNOWN_TASK"
UNKNOWN_CONDITION = "UNKNOWN_CONDITION"
EMPTY_TASKS = "EMPTY_TASKS"
SCHEMA_VIOLATION = "SCHEMA_VIOLATION"

# Capture submissions carry only a calendar date; the stored instant is
# pinned to midday UTC of that date so date and timestamp always agree.
_CAPTURE_TIME_OF_DAY = time(12, 0, 0)


class CommandResult(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class CommandOutcome:
    result: CommandResult
    deny_code: str | None = None
    entity_id: str | None = None
    new_version: int | None = None
    message: str | None = None

    def __post_init__(self) -> None:
        if (self.result is CommandResult.REJECTED) != (self.deny_code is not None):
            raise ValueError("deny_code must be present iff the command was rejected")

    @property
    def accepted(self) -> bool:
        return self.result is CommandResult.ACCEPTED


def _accepted(entity_id: str, version: int) -> CommandOutcome:
    return CommandOutcome(CommandResult.ACCEPTED, entity_id=entity_id, new_version=version)


def _rejected(code: str, message: str | None = None) -> CommandOutcome:
    return CommandOutcome(CommandResult.REJECTED, deny_code=code, message=message)


class SubmissionError(Exception):
    """A capture payload that fails schema validation. `code` is stable."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class CaptureSubmission:
    """Wire-level maintenance capture: what a terminal sends to the server."""

    plate_id: str
    company_id: str
    arrival_conditions: tuple[str, ...]
    tasks: tuple[tuple[str, int | None], ...]  # (task_code, cost or None for catalog default)
    kind: MaintenanceKind
    date: date
    operator_id: str


_SUBMISSION_KEYS = {
    "plate_id",
    "company_id",
    "arrival_conditions",
    "tasks",
    "kind",
    "date",
    "operator_id",
}


def _require_str(payload: Mapping[str, Any], key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str) or not value:
        raise SubmissionError(SCHEMA_VIOLATION, f"{key} must be a non-empty string")
    return value


def parse_capture_submission(payload: Any) -> CaptureSubmission:
    """Validate a raw JSON body into a CaptureSubmission.

    Both the HTTP handler and the day simulator go through here, so a
    submission that parses is schema-valid no matter where it came from.
    """
    if not isinstance(payload, Mapping):
        raise SubmissionError(SCHEMA_VIOLATION, "submission must be a JSON object")
    extra = set(payload) - _SUBMISSION_KEYS
    if extra:
        raise SubmissionError(SCHEMA_VIOLATION, f"unexpected field(s): {sorted(extra)}")

    plate_id = _require_str(payload, "plate_id")
    company_id = _require_str(payload, "company_id")
    operator_id = _require_str(payload, "operator_id")

    raw_conditions = payload.get("arrival_conditions", [])
    if not isinstance(raw_conditions, list) or any(
        not isinstance(c, str) or not c for c in raw_conditions
    ):
        raise SubmissionError(SCHEMA_VIOLATION, "arrival_conditions must be a list of strings")

    raw_tasks = payload.get("tasks")
    if not isinstance(raw_tasks, list):
        raise SubmissionError(SCHEMA_VIOLATION, "tasks must be a list")
    if not raw_tasks:
        raise SubmissionError(EMPTY_TASKS, "tasks must be non-empty")
    tasks: list[tuple[str, int | None]] = []
    for i, raw in enumerate(raw_tasks):
        if not isinstance(raw, Mapping) or set(raw) - {"task_code", "cost"}:
            raise SubmissionError(SCHEMA_VIOLATION, f"tasks[{i}] must be {{task_code, cost?}}")
        code = raw.get("task_code")
        if not isinstance(code, str) or not code:
            raise SubmissionError(SCHEMA_VIOLATION, f"tasks[{i}].task_code must be a non-empty string")
        cost = raw.get("cost")
        if cost is not None and (not isinstance(cost, int) or isinstance(cost, bool) or cost < 0):
            raise SubmissionError(SCHEMA_VIOLATION, f"tasks[{i}].cost must be a non-negative integer")
        tasks.append((code, cost))

    raw_kind = _require_str(payload, "kind")
    try:
        kind = MaintenanceKind(raw_kind)
    except ValueError:
        raise SubmissionError(SCHEMA_VIOLATION, "kind must be 'major' or 'minor'") from None

    raw_date = _require_str(payload, "date")
    try:
        capture_date = parse_iso_date(raw_date)
    except ValueError:
        raise SubmissionError(SCHEMA_VIOLATION, f"date must be an ISO date, got {raw_date!r}") from None

    return CaptureSubmission(
        plate_id=plate_id,
        company_id=company_id,
        arrival_conditions=tuple(raw_conditions),
        tasks=tuple(tasks),
        kind=kind,
        date=capture_date,
        operator_id=operator_id,
    )


def assemble_maintenance(
    record_id: str,
    submission: CaptureSubmission,
    task_catalog: Mapping[str, Task],
) -> MaintenanceRecord:
    """Build the full maintenance record from a submission and the catalogs.

    Owns the construction of task entries (defaulting costs from the
    catalog) and the condition associations; callers only hand in resolved
    inputs.
    """
    entries = tuple(
        TaskEntry(task_code=code, cost=Money(cost) if cost is not None else task_catalog[code].default_cost)
        for code, cost in submission.tasks
    )
    timestamp = datetime.combine(submission.date, _CAPTURE_TIME_OF_DAY, tzinfo=timezone.utc)
    return MaintenanceRecord(
        id=record_id,
        plate_id=PlateId(submission.plate_id),
        date=submission.date,
        timestamp=timestamp,
        company_id=submission.company_id,
        arrival_conditions=frozenset(submission.arrival_conditions),
        tasks=entries,
        kind=submission.kind,
        total_cost=sum_task_costs(list(entries)),
    )


@dataclass(frozen=True)
class TopCostRow:
    plate_id: PlateId
    cumulative_cost: Money
    maintenance_count: int


@dataclass(frozen=True)
class PeriodComparison:
    period_a_total: Money
    period_b_total: Money
    reduction_pct: float | None  # None iff period A totalled zero

    @property
    def zero_baseline(self) -> bool:
        return self.reduction_pct is None and self.period_a_total.amount == 0


class InvalidRange(Exception):
    pass


class MaintenanceService:
    """The one controller: all five system operations plus the reports."""

    def __init__(self, store: Store, policy: PolicyNode):
        self.store = store
        self.policy = policy
        self._command_lock = threading.RLock()
        self._maintenance_counter = self._derive_maintenance_counter()

    def _derive_maintenance_counter(self) -> int:
        highest = 0
        for record_id in self.store.known_ids("maintenance"):
            if record_id.startswith("M-") and record_id[2:].isdigit():
                highest = max(highest, int(record_id[2:]))
        return highest

    def _next_maintenance_id(self) -> str:
        return f"M-{self._maintenance_counter + 1:08d}"

    # --- catalogs ---

    def task_catalog(self) -> dict[str, Task]:
        return {task.code: task for task in self.store.scan("task")}

    def condition_catalog(self) -> dict[str, ConditionTag]:
        return {tag.code: tag for tag in self.store.scan("condition")}

    def company_catalog(self) -> dict[str, Company]:
        return {c.id: c for c in self.store.scan("company")}

    # --- queries ---

    def get_plate(self, plate_id: str) -> Plate:
        return self.store.get("plate", plate_id)

    def plate_history(self, plate_id: PlateId) -> list[MaintenanceRecord]:
        """Live maintenance records for one plate, timestamp ascending."""
        records = [r for r in self.store.scan("maintenance") if r.plate_id == plate_id]
        records.sort(key=lambda r: (r.timestamp, r.id))
        return records

    def recent_maintenances(self, plate_id: PlateId, limit: int = 10) -> list[MaintenanceRecord]:
        history = self.plate_history(plate_id)
        return list(reversed(history[-limit:])) if limit > 0 else []

    # --- commands ---

    def register_new_plate(
        self, id: str, position: Position, registered_on: date, operator: OperatorId
    ) -> CommandOutcome:
        with self._command_lock:
            try:
                plate = new_plate(id, position, registered_on)
            except MalformedId as exc:
                return _rejected(MALFORMED_ID, str(exc))
            if self.store.exists("plate", plate.id.value):
                return _rejected(DUPLICATE_PLATE, f"plate {plate.id.value} already registered")
            version = self.store.put("plate", plate)
            return _accepted(plate.id.value, version)

    def change_plate_position(self, id: str, new_position: Position) -> CommandOutcome:
        with self._command_lock:
            try:
                plate = self.store.get("plate", id)
            except NotFound:
                return _rejected(NOT_FOUND, f"plate {id} not found")
            if plate.status is PlateStatus.DECOMMISSIONED:
                return _rejected(PLATE_DECOMMISSIONED, f"plate {id} is decommissioned")
            version = self.store.put("plate", replace(plate, position=new_position))
            return _accepted(id, version)

    def decommission_plate(self, id: str) -> CommandOutcome:
        with self._command_lock:
            try:
                plate = self.store.get("plate", id)
            except NotFound:
                return _rejected(NOT_FOUND, f"plate {id} not found")
            if plate.status is PlateStatus.DECOMMISSIONED:
                return _rejected(ALREADY_DECOMMISSIONED, f"plate {id} is already decommissioned")
            version = self.store.put("plate", transition_status(plate, PlateStatus.DECOMMISSIONED))
            return _accepted(id, version)

    def create_maintenance(self, submission: CaptureSubmission) -> CommandOutcome:
        """Resolve, assemble, evaluate policy, then persist record and plate.

        A rejection of any sort writes nothing: the journal stays
        byte-identical to its pre-call state.
        """
        with self._command_lock:
            try:
                plate = self.store.get("plate", submission.plate_id)
            except NotFound:
                return _rejected(NOT_FOUND, f"plate {submission.plate_id} not found")
            if plate.status is PlateStatus.DECOMMISSIONED:
                return _rejected(
                    PLATE_DECOMMISSIONED, f"plate {submission.plate_id} is decommissioned"
                )

            companies = self.company_catalog()
            if submission.company_id not in companies:
                return _rejected(UNKNOWN_COMPANY, f"unknown company {submission.company_id!r}")
            if not submission.tasks:
                return _rejected(EMPTY_TASKS, "tasks must be non-empty")
            tasks = self.task_catalog()
            for code, _ in submission.tasks:
                if code not in tasks:
                    return _rejected(UNKNOWN_TASK, f"unknown task {code!r}")
            conditions = self.condition_catalog()
            for tag in submission.arrival_conditions:
                if tag not in conditions:
                    return _rejected(UNKNOWN_CONDITION, f"unknown condition {tag!r}")

            proposal = assemble_maintenance(self._next_maintenance_id(), submission, tasks)
            history = tuple(self.plate_history(plate.id))
            verdict = evaluate(self.policy, EvaluationContext(plate, proposal, history))
            if not verdict.allowed:
                assert verdict.deny_code is not None
                return _rejected(verdict.deny_code, verdict.message)

            version = self.store.put("maintenance", proposal)
            self._maintenance_counter += 1
            updated = set_conditions(plate, proposal.arrival_conditions, conditions)
            updated = transition_status(updated, PlateStatus.IN_STOCK)
            updated = replace(
                updated, cumulative_cost=updated.cumulative_cost + proposal.total_cost
            )
            self.store.put("plate", updated)
            return _accepted(proposal.id, version)

    def delete_maintenance(self, maintenance_id: str) -> CommandOutcome:
        with self._command_lock:
            try:
                record = self.store.get("maintenance", maintenance_id)
            except NotFound:
                return _rejected(NOT_FOUND, f"maintenance {maintenance_id} not found")
            self.store.delete("maintenance", maintenance_id)
            # Bookkeeping reversal applies even to decommissioned plates;
            # it is not a lifecycle transition.
            plate = self.store.get("plate", record.plate_id.value)
            self.store.put(
                "plate", replace(plate, cumulative_cost=plate.cumulative_cost - record.total_cost)
            )
            return _accepted(maintenance_id, self.store.version_of("maintenance", maintenance_id))

    # --- reports (read-only; never write to the journal) ---

    def report_top_cost(self, limit: int) -> list[TopCostRow]:
        """Plates ranked by live maintenance spend, costliest first."""
        if limit < 0:
            raise ValueError("limit must be non-negative")
        totals: dict[PlateId, Money] = {}
        counts: dict[PlateId, int] = {}
        for record in self.store.scan("maintenance"):
            totals[record.plate_id] = totals.get(record.plate_id, Money(0)) + record.total_cost
            counts[record.plate_id] = counts.get(record.plate_id, 0) + 1
        rows = [
            TopCostRow(plate_id=pid, cumulative_cost=totals[pid], maintenance_count=counts[pid])
            for pid in totals
        ]
        rows.sort(key=lambda r: (-r.cumulative_cost.amount, r.plate_id.value))
        return rows[:limit]

    def report_period_comparison(
        self, a_start: date, a_end: date, b_start: date, b_end: date
    ) -> PeriodComparison:
        if a_start > a_end or b_start > b_end:
            raise InvalidRange("period start must not be after its end")
        a_total = Money(0)
        b_total = Money(0)
        for record in self.store.scan("maintenance"):
            if a_start <= record.date <= a_end:
                a_total = a_total + record.total_cost
            if b_start <= record.date <= b_end:
                b_total = b_total + record.total_cost
        if a_total.amount == 0:
            return PeriodComparison(a_total, b_total, reduction_pct=None)
        pct = round(100.0 * (a_total.amount - b_total.amount) / a_total.amount, 1)
        return PeriodComparison(a_total, b_total, reduction_pct=pct)

    def recommend_replacement(self, critical_point: Money) -> list[PlateId]:
        """Plates whose cumulative cost has reached the critical point."""
        candidates = [
            plate
            for plate in self.store.scan("plate")
            if plate.status is not PlateStatus.DECOMMISSIONED
            and plate.cumulative_cost >= critical_point
        ]
        candidates.sort(key=lambda p: (-p.cumulative_cost.amount, p.id.value))
        return [plate.id for plate in candidates]
