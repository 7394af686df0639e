"""Pure domain types and value-level operations for cathode plate maintenance.

Everything here is immutable and side-effect free: plates, maintenance
records, task entries, catalogs, and the small set of operations that
produce new values from old ones. No I/O, no clocks, no storage.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from enum import Enum
from typing import Collection, Iterable


class DomainError(Exception):
    """Base for all domain rule violations. `code` is a stable machine tag."""

    code = "DOMAIN_ERROR"


class MalformedId(DomainError):
    code = "MALFORMED_ID"


class MoneyOverflow(DomainError):
    code = "MONEY_OVERFLOW"


class EmptyTaskList(DomainError):
    code = "EMPTY_TASKS"


class TransitionFromDecommissioned(DomainError):
    code = "PLATE_DECOMMISSIONED"


class PlateDecommissioned(DomainError):
    code = "PLATE_DECOMMISSIONED"


class UnknownConditionTag(DomainError):
    code = "UNKNOWN_CONDITION"


_PLATE_ID_RE = re.compile(r"^[A-Z0-9-]{1,32}$")

# Whole currency units (CLP). Sums beyond this raise rather than wrap.
MAX_MONEY_AMOUNT = 2**63 - 1


@dataclass(frozen=True, order=True)
class Money:
    """Non-negative whole CLP amount with overflow-checked arithmetic."""

    amount: int

    def __post_init__(self) -> None:
        if not isinstance(self.amount, int) or isinstance(self.amount, bool):
            raise ValueError("money amount must be an integer")
        if self.amount < 0:
            raise ValueError("money amount must be non-negative")
        if self.amount > MAX_MONEY_AMOUNT:
            raise MoneyOverflow(f"amount {self.amount} exceeds {MAX_MONEY_AMOUNT}")

    def __add__(self, other: Money) -> Money:
        total = self.amount + other.amount
        if total > MAX_MONEY_AMOUNT:
            raise MoneyOverflow(f"sum {total} exceeds {MAX_MONEY_AMOUNT}")
        return Money(total)

    def __sub__(self, other: Money) -> Money:
        if other.amount > self.amount:
            raise ValueError("money subtraction would go negative")
        return Money(self.amount - other.amount)


ZERO = Money(0)


@dataclass(frozen=True)
class PlateId:
    """Plate identity: 1-32 chars, uppercase letters, digits, and dash."""

    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.value, str) or not _PLATE_ID_RE.match(self.value):
            raise MalformedId(f"invalid plate id: {self.value!r}")


@dataclass(frozen=True)
class Position:
    """Physical location of a plate as a bank/cell/slot triple, all >= 1."""

    bank: int
    cell: int
    slot: int

    def __post_init__(self) -> None:
        for name in ("bank", "cell", "slot"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValueError(f"position {name} must be a positive integer")


class PlateStatus(Enum):
    IN_PRODUCTION = "in_production"
    IN_MAINTENANCE = "in_maintenance"
    IN_STOCK = "in_stock"
    DECOMMISSIONED = "decommissioned"


class MaintenanceKind(Enum):
    MAJOR = "major"
    MINOR = "minor"


@dataclass(frozen=True)
class ConditionTag:
    """Catalog entry for a plate condition, e.g. pandeada (bends easily)."""

    code: str
    label: str

    def __post_init__(self) -> None:
        if not self.code or self.code != self.code.lower():
            raise ValueError(f"condition code must be non-empty lowercase: {self.code!r}")


@dataclass(frozen=True)
class Task:
    """Catalog entry for a maintenance task with its default cost."""

    code: str
    label: str
    default_cost: Money

    def __post_init__(self) -> None:
        if not self.code:
            raise ValueError("task code must be non-empty")


@dataclass(frozen=True)
class Company:
    id: str
    name: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("company id must be non-empty")


@dataclass(frozen=True)
class OperatorId:
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("operator id must be non-empty")


@dataclass(frozen=True)
class Plate:
    id: PlateId
    position: Position
    status: PlateStatus
    conditions: frozenset[str]
    cumulative_cost: Money
    registered_on: date


@dataclass(frozen=True)
class TaskEntry:
    """One task performed during a maintenance, with the cost charged."""

    task_code: str
    cost: Money

    def __post_init__(self) -> None:
        if not self.task_code:
            raise ValueError("task_code must be non-empty")


@dataclass(frozen=True)
class MaintenanceRecord:
    id: str
    plate_id: PlateId
    date: date
    timestamp: datetime
    company_id: str
    arrival_conditions: frozenset[str]
    tasks: tuple[TaskEntry, ...]
    kind: MaintenanceKind
    total_cost: Money

    def __post_init__(self) -> None:
        if not self.tasks:
            raise EmptyTaskList("maintenance record needs at least one task")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        if self.timestamp.astimezone(timezone.utc).date() != self.date:
            raise ValueError("date must equal the UTC calendar date of timestamp")
        if sum_task_costs(list(self.tasks)) != self.total_cost:
            raise ValueError("total_cost must equal the sum of task costs")


def new_plate(id: PlateId | str, position: Position, registered_on: date) -> Plate:
    """Register a plate: starts in stock, no conditions, zero cumulative cost."""
    plate_id = id if isinstance(id, PlateId) else PlateId(id)
    return Plate(
        id=plate_id,
        position=position,
        status=PlateStatus.IN_STOCK,
        conditions=frozenset(),
        cumulative_cost=ZERO,
        registered_on=registered_on,
    )


def sum_task_costs(tasks: list[TaskEntry]) -> Money:
    """Exact integer sum of task costs; the list must be non-empty."""
    if not tasks:
        raise EmptyTaskList("cannot sum an empty task list")
    total = ZERO
    for entry in tasks:
        total = total + entry.cost
    return total


def transition_status(plate: Plate, next: PlateStatus) -> Plate:
    """Move a plate through its lifecycle. Decommissioned is terminal."""
    if plate.status is PlateStatus.DECOMMISSIONED:
        raise TransitionFromDecommissioned(
            f"plate {plate.id.value} is decommissioned and cannot transition"
        )
    return replace(plate, status=next)


def set_conditions(plate: Plate, tags: Iterable[str], catalog: Collection[str]) -> Plate:
    """Replace a plate's condition set; every tag must exist in the catalog."""
    if plate.status is PlateStatus.DECOMMISSIONED:
        raise PlateDecommissioned(
            f"plate {plate.id.value} is decommissioned and cannot change conditions"
        )
    tag_set = frozenset(tags)
    unknown = tag_set - frozenset(catalog)
    if unknown:
        raise UnknownConditionTag(f"unknown condition tag(s): {sorted(unknown)}")
    return replace(plate, conditions=tag_set)
