"""Durable storage: an append-only JSON-lines journal with a data-mapper layer.

The store's `get` is a fixed template: identity-cache lookup, then the
journal-derived index, then the kind's materialize hook, then cache insert.
The per-kind hook is the only step that varies; everything else is shared.
Writes append one event per mutation and flush before acknowledging, so a
journal truncated at any line boundary replays cleanly.
"""

from __future__ import annotations

import json
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

from .domain import (
    Company,
    ConditionTag,
    MaintenanceKind,
    MaintenanceRecord,
    Money,
    Plate,
    PlateId,
    PlateStatus,
    Position,
    Task,
    TaskEntry,
)
from .jsonutil import dumps_canonical, format_instant, parse_instant, parse_iso_date

JOURNAL_FILENAME = "journal.jsonl"

_EVENT_KEYS_PUT = {"seq", "ts", "op", "kind", "id", "version", "payload"}
_EVENT_KEYS_DELETE = {"seq", "ts", "op", "kind", "id", "version"}


class PersistenceError(Exception):
    pass


class NotFound(PersistenceError):
    pass


class UnknownKind(PersistenceError):
    pass


class StorageFailure(PersistenceError):
    pass


class CorruptJournal(PersistenceError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"journal line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class RecordEnvelope:
    kind: str
    id: str
    version: int
    payload: dict[str, Any] | None  # None only inside delete events


@dataclass(frozen=True)
class JournalEvent:
    seq: int
    ts: datetime
    op: str  # "put" | "delete"
    envelope: RecordEnvelope


class Mapper(ABC):
    """Per-kind conversion hooks plugged into the store's template methods."""

    kind: str

    @abstractmethod
    def materialize(self, payload: dict[str, Any]) -> Any:
        """Rebuild the entity from its journaled payload."""

    @abstractmethod
    def serialize(self, entity: Any) -> dict[str, Any]:
        """Flatten the entity to its canonical JSON payload."""

    @abstractmethod
    def entity_id(self, entity: Any) -> str:
        """The journal id under which this entity is stored."""


class PlateMapper(Mapper):
    kind = "plate"

    def materialize(self, payload: dict[str, Any]) -> Plate:
        pos = payload["position"]
        return Plate(
            id=PlateId(payload["id"]),
            position=Position(bank=pos["bank"], cell=pos["cell"], slot=pos["slot"]),
            status=PlateStatus(payload["status"]),
            conditions=frozenset(payload["conditions"]),
            cumulative_cost=Money(payload["cumulative_cost"]),
            registered_on=parse_iso_date(payload["registered_on"]),
        )

    def serialize(self, entity: Plate) -> dict[str, Any]:
        return {
            "id": entity.id.value,
            "position": {
                "bank": entity.position.bank,
                "cell": entity.position.cell,
                "slot": entity.position.slot,
            },
            "status": entity.status.value,
            "conditions": sorted(entity.conditions),
            "cumulative_cost": entity.cumulative_cost.amount,
            "registered_on": entity.registered_on.isoformat(),
        }

    def entity_id(self, entity: Plate) -> str:
        return entity.id.value


class MaintenanceMapper(Mapper):
    kind = "maintenance"

    def materialize(self, payload: dict[str, Any]) -> MaintenanceRecord:
        return MaintenanceRecord(
            id=payload["id"],
            plate_id=PlateId(payload["plate_id"]),
            date=parse_iso_date(payload["date"]),
            timestamp=parse_instant(payload["timestamp"]),
            company_id=payload["company_id"],
            arrival_conditions=frozenset(payload["arrival_conditions"]),
            tasks=tuple(
                TaskEntry(task_code=t["task_code"], cost=Money(t["cost"]))
                for t in payload["tasks"]
            ),
            kind=MaintenanceKind(payload["kind"]),
            total_cost=Money(payload["total_cost"]),
        )

    def serialize(self, entity: MaintenanceRecord) -> dict[str, Any]:
        return {
            "id": entity.id,
            "plate_id": entity.plate_id.value,
            "date": entity.date.isoformat(),
            "timestamp": format_instant(entity.timestamp),
            "company_id": entity.company_id,
            "arrival_conditions": sorted(entity.arrival_conditions),
            "tasks": [{"task_code": t.task_code, "cost": t.cost.amount} for t in entity.tasks],
            "kind": entity.kind.value,
            "total_cost": entity.total_cost.amount,
        }

    def entity_id(self, entity: MaintenanceRecord) -> str:
        return entity.id


class CompanyMapper(Mapper):
    kind = "company"

    def materialize(self, payload: dict[str, Any]) -> Company:
        return Company(id=payload["id"], name=payload["name"])

    def serialize(self, entity: Company) -> dict[str, Any]:
        return {"id": entity.id, "name": entity.name}

    def entity_id(self, entity: Company) -> str:
        return entity.id


class TaskMapper(Mapper):
    kind = "task"

    def materialize(self, payload: dict[str, Any]) -> Task:
        return Task(
            code=payload["code"],
            label=payload["label"],
            default_cost=Money(payload["default_cost"]),
        )

    def serialize(self, entity: Task) -> dict[str, Any]:
        return {
            "code": entity.code,
            "label": entity.label,
            "default_cost": entity.default_cost.amount,
        }

    def entity_id(self, entity: Task) -> str:
        return entity.code


class ConditionMapper(Mapper):
    kind = "condition"

    def materialize(self, payload: dict[str, Any]) -> ConditionTag:
        return ConditionTag(code=payload["code"], label=payload["label"])

    def serialize(self, entity: ConditionTag) -> dict[str, Any]:
        return {"code": entity.code, "label": entity.label}

    def entity_id(self, entity: ConditionTag) -> str:
        return entity.code


def default_mappers() -> dict[str, Mapper]:
    mappers = [PlateMapper(), MaintenanceMapper(), CompanyMapper(), TaskMapper(), ConditionMapper()]
    return {m.kind: m for m in mappers}


# --- journal replay ---------------------------------------------------------


@dataclass
class _LiveRecord:
    payload: dict[str, Any]
    version: int
    ts: datetime


@dataclass
class ReplayState:
    """Pure function of the journal bytes: the live index plus bookkeeping."""

    live: dict[tuple[str, str], _LiveRecord]
    versions: dict[tuple[str, str], int]  # latest version ever, tombstones included
    last_seq: int


def _parse_event_line(line: str, line_no: int) -> JournalEvent:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptJournal(line_no, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise CorruptJournal(line_no, "event must be a JSON object")

    op = raw.get("op")
    if op not in ("put", "delete"):
        raise CorruptJournal(line_no, f"invalid op {op!r}")
    expected = _EVENT_KEYS_PUT if op == "put" else _EVENT_KEYS_DELETE
    if set(raw) != expected:
        raise CorruptJournal(line_no, f"expected keys {sorted(expected)}, got {sorted(raw)}")

    seq = raw["seq"]
    version = raw["version"]
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
        raise CorruptJournal(line_no, f"seq must be a positive integer, got {seq!r}")
    if not isinstance(version, int) or isinstance(version, bool) or version < 1:
        raise CorruptJournal(line_no, f"version must be a positive integer, got {version!r}")
    if not isinstance(raw["kind"], str) or not isinstance(raw["id"], str):
        raise CorruptJournal(line_no, "kind and id must be strings")
    if op == "put" and not isinstance(raw["payload"], dict):
        raise CorruptJournal(line_no, "put event payload must be a JSON object")
    try:
        ts = parse_instant(raw["ts"])
    except (ValueError, TypeError) as exc:
        raise CorruptJournal(line_no, f"invalid ts {raw.get('ts')!r}") from exc

    envelope = RecordEnvelope(
        kind=raw["kind"], id=raw["id"], version=version, payload=raw.get("payload")
    )
    return JournalEvent(seq=seq, ts=ts, op=op, envelope=envelope)


def replay(lines: Iterable[str]) -> ReplayState:
    """Fold journal lines into the latest-live index, last-write-wins by seq.

    Raises CorruptJournal naming the first bad line; a valid prefix of a
    valid journal always replays.
    """
    state = ReplayState(live={}, versions={}, last_seq=0)
    for line_no, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if stripped == "":
            raise CorruptJournal(line_no, "blank line")
        event = _parse_event_line(stripped, line_no)
        if event.seq <= state.last_seq:
            raise CorruptJournal(
                line_no, f"non-monotonic seq {event.seq} after {state.last_seq}"
            )
        state.last_seq = event.seq
        key = (event.envelope.kind, event.envelope.id)
        state.versions[key] = event.envelope.version
        if event.op == "put":
            assert event.envelope.payload is not None
            state.live[key] = _LiveRecord(
                payload=event.envelope.payload, version=event.envelope.version, ts=event.ts
            )
        else:
            state.live.pop(key, None)
    return state


def replay_file(path: Path) -> ReplayState:
    with open(path, encoding="utf-8") as fh:
        return replay(fh)


def compact_journal(journal_path: Path, output_path: Path | None = None) -> Path:
    """Rewrite a journal to one put per live record, seq renumbered from 1.

    Replaying the compacted journal yields the same live index as the
    original. Records are emitted sorted by (kind, id) with their latest
    payload, version, and put timestamp preserved.
    """
    state = replay_file(journal_path)
    target = output_path or journal_path
    tmp = target.with_suffix(".compact.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for seq, (key, record) in enumerate(sorted(state.live.items()), start=1):
            kind, entity_id = key
            event = {
                "seq": seq,
                "ts": format_instant(record.ts),
                "op": "put",
                "kind": kind,
                "id": entity_id,
                "version": record.version,
                "payload": record.payload,
            }
            fh.write(dumps_canonical(event) + "\n")
        fh.flush()
    tmp.replace(target)
    return target


# --- store -------------------------------------------------------------------


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Store:
    """Journal-backed entity store with an identity cache.

    Mutations are serialized under a lock (single writer); reads hit the
    cache first and only fall back to the replayed index on a miss. After
    a failed append the store turns read-only to avoid diverging from disk.
    """

    def __init__(
        self,
        directory: Path,
        *,
        mappers: dict[str, Mapper] | None = None,
        clock: Callable[[], datetime] | None = None,
    ):
        self.directory = Path(directory)
        self.journal_path = self.directory / JOURNAL_FILENAME
        self._mappers = mappers if mappers is not None else default_mappers()
        self._clock = clock or _utc_now
        self._write_lock = threading.Lock()
        self._read_only = False
        self.index_reads = 0

        self.directory.mkdir(parents=True, exist_ok=True)
        if self.journal_path.exists():
            state = replay_file(self.journal_path)
        else:
            state = ReplayState(live={}, versions={}, last_seq=0)
        self._live = state.live
        self._versions = state.versions
        self._last_seq = state.last_seq
        self._cache: dict[tuple[str, str], Any] = {}
        self._fh = open(self.journal_path, "a", encoding="utf-8", newline="\n")

    @classmethod
    def open(
        cls,
        directory: Path | str,
        *,
        mappers: dict[str, Mapper] | None = None,
        clock: Callable[[], datetime] | None = None,
    ) -> "Store":
        return cls(Path(directory), mappers=mappers, clock=clock)

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()

    def _mapper(self, kind: str) -> Mapper:
        mapper = self._mappers.get(kind)
        if mapper is None:
            raise UnknownKind(f"no mapper registered for kind {kind!r}")
        return mapper

    def get(self, kind: str, id: str) -> Any:
        """Template lookup: cache, then index, then the materialize hook."""
        mapper = self._mapper(kind)
        key = (kind, id)
        if key in self._cache:
            return self._cache[key]
        record = self._live.get(key)
        self.index_reads += 1
        if record is None:
            raise NotFound(f"no live {kind} record with id {id!r}")
        entity = mapper.materialize(record.payload)
        self._cache[key] = entity
        return entity

    def exists(self, kind: str, id: str) -> bool:
        self._mapper(kind)
        return (kind, id) in self._live

    def version_of(self, kind: str, id: str) -> int:
        """Latest journaled version for (kind, id); 0 if never written."""
        return self._versions.get((kind, id), 0)

    def ids(self, kind: str) -> list[str]:
        """Live ids of a kind, sorted."""
        self._mapper(kind)
        return sorted(id for (k, id) in self._live if k == kind)

    def known_ids(self, kind: str) -> list[str]:
        """Every id ever journaled for a kind, tombstoned ones included."""
        self._mapper(kind)
        return sorted(id for (k, id) in self._versions if k == kind)

    def scan(self, kind: str) -> Iterator[Any]:
        """Materialized live entities of a kind, in id order."""
        for id in self.ids(kind):
            yield self.get(kind, id)

    def _append_event(self, event: dict[str, Any]) -> None:
        if self._read_only:
            raise StorageFailure("store is read-only after an earlier append failure")
        line = dumps_canonical(event) + "\n"
        try:
            self._fh.write(line)
            self._fh.flush()
        except OSError as exc:
            self._read_only = True
            raise StorageFailure(f"journal append failed: {exc}") from exc

    def put(self, kind: str, entity: Any) -> int:
        """Serialize, append durably, then update index and cache. Returns
        the new version (previous + 1, starting at 1)."""
        mapper = self._mapper(kind)
        payload = mapper.serialize(entity)
        entity_id = mapper.entity_id(entity)
        key = (kind, entity_id)
        with self._write_lock:
            version = self._versions.get(key, 0) + 1
            ts = self._clock()
            self._append_event(
                {
                    "seq": self._last_seq + 1,
                    "ts": format_instant(ts),
                    "op": "put",
                    "kind": kind,
                    "id": entity_id,
                    "version": version,
                    "payload": payload,
                }
            )
            self._last_seq += 1
            self._versions[key] = version
            self._live[key] = _LiveRecord(payload=payload, version=version, ts=ts)
            # Evict rather than insert: the next get re-materializes from the
            # journaled payload, so a cached entity always reflects disk.
            self._cache.pop(key, None)
        return version

    def delete(self, kind: str, id: str) -> None:
        """Append a tombstone; the record disappears from gets and scans."""
        self._mapper(kind)
        key = (kind, id)
        with self._write_lock:
            if key not in self._live:
                raise NotFound(f"no live {kind} record with id {id!r}")
            version = self._versions[key] + 1
            self._append_event(
                {
                    "seq": self._last_seq + 1,
                    "ts": format_instant(self._clock()),
                    "op": "delete",
                    "kind": kind,
                    "id": id,
                    "version": version,
                }
            )
            self._last_seq += 1
            self._versions[key] = version
            del self._live[key]
            self._cache.pop(key, None)
