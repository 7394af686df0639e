"""HTTP/JSON boundary for capture terminals and the reporting UI.

Stateless request handling over the service facade. Bodies are parsed and
validated by hand so every failure maps to the published error table:
400 malformed JSON, 422 schema violations, 404 catalog/entity misses,
409 for policy denials and lifecycle conflicts. Policy deny codes pass
through to the wire verbatim.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any, Mapping

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import service as svc
from .domain import Money, OperatorId, Plate, Position
from .jsonutil import dumps_canonical, parse_iso_date
from .persistence import MaintenanceMapper, NotFound, PlateMapper
from .policy import CONDITION_BLOCKED, CRITICAL_POINT, SAME_DATE
from .service import (
    CommandOutcome,
    MaintenanceService,
    InvalidRange,
    PeriodComparison,
    SubmissionError,
    TopCostRow,
    parse_capture_submission,
)

MALFORMED_JSON = "MALFORMED_JSON"
INVALID_PARAM = "INVALID_PARAM"
INVALID_RANGE = "INVALID_RANGE"

# The published error table: every code the API can emit, with its status.
HTTP_STATUS_BY_CODE: dict[str, int] = {
    MALFORMED_JSON: 400,
    svc.SCHEMA_VIOLATION: 422,
    svc.EMPTY_TASKS: 422,
    svc.MALFORMED_ID: 422,
    INVALID_PARAM: 422,
    INVALID_RANGE: 422,
    svc.NOT_FOUND: 404,
    svc.UNKNOWN_COMPANY: 404,
    svc.UNKNOWN_TASK: 404,
    svc.UNKNOWN_CONDITION: 404,
    svc.DUPLICATE_PLATE: 409,
    svc.PLATE_DECOMMISSIONED: 409,
    svc.ALREADY_DECOMMISSIONED: 409,
    SAME_DATE: 409,
    CRITICAL_POINT: 409,
    CONDITION_BLOCKED: 409,
}

POLICY_DENY_CODES = (SAME_DATE, CRITICAL_POINT, CONDITION_BLOCKED)

_PLATE_MAPPER = PlateMapper()
_MAINTENANCE_MAPPER = MaintenanceMapper()


class CanonicalJSONResponse(Response):
    media_type = "application/json"

    def render(self, content: Any) -> bytes:
        return dumps_canonical(content).encode("utf-8")


class ApiRejection(Exception):
    def __init__(self, code: str, message: str, status: int | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status if status is not None else HTTP_STATUS_BY_CODE[code]


def _error_body(code: str, message: str) -> dict[str, str]:
    return {"code": code, "message": message}


def _outcome_error(outcome: CommandOutcome) -> CanonicalJSONResponse:
    assert outcome.deny_code is not None
    status = HTTP_STATUS_BY_CODE.get(outcome.deny_code, 409)
    message = outcome.message or outcome.deny_code.replace("_", " ").lower()
    return CanonicalJSONResponse(_error_body(outcome.deny_code, message), status_code=status)


async def _read_json_object(request: Request) -> Mapping[str, Any]:
    try:
        body = json.loads(await request.body())
    except json.JSONDecodeError as exc:
        raise ApiRejection(MALFORMED_JSON, f"request body is not valid JSON: {exc.msg}") from exc
    if not isinstance(body, Mapping):
        raise ApiRejection(svc.SCHEMA_VIOLATION, "request body must be a JSON object")
    return body


def _parse_position(raw: Any, where: str) -> Position:
    if not isinstance(raw, Mapping) or set(raw) != {"bank", "cell", "slot"}:
        raise ApiRejection(svc.SCHEMA_VIOLATION, f"{where} must be {{bank, cell, slot}}")
    try:
        return Position(bank=raw["bank"], cell=raw["cell"], slot=raw["slot"])
    except (ValueError, TypeError) as exc:
        raise ApiRejection(svc.SCHEMA_VIOLATION, f"{where}: {exc}") from exc


def _query_int(request: Request, name: str, default: int | None = None) -> int:
    raw = request.query_params.get(name)
    if raw is None:
        if default is None:
            raise ApiRejection(INVALID_PARAM, f"query parameter {name} is required")
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ApiRejection(INVALID_PARAM, f"query parameter {name} must be an integer") from exc


def _query_date(request: Request, name: str):
    raw = request.query_params.get(name)
    if raw is None:
        raise ApiRejection(INVALID_PARAM, f"query parameter {name} is required")
    try:
        return parse_iso_date(raw)
    except ValueError as exc:
        raise ApiRejection(INVALID_PARAM, f"query parameter {name} must be an ISO date") from exc


# --- response body builders (the CLI's --json output reuses these) ----------


def plate_snapshot_body(plate: Plate, recent: list) -> dict[str, Any]:
    body = _PLATE_MAPPER.serialize(plate)
    body["recent_maintenances"] = [_MAINTENANCE_MAPPER.serialize(r) for r in recent]
    return body


def top_cost_body(rows: list[TopCostRow]) -> dict[str, Any]:
    return {
        "rows": [
            {
                "plate_id": row.plate_id.value,
                "cumulative_cost": row.cumulative_cost.amount,
                "maintenance_count": row.maintenance_count,
            }
            for row in rows
        ]
    }


def period_comparison_body(comparison: PeriodComparison) -> dict[str, Any]:
    return {
        "period_a_total": comparison.period_a_total.amount,
        "period_b_total": comparison.period_b_total.amount,
        "reduction_pct": comparison.reduction_pct,
        "zero_baseline": comparison.zero_baseline,
    }


def replacement_body(critical_point: Money, plate_ids: list) -> dict[str, Any]:
    return {
        "critical_point": critical_point.amount,
        "plate_ids": [pid.value for pid in plate_ids],
    }


CATALOG_KINDS = {"tasks": "task", "companies": "company", "conditions": "condition"}


def catalog_body(service: MaintenanceService, kind: str) -> list[dict[str, Any]]:
    if kind == "tasks":
        return [
            {"code": t.code, "label": t.label, "default_cost": t.default_cost.amount}
            for t in sorted(service.task_catalog().values(), key=lambda t: t.code)
        ]
    if kind == "companies":
        return [
            {"id": c.id, "name": c.name}
            for c in sorted(service.company_catalog().values(), key=lambda c: c.id)
        ]
    return [
        {"code": c.code, "label": c.label}
        for c in sorted(service.condition_catalog().values(), key=lambda c: c.code)
    ]


def create_app(service: MaintenanceService) -> FastAPI:
    app = FastAPI(title="platekeeper", docs_url=None, redoc_url=None, openapi_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiRejection)
    async def _rejection_handler(_request: Request, exc: ApiRejection) -> Response:
        return CanonicalJSONResponse(_error_body(exc.code, exc.message), status_code=exc.status)

    @app.post("/api/v1/plates")
    async def register_plate(request: Request) -> Response:
        body = await _read_json_object(request)
        extra = set(body) - {"id", "position", "registered_on", "operator_id"}
        if extra:
            raise ApiRejection(svc.SCHEMA_VIOLATION, f"unexpected field(s): {sorted(extra)}")
        plate_id = body.get("id")
        if not isinstance(plate_id, str):
            raise ApiRejection(svc.SCHEMA_VIOLATION, "id must be a string")
        position = _parse_position(body.get("position"), "position")
        operator = body.get("operator_id")
        if not isinstance(operator, str) or not operator:
            raise ApiRejection(svc.SCHEMA_VIOLATION, "operator_id must be a non-empty string")
        raw_date = body.get("registered_on")
        if raw_date is None:
            registered_on = datetime.now(timezone.utc).date()
        else:
            try:
                registered_on = parse_iso_date(raw_date)
            except (ValueError, TypeError) as exc:
                raise ApiRejection(svc.SCHEMA_VIOLATION, "registered_on must be an ISO date") from exc
        outcome = service.register_new_plate(plate_id, position, registered_on, OperatorId(operator))
        if not outcome.accepted:
            return _outcome_error(outcome)
        return CanonicalJSONResponse(
            {"plate_id": outcome.entity_id, "version": outcome.new_version}, status_code=201
        )

    @app.post("/api/v1/plates/{plate_id}/position")
    async def change_position(plate_id: str, request: Request) -> Response:
        body = await _read_json_object(request)
        position = _parse_position(body, "body")
        outcome = service.change_plate_position(plate_id, position)
        if not outcome.accepted:
            return _outcome_error(outcome)
        return CanonicalJSONResponse({"plate_id": plate_id, "version": outcome.new_version})

    @app.post("/api/v1/plates/{plate_id}/decommission")
    async def decommission(plate_id: str) -> Response:
        outcome = service.decommission_plate(plate_id)
        if not outcome.accepted:
            return _outcome_error(outcome)
        return CanonicalJSONResponse({"plate_id": plate_id, "version": outcome.new_version})

    @app.get("/api/v1/plates/{plate_id}")
    async def plate_lookup(plate_id: str) -> Response:
        try:
            plate = service.get_plate(plate_id)
        except NotFound:
            raise ApiRejection(svc.NOT_FOUND, f"plate {plate_id} not found") from None
        recent = service.recent_maintenances(plate.id, limit=10)
        return CanonicalJSONResponse(plate_snapshot_body(plate, recent))

    @app.post("/api/v1/maintenances")
    async def capture_maintenance(request: Request) -> Response:
        body = await _read_json_object(request)
        try:
            submission = parse_capture_submission(body)
        except SubmissionError as exc:
            raise ApiRejection(exc.code, str(exc)) from exc
        outcome = service.create_maintenance(submission)
        if not outcome.accepted:
            return _outcome_error(outcome)
        plate = service.get_plate(submission.plate_id)
        return CanonicalJSONResponse(
            {
                "maintenance_id": outcome.entity_id,
                "plate_cumulative_cost": plate.cumulative_cost.amount,
            },
            status_code=201,
        )

    @app.delete("/api/v1/maintenances/{maintenance_id}")
    async def delete_maintenance(maintenance_id: str) -> Response:
        outcome = service.delete_maintenance(maintenance_id)
        if not outcome.accepted:
            return _outcome_error(outcome)
        return CanonicalJSONResponse({"maintenance_id": maintenance_id, "deleted": True})

    @app.get("/api/v1/reports/top-cost")
    async def report_top_cost(request: Request) -> Response:
        limit = _query_int(request, "limit", default=20)
        if limit < 0:
            raise ApiRejection(INVALID_PARAM, "limit must be non-negative")
        return CanonicalJSONResponse(top_cost_body(service.report_top_cost(limit)))

    @app.get("/api/v1/reports/period-comparison")
    async def report_period(request: Request) -> Response:
        a_start = _query_date(request, "a_start")
        a_end = _query_date(request, "a_end")
        b_start = _query_date(request, "b_start")
        b_end = _query_date(request, "b_end")
        try:
            comparison = service.report_period_comparison(a_start, a_end, b_start, b_end)
        except InvalidRange as exc:
            raise ApiRejection(INVALID_RANGE, str(exc)) from exc
        return CanonicalJSONResponse(period_comparison_body(comparison))

    @app.get("/api/v1/reports/replacement")
    async def report_replacement(request: Request) -> Response:
        raw = _query_int(request, "critical_point")
        if raw < 0:
            raise ApiRejection(INVALID_PARAM, "critical_point must be non-negative")
        critical_point = Money(raw)
        plate_ids = service.recommend_replacement(critical_point)
        return CanonicalJSONResponse(replacement_body(critical_point, plate_ids))

    @app.get("/api/v1/catalog/{kind}")
    async def catalog_fetch(kind: str) -> Response:
        if kind not in CATALOG_KINDS:
            raise ApiRejection(svc.NOT_FOUND, f"unknown catalog {kind!r}")
        return CanonicalJSONResponse(catalog_body(service, kind))

    return app
