from __future__ import annotations

from datetime import date
from typing import Any

import pytest

from platekeeper.domain import Company, ConditionTag, Money, OperatorId, Position, Task
from platekeeper.persistence import Store
from platekeeper.policy import DEFAULT_POLICY_CONFIG, build_policy
from platekeeper.service import MaintenanceService

CATALOG_TASKS = (
    Task("pulido", "Pulido", Money(1200)),
    Task("limpieza", "Limpieza", Money(800)),
    Task("enderezado", "Enderezado", Money(2500)),
)
CATALOG_CONDITIONS = (
    ConditionTag("pandeada", "Pandeada"),
    ConditionTag("corrosion", "Corrosión"),
    ConditionTag("desgaste", "Desgaste de borde"),
)
CATALOG_COMPANIES = (
    Company("EMP-01", "Empresa Contratista 1"),
    Company("EMP-02", "Empresa Contratista 2"),
)

OPERATOR = OperatorId("OP-TEST")
POS = Position(bank=1, cell=1, slot=1)
REGISTERED = date(2024, 1, 1)


@pytest.fixture
def store(tmp_path):
    with Store.open(tmp_path / "store") as s:
        yield s


@pytest.fixture
def seeded_store(store):
    for task in CATALOG_TASKS:
        store.put("task", task)
    for condition in CATALOG_CONDITIONS:
        store.put("condition", condition)
    for company in CATALOG_COMPANIES:
        store.put("company", company)
    return store


@pytest.fixture
def service(seeded_store):
    return MaintenanceService(seeded_store, build_policy(DEFAULT_POLICY_CONFIG))


def make_service(seeded_store, policy_config) -> MaintenanceService:
    return MaintenanceService(seeded_store, build_policy(policy_config))


def capture_payload(**overrides: Any) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "plate_id": "P-0001",
        "company_id": "EMP-01",
        "arrival_conditions": [],
        "tasks": [{"task_code": "pulido", "cost": 1200}, {"task_code": "limpieza", "cost": 800}],
        "kind": "minor",
        "date": "2024-03-05",
        "operator_id": "OP-TEST",
    }
    payload.update(overrides)
    return payload
