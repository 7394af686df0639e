from __future__ import annotations

import random
from datetime import date, timedelta

import pytest

from platekeeper.domain import MaintenanceKind, Money, PlateStatus, Position
from platekeeper.persistence import Store
from platekeeper.service import (
    CaptureSubmission,
    MaintenanceService,
    InvalidRange,
    SubmissionError,
    parse_capture_submission,
)
from .conftest import OPERATOR, POS, REGISTERED, capture_payload, make_service
from .oracles import oracle_plate_costs, oracle_top_cost, read_journal


def register(service, plate_id="P-0001"):
    outcome = service.register_new_plate(plate_id, POS, REGISTERED, OPERATOR)
    assert outcome.accepted, outcome
    return outcome


def create(service, **overrides):
    return service.create_maintenance(parse_capture_submission(capture_payload(**overrides)))


class TestRegisterNewPlate:
    def test_fresh_id_accepted_at_version_one(self, service):
        outcome = register(service)
        assert outcome.entity_id == "P-0001" and outcome.new_version == 1

    def test_duplicate_rejected(self, service):
        register(service)
        second = service.register_new_plate("P-0001", POS, REGISTERED, OPERATOR)
        assert second.deny_code == "DUPLICATE_PLATE"

    def test_malformed_id_rejected(self, service):
        outcome = service.register_new_plate("p 001", POS, REGISTERED, OPERATOR)
        assert outcome.deny_code == "MALFORMED_ID"


class TestChangePosition:
    def test_live_plate_accepted(self, service):
        register(service)
        outcome = service.change_plate_position("P-0001", Position(2, 3, 4))
        assert outcome.accepted
        assert service.get_plate("P-0001").position == Position(2, 3, 4)

    def test_decommissioned_rejected(self, service):
        register(service)
        service.decommission_plate("P-0001")
        outcome = service.change_plate_position("P-0001", Position(2, 3, 4))
        assert outcome.deny_code == "PLATE_DECOMMISSIONED"

    def test_unknown_rejected(self, service):
        assert service.change_plate_position("P-0009", POS).deny_code == "NOT_FOUND"


class TestDecommission:
    def test_blocks_future_maintenance(self, service):
        register(service)
        assert service.decommission_plate("P-0001").accepted
        assert create(service).deny_code == "PLATE_DECOMMISSIONED"

    def test_double_decommission_rejected(self, service):
        register(service)
        service.decommission_plate("P-0001")
        assert service.decommission_plate("P-0001").deny_code == "ALREADY_DECOMMISSIONED"

    def test_unknown_rejected(self, service):
        assert service.decommission_plate("P-0009").deny_code == "NOT_FOUND"


class TestCreateMaintenance:
    def test_costs_accumulate_on_the_plate(self, service):
        register(service)
        outcome = create(service)  # pulido 1200 + limpieza 800
        assert outcome.accepted
        plate = service.get_plate("P-0001")
        assert plate.cumulative_cost == Money(2000)
        assert plate.status is PlateStatus.IN_STOCK

    def test_arrival_conditions_replace_plate_conditions(self, service):
        register(service)
        create(service, arrival_conditions=["pandeada", "corrosion"], date="2024-03-01")
        assert service.get_plate("P-0001").conditions == frozenset({"pandeada", "corrosion"})
        create(service, arrival_conditions=["desgaste"], date="2024-03-02")
        assert service.get_plate("P-0001").conditions == frozenset({"desgaste"})

    def test_task_cost_defaults_from_catalog(self, service):
        register(service)
        outcome = create(service, tasks=[{"task_code": "pulido"}])
        assert outcome.accepted
        record = service.store.get("maintenance", outcome.entity_id)
        assert record.total_cost == Money(1200)

    def test_same_date_rejected_with_no_partial_write(self, service):
        register(service)
        create(service)
        before = read_journal(service.store.directory)
        second = create(service)
        assert second.deny_code == "SAME_DATE"
        assert read_journal(service.store.directory) == before
        assert service.get_plate("P-0001").cumulative_cost == Money(2000)

    def test_unknown_plate(self, service):
        assert create(service).deny_code == "NOT_FOUND"

    def test_unknown_company(self, service):
        register(service)
        assert create(service, company_id="EMP-99").deny_code == "UNKNOWN_COMPANY"

    def test_unknown_task(self, service):
        register(service)
        outcome = create(service, tasks=[{"task_code": "taladrado"}])
        assert outcome.deny_code == "UNKNOWN_TASK"

    def test_unknown_condition(self, service):
        register(service)
        outcome = create(service, arrival_conditions=["oxidada"])
        assert outcome.deny_code == "UNKNOWN_CONDITION"

    def test_empty_tasks_rejected_at_service_level(self, service):
        register(service)
        submission = CaptureSubmission(
            plate_id="P-0001",
            company_id="EMP-01",
            arrival_conditions=(),
            tasks=(),
            kind=MaintenanceKind.MINOR,
            date=date(2024, 3, 5),
            operator_id="OP-TEST",
        )
        assert service.create_maintenance(submission).deny_code == "EMPTY_TASKS"

    def test_critical_point_policy_denies(self, seeded_store):
        service = make_service(seeded_store, {"type": "critical_point", "max_cost": 0})
        register(service)
        assert create(service).deny_code == "CRITICAL_POINT"

    def test_condition_exception_allows_second_same_day(self, seeded_store):
        config = {
            "type": "condition_exception",
            "tag": "pandeada",
            "child": {"type": "same_date"},
        }
        service = make_service(seeded_store, config)
        register(service)
        assert create(service, arrival_conditions=["pandeada"]).accepted
        # Plate now carries pandeada, so the same-date rule is bypassed.
        assert create(service, arrival_conditions=["pandeada"]).accepted


class TestDeleteMaintenance:
    def test_reverses_cost_bookkeeping(self, service):
        register(service)
        outcome = create(service)
        assert service.delete_maintenance(outcome.entity_id).accepted
        assert service.get_plate("P-0001").cumulative_cost == Money(0)

    def test_double_delete_rejected(self, service):
        register(service)
        outcome = create(service)
        service.delete_maintenance(outcome.entity_id)
        assert service.delete_maintenance(outcome.entity_id).deny_code == "NOT_FOUND"

    def test_reverses_cost_even_on_decommissioned_plate(self, service):
        register(service)
        outcome = create(service)
        service.decommission_plate("P-0001")
        assert service.delete_maintenance(outcome.entity_id).accepted
        assert service.get_plate("P-0001").cumulative_cost == Money(0)

    def test_top_cost_excludes_deleted(self, service):
        register(service, "P-0001")
        register(service, "P-0002")
        kept = create(service, plate_id="P-0002")
        dropped = create(service, plate_id="P-0001")
        service.delete_maintenance(dropped.entity_id)
        rows = service.report_top_cost(10)
        assert [r.plate_id.value for r in rows] == ["P-0002"]
        # Independent recompute from the journal agrees.
        assert oracle_top_cost(read_journal(service.store.directory), 10) == [
            ("P-0002", 2000, 1)
        ]
        assert kept.accepted


class TestTopCostReport:
    def _spend(self, service, plate_id, amount, day):
        register(service, plate_id)
        outcome = create(
            service,
            plate_id=plate_id,
            tasks=[{"task_code": "pulido", "cost": amount}],
            date=day.isoformat(),
        )
        assert outcome.accepted

    def test_sorted_by_cost_then_id(self, service):
        d = date(2024, 3, 1)
        self._spend(service, "P-A", 5000, d)
        self._spend(service, "P-B", 7000, d)
        self._spend(service, "P-C", 7000, d)
        rows = service.report_top_cost(10)
        assert [r.plate_id.value for r in rows] == ["P-B", "P-C", "P-A"]
        assert [r.cumulative_cost.amount for r in rows] == [7000, 7000, 5000]

    def test_limit_zero_returns_nothing(self, service):
        self._spend(service, "P-A", 5000, date(2024, 3, 1))
        assert service.report_top_cost(0) == []

    def test_empty_store_returns_nothing(self, service):
        assert service.report_top_cost(10) == []

    def test_plates_without_records_are_absent(self, service):
        register(service, "P-IDLE")
        self._spend(service, "P-A", 100, date(2024, 3, 1))
        assert [r.plate_id.value for r in service.report_top_cost(10)] == ["P-A"]

    def test_negative_limit_rejected(self, service):
        with pytest.raises(ValueError):
            service.report_top_cost(-1)


class TestPeriodComparison:
    def _spend_on(self, service, plate_id, amount, day):
        outcome = create(
            service,
            plate_id=plate_id,
            tasks=[{"task_code": "pulido", "cost": amount}],
            date=day.isoformat(),
        )
        assert outcome.accepted, outcome

    def test_fifteen_percent_reduction(self, service):
        register(service, "P-0001")
        # Period A totals 100000, period B exactly 85% of that.
        self._spend_on(service, "P-0001", 100_000, date(2024, 1, 10))
        self._spend_on(service, "P-0001", 85_000, date(2024, 7, 10))
        comparison = service.report_period_comparison(
            date(2024, 1, 1), date(2024, 6, 30), date(2024, 7, 1), date(2024, 12, 31)
        )
        assert comparison.period_a_total == Money(100_000)
        assert comparison.period_b_total == Money(85_000)
        assert comparison.reduction_pct == 15.0  # 100 * 15000 / 100000

    def test_equal_periods_give_zero(self, service):
        register(service, "P-0001")
        self._spend_on(service, "P-0001", 500, date(2024, 1, 10))
        self._spend_on(service, "P-0001", 500, date(2024, 7, 10))
        comparison = service.report_period_comparison(
            date(2024, 1, 1), date(2024, 6, 30), date(2024, 7, 1), date(2024, 12, 31)
        )
        assert comparison.reduction_pct == 0.0

    def test_zero_baseline_is_an_outcome_not_a_crash(self, service):
        comparison = service.report_period_comparison(
            date(2024, 1, 1), date(2024, 6, 30), date(2024, 7, 1), date(2024, 12, 31)
        )
        assert comparison.zero_baseline and comparison.reduction_pct is None

    def test_reversed_range_rejected(self, service):
        with pytest.raises(InvalidRange):
            service.report_period_comparison(
                date(2024, 6, 30), date(2024, 1, 1), date(2024, 7, 1), date(2024, 12, 31)
            )

    def test_negative_reduction_when_costs_rise(self, service):
        register(service, "P-0001")
        self._spend_on(service, "P-0001", 1000, date(2024, 1, 10))
        self._spend_on(service, "P-0001", 1500, date(2024, 7, 10))
        comparison = service.report_period_comparison(
            date(2024, 1, 1), date(2024, 6, 30), date(2024, 7, 1), date(2024, 12, 31)
        )
        assert comparison.reduction_pct == -50.0


class TestRecommendReplacement:
    def test_zero_threshold_lists_all_live_plates(self, service):
        register(service, "P-0001")
        register(service, "P-0002")
        assert [p.value for p in service.recommend_replacement(Money(0))] == [
            "P-0001",
            "P-0002",
        ]

    def test_threshold_above_everything_is_empty(self, service):
        register(service, "P-0001")
        create(service)
        assert service.recommend_replacement(Money(10**9)) == []

    def test_excludes_decommissioned(self, service):
        register(service, "P-0001")
        create(service)
        service.decommission_plate("P-0001")
        assert service.recommend_replacement(Money(0)) == []

    def test_matches_filter_sort_oracle(self, service):
        rnd = random.Random(23)
        for i in range(12):
            pid = f"P-{i:04d}"
            register(service, pid)
            for day in range(rnd.randrange(3)):
                create(
                    service,
                    plate_id=pid,
                    tasks=[{"task_code": "pulido", "cost": rnd.randrange(5000)}],
                    date=(date(2024, 3, 1) + timedelta(days=day)).isoformat(),
                )
        if rnd.random() < 0.9:
            service.decommission_plate("P-0003")
        from .oracles import oracle_replacement

        threshold = 2500
        expected = oracle_replacement(read_journal(service.store.directory), threshold)
        assert [p.value for p in service.recommend_replacement(Money(threshold))] == expected


class TestSubmissionParsing:
    def test_valid_payload_parses(self):
        submission = parse_capture_submission(capture_payload())
        assert submission.plate_id == "P-0001"
        assert submission.tasks == (("pulido", 1200), ("limpieza", 800))

    @pytest.mark.parametrize(
        "mutation,expected_code",
        [
            ({"tasks": []}, "EMPTY_TASKS"),
            ({"tasks": "pulido"}, "SCHEMA_VIOLATION"),
            ({"tasks": [{"task_code": ""}]}, "SCHEMA_VIOLATION"),
            ({"tasks": [{"task_code": "pulido", "cost": -1}]}, "SCHEMA_VIOLATION"),
            ({"tasks": [{"task_code": "pulido", "cost": 1.5}]}, "SCHEMA_VIOLATION"),
            ({"kind": "mega"}, "SCHEMA_VIOLATION"),
            ({"date": "2024-13-01"}, "SCHEMA_VIOLATION"),
            ({"plate_id": ""}, "SCHEMA_VIOLATION"),
            ({"operator_id": ""}, "SCHEMA_VIOLATION"),
            ({"arrival_conditions": "pandeada"}, "SCHEMA_VIOLATION"),
            ({"surprise": 1}, "SCHEMA_VIOLATION"),
        ],
    )
    def test_schema_violations(self, mutation, expected_code):
        with pytest.raises(SubmissionError) as exc:
            parse_capture_submission(capture_payload(**mutation))
        assert exc.value.code == expected_code

    def test_non_object_rejected(self):
        with pytest.raises(SubmissionError):
            parse_capture_submission([1, 2, 3])


class TestRandomizedAudit:
    def test_cost_conservation_and_replay_equivalence(self, seeded_store, tmp_path):
        service = make_service(seeded_store, {"type": "same_date"})
        rnd = random.Random(2024)
        plate_ids = [f"P-{i:04d}" for i in range(15)]
        live_maintenances: list[str] = []
        for pid in plate_ids[:5]:
            register(service, pid)

        for _ in range(250):
            roll = rnd.random()
            if roll < 0.15:
                service.register_new_plate(rnd.choice(plate_ids), POS, REGISTERED, OPERATOR)
            elif roll < 0.70:
                outcome = create(
                    service,
                    plate_id=rnd.choice(plate_ids),
                    tasks=[{"task_code": "pulido", "cost": rnd.randrange(10_000)}],
                    date=(date(2024, 3, 1) + timedelta(days=rnd.randrange(10))).isoformat(),
                )
                if outcome.accepted:
                    live_maintenances.append(outcome.entity_id)
            elif roll < 0.85 and live_maintenances:
                victim = live_maintenances.pop(rnd.randrange(len(live_maintenances)))
                assert service.delete_maintenance(victim).accepted
            elif roll < 0.95:
                service.decommission_plate(rnd.choice(plate_ids))

        journal = read_journal(service.store.directory)
        expected_costs = oracle_plate_costs(journal)
        for pid in service.store.ids("plate"):
            plate = service.get_plate(pid)
            assert plate.cumulative_cost.amount == expected_costs.get(pid, 0)

        before_rows = service.report_top_cost(100)
        service.store.close()
        with Store.open(service.store.directory) as reopened:
            fresh = MaintenanceService(reopened, service.policy)
            assert fresh.report_top_cost(100) == before_rows

    def test_reports_never_write(self, service):
        register(service)
        create(service)
        before = read_journal(service.store.directory)
        service.report_top_cost(5)
        service.report_period_comparison(
            date(2024, 1, 1), date(2024, 6, 30), date(2024, 7, 1), date(2024, 12, 31)
        )
        service.recommend_replacement(Money(0))
        service.plate_history(service.get_plate("P-0001").id)
        assert read_journal(service.store.directory) == before
