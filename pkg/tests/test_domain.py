from __future__ import annotations

from datetime import date, datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from platekeeper.domain import (
    MAX_MONEY_AMOUNT,
    ConditionTag,
    EmptyTaskList,
    MaintenanceKind,
    MaintenanceRecord,
    MalformedId,
    Money,
    MoneyOverflow,
    PlateDecommissioned,
    PlateId,
    PlateStatus,
    Position,
    TaskEntry,
    TransitionFromDecommissioned,
    UnknownConditionTag,
    new_plate,
    set_conditions,
    sum_task_costs,
    transition_status,
)
from .generators import make_plate, noon_utc

CATALOG = {"pandeada", "corrosion"}
POS = Position(1, 1, 1)
D = date(2024, 1, 1)


class TestMoney:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Money(-1)

    def test_rejects_non_integer(self):
        with pytest.raises(ValueError):
            Money(1.5)  # type: ignore[arg-type]

    def test_addition_is_exact(self):
        assert Money(1200) + Money(800) == Money(2000)

    def test_addition_overflow_is_an_error(self):
        with pytest.raises(MoneyOverflow):
            Money(MAX_MONEY_AMOUNT) + Money(1)

    def test_subtraction_below_zero_is_an_error(self):
        with pytest.raises(ValueError):
            Money(1) - Money(2)

    def test_ordering(self):
        assert Money(1) < Money(2)
        assert Money(2) >= Money(2)


class TestPlateId:
    def test_accepts_uppercase_digits_dash(self):
        assert PlateId("P-0001").value == "P-0001"

    def test_equality_is_exact_text(self):
        assert PlateId("P-1") == PlateId("P-1")
        assert PlateId("P-1") != PlateId("P-01")

    @pytest.mark.parametrize("bad", ["", "p 001", "p-0001", "P_1", "Ñ-1", "A" * 33])
    def test_rejects_malformed(self, bad):
        with pytest.raises(MalformedId):
            PlateId(bad)


class TestPosition:
    @pytest.mark.parametrize("bank,cell,slot", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (-1, 1, 1)])
    def test_components_must_be_positive(self, bank, cell, slot):
        with pytest.raises(ValueError):
            Position(bank, cell, slot)


class TestNewPlate:
    def test_starts_in_stock_with_zero_cost(self):
        plate = new_plate("P-0001", POS, D)
        assert plate.status is PlateStatus.IN_STOCK
        assert plate.conditions == frozenset()
        assert plate.cumulative_cost == Money(0)
        assert plate.registered_on == D

    def test_empty_id_rejected(self):
        with pytest.raises(MalformedId):
            new_plate("", POS, D)

    def test_lowercase_and_space_rejected(self):
        with pytest.raises(MalformedId):
            new_plate("p 001", POS, D)

    def test_deterministic(self):
        assert new_plate("P-0001", POS, D) == new_plate("P-0001", POS, D)


class TestSumTaskCosts:
    def test_hand_summed(self):
        tasks = [TaskEntry("pulido", Money(1200)), TaskEntry("limpieza", Money(800))]
        assert sum_task_costs(tasks) == Money(2000)  # 1200 + 800

    def test_zero_cost(self):
        assert sum_task_costs([TaskEntry("pulido", Money(0))]) == Money(0)

    def test_empty_list_rejected(self):
        with pytest.raises(EmptyTaskList):
            sum_task_costs([])

    def test_overflow_is_an_error(self):
        tasks = [TaskEntry("a", Money(MAX_MONEY_AMOUNT)), TaskEntry("b", Money(1))]
        with pytest.raises(MoneyOverflow):
            sum_task_costs(tasks)

    @given(st.permutations([1200, 800, 0, 55, 100_000]))
    def test_order_independent(self, amounts):
        tasks = [TaskEntry("t", Money(a)) for a in amounts]
        assert sum_task_costs(tasks) == Money(1200 + 800 + 0 + 55 + 100_000)


class TestTransitionStatus:
    def test_stock_to_production(self):
        plate = new_plate("P-0001", POS, D)
        moved = transition_status(plate, PlateStatus.IN_PRODUCTION)
        assert moved.status is PlateStatus.IN_PRODUCTION
        assert moved.id == plate.id and moved.position == plate.position

    def test_production_to_maintenance(self):
        plate = transition_status(new_plate("P-0001", POS, D), PlateStatus.IN_PRODUCTION)
        assert transition_status(plate, PlateStatus.IN_MAINTENANCE).status is PlateStatus.IN_MAINTENANCE

    def test_decommissioned_is_terminal(self):
        plate = make_plate(status=PlateStatus.DECOMMISSIONED)
        with pytest.raises(TransitionFromDecommissioned):
            transition_status(plate, PlateStatus.IN_STOCK)

    def test_decommission_is_not_idempotent(self):
        plate = make_plate(status=PlateStatus.DECOMMISSIONED)
        with pytest.raises(TransitionFromDecommissioned):
            transition_status(plate, PlateStatus.DECOMMISSIONED)


class TestSetConditions:
    def test_direct_set(self):
        plate = set_conditions(make_plate(), {"pandeada"}, CATALOG)
        assert plate.conditions == frozenset({"pandeada"})

    def test_clearing(self):
        plate = make_plate(conditions=frozenset({"pandeada"}))
        assert set_conditions(plate, set(), CATALOG).conditions == frozenset()

    def test_unknown_tag_rejected(self):
        with pytest.raises(UnknownConditionTag):
            set_conditions(make_plate(), {"nonexistent"}, CATALOG)

    def test_decommissioned_rejected(self):
        plate = make_plate(status=PlateStatus.DECOMMISSIONED)
        with pytest.raises(PlateDecommissioned):
            set_conditions(plate, {"pandeada"}, CATALOG)


class TestConditionTag:
    def test_code_must_be_lowercase(self):
        with pytest.raises(ValueError):
            ConditionTag("Pandeada", "Pandeada")


class TestMaintenanceRecordInvariants:
    def _record(self, **overrides):
        fields = dict(
            id="M-00000001",
            plate_id=PlateId("P-0001"),
            date=date(2024, 3, 5),
            timestamp=noon_utc(date(2024, 3, 5)),
            company_id="EMP-01",
            arrival_conditions=frozenset(),
            tasks=(TaskEntry("pulido", Money(1200)),),
            kind=MaintenanceKind.MINOR,
            total_cost=Money(1200),
        )
        fields.update(overrides)
        return MaintenanceRecord(**fields)

    def test_valid_record_constructs(self):
        assert self._record().total_cost == Money(1200)

    def test_total_must_match_task_sum(self):
        with pytest.raises(ValueError):
            self._record(total_cost=Money(1))

    def test_tasks_must_be_non_empty(self):
        with pytest.raises(EmptyTaskList):
            self._record(tasks=())

    def test_date_must_match_timestamp_utc_date(self):
        with pytest.raises(ValueError):
            self._record(date=date(2024, 3, 6))

    def test_timestamp_must_be_aware(self):
        with pytest.raises(ValueError):
            self._record(timestamp=datetime(2024, 3, 5, 12, 0))

    def test_timestamp_compared_in_utc(self):
        # 23:30 UTC on the 5th stays the 5th even though some zones roll over.
        ts = datetime(2024, 3, 5, 23, 30, tzinfo=timezone.utc)
        assert self._record(timestamp=ts).date == date(2024, 3, 5)


@given(
    st.sampled_from(
        ["transition", "set_conditions"]
    ),
    st.sampled_from(list(PlateStatus)),
)
def test_decommissioned_plates_admit_no_operation(op, target_status):
    plate = make_plate(status=PlateStatus.DECOMMISSIONED)
    with pytest.raises((TransitionFromDecommissioned, PlateDecommissioned)):
        if op == "transition":
            transition_status(plate, target_status)
        else:
            set_conditions(plate, {"pandeada"}, CATALOG)
