"""Independent brute-force oracles the implementation is checked against.

These re-derive expected results straight from the stated rules, on
purpose NOT calling the production evaluation/replay/report code paths:
the policy oracle fully evaluates every child (no short-circuiting), the
replay oracle folds raw parsed event dicts, and the report oracles
recompute sums from raw record payloads.
"""

from __future__ import annotations

import json
from typing import Any, Iterable

from platekeeper.policy import (
    AllOf,
    AnyOf,
    ConditionBlock,
    ConditionException,
    CriticalPoint,
    EvaluationContext,
    PolicyNode,
    SameDate,
)

OracleVerdict = tuple[bool, str | None]  # (allowed, deny_code)

ALLOW: OracleVerdict = (True, None)


def oracle_evaluate(node: PolicyNode, ctx: EvaluationContext) -> OracleVerdict:
    if isinstance(node, SameDate):
        dates = {r.date for r in ctx.history}
        return (False, "SAME_DATE") if ctx.proposal.date in dates else ALLOW
    if isinstance(node, CriticalPoint):
        if ctx.plate.cumulative_cost.amount >= node.max_cost.amount:
            return (False, "CRITICAL_POINT")
        return ALLOW
    if isinstance(node, ConditionBlock):
        return (False, "CONDITION_BLOCKED") if node.tag in ctx.plate.conditions else ALLOW
    if isinstance(node, ConditionException):
        if node.tag in ctx.plate.conditions:
            return ALLOW
        return oracle_evaluate(node.child, ctx)
    if isinstance(node, AllOf):
        verdicts = [oracle_evaluate(child, ctx) for child in node.children]
        denials = [v for v in verdicts if not v[0]]
        return denials[0] if denials else ALLOW
    if isinstance(node, AnyOf):
        verdicts = [oracle_evaluate(child, ctx) for child in node.children]
        if any(v[0] for v in verdicts):
            return ALLOW
        return verdicts[0]
    raise TypeError(f"unexpected node {node!r}")


def oracle_replay(journal_text: str) -> dict[tuple[str, str], dict[str, Any]]:
    """Hand-rolled fold over journal lines: latest put payload per live id."""
    live: dict[tuple[str, str], dict[str, Any]] = {}
    for line in journal_text.splitlines():
        event = json.loads(line)
        key = (event["kind"], event["id"])
        if event["op"] == "put":
            live[key] = event["payload"]
        else:
            live.pop(key, None)
    return live


def oracle_plate_costs(journal_text: str) -> dict[str, int]:
    """Per-plate sum of live maintenance costs, straight from the journal."""
    live = oracle_replay(journal_text)
    sums: dict[str, int] = {}
    for (kind, _), payload in live.items():
        if kind == "maintenance":
            sums[payload["plate_id"]] = sums.get(payload["plate_id"], 0) + payload["total_cost"]
    return sums


def oracle_top_cost(journal_text: str, limit: int) -> list[tuple[str, int, int]]:
    """(plate_id, total, count) rows: sum, filter, sort — cost desc, id asc."""
    live = oracle_replay(journal_text)
    totals: dict[str, int] = {}
    counts: dict[str, int] = {}
    for (kind, _), payload in live.items():
        if kind == "maintenance":
            pid = payload["plate_id"]
            totals[pid] = totals.get(pid, 0) + payload["total_cost"]
            counts[pid] = counts.get(pid, 0) + 1
    rows = sorted(totals, key=lambda pid: (-totals[pid], pid))
    return [(pid, totals[pid], counts[pid]) for pid in rows[:limit]]


def oracle_replacement(journal_text: str, threshold: int) -> list[str]:
    live = oracle_replay(journal_text)
    plates = [
        payload
        for (kind, _), payload in live.items()
        if kind == "plate"
        and payload["status"] != "decommissioned"
        and payload["cumulative_cost"] >= threshold
    ]
    plates.sort(key=lambda p: (-p["cumulative_cost"], p["id"]))
    return [p["id"] for p in plates]


def read_journal(store_dir) -> str:
    from pathlib import Path

    return (Path(store_dir) / "journal.jsonl").read_text(encoding="utf-8")
