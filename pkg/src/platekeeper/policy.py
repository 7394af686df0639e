"""Composable restriction policies deciding whether a proposed maintenance runs.

A policy is an immutable tree. Leaves are single restrictions (same-date,
critical cost point, blocked condition); `AllOf` combines with
deny-overrides, `AnyOf` with allow-overrides, and `ConditionException`
short-circuits to Allow for plates carrying a given condition tag. Trees
are built from JSON configs through a process-wide constructor registry
that is populated once at import and read-only afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Mapping, Union

from .domain import MaintenanceRecord, Money, Plate

MAX_TREE_DEPTH = 16

SAME_DATE = "SAME_DATE"
CRITICAL_POINT = "CRITICAL_POINT"
CONDITION_BLOCKED = "CONDITION_BLOCKED"


class MalformedPolicy(Exception):
    """A policy tree or config that violates structural rules."""


class UnknownPolicyType(MalformedPolicy):
    pass


class SchemaViolation(MalformedPolicy):
    pass


class DepthExceeded(MalformedPolicy):
    pass


class EmptyComposite(MalformedPolicy):
    pass


class Outcome(Enum):
    ALLOW = "allow"
    DENY = "deny"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    deny_code: str | None = None
    message: str | None = None

    def __post_init__(self) -> None:
        if (self.outcome is Outcome.DENY) != (self.deny_code is not None):
            raise ValueError("deny_code must be present iff outcome is Deny")

    @property
    def allowed(self) -> bool:
        return self.outcome is Outcome.ALLOW

    @staticmethod
    def allow() -> Verdict:
        return Verdict(Outcome.ALLOW)

    @staticmethod
    def deny(code: str, message: str | None = None) -> Verdict:
        return Verdict(Outcome.DENY, deny_code=code, message=message)


@dataclass(frozen=True)
class EvaluationContext:
    """Everything a restriction may look at: the plate, the proposal, and
    that plate's live history ordered by timestamp ascending."""

    plate: Plate
    proposal: MaintenanceRecord
    history: tuple[MaintenanceRecord, ...]

    def __post_init__(self) -> None:
        if self.proposal.plate_id != self.plate.id:
            raise ValueError("proposal must target the context plate")
        for record in self.history:
            if record.plate_id != self.plate.id:
                raise ValueError("history must only contain records for the context plate")


def _check_depth(depth: int) -> None:
    if depth > MAX_TREE_DEPTH:
        raise DepthExceeded(f"policy tree depth {depth} exceeds {MAX_TREE_DEPTH}")


@dataclass(frozen=True)
class SameDate:
    """Deny when the plate already has a maintenance on the proposal's date."""

    depth: int = field(init=False, compare=False, repr=False, default=1)


@dataclass(frozen=True)
class CriticalPoint:
    """Deny when the plate's cumulative cost has reached `max_cost`."""

    max_cost: Money
    depth: int = field(init=False, compare=False, repr=False, default=1)


@dataclass(frozen=True)
class ConditionBlock:
    """Deny when the plate currently carries condition `tag`."""

    tag: str
    depth: int = field(init=False, compare=False, repr=False, default=1)


@dataclass(frozen=True)
class ConditionException:
    """Allow outright for plates carrying `tag`; otherwise defer to `child`."""

    tag: str
    child: PolicyNode
    depth: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "depth", 1 + self.child.depth)
        _check_depth(self.depth)


@dataclass(frozen=True)
class AllOf:
    """Deny-overrides: the first denying child wins; Allow only if all allow."""

    children: tuple[PolicyNode, ...]
    depth: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.children:
            raise EmptyComposite("all_of requires at least one child")
        object.__setattr__(self, "depth", 1 + max(c.depth for c in self.children))
        _check_depth(self.depth)


@dataclass(frozen=True)
class AnyOf:
    """Allow-overrides: Allow if any child allows; else the first child's denial."""

    children: tuple[PolicyNode, ...]
    depth: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.children:
            raise EmptyComposite("any_of requires at least one child")
        object.__setattr__(self, "depth", 1 + max(c.depth for c in self.children))
        _check_depth(self.depth)


PolicyNode = Union[SameDate, CriticalPoint, ConditionBlock, ConditionException, AllOf, AnyOf]


def eval_same_date(ctx: EvaluationContext) -> Verdict:
    if any(record.date == ctx.proposal.date for record in ctx.history):
        return Verdict.deny(
            SAME_DATE,
            f"plate {ctx.plate.id.value} already has a maintenance on {ctx.proposal.date.isoformat()}",
        )
    return Verdict.allow()


def eval_critical_point(max_cost: Money, ctx: EvaluationContext) -> Verdict:
    # The limit gates the plate's pre-existing cost; the proposal's own
    # cost is not added before comparing.
    if ctx.plate.cumulative_cost >= max_cost:
        return Verdict.deny(
            CRITICAL_POINT,
            f"plate {ctx.plate.id.value} cumulative cost {ctx.plate.cumulative_cost.amount} "
            f"has reached the critical point {max_cost.amount}",
        )
    return Verdict.allow()


def eval_condition_block(tag: str, ctx: EvaluationContext) -> Verdict:
    if tag in ctx.plate.conditions:
        return Verdict.deny(
            CONDITION_BLOCKED,
            f"plate {ctx.plate.id.value} has blocked condition '{tag}'",
        )
    return Verdict.allow()


def evaluate(node: PolicyNode, ctx: EvaluationContext) -> Verdict:
    """Evaluate a policy tree. Pure: never mutates node, ctx, or globals."""
    if isinstance(node, SameDate):
        return eval_same_date(ctx)
    if isinstance(node, CriticalPoint):
        return eval_critical_point(node.max_cost, ctx)
    if isinstance(node, ConditionBlock):
        return eval_condition_block(node.tag, ctx)
    if isinstance(node, ConditionException):
        if node.tag in ctx.plate.conditions:
            return Verdict.allow()
        return evaluate(node.child, ctx)
    if isinstance(node, AllOf):
        for child in node.children:
            verdict = evaluate(child, ctx)
            if not verdict.allowed:
                return verdict
        return Verdict.allow()
    if isinstance(node, AnyOf):
        first = evaluate(node.children[0], ctx)
        if first.allowed:
            return first
        for child in node.children[1:]:
            if evaluate(child, ctx).allowed:
                return Verdict.allow()
        return first
    raise TypeError(f"not a policy node: {node!r}")


# --- config-driven construction -------------------------------------------

PolicyConfig = Mapping[str, Any]


def _require_keys(config: Mapping[str, Any], allowed: set[str], path: str) -> None:
    extra = set(config) - allowed
    if extra:
        raise SchemaViolation(f"{path}: unexpected key(s) {sorted(extra)}")


def _build_same_date(config: Mapping[str, Any], path: str) -> PolicyNode:
    _require_keys(config, {"type"}, path)
    return SameDate()


def _build_critical_point(config: Mapping[str, Any], path: str) -> PolicyNode:
    _require_keys(config, {"type", "max_cost"}, path)
    max_cost = config.get("max_cost")
    if not isinstance(max_cost, int) or isinstance(max_cost, bool) or max_cost < 0:
        raise SchemaViolation(f"{path}.max_cost must be a non-negative integer")
    return CriticalPoint(max_cost=Money(max_cost))


def _build_condition_block(config: Mapping[str, Any], path: str) -> PolicyNode:
    _require_keys(config, {"type", "tag"}, path)
    tag = config.get("tag")
    if not isinstance(tag, str) or not tag:
        raise SchemaViolation(f"{path}.tag must be a non-empty string")
    return ConditionBlock(tag=tag)


def _build_condition_exception(config: Mapping[str, Any], path: str) -> PolicyNode:
    _require_keys(config, {"type", "tag", "child"}, path)
    tag = config.get("tag")
    if not isinstance(tag, str) or not tag:
        raise SchemaViolation(f"{path}.tag must be a non-empty string")
    if "child" not in config:
        raise SchemaViolation(f"{path}.child is required")
    return ConditionException(tag=tag, child=_build_node(config["child"], f"{path}.child"))


def _build_composite(kind: type, config: Mapping[str, Any], path: str) -> PolicyNode:
    _require_keys(config, {"type", "children"}, path)
    children = config.get("children")
    if not isinstance(children, list):
        raise SchemaViolation(f"{path}.children must be a list")
    if not children:
        raise EmptyComposite(f"{path}.children must be non-empty")
    built = tuple(
        _build_node(child, f"{path}.children[{i}]") for i, child in enumerate(children)
    )
    return kind(children=built)


Builder = Callable[[Mapping[str, Any], str], PolicyNode]

# Process-wide constructor registry: populated once here, read-only after.
_CONSTRUCTORS: Mapping[str, Builder] = MappingProxyType(
    {
        "same_date": _build_same_date,
        "critical_point": _build_critical_point,
        "condition_block": _build_condition_block,
        "condition_exception": _build_condition_exception,
        "all_of": lambda config, path: _build_composite(AllOf, config, path),
        "any_of": lambda config, path: _build_composite(AnyOf, config, path),
    }
)


def _build_node(config: Any, path: str) -> PolicyNode:
    if not isinstance(config, Mapping):
        raise SchemaViolation(f"{path}: policy node must be a JSON object")
    node_type = config.get("type")
    if not isinstance(node_type, str):
        raise SchemaViolation(f"{path}.type must be a string")
    builder = _CONSTRUCTORS.get(node_type)
    if builder is None:
        raise UnknownPolicyType(f"{path}: unknown policy type {node_type!r}")
    return builder(config, path)


def build_policy(config: PolicyConfig) -> PolicyNode:
    """Build an immutable policy tree from its JSON form.

    Raises UnknownPolicyType, SchemaViolation, DepthExceeded, or
    EmptyComposite; a tree that constructs is safe to evaluate.
    """
    return _build_node(config, "$")


def serialize_policy(node: PolicyNode) -> dict[str, Any]:
    """Inverse of build_policy: build_policy(serialize_policy(n)) == n."""
    if isinstance(node, SameDate):
        return {"type": "same_date"}
    if isinstance(node, CriticalPoint):
        return {"type": "critical_point", "max_cost": node.max_cost.amount}
    if isinstance(node, ConditionBlock):
        return {"type": "condition_block", "tag": node.tag}
    if isinstance(node, ConditionException):
        return {"type": "condition_exception", "tag": node.tag, "child": serialize_policy(node.child)}
    if isinstance(node, AllOf):
        return {"type": "all_of", "children": [serialize_policy(c) for c in node.children]}
    if isinstance(node, AnyOf):
        return {"type": "any_of", "children": [serialize_policy(c) for c in node.children]}
    raise TypeError(f"not a policy node: {node!r}")


# Default shipped config: both stated restrictions active at once. The
# critical point has no domain-sourced default; 500000 CLP is a config
# placeholder meant to be overridden per deployment.
DEFAULT_POLICY_CONFIG: dict[str, Any] = {
    "type": "all_of",
    "children": [
        {"type": "same_date"},
        {"type": "critical_point", "max_cost": 500_000},
    ],
}
