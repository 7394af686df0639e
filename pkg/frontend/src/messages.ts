/** Operator-readable wording for machine deny codes. */

const DENY_MESSAGES: Record<string, string> = {
  SAME_DATE: "This plate already has a maintenance recorded for that date.",
  CRITICAL_POINT:
    "This plate has reached its maintenance cost limit and should be flagged for replacement.",
  CONDITION_BLOCKED: "The plate's current condition does not allow maintenance.",
  PLATE_DECOMMISSIONED: "This plate is decommissioned and cannot be maintained.",
  NOT_FOUND: "No plate with that id is registered.",
};

export function denyMessage(code: string): string {
  return DENY_MESSAGES[code] ?? `The submission was refused (${code}).`;
}

export function hasSpecificMessage(code: string): boolean {
  return code in DENY_MESSAGES;
}
