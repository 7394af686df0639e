/**
 * Entry form state and the validation gate.
 *
 * buildSubmission only runs behind canSubmit, so every payload this UI
 * emits satisfies the server's schema: non-empty plate/company/operator,
 * at least one task, a real kind, an ISO date.
 */

import type { CaptureSubmission, MaintenanceKind } from "./types.js";

export type FormStatus =
  | "editing"
  | "submitting"
  | "accepted"
  | "denied"
  | "queued_offline";

export interface EntryFormState {
  plateId: string;
  companyId: string;
  arrivalConditions: string[];
  taskCodes: string[];
  kind: MaintenanceKind;
  date: string;
  operatorId: string;
  status: FormStatus;
}

export function emptyForm(today: string, operatorId: string): EntryFormState {
  return {
    plateId: "",
    companyId: "",
    arrivalConditions: [],
    taskCodes: [],
    kind: "minor",
    date: today,
    operatorId,
    status: "editing",
  };
}

const ISO_DATE = /^\d{4}-\d{2}-\d{2}$/;

export function validationProblems(state: EntryFormState): string[] {
  const problems: string[] = [];
  if (state.plateId.trim() === "") problems.push("plate id is required");
  if (state.companyId === "") problems.push("select the company");
  if (state.taskCodes.length === 0) problems.push("select at least one task");
  if (!ISO_DATE.test(state.date)) problems.push("date must be YYYY-MM-DD");
  if (state.operatorId.trim() === "") problems.push("operator id is required");
  return problems;
}

export function canSubmit(state: EntryFormState): boolean {
  return state.status !== "submitting" && validationProblems(state).length === 0;
}

export function buildSubmission(state: EntryFormState): CaptureSubmission {
  const problems = validationProblems(state);
  if (problems.length > 0) {
    throw new Error(`form is not submittable: ${problems.join("; ")}`);
  }
  return {
    plate_id: state.plateId.trim(),
    company_id: state.companyId,
    arrival_conditions: [...state.arrivalConditions],
    tasks: state.taskCodes.map((task_code) => ({ task_code })),
    kind: state.kind,
    date: state.date,
    operator_id: state.operatorId.trim(),
  };
}
