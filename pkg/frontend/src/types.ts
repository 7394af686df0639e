/** Wire shapes for the maintenance API, mirrored field-for-field. */

export interface TaskCatalogEntry {
  code: string;
  label: string;
  default_cost: number;
}

export interface CompanyEntry {
  id: string;
  name: string;
}

export interface ConditionEntry {
  code: string;
  label: string;
}

export interface Catalogs {
  tasks: TaskCatalogEntry[];
  companies: CompanyEntry[];
  conditions: ConditionEntry[];
}

export type MaintenanceKind = "major" | "minor";

export interface SubmissionTask {
  task_code: string;
  cost?: number;
}

export interface CaptureSubmission {
  plate_id: string;
  company_id: string;
  arrival_conditions: string[];
  tasks: SubmissionTask[];
  kind: MaintenanceKind;
  date: string;
  operator_id: string;
}

export interface MaintenanceRow {
  id: string;
  plate_id: string;
  date: string;
  timestamp: string;
  company_id: string;
  arrival_conditions: string[];
  tasks: { task_code: string; cost: number }[];
  kind: MaintenanceKind;
  total_cost: number;
}

export interface PlateSnapshot {
  id: string;
  position: { bank: number; cell: number; slot: number };
  status: string;
  conditions: string[];
  cumulative_cost: number;
  registered_on: string;
  recent_maintenances: MaintenanceRow[];
}

export interface CaptureAccepted {
  maintenance_id: string;
  plate_cumulative_cost: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
