/** Payload shapes of the campaign control API this dashboard consumes. */

export interface StatusPayload {
  seq: number;
  states: Record<string, number>;
  instances: number;
  pending_instances: number;
  attempts: number;
  meta: CampaignMeta;
}

export interface CampaignMeta {
  platforms?: string[];
  modes?: string[];
  attempts?: number;
  instances?: number;
}

export interface AttemptStateView {
  state: string;
  outcome: string | null;
}

export interface InstanceRow {
  task: string;
  mode: string;
  platform: string;
  level: number;
  attempts: Record<string, AttemptStateView>;
}

export interface AttemptSummary {
  id: string;
  task: string;
  mode: string;
  platform: string;
  level: number;
  attempt: number;
  state: string;
  outcome: string | null;
}

export interface BehaviorCheckInfo {
  mode?: string;
  pattern?: string | null;
  checklist?: string[];
}

export interface TaskInfo {
  title?: string;
  description?: string;
  check?: BehaviorCheckInfo;
}

export interface BuildInfo {
  status: string;
  log: string;
  duration_s: number;
  exit_code: number | null;
}

export interface TranscriptInfo {
  lines: Array<[number, string]>;
}

export interface AttemptDetail extends AttemptSummary {
  code: string | null;
  build: BuildInfo | null;
  flash: BuildInfo | null;
  verdict: { verdict: string; notes: string } | null;
  transcript: TranscriptInfo | null;
  task_info: TaskInfo | null;
  assembly_error: string | null;
  incomplete_reason: string | null;
}

export interface TokenCell {
  input: string;
  output: string;
  manager: { input: string; output: string };
  coder: { input: string; output: string };
}

export interface ReportCell {
  cf: number;
  bf: number;
  bc: number;
  tokens: TokenCell;
}

/** mode -> platform -> level ("1" | "2" | "3" | "total") -> cell */
export interface ReportPayload {
  k: number;
  seq?: number;
  modes: Record<string, Record<string, Record<string, ReportCell>>>;
}

export interface VerdictResult {
  ok: boolean;
  conflict: boolean;
  status: number;
  error?: string;
  attempt?: AttemptSummary;
}
