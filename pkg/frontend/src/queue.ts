/** Verdict queue: walk awaiting-verdict attempts and submit judgments.
 *
 * The form enables submission only once pass or fail is chosen. A 409 on
 * submit means someone judged the attempt elsewhere; the queue refreshes
 * and skips it rather than retrying.
 */

import type { ApiClient } from "./api.js";
import type { AttemptDetail, AttemptSummary } from "./types.js";

export interface VerdictFormState {
  attemptId: string;
  checklist: string[];
  verdict: "pass" | "fail" | null;
  notes: string;
}

export type SubmitOutcome =
  | { kind: "submitted"; attemptId: string }
  | { kind: "conflict"; attemptId: string; message: string }
  | { kind: "error"; attemptId: string; message: string };

export class VerdictQueue {
  private pending: AttemptSummary[] = [];
  private detail: AttemptDetail | null = null;
  form: VerdictFormState | null = null;

  constructor(private readonly api: ApiClient) {}

  get length(): number {
    return this.pending.length;
  }

  current(): AttemptSummary | null {
    return this.pending[0] ?? null;
  }

  currentDetail(): AttemptDetail | null {
    return this.detail;
  }

  /** Re-pull the awaiting list and load the head attempt's detail. */
  async refresh(): Promise<void> {
    this.pending = await this.api.attempts("awaiting-verdict");
    await this.loadHead();
  }

  private async loadHead(): Promise<void> {
    const head = this.current();
    if (!head) {
      this.detail = null;
      this.form = null;
      return;
    }
    if (this.form?.attemptId === head.id) return;
    this.detail = await this.api.attemptDetail(head.id);
    this.form = {
      attemptId: head.id,
      checklist: this.detail.task_info?.check?.checklist ?? [],
      verdict: null,
      notes: "",
    };
  }

  choose(verdict: "pass" | "fail"): void {
    if (this.form) this.form.verdict = verdict;
  }

  setNotes(notes: string): void {
    if (this.form) this.form.notes = notes;
  }

  canSubmit(): boolean {
    return this.form?.verdict != null;
  }

  /** Submit the current form; advances the queue on success or conflict. */
  async submit(): Promise<SubmitOutcome> {
    const form = this.form;
    if (!form || form.verdict == null) {
      throw new Error("no verdict chosen");
    }
    const result = await this.api.submitVerdict(form.attemptId, form.verdict, form.notes);
    if (result.ok) {
      this.pending = this.pending.filter((a) => a.id !== form.attemptId);
      this.form = null;
      await this.loadHead();
      return { kind: "submitted", attemptId: form.attemptId };
    }
    if (result.conflict) {
      // Judged elsewhere: drop it and move on.
      this.form = null;
      await this.refresh();
      return { kind: "conflict", attemptId: form.attemptId, message: result.error ?? "already judged" };
    }
    return { kind: "error", attemptId: form.attemptId, message: result.error ?? "submit failed" };
  }
}
