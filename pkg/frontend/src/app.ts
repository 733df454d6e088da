/** DOM wiring: poll the control API, render the grid, drive the verdict form.
 *
 * Polling every 2 s; on connection loss the banner appears and the last
 * snapshot stays on screen until the API answers again.
 */

import { ApiClient, ApiError } from "./api.js";
import { buildGrid, renderGridHtml } from "./grid.js";
import { VerdictQueue } from "./queue.js";
import type { AttemptDetail } from "./types.js";

const POLL_MS = 2000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function escapeHtml(raw: string): string {
  return raw.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderDetail(detail: AttemptDetail | null): string {
  if (!detail) return "<p>No attempts awaiting verdict.</p>";
  const info = detail.task_info ?? {};
  const checklist = (info.check?.checklist ?? [])
    .map((item) => `<li><label><input type="checkbox"> ${escapeHtml(item)}</label></li>`)
    .join("");
  const transcript = detail.transcript?.lines.map(([t, line]) => `${t.toFixed(1)}s  ${line}`).join("\n") ?? "";
  return `
    <h3>${escapeHtml(detail.id)}</h3>
    <p>${escapeHtml(info.title ?? detail.task)} (level ${detail.level})</p>
    <p class="description">${escapeHtml(info.description ?? "")}</p>
    <ul class="checklist">${checklist}</ul>
    <details open><summary>Generated code</summary><pre>${escapeHtml(detail.code ?? "")}</pre></details>
    <details><summary>Build log</summary><pre>${escapeHtml(detail.build?.log ?? "")}</pre></details>
    <details><summary>Serial transcript</summary><pre>${escapeHtml(transcript)}</pre></details>
  `;
}

export function startApp(baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  const queue = new VerdictQueue(api);
  const banner = el<HTMLDivElement>("banner");
  const gridHost = el<HTMLDivElement>("grid");
  const queueHost = el<HTMLDivElement>("queue-detail");
  const queueCount = el<HTMLSpanElement>("queue-count");
  const passButton = el<HTMLButtonElement>("verdict-pass");
  const failButton = el<HTMLButtonElement>("verdict-fail");
  const submitButton = el<HTMLButtonElement>("verdict-submit");
  const notesInput = el<HTMLTextAreaElement>("verdict-notes");
  const message = el<HTMLParagraphElement>("message");

  function syncForm(): void {
    submitButton.disabled = !queue.canSubmit();
    passButton.classList.toggle("chosen", queue.form?.verdict === "pass");
    failButton.classList.toggle("chosen", queue.form?.verdict === "fail");
  }

  async function poll(): Promise<void> {
    try {
      const [report, instances] = [await api.report(1), await api.instances()];
      gridHost.innerHTML = renderGridHtml(buildGrid(report, instances));
      await queue.refresh();
      queueCount.textContent = String(queue.length);
      queueHost.innerHTML = renderDetail(queue.currentDetail());
      banner.hidden = true;
      syncForm();
    } catch (err) {
      banner.hidden = false;  // keep the stale snapshot visible
      banner.textContent =
        err instanceof ApiError && err.status === 0
          ? "Control API unreachable; retrying..."
          : `Control API error: ${String(err)}; retrying...`;
    }
  }

  passButton.addEventListener("click", () => {
    queue.choose("pass");
    syncForm();
  });
  failButton.addEventListener("click", () => {
    queue.choose("fail");
    syncForm();
  });
  notesInput.addEventListener("input", () => queue.setNotes(notesInput.value));
  submitButton.addEventListener("click", () => {
    void (async () => {
      const outcome = await queue.submit();
      message.textContent =
        outcome.kind === "submitted"
          ? `Recorded verdict for ${outcome.attemptId}`
          : outcome.kind === "conflict"
            ? `Attempt ${outcome.attemptId} was already judged elsewhere; skipped.`
            : `Submit failed: ${outcome.message}`;
      notesInput.value = "";
      await poll();
    })();
  });

  void poll();
  setInterval(() => void poll(), POLL_MS);
}

declare global {
  interface Window {
    startHilbenchDashboard: typeof startApp;
  }
}

if (typeof window !== "undefined") {
  window.startHilbenchDashboard = startApp;
}
