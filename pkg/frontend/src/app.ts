// DOM shell: task queue on the left, the open task's candidates on the right.
// Keyboard-first: a=accept, x=reject, space=toggle, j/k=move, enter=submit,
// which keeps high-volume review (hundreds of answers per question) fast.

import { ApiClient, StaleTaskError } from "./api.js";
import { ReviewSession } from "./store.js";
import type { TaskSummary } from "./types.js";

export interface AppOptions {
  annotator: string;
}

export class App {
  private session: ReviewSession | null = null;
  private summaries: TaskSummary[] = [];
  private status = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly options: AppOptions,
  ) {}

  async start(): Promise<void> {
    document.addEventListener("keydown", (event) => this.onKey(event));
    await this.refreshList();
    this.render();
  }

  private async refreshList(): Promise<void> {
    this.summaries = await this.client.listTasks();
  }

  async openTask(questionId: string): Promise<void> {
    const task = await this.client.fetchTask(questionId);
    this.session = new ReviewSession(task);
    this.session.preAcceptMatches();
    this.status = "";
    this.render();
  }

  private async submit(): Promise<void> {
    if (!this.session) return;
    if (!this.session.complete) {
      this.status = `undecided: ${this.session.undecided.join(", ")}`;
      this.render();
      return;
    }
    const questionId = this.session.task.question_id;
    try {
      await this.client.submitDecisions(questionId, this.session.submission(this.options.annotator));
      this.status = `saved ${questionId}`;
      this.session = null;
      await this.refreshList();
      const nextOpen = this.summaries.find((s) => !s.complete);
      if (nextOpen) await this.openTask(nextOpen.question_id);
    } catch (error) {
      if (error instanceof StaleTaskError) {
        this.status = "task changed on the server; reloading";
        await this.openTask(questionId);
      } else {
        this.status = String(error);
      }
    }
    this.render();
  }

  private onKey(event: KeyboardEvent): void {
    if (!this.session) return;
    const handlers: Record<string, () => void> = {
      a: () => this.session?.accept(),
      x: () => this.session?.reject(),
      " ": () => this.session?.toggle(),
      j: () => this.session?.next(),
      k: () => this.session?.prev(),
      ArrowDown: () => this.session?.next(),
      ArrowUp: () => this.session?.prev(),
      Enter: () => void this.submit(),
    };
    const handler = handlers[event.key];
    if (handler) {
      event.preventDefault();
      handler();
      if (event.key !== "Enter") this.render();
    }
  }

  render(): void {
    this.root.replaceChildren(this.renderQueue(), this.renderTask());
  }

  private renderQueue(): HTMLElement {
    const panel = el("section", "queue");
    panel.append(el("h2", "", "Tasks"));
    for (const summary of this.summaries) {
      const row = el(
        "button",
        `task-row${summary.complete ? " done" : ""}`,
        `${summary.question_id} (${summary.decided}/${summary.candidates}) ${summary.question_text}`,
      );
      row.addEventListener("click", () => void this.openTask(summary.question_id));
      panel.append(row);
    }
    return panel;
  }

  private renderTask(): HTMLElement {
    const panel = el("section", "task");
    if (!this.session) {
      panel.append(el("p", "hint-text", "Select a task. Keys: a accept, x reject, space toggle, j/k move, enter submit."));
      if (this.status) panel.append(el("p", "status", this.status));
      return panel;
    }
    const task = this.session.task;
    panel.append(el("h2", "", task.question_text));
    panel.append(el("p", "gold", `Gold: ${task.gold_answers.join(" | ")}`));
    const list = el("ul", "candidates");
    task.candidates.forEach((candidate, index) => {
      const decision = this.session?.decisionFor(candidate.answer);
      const marks = [
        index === this.session?.cursor ? "cursor" : "",
        candidate.matched_gold ? "matched" : "",
        decision === true ? "accepted" : decision === false ? "rejected" : "undecided",
      ]
        .filter(Boolean)
        .join(" ");
      const label = decision === undefined ? "?" : decision ? "+" : "-";
      list.append(el("li", `candidate ${marks}`, `[${label}] ${candidate.answer} (${candidate.model})`));
    });
    panel.append(list);
    panel.append(
      el("p", "progress", `${task.candidates.length - this.session.undecided.length}/${task.candidates.length} decided`),
    );
    if (this.status) panel.append(el("p", "status", this.status));
    return panel;
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
