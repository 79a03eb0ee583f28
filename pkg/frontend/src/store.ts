// Review state for one task: a cursor over candidates plus pending decisions.
// A task is submittable only when every candidate has a decision.

import type { Candidate, Submission, TaskView } from "./types.js";

export class ReviewSession {
  readonly task: TaskView;
  private decisions: Map<string, boolean>;
  cursor = 0;

  constructor(task: TaskView) {
    this.task = task;
    this.decisions = new Map(Object.entries(task.decisions ?? {}));
  }

  get candidates(): Candidate[] {
    return this.task.candidates;
  }

  get current(): Candidate | undefined {
    return this.task.candidates[this.cursor];
  }

  decisionFor(answer: string): boolean | undefined {
    return this.decisions.get(answer);
  }

  get undecided(): string[] {
    return this.task.candidates.filter((c) => !this.decisions.has(c.answer)).map((c) => c.answer);
  }

  get complete(): boolean {
    return this.undecided.length === 0;
  }

  decide(answer: string, accepted: boolean): void {
    if (!this.task.candidates.some((c) => c.answer === answer)) {
      throw new Error(`no candidate named ${JSON.stringify(answer)}`);
    }
    this.decisions.set(answer, accepted);
  }

  /** Accept the candidate under the cursor and advance. */
  accept(): void {
    const candidate = this.current;
    if (!candidate) return;
    this.decide(candidate.answer, true);
    this.next();
  }

  /** Reject the candidate under the cursor and advance. */
  reject(): void {
    const candidate = this.current;
    if (!candidate) return;
    this.decide(candidate.answer, false);
    this.next();
  }

  /** Flip the current decision without advancing (undo-friendly). */
  toggle(): void {
    const candidate = this.current;
    if (!candidate) return;
    const previous = this.decisions.get(candidate.answer);
    this.decide(candidate.answer, previous === undefined ? true : !previous);
  }

  next(): void {
    if (this.cursor < this.task.candidates.length - 1) this.cursor += 1;
  }

  prev(): void {
    if (this.cursor > 0) this.cursor -= 1;
  }

  /** Pre-highlighted candidates default to accepted; the rest need a keypress. */
  preAcceptMatches(): void {
    for (const candidate of this.task.candidates) {
      if (candidate.matched_gold && !this.decisions.has(candidate.answer)) {
        this.decisions.set(candidate.answer, true);
      }
    }
  }

  submission(annotator: string): Submission {
    if (!this.complete) {
      throw new Error(`undecided candidates: ${this.undecided.join(", ")}`);
    }
    return {
      version: this.task.version,
      annotator,
      decisions: this.task.candidates.map((c) => ({
        answer: c.answer,
        accepted: this.decisions.get(c.answer) as boolean,
      })),
    };
  }
}
