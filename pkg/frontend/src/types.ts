// Wire types mirroring the serve-mode JSON API.

export interface TaskSummary {
  question_id: string;
  question_text: string;
  candidates: number;
  decided: number;
  complete: boolean;
}

export interface Candidate {
  answer: string;
  model: string;
  matched_gold: boolean;
}

export interface TaskView {
  question_id: string;
  question_text: string;
  gold_answers: string[];
  candidates: Candidate[];
  decisions: Record<string, boolean>;
  version: string;
}

export interface DecisionItem {
  answer: string;
  accepted: boolean;
}

export interface Submission {
  version: string;
  annotator: string;
  decisions: DecisionItem[];
}
