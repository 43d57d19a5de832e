// Payload shapes of the course service API. The UI renders these verbatim;
// it never grades or recolors anything on its own.

export type StatusColor = string;

export interface TaskNode {
  id: string;
  title: string;
  kind: "theory" | "quiz" | "code";
  status: string;
  status_color: StatusColor;
  current: boolean;
}

export interface LessonNode {
  id: string;
  title: string;
  kind: "plain" | "framework";
  tasks: TaskNode[];
}

export interface SectionNode {
  id: string;
  title: string;
  lessons: LessonNode[];
}

export interface ProgressSummary {
  total: number;
  solved: number;
  failed: number;
  percent_solved: number;
}

export interface CourseView {
  id: string;
  title: string;
  description: string;
  subject_language: string;
  current_task: string;
  sections: SectionNode[];
  progress: ProgressSummary;
}

export interface PlaceholderView {
  index: number;
  stub_text: string;
  hints: string[];
  span: [number, number] | null;
}

export interface FileView {
  path: string;
  workspace_path: string;
  placeholders: PlaceholderView[];
  placeholders_resolved: boolean;
}

export interface QuizView {
  mode: "single" | "multiple";
  options: { text: string }[];
}

export interface TaskView {
  id: string;
  title: string;
  kind: "theory" | "quiz" | "code";
  status: string;
  status_color: StatusColor;
  description: string;
  hints: string[];
  current: boolean;
  has_next: boolean;
  has_prev: boolean;
  files: FileView[];
  quiz?: QuizView;
}

export interface CheckDetails {
  first_diff_line?: number;
  expected_excerpt?: string;
  actual_excerpt?: string;
  violations?: string[];
}

export interface CheckResult {
  status: "solved" | "failed" | "error";
  message: string;
  checked_at: string;
  details?: CheckDetails;
}

export interface CheckResponse {
  result: CheckResult;
  status: string;
  status_color: StatusColor;
}

export interface Conflict {
  path: string;
  hunk_range: [number, number];
  resolution: string;
}

export interface NavigateResponse {
  new_task: string;
  conflicts: Conflict[];
}

export interface RunConfigView {
  name: string;
  command: string[];
  working_dir: string | null;
  env: Record<string, string>;
}

export interface ApiEvent {
  kind: "check_started" | "check_finished" | "status_changed" | "navigated";
  task_id: string | null;
  payload: unknown;
}

export interface StatusChangedPayload {
  status: string;
  status_color: StatusColor;
}
