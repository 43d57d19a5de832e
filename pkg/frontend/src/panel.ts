import { renderMarkdown } from "./markdown.js";
import type { CheckResult, TaskView } from "./types.js";

export interface PanelHandlers {
  onCheck(selection?: number[]): void;
  onNavigate(direction: "next" | "prev"): void;
  onReset(): void;
}

function hintBlock(text: string, index: number): HTMLElement {
  const details = document.createElement("details");
  details.className = "hint";
  const summary = document.createElement("summary");
  summary.textContent = `Hint ${index + 1}`;
  details.appendChild(summary);
  const body = document.createElement("div");
  body.innerHTML = renderMarkdown(text);
  details.appendChild(body);
  return details;
}

function quizControls(task: TaskView): HTMLElement {
  const quiz = task.quiz!;
  const form = document.createElement("form");
  form.className = "quiz";
  const type = quiz.mode === "single" ? "radio" : "checkbox";
  quiz.options.forEach((option, index) => {
    const label = document.createElement("label");
    label.className = "quiz-option";
    const input = document.createElement("input");
    input.type = type;
    input.name = "quiz-choice";
    input.value = String(index);
    label.appendChild(input);
    label.appendChild(document.createTextNode(option.text));
    form.appendChild(label);
  });
  return form;
}

export function selectedIndices(panel: HTMLElement): number[] {
  const inputs = panel.querySelectorAll<HTMLInputElement>(".quiz input:checked");
  return Array.from(inputs).map((input) => Number(input.value));
}

function fileList(task: TaskView): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "files";
  const heading = document.createElement("h3");
  heading.textContent = "Workspace files";
  wrap.appendChild(heading);
  const note = document.createElement("p");
  note.className = "files-note";
  note.textContent = "Edit these files with your own editor, then press Check.";
  wrap.appendChild(note);

  for (const file of task.files) {
    const entry = document.createElement("div");
    entry.className = "file-entry";
    const path = document.createElement("code");
    path.className = "file-path";
    path.textContent = file.workspace_path;
    entry.appendChild(path);

    if (!file.placeholders_resolved) {
      const warn = document.createElement("div");
      warn.className = "file-warning";
      warn.textContent =
        "Placeholders could not be located; reset the task if you removed too much.";
      entry.appendChild(warn);
    }
    file.placeholders.forEach((ph, index) => {
      const marker = document.createElement("div");
      marker.className = "placeholder-marker";
      marker.textContent =
        ph.span === null
          ? `Placeholder ${index + 1}: not located`
          : `Placeholder ${index + 1}: characters ${ph.span[0]}-${ph.span[1]}`;
      entry.appendChild(marker);
      ph.hints.forEach((hint, hintIndex) => entry.appendChild(hintBlock(hint, hintIndex)));
    });
    wrap.appendChild(entry);
  }
  return wrap;
}

function feedbackBox(result: CheckResult): HTMLElement {
  const box = document.createElement("div");
  box.className = `feedback feedback-${result.status}`;
  const message = document.createElement("div");
  message.className = "feedback-message";
  message.textContent = result.message;
  box.appendChild(message);
  const details = result.details;
  if (details?.violations?.length) {
    const list = document.createElement("ul");
    list.className = "violations";
    for (const violation of details.violations) {
      const item = document.createElement("li");
      item.textContent = violation;
      list.appendChild(item);
    }
    box.appendChild(list);
  }
  if (details?.first_diff_line !== undefined) {
    const diff = document.createElement("div");
    diff.className = "diff-info";
    diff.textContent = `First difference at line ${details.first_diff_line}`;
    box.appendChild(diff);
    for (const [label, text] of [
      ["expected", details.expected_excerpt],
      ["actual", details.actual_excerpt],
    ] as const) {
      if (!text) continue;
      const pre = document.createElement("pre");
      pre.className = `excerpt excerpt-${label}`;
      pre.textContent = `${label}:\n${text}`;
      box.appendChild(pre);
    }
  }
  return box;
}

export function renderTaskPanel(
  task: TaskView,
  pending: boolean,
  lastResult: CheckResult | undefined,
  handlers: PanelHandlers,
): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "task-panel";
  panel.dataset.taskId = task.id;

  const header = document.createElement("header");
  const title = document.createElement("h2");
  title.textContent = task.title;
  header.appendChild(title);
  const badge = document.createElement("span");
  badge.className = `status-badge status-${task.status_color}`;
  badge.dataset.color = task.status_color;
  badge.textContent = task.status.replace("_", " ");
  header.appendChild(badge);
  panel.appendChild(header);

  const description = document.createElement("div");
  description.className = "description";
  description.innerHTML = renderMarkdown(task.description);
  panel.appendChild(description);

  task.hints.forEach((hint, index) => panel.appendChild(hintBlock(hint, index)));

  if (task.quiz) panel.appendChild(quizControls(task));
  if (task.kind === "code") panel.appendChild(fileList(task));

  const actions = document.createElement("div");
  actions.className = "actions";

  const prev = document.createElement("button");
  prev.className = "nav-prev";
  prev.textContent = "Prev";
  prev.disabled = !task.has_prev;
  prev.addEventListener("click", () => handlers.onNavigate("prev"));
  actions.appendChild(prev);

  const checkButton = document.createElement("button");
  checkButton.className = "check-button";
  checkButton.textContent = task.kind === "theory" ? "Mark as done" : "Check";
  checkButton.disabled = pending;
  checkButton.addEventListener("click", () => {
    if (checkButton.disabled) return;
    handlers.onCheck(task.quiz ? selectedIndices(panel) : undefined);
  });
  actions.appendChild(checkButton);

  if (task.kind === "code") {
    const reset = document.createElement("button");
    reset.className = "reset-button";
    reset.textContent = "Reset task";
    reset.addEventListener("click", () => handlers.onReset());
    actions.appendChild(reset);
  }

  const next = document.createElement("button");
  next.className = "nav-next";
  next.textContent = "Next";
  next.disabled = !task.has_next;
  next.addEventListener("click", () => handlers.onNavigate("next"));
  actions.appendChild(next);

  panel.appendChild(actions);

  if (pending) {
    const spinner = document.createElement("div");
    spinner.className = "checking-note";
    spinner.textContent = "Checking...";
    panel.appendChild(spinner);
  }
  if (lastResult) panel.appendChild(feedbackBox(lastResult));
  return panel;
}
