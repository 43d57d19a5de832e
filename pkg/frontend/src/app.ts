import { Api, BoundaryError } from "./api.js";
import { renderCourseTree } from "./tree.js";
import { renderTaskPanel } from "./panel.js";
import { Store } from "./state.js";
import type { Conflict, RunConfigView } from "./types.js";

// Two-panel layout: course tree on the left, task panel on the right.
// Statuses and colors come exclusively from API payloads and stream events;
// checks stay pending until the stream delivers check_finished.

export class App {
  readonly store = new Store();
  private unsubscribe: (() => void) | null = null;
  private runConfigs: RunConfigView[] = [];

  constructor(
    private api: Api,
    private root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.root.innerHTML = "";
    this.root.appendChild(this.el("div", "tree-pane"));
    this.root.appendChild(this.el("div", "panel-pane"));
    this.root.appendChild(this.el("div", "overlay-pane"));
    this.store.subscribe(() => this.render());

    this.unsubscribe = this.api.events((event) => this.store.applyEvent(event));
    try {
      this.runConfigs = await this.api.runConfigs();
    } catch {
      this.runConfigs = [];
    }
    await this.loadCourse();
  }

  stop(): void {
    this.unsubscribe?.();
    this.unsubscribe = null;
  }

  private el(tag: string, className: string): HTMLElement {
    const node = document.createElement(tag);
    node.className = className;
    return node;
  }

  private async loadCourse(): Promise<void> {
    try {
      const course = await this.api.course();
      this.store.update({ course, error: null });
      await this.showTask(course.current_task);
    } catch (err) {
      this.store.update({ error: `Could not reach the course service: ${err}` });
    }
  }

  async showTask(taskId: string): Promise<void> {
    try {
      const task = await this.api.task(taskId);
      this.store.update({ task, error: null });
    } catch (err) {
      this.store.update({ error: `Could not load task ${taskId}: ${err}` });
    }
  }

  private async submitCheck(selection?: number[]): Promise<void> {
    const state = this.store.get();
    const task = state.task;
    if (!task || state.pendingCheck === task.id) return;
    this.store.update({ pendingCheck: task.id });
    try {
      await this.api.check(task.id, selection);
      // result and status arrive via check_finished / status_changed events
    } catch (err) {
      this.store.update({ pendingCheck: null });
      this.toast(`Check failed to run: ${err}`);
    }
  }

  private async navigate(direction: "next" | "prev"): Promise<void> {
    try {
      const moved = await this.api.navigate(direction);
      if (moved.conflicts.length) this.store.update({ conflicts: moved.conflicts });
      this.store.markCurrent(moved.new_task);
      await this.showTask(moved.new_task);
    } catch (err) {
      if (err instanceof BoundaryError) {
        this.toast("Already at the course boundary.");
      } else {
        this.toast(`Navigation failed: ${err}`);
      }
    }
  }

  private async resetTask(): Promise<void> {
    const task = this.store.get().task;
    if (!task) return;
    await this.api.reset(task.id);
    await this.showTask(task.id);
  }

  private toast(message: string): void {
    const overlay = this.root.querySelector(".overlay-pane");
    if (!overlay) return;
    const note = this.el("div", "toast");
    note.textContent = message;
    overlay.appendChild(note);
    setTimeout(() => note.remove(), 4000);
  }

  private conflictsWarning(conflicts: Conflict[]): HTMLElement {
    const warning = this.el("div", "conflict-warning");
    const heading = this.el("div", "conflict-heading");
    heading.textContent = "Some of your edits overlapped the task update; your versions were kept:";
    warning.appendChild(heading);
    const list = document.createElement("ul");
    for (const conflict of conflicts) {
      const item = document.createElement("li");
      item.textContent = `${conflict.path} (lines ${conflict.hunk_range[0]}-${conflict.hunk_range[1]})`;
      list.appendChild(item);
    }
    warning.appendChild(list);
    const dismiss = document.createElement("button");
    dismiss.className = "dismiss-conflicts";
    dismiss.textContent = "Dismiss";
    dismiss.addEventListener("click", () => this.store.update({ conflicts: [] }));
    warning.appendChild(dismiss);
    return warning;
  }

  private render(): void {
    const state = this.store.get();
    const treePane = this.root.querySelector(".tree-pane");
    const panelPane = this.root.querySelector(".panel-pane");
    const overlayPane = this.root.querySelector(".overlay-pane");
    if (!treePane || !panelPane || !overlayPane) return;

    if (state.error) {
      panelPane.innerHTML = "";
      const banner = this.el("div", "error-banner");
      banner.textContent = state.error;
      const retry = document.createElement("button");
      retry.className = "retry-button";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => void this.loadCourse());
      banner.appendChild(retry);
      panelPane.appendChild(banner);
      if (!state.course) treePane.innerHTML = "";
      return;
    }

    if (state.course) {
      treePane.innerHTML = "";
      treePane.appendChild(
        renderCourseTree(state.course, { onSelect: (taskId) => void this.showTask(taskId) }),
      );
      if (this.runConfigs.length) {
        const box = this.el("div", "run-configs");
        const heading = document.createElement("h3");
        heading.textContent = "Run configurations";
        box.appendChild(heading);
        for (const rc of this.runConfigs) {
          const entry = this.el("div", "run-config");
          const name = document.createElement("strong");
          name.textContent = rc.name;
          entry.appendChild(name);
          const command = document.createElement("code");
          command.textContent = rc.command.join(" ");
          entry.appendChild(command);
          box.appendChild(entry);
        }
        treePane.appendChild(box);
      }
    }
    if (state.task) {
      panelPane.innerHTML = "";
      panelPane.appendChild(
        renderTaskPanel(
          state.task,
          state.pendingCheck === state.task.id,
          state.results.get(state.task.id),
          {
            onCheck: (selection) => void this.submitCheck(selection),
            onNavigate: (direction) => void this.navigate(direction),
            onReset: () => void this.resetTask(),
          },
        ),
      );
    }

    const existing = overlayPane.querySelector(".conflict-warning");
    existing?.remove();
    if (state.conflicts.length) {
      overlayPane.appendChild(this.conflictsWarning(state.conflicts));
    }
  }
}
