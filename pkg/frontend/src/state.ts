import type {
  ApiEvent,
  CheckResult,
  Conflict,
  CourseView,
  StatusChangedPayload,
  TaskView,
} from "./types.js";

// Client-side view state. Statuses and colors are only ever written here
// from API payloads and stream events; the UI never computes its own.

export interface ViewState {
  course: CourseView | null;
  task: TaskView | null;
  pendingCheck: string | null;
  results: Map<string, CheckResult>;
  conflicts: Conflict[];
  error: string | null;
}

export type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = {
    course: null,
    task: null,
    pendingCheck: null,
    results: new Map(),
    conflicts: [],
    error: null,
  };
  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  setTaskStatus(taskId: string, status: string, color: string): void {
    const course = this.state.course;
    if (course) {
      for (const section of course.sections) {
        for (const lesson of section.lessons) {
          for (const task of lesson.tasks) {
            if (task.id === taskId) {
              task.status = status;
              task.status_color = color;
            }
          }
        }
      }
    }
    const task = this.state.task;
    if (task && task.id === taskId) {
      this.update({ task: { ...task, status, status_color: color } });
    } else {
      this.update({});
    }
  }

  markCurrent(taskId: string): void {
    const course = this.state.course;
    if (course) {
      course.current_task = taskId;
      for (const section of course.sections) {
        for (const lesson of section.lessons) {
          for (const task of lesson.tasks) {
            task.current = task.id === taskId;
          }
        }
      }
    }
    this.update({});
  }

  applyEvent(event: ApiEvent): void {
    switch (event.kind) {
      case "check_started":
        if (event.task_id) this.update({ pendingCheck: event.task_id });
        break;
      case "check_finished": {
        const result = event.payload as CheckResult;
        if (event.task_id) {
          this.state.results.set(event.task_id, result);
          this.update({
            pendingCheck: this.state.pendingCheck === event.task_id ? null : this.state.pendingCheck,
          });
        }
        break;
      }
      case "status_changed": {
        const payload = event.payload as StatusChangedPayload;
        if (event.task_id) this.setTaskStatus(event.task_id, payload.status, payload.status_color);
        break;
      }
      case "navigated":
        if (event.task_id) this.markCurrent(event.task_id);
        break;
    }
  }
}
