import type { Api } from "../src/api.js";
import type {
  ApiEvent,
  CheckResponse,
  CourseView,
  NavigateResponse,
  RunConfigView,
  TaskView,
} from "../src/types.js";

export function makeCourse(): CourseView {
  return {
    id: "mock-course",
    title: "Mock Course",
    description: "",
    subject_language: "python",
    current_task: "s/l/t1",
    progress: { total: 4, solved: 1, failed: 1, percent_solved: 0.25 },
    sections: [
      {
        id: "s",
        title: "Section",
        lessons: [
          {
            id: "l",
            title: "Lesson",
            kind: "plain",
            tasks: [
              {
                id: "s/l/t1",
                title: "Theory",
                kind: "theory",
                status: "not_started",
                status_color: "gray",
                current: true,
              },
              {
                id: "s/l/t2",
                title: "Quiz",
                kind: "quiz",
                status: "in_progress",
                status_color: "blue",
                current: false,
              },
              {
                id: "s/l/t3",
                title: "Won",
                kind: "code",
                status: "solved",
                status_color: "green",
                current: false,
              },
              {
                id: "s/l/t4",
                title: "Lost",
                kind: "code",
                status: "failed",
                status_color: "red",
                current: false,
              },
            ],
          },
        ],
      },
    ],
  };
}

export function makeTask(overrides: Partial<TaskView> = {}): TaskView {
  return {
    id: "s/l/t1",
    title: "Theory",
    kind: "theory",
    status: "not_started",
    status_color: "gray",
    description: "# Welcome\n\nRead me.",
    hints: ["try the docs"],
    current: true,
    has_next: true,
    has_prev: false,
    files: [],
    ...overrides,
  };
}

export function quizTask(mode: "single" | "multiple" = "single"): TaskView {
  return makeTask({
    id: "s/l/t2",
    title: "Quiz",
    kind: "quiz",
    quiz: { mode, options: [{ text: "a" }, { text: "b" }, { text: "c" }] },
  });
}

export class MockApi implements Api {
  courseView = makeCourse();
  tasks = new Map<string, TaskView>();
  checkCalls: { id: string; selection?: number[] }[] = [];
  navigateResponse: NavigateResponse = { new_task: "s/l/t2", conflicts: [] };
  checkResponse: CheckResponse = {
    result: { status: "solved", message: "ok", checked_at: "t" },
    status: "solved",
    status_color: "green",
  };
  courseFetches = 0;
  failCourse = false;
  private handlers: ((event: ApiEvent) => void)[] = [];

  async course(): Promise<CourseView> {
    this.courseFetches += 1;
    if (this.failCourse) throw new Error("connection refused");
    return this.courseView;
  }

  async task(id: string): Promise<TaskView> {
    const task = this.tasks.get(id);
    if (!task) throw new Error(`no mock task ${id}`);
    return task;
  }

  async check(id: string, selection?: number[]): Promise<CheckResponse> {
    this.checkCalls.push({ id, selection });
    return this.checkResponse;
  }

  async navigate(): Promise<NavigateResponse> {
    return this.navigateResponse;
  }

  async reset(): Promise<void> {}

  async runConfigs(): Promise<RunConfigView[]> {
    return [];
  }

  events(onEvent: (event: ApiEvent) => void): () => void {
    this.handlers.push(onEvent);
    return () => {
      this.handlers = this.handlers.filter((h) => h !== onEvent);
    };
  }

  /** Push a server-sent event into every live subscription. */
  emit(event: ApiEvent): void {
    for (const handler of [...this.handlers]) handler(event);
  }
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
