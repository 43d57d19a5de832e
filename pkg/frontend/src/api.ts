import type {
  ApiEvent,
  CheckResponse,
  CourseView,
  NavigateResponse,
  RunConfigView,
  TaskView,
} from "./types.js";

/** Raised for the 409 the service returns at the first/last task. */
export class BoundaryError extends Error {
  constructor() {
    super("at_course_boundary");
  }
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

/** Everything the UI needs from the backend; tests substitute a mock. */
export interface Api {
  course(): Promise<CourseView>;
  task(id: string): Promise<TaskView>;
  check(id: string, selection?: number[]): Promise<CheckResponse>;
  navigate(direction: "next" | "prev"): Promise<NavigateResponse>;
  reset(id: string): Promise<void>;
  runConfigs(): Promise<RunConfigView[]>;
  /** Subscribe to the live event stream; returns an unsubscribe function. */
  events(onEvent: (event: ApiEvent) => void): () => void;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status code
    }
    if (response.status === 409 && detail === "at_course_boundary") throw new BoundaryError();
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class HttpApi implements Api {
  constructor(private base = "") {}

  course(): Promise<CourseView> {
    return fetch(`${this.base}/api/course`).then((r) => asJson<CourseView>(r));
  }

  task(id: string): Promise<TaskView> {
    return fetch(`${this.base}/api/tasks/${id}`).then((r) => asJson<TaskView>(r));
  }

  check(id: string, selection?: number[]): Promise<CheckResponse> {
    return fetch(`${this.base}/api/tasks/${id}/check`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(selection === undefined ? {} : { selection }),
    }).then((r) => asJson<CheckResponse>(r));
  }

  navigate(direction: "next" | "prev"): Promise<NavigateResponse> {
    return fetch(`${this.base}/api/navigate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ direction }),
    }).then((r) => asJson<NavigateResponse>(r));
  }

  reset(id: string): Promise<void> {
    return fetch(`${this.base}/api/tasks/${id}/reset`, { method: "POST" }).then(
      (r) => asJson(r) as Promise<void>,
    );
  }

  runConfigs(): Promise<RunConfigView[]> {
    return fetch(`${this.base}/api/runconfigs`).then((r) => asJson<RunConfigView[]>(r));
  }

  events(onEvent: (event: ApiEvent) => void): () => void {
    const source = new EventSource(`${this.base}/api/events`);
    source.onmessage = (message) => {
      try {
        onEvent(JSON.parse(message.data) as ApiEvent);
      } catch {
        // skip malformed frames; the stream keeps flowing
      }
    };
    return () => source.close();
  }
}
