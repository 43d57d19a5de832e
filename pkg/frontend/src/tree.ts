import type { CourseView } from "./types.js";

export interface TreeHandlers {
  onSelect(taskId: string): void;
}

// Course structure with per-task status colors, taken verbatim from the
// API payload (data-color + class); the current task is highlighted.
export function renderCourseTree(course: CourseView, handlers: TreeHandlers): HTMLElement {
  const root = document.createElement("nav");
  root.className = "course-tree";

  const title = document.createElement("h2");
  title.textContent = course.title;
  root.appendChild(title);

  const progress = document.createElement("div");
  progress.className = "tree-progress";
  progress.textContent = `${course.progress.solved} / ${course.progress.total} solved`;
  root.appendChild(progress);

  for (const section of course.sections) {
    const sectionEl = document.createElement("div");
    sectionEl.className = "tree-section";
    const sectionTitle = document.createElement("div");
    sectionTitle.className = "tree-section-title";
    sectionTitle.textContent = section.title;
    sectionEl.appendChild(sectionTitle);

    for (const lesson of section.lessons) {
      const lessonEl = document.createElement("div");
      lessonEl.className = "tree-lesson";
      const lessonTitle = document.createElement("div");
      lessonTitle.className = "tree-lesson-title";
      lessonTitle.textContent =
        lesson.kind === "framework" ? `${lesson.title} (framework)` : lesson.title;
      lessonEl.appendChild(lessonTitle);

      const list = document.createElement("ul");
      for (const task of lesson.tasks) {
        const item = document.createElement("li");
        item.className = `tree-task status-${task.status_color}`;
        if (task.current) item.classList.add("current");
        item.dataset.taskId = task.id;
        item.dataset.color = task.status_color;
        item.dataset.status = task.status;

        const dot = document.createElement("span");
        dot.className = "status-dot";
        dot.style.backgroundColor = task.status_color;
        item.appendChild(dot);

        const label = document.createElement("span");
        label.textContent = task.title;
        item.appendChild(label);

        item.addEventListener("click", () => handlers.onSelect(task.id));
        list.appendChild(item);
      }
      lessonEl.appendChild(list);
      sectionEl.appendChild(lessonEl);
    }
    root.appendChild(sectionEl);
  }
  return root;
}
