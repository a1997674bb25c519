/** Browser entry point: wires the keyboard to the session state machine.
 *
 * Configuration comes from query parameters: ?annotator=alice names the
 * annotator, and an optional &server=http://host:port points at a service
 * other than the one that served this page.
 */

import { ApiClient } from "./api.js";
import { renderSession } from "./render.js";
import { AnnotationSession } from "./state.js";

function readConfig(): { annotator: string; server: string } {
  const params = new URLSearchParams(window.location.search);
  return {
    annotator: params.get("annotator") ?? "",
    server: params.get("server") ?? window.location.origin,
  };
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) {
    return;
  }
  const { annotator, server } = readConfig();
  if (annotator === "") {
    root.innerHTML =
      '<p class="config-hint">Add <code>?annotator=yourname</code> to the URL to start labeling.</p>';
    return;
  }
  const session = new AnnotationSession(new ApiClient(server), annotator);
  const redraw = (): void => {
    root.innerHTML = renderSession(session);
  };
  document.addEventListener("keydown", (event) => {
    if (event.altKey || event.ctrlKey || event.metaKey) {
      return;
    }
    void session
      .handleKey(event.key.toLowerCase())
      .then(redraw)
      .catch((err: unknown) => {
        session.toast = err instanceof Error ? err.message : String(err);
        redraw();
      });
  });
  try {
    await session.start();
  } catch (err) {
    session.toast = err instanceof Error ? err.message : String(err);
  }
  redraw();
}

void boot();
