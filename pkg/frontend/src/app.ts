/** Bootstrap: read the configured manifest, start a session for the
 * annotator id in the query string (or the login box), and run the loop. */

import { AnnotationApi } from "./api.js";
import { SessionController, createSessionView } from "./session.js";

export async function startApp(root: HTMLElement, api = new AnnotationApi()): Promise<SessionController> {
  const params = new URLSearchParams(window.location.search);
  const annotator = params.get("annotator") ?? "anonymous";
  const seed = Number(params.get("seed") ?? "0");

  const manifest = await api.manifest();
  const view = createSessionView(document);
  root.innerHTML = "";
  root.appendChild(view.root);
  const controller = new SessionController(api, view, document);
  await controller.start(annotator, seed, manifest.items);
  return controller;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void startApp(document.getElementById("app") as HTMLElement);
}
