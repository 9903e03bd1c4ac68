import { beforeEach, describe, expect, it } from "vitest";

import { AnnotationApi } from "../src/api.js";
import { SessionController, createSessionView } from "../src/session.js";
import { FakeAnnotationServer, buildPlaylist, makeItems } from "./fakeServer.js";

function harness(numItems: number) {
  const server = new FakeAnnotationServer();
  const api = new AnnotationApi("", server.fakeFetch);
  const view = createSessionView(document);
  document.body.innerHTML = "";
  document.body.appendChild(view.root);
  const controller = new SessionController(api, view, document);
  return { server, api, view, controller, items: makeItems(numItems) };
}

async function settle(): Promise<void> {
  // drain the microtask chain: submit -> refetch -> bundle -> render spans
  // a dozen awaits against the in-memory server
  for (let i = 0; i < 30; i++) {
    await Promise.resolve();
  }
}

function currentForm(view: { stage: HTMLElement }) {
  const form = view.stage.querySelector("form.rating-form");
  expect(form).not.toBeNull();
  return form as HTMLFormElement;
}

function clickScore(form: HTMLFormElement, row: string, value: number): void {
  const btn = form.querySelector(`.likert.${row} button[data-value="${value}"]`);
  expect(btn).not.toBeNull();
  (btn as HTMLButtonElement).click();
}

describe("duplicate injection arithmetic (protocol mirror)", () => {
  it("injects 20% rounded to nearest, after the originals", () => {
    for (const [n, dups] of [[120, 24], [10, 2], [7, 1]] as const) {
      const playlist = buildPlaylist(n, 3);
      expect(playlist.length).toBe(n + dups);
      expect(playlist.filter((e) => e.occurrence === 2).length).toBe(dups);
      for (const entry of playlist) {
        if (entry.occurrence === 2) {
          const first = playlist.findIndex((e) => e.itemIndex === entry.itemIndex && e.occurrence === 1);
          const second = playlist.findIndex((e) => e.itemIndex === entry.itemIndex && e.occurrence === 2);
          expect(second).toBeGreaterThan(first);
        }
      }
    }
  });
});

describe("session flow", () => {
  let h: ReturnType<typeof harness>;

  beforeEach(() => {
    h = harness(10);
  });

  it("progress indicator matches the service entry count", async () => {
    await h.controller.start("slt1", 5, h.items);
    await settle();
    expect(h.controller.total).toBe(12); // 10 items + 2 duplicates
    expect(h.view.progress.textContent).toBe("1 / 12");
  });

  it("duplicates render with no occurrence marker", async () => {
    await h.controller.start("slt1", 5, h.items);
    for (let step = 0; step < 12; step++) {
      await settle();
      const html = h.view.stage.innerHTML;
      expect(html).not.toMatch(/occurrence/i);
      expect(html).not.toMatch(/repeat/i);
      const form = currentForm(h.view);
      clickScore(form, "primary", 5);
      (form.querySelector("button.submit") as HTMLButtonElement).click();
      await settle();
    }
    expect(h.server.complete).toBe(true);
  });

  it("completes with exactly one rating per (item, occurrence)", async () => {
    await h.controller.start("slt1", 5, h.items);
    let guard = 0;
    while (!h.server.complete && guard++ < 50) {
      await settle();
      const form = currentForm(h.view);
      const wantSecondary = guard % 3 === 0;
      clickScore(form, "primary", wantSecondary ? 2 : 4);
      if (wantSecondary) {
        clickScore(form, "secondary", 5);
      }
      (form.querySelector("button.submit") as HTMLButtonElement).click();
      await settle();
    }
    expect(h.server.complete).toBe(true);
    expect(h.server.ratings.length).toBe(12);
    const keys = h.server.ratings.map((r) => `${r.item_id}#${r.occurrence}`);
    expect(new Set(keys).size).toBe(12);
    await settle();
    expect(h.view.stage.textContent).toContain("Session complete");
    expect(h.view.progress.textContent).toBe("12 / 12");
    // export shape: header + one row per (item, occurrence)
    const lines = h.server.exportCsv().trim().split("\n");
    expect(lines[0]).toBe("annotator,item,value,occurrence");
    expect(lines.length).toBe(13);
  });

  it("keeps the draft on network failure and retries cleanly", async () => {
    await h.controller.start("slt1", 5, h.items);
    await settle();
    let form = currentForm(h.view);
    clickScore(form, "primary", 2);
    clickScore(form, "secondary", 4);
    h.server.failNextSubmit = true;
    (form.querySelector("button.submit") as HTMLButtonElement).click();
    await settle();
    expect(h.server.ratings.length).toBe(0);
    const error = form.querySelector(".error") as HTMLElement;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain("scores are kept");
    // second attempt succeeds with the same scores
    (form.querySelector("button.submit") as HTMLButtonElement).click();
    await settle();
    expect(h.server.ratings.length).toBe(1);
    expect(h.server.ratings[0].primary).toBe(2);
    expect(h.server.ratings[0].secondary).toBe(4);
  });

  it("surfaces server rejections inline", async () => {
    await h.controller.start("slt1", 5, h.items);
    await settle();
    const form = currentForm(h.view);
    // bypass the client gate to prove the server answer is surfaced
    const api = new AnnotationApi("", h.server.fakeFetch);
    const result = await api.submitRating("fake-session", {
      item_id: "nonexistent:9",
      occurrence: 1,
      primary: 5,
      secondary: null,
      comment: null,
      playbacks_used: 0,
    });
    expect(result.accepted).toBe(false);
    expect(result.reason).toBe("out of order");
    expect(form).not.toBeNull();
  });
});
