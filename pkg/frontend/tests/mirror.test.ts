/** Protocol-level fuzz of the form model: whatever sequence of UI actions
 * an annotator performs, a submittable form can never produce a payload the
 * service would reject for rule violations. */

import { describe, expect, it } from "vitest";

import { FormModel, canSubmit, emptyForm, ratingFields, setPrimary, setSecondary } from "../src/form.js";
import { PlaybackState } from "../src/playback.js";

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** The service's rating rules, restated independently of the UI code. */
function serverWouldReject(primary: number, secondary: number | null, playbacks: number): string | null {
  if (!Number.isInteger(primary) || primary < 1 || primary > 5) return "invalid primary";
  if (secondary !== null && (!Number.isInteger(secondary) || secondary < 1 || secondary > 5)) {
    return "invalid secondary";
  }
  if (primary <= 3 && secondary === null) return "secondary required";
  if (primary > 3 && secondary !== null) return "secondary forbidden";
  if (playbacks > 6) return "playback limit";
  return null;
}

describe("mirror validation fuzz", () => {
  it("no action sequence yields a payload the service rejects", () => {
    const rand = mulberry32(20240517);
    for (let trial = 0; trial < 500; trial++) {
      let model: FormModel = emptyForm();
      const playback = new PlaybackState(6);
      const steps = 1 + Math.floor(rand() * 12);
      for (let s = 0; s < steps; s++) {
        const action = Math.floor(rand() * 4);
        const value = Math.floor(rand() * 9) - 1; // deliberately includes junk (-1..7)
        if (action === 0) {
          model = setPrimary(model, value);
        } else if (action === 1) {
          model = setSecondary(model, value);
        } else if (action === 2) {
          playback.startPlayback(); // capped internally
        } else {
          model = { ...model, comment: rand() < 0.5 ? "note" : "" };
        }
      }
      if (!canSubmit(model)) {
        continue; // submit button disabled; nothing reaches the wire
      }
      const fields = ratingFields(model);
      expect(fields).not.toBeNull();
      const verdict = serverWouldReject(fields!.primary, fields!.secondary, playback.playbacksUsed);
      expect(verdict).toBeNull();
    }
  });
});
