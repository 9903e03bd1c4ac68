import { describe, expect, it } from "vitest";

import { PlaybackState, SPEED_OPTIONS, cursorFraction, frameIndexAt } from "../src/playback.js";

describe("PlaybackState", () => {
  it("offers exactly the protocol speeds", () => {
    expect([...SPEED_OPTIONS]).toEqual([1, 0.5, 0.25]);
  });

  it("consumes the budget only when playback starts", () => {
    const state = new PlaybackState(6);
    expect(state.canPlay).toBe(true);
    state.setSpeed(0.5);
    state.setSpeed(0.25);
    expect(state.playbacksUsed).toBe(0); // speed changes are free
    expect(state.startPlayback()).toBe(true);
    expect(state.playbacksUsed).toBe(1);
  });

  it("disallows the seventh playback", () => {
    const state = new PlaybackState(6);
    for (let i = 0; i < 6; i++) {
      expect(state.startPlayback()).toBe(true);
    }
    expect(state.canPlay).toBe(false);
    expect(state.startPlayback()).toBe(false);
    expect(state.playbacksUsed).toBe(6);
  });

  it("rejects unknown speeds", () => {
    const state = new PlaybackState();
    expect(() => state.setSpeed(2 as never)).toThrow();
  });
});

describe("frame synchronization", () => {
  const times = [0.1, 0.2, 0.3, 0.4];

  it("shows the latest frame with timestamp <= t", () => {
    expect(frameIndexAt(0.05, times)).toBe(0); // before the first frame
    expect(frameIndexAt(0.1, times)).toBe(0);
    expect(frameIndexAt(0.25, times)).toBe(1);
    expect(frameIndexAt(0.3, times)).toBe(2);
    expect(frameIndexAt(9.0, times)).toBe(3);
  });

  it("property: chosen frame never has a timestamp after t", () => {
    for (let k = 0; k < 200; k++) {
      const t = Math.random();
      const idx = frameIndexAt(t, times);
      if (times[idx] > t) {
        expect(idx).toBe(0); // only allowed before any frame exists
      }
      if (idx + 1 < times.length) {
        expect(times[idx + 1] > t || times[idx] <= t).toBe(true);
      }
    }
  });

  it("cursor fraction clamps to [0, 1]", () => {
    expect(cursorFraction(-1, 2)).toBe(0);
    expect(cursorFraction(1, 2)).toBe(0.5);
    expect(cursorFraction(5, 2)).toBe(1);
    expect(cursorFraction(1, 0)).toBe(0);
  });
});
