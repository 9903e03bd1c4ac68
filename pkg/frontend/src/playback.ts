/** Playback protocol state: speed options, the 6-playback budget, and the
 * audio-time -> ultrasound-frame mapping.
 *
 * Starting a playback consumes one unit of the budget; changing speed or
 * scrubbing does not. Once the budget is exhausted the play control must
 * stay disabled.
 */

export const SPEED_OPTIONS = [1, 0.5, 0.25] as const;
export type Speed = (typeof SPEED_OPTIONS)[number];

export const DEFAULT_PLAYBACK_CAP = 6;

export class PlaybackState {
  speed: Speed = 1;
  playbacksUsed = 0;
  position = 0; // seconds from clip start

  constructor(readonly cap: number = DEFAULT_PLAYBACK_CAP) {}

  get remaining(): number {
    return this.cap - this.playbacksUsed;
  }

  get canPlay(): boolean {
    return this.playbacksUsed < this.cap;
  }

  /** Consume one playback; returns false (and changes nothing) at the cap. */
  startPlayback(): boolean {
    if (!this.canPlay) {
      return false;
    }
    this.playbacksUsed += 1;
    this.position = 0;
    return true;
  }

  setSpeed(speed: Speed): void {
    if (!SPEED_OPTIONS.includes(speed)) {
      throw new Error(`unsupported speed ${speed}`);
    }
    this.speed = speed;
  }
}

/** Index of the frame to show at time t: the latest frame timestamp <= t,
 * or the first frame before any timestamp. Timestamps are absolute (audio
 * clock); pass t on the same clock. */
export function frameIndexAt(t: number, frameTimes: number[]): number {
  let index = 0;
  for (let i = 0; i < frameTimes.length; i++) {
    if (frameTimes[i] <= t) {
      index = i;
    } else {
      break;
    }
  }
  return index;
}

/** Horizontal cursor position (0..1) across the spectrogram for clip time t. */
export function cursorFraction(t: number, duration: number): number {
  if (duration <= 0) {
    return 0;
  }
  return Math.min(1, Math.max(0, t / duration));
}
