/** Sample player: audio element driving the ultrasound frame strip and the
 * spectrogram cursor, with speed controls and the visible playback budget.
 */

import { MediaBundle } from "./api.js";
import { PlaybackState, SPEED_OPTIONS, Speed, cursorFraction, frameIndexAt } from "./playback.js";

export interface PlayerHandles {
  root: HTMLElement;
  state: PlaybackState;
  playButton: HTMLButtonElement;
  counter: HTMLElement;
  frameImage: HTMLImageElement;
  cursor: HTMLElement;
  retryButton: HTMLButtonElement;
  /** Move the view to clip-relative time t (also used by timeupdate). */
  seek(t: number): void;
}

export function createPlayer(bundle: MediaBundle, doc: Document = document): PlayerHandles {
  const state = new PlaybackState(bundle.playback_cap);
  const root = doc.createElement("div");
  root.className = "player";

  const frameImage = doc.createElement("img");
  frameImage.className = "ultrasound-frame";
  frameImage.src = bundle.frames[0] ?? "";
  root.appendChild(frameImage);

  const spectroBox = doc.createElement("div");
  spectroBox.className = "spectrogram";
  const spectro = doc.createElement("img");
  spectro.src = bundle.spectrogram;
  const cursor = doc.createElement("div");
  cursor.className = "cursor";
  cursor.style.left = "0%";
  spectroBox.appendChild(spectro);
  spectroBox.appendChild(cursor);
  root.appendChild(spectroBox);

  const audio = doc.createElement("audio");
  audio.src = bundle.audio;
  audio.preload = "auto";
  root.appendChild(audio);

  const controls = doc.createElement("div");
  controls.className = "controls";
  const playButton = doc.createElement("button");
  playButton.textContent = "Play";
  playButton.className = "play";
  controls.appendChild(playButton);

  for (const speed of SPEED_OPTIONS) {
    const btn = doc.createElement("button");
    btn.className = "speed";
    btn.dataset.speed = String(speed);
    btn.textContent = speed === 1 ? "1x" : `${speed}x`;
    btn.addEventListener("click", () => {
      state.setSpeed(speed as Speed);
      audio.playbackRate = speed;
      for (const other of Array.from(controls.querySelectorAll("button.speed"))) {
        other.classList.toggle("active", other === btn);
      }
    });
    if (speed === 1) {
      btn.classList.add("active");
    }
    controls.appendChild(btn);
  }

  const counter = doc.createElement("span");
  counter.className = "playbacks";
  controls.appendChild(counter);

  const retryButton = doc.createElement("button");
  retryButton.className = "retry";
  retryButton.textContent = "Retry loading media";
  retryButton.hidden = true;
  controls.appendChild(retryButton);
  root.appendChild(controls);

  function refreshCounter(): void {
    counter.textContent = `${state.remaining} of ${state.cap} playbacks left`;
    playButton.disabled = !state.canPlay;
  }

  function seek(t: number): void {
    state.position = t;
    // frame timestamps are on the audio clock; clip time 0 = word start
    const absolute = bundle.timing.word_start + t;
    frameImage.src = bundle.frames[frameIndexAt(absolute, bundle.timing.frame_times)] ?? "";
    cursor.style.left = `${(cursorFraction(t, bundle.timing.duration) * 100).toFixed(2)}%`;
  }

  playButton.addEventListener("click", () => {
    if (!state.startPlayback()) {
      refreshCounter();
      return;
    }
    refreshCounter();
    audio.currentTime = 0;
    seek(0);
    const playing = audio.play();
    if (playing && typeof playing.catch === "function") {
      playing.catch(() => {
        /* jsdom and autoplay-blocked browsers: the counter still stands,
           which matches the protocol (a started playback is consumed) */
      });
    }
  });

  audio.addEventListener("timeupdate", () => seek(audio.currentTime));
  audio.addEventListener("error", () => {
    retryButton.hidden = false;
  });
  retryButton.addEventListener("click", () => {
    // reloading media does not consume a playback
    retryButton.hidden = true;
    audio.load();
  });

  refreshCounter();
  seek(0);
  return { root, state, playButton, counter, frameImage, cursor, retryButton, seek };
}
