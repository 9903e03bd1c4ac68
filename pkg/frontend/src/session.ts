/** Session flow: create (or resume) a session, loop items through the
 * player + rating form, keep the progress indicator in sync with the
 * service, and stop on the completion marker.
 *
 * Duplicated items render exactly like originals: the occurrence index is
 * tracked only for the submission payload, never shown, so the
 * intra-annotator measurement stays blind.
 */

import { AnnotationApi, ItemDescriptor, MediaBundle, SubmitResult } from "./api.js";
import { createPlayer } from "./player.js";
import { createRatingForm } from "./ratingForm.js";

export interface SessionView {
  root: HTMLElement;
  progress: HTMLElement;
  stage: HTMLElement;
}

export function createSessionView(doc: Document = document): SessionView {
  const root = doc.createElement("div");
  root.className = "session";
  const progress = doc.createElement("div");
  progress.className = "progress";
  const stage = doc.createElement("div");
  stage.className = "stage";
  root.appendChild(progress);
  root.appendChild(stage);
  return { root, progress, stage };
}

export class SessionController {
  sessionId = "";
  total = 0;
  private draft: { primary: number; secondary: number | null; comment: string | null } | null = null;

  constructor(
    private readonly api: AnnotationApi,
    private readonly view: SessionView,
    private readonly doc: Document = document,
  ) {}

  async start(annotatorId: string, seed: number, items: ItemDescriptor[]): Promise<void> {
    const info = await this.api.createSession(annotatorId, seed, items);
    this.sessionId = info.session_id;
    this.total = info.num_entries;
    await this.showCurrent();
  }

  async showCurrent(): Promise<void> {
    const next = await this.api.next(this.sessionId);
    this.view.progress.textContent = `${Math.min(next.position + 1, next.total)} / ${next.total}`;
    this.view.stage.innerHTML = "";
    if (next.complete) {
      const done = this.doc.createElement("p");
      done.className = "complete";
      done.textContent = "Session complete. Thank you!";
      this.view.progress.textContent = `${next.total} / ${next.total}`;
      this.view.stage.appendChild(done);
      return;
    }

    const item = next.item!;
    const occurrence = next.occurrence ?? 1;
    let bundle: MediaBundle;
    try {
      bundle = await this.api.bundle(next.media!.bundle);
    } catch {
      bundle = {
        audio: "", spectrogram: "", frames: [],
        timing: { frame_times: [], word_start: 0, word_end: 0, phone_start: 0, phone_end: 0, duration: 0 },
        target_prompt: item.target_prompt ?? "Please rate the target phone",
        substitution_prompt: item.substitution_prompt ?? "Please rate the expected substitution",
        word: item.word ?? "",
        playback_cap: next.playback_cap ?? 6,
      };
    }

    const player = createPlayer(bundle, this.doc);
    const form = createRatingForm({
      targetPrompt: bundle.target_prompt,
      substitutionPrompt: bundle.substitution_prompt,
      doc: this.doc,
      onSubmit: (fields) => {
        void this.submit(item.item_id, occurrence, player.state.playbacksUsed, fields, form.setError);
      },
    });
    if (this.draft) {
      // a failed network submit keeps the scores the annotator chose
      form.choosePrimary(this.draft.primary);
      if (this.draft.secondary !== null) {
        form.chooseSecondary(this.draft.secondary);
      }
      this.draft = null;
    }
    this.view.stage.appendChild(player.root);
    this.view.stage.appendChild(form.root);
  }

  private async submit(
    itemId: string,
    occurrence: number,
    playbacksUsed: number,
    fields: { primary: number; secondary: number | null; comment: string | null },
    setError: (m: string) => void,
  ): Promise<void> {
    let result: SubmitResult;
    try {
      result = await this.api.submitRating(this.sessionId, {
        item_id: itemId,
        occurrence,
        primary: fields.primary,
        secondary: fields.secondary,
        comment: fields.comment,
        playbacks_used: playbacksUsed,
      });
    } catch {
      this.draft = fields;
      setError("Network problem; your scores are kept. Try again.");
      return;
    }
    if (!result.accepted) {
      setError(`Rejected: ${result.reason ?? "unknown reason"}`);
      return;
    }
    await this.showCurrent();
  }
}
