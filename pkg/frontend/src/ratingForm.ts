/** DOM rating form: primary/secondary Likert rows, comment box, submit.
 *
 * The secondary row is inserted exactly while primary <= 3 and its value
 * is cleared whenever the row is hidden. Keys 1-5 set the primary score
 * (shift+digit sets the secondary when visible). Server rejections are
 * surfaced inline; a network failure keeps the draft so nothing is lost.
 */

import { FormModel, canSubmit, emptyForm, needsSecondary, ratingFields, setPrimary, setSecondary } from "./form.js";

export interface RatingFormHandles {
  root: HTMLElement;
  model(): FormModel;
  submitButton: HTMLButtonElement;
  errorBox: HTMLElement;
  setError(message: string): void;
  /** Simulate choosing a score (used by click handlers and keyboard). */
  choosePrimary(value: number): void;
  chooseSecondary(value: number): void;
}

export interface RatingFormOptions {
  targetPrompt: string;
  substitutionPrompt: string;
  onSubmit(fields: { primary: number; secondary: number | null; comment: string | null }): void;
  doc?: Document;
}

function likertRow(doc: Document, name: string, onPick: (v: number) => void): HTMLElement {
  const row = doc.createElement("div");
  row.className = `likert ${name}`;
  for (let v = 1; v <= 5; v++) {
    const btn = doc.createElement("button");
    btn.dataset.value = String(v);
    btn.textContent = String(v);
    btn.addEventListener("click", () => onPick(v));
    row.appendChild(btn);
  }
  return row;
}

function markActive(row: HTMLElement, value: number | null): void {
  for (const btn of Array.from(row.querySelectorAll("button"))) {
    btn.classList.toggle("active", btn.dataset.value === String(value));
  }
}

export function createRatingForm(options: RatingFormOptions): RatingFormHandles {
  const doc = options.doc ?? document;
  let model = emptyForm();

  const root = doc.createElement("form");
  root.className = "rating-form";
  root.addEventListener("submit", (ev) => ev.preventDefault());

  const primaryPrompt = doc.createElement("p");
  primaryPrompt.className = "prompt primary-prompt";
  primaryPrompt.textContent = options.targetPrompt;
  root.appendChild(primaryPrompt);

  const primaryRow = likertRow(doc, "primary", (v) => choosePrimary(v));
  root.appendChild(primaryRow);

  const secondaryBlock = doc.createElement("div");
  secondaryBlock.className = "secondary-block";
  const secondaryPrompt = doc.createElement("p");
  secondaryPrompt.className = "prompt secondary-prompt";
  secondaryPrompt.textContent = options.substitutionPrompt;
  const secondaryRow = likertRow(doc, "secondary", (v) => chooseSecondary(v));
  secondaryBlock.appendChild(secondaryPrompt);
  secondaryBlock.appendChild(secondaryRow);
  // not attached until primary <= 3

  const comment = doc.createElement("textarea");
  comment.className = "comment";
  comment.placeholder = "Optional comment";
  comment.addEventListener("input", () => {
    model = { ...model, comment: comment.value };
  });
  root.appendChild(comment);

  const submitButton = doc.createElement("button");
  submitButton.className = "submit";
  submitButton.textContent = "Submit rating";
  submitButton.disabled = true;
  root.appendChild(submitButton);

  const errorBox = doc.createElement("p");
  errorBox.className = "error";
  errorBox.hidden = true;
  root.appendChild(errorBox);

  function refresh(): void {
    markActive(primaryRow, model.primary);
    markActive(secondaryRow, model.secondary);
    const wantSecondary = needsSecondary(model.primary);
    const attached = secondaryBlock.parentNode === root;
    if (wantSecondary && !attached) {
      root.insertBefore(secondaryBlock, comment);
    } else if (!wantSecondary && attached) {
      root.removeChild(secondaryBlock);
    }
    submitButton.disabled = !canSubmit(model);
  }

  function choosePrimary(value: number): void {
    model = setPrimary(model, value);
    refresh();
  }

  function chooseSecondary(value: number): void {
    model = setSecondary(model, value);
    refresh();
  }

  submitButton.addEventListener("click", () => {
    const fields = ratingFields({ ...model, comment: comment.value });
    if (fields === null) {
      return; // disabled button double-guard
    }
    errorBox.hidden = true;
    options.onSubmit(fields);
  });

  root.addEventListener("keydown", (ev) => {
    const key = (ev as KeyboardEvent).key;
    if (key >= "1" && key <= "5") {
      const value = Number(key);
      if ((ev as KeyboardEvent).shiftKey) {
        chooseSecondary(value);
      } else {
        choosePrimary(value);
      }
    }
  });

  refresh();
  return {
    root,
    model: () => ({ ...model, comment: comment.value }),
    submitButton,
    errorBox,
    setError(message: string): void {
      errorBox.textContent = message;
      errorBox.hidden = false;
    },
    choosePrimary,
    chooseSecondary,
  };
}
