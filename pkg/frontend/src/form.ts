/** Likert rating form with the secondary-score gate.
 *
 * Mirrors the service's validation so the UI can never emit a request the
 * server would reject for rule violations: the secondary controls exist
 * exactly while primary <= 3 (and are cleared whenever they disappear),
 * submit stays disabled until the visible scores are all set, and the
 * playback counter is passed through from the player state.
 */

export const SECONDARY_THRESHOLD = 3;

export interface FormModel {
  primary: number | null;
  secondary: number | null;
  comment: string;
}

export function needsSecondary(primary: number | null): boolean {
  return primary !== null && primary <= SECONDARY_THRESHOLD;
}

export function setPrimary(model: FormModel, value: number): FormModel {
  if (!Number.isInteger(value) || value < 1 || value > 5) {
    return model; // ignore out-of-range input instead of entering a bad state
  }
  const next = { ...model, primary: value };
  if (!needsSecondary(value)) {
    next.secondary = null; // hidden controls are also cleared
  }
  return next;
}

export function setSecondary(model: FormModel, value: number): FormModel {
  if (!needsSecondary(model.primary)) {
    return model; // no secondary controls on screen; nothing to set
  }
  if (!Number.isInteger(value) || value < 1 || value > 5) {
    return model;
  }
  return { ...model, secondary: value };
}

export function canSubmit(model: FormModel): boolean {
  if (model.primary === null) {
    return false;
  }
  if (needsSecondary(model.primary) && model.secondary === null) {
    return false;
  }
  return true;
}

export function emptyForm(): FormModel {
  return { primary: null, secondary: null, comment: "" };
}

export interface RatingFields {
  primary: number;
  secondary: number | null;
  comment: string | null;
}

/** The validated payload fields, or null while the form is incomplete. */
export function ratingFields(model: FormModel): RatingFields | null {
  if (!canSubmit(model)) {
    return null;
  }
  return {
    primary: model.primary as number,
    secondary: needsSecondary(model.primary) ? model.secondary : null,
    comment: model.comment.trim() === "" ? null : model.comment.trim(),
  };
}
