import { describe, expect, it } from "vitest";

import { canSubmit, emptyForm, needsSecondary, ratingFields, setPrimary, setSecondary } from "../src/form.js";
import { createRatingForm } from "../src/ratingForm.js";

describe("form model", () => {
  it("gates the secondary score at primary <= 3", () => {
    expect(needsSecondary(null)).toBe(false);
    expect(needsSecondary(1)).toBe(true);
    expect(needsSecondary(3)).toBe(true);
    expect(needsSecondary(4)).toBe(false);
  });

  it("clears the secondary when primary moves above 3", () => {
    let model = emptyForm();
    model = setPrimary(model, 2);
    model = setSecondary(model, 5);
    expect(model.secondary).toBe(5);
    model = setPrimary(model, 4);
    expect(model.secondary).toBeNull();
  });

  it("ignores secondary input while hidden", () => {
    let model = setPrimary(emptyForm(), 5);
    model = setSecondary(model, 3);
    expect(model.secondary).toBeNull();
  });

  it("blocks submission until the visible scores are set", () => {
    let model = emptyForm();
    expect(canSubmit(model)).toBe(false); // primary unset
    model = setPrimary(model, 3);
    expect(canSubmit(model)).toBe(false); // secondary required
    model = setSecondary(model, 4);
    expect(canSubmit(model)).toBe(true);
    expect(canSubmit(setPrimary(emptyForm(), 5))).toBe(true);
  });

  it("emits nulls for omitted fields", () => {
    const fields = ratingFields({ primary: 5, secondary: null, comment: "  " });
    expect(fields).toEqual({ primary: 5, secondary: null, comment: null });
    expect(ratingFields({ primary: 2, secondary: null, comment: "" })).toBeNull();
  });
});

describe("rating form DOM", () => {
  function build(onSubmit = (_: unknown) => {}) {
    return createRatingForm({
      targetPrompt: "Please rate the velar /k/ in 'cake'",
      substitutionPrompt: "Please rate the target phone for alveolar substitution",
      onSubmit,
    });
  }

  it("shows secondary controls exactly while primary <= 3", () => {
    const form = build();
    expect(form.root.querySelector(".secondary-block")).toBeNull();
    form.choosePrimary(3);
    expect(form.root.querySelector(".secondary-block")).not.toBeNull();
    expect(form.root.textContent).toContain("alveolar substitution");
    form.choosePrimary(4);
    expect(form.root.querySelector(".secondary-block")).toBeNull();
    expect(form.model().secondary).toBeNull(); // cleared, not just hidden
  });

  it("disables submit until the form is valid", () => {
    const form = build();
    expect(form.submitButton.disabled).toBe(true);
    form.choosePrimary(2);
    expect(form.submitButton.disabled).toBe(true);
    form.chooseSecondary(5);
    expect(form.submitButton.disabled).toBe(false);
  });

  it("keyboard shortcuts set scores", () => {
    const form = build();
    form.root.dispatchEvent(new KeyboardEvent("keydown", { key: "2", bubbles: true }));
    expect(form.model().primary).toBe(2);
    form.root.dispatchEvent(new KeyboardEvent("keydown", { key: "5", shiftKey: true, bubbles: true }));
    expect(form.model().secondary).toBe(5);
  });

  it("submits the validated fields", () => {
    const seen: unknown[] = [];
    const form = build((fields) => seen.push(fields));
    form.choosePrimary(1);
    form.chooseSecondary(4);
    form.submitButton.click();
    expect(seen).toEqual([{ primary: 1, secondary: 4, comment: null }]);
  });

  it("surfaces server rejections inline", () => {
    const form = build();
    form.setError("Rejected: playback limit");
    expect(form.errorBox.hidden).toBe(false);
    expect(form.errorBox.textContent).toContain("playback limit");
  });
});
