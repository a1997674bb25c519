/** Keyboard bindings for the annotation screen. */

import type { AnnotationLabel } from "./types.js";

export const KEY_TO_LABEL: Readonly<Partial<Record<string, AnnotationLabel>>> = {
  d: "duplication",
  r: "repayment",
  n: "none",
  s: "skip",
};

export const UNDO_KEY = "u";

/**
 * Undo cannot erase a row from the append-only store, so it re-queues the
 * pair by writing the neutral label and brings it back on screen.
 */
export const UNDO_LABEL: AnnotationLabel = "skip";
