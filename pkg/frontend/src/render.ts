/** HTML renderers. Pure string functions so they test without a DOM. */

import { KEY_TO_LABEL, UNDO_KEY } from "./keymap.js";
import type { ViewState } from "./state.js";
import { ALL_LABELS, type LabelCounts, type PairPayload, type PairSide } from "./types.js";

const BADGES: Readonly<Record<string, string>> = {
  comment_added: "comment[added]",
  comment_deleted: "comment[deleted]",
  commit_message: "commit",
  issue_summary: "issue:summary",
  issue_description: "issue:description",
  issue_comment: "issue:comment",
  pull_summary: "pull:summary",
  pull_description: "pull:description",
  pull_comment: "pull:comment",
};

export function sourceKindBadge(kind: string): string {
  return BADGES[kind] ?? kind;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Wrap every literal occurrence of the evidence token in a mark element. */
export function highlightEvidence(text: string, evidence: string): string {
  const escaped = escapeHtml(text);
  if (evidence === "") {
    return escaped;
  }
  const needle = escapeHtml(evidence);
  return escaped.split(needle).join(`<mark class="evidence">${needle}</mark>`);
}

export function formatTimestamp(epochSeconds: number): string {
  const iso = new Date(epochSeconds * 1000).toISOString();
  return `${iso.slice(0, 10)} ${iso.slice(11, 16)} UTC`;
}

function renderPanel(side: PairSide, role: "origin" | "target", evidence: string): string {
  return [
    `<section class="panel ${role}">`,
    `<header><span class="badge">${escapeHtml(sourceKindBadge(side.source_kind))}</span>`,
    `<time>${formatTimestamp(side.created_at)}</time></header>`,
    `<p class="text">${highlightEvidence(side.text, evidence)}</p>`,
    `<footer class="artifact-id">${escapeHtml(side.id)}</footer>`,
    `</section>`,
  ].join("");
}

export function renderPair(pair: PairPayload, storedLabel: string | null = null): string {
  const chips = [
    `<span class="similarity">similarity ${pair.similarity.toFixed(2)}</span>`,
    `<span class="reference">via ${escapeHtml(pair.reference_kind)}</span>`,
  ];
  if (pair.in_overlap) {
    chips.push(`<span class="overlap">agreement pair</span>`);
  }
  if (storedLabel !== null) {
    chips.push(`<span class="stored-label">stored: ${escapeHtml(storedLabel)}</span>`);
  }
  return [
    `<div class="pair" data-pair-id="${escapeHtml(pair.pair_id)}">`,
    `<div class="pair-meta">${chips.join(" ")}</div>`,
    `<div class="panes">`,
    renderPanel(pair.origin, "origin", pair.evidence_text),
    renderPanel(pair.target, "target", pair.evidence_text),
    `</div>`,
    `</div>`,
  ].join("");
}

/** Completion screen with the per-class tallies for this annotator. */
export function renderComplete(counts: LabelCounts, total: number): string {
  const rows = ALL_LABELS.map(
    (label) => `<div class="tally"><dt>${label}</dt><dd>${counts[label]}</dd></div>`,
  );
  return [
    `<div class="complete">`,
    `<h2>All pairs labeled</h2>`,
    `<p>You labeled all ${total} pairs in this sample.</p>`,
    `<dl class="tallies">${rows.join("")}</dl>`,
    `</div>`,
  ].join("");
}

export function renderToast(message: string): string {
  return `<div class="toast" role="alert">${escapeHtml(message)}</div>`;
}

function renderKeyHelp(): string {
  const parts = Object.entries(KEY_TO_LABEL).map(
    ([key, label]) => `<b>${key}</b> ${label}`,
  );
  parts.push(`<b>${UNDO_KEY}</b> undo`);
  return `<div class="key-help">${parts.join(" / ")}</div>`;
}

/** Draw one frame of the whole screen from the session state. */
export function renderSession(view: ViewState): string {
  const header = [
    `<header class="status">`,
    `<span class="annotator">${escapeHtml(view.annotator)}</span>`,
    `<span class="progress">${view.labeled} / ${view.total} labeled</span>`,
    `</header>`,
  ].join("");
  const parts = [header];
  if (view.toast !== null) {
    parts.push(renderToast(view.toast));
  }
  if (view.current !== null) {
    parts.push(renderPair(view.current, view.storedLabel));
    parts.push(renderKeyHelp());
  } else if (view.exhausted) {
    parts.push(renderComplete(view.counts, view.total));
  } else {
    parts.push(`<p class="loading">Loading the next pair</p>`);
  }
  return parts.join("");
}
