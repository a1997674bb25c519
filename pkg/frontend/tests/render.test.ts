import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  formatTimestamp,
  highlightEvidence,
  renderComplete,
  renderPair,
  renderSession,
  sourceKindBadge,
} from "../src/render.js";
import type { ViewState } from "../src/state.js";
import { emptyCounts, type PairPayload } from "../src/types.js";

function makePair(overrides: Partial<PairPayload> = {}): PairPayload {
  return {
    pair_id: "acme:pair:0001",
    origin: {
      id: "acme:comment:cache:0",
      source_kind: "comment_added",
      text: "TODO drop the cache hack, duplicate of #12769",
      created_at: 1615000000,
    },
    target: {
      id: "acme:commit:abc:message",
      source_kind: "commit_message",
      text: "repay the cache debt promised in #12769",
      created_at: 1615100000,
    },
    similarity: 0.42,
    similarity_bin: 4,
    evidence_text: "#12769",
    reference_kind: "issue_id",
    in_overlap: false,
    ...overrides,
  };
}

function makeView(overrides: Partial<ViewState> = {}): ViewState {
  return {
    annotator: "alice",
    current: null,
    exhausted: false,
    labeled: 0,
    total: 5,
    counts: emptyCounts(),
    toast: null,
    storedLabel: null,
    canUndo: false,
    ...overrides,
  };
}

describe("sourceKindBadge", () => {
  it("labels comment and commit kinds like the annotation guide", () => {
    expect(sourceKindBadge("comment_added")).toBe("comment[added]");
    expect(sourceKindBadge("comment_deleted")).toBe("comment[deleted]");
    expect(sourceKindBadge("commit_message")).toBe("commit");
    expect(sourceKindBadge("issue_summary")).toBe("issue:summary");
    expect(sourceKindBadge("pull_comment")).toBe("pull:comment");
  });

  it("passes unknown kinds through unchanged", () => {
    expect(sourceKindBadge("mystery")).toBe("mystery");
  });
});

describe("escapeHtml", () => {
  it("escapes markup-significant characters", () => {
    expect(escapeHtml(`<b a="1">&'`)).toBe("&lt;b a=&quot;1&quot;&gt;&amp;&#39;");
  });
});

describe("highlightEvidence", () => {
  it("wraps every occurrence of the evidence token", () => {
    const html = highlightEvidence("see #12 and #12 again", "#12");
    expect(html).toBe(
      'see <mark class="evidence">#12</mark> and <mark class="evidence">#12</mark> again',
    );
  });

  it("leaves text alone when the evidence is empty or absent", () => {
    expect(highlightEvidence("plain text", "")).toBe("plain text");
    expect(highlightEvidence("plain text", "#99")).toBe("plain text");
  });

  it("matches evidence against the escaped text", () => {
    expect(highlightEvidence("a < b", "<")).toBe('a <mark class="evidence">&lt;</mark> b');
  });
});

describe("formatTimestamp", () => {
  it("renders UTC minutes", () => {
    expect(formatTimestamp(1615000000)).toBe("2021-03-06 03:06 UTC");
    expect(formatTimestamp(0)).toBe("1970-01-01 00:00 UTC");
  });
});

describe("renderPair", () => {
  it("shows side-by-side panels with badges, timestamps and ids", () => {
    const html = renderPair(makePair());
    expect(html).toContain('<section class="panel origin">');
    expect(html).toContain('<section class="panel target">');
    expect(html).toContain('<span class="badge">comment[added]</span>');
    expect(html).toContain('<span class="badge">commit</span>');
    expect(html).toContain("2021-03-06 03:06 UTC");
    expect(html).toContain("acme:comment:cache:0");
    expect(html).toContain('data-pair-id="acme:pair:0001"');
    expect(html).toContain("similarity 0.42");
  });

  it("highlights the evidence token in both texts", () => {
    const html = renderPair(makePair());
    const marks = html.split('<mark class="evidence">#12769</mark>').length - 1;
    expect(marks).toBe(2);
  });

  it("escapes artifact text instead of injecting it", () => {
    const html = renderPair(
      makePair({
        origin: {
          id: "x",
          source_kind: "issue_comment",
          text: '<script>alert("x")</script>',
          created_at: 0,
        },
      }),
    );
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("marks agreement pairs and a stored label after undo", () => {
    const html = renderPair(makePair({ in_overlap: true }), "skip");
    expect(html).toContain("agreement pair");
    expect(html).toContain("stored: skip");
  });
});

describe("renderComplete", () => {
  it("shows a per-class tally on the completion screen", () => {
    const html = renderComplete(
      { duplication: 2, repayment: 1, none: 1, skip: 1 },
      5,
    );
    expect(html).toContain("All pairs labeled");
    expect(html).toContain("<dt>duplication</dt><dd>2</dd>");
    expect(html).toContain("<dt>repayment</dt><dd>1</dd>");
    expect(html).toContain("<dt>none</dt><dd>1</dd>");
    expect(html).toContain("<dt>skip</dt><dd>1</dd>");
  });
});

describe("renderSession", () => {
  it("draws the current pair with key help and progress", () => {
    const html = renderSession(makeView({ current: makePair(), labeled: 2 }));
    expect(html).toContain("2 / 5 labeled");
    expect(html).toContain("alice");
    expect(html).toContain('<div class="key-help">');
    expect(html).toContain("<b>d</b> duplication");
    expect(html).toContain("<b>u</b> undo");
  });

  it("shows a toast with the server message when one is set", () => {
    const html = renderSession(
      makeView({ current: makePair(), toast: "label 'x' not allowed; use one of d, r" }),
    );
    expect(html).toContain('<div class="toast" role="alert">');
    expect(html).toContain("label &#39;x&#39; not allowed");
  });

  it("switches to the completion screen when exhausted", () => {
    const html = renderSession(
      makeView({ exhausted: true, labeled: 5, counts: { duplication: 2, repayment: 1, none: 1, skip: 1 } }),
    );
    expect(html).toContain("All pairs labeled");
    expect(html).not.toContain("key-help");
  });

  it("shows a loading state before the first pair arrives", () => {
    expect(renderSession(makeView())).toContain("Loading the next pair");
  });
});
