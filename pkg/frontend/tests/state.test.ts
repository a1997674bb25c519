import { describe, expect, it } from "vitest";

import { ApiError, type Api } from "../src/api.js";
import { AnnotationSession } from "../src/state.js";
import {
  emptyCounts,
  type AgreementResponse,
  type AnnotationLabel,
  type LabelCounts,
  type NextPairResponse,
  type PairPayload,
  type ProgressResponse,
  type SubmitResponse,
} from "../src/types.js";

function makePair(id: string): PairPayload {
  return {
    pair_id: id,
    origin: { id: `${id}:a`, source_kind: "issue_comment", text: "todo one", created_at: 1 },
    target: { id: `${id}:b`, source_kind: "commit_message", text: "todo two", created_at: 2 },
    similarity: 0.5,
    similarity_bin: 5,
    evidence_text: "#1",
    reference_kind: "issue_id",
    in_overlap: false,
  };
}

/** In-memory stand-in mirroring the service semantics the session relies on. */
class FakeApi implements Api {
  labels = new Map<string, AnnotationLabel>();
  audit: Array<{ pairId: string; label: AnnotationLabel }> = [];
  submissions = 0;
  rejectWith: string | null = null;
  countsOverride: LabelCounts | null = null;

  constructor(private pairs: PairPayload[]) {}

  private counts(): LabelCounts {
    if (this.countsOverride !== null) {
      return this.countsOverride;
    }
    const counts = emptyCounts();
    for (const label of this.labels.values()) {
      counts[label] += 1;
    }
    return counts;
  }

  async nextPair(): Promise<NextPairResponse> {
    const pending = this.pairs.find((p) => !this.labels.has(p.pair_id));
    const base = {
      labeled: this.labels.size,
      total: this.pairs.length,
      counts: this.counts(),
    };
    return pending ? { exhausted: false, pair: pending, ...base } : { exhausted: true, ...base };
  }

  async submitLabel(
    pairId: string,
    _annotator: string,
    label: AnnotationLabel,
  ): Promise<SubmitResponse> {
    this.submissions += 1;
    if (this.rejectWith !== null) {
      const message = this.rejectWith;
      this.rejectWith = null;
      throw new ApiError(message, 400);
    }
    if (!this.pairs.some((p) => p.pair_id === pairId)) {
      throw new ApiError(`unknown pair_id ${pairId}`, 404);
    }
    this.labels.set(pairId, label);
    this.audit.push({ pairId, label });
    return {
      ok: true,
      pair_id: pairId,
      labeled: this.labels.size,
      total: this.pairs.length,
      counts: this.counts(),
    };
  }

  async progress(): Promise<ProgressResponse> {
    throw new Error("not used by the session");
  }

  async agreement(): Promise<AgreementResponse> {
    throw new Error("not used by the session");
  }
}

function setup(ids: string[] = ["p1", "p2", "p3"]) {
  const api = new FakeApi(ids.map(makePair));
  const session = new AnnotationSession(api, "alice");
  return { api, session };
}

describe("AnnotationSession", () => {
  it("ignores label keys until a pair is loaded", async () => {
    const { api, session } = setup();
    await session.handleKey("d");
    expect(api.submissions).toBe(0);
    expect(session.ready).toBe(false);
  });

  it("labels the current pair and advances to the server's next", async () => {
    const { api, session } = setup();
    await session.start();
    expect(session.current?.pair_id).toBe("p1");
    await session.handleKey("d");
    expect(api.audit).toEqual([{ pairId: "p1", label: "duplication" }]);
    expect(session.current?.pair_id).toBe("p2");
    expect(session.labeled).toBe(1);
    expect(session.counts.duplication).toBe(1);
  });

  it("maps every label key as documented", async () => {
    const { api, session } = setup(["p1", "p2", "p3", "p4"]);
    await session.start();
    for (const key of ["d", "r", "n", "s"]) {
      await session.handleKey(key);
    }
    expect(api.audit.map((entry) => entry.label)).toEqual([
      "duplication",
      "repayment",
      "none",
      "skip",
    ]);
  });

  it("never fabricates counts: whatever the server acks is shown", async () => {
    const { api, session } = setup();
    await session.start();
    api.countsOverride = { none: 0, duplication: 42, repayment: 0, skip: 0 };
    await session.handleKey("d");
    expect(session.counts.duplication).toBe(42);
  });

  it("keeps state unchanged and shows a toast when the server rejects", async () => {
    const { api, session } = setup();
    await session.start();
    api.rejectWith = "label 'q' not allowed; use one of duplication, none, repayment, skip";
    await session.handleKey("d");
    expect(session.toast).toContain("use one of duplication");
    expect(session.current?.pair_id).toBe("p1");
    expect(session.labeled).toBe(0);
    expect(api.audit).toEqual([]);

    await session.handleKey("r");
    expect(session.toast).toBeNull();
    expect(api.audit).toEqual([{ pairId: "p1", label: "repayment" }]);
  });

  it("undo re-queues the last pair as skip and shows it again", async () => {
    const { api, session } = setup();
    await session.start();
    await session.handleKey("d");
    expect(session.canUndo).toBe(true);
    await session.handleKey("u");
    expect(api.audit).toEqual([
      { pairId: "p1", label: "duplication" },
      { pairId: "p1", label: "skip" },
    ]);
    expect(session.current?.pair_id).toBe("p1");
    expect(session.storedLabel).toBe("skip");
    expect(session.canUndo).toBe(false);
  });

  it("undo buffer is depth one", async () => {
    const { api, session } = setup();
    await session.start();
    await session.handleKey("d");
    await session.handleKey("u");
    const submissionsAfterUndo = api.submissions;
    await session.handleKey("u");
    expect(api.submissions).toBe(submissionsAfterUndo);
  });

  it("undo before any label is inert", async () => {
    const { api, session } = setup();
    await session.start();
    await session.handleKey("u");
    expect(api.submissions).toBe(0);
    expect(session.current?.pair_id).toBe("p1");
  });

  it("relabeling after undo overwrites the effective label", async () => {
    const { api, session } = setup();
    await session.start();
    for (const key of ["d", "u", "n"]) {
      await session.handleKey(key);
    }
    expect(api.audit.map((entry) => entry.label)).toEqual(["duplication", "skip", "none"]);
    expect(api.labels.get("p1")).toBe("none");
    expect(session.current?.pair_id).toBe("p2");
    expect(session.storedLabel).toBeNull();
  });

  it("reaches the exhausted state and can still undo out of it", async () => {
    const { session } = setup(["p1", "p2"]);
    await session.start();
    await session.handleKey("d");
    await session.handleKey("r");
    expect(session.exhausted).toBe(true);
    expect(session.current).toBeNull();

    await session.handleKey("u");
    expect(session.exhausted).toBe(false);
    expect(session.current?.pair_id).toBe("p2");
  });

  it("ignores unknown keys and label keys while exhausted", async () => {
    const { api, session } = setup(["p1"]);
    await session.start();
    await session.handleKey("x");
    expect(api.submissions).toBe(0);
    await session.handleKey("d");
    expect(session.exhausted).toBe(true);
    const submissions = api.submissions;
    await session.handleKey("d");
    expect(api.submissions).toBe(submissions);
  });
});
