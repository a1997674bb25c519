/** Wire types for the annotation service JSON API. */

export type AnnotationLabel = "none" | "duplication" | "repayment" | "skip";

export type LabelCounts = Record<AnnotationLabel, number>;

/** One side of a pair as served by the API. */
export interface PairSide {
  id: string;
  source_kind: string;
  text: string;
  /** UTC seconds. */
  created_at: number;
}

export interface PairPayload {
  pair_id: string;
  origin: PairSide;
  target: PairSide;
  similarity: number;
  similarity_bin: number;
  /** The token that evidenced the link, e.g. "#12769". */
  evidence_text: string;
  reference_kind: string;
  in_overlap: boolean;
}

/** GET /api/pairs/next */
export interface NextPairResponse {
  exhausted: boolean;
  pair?: PairPayload;
  labeled: number;
  total: number;
  counts: LabelCounts;
}

/** POST /api/labels */
export interface SubmitResponse {
  ok: boolean;
  pair_id: string;
  labeled: number;
  total: number;
  counts: LabelCounts;
}

/** GET /api/progress */
export interface ProgressResponse {
  total: number;
  overlap_size: number;
  annotators: Record<string, { labeled: number; counts: LabelCounts }>;
}

/** GET /api/agreement */
export interface AgreementResponse {
  overlap: number;
  kappa: number;
  band: string;
}

export const ALL_LABELS: readonly AnnotationLabel[] = [
  "duplication",
  "repayment",
  "none",
  "skip",
];

export function emptyCounts(): LabelCounts {
  return { none: 0, duplication: 0, repayment: 0, skip: 0 };
}
