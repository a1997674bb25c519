/** Session state machine behind the annotation screen.
 *
 * The server is the only source of truth: progress, counts, and the next
 * pair always come from API responses, never from local arithmetic. The
 * session merely remembers the pair on screen, a depth-one undo buffer, and
 * the last error toast.
 */

import { ApiError, type Api } from "./api.js";
import { KEY_TO_LABEL, UNDO_KEY, UNDO_LABEL } from "./keymap.js";
import {
  emptyCounts,
  type AnnotationLabel,
  type LabelCounts,
  type NextPairResponse,
  type PairPayload,
} from "./types.js";

interface UndoEntry {
  pair: PairPayload;
  submitted: AnnotationLabel;
}

/** Everything the renderer needs to draw one frame. */
export interface ViewState {
  annotator: string;
  current: PairPayload | null;
  exhausted: boolean;
  labeled: number;
  total: number;
  counts: LabelCounts;
  toast: string | null;
  /** Label stored server-side for the pair on screen, after an undo. */
  storedLabel: AnnotationLabel | null;
  canUndo: boolean;
}

export class AnnotationSession implements ViewState {
  current: PairPayload | null = null;
  exhausted = false;
  labeled = 0;
  total = 0;
  counts: LabelCounts = emptyCounts();
  toast: string | null = null;
  storedLabel: AnnotationLabel | null = null;

  private undoEntry: UndoEntry | null = null;

  constructor(
    private readonly api: Api,
    readonly annotator: string,
  ) {}

  /** Label keystrokes are inert until a pair is on screen. */
  get ready(): boolean {
    return this.current !== null;
  }

  get canUndo(): boolean {
    return this.undoEntry !== null;
  }

  /** Fetch the server-determined next pair; also how a refresh resumes. */
  async start(): Promise<void> {
    this.applyNext(await this.api.nextPair(this.annotator));
  }

  async handleKey(key: string): Promise<void> {
    const label = KEY_TO_LABEL[key];
    if (label !== undefined) {
      await this.submit(label);
      return;
    }
    if (key === UNDO_KEY) {
      await this.undo();
    }
  }

  private applyNext(next: NextPairResponse): void {
    this.labeled = next.labeled;
    this.total = next.total;
    this.counts = next.counts;
    this.exhausted = next.exhausted;
    this.current = next.pair ?? null;
    this.storedLabel = null;
  }

  private async submit(label: AnnotationLabel): Promise<void> {
    if (this.current === null) {
      return;
    }
    const pair = this.current;
    try {
      const ack = await this.api.submitLabel(pair.pair_id, this.annotator, label);
      this.labeled = ack.labeled;
      this.total = ack.total;
      this.counts = ack.counts;
      this.undoEntry = { pair, submitted: label };
      this.toast = null;
    } catch (err) {
      if (err instanceof ApiError) {
        // Rejected: keep the pair on screen and surface the server message,
        // which names the allowed labels.
        this.toast = err.message;
        return;
      }
      throw err;
    }
    this.applyNext(await this.api.nextPair(this.annotator));
  }

  private async undo(): Promise<void> {
    if (this.undoEntry === null) {
      return;
    }
    const { pair } = this.undoEntry;
    const ack = await this.api.submitLabel(pair.pair_id, this.annotator, UNDO_LABEL);
    this.labeled = ack.labeled;
    this.total = ack.total;
    this.counts = ack.counts;
    this.undoEntry = null;
    this.current = pair;
    this.exhausted = false;
    this.storedLabel = UNDO_LABEL;
    this.toast = null;
  }
}
