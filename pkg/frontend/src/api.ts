/** Thin fetch client for the annotation service. */

import type {
  AgreementResponse,
  AnnotationLabel,
  NextPairResponse,
  ProgressResponse,
  SubmitResponse,
} from "./types.js";

/** A non-2xx response, carrying the server's error message. */
export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The surface the session state machine needs; tests substitute fakes. */
export interface Api {
  nextPair(annotator: string): Promise<NextPairResponse>;
  submitLabel(
    pairId: string,
    annotator: string,
    label: AnnotationLabel,
  ): Promise<SubmitResponse>;
  progress(): Promise<ProgressResponse>;
  agreement(a: string, b: string): Promise<AgreementResponse>;
}

export class ApiClient implements Api {
  private readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const detail =
        body !== null &&
        typeof body === "object" &&
        typeof (body as { error?: unknown }).error === "string"
          ? (body as { error: string }).error
          : `${response.status} ${response.statusText}`;
      throw new ApiError(detail, response.status);
    }
    return body as T;
  }

  nextPair(annotator: string): Promise<NextPairResponse> {
    const query = encodeURIComponent(annotator);
    return this.request<NextPairResponse>(`/api/pairs/next?annotator=${query}`);
  }

  submitLabel(
    pairId: string,
    annotator: string,
    label: AnnotationLabel,
  ): Promise<SubmitResponse> {
    return this.request<SubmitResponse>("/api/labels", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ pair_id: pairId, annotator, label }),
    });
  }

  progress(): Promise<ProgressResponse> {
    return this.request<ProgressResponse>("/api/progress");
  }

  agreement(a: string, b: string): Promise<AgreementResponse> {
    const qa = encodeURIComponent(a);
    const qb = encodeURIComponent(b);
    return this.request<AgreementResponse>(`/api/agreement?a=${qa}&b=${qb}`);
  }
}
