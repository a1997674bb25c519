"""HTTP annotation service: serves sampled pairs, persists labels durably.

The label store is append-only JSONL; the effective label of a (pair,
annotator) is the last line for that key, so resubmissions overwrite while
the full audit trail is preserved. An optional seeded overlap subset is
served first to every annotator to measure inter-annotator agreement.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .evaluate import cohens_kappa, landis_koch_band
from .model import (
    ANNOTATION_LABELS,
    AnnotationRecord,
    SatdPair,
    read_jsonl,
    record_to_line,
)
from .pairs import bin_index

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".ico": "image/x-icon",
    ".svg": "image/svg+xml",
}

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>satd-link annotation</title></head>
<body><h1>satd-link annotation service</h1>
<p>No UI assets are installed. The JSON API is available under /api/.</p>
</body></html>
"""


class AnnotationStore:
    """Durable append-only JSONL store with single-writer serialization."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self.records: list[AnnotationRecord] = []
        self.effective: dict[tuple[str, str], str] = {}
        if self.path.exists():
            for record in read_jsonl(self.path, expected_type="annotation"):
                self._absorb(record)

    def _absorb(self, record: AnnotationRecord) -> None:
        self.records.append(record)
        self.effective[(record.pair_id, record.annotator)] = record.label

    def append(self, record: AnnotationRecord) -> None:
        """Write, flush, and fsync before acknowledging."""
        record.validate()
        line = record_to_line(record)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._absorb(record)

    def label_of(self, pair_id: str, annotator: str) -> str | None:
        with self._lock:
            return self.effective.get((pair_id, annotator))

    def labels_by(self, annotator: str) -> dict[str, str]:
        with self._lock:
            return {
                pair_id: label
                for (pair_id, who), label in self.effective.items()
                if who == annotator
            }


class AnnotationService:
    """Pair ordering, label bookkeeping, and agreement on top of the store."""

    def __init__(
        self,
        sample_path: str | Path,
        labels_path: str | Path,
        overlap_fraction: float = 0.0,
        seed: int = 0,
    ) -> None:
        if not 0.0 <= overlap_fraction <= 1.0:
            raise ValueError("overlap_fraction must be in [0, 1]")
        sample = read_jsonl(sample_path, expected_type="pair")
        if not sample:
            raise ValueError(f"sample file {sample_path} holds no pairs")
        self.pairs: dict[str, SatdPair] = {p.pair_id: p for p in sample}
        if len(self.pairs) != len(sample):
            raise ValueError("duplicate pair_id in sample")

        order = [p.pair_id for p in sample]
        overlap_count = round(overlap_fraction * len(order))
        overlap = set(random.Random(seed).sample(order, overlap_count))
        # The agreement subset is served first to every annotator.
        self.order: list[str] = [pid for pid in order if pid in overlap] + [
            pid for pid in order if pid not in overlap
        ]
        self.overlap: frozenset[str] = frozenset(overlap)
        self.store = AnnotationStore(labels_path)

    def _pair_payload(self, pair: SatdPair) -> dict:
        return {
            "pair_id": pair.pair_id,
            "origin": {
                "id": pair.origin.id,
                "source_kind": pair.origin.source_kind.value,
                "text": pair.origin.text,
                "created_at": pair.origin.created_at,
            },
            "target": {
                "id": pair.target.id,
                "source_kind": pair.target.source_kind.value,
                "text": pair.target.text,
                "created_at": pair.target.created_at,
            },
            "similarity": pair.similarity,
            "similarity_bin": bin_index(pair.similarity),
            "evidence_text": pair.via_link.evidence_text,
            "reference_kind": pair.via_link.reference_kind.value,
            "in_overlap": pair.pair_id in self.overlap,
        }

    def counts(self, annotator: str) -> dict[str, int]:
        tally = Counter(self.store.labels_by(annotator).values())
        return {label: tally.get(label, 0) for label in ANNOTATION_LABELS}

    def next_pair(self, annotator: str) -> dict:
        labeled = self.store.labels_by(annotator)
        for pid in self.order:
            if pid not in labeled:
                return {
                    "exhausted": False,
                    "pair": self._pair_payload(self.pairs[pid]),
                    "labeled": len(labeled),
                    "total": len(self.order),
                    "counts": self.counts(annotator),
                }
        return {
            "exhausted": True,
            "labeled": len(labeled),
            "total": len(self.order),
            "counts": self.counts(annotator),
        }

    def submit(self, pair_id: str, annotator: str, label: str, session: str = "") -> dict:
        if pair_id not in self.pairs:
            raise KeyError(pair_id)
        if label not in ANNOTATION_LABELS:
            raise ValueError(
                f"label {label!r} not allowed; use one of {', '.join(ANNOTATION_LABELS)}"
            )
        if not annotator:
            raise ValueError("annotator must be non-empty")
        self.store.append(
            AnnotationRecord(
                pair_id=pair_id,
                annotator=annotator,
                label=label,
                labeled_at=int(time.time()),
                session=session,
            )
        )
        labeled = self.store.labels_by(annotator)
        return {
            "ok": True,
            "pair_id": pair_id,
            "labeled": len(labeled),
            "total": len(self.order),
            "counts": self.counts(annotator),
        }

    def progress(self) -> dict:
        annotators = sorted({who for _, who in self.store.effective})
        return {
            "total": len(self.order),
            "overlap_size": len(self.overlap),
            "annotators": {
                who: {"labeled": len(self.store.labels_by(who)), "counts": self.counts(who)}
                for who in annotators
            },
        }

    def agreement(self, annotator_a: str, annotator_b: str) -> dict:
        """Kappa over the non-skip labels both annotators share."""
        labels_a = self.store.labels_by(annotator_a)
        labels_b = self.store.labels_by(annotator_b)
        shared = [
            pid
            for pid in self.order
            if labels_a.get(pid) not in (None, "skip")
            and labels_b.get(pid) not in (None, "skip")
        ]
        if not shared:
            raise ValueError(f"no overlap between {annotator_a!r} and {annotator_b!r}")
        kappa = cohens_kappa([labels_a[p] for p in shared], [labels_b[p] for p in shared])
        return {
            "overlap": len(shared),
            "kappa": kappa,
            "band": landis_koch_band(kappa),
        }


def _make_handler(service: AnnotationService, assets_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
            pass

        def _send_json(self, payload: dict, status: int = 200) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, message: str, status: int) -> None:
            self._send_json({"error": message}, status)

        def _serve_asset(self, path: str) -> None:
            if path in ("/", ""):
                path = "/index.html"
            if assets_dir is None:
                if path == "/index.html":
                    self.send_response(200)
                    self.send_header("Content-Type", "text/html; charset=utf-8")
                    self.send_header("Content-Length", str(len(_FALLBACK_PAGE)))
                    self.end_headers()
                    self.wfile.write(_FALLBACK_PAGE)
                    return
                self._send_error_json("not found", 404)
                return
            target = (assets_dir / path.lstrip("/")).resolve()
            if not str(target).startswith(str(assets_dir.resolve())) or not target.is_file():
                self._send_error_json("not found", 404)
                return
            body = target.read_bytes()
            self.send_response(200)
            content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:  # noqa: N802 - stdlib naming
            parsed = urlparse(self.path)
            query = {k: v[0] for k, v in parse_qs(parsed.query).items()}
            try:
                if parsed.path == "/api/pairs/next":
                    annotator = query.get("annotator", "")
                    if not annotator:
                        self._send_error_json("annotator parameter required", 400)
                        return
                    self._send_json(service.next_pair(annotator))
                elif parsed.path == "/api/progress":
                    self._send_json(service.progress())
                elif parsed.path == "/api/agreement":
                    a, b = query.get("a", ""), query.get("b", "")
                    if not a or not b:
                        self._send_error_json("parameters a and b required", 400)
                        return
                    try:
                        self._send_json(service.agreement(a, b))
                    except ValueError as exc:
                        self._send_error_json(str(exc), 400)
                elif parsed.path.startswith("/api/"):
                    self._send_error_json("not found", 404)
                else:
                    self._serve_asset(parsed.path)
            except Exception as exc:  # pragma: no cover - last-resort guard
                self._send_error_json(f"internal error: {exc}", 500)

        def do_POST(self) -> None:  # noqa: N802 - stdlib naming
            parsed = urlparse(self.path)
            if parsed.path != "/api/labels":
                self._send_error_json("not found", 404)
                return
            length = int(self.headers.get("Content-Length", "0"))
            try:
                payload = json.loads(self.rfile.read(length).decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                self._send_error_json("request body must be a JSON object", 400)
                return
            if not isinstance(payload, dict):
                self._send_error_json("request body must be a JSON object", 400)
                return
            try:
                result = service.submit(
                    pair_id=str(payload.get("pair_id", "")),
                    annotator=str(payload.get("annotator", "")),
                    label=str(payload.get("label", "")),
                    session=str(payload.get("session", "")),
                )
            except KeyError:
                self._send_error_json(f"unknown pair_id {payload.get('pair_id')!r}", 404)
                return
            except ValueError as exc:
                self._send_error_json(str(exc), 400)
                return
            self._send_json(result)

    return Handler


def create_server(
    sample_path: str | Path,
    labels_path: str | Path,
    port: int = 8080,
    host: str = "127.0.0.1",
    overlap_fraction: float = 0.0,
    seed: int = 0,
    assets_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Configured server; call serve_forever() (port 0 picks a free port)."""
    service = AnnotationService(
        sample_path, labels_path, overlap_fraction=overlap_fraction, seed=seed
    )
    assets = Path(assets_dir) if assets_dir is not None else None
    if assets is not None and not assets.is_dir():
        raise ValueError(f"assets directory {assets} does not exist")
    handler = _make_handler(service, assets)
    server = ThreadingHTTPServer((host, port), handler)
    server.service = service  # type: ignore[attr-defined]
    return server
