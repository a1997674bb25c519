"""satd-link: mine, link, and classify self-admitted technical debt relations.

The pipeline stages are exposed as submodules: ingest (repository mining),
linker (cross-reference resolution), detect (SATD flagging), pairs (candidate
generation and sampling), nn (the trainable pair classifier), evaluate
(cross-validation harness), census (corpus-wide relation counts), service
(annotation HTTP API), and report (figure and file rendering).
"""

from .model import (
    ANNOTATION_LABELS,
    AnnotationRecord,
    Artifact,
    Container,
    ContainerKind,
    Link,
    RecordError,
    ReferenceKind,
    RelationLabel,
    SatdFlag,
    SatdPair,
    SchemaVersionError,
    SourceKind,
    pair_direction,
    read_jsonl,
    write_jsonl,
)

__version__ = "0.1.0"

__all__ = [
    "ANNOTATION_LABELS",
    "AnnotationRecord",
    "Artifact",
    "Container",
    "ContainerKind",
    "Link",
    "RecordError",
    "ReferenceKind",
    "RelationLabel",
    "SatdFlag",
    "SatdPair",
    "SchemaVersionError",
    "SourceKind",
    "pair_direction",
    "read_jsonl",
    "write_jsonl",
    "__version__",
]
