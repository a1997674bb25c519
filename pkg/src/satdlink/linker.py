"""Cross-reference extraction and resolution into a typed link graph.

Three reference syntaxes are recognized: "#123" numbers (issue or pull,
decided at resolution time), Jira-style project keys ("CASSANDRA-8915"), and
hexadecimal commit hashes of 7 to 40 characters. Resolution is conservative:
a hash prefix matching more than one known commit is dropped as ambiguous
rather than guessed.
"""

from __future__ import annotations

import bisect
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .model import Artifact, Container, ContainerKind, Link, ReferenceKind

_HASH_NUMBER_RE = re.compile(r"(?<![\w#])#(\d+)\b")
_PROJECT_KEY_RE = re.compile(r"\b([A-Z][A-Z0-9]*-\d+)\b")
_HEX_HASH_RE = re.compile(r"\b[0-9a-f]{7,40}\b")

SYNTAXES = ("hash_number", "project_key", "hex_hash")


@dataclass(frozen=True, slots=True)
class ReferencePattern:
    """One recognized reference syntax and the link kind it produces."""

    kind: str
    syntax: str
    project_key_prefixes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("issue_id", "pull_id", "commit_hash"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        if self.syntax not in SYNTAXES:
            raise ValueError(f"unknown syntax {self.syntax!r}")


DEFAULT_PATTERNS = (
    ReferencePattern(kind="issue_id", syntax="hash_number"),
    ReferencePattern(kind="issue_id", syntax="project_key"),
    ReferencePattern(kind="commit_hash", syntax="hex_hash"),
)


def load_patterns(path: str | Path) -> tuple[ReferencePattern, ...]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(
        ReferencePattern(
            kind=item["kind"],
            syntax=item["syntax"],
            project_key_prefixes=tuple(item.get("project_key_prefixes", ())),
        )
        for item in raw
    )


@dataclass(frozen=True, slots=True)
class Reference:
    """One extracted cross-reference token.

    kind is the extraction-level kind: "#N" tokens are "issue_or_pull" until
    resolution decides which namespace they live in.
    """

    kind: str
    raw_token: str
    normalized_id: str
    span: tuple[int, int]


def extract_references(
    text: str, patterns: Sequence[ReferencePattern] = DEFAULT_PATTERNS
) -> list[Reference]:
    """All non-overlapping references in document order."""
    candidates: list[Reference] = []
    for pattern in patterns:
        if pattern.syntax == "hash_number":
            for match in _HASH_NUMBER_RE.finditer(text):
                candidates.append(
                    Reference("issue_or_pull", match.group(0), match.group(1), match.span())
                )
        elif pattern.syntax == "project_key":
            for match in _PROJECT_KEY_RE.finditer(text):
                token = match.group(1)
                if pattern.project_key_prefixes and token.split("-", 1)[0] not in pattern.project_key_prefixes:
                    continue
                candidates.append(Reference(pattern.kind, token, token, match.span(1)))
        else:
            for match in _HEX_HASH_RE.finditer(text):
                token = match.group(0)
                # Purely numeric lookalikes such as "1234567" are not hashes.
                if not any(c in "abcdef" for c in token):
                    continue
                candidates.append(Reference("commit_hash", token, token, match.span()))

    candidates.sort(key=lambda ref: (ref.span[0], -ref.span[1]))
    chosen: list[Reference] = []
    last_end = -1
    for ref in candidates:
        if ref.span[0] >= last_end:
            chosen.append(ref)
            last_end = ref.span[1]
    return chosen


@dataclass(slots=True)
class ResolutionIndex:
    """Lookup tables from normalized reference ids to known containers."""

    issues: dict[str, Container] = field(default_factory=dict)
    pulls: dict[str, Container] = field(default_factory=dict)
    commits: dict[str, Container] = field(default_factory=dict)
    _sorted_hashes: list[str] = field(default_factory=list)

    @property
    def has_project_keys(self) -> bool:
        return any(not native_id.isdigit() for native_id in self.issues)

    def add(self, container: Container) -> None:
        if container.kind is ContainerKind.ISSUE:
            self.issues[container.native_id] = container
        elif container.kind is ContainerKind.PULL:
            self.pulls[container.native_id] = container
        elif container.kind is ContainerKind.COMMIT:
            if container.native_id not in self.commits:
                bisect.insort(self._sorted_hashes, container.native_id)
            self.commits[container.native_id] = container

    def commits_with_prefix(self, prefix: str) -> list[Container]:
        lo = bisect.bisect_left(self._sorted_hashes, prefix)
        hi = bisect.bisect_right(self._sorted_hashes, prefix + "￿")
        return [self.commits[h] for h in self._sorted_hashes[lo:hi]]


def build_index(artifacts: Iterable[Artifact]) -> ResolutionIndex:
    """Index every container seen in the corpus, including the commit half of
    each code location."""
    index = ResolutionIndex()
    for artifact in artifacts:
        container = artifact.container
        if container.kind is ContainerKind.CODE_LOCATION:
            index.add(Container(ContainerKind.COMMIT, _location_commit(container), container.project))
        else:
            index.add(container)
    return index


def _location_commit(container: Container) -> str:
    return container.native_id.rsplit("@", 1)[1]


@dataclass(slots=True)
class LinkStats:
    total_references: int = 0
    resolved: int = 0
    unresolved: int = 0
    ambiguous: int = 0
    implicit: int = 0

    def to_json_dict(self) -> dict:
        return {
            "total_references": self.total_references,
            "resolved": self.resolved,
            "unresolved": self.unresolved,
            "ambiguous": self.ambiguous,
            "implicit": self.implicit,
        }


@dataclass(slots=True)
class LinkGraph:
    containers: frozenset[Container]
    edges: tuple[Link, ...]
    stats: LinkStats
    adjacency: dict[Container, tuple[Link, ...]] = field(init=False)

    def __post_init__(self) -> None:
        adjacency: dict[Container, list[Link]] = defaultdict(list)
        for edge in self.edges:
            if edge.src not in self.containers or edge.dst not in self.containers:
                raise ValueError(f"edge endpoint outside graph: {edge.src.key} -> {edge.dst.key}")
            adjacency[edge.src].append(edge)
            adjacency[edge.dst].append(edge)
        self.adjacency = {c: tuple(links) for c, links in adjacency.items()}

    def neighbors(self, container: Container) -> list[Container]:
        """Undirected neighborhood; relation direction comes from timestamps."""
        seen = []
        for edge in self.adjacency.get(container, ()):
            other = edge.dst if edge.src == container else edge.src
            if other not in seen:
                seen.append(other)
        return seen


def resolve_links(
    references_by_artifact: Sequence[tuple[Artifact, Sequence[Reference]]],
    index: ResolutionIndex,
) -> LinkGraph:
    """Resolve extracted references against the corpus index.

    Conservation holds by construction: every extracted reference is counted
    exactly once as resolved, unresolved, or ambiguous. A reference back to
    its own container counts as resolved but produces no edge (no self-loops).
    """
    stats = LinkStats()
    edges: dict[tuple, Link] = {}
    containers: set[Container] = set()

    ordered = sorted(references_by_artifact, key=lambda pair: pair[0].id)
    for artifact, references in ordered:
        containers.add(artifact.container)
        for ref in sorted(references, key=lambda r: r.span):
            stats.total_references += 1
            target, kind = _resolve_one(ref, index, stats)
            if target is None:
                continue
            stats.resolved += 1
            if target == artifact.container:
                continue
            containers.add(target)
            edge_key = (artifact.container.key, target.key, kind.value)
            if edge_key not in edges:
                edges[edge_key] = Link(
                    src=artifact.container,
                    dst=target,
                    reference_kind=kind,
                    evidence_text=ref.raw_token,
                    evidence_artifact_id=artifact.id,
                )

    for artifact, _ in ordered:
        location = artifact.container
        if location.kind is not ContainerKind.CODE_LOCATION:
            continue
        commit_hash = _location_commit(location)
        commit = index.commits.get(
            commit_hash, Container(ContainerKind.COMMIT, commit_hash, location.project)
        )
        containers.add(commit)
        edge_key = (location.key, commit.key, ReferenceKind.CONTAINING_COMMIT.value)
        if edge_key not in edges:
            stats.implicit += 1
            edges[edge_key] = Link(
                src=location,
                dst=commit,
                reference_kind=ReferenceKind.CONTAINING_COMMIT,
                evidence_text=location.native_id,
                evidence_artifact_id=artifact.id,
            )

    ordered_edges = tuple(edges[key] for key in sorted(edges))
    return LinkGraph(containers=frozenset(containers), edges=ordered_edges, stats=stats)


def _resolve_one(
    ref: Reference, index: ResolutionIndex, stats: LinkStats
) -> tuple[Container | None, ReferenceKind | None]:
    if ref.kind == "issue_or_pull":
        # GitHub numbers issues and pulls from one sequence; with a Jira-style
        # corpus the "#N" namespace belongs to pulls alone.
        if index.has_project_keys:
            issue = None
        else:
            issue = index.issues.get(ref.normalized_id)
        pull = index.pulls.get(ref.normalized_id)
        if issue is not None and pull is not None:
            stats.ambiguous += 1
            return None, None
        if issue is not None:
            return issue, ReferenceKind.ISSUE_ID
        if pull is not None:
            return pull, ReferenceKind.PULL_ID
        stats.unresolved += 1
        return None, None

    if ref.kind == "issue_id":
        issue = index.issues.get(ref.normalized_id)
        if issue is None:
            stats.unresolved += 1
            return None, None
        return issue, ReferenceKind.ISSUE_ID

    if ref.kind == "pull_id":
        pull = index.pulls.get(ref.normalized_id)
        if pull is None:
            stats.unresolved += 1
            return None, None
        return pull, ReferenceKind.PULL_ID

    exact = index.commits.get(ref.normalized_id)
    if exact is not None:
        return exact, ReferenceKind.COMMIT_HASH
    matches = index.commits_with_prefix(ref.normalized_id)
    if len(matches) == 1:
        return matches[0], ReferenceKind.COMMIT_HASH
    if len(matches) > 1:
        stats.ambiguous += 1
    else:
        stats.unresolved += 1
    return None, None


def link_corpus(
    artifacts: Sequence[Artifact],
    patterns: Sequence[ReferencePattern] = DEFAULT_PATTERNS,
) -> LinkGraph:
    """Extract and resolve references for a whole corpus in one pass."""
    index = build_index(artifacts)
    per_artifact = [(a, extract_references(a.text, patterns)) for a in artifacts]
    return resolve_links(per_artifact, index)
