"""Mining of git repositories and issue/pull tracker exports into artifacts.

Git mining walks first-parent history oldest to newest, emitting one
commit-message artifact per non-merge commit and diffing the comments of each
changed source file against its parent version. The diff is a multiset diff
over whitespace-normalized comment text, so moved or reflowed comments produce
no artifacts. Merge commits are skipped entirely.
"""

from __future__ import annotations

import json
import subprocess
import warnings
from collections import Counter, defaultdict, deque
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .comments import (
    DEFAULT_PROFILES,
    LanguageProfile,
    extract_comments,
    normalize_comment,
    profile_for_path,
    validate_profiles,
)
from .model import Artifact, Container, ContainerKind, SourceKind


@dataclass(frozen=True, slots=True)
class BotPolicy:
    """Which authors count as bots; matching is case-insensitive."""

    exact_usernames: tuple[str, ...] = ()
    suffix_patterns: tuple[str, ...] = ("[bot]", "-bot", "bot")

    def matches(self, author: str) -> bool:
        lowered = author.strip().lower()
        if lowered in {name.lower() for name in self.exact_usernames}:
            return True
        return any(lowered.endswith(suffix.lower()) for suffix in self.suffix_patterns if suffix)


DEFAULT_BOT_POLICY = BotPolicy()


def load_bot_policy(path: str | Path) -> BotPolicy:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return BotPolicy(
        exact_usernames=tuple(raw.get("exact_usernames", ())),
        suffix_patterns=tuple(raw.get("suffix_patterns", BotPolicy.suffix_patterns)),
    )


class GitError(RuntimeError):
    pass


def _git(repo: Path, *args: str) -> bytes:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        check=False,
    )
    if proc.returncode != 0:
        raise GitError(
            f"git {' '.join(args)} failed: {proc.stderr.decode('utf-8', 'replace').strip()}"
        )
    return proc.stdout


@dataclass(frozen=True, slots=True)
class _CommitInfo:
    hash: str
    parents: tuple[str, ...]
    author: str
    author_date: int
    message: str


def _list_commits(repo: Path) -> list[_CommitInfo]:
    out = _git(
        repo, "log", "--topo-order", "--reverse", "--format=%H%x1f%P%x1f%an%x1f%at%x1f%B%x1e", "HEAD"
    ).decode("utf-8", "replace")
    commits = []
    for chunk in out.split("\x1e"):
        chunk = chunk.strip("\n")
        if not chunk:
            continue
        hash_, parents, author, date, message = chunk.split("\x1f", 4)
        commits.append(
            _CommitInfo(
                hash=hash_.strip(),
                parents=tuple(parents.split()) if parents.strip() else (),
                author=author,
                author_date=int(date),
                message=message,
            )
        )
    return commits


def _changed_paths(repo: Path, commit: _CommitInfo) -> list[tuple[str, str]]:
    """(status, path) pairs for a non-merge commit, sorted by path."""
    if commit.parents:
        args = ["diff-tree", "-r", "--no-renames", "--no-commit-id", "--name-status", "-z",
                commit.parents[0], commit.hash]
    else:
        args = ["diff-tree", "-r", "--no-renames", "--no-commit-id", "--name-status", "-z",
                "--root", commit.hash]
    fields = _git(repo, *args).decode("utf-8", "replace").split("\0")
    pairs = []
    it = iter(fields)
    for status in it:
        if not status:
            continue
        path = next(it, "")
        pairs.append((status[:1], path))
    return sorted(pairs, key=lambda sp: sp[1])


def _blob_text(repo: Path, commit_hash: str, path: str) -> str | None:
    """File content at a commit, or None for binary/unreadable blobs."""
    try:
        blob = _git(repo, "show", f"{commit_hash}:{path}")
    except GitError:
        return None
    if b"\x00" in blob:
        return None
    return blob.decode("utf-8", "replace")


def ingest_git(
    repo_path: str | Path,
    profiles: tuple[LanguageProfile, ...] = DEFAULT_PROFILES,
    bots: BotPolicy = DEFAULT_BOT_POLICY,
    project: str | None = None,
) -> list[Artifact]:
    """Mine commit messages and comment add/delete artifacts from a repository.

    Deterministic: commits are walked in topological order and paths sorted
    within each commit, so two runs over the same repository produce identical
    artifact sequences.
    """
    repo = Path(repo_path)
    try:
        _git(repo, "rev-parse", "--git-dir")
    except GitError as exc:
        raise GitError(f"{repo} is not a git repository: {exc}") from exc
    validate_profiles(profiles)
    if project is None:
        project = repo.resolve().name

    artifacts: list[Artifact] = []
    skipped_blobs = 0
    # FIFO of introduction times per (path, normalized comment text), so a
    # deletion can report when its text first appeared.
    introduced: dict[tuple[str, str], deque[int]] = defaultdict(deque)

    for commit in _list_commits(repo):
        is_merge = len(commit.parents) > 1
        is_bot = bots.matches(commit.author)
        if is_merge:
            continue

        if not is_bot and commit.message.split():
            commit_container = Container(ContainerKind.COMMIT, commit.hash, project)
            artifacts.append(
                Artifact(
                    id=f"{project}/commit/{commit.hash}",
                    project=project,
                    source_kind=SourceKind.COMMIT_MESSAGE,
                    text=commit.message.strip(),
                    author=commit.author,
                    is_bot=False,
                    created_at=commit.author_date,
                    container=commit_container,
                )
            )

        parent = commit.parents[0] if commit.parents else None
        for status, path in _changed_paths(repo, commit):
            profile = profile_for_path(path, profiles)
            if profile is None:
                continue
            old_text = _blob_text(repo, parent, path) if (parent and status != "A") else None
            new_text = _blob_text(repo, commit.hash, path) if status != "D" else None
            if status not in ("A", "D") and old_text is None and new_text is None:
                skipped_blobs += 1
                continue

            old_comments = extract_comments(old_text, profile) if old_text is not None else []
            new_comments = extract_comments(new_text, profile) if new_text is not None else []
            old_counts = Counter(
                normalize_comment(t) for t, _ in old_comments if normalize_comment(t)
            )
            new_counts = Counter(
                normalize_comment(t) for t, _ in new_comments if normalize_comment(t)
            )
            added = new_counts - old_counts
            deleted = old_counts - new_counts
            if not added and not deleted:
                continue

            location = Container(ContainerKind.CODE_LOCATION, f"{path}@{commit.hash}", project)
            ordinal = 0
            remaining = Counter(added)
            for text, span in new_comments:
                norm = normalize_comment(text)
                if remaining.get(norm, 0) <= 0:
                    continue
                remaining[norm] -= 1
                introduced[(path, norm)].append(commit.author_date)
                if not is_bot:
                    artifacts.append(
                        Artifact(
                            id=f"{project}/comment_added/{commit.hash}/{path}#{ordinal}",
                            project=project,
                            source_kind=SourceKind.COMMENT_ADDED,
                            text=text,
                            author=commit.author,
                            is_bot=False,
                            created_at=commit.author_date,
                            container=location,
                            evidence=span,
                        )
                    )
                ordinal += 1

            ordinal = 0
            remaining = Counter(deleted)
            for text, span in old_comments:
                norm = normalize_comment(text)
                if remaining.get(norm, 0) <= 0:
                    continue
                remaining[norm] -= 1
                queue = introduced.get((path, norm))
                added_at = queue.popleft() if queue else None
                if not is_bot:
                    artifacts.append(
                        Artifact(
                            id=f"{project}/comment_deleted/{commit.hash}/{path}#{ordinal}",
                            project=project,
                            source_kind=SourceKind.COMMENT_DELETED,
                            text=text,
                            author=commit.author,
                            is_bot=False,
                            created_at=commit.author_date,
                            container=location,
                            evidence=span,
                            added_at=added_at,
                        )
                    )
                ordinal += 1

    if skipped_blobs:
        warnings.warn(f"skipped {skipped_blobs} unreadable blobs", stacklevel=2)
    return artifacts


def _parse_timestamp(value) -> int:
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return int(text)
        except ValueError:
            pass
        parsed = datetime.fromisoformat(text.replace("Z", "+00:00"))
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return int(parsed.timestamp())
    raise ValueError(f"not a timestamp: {value!r}")


def ingest_tracker_export(
    path: str | Path,
    kind: str,
    bots: BotPolicy = DEFAULT_BOT_POLICY,
    project: str = "project",
) -> list[Artifact]:
    """Ingest a JSON-Lines issue or pull-request export.

    Each export record holds native_id, created_at, author, summary,
    description, and comments[] of {author, created_at, body}. One artifact is
    emitted per non-empty section; bot-authored sections are dropped.
    """
    if kind not in ("issue", "pull"):
        raise ValueError(f"kind must be 'issue' or 'pull', got {kind!r}")
    container_kind = ContainerKind.ISSUE if kind == "issue" else ContainerKind.PULL
    section_kinds = {
        "summary": SourceKind.ISSUE_SUMMARY if kind == "issue" else SourceKind.PULL_SUMMARY,
        "description": SourceKind.ISSUE_DESCRIPTION if kind == "issue" else SourceKind.PULL_DESCRIPTION,
        "comment": SourceKind.ISSUE_COMMENT if kind == "issue" else SourceKind.PULL_COMMENT,
    }

    artifacts: list[Artifact] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            native_id = record.get("native_id")
            if native_id in (None, ""):
                warnings.warn(f"{path}:{lineno}: record without native_id skipped", stacklevel=2)
                continue
            native_id = str(native_id)
            try:
                created_at = _parse_timestamp(record.get("created_at"))
            except (ValueError, TypeError):
                warnings.warn(
                    f"{path}:{lineno}: unparsable created_at, record skipped", stacklevel=2
                )
                continue
            container = Container(container_kind, native_id, project)
            author = str(record.get("author", ""))

            for section in ("summary", "description"):
                text = record.get(section) or ""
                if not text.split() or bots.matches(author):
                    continue
                artifacts.append(
                    Artifact(
                        id=f"{project}/{kind}/{native_id}/{section}",
                        project=project,
                        source_kind=section_kinds[section],
                        text=text.strip(),
                        author=author,
                        is_bot=False,
                        created_at=created_at,
                        container=container,
                    )
                )

            for index, comment in enumerate(record.get("comments") or []):
                body = comment.get("body") or ""
                comment_author = str(comment.get("author", ""))
                if not body.split() or bots.matches(comment_author):
                    continue
                try:
                    comment_time = _parse_timestamp(comment.get("created_at"))
                except (ValueError, TypeError):
                    warnings.warn(
                        f"{path}:{lineno}: comment {index} has unparsable created_at, skipped",
                        stacklevel=2,
                    )
                    continue
                artifacts.append(
                    Artifact(
                        id=f"{project}/{kind}/{native_id}/comment#{index}",
                        project=project,
                        source_kind=section_kinds["comment"],
                        text=body.strip(),
                        author=comment_author,
                        is_bot=False,
                        created_at=comment_time,
                        container=container,
                    )
                )
    return artifacts
