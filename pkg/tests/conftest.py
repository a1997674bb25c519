"""Shared fixtures: deterministic git repositories and tracker exports."""

from __future__ import annotations

import json
import subprocess
from pathlib import Path

import pytest


def run_git(repo: Path, *args: str, env_extra: dict[str, str] | None = None) -> str:
    env = {
        "GIT_AUTHOR_NAME": "Dev One",
        "GIT_AUTHOR_EMAIL": "dev@example.com",
        "GIT_COMMITTER_NAME": "Dev One",
        "GIT_COMMITTER_EMAIL": "dev@example.com",
        "HOME": str(repo),
        "PATH": "/usr/bin:/bin:/usr/local/bin",
    }
    if env_extra:
        env.update(env_extra)
    result = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return result.stdout


def commit_all(repo: Path, message: str, when: str, author: str = "Dev One") -> str:
    """Stage everything and commit with pinned dates; returns the hash."""
    when_env = {
        "GIT_AUTHOR_DATE": when,
        "GIT_COMMITTER_DATE": when,
        "GIT_AUTHOR_NAME": author,
        "GIT_AUTHOR_EMAIL": f"{author.replace(' ', '.').lower()}@example.com",
    }
    run_git(repo, "add", "-A")
    run_git(repo, "commit", "--allow-empty", "-m", message, env_extra=when_env)
    return run_git(repo, "rev-parse", "HEAD").strip()


@pytest.fixture
def fixture_repo(tmp_path: Path) -> tuple[Path, list[str]]:
    """Three commits: no comments, one comment added, that comment deleted."""
    repo = tmp_path / "repo"
    repo.mkdir()
    run_git(repo, "init", "-q")

    (repo / "app.java").write_text("public class App { int x = 1; }\n", encoding="utf-8")
    h1 = commit_all(repo, "initial layout", "2021-03-01T10:00:00Z")

    (repo / "app.java").write_text(
        "public class App {\n    // TODO drop the cache hack, see #12\n    int x = 1;\n}\n",
        encoding="utf-8",
    )
    h2 = commit_all(repo, "note debt for #12", "2021-03-02T10:00:00Z")

    (repo / "app.java").write_text("public class App {\n    int x = 1;\n}\n", encoding="utf-8")
    h3 = commit_all(repo, "repay debt from #12", "2021-03-03T10:00:00Z")

    return repo, [h1, h2, h3]


@pytest.fixture
def issue_export(tmp_path: Path) -> Path:
    records = [
        {
            "native_id": "12",
            "created_at": "2021-02-28T09:00:00Z",
            "author": "alice",
            "summary": "TODO cache invalidation is a hack",
            "description": "We need to remove the temporary workaround in App.",
            "comments": [
                {
                    "author": "bob",
                    "created_at": "2021-03-01T09:00:00Z",
                    "body": "Agreed, this is technical debt.",
                },
                {
                    "author": "ci-bot",
                    "created_at": "2021-03-01T09:05:00Z",
                    "body": "Build passed.",
                },
            ],
        }
    ]
    path = tmp_path / "issues.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path
