"""Comment extraction from source files across language families.

A small hand-rolled lexer walks each file once, tracking string literals so
their contents are never reported as comments. Adjacent line comments on
consecutive lines merge into one comment block, which is the unit the
comment-diffing ingestion works with.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True, slots=True)
class LanguageProfile:
    """Lexical shape of one language family.

    ``string_delimiters`` entries are (opener, closer, escape) where escape
    may be empty for languages without escape sequences.
    """

    name: str
    file_extensions: tuple[str, ...]
    line_comment_openers: tuple[str, ...] = ()
    block_comment_pairs: tuple[tuple[str, str], ...] = ()
    string_delimiters: tuple[tuple[str, str, str], ...] = ()


C_FAMILY = LanguageProfile(
    name="c_family",
    file_extensions=(".c", ".h", ".cpp", ".hpp", ".cc", ".hh", ".java", ".js",
                     ".ts", ".go", ".cs", ".scala", ".kt", ".rs", ".swift"),
    line_comment_openers=("//",),
    block_comment_pairs=(("/*", "*/"),),
    string_delimiters=(('"', '"', "\\"), ("'", "'", "\\")),
)

# Triple-quoted strings are listed before single quotes so they match first;
# docstrings are strings, not comments.
PYTHON_SHELL = LanguageProfile(
    name="python_shell",
    file_extensions=(".py", ".pyi", ".sh", ".bash", ".zsh", ".rb", ".pl", ".yaml", ".yml"),
    line_comment_openers=("#",),
    block_comment_pairs=(),
    string_delimiters=(('"""', '"""', "\\"), ("'''", "'''", "\\"),
                       ('"', '"', "\\"), ("'", "'", "\\")),
)

SQL_LUA = LanguageProfile(
    name="sql_lua",
    file_extensions=(".sql", ".lua"),
    line_comment_openers=("--",),
    block_comment_pairs=(("/*", "*/"),),
    string_delimiters=(('"', '"', ""), ("'", "'", "")),
)

DEFAULT_PROFILES: tuple[LanguageProfile, ...] = (C_FAMILY, PYTHON_SHELL, SQL_LUA)


def validate_profiles(profiles: list[LanguageProfile] | tuple[LanguageProfile, ...]) -> None:
    """Extensions must be disjoint across the profiles of one configuration."""
    seen: dict[str, str] = {}
    for profile in profiles:
        for ext in profile.file_extensions:
            if ext in seen:
                raise ValueError(
                    f"extension {ext!r} claimed by both {seen[ext]!r} and {profile.name!r}"
                )
            seen[ext] = profile.name


def profile_for_path(path: str, profiles: tuple[LanguageProfile, ...] = DEFAULT_PROFILES) -> LanguageProfile | None:
    suffix = Path(path).suffix.lower()
    for profile in profiles:
        if suffix in profile.file_extensions:
            return profile
    return None


def load_profiles(path: str | Path) -> tuple[LanguageProfile, ...]:
    """Load a profile configuration from a JSON file (list of profile objects)."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    profiles = tuple(
        LanguageProfile(
            name=entry["name"],
            file_extensions=tuple(entry["file_extensions"]),
            line_comment_openers=tuple(entry.get("line_comment_openers", ())),
            block_comment_pairs=tuple(tuple(p) for p in entry.get("block_comment_pairs", ())),
            string_delimiters=tuple(tuple(s) for s in entry.get("string_delimiters", ())),
        )
        for entry in raw
    )
    validate_profiles(profiles)
    return profiles


@dataclass(slots=True)
class _RawComment:
    text: str
    start: int  # character offsets; converted to bytes at the end
    end: int
    line: int
    end_line: int
    is_line: bool


def _byte_offsets(text: str, spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Convert character spans to UTF-8 byte spans; identity for ASCII text."""
    if text.isascii():
        return spans
    cum = [0] * (len(text) + 1)
    total = 0
    for i, ch in enumerate(text):
        total += len(ch.encode("utf-8"))
        cum[i + 1] = total
    return [(cum[s], cum[e]) for s, e in spans]


def extract_comments(source_text: str, profile: LanguageProfile) -> list[tuple[str, tuple[int, int]]]:
    """Extract comments from source text in document order.

    Returns (comment_text, byte_span) with comment markers stripped; spans
    cover the full lexeme including markers. An unterminated block comment
    extends to end of file and emits a warning.
    """
    text = source_text
    n = len(text)
    strings = sorted(profile.string_delimiters, key=lambda d: len(d[0]), reverse=True)
    raw: list[_RawComment] = []
    i = 0
    line = 1

    def advance_lines(segment: str) -> None:
        nonlocal line
        line += segment.count("\n")

    while i < n:
        matched = False

        for opener, closer, escape in strings:
            if text.startswith(opener, i):
                j = i + len(opener)
                while j < n:
                    if escape and text.startswith(escape, j) and j + len(escape) < n:
                        j += len(escape) + 1
                        continue
                    if text.startswith(closer, j):
                        j += len(closer)
                        break
                    j += 1
                advance_lines(text[i:j])
                i = j
                matched = True
                break
        if matched:
            continue

        for opener, closer in profile.block_comment_pairs:
            if text.startswith(opener, i):
                start, start_line = i, line
                j = text.find(closer, i + len(opener))
                if j < 0:
                    warnings.warn(
                        f"unterminated block comment at line {line}; extending to end of file",
                        stacklevel=2,
                    )
                    body_end = end = n
                else:
                    body_end = j
                    end = j + len(closer)
                body = text[i + len(opener):body_end]
                advance_lines(text[i:end])
                raw.append(_RawComment(body.strip(), start, end, start_line, line, is_line=False))
                i = end
                matched = True
                break
        if matched:
            continue

        for opener in profile.line_comment_openers:
            if text.startswith(opener, i):
                eol = text.find("\n", i)
                end = n if eol < 0 else eol
                body = text[i + len(opener):end].rstrip("\r").strip()
                raw.append(_RawComment(body, i, end, line, line, is_line=True))
                i = end
                matched = True
                break
        if matched:
            continue

        if text[i] == "\n":
            line += 1
        i += 1

    merged: list[_RawComment] = []
    for comment in raw:
        prev = merged[-1] if merged else None
        if (
            prev is not None
            and prev.is_line
            and comment.is_line
            and comment.line == prev.end_line + 1
        ):
            prev.text = f"{prev.text}\n{comment.text}" if prev.text else comment.text
            prev.end = comment.end
            prev.end_line = comment.end_line
        else:
            merged.append(comment)

    spans = _byte_offsets(text, [(c.start, c.end) for c in merged])
    return [(c.text, span) for c, span in zip(merged, spans)]


def normalize_comment(text: str) -> str:
    """Collapse internal whitespace for multiset diffing; case is preserved."""
    return " ".join(text.split())
