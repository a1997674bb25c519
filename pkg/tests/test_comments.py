"""Comment lexer oracles: strings, blocks, merging, spans."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from satdlink.comments import (
    C_FAMILY,
    DEFAULT_PROFILES,
    PYTHON_SHELL,
    SQL_LUA,
    LanguageProfile,
    extract_comments,
    load_profiles,
    normalize_comment,
    profile_for_path,
    validate_profiles,
)


class TestProfiles:
    def test_default_extensions_disjoint(self):
        validate_profiles(DEFAULT_PROFILES)

    def test_profile_lookup_by_suffix(self):
        assert profile_for_path("src/App.java") is C_FAMILY
        assert profile_for_path("setup.PY") is PYTHON_SHELL
        assert profile_for_path("schema.sql") is SQL_LUA
        assert profile_for_path("README.md") is None
        assert profile_for_path("Makefile") is None

    def test_overlapping_extensions_rejected(self):
        clash = LanguageProfile(name="x", file_extensions=(".java",))
        with pytest.raises(ValueError, match="claimed by both"):
            validate_profiles((C_FAMILY, clash))

    def test_load_profiles_json(self, tmp_path):
        path = tmp_path / "profiles.json"
        path.write_text(json.dumps([
            {
                "name": "ini",
                "file_extensions": [".ini"],
                "line_comment_openers": [";"],
            }
        ]))
        profiles = load_profiles(path)
        assert profiles[0].name == "ini"
        comments = extract_comments("key=1\n; note\n", profiles[0])
        assert [c for c, _ in comments] == ["note"]


class TestExtractCComments:
    def test_line_comment_with_exact_span(self):
        src = "int x; // trailing note\n"
        [(text, span)] = extract_comments(src, C_FAMILY)
        assert text == "trailing note"
        start, end = span
        assert src[start:end] == "// trailing note"

    def test_block_comment_markers_stripped_span_includes_markers(self):
        src = "a /* body text */ b"
        [(text, span)] = extract_comments(src, C_FAMILY)
        assert text == "body text"
        assert src[span[0]:span[1]] == "/* body text */"

    def test_string_contents_never_reported(self):
        src = 's = "// not a comment"; t = \'/* nor this */\'; // real\n'
        comments = [c for c, _ in extract_comments(src, C_FAMILY)]
        assert comments == ["real"]

    def test_escaped_quote_does_not_end_string(self):
        src = 's = "a \\" // still string"; // yes\n'
        comments = [c for c, _ in extract_comments(src, C_FAMILY)]
        assert comments == ["yes"]

    def test_adjacent_line_comments_merge(self):
        src = "// first\n// second\nint x;\n// third\n"
        comments = [c for c, _ in extract_comments(src, C_FAMILY)]
        assert comments == ["first\nsecond", "third"]

    def test_blank_line_breaks_merge(self):
        src = "// first\n\n// second\n"
        comments = [c for c, _ in extract_comments(src, C_FAMILY)]
        assert comments == ["first", "second"]

    def test_document_order_preserved(self):
        src = "/* one */ int a; // two\nint b; /* three */\n"
        comments = [c for c, _ in extract_comments(src, C_FAMILY)]
        assert comments == ["one", "two", "three"]

    def test_unterminated_block_extends_to_eof_with_warning(self):
        with pytest.warns(UserWarning, match="unterminated"):
            [(text, span)] = extract_comments("x /* open ended", C_FAMILY)
        assert text == "open ended"

    def test_comment_opener_inside_block_ignored(self):
        src = "/* // nested opener */ int x;\n"
        comments = [c for c, _ in extract_comments(src, C_FAMILY)]
        assert comments == ["// nested opener"]

    def test_multibyte_source_reports_byte_spans(self):
        src = 's = "naïve"; // café\n'
        [(text, span)] = extract_comments(src, C_FAMILY)
        assert text == "café"
        raw = src.encode("utf-8")
        assert raw[span[0]:span[1]].decode("utf-8") == "// café"


class TestExtractPython:
    def test_docstrings_are_strings_not_comments(self):
        src = '"""module docstring with # inside"""\n# real comment\n'
        comments = [c for c, _ in extract_comments(src, PYTHON_SHELL)]
        assert comments == ["real comment"]

    def test_hash_inside_single_quotes_ignored(self):
        src = "x = '#nope'  # yep\n"
        comments = [c for c, _ in extract_comments(src, PYTHON_SHELL)]
        assert comments == ["yep"]


class TestExtractSql:
    def test_double_dash_line_comment(self):
        src = "SELECT 1; -- fetch one\n"
        comments = [c for c, _ in extract_comments(src, SQL_LUA)]
        assert comments == ["fetch one"]

    def test_no_escape_in_sql_strings(self):
        src = "SELECT 'it''s'; -- note\n"
        comments = [c for c, _ in extract_comments(src, SQL_LUA)]
        assert comments == ["note"]


class TestNormalize:
    def test_collapses_whitespace(self):
        assert normalize_comment("  a\t b\n c  ") == "a b c"

    def test_preserves_case(self):
        assert normalize_comment("TODO Fix") == "TODO Fix"

    @given(st.text())
    def test_idempotent(self, text):
        once = normalize_comment(text)
        assert normalize_comment(once) == once


@given(st.text(alphabet=st.sampled_from('ab"/*\n \'\\'), max_size=80))
def test_extractor_total_and_spans_inside_source(src):
    """The lexer never crashes and every span stays within the source bytes."""
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        comments = extract_comments(src, C_FAMILY)
    raw_len = len(src.encode("utf-8"))
    for _, (start, end) in comments:
        assert 0 <= start <= end <= raw_len
