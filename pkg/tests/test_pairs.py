"""Tokenization, similarity, pair generation, and stratified sampling."""

import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satdlink.linker import link_corpus
from satdlink.model import Container, ContainerKind, SourceKind
from satdlink.pairs import (
    TokenizerConfig,
    bin_index,
    bin_interval,
    cosine_similarity,
    generate_pairs,
    pair_id_for,
    similarity_stats,
    stratified_sample,
    tokenize,
)
from satdlink.synthetic import generate_synthetic_pairs, make_artifact

tokens_strategy = st.lists(st.sampled_from(["fix", "the", "bug", "now", "npe"]), max_size=12)


class TestTokenize:
    def test_basic_split_and_lowercase(self):
        assert tokenize("Fix NPE in parser!") == ["fix", "npe", "in", "parser"]

    def test_punctuation_boundaries(self):
        assert tokenize("TODO:remove-it") == ["todo", "remove", "it"]

    def test_empty(self):
        assert tokenize("") == []

    def test_min_token_length(self):
        config = TokenizerConfig(min_token_length=3)
        assert tokenize("a an the cat", config) == ["the", "cat"]

    def test_underscore_is_a_separator(self):
        assert tokenize("load_data_fast") == ["load", "data", "fast"]

    def test_config_floor(self):
        with pytest.raises(ValueError):
            TokenizerConfig(max_sequence_length=4)


class TestCosine:
    def test_identical(self):
        assert cosine_similarity(["fix", "bug"], ["fix", "bug"]) == pytest.approx(1.0)

    def test_disjoint(self):
        assert cosine_similarity(["fix"], ["bug"]) == 0.0

    def test_hand_oracle_two_thirds(self):
        value = cosine_similarity(["fix", "the", "bug"], ["fix", "bug", "now"])
        assert value == pytest.approx(2 / 3, abs=1e-12)

    def test_empty_side_is_zero(self):
        assert cosine_similarity([], ["fix"]) == 0.0
        assert cosine_similarity([], []) == 0.0

    def test_frequency_weighting_oracle(self):
        # tf vectors: a={x:2, y:1}, b={x:1}; dot=2, |a|=sqrt5, |b|=1
        value = cosine_similarity(["x", "x", "y"], ["x"])
        assert value == pytest.approx(2 / math.sqrt(5), abs=1e-12)

    @given(tokens_strategy, tokens_strategy)
    def test_symmetric_and_bounded(self, a, b):
        v1, v2 = cosine_similarity(a, b), cosine_similarity(b, a)
        assert v1 == pytest.approx(v2, abs=1e-12)
        assert 0.0 <= v1 <= 1.0

    @given(tokens_strategy.filter(bool), st.integers(2, 5))
    def test_scale_invariant(self, a, k):
        assert cosine_similarity(a, a * k) == pytest.approx(1.0, abs=1e-12)


class TestBins:
    @pytest.mark.parametrize(
        "similarity,expected",
        [(0.0, 0), (0.05, 0), (0.1, 1), (0.95, 9), (0.99999, 9), (1.0, 9)],
    )
    def test_boundaries(self, similarity, expected):
        assert bin_index(similarity) == expected

    def test_intervals_partition(self):
        assert bin_interval(0) == (0.0, 0.1)
        assert bin_interval(9) == (0.9, 1.0)
        for i in range(9):
            assert bin_interval(i)[1] == pytest.approx(bin_interval(i + 1)[0])

    @given(st.floats(0.0, 1.0, allow_nan=False))
    def test_every_similarity_maps_to_exactly_one_bin(self, s):
        i = bin_index(s)
        lo, hi = bin_interval(i)
        assert lo <= s <= hi if i == 9 else lo <= s < hi


def _issue_section(uid, kind, text, created):
    art = make_artifact(kind, text, created, uid=uid, project="p")
    import dataclasses

    container = Container(ContainerKind.ISSUE, "12", "p")
    return dataclasses.replace(art, container=container)


def _pull_section(uid, kind, text, created):
    import dataclasses

    art = make_artifact(kind, text, created, uid=uid, project="p")
    container = Container(ContainerKind.PULL, "40", "p")
    return dataclasses.replace(art, container=container)


class TestGeneratePairs:
    def test_cartesian_product_counts(self):
        issue_sections = [
            _issue_section(1, SourceKind.ISSUE_SUMMARY, "todo in loader see #40", 100),
            _issue_section(2, SourceKind.ISSUE_COMMENT, "hack confirmed", 110),
        ]
        pull_sections = [
            _pull_section(3, SourceKind.PULL_SUMMARY, "repay loader debt", 200),
            _pull_section(4, SourceKind.PULL_DESCRIPTION, "removes the hack", 210),
            _pull_section(5, SourceKind.PULL_COMMENT, "todo gone", 220),
        ]
        corpus = issue_sections + pull_sections
        graph = link_corpus(corpus)
        pairs = generate_pairs(corpus, graph)
        assert len(pairs) == 6
        assert all(p.origin.created_at <= p.target.created_at for p in pairs)

    def test_single_pair(self):
        issue = _issue_section(1, SourceKind.ISSUE_SUMMARY, "todo loader, see deadbeef1", 100)
        commit = make_artifact(SourceKind.COMMIT_MESSAGE, "fix loader todo", 200, uid=9, project="p")
        import dataclasses

        commit = dataclasses.replace(
            commit,
            container=Container(ContainerKind.COMMIT, "deadbeef1" + "0" * 31, "p"),
            id="p/commit/deadbeef1",
        )
        corpus = [issue, commit]
        graph = link_corpus(corpus)
        pairs = generate_pairs(corpus, graph)
        assert len(pairs) == 1
        assert pairs[0].origin is issue

    def test_redundant_links_collapse(self):
        """Issue-id and hash references between the same containers give 1 pair."""
        h = "beadfeed" + "1" * 32
        issue = _issue_section(1, SourceKind.ISSUE_SUMMARY, f"todo loader see {h[:9]}", 100)
        commit = make_artifact(SourceKind.COMMIT_MESSAGE, "fix #12 todo", 200, uid=9, project="p")
        import dataclasses

        commit = dataclasses.replace(
            commit, container=Container(ContainerKind.COMMIT, h, "p"), id="p/commit/x"
        )
        corpus = [issue, commit]
        graph = link_corpus(corpus)
        assert len(graph.edges) == 2
        pairs = generate_pairs(corpus, graph)
        assert len(pairs) == 1

    def test_comment_counts_as_commit_member(self):
        """An issue->commit link pairs issue sections with that commit's comments."""
        h = "cafe1234" + "0" * 32
        issue = _issue_section(1, SourceKind.ISSUE_SUMMARY, f"todo loader see {h[:8]}", 100)
        comment = make_artifact(SourceKind.COMMENT_ADDED, "todo drop loader hack", 200,
                                uid=5, project="p")
        import dataclasses

        comment = dataclasses.replace(
            comment,
            container=Container(ContainerKind.CODE_LOCATION, f"a.java@{h}", "p"),
        )
        corpus = [issue, comment]
        graph = link_corpus(corpus)
        pairs = generate_pairs(corpus, graph)
        kinds = {(p.origin.source_kind, p.target.source_kind) for p in pairs}
        assert (SourceKind.ISSUE_SUMMARY, SourceKind.COMMENT_ADDED) in kinds

    def test_pair_id_deterministic(self):
        assert pair_id_for("a", "b") == pair_id_for("a", "b")
        assert pair_id_for("a", "b") != pair_id_for("b", "a")
        assert len(pair_id_for("a", "b")) == 16


class TestStratifiedSample:
    def test_minimum_n(self):
        pairs = generate_synthetic_pairs(n=30, seed=0)
        with pytest.raises(ValueError, match=">= 10"):
            stratified_sample(pairs, n=9, seed=1)

    def test_oversized_n_warns_and_returns_all(self):
        pairs = generate_synthetic_pairs(n=20, seed=0)
        with pytest.warns(UserWarning, match="returning all"):
            sample = stratified_sample(pairs, n=50, seed=1)
        assert Counter(p.pair_id for p in sample) == Counter(p.pair_id for p in pairs)

    def test_equal_quota_when_bins_full(self):
        base = generate_synthetic_pairs(n=40, seed=3)
        import dataclasses

        pairs = []
        for i, pair in enumerate(base):
            pairs.append(dataclasses.replace(pair, similarity=(i % 10) / 10 + 0.05))
        sample = stratified_sample(pairs, n=20, seed=1)
        counts = Counter(bin_index(p.similarity) for p in sample)
        assert all(counts[b] == 2 for b in range(10))

    def test_shortfall_redistributed(self):
        """A bin with fewer pairs than quota contributes all and others cover."""
        import dataclasses

        base = generate_synthetic_pairs(n=60, seed=3)
        pairs = []
        for i, pair in enumerate(base):
            if i < 3:
                sim = 0.95  # bin 9 holds exactly 3
            else:
                sim = (i % 3) / 10 + 0.05  # bins 0..2 hold plenty
            pairs.append(dataclasses.replace(pair, similarity=sim))
        sample = stratified_sample(pairs, n=40, seed=1)
        assert len(sample) == 40
        counts = Counter(bin_index(p.similarity) for p in sample)
        assert counts[9] == 3
        assert counts[0] + counts[1] + counts[2] == 37

    def test_deterministic(self):
        pairs = generate_synthetic_pairs(n=100, seed=7)
        s1 = stratified_sample(pairs, n=30, seed=5)
        s2 = stratified_sample(pairs, n=30, seed=5)
        assert [p.pair_id for p in s1] == [p.pair_id for p in s2]
        s3 = stratified_sample(pairs, n=30, seed=6)
        assert [p.pair_id for p in s3] != [p.pair_id for p in s1]

    def test_output_ordered_by_bin_no_duplicates(self):
        pairs = generate_synthetic_pairs(n=120, seed=2)
        sample = stratified_sample(pairs, n=40, seed=1)
        ids = [p.pair_id for p in sample]
        assert len(set(ids)) == len(ids)
        bins = [bin_index(p.similarity) for p in sample]
        assert bins == sorted(bins)

    @settings(max_examples=25)
    @given(st.integers(10, 60), st.integers(0, 10))
    def test_size_property(self, n, seed):
        import warnings as _warnings

        pairs = generate_synthetic_pairs(n=50, seed=4)
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            sample = stratified_sample(pairs, n=n, seed=seed)
        assert len(sample) == min(n, len(pairs))


class TestSimilarityStats:
    def test_constant(self):
        import dataclasses

        pairs = [dataclasses.replace(p, similarity=0.5)
                 for p in generate_synthetic_pairs(n=5, seed=0)]
        stats = similarity_stats(pairs)
        assert stats.mean == pytest.approx(0.5)
        assert stats.std == pytest.approx(0.0)
        assert stats.bin_counts[5] == 5

    def test_zero_one_split(self):
        import dataclasses

        base = generate_synthetic_pairs(n=4, seed=0)
        pairs = [dataclasses.replace(p, similarity=float(i % 2)) for i, p in enumerate(base)]
        stats = similarity_stats(pairs)
        assert stats.mean == pytest.approx(0.5)
        assert stats.std == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            similarity_stats([])
