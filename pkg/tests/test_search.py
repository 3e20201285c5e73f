"""Edit distance, size prefiltering, and end-to-end search."""

import itertools
import random

import pytest

from glyphs import compose_page, metrics
from wordspot.index import (
    DocEntry,
    WordIndex,
    WordRecord,
    build_index,
    classify_size,
)
from wordspot.search import (
    MatchResult,
    MissingPageError,
    SearchParams,
    format_result,
    levenshtein,
    search,
    size_prefilter,
)
from wordspot.segment import WordBox
from wordspot.shapecode import UnsupportedCharacterError


def naive_levenshtein(a, b):
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(
        naive_levenshtein(a[:-1], b) + 1,
        naive_levenshtein(a, b[:-1]) + 1,
        naive_levenshtein(a[:-1], b[:-1]) + (a[-1] != b[-1]),
    )


def random_wst(rng, max_len=12):
    return "".join(rng.choice("Axg") for _ in range(rng.randint(0, max_len)))


class TestLevenshtein:
    def test_identity(self):
        assert levenshtein("AxxA", "AxxA") == 0

    def test_insertions_from_empty(self):
        assert levenshtein("", "xxg") == 3
        assert levenshtein("xxg", "") == 3

    def test_two_substitutions(self):
        assert levenshtein("AxgA", "AgxA") == 2

    def test_exhaustive_small_against_recursive_definition(self):
        strings = [
            "".join(p)
            for n in range(0, 4)
            for p in itertools.product("Axg", repeat=n)
        ]
        for a in strings:
            for b in strings:
                assert levenshtein(a, b) == naive_levenshtein(a, b)

    def test_length_bounds(self):
        rng = random.Random(23)
        for _ in range(300):
            a, b = random_wst(rng), random_wst(rng)
            d = levenshtein(a, b)
            assert abs(len(a) - len(b)) <= d <= max(len(a), len(b), 0)

    def test_symmetry(self):
        rng = random.Random(29)
        for _ in range(200):
            a, b = random_wst(rng), random_wst(rng)
            assert levenshtein(a, b) == levenshtein(b, a)


def record_with_norm(doc, line, word, norm, ref_font=60):
    # Height ref_font makes the stored length equal the normalized length.
    box = WordBox(0, 0, norm - 1, ref_font - 1)
    return WordRecord(
        doc, line, word, box, ref_font, norm, norm, classify_size(norm)
    )


def index_with_norms(norms):
    records = [record_with_norm("d", 0, i, n) for i, n in enumerate(norms)]
    return WordIndex(60, [DocEntry("d", "d", 800, 600)], records)


class TestSizePrefilter:
    def test_window_for_five_letters(self):
        index = index_with_norms([159, 160, 200, 240, 241, 300])
        kept = size_prefilter(index, 5, SearchParams(char_width=40))
        assert [r.norm_length for r in kept] == [160, 200, 240]

    def test_single_letter_window_starts_at_zero(self):
        index = index_with_norms([1, 40, 80, 81])
        kept = size_prefilter(index, 1, SearchParams(char_width=40))
        assert [r.norm_length for r in kept] == [1, 40, 80]

    def test_matches_brute_force_over_all_records(self):
        rng = random.Random(31)
        norms = [rng.randint(1, 700) for _ in range(200)]
        index = index_with_norms(norms)
        for query_len in (1, 2, 5, 9, 14):
            lo = (query_len - 1) * 40
            hi = (query_len + 1) * 40
            expected = sorted(
                r.word_idx for r in index.records if lo <= r.norm_length <= hi
            )
            got = sorted(r.word_idx for r in size_prefilter(index, query_len))
            assert got == expected

    def test_rejects_bad_query_len(self):
        with pytest.raises(ValueError):
            size_prefilter(index_with_norms([100]), 0)


def corpus_page(words_by_line, font=40, width=1400):
    layout = compose_page([(metrics(font), line) for line in words_by_line], width=width)
    return layout


def build_corpus(words_by_line, doc_id="page"):
    layout = corpus_page(words_by_line)
    index = build_index([(doc_id, layout.image)], ref_font=60)
    positions = {}
    for li, line in enumerate(layout.words):
        for wi, text in enumerate(line):
            positions[text] = (li, wi)
    return layout, index, positions


class TestSearch:
    def test_planted_word_found_at_distance_zero(self):
        layout, index, pos = build_corpus([["dipped", "help", "sauce"]])
        results = search(index, lambda doc: layout.image, "help")
        assert results
        top = results[0]
        assert (top.record.line_idx, top.record.word_idx) == pos["help"]
        assert top.distance == 0

    def test_no_match_when_all_far(self):
        layout, index, pos = build_corpus([["dipped", "python", "sauce"]])
        # "mummy" -> xxxxxxxxg: far from everything planted of similar size
        results = search(index, lambda doc: layout.image, "quest")
        assert results == []

    def test_results_subset_of_prefilter_and_threshold_monotone(self):
        layout, index, pos = build_corpus(
            [["dipped", "help", "sauce"], ["drop", "paper", "noon"]]
        )
        wide = search(index, lambda doc: layout.image, "drop",
                      SearchParams(threshold=5.0))
        narrow = search(index, lambda doc: layout.image, "drop",
                        SearchParams(threshold=1.0))
        wide_keys = {(m.record.line_idx, m.record.word_idx) for m in wide}
        narrow_keys = {(m.record.line_idx, m.record.word_idx) for m in narrow}
        assert narrow_keys <= wide_keys
        prefilter_keys = {
            (r.line_idx, r.word_idx) for r in size_prefilter(index, 4)
        }
        assert wide_keys <= prefilter_keys

    def test_identical_words_tie_broken_by_position(self):
        layout, index, pos = build_corpus(
            [["dipped", "help", "sauce"], ["help", "dotted", "noon"]]
        )
        results = search(index, lambda doc: layout.image, "help")
        zero = [m for m in results if m.distance == 0]
        assert len(zero) == 2
        keys = [(m.record.line_idx, m.record.word_idx) for m in zero]
        assert keys == sorted(keys)

    def test_wst_cached_after_search(self):
        layout, index, pos = build_corpus([["dipped", "help", "sauce"]])
        loads = []

        def provider(doc):
            loads.append(doc)
            return layout.image

        first = search(index, provider, "help")
        assert loads  # pages were needed
        cached = [r.wst for r in size_prefilter(index, 4)]
        assert all(w is not None for w in cached)
        loads.clear()
        second = search(index, provider, "help")
        assert loads == []  # cache hit, no page loads
        assert [(m.record.word_idx, m.distance) for m in first] == [
            (m.record.word_idx, m.distance) for m in second
        ]

    def test_missing_page_error_names_doc(self):
        layout, index, pos = build_corpus([["dipped", "help", "sauce"]])

        def provider(doc):
            raise FileNotFoundError("gone")

        with pytest.raises(MissingPageError) as err:
            search(index, provider, "help")
        assert "page" in str(err.value)

    def test_empty_and_unsupported_queries(self):
        layout, index, pos = build_corpus([["dipped", "help", "sauce"]])
        with pytest.raises(ValueError):
            search(index, lambda doc: layout.image, "")
        with pytest.raises(UnsupportedCharacterError):
            search(index, lambda doc: layout.image, "a1")

    def test_deterministic_ranked_output(self):
        layout, index, pos = build_corpus(
            [["dipped", "help", "sauce"], ["drop", "paper", "noon"]]
        )
        runs = []
        for _ in range(2):
            results = search(index, lambda doc: layout.image, "drop")
            runs.append([format_result(m) for m in results])
        assert runs[0] == runs[1]


class TestFormatResult:
    def test_line_format(self):
        rec = record_with_norm("doc1", 2, 7, 100)
        line = format_result(MatchResult(rec, 1))
        assert line == "1 doc1 2 7 0 0 99 59"
