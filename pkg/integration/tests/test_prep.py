import numpy as np
import pytest

from formalia.corpus.models import SentencePair
from formalia.lm.models import PerplexityScore
from formalia.prep.models import (
    PAIR_RULES,
    PUNCTUATION_TABLE,
    AsciiMode,
    DropReason,
    FilterConfig,
)
from formalia.prep.prep import (
    clean_corpus,
    clean_pair,
    confidence_filter,
    dedup,
    deduplicate,
    has_link,
    load_filter_config,
    near_duplicate_key,
    normalize_punctuation,
    render_stats,
    strip_non_ascii,
    truncate_by_domain,
)
from formalia.utils.exceptions import ArgumentError, DataError, MissingScoreError

from .conftest import make_corpus, write_file


def words(word: str, count: int) -> str:
    return " ".join([word] * count)


def reason(source: str, target: str, config: FilterConfig | None = None):
    decision = clean_pair(
        SentencePair(source=source, target=target, index=0), config or FilterConfig()
    )
    return decision.reason


@pytest.mark.parametrize(
    "source, target, expected",
    [
        (words("word", 251), words("wort", 251), DropReason.LENGTH),
        (words("word", 250), words("wort", 250), None),
        (words("word", 30), words("wort", 46), DropReason.RATIO),
        (words("word", 46), words("wort", 30), DropReason.RATIO),
        (words("word", 30), words("wort", 45), None),
        ("", "Hallo", DropReason.EMPTY),
        ("Hallo", "Hallo", DropReason.IDENTICAL),
        ("Hello there", "hallo da", DropReason.CASE),
        ("Hello.", "Hallo!", DropReason.PUNCTUATION),
        ("Hello", "Hallo.", DropReason.PUNCTUATION),
        ("Hello?", "Hallo?", None),
        ("see www.example.com", "siehe www.example.com", DropReason.LINK),
        ("see https://example.com now", "siehe das", DropReason.LINK),
    ],
)
def test_pair_rules(source, target, expected):
    assert reason(source, target) == expected


def test_first_failing_rule_wins():
    assert reason(words("same", 300), words("same", 300)) == DropReason.LENGTH
    assert reason("hallo", "Hallo.") == DropReason.CASE


def test_disabled_rule():
    config = FilterConfig(rules=frozenset(PAIR_RULES) - {DropReason.LINK})

    assert reason("see www.example.com", "siehe www.example.com", config) is None


def test_non_ascii_modes():
    decision = clean_pair(
        SentencePair(source="Café time", target="Kaffee Zeit", index=3),
        FilterConfig(),
    )
    assert decision.keep
    assert decision.pair.source == "Caf time"
    assert decision.pair.index == 3

    assert (
        reason("Café time", "Kaffee Zeit", FilterConfig(ascii_mode=AsciiMode.DROP))
        == DropReason.NON_ASCII
    )
    assert reason("ééé", "abc") == DropReason.NON_ASCII


def test_strip_non_ascii():
    assert strip_non_ascii("a ß b") == "a b"
    assert strip_non_ascii("ß") == ""


def test_has_link():
    assert has_link("visit WWW.example.org")
    assert has_link("http://x.y")
    assert not has_link("www. is not a link")


def test_normalize_punctuation():
    assert normalize_punctuation("„Hallo“") == '"Hallo"'
    assert normalize_punctuation("warte…  jetzt") == "warte... jetzt"
    assert normalize_punctuation("a – b") == "a - b"


def test_normalize_punctuation_is_idempotent():
    rng = np.random.default_rng(17)
    alphabet = list(PUNCTUATION_TABLE) + list("ab .,'\"-") + ["  "]

    for _ in range(10000):
        text = "".join(rng.choice(alphabet, size=int(rng.integers(0, 12))))
        once = normalize_punctuation(text)
        assert normalize_punctuation(once) == once


def test_near_duplicate_key():
    assert near_duplicate_key(" Hello World ?! ") == "hello world"
    assert near_duplicate_key("...") == ""


def test_deduplicate():
    corpus = make_corpus(
        [
            ("Hello.", "Hallo."),
            ("Hello.", "Hallo."),
            ("hello", "hallo"),
            ("Bye", "Tschüss"),
        ]
    )

    deduplicated, exact, near = deduplicate(corpus)

    assert [pair.index for pair in deduplicated] == [0, 3]
    assert (exact, near) == (1, 1)
    assert dedup(corpus).pairs == deduplicated.pairs


def test_confidence_filter():
    corpus = make_corpus([("a", "b"), ("c", "d")], scores=[0.69, 0.70])

    assert [pair.index for pair in confidence_filter(corpus, 0.7)] == [1]
    assert len(confidence_filter(corpus, 0.0)) == 2
    assert len(confidence_filter(corpus, 1.01)) == 0

    with pytest.raises(MissingScoreError):
        confidence_filter(make_corpus([("a", "b")]), 0.5)


def test_clean_corpus():
    corpus = make_corpus(
        [
            ("Hello there", "Hallo da"),
            ("Good morning", "Guten Morgen"),
            ("Good morning", "Guten Morgen"),
            ("Hallo", "Hallo"),
            ("„Quote“ now", "\"Zitat\" jetzt"),
        ],
        scores=[0.69, 0.70, 0.9, 0.9, 0.95],
    )

    cleaned, stats = clean_corpus(corpus, FilterConfig())

    assert [pair.index for pair in cleaned] == [1, 4]
    assert cleaned[1].source == '"Quote" now'
    assert stats.drops[DropReason.CONFIDENCE] == 1
    assert stats.drops[DropReason.DUPLICATE] == 1
    assert stats.drops[DropReason.IDENTICAL] == 1
    assert stats.reconciles()

    rendered = render_stats(stats).splitlines()
    assert rendered[:2] == ["input=5", "output=2"]
    assert "drop.identical=1" in rendered


def test_clean_corpus_without_scores():
    cleaned, stats = clean_corpus(
        make_corpus([("Hello there", "Hallo da")]), FilterConfig()
    )

    assert len(cleaned) == 1
    assert stats.drops[DropReason.CONFIDENCE] == 0


def test_filter_config_validation():
    with pytest.raises(ArgumentError):
        FilterConfig(confidence_threshold=1.01)
    with pytest.raises(ArgumentError):
        FilterConfig(max_tokens=0)


def test_truncate_by_domain():
    corpus = make_corpus([("a", "x"), ("b", "y"), ("c", "z")])
    ranking = [
        PerplexityScore(pair_index=index, pp_in=1.0, pp_gen=1.0, diff=0.0)
        for index in (2, 0, 1)
    ]

    assert [pair.source for pair in truncate_by_domain(corpus, ranking, 2)] == [
        "a",
        "c",
    ]
    assert len(truncate_by_domain(corpus, ranking, 10)) == 3
    with pytest.raises(ArgumentError):
        truncate_by_domain(corpus, ranking, -1)


def test_load_filter_config(tmp_path):
    path = write_file(
        tmp_path / "filters.conf",
        ["# cleaning", "", "max_tokens = 100", "ascii=drop", "link=false"],
    )

    config = load_filter_config(path)

    assert config.max_tokens == 100
    assert config.max_ratio == 1.5
    assert config.ascii_mode == AsciiMode.DROP
    assert DropReason.LINK not in config.rules
    assert DropReason.CASE in config.rules


@pytest.mark.parametrize("line", ["colour=blue", "max_tokens=many", "max_tokens"])
def test_load_filter_config_errors(tmp_path, line):
    with pytest.raises(DataError):
        load_filter_config(write_file(tmp_path / "filters.conf", [line]))
