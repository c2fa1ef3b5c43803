import pytest

from formalia.corpus.models import (
    FormalityLabel,
    LabeledCorpus,
    ParallelCorpus,
    SentencePair,
)
from formalia.pipeline.synthetic import (
    synthetic_corpus,
    synthetic_in_domain,
    synthetic_sentences,
)
from formalia.pivot.models import LABEL_COMBINATIONS, CombinationStats, Triplet
from formalia.pivot.pivot import (
    combination_stats,
    intersect_on_source,
    pivot_in_domain_sets,
    render_stats,
    save_stats,
    zero_shot_mine,
)
from formalia.utils.exceptions import EmptyPivotSeedsError

F, I, N = FormalityLabel.FORMAL, FormalityLabel.INFORMAL, FormalityLabel.NONE


def labeled(rows: list[tuple[str, str, FormalityLabel]]) -> LabeledCorpus:
    return LabeledCorpus(
        pairs=tuple(
            SentencePair(source=source, target=target, index=index)
            for index, (source, target, _) in enumerate(rows)
        ),
        labels=tuple(label for _, _, label in rows),
    )


@pytest.fixture
def triplets():
    first = labeled(
        [
            ("s1", "d1", F),
            ("s2", "d2", F),
            ("s3", "d3", I),
            ("s4", "d4", N),
        ]
    )
    second = labeled(
        [
            ("s4", "f4", N),
            ("s1", "f1", F),
            ("s2", "f2", I),
            ("s3", "f3", N),
            ("s9", "f9", F),
        ]
    )

    return intersect_on_source(first, second)


def test_intersect_on_source(triplets):
    assert [triplet.source for triplet in triplets] == ["s1", "s2", "s3", "s4"]
    assert triplets.triplets[1] == Triplet(
        source="s2", target_a="d2", target_b="f2", label_a=F, label_b=I
    )
    assert triplets.coverage_a == 1.0
    assert triplets.coverage_b == 0.8


def test_intersect_single_source():
    result = intersect_on_source(labeled([("hi", "x", F)]), labeled([("hi", "y", I)]))

    assert result.triplets == (
        Triplet(source="hi", target_a="x", target_b="y", label_a=F, label_b=I),
    )


def test_intersect_collapses_whitespace_and_drops_repeats():
    result = intersect_on_source(
        labeled([("good  morning", "a", F), ("good morning", "b", I)]),
        labeled([("good morning", "c", F)]),
    )

    assert len(result) == 1
    assert result.triplets[0].target_a == "a"
    assert result.dropped_a == 1


def test_combination_stats(triplets):
    stats = combination_stats(triplets)

    assert stats.counts[(F, F)] == 1
    assert stats.counts[(F, I)] == 1
    assert stats.counts[(I, N)] == 1
    assert sum(stats.counts.values()) == 3
    assert stats.unannotated == 1
    assert stats.total == 4
    assert stats.annotated == 3
    assert stats.both_annotated_fraction == pytest.approx(2 / 3)
    assert stats.both_annotated_share_of_total == pytest.approx(2 / 4)
    assert stats.agreement_fraction == pytest.approx(1 / 2)


def test_render_stats(triplets):
    rendered = render_stats(combination_stats(triplets), coverage=triplets)
    lines = rendered.splitlines()

    assert lines[0] == "F F 1 33.33%"
    assert lines[1] == "I I 0 0.00%"
    assert "annotated 3 of 4" in lines
    assert "agreement 50.00%" in lines
    assert lines[-1] == "coverage 100.00% / 80.00%"
    assert len(lines) == len(LABEL_COMBINATIONS) + 4


def test_unannotated_stats_are_undefined():
    stats = CombinationStats(unannotated=5, total=5)

    assert stats.percent((F, F)) is None
    assert stats.agreement_fraction is None
    assert render_stats(stats).splitlines()[0] == "F F 0 n/a"


def test_save_stats(tmp_path, triplets):
    save_stats(combination_stats(triplets), tmp_path / "stats.tsv")

    lines = (tmp_path / "stats.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "label_a\tlabel_b\tcount\tpercent"
    assert lines[1] == "F\tF\t1\t33.33"
    assert len(lines) == 1 + len(LABEL_COMBINATIONS)


def test_pivot_in_domain_sets(triplets):
    formal, informal = pivot_in_domain_sets(triplets)

    assert formal == ["s1"]
    assert informal == []


def test_zero_shot_needs_both_seed_sets():
    corpus = ParallelCorpus(pairs=(SentencePair(source="a", target="b", index=0),))

    with pytest.raises(EmptyPivotSeedsError):
        zero_shot_mine(corpus, ["a"], [], target_count=1)
    with pytest.raises(EmptyPivotSeedsError):
        zero_shot_mine(corpus, [], ["a"], target_count=1)


def test_zero_shot_mining_quality():
    sentences = synthetic_sentences(1000, seed=31)
    corpus = synthetic_corpus(sentences, "es")
    formal_seeds = synthetic_in_domain(200, "en", F, seed=32)
    informal_seeds = synthetic_in_domain(200, "en", I, seed=33)

    mined, alpha, reached = zero_shot_mine(
        corpus, formal_seeds, informal_seeds, target_count=600
    )

    assert reached
    assert mined.labeled_count() >= 600
    for label in (F, I):
        predicted = {pair.index for pair in mined.with_label(label)}
        gold = {index for index, item in enumerate(sentences) if item.label == label}

        assert len(predicted & gold) / len(predicted) >= 0.8
