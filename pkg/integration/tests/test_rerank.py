import pytest

from formalia.corpus.models import FormalityLabel
from formalia.pipeline.synthetic import synthetic_in_domain, synthetic_nbest
from formalia.rerank.lexicon import (
    build_lexicon,
    hypothesis_formality_score,
    load_lexicon,
    save_lexicon,
    term_probability,
)
from formalia.rerank.models import FormalityLexicon, Hypothesis, NBestList
from formalia.rerank.rerank import (
    load_nbest,
    oracle_experiment,
    render_oracle_report,
    rerank_nbest,
    save_nbest,
    save_oracle_report,
)
from formalia.scorer.scorer import parse_annotated
from formalia.utils.exceptions import (
    AlignmentError,
    ArgumentError,
    LexiconError,
    NBestFormatError,
)

from .conftest import make_nbest, write_file

F, I = FormalityLabel.FORMAL, FormalityLabel.INFORMAL


def test_lexicon_values(sie_du_lexicon):
    sie = sie_du_lexicon.entries["Sie"]
    kommen = sie_du_lexicon.entries["kommen"]
    du = sie_du_lexicon.entries["du"]

    assert sie_du_lexicon.max_abs_diff == 3
    assert (sie.f_count, sie.i_count) == (3, 0)
    assert sie.beta == pytest.approx(1.0, abs=1e-12)
    assert sie.kappa == 1
    assert sie.p_formal == pytest.approx(1.0, abs=1e-12)
    assert sie.p_informal == pytest.approx(0.0, abs=1e-12)
    assert kommen.beta == pytest.approx(1 / 3, abs=1e-12)
    assert kommen.p_formal == pytest.approx(1 / 3, abs=1e-12)
    assert du.p_informal == pytest.approx(1 / 3, abs=1e-12)
    assert sie_du_lexicon.kappa_threshold == 0.33


def test_balanced_term_is_nullified():
    lexicon = build_lexicon(["ja Sie", "Sie"], ["ja du"])
    ja = lexicon.entries["ja"]

    assert ja.kappa == 0
    assert ja.p_formal == 0.0
    assert ja.p_informal == 0.0


def test_kappa_threshold_boundary():
    lexicon = build_lexicon(["a a b b b x x x x x"], ["a b b"])

    assert lexicon.entries["a"].kappa == 1
    assert lexicon.entries["b"].kappa == 0


def test_probabilities_stay_below_one():
    lexicon = build_lexicon(
        ["Sie sind hier", "Sie kommen heute", "bitte"],
        ["du bist hier", "kommst du heute", "bitte bitte"],
    )

    for entry in lexicon.entries.values():
        assert 0.0 <= entry.beta <= 1.0
        assert entry.p_formal + entry.p_informal <= 1.0 + 1e-12


def test_empty_lexicon_input():
    with pytest.raises(LexiconError):
        build_lexicon([], [""])


def test_term_probability(sie_du_lexicon):
    assert term_probability(sie_du_lexicon, "Sie", F) == 1.0
    assert term_probability(sie_du_lexicon, "Sie", I) == 0.0
    assert term_probability(sie_du_lexicon, "Haus", F) == 0.0


def test_hypothesis_formality_score(sie_du_lexicon):
    assert hypothesis_formality_score(
        sie_du_lexicon, "Sie kommen heute", F
    ) == pytest.approx(4 / 3, abs=1e-12)
    assert hypothesis_formality_score(sie_du_lexicon, "", F) == 0.0
    assert hypothesis_formality_score(sie_du_lexicon, "Sie Sie", F) == 2.0


def test_lexicon_round_trip(tmp_path, sie_du_lexicon):
    save_lexicon(sie_du_lexicon, tmp_path / "lexicon.tsv")

    assert load_lexicon(tmp_path / "lexicon.tsv") == sie_du_lexicon


def test_rerank_formal_context(sie_du_lexicon):
    nbest = make_nbest("s0", ["du kommst", "Sie kommen"], step=0.2)

    reranked = rerank_nbest(sie_du_lexicon, nbest, F)

    assert reranked.hypotheses[0].text == "Sie kommen"
    assert reranked.hypotheses[0].rank == 1
    assert reranked.hypotheses[0].combined_score == pytest.approx(-1.2 + 4 / 3)
    assert reranked.hypotheses[1].combined_score == pytest.approx(-1.0 - 2 / 3)


def test_rerank_informal_context(sie_du_lexicon):
    nbest = make_nbest("s0", ["du kommst", "Sie kommen"], step=0.2)

    reranked = rerank_nbest(sie_du_lexicon, nbest, I)

    assert [hypothesis.text for hypothesis in reranked.hypotheses] == [
        "du kommst",
        "Sie kommen",
    ]


def test_rerank_empty_lexicon_keeps_order():
    nbest = make_nbest("s0", ["a", "b", "c"])

    reranked = rerank_nbest(FormalityLexicon(), nbest, F)

    assert [hypothesis.rank for hypothesis in reranked.hypotheses] == [0, 1, 2]
    assert [hypothesis.combined_score for hypothesis in reranked.hypotheses] == [
        hypothesis.base_score for hypothesis in nbest.hypotheses
    ]


def test_rerank_ties_keep_rank_order(sie_du_lexicon):
    nbest = make_nbest("s0", ["Haus", "Baum", "Sie"], step=0.0)

    reranked = rerank_nbest(sie_du_lexicon, nbest, I)

    assert [hypothesis.rank for hypothesis in reranked.hypotheses] == [0, 1, 2]


def test_rerank_needs_a_context(sie_du_lexicon):
    with pytest.raises(ArgumentError):
        rerank_nbest(sie_du_lexicon, make_nbest("s0", ["a"]), FormalityLabel.NONE)


def test_nbest_round_trip(tmp_path):
    lists = [make_nbest("s0", ["Sie kommen", "du kommst"]), make_nbest("s1", ["x"])]

    save_nbest(lists, tmp_path / "test.nbest")

    assert load_nbest(tmp_path / "test.nbest") == lists


@pytest.mark.parametrize(
    "lines",
    [
        ["s0 ||| 0 ||| -1.0"],
        ["s0 ||| zero ||| -1.0 ||| Hallo"],
        ["s0 ||| 1 ||| -1.0 ||| Hallo"],
        ["s0 ||| 0 ||| -1.0 ||| Hallo", "s0 ||| 0 ||| -1.1 ||| Hi"],
    ],
)
def test_nbest_format_errors(tmp_path, lines):
    path = write_file(tmp_path / "bad.nbest", lines)

    with pytest.raises(NBestFormatError):
        load_nbest(path)


def test_nbest_error_names_the_line(tmp_path):
    path = write_file(
        tmp_path / "bad.nbest", ["s0 ||| 0 ||| -1.0 ||| Hallo", "s0 ||| 1 ||| -1.2"]
    )

    with pytest.raises(NBestFormatError, match="line 2"):
        load_nbest(path)


def oracle_fixture():
    texts = [
        ["Sie kommen", "du kommst", "Haus"],
        ["du kommst", "Haus", "Sie kommen"],
        ["Haus", "Baum", "Weg"],
    ]
    lists = [make_nbest(f"s{n}", sample) for n, sample in enumerate(texts)]
    formal = [parse_annotated("[F]Sie[/F] kommen", F)] * 3
    informal = [parse_annotated("[I]du[/I] kommst", I)] * 3

    return lists, formal, informal, [F, F, F]


def test_oracle_fixture(sie_du_lexicon):
    report = oracle_experiment(*oracle_fixture(), ks=[3, 1], lexicon=sie_du_lexicon)

    assert [row.k for row in report.rows] == [1, 3]

    first, third = report.row(1), report.row(3)
    assert first.oracle_accuracy == first.model_accuracy == 0.5
    assert first.n_cases == 0
    assert first.delta_to_best is None

    assert third.model_accuracy == 0.5
    assert third.oracle_accuracy == 1.0
    assert third.delta_to_best == 2
    assert third.n_cases == 1
    assert third.reranked_accuracy == 1.0


def test_oracle_follows_list_order(sie_du_lexicon):
    nbest = NBestList(
        sample_id="s0",
        hypotheses=(
            Hypothesis(text="Haus", base_score=-1.0, rank=2),
            Hypothesis(text="du kommst", base_score=-1.0, rank=0),
            Hypothesis(text="Sie kommen", base_score=-1.0, rank=1),
        ),
    )
    formal = parse_annotated("[F]Sie[/F] kommen", F)
    informal = parse_annotated("[I]du[/I] kommst", I)

    report = oracle_experiment(
        [nbest], [formal], [informal], [F], ks=[2, 3], lexicon=sie_du_lexicon
    )

    assert report.row(2).reranked_accuracy is None
    assert report.row(3).reranked_accuracy == 1.0
    assert report.row(3).oracle_accuracy == 1.0


def test_oracle_arguments():
    lists, formal, informal, contexts = oracle_fixture()

    with pytest.raises(ArgumentError):
        oracle_experiment(lists, formal, informal, contexts, ks=[])
    with pytest.raises(ArgumentError):
        oracle_experiment(lists, formal, informal, contexts, ks=[0])
    with pytest.raises(AlignmentError):
        oracle_experiment(lists, formal[:2], informal, contexts, ks=[1])


def test_oracle_truncated_lists():
    report = oracle_experiment(*oracle_fixture(), ks=[1, 5])

    assert report.truncated == 3
    assert report.row(5).oracle_accuracy == 1.0
    assert report.row(5).reranked_accuracy is None


def test_oracle_on_synthetic_lists(tmp_path):
    ks = [1, 5, 10, 20]
    lists, formal, informal, contexts = synthetic_nbest(60, "de", 20, seed=41)
    lexicon = build_lexicon(
        synthetic_in_domain(300, "de", F, seed=42),
        synthetic_in_domain(300, "de", I, seed=43),
    )

    report = oracle_experiment(lists, formal, informal, contexts, ks, lexicon=lexicon)

    oracle = [report.row(k).oracle_accuracy for k in ks]
    assert oracle == sorted(oracle)
    assert report.row(1).oracle_accuracy == report.row(1).model_accuracy

    for k in ks:
        row = report.row(k)
        assert row.reranked_accuracy >= row.model_accuracy
        assert row.model_quality is not None

    last = report.row(max(ks))
    assert last.reranked_accuracy >= 0.9 * last.oracle_accuracy

    save_oracle_report(report, tmp_path / "oracle.tsv")
    assert len((tmp_path / "oracle.tsv").read_text().splitlines()) == len(ks) + 1
    assert render_oracle_report(report).splitlines()[0].split()[0] == "k"
