import pytest

from formalia.corpus.models import FormalityLabel
from formalia.scorer.models import AnnotatedReference, Judgment, ScoreReport, Verdict
from formalia.scorer.scorer import (
    corpus_accuracy,
    count_matches,
    judge_hypothesis,
    judge_in_context,
    load_annotated,
    load_contexts,
    parse_annotated,
    phrase_found,
    render_score_report,
    save_judgments,
)
from formalia.utils.exceptions import (
    AlignmentError,
    AnnotationParseError,
    ArgumentError,
)

from .conftest import write_file

F, I, N = FormalityLabel.FORMAL, FormalityLabel.INFORMAL, FormalityLabel.NONE

FORMAL_REF = "Können [F]Sie[/F] mir [F]Ihren Pass[/F] zeigen ?"
INFORMAL_REF = "Kannst [I]du[/I] mir [I]deinen Pass[/I] zeigen ?"


@pytest.fixture
def references() -> tuple[AnnotatedReference, AnnotatedReference]:
    return parse_annotated(FORMAL_REF, F), parse_annotated(INFORMAL_REF, I)


def test_parse_annotated():
    reference = parse_annotated("Können [F]Sie[/F] mir  helfen ?")

    assert reference.plain_text == "Können Sie mir helfen ?"
    assert reference.phrases == ("Sie",)
    assert reference.polarity == F


def test_parse_multiword_phrase(references):
    formal, informal = references

    assert formal.phrases == ("Sie", "Ihren Pass")
    assert informal.plain_text == "Kannst du mir deinen Pass zeigen ?"
    assert parse_annotated("[I]  deinen   Pass [/I]").phrases == ("deinen Pass",)


@pytest.mark.parametrize(
    "line, phrases, polarity",
    [
        ("Guten Tag .", (), N),
        ("[F][/F] Tag", (), F),
        ("[F]Sie[/F] und [I]du[/I]", ("Sie", "du"), N),
    ],
)
def test_parse_edge_cases(line, phrases, polarity):
    reference = parse_annotated(line)

    assert reference.phrases == phrases
    assert reference.polarity == polarity


def test_file_polarity_wins():
    assert parse_annotated("[F]Sie[/F]", I).polarity == I


@pytest.mark.parametrize(
    "line, message",
    [
        ("[F]a [F]b[/F][/F]", "nested marker"),
        ("a[/F]", "unexpected closing marker"),
        ("[F]a[/I]", "unexpected closing marker"),
        ("[F]a", "unclosed marker"),
    ],
)
def test_parse_errors(line, message):
    with pytest.raises(AnnotationParseError, match=message):
        parse_annotated(line)


def test_load_annotated_reports_line_numbers(tmp_path):
    path = write_file(
        tmp_path / "test.formal.de",
        ["[F]Sie[/F] kommen", "Guten Tag", "[F]Ihnen auch"],
    )

    with pytest.raises(AnnotationParseError, match="line 3: unclosed marker"):
        load_annotated(path, F)


def test_load_annotated(tmp_path):
    path = write_file(tmp_path / "test.formal.de", [FORMAL_REF, "Guten Tag"])

    loaded = load_annotated(path, F)

    assert [reference.phrases for reference in loaded] == [("Sie", "Ihren Pass"), ()]
    assert all(reference.polarity == F for reference in loaded)


def test_phrase_found_whole_tokens():
    assert phrase_found(["Sie", "kommen"], "Sie")
    assert not phrase_found(["Siegel"], "Sie")
    assert not phrase_found(["sie"], "Sie")
    assert phrase_found(["zeig", "Ihren", "Pass"], "Ihren Pass")
    assert not phrase_found(["Ihren", "neuen", "Pass"], "Ihren Pass")
    assert not phrase_found([], "Sie")


def test_each_phrase_counts_once(references):
    formal, _ = references

    assert count_matches("Sie Sie Sie", formal) == 1
    assert count_matches("Sie zeigen Ihren Pass", formal) == 2


HAND_CASES = [
    ("Können Sie mir Ihren Pass zeigen ?", F, Verdict.CORRECT, 2, 0),
    ("Kannst du mir deinen Pass zeigen ?", F, Verdict.INCORRECT, 0, 2),
    ("Zeig mal den Pass", F, Verdict.SKIPPED, 0, 0),
    ("Können Sie mir deinen Pass zeigen ?", F, Verdict.INCORRECT, 1, 1),
    ("Siegel Ihren Pass", F, Verdict.CORRECT, 1, 0),
    ("Siegel", F, Verdict.SKIPPED, 0, 0),
    ("Sie Sie Sie du", F, Verdict.INCORRECT, 1, 1),
    ("Sie du deinen Pass", F, Verdict.INCORRECT, 1, 2),
    ("Sie zeigen Ihren Pass und du", F, Verdict.CORRECT, 2, 1),
    ("ihren pass", F, Verdict.SKIPPED, 0, 0),
    ("Kannst du mir deinen Pass zeigen ?", I, Verdict.CORRECT, 2, 0),
    ("Können Sie mir Ihren Pass zeigen ?", I, Verdict.INCORRECT, 0, 2),
    ("Zeig mal den Pass", I, Verdict.SKIPPED, 0, 0),
    ("du", I, Verdict.CORRECT, 1, 0),
    ("Sie", I, Verdict.INCORRECT, 0, 1),
    ("du Sie", I, Verdict.INCORRECT, 1, 1),
    ("deinen Pass du Sie", I, Verdict.CORRECT, 2, 1),
    ("dir du", I, Verdict.CORRECT, 1, 0),
    ("deinen  Pass", I, Verdict.CORRECT, 1, 0),
    ("Ihren Pass deinen Pass", I, Verdict.INCORRECT, 1, 1),
]


@pytest.mark.parametrize("hypothesis, context, verdict, desired, opposite", HAND_CASES)
def test_judge_in_context(references, hypothesis, context, verdict, desired, opposite):
    formal, informal = references

    assert judge_in_context(hypothesis, formal, informal, context) == Judgment(
        verdict=verdict, n_desired=desired, n_opposite=opposite
    )


def test_corpus_accuracy_on_hand_cases(references):
    formal, informal = references
    count = len(HAND_CASES)

    report = corpus_accuracy(
        [case[0] for case in HAND_CASES],
        [formal] * count,
        [informal] * count,
        [case[1] for case in HAND_CASES],
    )

    assert (report.correct, report.incorrect, report.skipped) == (8, 8, 4)
    assert report.evaluated == 16
    assert report.accuracy == 0.5
    assert [judgment.verdict for judgment in report.judgments] == [
        case[2] for case in HAND_CASES
    ]


def test_judge_needs_opposite_polarities(references):
    formal, _ = references

    with pytest.raises(ArgumentError):
        judge_hypothesis("Sie", formal, formal)
    with pytest.raises(ArgumentError):
        judge_in_context("Sie", *references, N)


def test_accuracy_ignores_skipped():
    report = ScoreReport(
        judgments=[
            Judgment(Verdict.CORRECT, 1, 0),
            Judgment(Verdict.INCORRECT, 0, 1),
            Judgment(Verdict.SKIPPED, 0, 0),
        ]
    )

    assert report.accuracy == 0.5
    assert ScoreReport(judgments=[Judgment(Verdict.SKIPPED, 0, 0)]).accuracy is None


def test_judgment_consistency():
    with pytest.raises(ValueError):
        Judgment(Verdict.SKIPPED, 1, 0)


def test_corpus_accuracy_misaligned(references):
    formal, informal = references

    with pytest.raises(AlignmentError):
        corpus_accuracy(["a", "b"], [formal], [informal, informal], [F, F])


def test_render_and_save(tmp_path, references):
    formal, informal = references
    report = corpus_accuracy(
        ["Sie", "du", "nichts"], [formal] * 3, [informal] * 3, [F] * 3
    )

    lines = render_score_report(report).splitlines()
    assert lines[0] == "accuracy=0.5000"
    assert "evaluated=2" in lines
    assert "skipped=1" in lines

    save_judgments(report, tmp_path / "judgments.tsv")
    saved = (tmp_path / "judgments.tsv").read_text(encoding="utf-8").splitlines()
    assert saved[0] == "sample\tcontext\tjudgment\tn_desired\tn_opposite"
    assert saved[3] == "2\tF\tSkipped\t0\t0"


def test_load_contexts(tmp_path):
    assert load_contexts("F", 3) == [F, F, F]
    assert load_contexts("I", 1) == [I]

    path = write_file(tmp_path / "contexts", ["F", "I", "F"])
    assert load_contexts(str(path), 3) == [F, I, F]

    with pytest.raises(AlignmentError):
        load_contexts(str(path), 2)
    with pytest.raises(ArgumentError):
        load_contexts(str(write_file(tmp_path / "bad", ["F", "X"])), 2)
