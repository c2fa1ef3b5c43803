import csv
import re
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from beartype import beartype

from formalia.corpus.corpus import read_lines
from formalia.corpus.models import FormalityLabel
from formalia.log.log import Logger
from formalia.scorer.models import (
    JUDGMENT_COLUMNS,
    MARKER_PATTERN,
    AnnotatedReference,
    Judgment,
    ScoreReport,
    Verdict,
)
from formalia.utils.exceptions import (
    AlignmentError,
    AnnotationParseError,
    ArgumentError,
)
from formalia.utils.parallel import ordered_map

logger = Logger(module_name="scorer", package_name="scorer")


def _collapse(text: str) -> str:
    return " ".join(text.split())


@beartype
def parse_annotated(
    line: str,
    polarity: FormalityLabel | None = None,
    line_number: int | None = None,
) -> AnnotatedReference:
    """
    Parse one reference annotated with `[F]...[/F]` or `[I]...[/I]` markers.

    Parameters:
        line (str): The annotated reference.
        polarity (FormalityLabel | None, optional): Formality of the annotation file.
            When None it is taken from the markers of the line.
        line_number (int | None, optional): Reported in parse errors.

    Returns:
        AnnotatedReference: Plain text and phrases in order.

    Raises:
        AnnotationParseError: On nested, unbalanced or stray closing markers.
    """

    where = f"line {line_number}: " if line_number is not None else ""

    plain, phrases = [], []
    open_kind: str | None = None
    current: list[str] = []
    kinds: set[str] = set()

    for piece in re.split(MARKER_PATTERN, line):
        if re.fullmatch(MARKER_PATTERN, piece):
            kind = piece.strip("[]/")
            if not piece.startswith("[/"):
                if open_kind is not None:
                    raise AnnotationParseError(
                        f"{where}nested marker {piece} inside [{open_kind}]"
                    )
                open_kind, current = kind, []
                kinds.add(kind)
                continue

            if open_kind != kind:
                raise AnnotationParseError(f"{where}unexpected closing marker {piece}")

            phrase = _collapse("".join(current))
            if phrase:
                phrases.append(phrase)
            open_kind = None
            continue

        plain.append(piece)
        if open_kind is not None:
            current.append(piece)

    if open_kind is not None:
        raise AnnotationParseError(f"{where}unclosed marker [{open_kind}]")

    if polarity is None:
        polarity = (
            FormalityLabel(kinds.pop()) if len(kinds) == 1 else FormalityLabel.NONE
        )

    return AnnotatedReference(
        plain_text=_collapse("".join(plain)),
        phrases=tuple(phrases),
        polarity=polarity,
    )


@beartype
def load_annotated(
    path: Path | str,
    polarity: FormalityLabel | None = None,
) -> list[AnnotatedReference]:
    """
    Read an annotated reference file, one reference per line.

    Parameters:
        path (Path | str): The annotation file.
        polarity (FormalityLabel | None, optional): Formality of the file.

    Returns:
        list[AnnotatedReference]: The references in file order.

    Raises:
        AnnotationParseError: With the 1-based line number of the first bad line.
    """

    return [
        parse_annotated(line, polarity=polarity, line_number=number)
        for number, line in enumerate(read_lines(path), start=1)
    ]


def phrase_found(tokens: Sequence[str], phrase: str) -> bool:
    """
    Whether the tokens of a phrase occur contiguously in a token sequence.
    """

    needle = phrase.split()
    if not needle or len(needle) > len(tokens):
        return False

    width = len(needle)
    return any(
        list(tokens[start : start + width]) == needle
        for start in range(len(tokens) - width + 1)
    )


def count_matches(text: str, reference: AnnotatedReference) -> int:
    "Number of annotated phrases of a reference found in a text"

    tokens = text.split()
    return sum(phrase_found(tokens, phrase) for phrase in reference.phrases)


@beartype
def judge_hypothesis(
    hypothesis: str,
    desired: AnnotatedReference,
    opposite: AnnotatedReference,
) -> Judgment:
    """
    Judge a hypothesis against the references of the desired and the opposite
    formality.

    Parameters:
        hypothesis (str): The hypothesis.
        desired (AnnotatedReference): Reference of the requested formality.
        opposite (AnnotatedReference): Reference of the other formality.

    Returns:
        Judgment: Correct iff more desired than opposite phrases are found, Skipped
            when none is found, Incorrect otherwise.

    Raises:
        ArgumentError: If both references carry the same known polarity.

    Note:
        Phrases match whole tokens, case-sensitively: "Sie" does not match inside
        "Siegel". Each annotated phrase counts at most once.
    """

    known = desired.polarity != FormalityLabel.NONE
    if known and desired.polarity == opposite.polarity:
        raise ArgumentError("The references must have opposite polarities")

    n_desired = count_matches(hypothesis, desired)
    n_opposite = count_matches(hypothesis, opposite)

    if n_desired + n_opposite == 0:
        verdict = Verdict.SKIPPED
    elif n_desired > n_opposite:
        verdict = Verdict.CORRECT
    else:
        verdict = Verdict.INCORRECT

    return Judgment(verdict=verdict, n_desired=n_desired, n_opposite=n_opposite)


def judge_in_context(
    hypothesis: str,
    formal: AnnotatedReference,
    informal: AnnotatedReference,
    context: FormalityLabel,
) -> Judgment:
    "Judge a hypothesis for the requested formality"

    if context == FormalityLabel.FORMAL:
        return judge_hypothesis(hypothesis, formal, informal)
    if context == FormalityLabel.INFORMAL:
        return judge_hypothesis(hypothesis, informal, formal)

    raise ArgumentError(f"The context must be F or I, got '{context}'")


def _judge_sample(
    sample: tuple[str, AnnotatedReference, AnnotatedReference, FormalityLabel],
) -> Judgment:
    return judge_in_context(*sample)


@beartype
def corpus_accuracy(
    hypotheses: Sequence[str],
    formal_refs: Sequence[AnnotatedReference],
    informal_refs: Sequence[AnnotatedReference],
    contexts: Sequence[FormalityLabel],
    workers: int | None = None,
) -> ScoreReport:
    """
    Judge every hypothesis and aggregate the accuracy over the non-skipped samples.

    Parameters:
        hypotheses (Sequence[str]): One hypothesis per sample.
        formal_refs (Sequence[AnnotatedReference]): Formal references.
        informal_refs (Sequence[AnnotatedReference]): Informal references.
        contexts (Sequence[FormalityLabel]): Requested formality per sample.
        workers (int | None, optional): Worker processes.

    Returns:
        ScoreReport: Per-sample judgments and aggregate counts.

    Raises:
        AlignmentError: If the inputs do not have the same length.
    """

    lengths = {
        "hypotheses": len(hypotheses),
        "formal references": len(formal_refs),
        "informal references": len(informal_refs),
        "contexts": len(contexts),
    }
    if len(set(lengths.values())) != 1:
        raise AlignmentError(
            "Misaligned scorer inputs: "
            + ", ".join(f"{count} {name}" for name, count in lengths.items())
        )

    judgments = ordered_map(
        _judge_sample,
        list(zip(hypotheses, formal_refs, informal_refs, contexts)),
        workers=workers,
        description="Scoring",
    )

    report = ScoreReport(judgments=judgments, contexts=list(contexts))

    logger.info(
        f"Accuracy {render_accuracy(report.accuracy)} over {report.evaluated} evaluated"
        f" samples, {report.skipped} skipped"
    )

    return report


def render_accuracy(accuracy: float | None) -> str:
    return "n/a" if accuracy is None else f"{accuracy:.4f}"


def render_score_report(report: ScoreReport) -> str:
    """
    Render a score report as `key=value` lines. The evaluated-sample count is
    always included.
    """

    return (
        "\n".join(
            [
                f"accuracy={render_accuracy(report.accuracy)}",
                f"correct={report.correct}",
                f"incorrect={report.incorrect}",
                f"skipped={report.skipped}",
                f"evaluated={report.evaluated}",
                f"samples={len(report.judgments)}",
            ]
        )
        + "\n"
    )


def save_judgments(report: ScoreReport, path: Path | str) -> None:
    "Write the per-sample judgments of a report as a TSV"

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    pd.DataFrame(
        [
            (
                sample,
                str(context),
                str(judgment.verdict),
                judgment.n_desired,
                judgment.n_opposite,
            )
            for sample, (judgment, context) in enumerate(
                zip(report.judgments, report.contexts)
            )
        ],
        columns=list(JUDGMENT_COLUMNS),
    ).to_csv(
        path,
        sep="\t",
        index=False,
        quoting=csv.QUOTE_MINIMAL,
        lineterminator="\n",
    )


@beartype
def load_contexts(value: str, count: int) -> list[FormalityLabel]:
    """
    Requested formality per sample: either `F` or `I` for every sample, or the path
    of a file with one `F`/`I` per line.

    Parameters:
        value (str): `F`, `I` or a file path.
        count (int): Number of samples.

    Returns:
        list[FormalityLabel]: One context per sample.

    Raises:
        AlignmentError: If the file does not have one line per sample.
        ArgumentError: If a context is neither F nor I.
    """

    if value in (FormalityLabel.FORMAL, FormalityLabel.INFORMAL):
        return [FormalityLabel(value)] * count

    lines = [line.strip() for line in read_lines(value)]
    if len(lines) != count:
        raise AlignmentError(f"{value} has {len(lines)} contexts for {count} samples")

    contexts = []
    for number, line in enumerate(lines, start=1):
        if line not in (FormalityLabel.FORMAL, FormalityLabel.INFORMAL):
            raise ArgumentError(f"{value}, line {number}: unexpected context '{line}'")
        contexts.append(FormalityLabel(line))

    return contexts
