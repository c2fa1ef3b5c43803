import csv
import statistics
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from beartype import beartype

from formalia.corpus.corpus import read_lines, write_lines
from formalia.corpus.models import FormalityLabel
from formalia.log.log import Logger
from formalia.rerank.lexicon import hypothesis_formality_score
from formalia.rerank.models import (
    DEFAULT_WEIGHT,
    NBEST_SEPARATOR,
    ORACLE_COLUMNS,
    FormalityLexicon,
    Hypothesis,
    NBestList,
    OracleReport,
    OracleRow,
)
from formalia.scorer.models import AnnotatedReference, Judgment, ScoreReport, Verdict
from formalia.scorer.scorer import judge_in_context
from formalia.utils.exceptions import AlignmentError, ArgumentError, NBestFormatError
from formalia.utils.parallel import ordered_map

logger = Logger(module_name="rerank", package_name="rerank")


def _parse_nbest_line(line: str, number: int) -> tuple[str, Hypothesis]:
    fields = [value.strip() for value in line.split(NBEST_SEPARATOR)]
    if len(fields) not in (4, 5):
        raise NBestFormatError(
            f"line {number}: expected 4 or 5 fields separated by"
            f" '{NBEST_SEPARATOR}', got {len(fields)}"
        )

    sample_id, rank, base_score, text = fields[:4]
    if not sample_id:
        raise NBestFormatError(f"line {number}: empty sample id")

    try:
        hypothesis = Hypothesis(
            text=text,
            base_score=float(base_score),
            rank=int(rank),
            quality_score=float(fields[4]) if len(fields) == 5 else None,
        )
    except ValueError as error:
        raise NBestFormatError(f"line {number}: {error}") from error

    return sample_id, hypothesis


@beartype
def load_nbest(path: Path | str) -> list[NBestList]:
    """
    Read an n-best file with one hypothesis per line:
    `sample_id ||| rank ||| base_score ||| text [||| quality_score]`.

    Parameters:
        path (Path | str): The n-best file.

    Returns:
        list[NBestList]: One list per sample in order of first appearance, each
            sorted by rank.

    Raises:
        NBestFormatError: On malformed lines or ranks that are not 0..k-1.

    Note:
        A base score that increases with rank is accepted with a warning.
    """

    grouped: dict[str, list[Hypothesis]] = {}
    for number, line in enumerate(read_lines(path), start=1):
        sample_id, hypothesis = _parse_nbest_line(line, number)
        grouped.setdefault(sample_id, []).append(hypothesis)

    lists = []
    for sample_id, hypotheses in grouped.items():
        hypotheses.sort(key=lambda hypothesis: hypothesis.rank)

        ranks = [hypothesis.rank for hypothesis in hypotheses]
        if ranks != list(range(len(hypotheses))):
            raise NBestFormatError(
                f"{path}: the ranks of sample {sample_id} are not"
                f" 0..{len(hypotheses) - 1}"
            )

        if any(
            later.base_score > earlier.base_score
            for earlier, later in zip(hypotheses, hypotheses[1:])
        ):
            logger.warn(f"Base scores of sample {sample_id} increase with rank")

        lists.append(NBestList(sample_id=sample_id, hypotheses=tuple(hypotheses)))

    return lists


def save_nbest(lists: Sequence[NBestList], path: Path | str) -> None:
    """
    Write n-best lists in file format; hypotheses keep their list order and are
    renumbered 0..k-1.
    """

    lines = []
    for nbest in lists:
        for rank, hypothesis in enumerate(nbest.hypotheses):
            fields = [
                nbest.sample_id,
                str(rank),
                repr(hypothesis.base_score),
                hypothesis.text,
            ]
            if hypothesis.quality_score is not None:
                fields.append(repr(hypothesis.quality_score))
            lines.append(f" {NBEST_SEPARATOR} ".join(fields))

    write_lines(path, lines)


def combined_score(
    lexicon: FormalityLexicon,
    hypothesis: Hypothesis,
    context: FormalityLabel,
    weight: float = DEFAULT_WEIGHT,
) -> float:
    "Beam score plus the weighted formality margin towards the context"

    return hypothesis.base_score + weight * (
        hypothesis_formality_score(lexicon, hypothesis, context)
        - hypothesis_formality_score(lexicon, hypothesis, context.opposite())
    )


@beartype
def rerank_nbest(
    lexicon: FormalityLexicon,
    nbest: NBestList,
    context: FormalityLabel,
    weight: float = DEFAULT_WEIGHT,
) -> NBestList:
    """
    Reorder an n-best list towards a formality.

    Every hypothesis gets the combined score
    `base_score + weight · (p(c|Y) - p(ĉ|Y))`, where ĉ is the opposite formality.

    Parameters:
        lexicon (FormalityLexicon): The lexicon.
        nbest (NBestList): The n-best list.
        context (FormalityLabel): Requested formality, F or I.
        weight (float, optional): Weight of the formality margin. Defaults to 1.0.

    Returns:
        NBestList: The hypotheses sorted by descending combined score, ties by
            original rank, with the combined scores attached.

    Raises:
        ArgumentError: If the context is None.
    """

    if context == FormalityLabel.NONE:
        raise ArgumentError("Reranking needs a formal or informal context")

    scored = [
        Hypothesis(
            text=hypothesis.text,
            base_score=hypothesis.base_score,
            rank=hypothesis.rank,
            quality_score=hypothesis.quality_score,
            combined_score=combined_score(lexicon, hypothesis, context, weight),
        )
        for hypothesis in nbest.hypotheses
    ]

    return NBestList(
        sample_id=nbest.sample_id,
        hypotheses=tuple(
            sorted(
                scored,
                key=lambda hypothesis: (-hypothesis.combined_score, hypothesis.rank),
            )
        ),
    )


def _judge_list(
    sample: tuple[
        NBestList, AnnotatedReference, AnnotatedReference, FormalityLabel, int
    ],
) -> list[Judgment]:
    nbest, formal, informal, context, depth = sample
    return [
        judge_in_context(hypothesis.text, formal, informal, context)
        for hypothesis in nbest.hypotheses[:depth]
    ]


def _reranked_position(
    lexicon: FormalityLexicon,
    nbest: NBestList,
    size: int,
    context: FormalityLabel,
    weight: float,
) -> int:
    "List position of the hypothesis `rerank_nbest` puts first among the top `size`"

    candidates = nbest.hypotheses[:size]

    return min(
        range(size),
        key=lambda position: (
            -combined_score(lexicon, candidates[position], context, weight),
            candidates[position].rank,
            position,
        ),
    )


def _mean_quality(hypotheses: list[Hypothesis]) -> float | None:
    scores = [
        hypothesis.quality_score
        for hypothesis in hypotheses
        if hypothesis.quality_score is not None
    ]
    return statistics.fmean(scores) if scores else None


@beartype
def oracle_experiment(
    lists: Sequence[NBestList],
    formal_refs: Sequence[AnnotatedReference],
    informal_refs: Sequence[AnnotatedReference],
    contexts: Sequence[FormalityLabel],
    ks: Sequence[int],
    lexicon: FormalityLexicon | None = None,
    weight: float = DEFAULT_WEIGHT,
    workers: int | None = None,
) -> OracleReport:
    """
    Measure how much formality accuracy an n-best list holds at several sizes k.

    For every k the model row judges the top beam hypothesis, the oracle row the
    first hypothesis among the top k that is judged correct (the top one when there
    is none), and, with a lexicon, the reranked row the top hypothesis after
    reranking the top k.

    Parameters:
        lists (Sequence[NBestList]): One n-best list per sample.
        formal_refs (Sequence[AnnotatedReference]): Formal references.
        informal_refs (Sequence[AnnotatedReference]): Informal references.
        contexts (Sequence[FormalityLabel]): Requested formality per sample.
        ks (Sequence[int]): List sizes, each at least 1.
        lexicon (FormalityLexicon | None, optional): Adds the reranked row.
        weight (float, optional): Weight of the formality margin. Defaults to 1.0.
        workers (int | None, optional): Worker processes.

    Returns:
        OracleReport: One row per distinct k in ascending order.

    Raises:
        ArgumentError: If `ks` is empty or holds a value below 1.
        AlignmentError: If the inputs do not have the same length.

    Note:
        `delta_to_best` and `n_cases` only consider samples whose top hypothesis is
        judged Incorrect and that have a Correct hypothesis within the top k. Lists
        shorter than k are used as they are, with a warning.
    """

    if not ks:
        raise ArgumentError("The oracle experiment needs at least one k")
    if min(ks) < 1:
        raise ArgumentError(f"Every k must be at least 1, got {sorted(ks)}")
    if not len(lists) == len(formal_refs) == len(informal_refs) == len(contexts):
        raise AlignmentError(
            f"Misaligned oracle inputs: {len(lists)} lists, {len(formal_refs)} formal"
            f" and {len(informal_refs)} informal references, {len(contexts)} contexts"
        )

    depth = max(ks)
    truncated = sum(len(nbest) < depth for nbest in lists)
    if truncated:
        logger.warn(f"{truncated} n-best lists hold fewer than {depth} hypotheses")

    judgments = ordered_map(
        _judge_list,
        [
            (nbest, formal, informal, context, depth)
            for nbest, formal, informal, context in zip(
                lists, formal_refs, informal_refs, contexts
            )
        ],
        workers=workers,
        description="Oracle",
    )

    report = OracleReport(truncated=truncated)
    for k in sorted(set(ks)):
        model, oracle, reranked = [], [], []
        model_picks, oracle_picks, reranked_picks = [], [], []
        distances = []

        for nbest, context, judged in zip(lists, contexts, judgments):
            size = min(k, len(nbest))
            correct = next(
                (
                    rank
                    for rank in range(size)
                    if judged[rank].verdict == Verdict.CORRECT
                ),
                None,
            )

            model.append(judged[0])
            model_picks.append(nbest.hypotheses[0])

            chosen = 0 if correct is None else correct
            oracle.append(judged[chosen])
            oracle_picks.append(nbest.hypotheses[chosen])

            if correct is not None and judged[0].verdict == Verdict.INCORRECT:
                distances.append(correct)

            if lexicon is not None:
                position = _reranked_position(lexicon, nbest, size, context, weight)
                reranked.append(judged[position])
                reranked_picks.append(nbest.hypotheses[position])

        report.rows.append(
            OracleRow(
                k=k,
                model_accuracy=ScoreReport(judgments=model).accuracy,
                oracle_accuracy=ScoreReport(judgments=oracle).accuracy,
                reranked_accuracy=(
                    ScoreReport(judgments=reranked).accuracy
                    if lexicon is not None
                    else None
                ),
                delta_to_best=statistics.fmean(distances) if distances else None,
                n_cases=len(distances),
                model_quality=_mean_quality(model_picks),
                oracle_quality=_mean_quality(oracle_picks),
                reranked_quality=_mean_quality(reranked_picks),
            )
        )

    return report


def _format(value: float | int | None) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, int):
        return str(value)
    return f"{value:.4f}"


def render_oracle_report(report: OracleReport) -> str:
    """
    Render an oracle report as an aligned text table, one row per k.
    """

    columns = [
        column
        for column in ORACLE_COLUMNS
        if any(getattr(row, column) is not None for row in report.rows)
    ]
    cells = [columns] + [
        [_format(getattr(row, column)) for column in columns] for row in report.rows
    ]
    widths = [
        max(len(line[position]) for line in cells)
        for position in range(len(columns))
    ]

    return (
        "\n".join(
            "  ".join(cell.rjust(width) for cell, width in zip(line, widths)).rstrip()
            for line in cells
        )
        + "\n"
    )


def save_oracle_report(report: OracleReport, path: Path | str) -> None:
    "Write an oracle report as a TSV, one row per k"

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    pd.DataFrame(
        [
            [_format(getattr(row, column)) for column in ORACLE_COLUMNS]
            for row in report.rows
        ],
        columns=list(ORACLE_COLUMNS),
    ).to_csv(
        path,
        sep="\t",
        index=False,
        quoting=csv.QUOTE_MINIMAL,
        lineterminator="\n",
    )
