import csv
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from beartype import beartype

from formalia.corpus.models import FormalityLabel, LabeledCorpus, ParallelCorpus
from formalia.lm.lm import build_selection_models, perplexity_difference_rank
from formalia.lm.models import (
    DEFAULT_GENERAL_SAMPLE,
    DEFAULT_K,
    DEFAULT_ORDER,
    DEFAULT_SEED,
)
from formalia.log.log import Logger
from formalia.pivot.models import (
    LABEL_COMBINATIONS,
    STATS_COLUMNS,
    UNDEFINED,
    CombinationStats,
    Triplet,
    TripletCorpus,
)
from formalia.selection.selection import alpha_for_quantity, assign_full, ranked_corpus
from formalia.utils.exceptions import EmptyPivotSeedsError

logger = Logger(module_name="pivot", package_name="pivot")


def join_key(source: str) -> str:
    "Source string with whitespace runs collapsed"

    return " ".join(source.split())


def _first_occurrences(
    labeled: LabeledCorpus,
) -> tuple[dict[str, tuple[str, str, FormalityLabel]], int]:
    by_key: dict[str, tuple[str, str, FormalityLabel]] = {}
    dropped = 0
    for pair, label in labeled:
        key = join_key(pair.source)
        if key in by_key:
            dropped += 1
            continue
        by_key[key] = (pair.source, pair.target, label)

    return by_key, dropped


@beartype
def intersect_on_source(
    a: LabeledCorpus,
    b: LabeledCorpus,
) -> TripletCorpus:
    """
    Join two labeled corpora that share their source language on the source
    sentence.

    Parameters:
        a (LabeledCorpus): First supervised pair, every pair labeled (None included).
        b (LabeledCorpus): Second supervised pair.

    Returns:
        TripletCorpus: One triplet per source found in both, in the order of `a`.

    Note:
        Sources are matched exactly after collapsing whitespace runs. A source
        repeated within one corpus keeps its first occurrence; the others are
        counted as dropped.
    """

    first_a, dropped_a = _first_occurrences(a)
    first_b, dropped_b = _first_occurrences(b)

    for name, dropped in (("first", dropped_a), ("second", dropped_b)):
        if dropped:
            logger.warn(f"Dropped {dropped} repeated sources from the {name} corpus")

    triplets = tuple(
        Triplet(
            source=source,
            target_a=target_a,
            target_b=first_b[key][1],
            label_a=label_a,
            label_b=first_b[key][2],
        )
        for key, (source, target_a, label_a) in first_a.items()
        if key in first_b
    )

    triplet_corpus = TripletCorpus(
        triplets=triplets,
        coverage_a=len(triplets) / len(a) if len(a) else 0.0,
        coverage_b=len(triplets) / len(b) if len(b) else 0.0,
        dropped_a=dropped_a,
        dropped_b=dropped_b,
    )

    logger.info(
        f"{len(triplets)} shared sources: {100 * triplet_corpus.coverage_a:.2f}% of"
        f" sentence pairs from the first corpus, {100 * triplet_corpus.coverage_b:.2f}%"
        " from the second"
    )

    return triplet_corpus


@beartype
def combination_stats(triplets: TripletCorpus) -> CombinationStats:
    """
    Tabulate the label combinations of a triplet corpus.

    Parameters:
        triplets (TripletCorpus): The triplet corpus.

    Returns:
        CombinationStats: Counts of the 8 annotated combinations plus the
            unannotated count.
    """

    stats = CombinationStats(total=len(triplets))
    for triplet in triplets:
        combination = (triplet.label_a, triplet.label_b)
        if combination in stats.counts:
            stats.counts[combination] += 1
        else:
            stats.unannotated += 1

    return stats


def _format_fraction(value: float | None, percent: bool = True) -> str:
    if value is None:
        return UNDEFINED
    return f"{100 * value:.2f}%" if percent else f"{value:.4f}"


def render_stats(
    stats: CombinationStats,
    coverage: TripletCorpus | None = None,
) -> str:
    """
    Render combination stats as a human-readable table: one row per combination,
    e.g. `F F 845 2.85%`, followed by the summary fractions.

    Parameters:
        stats (CombinationStats): The statistics.
        coverage (TripletCorpus | None, optional): Adds the coverage statement of
            the intersection when given.

    Returns:
        str: The table.
    """

    lines = []
    for combination in LABEL_COMBINATIONS:
        percent = stats.percent(combination)
        lines.append(
            f"{combination[0].symbol} {combination[1].symbol}"
            f" {stats.counts[combination]}"
            f" {UNDEFINED if percent is None else f'{percent:.2f}%'}"
        )

    lines.extend(
        [
            f"annotated {stats.annotated} of {stats.total}",
            f"both annotated {stats.both_annotated}"
            f" ({_format_fraction(stats.both_annotated_fraction)} of annotated,"
            f" {_format_fraction(stats.both_annotated_share_of_total)} of all)",
            f"agreement {_format_fraction(stats.agreement_fraction)}",
        ]
    )

    if coverage is not None:
        lines.append(
            f"coverage {100 * coverage.coverage_a:.2f}%"
            f" / {100 * coverage.coverage_b:.2f}%"
        )

    return "\n".join(lines) + "\n"


def save_stats(stats: CombinationStats, path: Path | str) -> None:
    """
    Write the combination rows as a TSV with columns `label_a, label_b, count,
    percent`.
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    rows = []
    for combination in LABEL_COMBINATIONS:
        percent = stats.percent(combination)
        rows.append(
            (
                combination[0].symbol,
                combination[1].symbol,
                stats.counts[combination],
                UNDEFINED if percent is None else f"{percent:.2f}",
            )
        )

    pd.DataFrame(rows, columns=list(STATS_COLUMNS)).to_csv(
        path,
        sep="\t",
        index=False,
        quoting=csv.QUOTE_MINIMAL,
        lineterminator="\n",
    )


@beartype
def pivot_in_domain_sets(
    triplets: TripletCorpus,
) -> tuple[list[str], list[str]]:
    """
    Pivot seed sets: sources labeled formal in both pairs and sources labeled
    informal in both pairs, in triplet order.

    Parameters:
        triplets (TripletCorpus): The triplet corpus.

    Returns:
        tuple[list[str], list[str]]: (formal sources, informal sources).
    """

    formal, informal = [], []
    for triplet in triplets:
        if triplet.label_a == triplet.label_b == FormalityLabel.FORMAL:
            formal.append(triplet.source)
        elif triplet.label_a == triplet.label_b == FormalityLabel.INFORMAL:
            informal.append(triplet.source)

    return formal, informal


@beartype
def zero_shot_mine(
    corpus: ParallelCorpus,
    formal_sources: Sequence[str],
    informal_sources: Sequence[str],
    target_count: int,
    order: int = DEFAULT_ORDER,
    k: float = DEFAULT_K,
    min_count: int = 2,
    sample_size: int = DEFAULT_GENERAL_SAMPLE,
    seed: int = DEFAULT_SEED,
    workers: int | None = None,
) -> tuple[LabeledCorpus, int, bool]:
    """
    Mine a formality-labeled corpus for a language pair without annotated data.

    The source side of the corpus is ranked against both pivot seed sets, the
    rankings are combined, and InferFull labels the corpus at the α whose labeled
    count is closest to `target_count` from above.

    Parameters:
        corpus (ParallelCorpus): The zero-shot corpus.
        formal_sources (Sequence[str]): Pivot formal seeds.
        informal_sources (Sequence[str]): Pivot informal seeds.
        target_count (int): Labeled count of the supervised pairs to match.
        order (int, optional): n-gram order. Defaults to 3.
        k (float, optional): Smoothing constant. Defaults to 0.1.
        min_count (int, optional): Vocabulary threshold. Defaults to 2.
        sample_size (int, optional): General sample size. Defaults to 10000.
        seed (int, optional): Sampling seed. Defaults to 13.
        workers (int | None, optional): Worker processes.

    Returns:
        tuple[LabeledCorpus, int, bool]: The labeled corpus, α and whether the
            target count was reached.

    Raises:
        EmptyPivotSeedsError: If a seed set is empty.
    """

    if not formal_sources or not informal_sources:
        raise EmptyPivotSeedsError(
            f"Zero-shot mining needs both pivot seed sets, got {len(formal_sources)}"
            f" formal and {len(informal_sources)} informal sources"
        )

    sources = corpus.sources()

    rankings = []
    for seeds in (formal_sources, informal_sources):
        lm_in, lm_gen = build_selection_models(
            seeds,
            sources,
            order=order,
            k=k,
            min_count=min_count,
            sample_size=sample_size,
            seed=seed,
        )
        rankings.append(
            perplexity_difference_rank(sources, lm_in, lm_gen, workers=workers)
        )

    ranks = ranked_corpus(corpus, rankings[0], rankings[1])
    alpha, reached = alpha_for_quantity(ranks, target_count)

    return assign_full(ranks, alpha), alpha, reached
