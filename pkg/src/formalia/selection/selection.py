import statistics
from collections.abc import Sequence
from functools import partial
from pathlib import Path

import numpy as np
from beartype import beartype
from numpy.typing import NDArray

from formalia.corpus.corpus import extract_vocabulary
from formalia.corpus.models import FormalityLabel, LabeledCorpus, ParallelCorpus
from formalia.lm.lm import sentence_perplexity, train_lm
from formalia.lm.models import DEFAULT_K, DEFAULT_ORDER, PerplexityScore
from formalia.log.log import Logger
from formalia.selection.models import (
    DEFAULT_ALPHA_LOWER,
    DEFAULT_ALPHA_STEPS,
    DEFAULT_ALPHA_UPPER,
    DEFAULT_THETA_GRID,
    RankedCorpus,
    SelectionMode,
    SelectionReport,
)
from formalia.utils.exceptions import ArgumentError, CalibrationError, DataError
from formalia.utils.parallel import ordered_map
from formalia.utils.utils import round_half_up

logger = Logger(module_name="selection", package_name="selection")


def positions_from_ranking(
    scores: Sequence[PerplexityScore],
    size: int,
) -> NDArray:
    """
    Invert a ranking: position of every pair index in rank order.

    Raises:
        DataError: If the ranking is not a permutation of 0..size-1.
    """

    order = np.array([score.pair_index for score in scores], dtype=np.int64)
    if order.shape != (size,) or not np.array_equal(np.sort(order), np.arange(size)):
        raise DataError(f"A ranking must be a permutation of the {size} pair indexes")

    positions = np.empty(size, dtype=np.int64)
    positions[order] = np.arange(size)

    return positions


@beartype
def ranked_corpus(
    corpus: ParallelCorpus,
    formal_ranking: Sequence[PerplexityScore],
    informal_ranking: Sequence[PerplexityScore],
) -> RankedCorpus:
    """
    Combine the formal and informal rankings of a corpus.

    Parameters:
        corpus (ParallelCorpus): The ranked corpus; pair indexes are the corpus
            positions 0..n-1.
        formal_ranking (Sequence[PerplexityScore]): Ranking against the formal
            in-domain set.
        informal_ranking (Sequence[PerplexityScore]): Ranking against the informal
            in-domain set.

    Returns:
        RankedCorpus: Per pair positions in both rankings.
    """

    return RankedCorpus(
        corpus=corpus,
        f_pos=positions_from_ranking(formal_ranking, len(corpus)),
        i_pos=positions_from_ranking(informal_ranking, len(corpus)),
    )


def easy_label(f_pos: int, i_pos: int, theta: int) -> FormalityLabel:
    """
    Label of one pair under the absolute threshold θ (strict inequalities).
    """

    if f_pos < theta < i_pos:
        return FormalityLabel.FORMAL
    if i_pos < theta < f_pos:
        return FormalityLabel.INFORMAL
    return FormalityLabel.NONE


def full_label(f_pos: int, i_pos: int, alpha: int) -> FormalityLabel:
    """
    Label of one pair under the relative position difference α: formal when the
    pair ranks more than α places better on the formal list, informal in the
    opposite case.
    """

    if i_pos - f_pos > alpha:
        return FormalityLabel.FORMAL
    if f_pos - i_pos > alpha:
        return FormalityLabel.INFORMAL
    return FormalityLabel.NONE


def _labeled(ranks: RankedCorpus, formal: NDArray, informal: NDArray) -> LabeledCorpus:
    codes = np.where(
        formal,
        FormalityLabel.FORMAL.value,
        np.where(informal, FormalityLabel.INFORMAL.value, FormalityLabel.NONE.value),
    )

    return LabeledCorpus(
        pairs=ranks.corpus.pairs,
        labels=tuple(FormalityLabel(str(code)) for code in codes),
    )


def _easy_count(ranks: RankedCorpus, theta: int) -> int:
    formal = (ranks.f_pos < theta) & (theta < ranks.i_pos)
    informal = (ranks.i_pos < theta) & (theta < ranks.f_pos)
    return int(formal.sum() + informal.sum())


def _full_count(ranks: RankedCorpus, alpha: int) -> int:
    return int((np.abs(ranks.differences()) > alpha).sum())


@beartype
def assign_easy(
    ranks: RankedCorpus,
    theta: int,
) -> LabeledCorpus:
    """
    Label every pair with the absolute threshold θ: formal iff f_pos < θ < i_pos,
    informal iff i_pos < θ < f_pos, None otherwise.

    Parameters:
        ranks (RankedCorpus): The ranked corpus.
        theta (int): Threshold in rank space, 0 <= θ < corpus size.

    Returns:
        LabeledCorpus: One label per pair.

    Raises:
        ArgumentError: If θ is out of range.
    """

    if not 0 <= theta < ranks.size:
        raise ArgumentError(f"θ must lie in [0, {ranks.size}), got {theta}")

    return _labeled(
        ranks,
        formal=(ranks.f_pos < theta) & (theta < ranks.i_pos),
        informal=(ranks.i_pos < theta) & (theta < ranks.f_pos),
    )


@beartype
def choose_theta(
    ranks: RankedCorpus,
    grid: Sequence[float] = DEFAULT_THETA_GRID,
    trace: list | None = None,
) -> int:
    """
    Pick the θ that labels the most pairs.

    Parameters:
        ranks (RankedCorpus): The ranked corpus.
        grid (Sequence[float], optional): Candidate fractions of the corpus size, in
            [0, 1). Defaults to 0.05, 0.10, ..., 0.95.
        trace (list | None, optional): Receives (θ, labeled count) per candidate.

    Returns:
        int: The θ, rounded half-up from its fraction; ties go to the smaller θ.

    Raises:
        ArgumentError: If the grid is empty, a fraction is outside [0, 1) or the
            corpus is empty.
    """

    if not grid:
        raise ArgumentError("The θ grid is empty")
    if any(not 0 <= fraction < 1 for fraction in grid):
        raise ArgumentError("θ fractions must lie in [0, 1)")
    if ranks.size == 0:
        raise ArgumentError("Unable to choose θ for an empty corpus")

    best_theta, best_count = None, -1
    for theta in sorted(
        {min(round_half_up(fraction * ranks.size), ranks.size - 1) for fraction in grid}
    ):
        count = _easy_count(ranks, theta)
        if trace is not None:
            trace.append((theta, float(count)))

        if count > best_count:
            best_theta, best_count = theta, count

    logger.info(
        f"θ = {best_theta} ({best_theta / ranks.size:.2f} of the corpus) labels"
        f" {best_count} pairs"
    )

    return best_theta


@beartype
def assign_full(
    ranks: RankedCorpus,
    alpha: int,
) -> LabeledCorpus:
    """
    Label every pair by relative position difference: formal iff
    i_pos - f_pos > α, informal iff f_pos - i_pos > α, None otherwise.

    Parameters:
        ranks (RankedCorpus): The ranked corpus.
        alpha (int): Threshold in rank space, at least 0.

    Returns:
        LabeledCorpus: One label per pair.

    Raises:
        ArgumentError: If α is negative.
    """

    if alpha < 0:
        raise ArgumentError(f"α must be non-negative, got {alpha}")

    differences = ranks.differences()

    return _labeled(
        ranks,
        formal=differences > alpha,
        informal=-differences > alpha,
    )


def alpha_grid(
    size: int,
    lower: float,
    upper: float,
    steps: int,
) -> list[int]:
    """
    Evenly spaced α candidates over [lower·size, upper·size], rounded half-up;
    duplicates from rounding are dropped.
    """

    candidates = []
    for value in np.linspace(lower * size, upper * size, steps):
        alpha = round_half_up(float(value))
        if alpha not in candidates:
            candidates.append(alpha)

    return candidates


def _alpha_objective(
    ranks: RankedCorpus,
    in_domain_targets: Sequence[str],
    order: int,
    k: float,
    min_count: int,
    alpha: int,
) -> float | None:
    """
    Mean in-domain perplexity of a model trained on the targets labeled at α, None
    when α labels nothing.
    """

    labeled = assign_full(ranks, alpha)
    targets = [pair.target for pair, label in labeled if label != FormalityLabel.NONE]
    if not targets:
        return None

    model = train_lm(
        targets,
        extract_vocabulary(in_domain_targets, min_count=min_count),
        order=order,
        k=k,
    )

    return statistics.fmean(
        sentence_perplexity(model, sentence) for sentence in in_domain_targets
    )


@beartype
def calibrate_alpha(
    ranks: RankedCorpus,
    corpus: ParallelCorpus,
    in_domain_targets: Sequence[str],
    lower: float = DEFAULT_ALPHA_LOWER,
    upper: float = DEFAULT_ALPHA_UPPER,
    steps: int = DEFAULT_ALPHA_STEPS,
    order: int = DEFAULT_ORDER,
    k: float = DEFAULT_K,
    min_count: int = 2,
    trace: list | None = None,
    workers: int | None = None,
) -> int:
    """
    Pick the α whose labeled data best models the in-domain set.

    For every candidate on an evenly spaced grid over [lower·size, upper·size] the
    corpus is labeled with `assign_full`, a language model is trained on the formal
    and informal target sides together (vocabulary of non-singleton in-domain
    tokens), and the mean perplexity of the in-domain targets is computed. The α
    with the lowest mean wins; ties go to the smaller α.

    Parameters:
        ranks (RankedCorpus): The ranked corpus.
        corpus (ParallelCorpus): The corpus the targets are taken from.
        in_domain_targets (Sequence[str]): In-domain target sentences, both classes.
        lower (float, optional): Lower bound as a fraction of the corpus size.
            Defaults to 0.05.
        upper (float, optional): Upper bound as a fraction of the corpus size.
            Defaults to 0.2.
        steps (int, optional): Number of candidates. Defaults to 8.
        order (int, optional): Order of the evaluation model. Defaults to 3.
        k (float, optional): Smoothing of the evaluation model. Defaults to 0.1.
        min_count (int, optional): Vocabulary threshold. Defaults to 2.
        trace (list | None, optional): Receives (α, objective or None) per candidate.
        workers (int | None, optional): Candidates evaluated in parallel.

    Returns:
        int: The calibrated α.

    Raises:
        ArgumentError: If `steps < 2`, `lower >= upper` or the in-domain set is
            empty.
        CalibrationError: If no candidate labels any pair.
    """

    if steps < 2:
        raise ArgumentError(f"At least 2 calibration steps are needed, got {steps}")
    if not lower < upper:
        raise ArgumentError(f"The lower bound {lower} must be below {upper}")
    if not in_domain_targets:
        raise ArgumentError("Calibration needs in-domain target sentences")

    if corpus is not ranks.corpus:
        ranks = RankedCorpus(corpus=corpus, f_pos=ranks.f_pos, i_pos=ranks.i_pos)

    candidates = alpha_grid(ranks.size, lower, upper, steps)

    objectives = ordered_map(
        partial(_alpha_objective, ranks, list(in_domain_targets), order, k, min_count),
        candidates,
        workers=workers,
        chunk_size=1,
        description="α calibration",
    )

    best_alpha, best_objective = None, None
    for alpha, objective in zip(candidates, objectives):
        if trace is not None:
            trace.append((alpha, objective))

        if objective is None:
            logger.warn(f"α = {alpha} labels no sentence pair, candidate skipped")
            continue

        if best_objective is None or objective < best_objective:
            best_alpha, best_objective = alpha, objective

    if best_alpha is None:
        raise CalibrationError(
            f"None of the α candidates {candidates} labels any sentence pair"
        )

    logger.info(f"Calibrated α = {best_alpha}, mean in-domain PP {best_objective:.4f}")

    return best_alpha


@beartype
def alpha_for_quantity(
    ranks: RankedCorpus,
    target_count: int,
) -> tuple[int, bool]:
    """
    The largest α that still labels at least `target_count` pairs. The labeled count
    is non-increasing in α, so a binary search over [0, size] finds it.

    Parameters:
        ranks (RankedCorpus): The ranked corpus.
        target_count (int): Wanted number of labeled pairs, at least 0.

    Returns:
        tuple[int, bool]: (α, reached). When even α = 0 labels fewer pairs than
            wanted, (0, False) is returned and a warning is logged.

    Raises:
        ArgumentError: If `target_count` is negative.
    """

    if target_count < 0:
        raise ArgumentError(f"target_count must be non-negative, got {target_count}")

    if _full_count(ranks, 0) < target_count:
        logger.warn(
            f"No α labels {target_count} pairs (at most {_full_count(ranks, 0)}),"
            " falling back to α = 0"
        )
        return 0, False

    low, high = 0, ranks.size
    while low < high:
        middle = (low + high + 1) // 2
        if _full_count(ranks, middle) >= target_count:
            low = middle
        else:
            high = middle - 1

    return low, True


@beartype
def selection_report(
    labeled: LabeledCorpus,
    mode: SelectionMode,
    threshold: int,
    trace: list | None = None,
    metadata: dict[str, str] | None = None,
) -> SelectionReport:
    """
    Summarize a label assignment.

    Parameters:
        labeled (LabeledCorpus): The labeled corpus.
        mode (SelectionMode): The assignment rule.
        threshold (int): θ or α.
        trace (list | None, optional): Calibration trace.
        metadata (dict[str, str] | None, optional): Extra entries.

    Returns:
        SelectionReport: The report.
    """

    return SelectionReport(
        mode=mode,
        threshold=threshold,
        size=len(labeled),
        formal_count=labeled.count(FormalityLabel.FORMAL),
        informal_count=labeled.count(FormalityLabel.INFORMAL),
        none_count=labeled.count(FormalityLabel.NONE),
        trace=list(trace or []),
        metadata=dict(metadata or {}),
    )


def render_report(report: SelectionReport) -> str:
    """
    Render a selection report as `key=value` lines.
    """

    symbol = "theta" if report.mode == SelectionMode.EASY else "alpha"
    lines = [
        f"mode={report.mode}",
        f"{symbol}={report.threshold}",
        f"size={report.size}",
        f"formal_count={report.formal_count}",
        f"informal_count={report.informal_count}",
        f"none_count={report.none_count}",
    ]
    if report.size:
        lines.append(f"{symbol}_fraction={report.threshold / report.size:.4f}")

    for candidate, objective in report.trace:
        value = "skipped" if objective is None else repr(objective)
        lines.append(f"trace.{symbol}.{candidate}={value}")

    lines.extend(f"{key}={value}" for key, value in sorted(report.metadata.items()))

    return "\n".join(lines) + "\n"


def save_report(report: SelectionReport, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report), encoding="utf-8")
