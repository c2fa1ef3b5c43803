import csv
from collections import Counter
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from beartype import beartype

from formalia.corpus.corpus import read_tsv, tokenize
from formalia.corpus.models import FormalityLabel
from formalia.log.log import Logger
from formalia.rerank.models import (
    DEFAULT_KAPPA_THRESHOLD,
    LEXICON_COLUMNS,
    FormalityLexicon,
    Hypothesis,
    LexiconEntry,
)
from formalia.utils.exceptions import DataError, LexiconError

logger = Logger(module_name="lexicon", package_name="rerank")


def lexicon_from_counts(
    f_counts: Counter,
    i_counts: Counter,
    kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD,
) -> FormalityLexicon:
    """
    Derive the lexicon statistics from per-class term counts.

    Parameters:
        f_counts (Counter): Term counts of the formal side.
        i_counts (Counter): Term counts of the informal side.
        kappa_threshold (float, optional): Balance threshold. Defaults to 0.33.

    Returns:
        FormalityLexicon: The lexicon.
    """

    terms = sorted(
        term
        for term in set(f_counts) | set(i_counts)
        if f_counts[term] + i_counts[term]
    )
    max_abs_diff = max(
        (abs(f_counts[term] - i_counts[term]) for term in terms), default=0
    )

    entries = {}
    for term in terms:
        f_count, i_count = f_counts[term], i_counts[term]
        count = f_count + i_count
        diff = abs(f_count - i_count)

        beta = diff / max_abs_diff if max_abs_diff else 0.0
        kappa = 0 if diff / count < kappa_threshold else 1

        entries[term] = LexiconEntry(
            f_count=f_count,
            i_count=i_count,
            beta=beta,
            kappa=kappa,
            p_formal=f_count / count * beta * kappa,
            p_informal=i_count / count * beta * kappa,
        )

    return FormalityLexicon(
        entries=entries,
        max_abs_diff=max_abs_diff,
        kappa_threshold=kappa_threshold,
    )


@beartype
def build_lexicon(
    formal_targets: Sequence[str],
    informal_targets: Sequence[str],
    kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD,
) -> FormalityLexicon:
    """
    Build a relative-frequency formality lexicon from formal and informal sentences.

    For every whitespace token t with formal count f and informal count i:
    β(t) = |f - i| / max |f - i|, κ(t) = 0 if |f - i| / (f + i) < threshold else 1,
    p(F|t) = f / (f + i) · β · κ and p(I|t) = i / (f + i) · β · κ.

    Parameters:
        formal_targets (Sequence[str]): Formal sentences.
        informal_targets (Sequence[str]): Informal sentences.
        kappa_threshold (float, optional): Balance threshold. Defaults to 0.33.

    Returns:
        FormalityLexicon: The lexicon; tokens are case-sensitive.

    Raises:
        LexiconError: If neither side has a token.
    """

    f_counts = Counter(token for line in formal_targets for token in tokenize(line))
    i_counts = Counter(token for line in informal_targets for token in tokenize(line))

    if not f_counts and not i_counts:
        raise LexiconError("Both the formal and the informal sentences are empty")

    lexicon = lexicon_from_counts(f_counts, i_counts, kappa_threshold=kappa_threshold)

    logger.info(
        f"Lexicon of {len(lexicon)} terms, max |f-i| = {lexicon.max_abs_diff},"
        f" {sum(entry.kappa == 0 for entry in lexicon.entries.values())} nullified"
    )

    return lexicon


def term_probability(
    lexicon: FormalityLexicon,
    term: str,
    context: FormalityLabel,
) -> float:
    "Class probability of a term, 0 for unknown terms"

    entry = lexicon.entries.get(term)
    return 0.0 if entry is None else entry.probability(context)


def hypothesis_formality_score(
    lexicon: FormalityLexicon,
    hypothesis: Hypothesis | str,
    context: FormalityLabel,
) -> float:
    """
    Sum of the class probabilities of the tokens of a hypothesis.

    Parameters:
        lexicon (FormalityLexicon): The lexicon.
        hypothesis (Hypothesis | str): The hypothesis or its text.
        context (FormalityLabel): F or I.

    Returns:
        float: The score, 0 for an empty hypothesis.
    """

    text = hypothesis.text if isinstance(hypothesis, Hypothesis) else hypothesis

    return sum(term_probability(lexicon, token, context) for token in tokenize(text))


def save_lexicon(lexicon: FormalityLexicon, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    pd.DataFrame(
        [
            (
                term,
                entry.f_count,
                entry.i_count,
                repr(entry.beta),
                entry.kappa,
                repr(entry.p_formal),
                repr(entry.p_informal),
            )
            for term, entry in lexicon.entries.items()
        ],
        columns=list(LEXICON_COLUMNS),
    ).to_csv(
        path,
        sep="\t",
        index=False,
        quoting=csv.QUOTE_MINIMAL,
        lineterminator="\n",
    )


@beartype
def load_lexicon(
    path: Path | str,
    kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD,
) -> FormalityLexicon:
    """
    Read a lexicon TSV written by `save_lexicon`. The derived columns are
    recomputed from the counts with the given threshold.

    Raises:
        DataError: If a column is missing or a count is not a non-negative integer.
    """

    table = read_tsv(path)

    missing = {"term", "f_count", "i_count"}.difference(table.columns)
    if missing:
        raise DataError(f"{path} is missing the columns {sorted(missing)}")

    f_counts, i_counts = Counter(), Counter()
    for term, f_count, i_count in zip(
        table["term"], table["f_count"], table["i_count"]
    ):
        if not (f_count.isdigit() and i_count.isdigit()):
            raise DataError(f"{path}: bad counts for term '{term}'")
        f_counts[term] = int(f_count)
        i_counts[term] = int(i_count)

    return lexicon_from_counts(f_counts, i_counts, kappa_threshold=kappa_threshold)
