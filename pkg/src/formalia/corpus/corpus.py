import csv
from collections import Counter
from collections.abc import Iterable
from pathlib import Path

import pandas as pd
from beartype import beartype

from formalia.corpus.models import (
    ESCAPE_MARKER,
    LABELED_COLUMNS,
    RESERVED_TOKENS,
    FormalityLabel,
    LabeledCorpus,
    ParallelCorpus,
    SentencePair,
    Vocabulary,
)
from formalia.log.log import Logger
from formalia.utils.exceptions import AlignmentError, ArgumentError, DataError

logger = Logger(module_name="corpus", package_name="corpus")


def escape_reserved(line: str) -> str:
    for token in RESERVED_TOKENS:
        line = line.replace(token, ESCAPE_MARKER + token)
    return line


def unescape_reserved(line: str) -> str:
    for token in RESERVED_TOKENS:
        line = line.replace(ESCAPE_MARKER + token, token)
    return line


def read_lines(path: Path | str) -> list[str]:
    """
    Read a UTF-8 file of one sentence per line. A final newline is not significant.

    Parameters:
        path (Path | str): The file.

    Returns:
        list[str]: The lines, without line terminators.
    """

    text = Path(path).read_text(encoding="utf-8")
    if not text:
        return []

    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()

    return lines


def write_lines(
    path: Path | str,
    lines: Iterable[str],
) -> None:
    """
    Write one line per element, newline-terminated, UTF-8.

    Parameters:
        path (Path | str): The destination file.
        lines (Iterable[str]): The lines.
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with path.open("w", encoding="utf-8", newline="\n") as file:
        for line in lines:
            file.write(line + "\n")


def corpus_paths(
    prefix: Path | str,
    source_lang: str,
    target_lang: str,
) -> tuple[Path, Path]:
    """
    File names of a parallel corpus: `<prefix>.<srclang>` and `<prefix>.<tgtlang>`.
    """

    return (
        Path(f"{prefix}.{source_lang}"),
        Path(f"{prefix}.{target_lang}"),
    )


@beartype
def load_aux_scores(path: Path | str) -> list[float]:
    """
    Read an auxiliary score file, one real per line.

    Parameters:
        path (Path | str): The score file.

    Returns:
        list[float]: The scores in file order.

    Raises:
        DataError: If a line is not a real number.
    """

    scores = []
    for line_number, line in enumerate(read_lines(path), start=1):
        try:
            scores.append(float(line.strip()))
        except ValueError:
            raise DataError(f"{path}:{line_number}: '{line}' is not a real number")

    return scores


@beartype
def load_parallel(
    src_path: Path | str,
    tgt_path: Path | str,
    source_lang: str | None = None,
    target_lang: str | None = None,
    aux_path: Path | str | None = None,
) -> ParallelCorpus:
    """
    Load two aligned plain-text files into a parallel corpus.

    Parameters:
        src_path (Path | str): Source side, one sentence per line.
        tgt_path (Path | str): Target side, one sentence per line.
        source_lang (str | None, optional): Source language code; the file extension
            when None.
        target_lang (str | None, optional): Target language code; the file extension
            when None.
        aux_path (Path | str | None, optional): Third aligned file of one real per
            line (confidence or quality score).

    Returns:
        ParallelCorpus: Pair i is (line i of src, line i of tgt), indexes 0..n-1.

    Raises:
        AlignmentError: If the files do not have the same number of lines.
        OSError: If a file cannot be read.
    """

    sources = read_lines(src_path)
    targets = read_lines(tgt_path)

    if len(sources) != len(targets):
        raise AlignmentError(
            f"{src_path} has {len(sources)} lines but {tgt_path} has {len(targets)}"
        )

    scores: list[float | None] = [None] * len(sources)
    if aux_path is not None:
        scores = load_aux_scores(aux_path)
        if len(scores) != len(sources):
            raise AlignmentError(
                f"{src_path} has {len(sources)} lines but {aux_path} has"
                f" {len(scores)}"
            )

    corpus = ParallelCorpus(
        pairs=tuple(
            SentencePair(
                source=escape_reserved(source),
                target=escape_reserved(target),
                index=index,
                aux_score=score,
            )
            for index, (source, target, score) in enumerate(
                zip(sources, targets, scores)
            )
        ),
        source_lang=source_lang or Path(src_path).suffix.lstrip(".") or "src",
        target_lang=target_lang or Path(tgt_path).suffix.lstrip(".") or "tgt",
    )

    logger.debug(f"Loaded {len(corpus)} sentence pairs from {src_path}, {tgt_path}")

    return corpus


@beartype
def save_parallel(
    corpus: ParallelCorpus,
    src_path: Path | str,
    tgt_path: Path | str,
    aux_path: Path | str | None = None,
) -> None:
    """
    Write a parallel corpus as two aligned files (and the auxiliary scores, if asked
    for). Inverse of `load_parallel`.

    Parameters:
        corpus (ParallelCorpus): The corpus.
        src_path (Path | str): Source side destination.
        tgt_path (Path | str): Target side destination.
        aux_path (Path | str | None, optional): Auxiliary score destination.
    """

    write_lines(src_path, (unescape_reserved(pair.source) for pair in corpus))
    write_lines(tgt_path, (unescape_reserved(pair.target) for pair in corpus))

    if aux_path is not None:
        write_lines(
            aux_path,
            ("" if pair.aux_score is None else repr(pair.aux_score) for pair in corpus),
        )


def tokenize(sentence: str) -> list[str]:
    """
    Split a sentence on runs of whitespace. Case is preserved and no normalization is
    applied.

    Parameters:
        sentence (str): The sentence.

    Returns:
        list[str]: The tokens; empty for an empty sentence.
    """

    return sentence.split()


@beartype
def extract_vocabulary(
    sentences: Iterable[str],
    min_count: int = 2,
) -> Vocabulary:
    """
    Collect the tokens occurring at least `min_count` times. With the default of 2
    this is the vocabulary of non-singleton tokens.

    Parameters:
        sentences (Iterable[str]): The sentences.
        min_count (int, optional): Minimum total count. Defaults to 2.

    Returns:
        Vocabulary: The restricted vocabulary.

    Raises:
        ArgumentError: If `min_count` is lower than 1.
    """

    if min_count < 1:
        raise ArgumentError(f"min_count must be at least 1, got {min_count}")

    counts = Counter(token for sentence in sentences for token in tokenize(sentence))

    return Vocabulary(
        tokens=frozenset(
            token for token, count in counts.items() if count >= min_count
        ),
    )


@beartype
def save_labeled(
    labeled: LabeledCorpus,
    path: Path | str,
) -> None:
    """
    Write the formal and informal pairs of a labeled corpus as a TSV with columns
    `index, label, source, target`. Unlabeled pairs are not written.

    Parameters:
        labeled (LabeledCorpus): The labeled corpus.
        path (Path | str): Destination TSV.
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    pd.DataFrame(
        [
            (
                pair.index,
                str(label),
                unescape_reserved(pair.source),
                unescape_reserved(pair.target),
            )
            for pair, label in labeled
            if label != FormalityLabel.NONE
        ],
        columns=list(LABELED_COLUMNS),
    ).to_csv(
        path,
        sep="\t",
        index=False,
        quoting=csv.QUOTE_MINIMAL,
        lineterminator="\n",
    )


def read_tsv(path: Path | str) -> pd.DataFrame:
    """
    Read a TSV artifact with every column as text.

    Parameters:
        path (Path | str): The TSV file.

    Returns:
        pd.DataFrame: The table.
    """

    return pd.read_csv(
        path,
        sep="\t",
        dtype=str,
        keep_default_na=False,
        quoting=csv.QUOTE_MINIMAL,
    )


@beartype
def load_labeled(path: Path | str) -> LabeledCorpus:
    """
    Read a labeled corpus TSV written by `save_labeled`.

    Parameters:
        path (Path | str): The TSV file.

    Returns:
        LabeledCorpus: The formal and informal pairs.

    Raises:
        DataError: If a column is missing or a label is not F or I.
    """

    table = read_tsv(path)

    missing = set(LABELED_COLUMNS).difference(table.columns)
    if missing:
        raise DataError(f"{path} is missing the columns {sorted(missing)}")

    pairs, labels = [], []
    for index, label, source, target in zip(
        table["index"], table["label"], table["source"], table["target"]
    ):
        if label not in (FormalityLabel.FORMAL, FormalityLabel.INFORMAL):
            raise DataError(f"{path}: unexpected label '{label}'")

        pairs.append(
            SentencePair(
                source=escape_reserved(source),
                target=escape_reserved(target),
                index=int(index),
            )
        )
        labels.append(FormalityLabel(label))

    return LabeledCorpus(pairs=tuple(pairs), labels=tuple(labels))


@beartype
def attach_labels(
    corpus: ParallelCorpus,
    labeled: LabeledCorpus,
) -> LabeledCorpus:
    """
    Label every pair of a corpus from a labeled subset, matched by index. Pairs that
    are not in the subset get the label None.

    Parameters:
        corpus (ParallelCorpus): The full corpus.
        labeled (LabeledCorpus): Labeled pairs, e.g. read with `load_labeled`.

    Returns:
        LabeledCorpus: One label per pair of `corpus`.

    Raises:
        AlignmentError: If a labeled index does not exist in the corpus.
    """

    by_index = {pair.index: label for pair, label in labeled}

    known = {pair.index for pair in corpus}
    unknown = set(by_index).difference(known)
    if unknown:
        raise AlignmentError(
            f"{len(unknown)} labeled indexes are not in the corpus, e.g."
            f" {min(unknown)}"
        )

    return LabeledCorpus(
        pairs=corpus.pairs,
        labels=tuple(by_index.get(pair.index, FormalityLabel.NONE) for pair in corpus),
    )
