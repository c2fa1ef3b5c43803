import math
from collections import Counter
from collections.abc import Sequence
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd
from beartype import beartype

from formalia.corpus.corpus import extract_vocabulary, read_tsv, tokenize
from formalia.corpus.models import BOS_TOKEN, EOS_TOKEN, Vocabulary
from formalia.lm.models import (
    DEFAULT_GENERAL_SAMPLE,
    DEFAULT_K,
    DEFAULT_ORDER,
    DEFAULT_SEED,
    MODEL_FORMAT_HEADER,
    MODEL_FORMAT_VERSION,
    RANKING_COLUMNS,
    NGramModel,
    PerplexityScore,
)
from formalia.log.log import Logger
from formalia.utils.exceptions import (
    ArgumentError,
    DataError,
    ModelFormatError,
    ModelMismatchError,
    TrainingError,
)
from formalia.utils.parallel import ordered_map

logger = Logger(module_name="lm", package_name="lm")


def _events(
    tokens: list[str],
    order: int,
) -> list[tuple[tuple[str, ...], str]]:
    """
    (history, predicted token) for every predicted position of a mapped sentence:
    its tokens followed by EOS, with `order - 1` begin markers in front.
    """

    padded = [BOS_TOKEN] * (order - 1) + tokens + [EOS_TOKEN]

    return [
        (tuple(padded[position - order + 1 : position]), padded[position])
        for position in range(order - 1, len(padded))
    ]


@beartype
def train_lm(
    sentences: Sequence[str],
    vocab: Vocabulary,
    order: int = DEFAULT_ORDER,
    k: float = DEFAULT_K,
    seed: int | None = None,
) -> NGramModel:
    """
    Count the n-grams of a set of sentences over a fixed vocabulary.

    Parameters:
        sentences (Sequence[str]): Training sentences.
        vocab (Vocabulary): Tokens outside it are replaced by the unknown token before
            counting.
        order (int, optional): n-gram order. Defaults to 3.
        k (float, optional): Additive smoothing constant. Defaults to 0.1.
        seed (int | None, optional): Seed of the training sample, kept as metadata.

    Returns:
        NGramModel: The trained model.

    Raises:
        ArgumentError: If `order < 1` or `k <= 0`.
        TrainingError: If no sentence is given.
    """

    if order < 1:
        raise ArgumentError(f"The n-gram order must be at least 1, got {order}")
    if not k > 0:
        raise ArgumentError(f"The smoothing constant must be positive, got {k}")
    if not sentences:
        raise TrainingError("Unable to train a language model without sentences")

    counts: Counter = Counter()
    context_counts: Counter = Counter()

    for sentence in sentences:
        for history, token in _events(vocab.map(tokenize(sentence)), order):
            for length in range(order):
                context = history[len(history) - length :] if length else ()
                counts[context + (token,)] += 1
                context_counts[context] += 1

    logger.debug(
        f"Trained a {order}-gram model on {len(sentences)} sentences,"
        f" {len(counts)} n-grams"
    )

    return NGramModel(
        order=order,
        vocab=vocab,
        k=k,
        counts=dict(counts),
        context_counts=dict(context_counts),
        seed=seed,
    )


def map_token(model: NGramModel, token: str) -> str:
    if token == EOS_TOKEN or token in model.vocab:
        return token
    return model.vocab.unk_token


def probability(
    model: NGramModel,
    token: str,
    history: Sequence[str],
) -> float:
    """
    Interpolated add-k probability of a token given its history.

    The unigram estimate is `(c(w) + k) / (N + k V)` over the closed vocabulary of
    size V. Every higher order interpolates with the order below:
    `(c(h, w) + k V p_lower(w)) / (c(h) + k V)`; histories never seen fall back to
    the lower order unchanged.

    Parameters:
        model (NGramModel): The model.
        token (str): The predicted token (mapped to the vocabulary here).
        history (Sequence[str]): Preceding tokens, begin markers included.

    Returns:
        float: A probability in (0, 1].
    """

    token = map_token(model, token)
    history = tuple(history)
    smoothing = model.k * model.closed_size

    value = (model.counts.get((token,), 0) + model.k) / (
        model.context_counts.get((), 0) + smoothing
    )

    for length in range(1, model.order):
        context = history[len(history) - length :]
        if len(context) < length:
            break

        context_count = model.context_counts.get(context, 0)
        if not context_count:
            continue

        value = (model.counts.get(context + (token,), 0) + smoothing * value) / (
            context_count + smoothing
        )

    return value


@beartype
def next_token_distribution(
    model: NGramModel,
    history: Sequence[str],
) -> dict[str, float]:
    """
    Probability of every token of the closed vocabulary after a history.

    Parameters:
        model (NGramModel): The model.
        history (Sequence[str]): Preceding tokens, begin markers included.

    Returns:
        dict[str, float]: Token to probability; the values sum to 1.
    """

    return {
        token: probability(model, token, history) for token in model.closed_vocabulary
    }


@beartype
def sentence_perplexity(
    model: NGramModel,
    sentence: str,
) -> float:
    """
    Perplexity of a sentence: `exp(-(1/N) sum ln p(w_i | history))` over its mapped
    tokens followed by EOS. Begin markers are never predicted, so an empty sentence
    is scored on its single EOS prediction.

    Parameters:
        model (NGramModel): The model.
        sentence (str): The sentence.

    Returns:
        float: The perplexity, greater than 0.
    """

    events = _events(model.vocab.map(tokenize(sentence)), model.order)

    log_probability = math.fsum(
        math.log(probability(model, token, history)) for history, token in events
    )

    return math.exp(-log_probability / len(events))


def _perplexity_pair(
    lm_in: NGramModel,
    lm_gen: NGramModel,
    sentence: str,
) -> tuple[float, float]:
    return sentence_perplexity(lm_in, sentence), sentence_perplexity(lm_gen, sentence)


def check_compatible(
    lm_in: NGramModel,
    lm_gen: NGramModel,
) -> None:
    """
    Raises:
        ModelMismatchError: If the models do not share vocabulary and order.
    """

    if lm_in.order != lm_gen.order:
        raise ModelMismatchError(
            f"Model orders differ: {lm_in.order} and {lm_gen.order}"
        )
    if lm_in.vocab_hash != lm_gen.vocab_hash:
        raise ModelMismatchError("The two models use different vocabularies")


@beartype
def perplexity_difference_rank(
    targets: Sequence[str],
    lm_in: NGramModel,
    lm_gen: NGramModel,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> list[PerplexityScore]:
    """
    Rank sentences by their perplexity under an in-domain model minus their
    perplexity under a general model. The most in-domain-like sentences come first.

    Parameters:
        targets (Sequence[str]): Sentences to rank; position i is pair index i.
        lm_in (NGramModel): The in-domain model.
        lm_gen (NGramModel): The general model.
        workers (int | None, optional): Worker processes.
        chunk_size (int | None, optional): Sentences per worker task.

    Returns:
        list[PerplexityScore]: Sorted by ascending difference, ties by index. The
            position of a score in this list is the rank of its pair.

    Raises:
        ModelMismatchError: If the models do not share vocabulary and order.
    """

    check_compatible(lm_in, lm_gen)

    perplexities = ordered_map(
        partial(_perplexity_pair, lm_in, lm_gen),
        targets,
        workers=workers,
        chunk_size=chunk_size,
        description="Perplexity",
    )

    scores = [
        PerplexityScore(
            pair_index=index,
            pp_in=pp_in,
            pp_gen=pp_gen,
            diff=pp_in - pp_gen,
        )
        for index, (pp_in, pp_gen) in enumerate(perplexities)
    ]

    return sorted(scores, key=lambda score: (score.diff, score.pair_index))


@beartype
def sample_general(
    sentences: Sequence[str],
    size: int = DEFAULT_GENERAL_SAMPLE,
    seed: int = DEFAULT_SEED,
) -> list[str]:
    """
    Seeded random sample of a general corpus, in corpus order.

    Parameters:
        sentences (Sequence[str]): The general corpus.
        size (int, optional): Sample size. Defaults to 10000.
        seed (int, optional): Random seed. Defaults to 13.

    Returns:
        list[str]: The whole corpus if it is not larger than `size`, the sample
            otherwise.
    """

    if len(sentences) <= size:
        return list(sentences)

    chosen = np.sort(
        np.random.default_rng(seed).choice(len(sentences), size=size, replace=False)
    )

    return [sentences[position] for position in chosen]


@beartype
def build_selection_models(
    in_domain: Sequence[str],
    general: Sequence[str],
    order: int = DEFAULT_ORDER,
    k: float = DEFAULT_K,
    min_count: int = 2,
    sample_size: int = DEFAULT_GENERAL_SAMPLE,
    seed: int = DEFAULT_SEED,
) -> tuple[NGramModel, NGramModel]:
    """
    The in-domain and general models used to rank a corpus towards one in-domain
    set. Both share the vocabulary of non-singleton tokens of the in-domain set.

    Parameters:
        in_domain (Sequence[str]): The in-domain sentences.
        general (Sequence[str]): The corpus to rank; the general model is trained on
            a seeded sample of it.
        order (int, optional): n-gram order. Defaults to 3.
        k (float, optional): Smoothing constant. Defaults to 0.1.
        min_count (int, optional): Vocabulary threshold. Defaults to 2.
        sample_size (int, optional): Size of the general sample. Defaults to 10000.
        seed (int, optional): Sampling seed. Defaults to 13.

    Returns:
        tuple[NGramModel, NGramModel]: (in-domain model, general model).
    """

    vocab = extract_vocabulary(in_domain, min_count=min_count)

    logger.info(
        f"Selection vocabulary of {len(vocab)} tokens from {len(in_domain)} in-domain"
        " sentences"
    )

    return (
        train_lm(in_domain, vocab, order=order, k=k),
        train_lm(
            sample_general(general, size=sample_size, seed=seed),
            vocab,
            order=order,
            k=k,
            seed=seed,
        ),
    )


@beartype
def save_model(
    model: NGramModel,
    path: Path | str,
    metadata: dict[str, str] | None = None,
) -> None:
    """
    Write a model as a versioned text count table.

    The header holds the format version, order, k, vocabulary hash, seed and any
    extra metadata, one `key<TAB>value` line each, then the vocabulary and the
    n-gram counts (tokens separated by single spaces), both sorted.

    Parameters:
        model (NGramModel): The model.
        path (Path | str): Destination file.
        metadata (dict[str, str] | None, optional): Extra header entries (e.g. the
            configuration hash).
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    header = {
        "order": str(model.order),
        "k": repr(model.k),
        "vocab_hash": model.vocab_hash,
        "seed": "-" if model.seed is None else str(model.seed),
        **(metadata or {}),
    }

    with path.open("w", encoding="utf-8", newline="\n") as file:
        file.write(f"{MODEL_FORMAT_HEADER} v{MODEL_FORMAT_VERSION}\n")
        for key, value in header.items():
            file.write(f"{key}\t{value}\n")

        file.write(f"vocab\t{len(model.vocab)}\n")
        for token in sorted(model.vocab.tokens):
            file.write(f"{token}\n")

        file.write(f"ngrams\t{len(model.counts)}\n")
        for ngram, count in sorted(model.counts.items()):
            file.write(f"{' '.join(ngram)}\t{count}\n")


@beartype
def load_model(path: Path | str) -> NGramModel:
    """
    Read a model written by `save_model`.

    Parameters:
        path (Path | str): The model file.

    Returns:
        NGramModel: The model; context counts are rebuilt from the n-gram counts.

    Raises:
        ModelFormatError: If the file is not a supported model file or its vocabulary
            does not match the recorded hash.
    """

    lines = Path(path).read_text(encoding="utf-8").split("\n")

    if not lines or lines[0] != f"{MODEL_FORMAT_HEADER} v{MODEL_FORMAT_VERSION}":
        raise ModelFormatError(f"{path} is not a v{MODEL_FORMAT_VERSION} model file")

    header: dict[str, str] = {}
    position = 1
    try:
        while not lines[position].startswith("vocab\t"):
            key, value = lines[position].split("\t", 1)
            header[key] = value
            position += 1

        vocab_size = int(lines[position].split("\t")[1])
        tokens = lines[position + 1 : position + 1 + vocab_size]
        position += 1 + vocab_size

        ngram_count = int(lines[position].split("\t")[1])
        counts: dict[tuple[str, ...], int] = {}
        for line in lines[position + 1 : position + 1 + ngram_count]:
            ngram, count = line.rsplit("\t", 1)
            counts[tuple(ngram.split(" "))] = int(count)

        order = int(header["order"])
        k = float(header["k"])
    except (IndexError, KeyError, ValueError) as error:
        raise ModelFormatError(f"{path} is malformed: {error}")

    context_counts: Counter = Counter()
    for ngram, count in counts.items():
        context_counts[ngram[:-1]] += count

    model = NGramModel(
        order=order,
        vocab=Vocabulary(tokens=frozenset(tokens)),
        k=k,
        counts=counts,
        context_counts=dict(context_counts),
        seed=None if header.get("seed", "-") == "-" else int(header["seed"]),
    )

    if model.vocab_hash != header.get("vocab_hash"):
        raise ModelFormatError(f"{path}: vocabulary does not match its recorded hash")

    return model


@beartype
def save_ranking(
    scores: Sequence[PerplexityScore],
    path: Path | str,
) -> None:
    """
    Write a ranking as a TSV with columns `index, pp_in, pp_gen, diff`, in rank
    order. Reals are written with `repr`, so they read back exactly.

    Parameters:
        scores (Sequence[PerplexityScore]): The ranking.
        path (Path | str): Destination TSV.
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    pd.DataFrame(
        [
            (
                str(score.pair_index),
                repr(score.pp_in),
                repr(score.pp_gen),
                repr(score.diff),
            )
            for score in scores
        ],
        columns=list(RANKING_COLUMNS),
    ).to_csv(path, sep="\t", index=False, lineterminator="\n")


@beartype
def load_ranking(path: Path | str) -> list[PerplexityScore]:
    """
    Read a ranking TSV written by `save_ranking`, keeping the file order.

    Parameters:
        path (Path | str): The TSV file.

    Returns:
        list[PerplexityScore]: The ranking.

    Raises:
        DataError: If a column is missing.
    """

    table = read_tsv(path)

    missing = set(RANKING_COLUMNS).difference(table.columns)
    if missing:
        raise DataError(f"{path} is missing the columns {sorted(missing)}")

    return [
        PerplexityScore(
            pair_index=int(index),
            pp_in=float(pp_in),
            pp_gen=float(pp_gen),
            diff=float(diff),
        )
        for index, pp_in, pp_gen, diff in zip(
            table["index"], table["pp_in"], table["pp_gen"], table["diff"]
        )
    ]
