import math

import numpy as np
import pytest

from formalia.corpus.corpus import extract_vocabulary
from formalia.corpus.models import BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, Vocabulary
from formalia.lm.lm import (
    build_selection_models,
    load_model,
    load_ranking,
    next_token_distribution,
    perplexity_difference_rank,
    probability,
    sample_general,
    save_model,
    save_ranking,
    sentence_perplexity,
    train_lm,
)
from formalia.utils.exceptions import (
    ArgumentError,
    ModelFormatError,
    ModelMismatchError,
    TrainingError,
)

WORDS = ["Sie", "du", "kommen", "heute", "morgen", "hier", "nicht", "."]


def random_sentences(rng: np.random.Generator, count: int) -> list[str]:
    return [
        " ".join(rng.choice(WORDS + ["selten", "nie"], size=int(rng.integers(0, 8))))
        for _ in range(count)
    ]


def brute_force_perplexity(
    training: list[str],
    vocab: set[str],
    order: int,
    k: float,
    sentence: str,
) -> float:
    """
    Perplexity from counts recomputed by scanning the padded training streams.
    """

    def stream(text: str) -> list[str]:
        mapped = [token if token in vocab else UNK_TOKEN for token in text.split()]
        return [BOS_TOKEN] * (order - 1) + mapped + [EOS_TOKEN]

    streams = [stream(text) for text in training]
    closed = len(vocab) + 2
    total = sum(len(item) - (order - 1) for item in streams)

    def ends_with(item: list[str], end: int, sequence: tuple) -> bool:
        start = end - len(sequence) + 1
        return start >= 0 and tuple(item[start : end + 1]) == sequence

    def count(sequence: tuple) -> int:
        return sum(
            ends_with(item, end, sequence)
            for item in streams
            for end in range(order - 1, len(item))
        )

    def context_count(history: tuple) -> int:
        return sum(
            ends_with(item, end - 1, history)
            for item in streams
            for end in range(order - 1, len(item))
        )

    def p(token: str, history: tuple) -> float:
        value = (count((token,)) + k) / (total + k * closed)
        for length in range(1, order):
            context = history[len(history) - length :]
            if len(context) < length:
                break
            seen = context_count(context)
            if seen:
                value = (count(context + (token,)) + k * closed * value) / (
                    seen + k * closed
                )
        return value

    padded = stream(sentence)
    probabilities = [
        p(padded[position], tuple(padded[position - order + 1 : position]))
        for position in range(order - 1, len(padded))
    ]

    return math.prod(probabilities) ** (-1 / len(probabilities))


def test_unigram_counts():
    model = train_lm(["a a"], Vocabulary(tokens=frozenset({"a"})), order=1)

    assert model.counts == {("a",): 2, (EOS_TOKEN,): 1}
    assert model.context_counts == {(): 3}


def test_out_of_vocabulary_counts():
    model = train_lm(["b"], Vocabulary(tokens=frozenset({"a"})), order=1)

    assert model.counts == {(UNK_TOKEN,): 1, (EOS_TOKEN,): 1}


def test_bigram_counts():
    model = train_lm(["a b"], Vocabulary(tokens=frozenset({"a", "b"})), order=2)

    bigrams = {ngram: count for ngram, count in model.counts.items() if len(ngram) == 2}
    assert bigrams == {(BOS_TOKEN, "a"): 1, ("a", "b"): 1, ("b", EOS_TOKEN): 1}


def test_context_counts_sum_extensions():
    rng = np.random.default_rng(3)
    training = random_sentences(rng, 40)
    model = train_lm(training, extract_vocabulary(training), order=3)

    extensions: dict[tuple, int] = {}
    for ngram, count in model.counts.items():
        extensions[ngram[:-1]] = extensions.get(ngram[:-1], 0) + count

    assert extensions == model.context_counts


def test_unigram_probability_by_hand():
    model = train_lm(["a a a"], Vocabulary(tokens=frozenset({"a"})), order=1, k=0.01)

    p_a = (3 + 0.01) / (4 + 0.03)
    p_eos = (1 + 0.01) / (4 + 0.03)

    assert probability(model, "a", []) == pytest.approx(p_a, rel=1e-12)
    assert sentence_perplexity(model, "a") == pytest.approx(
        math.exp(-(math.log(p_a) + math.log(p_eos)) / 2), rel=1e-9
    )


@pytest.mark.parametrize("order", [1, 2, 3])
def test_perplexity_matches_brute_force(order):
    rng = np.random.default_rng(order)
    training = random_sentences(rng, 30)
    vocab = extract_vocabulary(training)
    model = train_lm(training, vocab, order=order, k=0.1)

    for sentence in random_sentences(rng, 50) + ["", "nie nie nie"]:
        expected = brute_force_perplexity(
            training, set(vocab.tokens), order, 0.1, sentence
        )
        assert sentence_perplexity(model, sentence) == pytest.approx(expected, rel=1e-9)


def test_next_token_distribution_sums_to_one():
    rng = np.random.default_rng(11)
    training = random_sentences(rng, 60)
    model = train_lm(training, extract_vocabulary(training), order=3, k=0.05)

    histories = [[BOS_TOKEN, BOS_TOKEN], ["nie", "selten"], ["Sie", "kommen"]]
    histories += [
        [str(token) for token in rng.choice(WORDS, size=2)] for _ in range(30)
    ]

    for history in histories:
        distribution = next_token_distribution(model, history)
        assert set(distribution) == set(model.closed_vocabulary)
        assert math.fsum(distribution.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(0 < value <= 1 for value in distribution.values())


def test_empty_sentence_scores_eos():
    model = train_lm(["a b", "a"], Vocabulary(tokens=frozenset({"a", "b"})), order=2)

    assert sentence_perplexity(model, "") == pytest.approx(
        1 / probability(model, EOS_TOKEN, [BOS_TOKEN]), rel=1e-12
    )


def test_train_lm_errors():
    vocab = Vocabulary(tokens=frozenset({"a"}))

    with pytest.raises(TrainingError):
        train_lm([], vocab)
    with pytest.raises(ArgumentError):
        train_lm(["a"], vocab, order=0)
    with pytest.raises(ArgumentError):
        train_lm(["a"], vocab, k=0.0)


def test_identical_models_rank_in_index_order():
    training = ["Sie kommen heute", "du kommst morgen", "Sie sind hier"]
    model = train_lm(training, extract_vocabulary(training, min_count=1))

    ranking = perplexity_difference_rank(training[::-1], model, model)

    assert [score.pair_index for score in ranking] == [0, 1, 2]
    assert all(score.diff == 0.0 for score in ranking)


def test_in_domain_sentence_ranks_first():
    in_domain = ["Sie kommen heute .", "Sie sind hier .", "kommen Sie morgen ."] * 5
    general = ["xyz qqq www .", "abc def .", "Sie kommen heute ."] * 20

    lm_in, lm_gen = build_selection_models(in_domain, general, order=3)
    ranking = perplexity_difference_rank(
        ["xyz qqq www", "Sie kommen heute ."], lm_in, lm_gen
    )

    assert ranking[0].pair_index == 1
    assert ranking[0].diff < ranking[1].diff
    assert ranking[1].diff == ranking[1].pp_in - ranking[1].pp_gen


def test_mismatched_models():
    lm_a = train_lm(["a b"], Vocabulary(tokens=frozenset({"a", "b"})), order=2)
    lm_b = train_lm(["a b"], Vocabulary(tokens=frozenset({"a"})), order=2)
    lm_c = train_lm(["a b"], Vocabulary(tokens=frozenset({"a", "b"})), order=3)

    with pytest.raises(ModelMismatchError):
        perplexity_difference_rank(["a"], lm_a, lm_b)
    with pytest.raises(ModelMismatchError):
        perplexity_difference_rank(["a"], lm_a, lm_c)


def test_sample_general():
    sentences = [f"s{index}" for index in range(100)]

    assert sample_general(sentences, size=200) == sentences

    sample = sample_general(sentences, size=10, seed=5)
    assert len(sample) == 10
    assert sample == sorted(sample, key=sentences.index)
    assert sample == sample_general(sentences, size=10, seed=5)


def test_model_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    training = random_sentences(rng, 40)
    model = train_lm(training, extract_vocabulary(training), order=3, k=0.2, seed=9)

    save_model(model, tmp_path / "model.lm", {"config_hash": "abc"})
    loaded = load_model(tmp_path / "model.lm")

    assert loaded.order == 3
    assert loaded.k == 0.2
    assert loaded.seed == 9
    assert loaded.vocab == model.vocab
    assert loaded.counts == model.counts
    assert loaded.context_counts == model.context_counts
    for sentence in training[:10]:
        assert sentence_perplexity(loaded, sentence) == sentence_perplexity(
            model, sentence
        )


def test_load_model_rejects_other_files(tmp_path):
    (tmp_path / "bad.lm").write_text("not a model\n", encoding="utf-8")

    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "bad.lm")


def test_ranking_round_trip(tmp_path):
    training = ["Sie kommen heute", "du kommst morgen", "Sie sind hier"]
    vocab = extract_vocabulary(training, min_count=1)
    ranking = perplexity_difference_rank(
        training,
        train_lm(training[:1], vocab, order=2),
        train_lm(training, vocab, order=2),
    )

    save_ranking(ranking, tmp_path / "ranking.tsv")

    assert load_ranking(tmp_path / "ranking.tsv") == ranking
