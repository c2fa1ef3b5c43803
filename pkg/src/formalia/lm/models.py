import hashlib
from dataclasses import dataclass, field

from formalia.corpus.models import EOS_TOKEN, Vocabulary

DEFAULT_ORDER: int = 3
DEFAULT_K: float = 0.1
DEFAULT_SEED: int = 13
DEFAULT_GENERAL_SAMPLE: int = 10000

MODEL_FORMAT_HEADER: str = "#formalia-ngram"
MODEL_FORMAT_VERSION: int = 1

RANKING_COLUMNS: tuple[str, ...] = ("index", "pp_in", "pp_gen", "diff")


def vocabulary_hash(vocab: Vocabulary) -> str:
    """
    Stable fingerprint of a vocabulary.

    Parameters:
        vocab (Vocabulary): The vocabulary.

    Returns:
        str: Hex sha256 of the sorted tokens.
    """

    return hashlib.sha256(
        "\n".join(sorted(vocab.tokens) + [vocab.unk_token]).encode("utf-8")
    ).hexdigest()


@dataclass(frozen=True)
class NGramModel:
    """
    Data class representing a count-based n-gram language model over a closed
    vocabulary, smoothed with interpolated add-k.

    Attributes:
        order (int): n-gram order, at least 1.
        vocab (Vocabulary): The restricted vocabulary.
        k (float): Additive smoothing constant, greater than 0.
        counts (dict[tuple[str, ...], int]): Count of every n-gram of length 1 to
            `order` ending in a predicted token (begin markers are never predicted).
        context_counts (dict[tuple[str, ...], int]): Number of predictions made from
            every history; the empty history counts all predicted tokens.
        seed (int | None): Seed of the sample the model was trained on, if any.
    """

    order: int
    vocab: Vocabulary
    k: float
    counts: dict[tuple[str, ...], int] = field(repr=False)
    context_counts: dict[tuple[str, ...], int] = field(repr=False)
    seed: int | None = None

    @property
    def closed_vocabulary(self) -> list[str]:
        """
        The predictable tokens: vocabulary tokens, the unknown token and EOS.
        """

        return sorted(self.vocab.tokens) + [self.vocab.unk_token, EOS_TOKEN]

    @property
    def closed_size(self) -> int:
        return len(self.vocab) + 2

    @property
    def vocab_hash(self) -> str:
        return vocabulary_hash(self.vocab)


@dataclass(frozen=True)
class PerplexityScore:
    """
    Data class representing the perplexity difference of one sentence.

    Attributes:
        pair_index (int): Index of the sentence pair.
        pp_in (float): Perplexity under the in-domain model.
        pp_gen (float): Perplexity under the general model.
        diff (float): `pp_in - pp_gen`.
    """

    pair_index: int
    pp_in: float
    pp_gen: float
    diff: float
