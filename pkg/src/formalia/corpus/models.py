from collections.abc import Iterator
from dataclasses import dataclass, field

from formalia.utils.utils import EnhancedStrEnum

UNK_TOKEN: str = "⟨unk⟩"
BOS_TOKEN: str = "⟨s⟩"
EOS_TOKEN: str = "⟨/s⟩"
RESERVED_TOKENS: tuple[str, ...] = (UNK_TOKEN, BOS_TOKEN, EOS_TOKEN)

# Prefixed to any literal reserved symbol found in data, so that it reads as an
# ordinary token.
ESCAPE_MARKER: str = "\u200b"

LABELED_COLUMNS: tuple[str, ...] = ("index", "label", "source", "target")


class FormalityLabel(EnhancedStrEnum):
    """
    Enumeration of the formality labels a sentence pair can receive.

    Attributes:
        FORMAL (str): Formal register.
        INFORMAL (str): Informal register.
        NONE (str): No formality assigned.
    """

    FORMAL: str = "F"
    INFORMAL: str = "I"
    NONE: str = "-"

    def opposite(self) -> "FormalityLabel":
        """
        The other formality of the dichotomy.

        Returns:
            FormalityLabel: INFORMAL for FORMAL and vice versa; NONE for NONE.
        """

        match self:
            case FormalityLabel.FORMAL:
                return FormalityLabel.INFORMAL
            case FormalityLabel.INFORMAL:
                return FormalityLabel.FORMAL
            case _:
                return FormalityLabel.NONE

    @property
    def symbol(self) -> str:
        """
        Symbol used in human-readable tables ("F", "I" or "∅").
        """

        return "∅" if self == FormalityLabel.NONE else str(self)


@dataclass(frozen=True)
class SentencePair:
    """
    Data class representing an aligned source-target sentence pair.

    Attributes:
        source (str): Source sentence.
        target (str): Target sentence.
        index (int): Ordinal position in the corpus.
        aux_score (float | None): External confidence or quality score.
    """

    source: str
    target: str
    index: int
    aux_score: float | None = None

    def __post_init__(self) -> None:
        if "\n" in self.source or "\n" in self.target:
            raise ValueError(f"Sentence pair {self.index} spans more than one line")


@dataclass(frozen=True)
class ParallelCorpus:
    """
    Data class representing an ordered parallel corpus.

    Attributes:
        pairs (tuple[SentencePair, ...]): The sentence pairs, in file order.
        source_lang (str): Source language code.
        target_lang (str): Target language code.
    """

    pairs: tuple[SentencePair, ...]
    source_lang: str = "src"
    target_lang: str = "tgt"

    def __post_init__(self) -> None:
        indexes = [pair.index for pair in self.pairs]
        if len(set(indexes)) != len(indexes):
            raise ValueError("Sentence pair indexes must be unique within a corpus")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    def __getitem__(self, position: int) -> SentencePair:
        return self.pairs[position]

    def sources(self) -> list[str]:
        return [pair.source for pair in self.pairs]

    def targets(self) -> list[str]:
        return [pair.target for pair in self.pairs]

    def replace_pairs(self, pairs: list[SentencePair]) -> "ParallelCorpus":
        """
        A corpus with the same languages and different pairs.

        Parameters:
            pairs (list[SentencePair]): The new pairs.

        Returns:
            ParallelCorpus: The new corpus.
        """

        return ParallelCorpus(
            pairs=tuple(pairs),
            source_lang=self.source_lang,
            target_lang=self.target_lang,
        )


@dataclass(frozen=True)
class LabeledCorpus:
    """
    Data class representing sentence pairs with a formality label each.

    Attributes:
        pairs (tuple[SentencePair, ...]): The sentence pairs.
        labels (tuple[FormalityLabel, ...]): One label per pair.
    """

    pairs: tuple[SentencePair, ...]
    labels: tuple[FormalityLabel, ...]

    def __post_init__(self) -> None:
        if len(self.pairs) != len(self.labels):
            raise ValueError("A labeled corpus needs exactly one label per pair")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[SentencePair, FormalityLabel]]:
        return iter(zip(self.pairs, self.labels))

    def with_label(self, label: FormalityLabel) -> list[SentencePair]:
        """
        Pairs carrying a given label, in corpus order.

        Parameters:
            label (FormalityLabel): The label.

        Returns:
            list[SentencePair]: The matching pairs.
        """

        return [pair for pair, _label in self if _label == label]

    def formal(self) -> list[SentencePair]:
        return self.with_label(FormalityLabel.FORMAL)

    def informal(self) -> list[SentencePair]:
        return self.with_label(FormalityLabel.INFORMAL)

    def count(self, label: FormalityLabel) -> int:
        return sum(1 for _label in self.labels if _label == label)

    def labeled_count(self) -> int:
        return len(self.labels) - self.count(FormalityLabel.NONE)


@dataclass(frozen=True)
class Vocabulary:
    """
    Data class representing a restricted vocabulary.

    Attributes:
        tokens (frozenset[str]): Tokens kept as themselves; everything else maps to the
            unknown token.
        unk_token (str): Reserved symbol, never part of `tokens`.
    """

    tokens: frozenset[str] = field(default_factory=frozenset)
    unk_token: str = UNK_TOKEN

    def __post_init__(self) -> None:
        if self.unk_token in self.tokens:
            raise ValueError("The unknown token cannot be part of the vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.tokens

    def map(self, tokens: list[str]) -> list[str]:
        """
        Replace every out-of-vocabulary token by the unknown token.

        Parameters:
            tokens (list[str]): A token sequence.

        Returns:
            list[str]: The mapped sequence.
        """

        return [token if token in self.tokens else self.unk_token for token in tokens]
