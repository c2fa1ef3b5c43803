from dataclasses import dataclass, field

from formalia.corpus.models import SentencePair
from formalia.utils.exceptions import ArgumentError
from formalia.utils.utils import EnhancedStrEnum

DEFAULT_MAX_TOKENS: int = 250
DEFAULT_MAX_RATIO: float = 1.5
DEFAULT_CONFIDENCE_THRESHOLD: float = 0.7

# Typographic characters and their ASCII replacements. Replacements never contain
# a key, so normalizing twice equals normalizing once.
PUNCTUATION_TABLE: dict[str, str] = {
    "‘": "'",
    "’": "'",
    "‚": "'",
    "‛": "'",
    "′": "'",
    "“": '"',
    "”": '"',
    "„": '"',
    "‟": '"',
    "«": '"',
    "»": '"',
    "″": '"',
    "‐": "-",
    "‑": "-",
    "‒": "-",
    "–": "-",
    "—": "-",
    "―": "-",
    "−": "-",
    "…": "...",
    " ": " ",
    " ": " ",
    " ": " ",
    " ": " ",
    " ": " ",
    " ": " ",
}

LINK_PATTERN: str = r"(?i)\b(?:https?://|www\.)\S"


class DropReason(EnhancedStrEnum):
    """
    Enumeration of the reasons a sentence pair is removed while cleaning.

    Attributes:
        LENGTH (str): A side is longer than the token limit.
        RATIO (str): The token counts of the sides differ too much.
        EMPTY (str): A side is empty.
        IDENTICAL (str): The source equals the target.
        CASE (str): The first characters have different case.
        PUNCTUATION (str): The sides do not end in the same punctuation mark.
        NON_ASCII (str): Non-ASCII source (drop mode), or nothing left after
            stripping it.
        LINK (str): A side contains a web link.
        DUPLICATE (str): Exact repetition of an earlier pair.
        NEAR_DUPLICATE (str): Repetition up to case and terminal punctuation.
        CONFIDENCE (str): Auxiliary confidence below the threshold.
    """

    LENGTH: str = "length"
    RATIO: str = "ratio"
    EMPTY: str = "empty"
    IDENTICAL: str = "identical"
    CASE: str = "case"
    PUNCTUATION: str = "punctuation"
    NON_ASCII: str = "non_ascii"
    LINK: str = "link"
    DUPLICATE: str = "duplicate"
    NEAR_DUPLICATE: str = "near_duplicate"
    CONFIDENCE: str = "confidence"


# Per-pair rules in evaluation order; the first failing rule is the reason.
PAIR_RULES: tuple[DropReason, ...] = (
    DropReason.LENGTH,
    DropReason.RATIO,
    DropReason.EMPTY,
    DropReason.IDENTICAL,
    DropReason.CASE,
    DropReason.PUNCTUATION,
    DropReason.NON_ASCII,
    DropReason.LINK,
)


class AsciiMode(EnhancedStrEnum):
    """
    Enumeration of the treatments of non-ASCII source characters.

    Attributes:
        DROP (str): Drop the pair.
        STRIP (str): Remove the characters and keep the pair.
    """

    DROP: str = "drop"
    STRIP: str = "strip"


@dataclass(frozen=True)
class FilterConfig:
    """
    Data class representing the parameters of the cleaning cascade.

    Attributes:
        max_tokens (int): Longest accepted side, in tokens.
        max_ratio (float): Largest accepted max/min token-count ratio.
        confidence_threshold (float): Smallest accepted auxiliary score.
        ascii_mode (AsciiMode): Treatment of non-ASCII source characters.
        rules (frozenset[DropReason]): Enabled per-pair rules.
    """

    max_tokens: int = DEFAULT_MAX_TOKENS
    max_ratio: float = DEFAULT_MAX_RATIO
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    ascii_mode: AsciiMode = AsciiMode.STRIP
    rules: frozenset[DropReason] = frozenset(PAIR_RULES)

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ArgumentError(f"max_tokens must be at least 1, got {self.max_tokens}")
        if self.max_ratio <= 0:
            raise ArgumentError(f"max_ratio must be positive, got {self.max_ratio}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ArgumentError(
                "confidence_threshold must lie in [0, 1], got"
                f" {self.confidence_threshold}"
            )
        unknown = set(self.rules).difference(PAIR_RULES)
        if unknown:
            raise ArgumentError(f"Unknown rules {sorted(unknown)}")


@dataclass(frozen=True)
class PairDecision:
    """
    Data class representing the outcome of the per-pair rules.

    Attributes:
        pair (SentencePair): The pair, with a stripped source in strip mode.
        reason (DropReason | None): Why the pair is dropped; None when kept.
    """

    pair: SentencePair
    reason: DropReason | None = None

    @property
    def keep(self) -> bool:
        return self.reason is None


@dataclass
class FilterStats:
    """
    Data class representing the bookkeeping of the cleaning cascade.

    Attributes:
        input_size (int): Pairs entering the cascade.
        output_size (int): Surviving pairs.
        drops (dict[DropReason, int]): Dropped pairs per reason.
    """

    input_size: int = 0
    output_size: int = 0
    drops: dict[DropReason, int] = field(
        default_factory=lambda: {reason: 0 for reason in DropReason}
    )

    @property
    def dropped(self) -> int:
        return sum(self.drops.values())

    def reconciles(self) -> bool:
        return self.input_size == self.output_size + self.dropped
