from dataclasses import dataclass, field

from formalia.corpus.models import FormalityLabel
from formalia.utils.utils import EnhancedStrEnum

MARKER_PATTERN: str = r"(\[/?[FI]\])"

JUDGMENT_COLUMNS: tuple[str, ...] = (
    "sample",
    "context",
    "judgment",
    "n_desired",
    "n_opposite",
)


class Verdict(EnhancedStrEnum):
    """
    Enumeration of the judgments of a hypothesis.

    Attributes:
        CORRECT (str): More phrases of the desired formality than of the opposite.
        INCORRECT (str): At least one match, but not more desired than opposite.
        SKIPPED (str): No phrase of either reference matched.
    """

    CORRECT: str = "Correct"
    INCORRECT: str = "Incorrect"
    SKIPPED: str = "Skipped"


@dataclass(frozen=True)
class AnnotatedReference:
    """
    Data class representing a reference translation annotated at phrase level.

    Attributes:
        plain_text (str): The reference without markers, whitespace collapsed.
        phrases (tuple[str, ...]): Marked phrases in order of appearance.
        polarity (FormalityLabel): Formality of the annotation file the line comes
            from; None when unknown.
    """

    plain_text: str
    phrases: tuple[str, ...] = ()
    polarity: FormalityLabel = FormalityLabel.NONE


@dataclass(frozen=True)
class Judgment:
    """
    Data class representing the judgment of one hypothesis.

    Attributes:
        verdict (Verdict): Correct, Incorrect or Skipped.
        n_desired (int): Desired-formality phrases found in the hypothesis.
        n_opposite (int): Opposite-formality phrases found in the hypothesis.
    """

    verdict: Verdict
    n_desired: int
    n_opposite: int

    def __post_init__(self) -> None:
        if (self.verdict == Verdict.SKIPPED) != (self.n_desired + self.n_opposite == 0):
            raise ValueError("A judgment is skipped iff it has no match")


@dataclass
class ScoreReport:
    """
    Data class representing the accuracy of a set of hypotheses.

    Attributes:
        judgments (list[Judgment]): Per-sample judgments, in sample order.
        contexts (list[FormalityLabel]): Requested formality per sample.
    """

    judgments: list[Judgment] = field(default_factory=list)
    contexts: list[FormalityLabel] = field(default_factory=list)

    def count(self, verdict: Verdict) -> int:
        return sum(judgment.verdict == verdict for judgment in self.judgments)

    @property
    def correct(self) -> int:
        return self.count(Verdict.CORRECT)

    @property
    def incorrect(self) -> int:
        return self.count(Verdict.INCORRECT)

    @property
    def skipped(self) -> int:
        return self.count(Verdict.SKIPPED)

    @property
    def evaluated(self) -> int:
        return self.correct + self.incorrect

    @property
    def accuracy(self) -> float | None:
        """
        Correct over evaluated samples; None when no sample was evaluated.
        """

        if not self.evaluated:
            return None
        return self.correct / self.evaluated
