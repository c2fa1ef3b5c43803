from dataclasses import dataclass, field

from formalia.corpus.models import FormalityLabel

DEFAULT_KAPPA_THRESHOLD: float = 0.33
DEFAULT_WEIGHT: float = 1.0
DEFAULT_KS: tuple[int, ...] = (1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)

NBEST_SEPARATOR: str = "|||"

LEXICON_COLUMNS: tuple[str, ...] = (
    "term",
    "f_count",
    "i_count",
    "beta",
    "kappa",
    "p_formal",
    "p_informal",
)

ORACLE_COLUMNS: tuple[str, ...] = (
    "k",
    "model_accuracy",
    "oracle_accuracy",
    "reranked_accuracy",
    "delta_to_best",
    "n_cases",
    "model_quality",
    "oracle_quality",
    "reranked_quality",
)


@dataclass(frozen=True)
class LexiconEntry:
    """
    Data class representing the statistics of one term of the formality lexicon.

    Attributes:
        f_count (int): Occurrences in the formal sentences.
        i_count (int): Occurrences in the informal sentences.
        beta (float): Count difference over the largest difference of the lexicon.
        kappa (int): 0 when the term is too balanced between the classes, 1
            otherwise.
        p_formal (float): Weighted probability of the formal class given the term.
        p_informal (float): Weighted probability of the informal class.
    """

    f_count: int
    i_count: int
    beta: float
    kappa: int
    p_formal: float
    p_informal: float

    @property
    def count(self) -> int:
        return self.f_count + self.i_count

    def probability(self, context: FormalityLabel) -> float:
        if context == FormalityLabel.FORMAL:
            return self.p_formal
        if context == FormalityLabel.INFORMAL:
            return self.p_informal
        return 0.0


@dataclass(frozen=True)
class FormalityLexicon:
    """
    Data class representing a relative-frequency formality lexicon.

    Attributes:
        entries (dict[str, LexiconEntry]): Statistics per term; terms never seen are
            absent.
        max_abs_diff (int): Largest absolute count difference over all terms.
        kappa_threshold (float): Balance threshold below which a term is nullified.
    """

    entries: dict[str, LexiconEntry] = field(default_factory=dict)
    max_abs_diff: int = 0
    kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return term in self.entries


@dataclass(frozen=True)
class Hypothesis:
    """
    Data class representing one hypothesis of an n-best list.

    Attributes:
        text (str): The target-language sentence.
        base_score (float): Beam log-probability.
        rank (int): Position in the beam output.
        quality_score (float | None): Externally computed quality, carried through.
        combined_score (float | None): Score under the reranking objective, once
            reranked.
    """

    text: str
    base_score: float
    rank: int
    quality_score: float | None = None
    combined_score: float | None = None


@dataclass(frozen=True)
class NBestList:
    """
    Data class representing the n-best hypotheses of one sample.

    Attributes:
        sample_id (str): Sample identifier.
        hypotheses (tuple[Hypothesis, ...]): Hypotheses in list order.
    """

    sample_id: str
    hypotheses: tuple[Hypothesis, ...]

    def __post_init__(self) -> None:
        if not self.hypotheses:
            raise ValueError(f"The n-best list of sample {self.sample_id} is empty")

    def __len__(self) -> int:
        return len(self.hypotheses)

    def top(self, k: int) -> "NBestList":
        return NBestList(sample_id=self.sample_id, hypotheses=self.hypotheses[:k])


@dataclass
class OracleRow:
    """
    Data class representing the oracle experiment at one list size k.

    Attributes:
        k (int): Number of hypotheses considered.
        model_accuracy (float | None): Accuracy of the top beam hypotheses.
        oracle_accuracy (float | None): Accuracy of the first correct hypothesis
            within the top k, falling back to the top one.
        reranked_accuracy (float | None): Accuracy after reranking the top k, when a
            lexicon is given.
        delta_to_best (float | None): Mean rank of the first correct hypothesis over
            the samples whose top hypothesis is incorrect.
        n_cases (int): Number of such samples.
        model_quality (float | None): Mean quality score of the selected hypotheses.
        oracle_quality (float | None): As above, for the oracle selection.
        reranked_quality (float | None): As above, for the reranked selection.
    """

    k: int
    model_accuracy: float | None
    oracle_accuracy: float | None
    reranked_accuracy: float | None = None
    delta_to_best: float | None = None
    n_cases: int = 0
    model_quality: float | None = None
    oracle_quality: float | None = None
    reranked_quality: float | None = None


@dataclass
class OracleReport:
    """
    Data class representing the oracle experiment over several list sizes.

    Attributes:
        rows (list[OracleRow]): One row per k, in ascending k.
        truncated (int): Lists shorter than the largest k.
    """

    rows: list[OracleRow] = field(default_factory=list)
    truncated: int = 0

    def row(self, k: int) -> OracleRow:
        for row in self.rows:
            if row.k == k:
                return row
        raise KeyError(k)
