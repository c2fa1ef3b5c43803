from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray

from formalia.utils.utils import EnhancedStrEnum

DEFAULT_WINDOW: int = 10
# Window sums closer than this per checkpoint are equal
WINDOW_TOLERANCE: float = 1e-12

AUTO: str = "auto"

SERIES_COLUMNS: tuple[str, ...] = ("checkpoint", "accuracy")


class Stage(EnhancedStrEnum):
    """
    Enumeration of the stages of a pipeline run.

    Attributes:
        PREP (str): Cleaning cascade.
        LM (str): Selection language models and rankings.
        MINE (str): Label assignment.
        PIVOT (str): Intersection of two supervised pairs.
        LEXICON (str): Formality lexicon.
        RERANK (str): n-best reranking.
        SCORE (str): Accuracy of the reranked and the beam hypotheses.
        ORACLE (str): Oracle experiment.
    """

    PREP: str = "prep"
    LM: str = "lm"
    MINE: str = "mine"
    PIVOT: str = "pivot"
    LEXICON: str = "lexicon"
    RERANK: str = "rerank"
    SCORE: str = "score"
    ORACLE: str = "oracle"


class LexiconSource(EnhancedStrEnum):
    """
    Enumeration of the data a supervised pair builds its lexicon from.

    Attributes:
        IN_DOMAIN (str): The annotated in-domain sets.
        MINED (str): The mined formal and informal targets.
    """

    IN_DOMAIN: str = "in_domain"
    MINED: str = "mined"


@dataclass
class LanguageModelStage:
    """
    Data class representing the parameters of the selection language models.

    Attributes:
        Order (int): n-gram order.
        K (float): Additive smoothing constant.
        MinCount (int): Vocabulary threshold.
        GeneralSample (int): Size of the general sample.
    """

    Order: int = 3
    K: float = 0.1
    MinCount: int = 2
    GeneralSample: int = 10000


@dataclass
class SelectionStage:
    """
    Data class representing the parameters of label assignment.

    Attributes:
        Mode (str): `easy` or `full`.
        Theta (str): `auto` or a fraction of the corpus size.
        Alpha (str): `auto` or an integer.
        ThetaGrid (list[float]): Fractions tried when θ is `auto`.
        AlphaLower (float): Lower calibration bound, fraction of the corpus size.
        AlphaUpper (float): Upper calibration bound, fraction of the corpus size.
        AlphaSteps (int): Calibration candidates.
    """

    Mode: str = "full"
    Theta: str = AUTO
    Alpha: str = AUTO
    ThetaGrid: List[float] = field(
        default_factory=lambda: [round(0.05 * step, 2) for step in range(1, 20)]
    )
    AlphaLower: float = 0.05
    AlphaUpper: float = 0.2
    AlphaSteps: int = 8


@dataclass
class FilteringStage:
    """
    Data class representing the parameters of the cleaning cascade.

    Attributes:
        Enabled (bool): Whether the corpora are cleaned.
        MaxTokens (int): Longest accepted side.
        MaxRatio (float): Largest accepted token-count ratio.
        ConfidenceThreshold (float): Smallest accepted auxiliary score.
        AsciiMode (str): `strip` or `drop`.
    """

    Enabled: bool = True
    MaxTokens: int = 250
    MaxRatio: float = 1.5
    ConfidenceThreshold: float = 0.7
    AsciiMode: str = "strip"


@dataclass
class RerankStage:
    """
    Data class representing the parameters of the lexicon, reranking and oracle.

    Attributes:
        KappaThreshold (float): Lexicon balance threshold.
        Weight (float): Weight λ of the formality margin.
        LexiconSource (str): `in_domain` or `mined` for supervised pairs.
        Ks (list[int]): Oracle list sizes.
    """

    KappaThreshold: float = 0.33
    Weight: float = 1.0
    LexiconSource: str = "in_domain"
    Ks: List[int] = field(
        default_factory=lambda: [1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
    )


@dataclass
class EvaluationData:
    """
    Data class representing the optional evaluation inputs of a language pair.

    Attributes:
        NBest (str | None): n-best file.
        FormalRefs (str | None): Formal annotated references.
        InformalRefs (str | None): Informal annotated references.
        Contexts (str | None): `F`, `I` or a file with one context per sample.
    """

    NBest: Optional[str] = None
    FormalRefs: Optional[str] = None
    InformalRefs: Optional[str] = None
    Contexts: Optional[str] = None


@dataclass
class LanguagePairConfig:
    """
    Data class representing a supervised language pair.

    Attributes:
        Name (str): Pair name, also the name of its output directory.
        SourceLang (str): Source language code.
        TargetLang (str): Target language code.
        Source (str): Source side of the corpus to mine.
        Target (str): Target side of the corpus to mine.
        Aux (str | None): Auxiliary confidence scores of the corpus.
        FormalInDomain (str): Formal in-domain target sentences.
        InformalInDomain (str): Informal in-domain target sentences.
        Evaluation (EvaluationData): Evaluation inputs.
    """

    Name: str = ""
    SourceLang: str = "src"
    TargetLang: str = "tgt"
    Source: str = ""
    Target: str = ""
    Aux: Optional[str] = None
    FormalInDomain: str = ""
    InformalInDomain: str = ""
    Evaluation: EvaluationData = field(default_factory=EvaluationData)


@dataclass
class ZeroShotConfig:
    """
    Data class representing a language pair mined through two supervised pairs.

    Attributes:
        Name (str): Pair name.
        Pivots (list[str]): Names of the two supervised pairs sharing the source
            language.
        SourceLang (str): Source language code.
        TargetLang (str): Target language code.
        Source (str): Source side of the corpus to mine.
        Target (str): Target side of the corpus to mine.
        Aux (str | None): Auxiliary confidence scores.
        Evaluation (EvaluationData): Evaluation inputs.
    """

    Name: str = ""
    Pivots: List[str] = field(default_factory=list)
    SourceLang: str = "src"
    TargetLang: str = "tgt"
    Source: str = ""
    Target: str = ""
    Aux: Optional[str] = None
    Evaluation: EvaluationData = field(default_factory=EvaluationData)


@dataclass
class PipelineConfig:
    """
    Data class representing a pipeline run.

    Attributes:
        Name (str): Run name.
        Seed (int): Seed of every random step.
        OutputDir (str): Artifact directory.
        LanguageModel (LanguageModelStage): Language model parameters.
        Selection (SelectionStage): Label assignment parameters.
        Filtering (FilteringStage): Cleaning parameters.
        Rerank (RerankStage): Lexicon, reranking and oracle parameters.
        Pairs (list[LanguagePairConfig]): Supervised pairs.
        ZeroShot (list[ZeroShotConfig]): Zero-shot pairs.

    Note:
        Relative paths are resolved against `BaseDir`, the directory of the
        configuration file, which is set when loading and never hashed.
    """

    Name: str = "formalia"
    Seed: int = 13
    OutputDir: str = "output"
    LanguageModel: LanguageModelStage = field(default_factory=LanguageModelStage)
    Selection: SelectionStage = field(default_factory=SelectionStage)
    Filtering: FilteringStage = field(default_factory=FilteringStage)
    Rerank: RerankStage = field(default_factory=RerankStage)
    Pairs: List[LanguagePairConfig] = field(default_factory=list)
    ZeroShot: List[ZeroShotConfig] = field(default_factory=list)
    BaseDir: str = "."


@dataclass(frozen=True)
class ScoreSeries:
    """
    Data class representing held-out accuracies of consecutive checkpoints.

    Attributes:
        checkpoints (tuple[str, ...]): Checkpoint identifiers, unique.
        accuracies (NDArray): Accuracy per checkpoint, in [0, 1].
    """

    checkpoints: tuple[str, ...]
    accuracies: NDArray = field(repr=False)

    def __post_init__(self) -> None:
        if not self.checkpoints:
            raise ValueError("A score series cannot be empty")
        if len(set(self.checkpoints)) != len(self.checkpoints):
            raise ValueError("Checkpoint identifiers must be unique")
        if self.accuracies.shape != (len(self.checkpoints),):
            raise ValueError("One accuracy per checkpoint is expected")
        if np.any((self.accuracies < 0) | (self.accuracies > 1)):
            raise ValueError("Accuracies must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.checkpoints)
