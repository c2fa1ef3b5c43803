from dataclasses import dataclass, field

from formalia.corpus.models import FormalityLabel

LABEL_COMBINATIONS: tuple[tuple[FormalityLabel, FormalityLabel], ...] = (
    (FormalityLabel.FORMAL, FormalityLabel.FORMAL),
    (FormalityLabel.INFORMAL, FormalityLabel.INFORMAL),
    (FormalityLabel.FORMAL, FormalityLabel.INFORMAL),
    (FormalityLabel.INFORMAL, FormalityLabel.FORMAL),
    (FormalityLabel.FORMAL, FormalityLabel.NONE),
    (FormalityLabel.INFORMAL, FormalityLabel.NONE),
    (FormalityLabel.NONE, FormalityLabel.FORMAL),
    (FormalityLabel.NONE, FormalityLabel.INFORMAL),
)

STATS_COLUMNS: tuple[str, ...] = ("label_a", "label_b", "count", "percent")

UNDEFINED: str = "n/a"


@dataclass(frozen=True)
class Triplet:
    """
    Data class representing one source sentence with its translations and labels
    in two supervised language pairs.

    Attributes:
        source (str): The shared source sentence.
        target_a (str): Translation in the first pair.
        target_b (str): Translation in the second pair.
        label_a (FormalityLabel): Label in the first pair.
        label_b (FormalityLabel): Label in the second pair.
    """

    source: str
    target_a: str
    target_b: str
    label_a: FormalityLabel
    label_b: FormalityLabel


@dataclass(frozen=True)
class TripletCorpus:
    """
    Data class representing the intersection of two labeled corpora on their source
    side.

    Attributes:
        triplets (tuple[Triplet, ...]): One triplet per shared source, in the order
            of the first corpus.
        coverage_a (float): Matched triplets over the size of the first corpus.
        coverage_b (float): Matched triplets over the size of the second corpus.
        dropped_a (int): Repeated sources dropped from the first corpus.
        dropped_b (int): Repeated sources dropped from the second corpus.
    """

    triplets: tuple[Triplet, ...]
    coverage_a: float
    coverage_b: float
    dropped_a: int = 0
    dropped_b: int = 0

    def __post_init__(self) -> None:
        sources = [triplet.source for triplet in self.triplets]
        if len(set(sources)) != len(sources):
            raise ValueError("Triplet sources must be unique")
        for coverage in (self.coverage_a, self.coverage_b):
            if not 0.0 <= coverage <= 1.0:
                raise ValueError(f"Coverage {coverage} is outside [0, 1]")

    def __len__(self) -> int:
        return len(self.triplets)

    def __iter__(self):
        return iter(self.triplets)


@dataclass
class CombinationStats:
    """
    Data class representing the label combinations of a triplet corpus.

    Attributes:
        counts (dict[tuple[FormalityLabel, FormalityLabel], int]): Count of each of
            the 8 combinations with at least one annotated side.
        unannotated (int): Triplets unlabeled on both sides.
        total (int): All triplets.

    Note:
        Percentages and fractions are computed over the annotated base, the
        triplets with at least one labeled side; they are None when the base is
        empty.
    """

    counts: dict[tuple[FormalityLabel, FormalityLabel], int] = field(
        default_factory=lambda: {combination: 0 for combination in LABEL_COMBINATIONS}
    )
    unannotated: int = 0
    total: int = 0

    @property
    def annotated(self) -> int:
        return sum(self.counts.values())

    @property
    def both_annotated(self) -> int:
        return sum(
            count
            for (label_a, label_b), count in self.counts.items()
            if FormalityLabel.NONE not in (label_a, label_b)
        )

    @property
    def agreeing(self) -> int:
        return (
            self.counts[(FormalityLabel.FORMAL, FormalityLabel.FORMAL)]
            + self.counts[(FormalityLabel.INFORMAL, FormalityLabel.INFORMAL)]
        )

    def percent(
        self,
        combination: tuple[FormalityLabel, FormalityLabel],
    ) -> float | None:
        if not self.annotated:
            return None
        return 100.0 * self.counts[combination] / self.annotated

    @property
    def both_annotated_fraction(self) -> float | None:
        if not self.annotated:
            return None
        return self.both_annotated / self.annotated

    @property
    def both_annotated_share_of_total(self) -> float | None:
        if not self.total:
            return None
        return self.both_annotated / self.total

    @property
    def agreement_fraction(self) -> float | None:
        if not self.both_annotated:
            return None
        return self.agreeing / self.both_annotated
