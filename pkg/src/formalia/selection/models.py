from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from formalia.corpus.models import ParallelCorpus
from formalia.utils.utils import EnhancedStrEnum

DEFAULT_THETA_GRID: tuple[float, ...] = tuple(
    round(0.05 * step, 2) for step in range(1, 20)
)
DEFAULT_ALPHA_LOWER: float = 0.05
DEFAULT_ALPHA_UPPER: float = 0.2
DEFAULT_ALPHA_STEPS: int = 8


class SelectionMode(EnhancedStrEnum):
    """
    Enumeration of the label assignment rules.

    Attributes:
        EASY (str): Absolute threshold θ over both rank lists.
        FULL (str): Relative rank-difference threshold α.
    """

    EASY: str = "easy"
    FULL: str = "full"


@dataclass(frozen=True)
class RankedCorpus:
    """
    Data class representing the positions of every pair of a corpus in the
    formal-sorted and informal-sorted rankings.

    Attributes:
        corpus (ParallelCorpus): The ranked corpus.
        f_pos (NDArray): Position of pair i (corpus order) in the formal ranking;
            lower is more formal-like.
        i_pos (NDArray): Position of pair i in the informal ranking.
    """

    corpus: ParallelCorpus
    f_pos: NDArray = field(repr=False)
    i_pos: NDArray = field(repr=False)

    def __post_init__(self) -> None:
        size = len(self.corpus)
        for name, positions in (("f_pos", self.f_pos), ("i_pos", self.i_pos)):
            if positions.shape != (size,) or not np.array_equal(
                np.sort(positions), np.arange(size)
            ):
                raise ValueError(f"{name} must be a permutation of 0..{size - 1}")

    @property
    def size(self) -> int:
        return len(self.corpus)

    def differences(self) -> NDArray:
        """
        `i_pos - f_pos` per pair: large positive values are formal-like, large
        negative values informal-like.
        """

        return self.i_pos.astype(np.int64) - self.f_pos.astype(np.int64)


@dataclass
class SelectionReport:
    """
    Data class representing the outcome of a label assignment.

    Attributes:
        mode (SelectionMode): The assignment rule.
        threshold (int): θ or α used.
        size (int): Number of ranked pairs.
        formal_count (int): Pairs labeled formal.
        informal_count (int): Pairs labeled informal.
        none_count (int): Pairs left unlabeled.
        trace (list[tuple[int, float | None]]): Calibration candidates and their
            objective value (None for skipped candidates).
        metadata (dict[str, str]): Free-form entries (seed, configuration hash, ...).
    """

    mode: SelectionMode
    threshold: int
    size: int
    formal_count: int
    informal_count: int
    none_count: int
    trace: list[tuple[int, float | None]] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)
