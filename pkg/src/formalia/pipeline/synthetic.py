"""
Synthetic formality data: sentences over a small shared vocabulary, where formal
and informal sentences carry disjoint marker words in every language. Used to
exercise the whole pipeline without external corpora.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from beartype import beartype
from omegaconf import OmegaConf

from formalia.corpus.corpus import write_lines
from formalia.corpus.models import FormalityLabel, ParallelCorpus, SentencePair
from formalia.log.log import Logger
from formalia.pipeline.models import (
    EvaluationData,
    LanguagePairConfig,
    PipelineConfig,
    ZeroShotConfig,
)
from formalia.rerank.models import Hypothesis, NBestList
from formalia.rerank.rerank import save_nbest
from formalia.scorer.models import AnnotatedReference
from formalia.scorer.scorer import parse_annotated

logger = Logger(module_name="synthetic", package_name="pipeline")

SOURCE_LANG: str = "en"

NOISE_WORDS: tuple[str, ...] = (
    "house",
    "tree",
    "river",
    "table",
    "window",
    "garden",
    "letter",
    "city",
    "train",
    "music",
    "market",
    "bridge",
    "school",
    "coffee",
    "paper",
    "night",
    "morning",
    "road",
    "story",
    "picture",
)

FORMAL_MARKERS: dict[str, tuple[str, ...]] = {
    "en": ("sir", "madam", "kindly"),
    "de": ("Sie", "Ihnen", "Ihr"),
    "fr": ("vous", "votre", "vos"),
    "es": ("usted", "ustedes", "su"),
}

INFORMAL_MARKERS: dict[str, tuple[str, ...]] = {
    "en": ("hey", "dude", "buddy"),
    "de": ("du", "dir", "dein"),
    "fr": ("tu", "toi", "ton"),
    "es": ("tú", "te", "tus"),
}

# Shares of formal, informal and unmarked sentences.
LABEL_SHARES: tuple[float, float, float] = (0.45, 0.45, 0.10)

BASE_SCORE: float = -1.0
BASE_SCORE_STEP: float = 0.02


@dataclass(frozen=True)
class SyntheticSentence:
    """
    Data class representing a language-independent synthetic sentence.

    Attributes:
        words (tuple[int, ...]): Indexes into `NOISE_WORDS`.
        label (FormalityLabel): Formality of the sentence.
        marker (int): Index of the marker word in the marker tuples.
        slot (int): Position the marker is inserted at, never the first one.
    """

    words: tuple[int, ...]
    label: FormalityLabel
    marker: int
    slot: int


def marker_word(label: FormalityLabel, lang: str, marker: int) -> str:
    markers = FORMAL_MARKERS if label == FormalityLabel.FORMAL else INFORMAL_MARKERS
    return markers[lang][marker]


def noise_word(index: int, lang: str) -> str:
    word = NOISE_WORDS[index]
    return word if lang == SOURCE_LANG else f"{word}_{lang}"


def sample_sentence(
    rng: np.random.Generator,
    label: FormalityLabel,
) -> SyntheticSentence:
    length = int(rng.integers(3, 6))

    return SyntheticSentence(
        words=tuple(
            int(word) for word in rng.integers(0, len(NOISE_WORDS), size=length)
        ),
        label=label,
        marker=int(rng.integers(0, 3)),
        slot=int(rng.integers(1, length + 1)),
    )


def sample_labels(size: int, rng: np.random.Generator) -> list[FormalityLabel]:
    classes = (FormalityLabel.FORMAL, FormalityLabel.INFORMAL, FormalityLabel.NONE)
    return [classes[code] for code in rng.choice(3, size=size, p=LABEL_SHARES)]


def render(
    sentence: SyntheticSentence,
    lang: str,
    label: FormalityLabel | None = None,
    annotate: bool = False,
) -> str:
    """
    Surface form of a sentence in a language.

    Parameters:
        sentence (SyntheticSentence): The sentence.
        lang (str): Language code.
        label (FormalityLabel | None, optional): Overrides the formality.
        annotate (bool, optional): Wrap the marker in `[F]...[/F]` or `[I]...[/I]`.

    Returns:
        str: Space-separated tokens ending in a full stop.
    """

    label = sentence.label if label is None else label
    tokens = [noise_word(word, lang) for word in sentence.words]

    if label != FormalityLabel.NONE:
        marker = marker_word(label, lang, sentence.marker)
        if annotate:
            marker = f"[{label}]{marker}[/{label}]"
        tokens.insert(sentence.slot, marker)

    return " ".join(tokens + ["."])


@beartype
def synthetic_sentences(size: int, seed: int) -> list[SyntheticSentence]:
    """
    Sentences with 45% formal, 45% informal and 10% unmarked labels.
    """

    rng = np.random.default_rng(seed)
    return [sample_sentence(rng, label) for label in sample_labels(size, rng)]


@beartype
def synthetic_corpus(
    sentences: list[SyntheticSentence],
    target_lang: str,
) -> ParallelCorpus:
    "English-to-target corpus of the sentences, pair index = position"

    return ParallelCorpus(
        pairs=tuple(
            SentencePair(
                source=render(sentence, SOURCE_LANG),
                target=render(sentence, target_lang),
                index=index,
            )
            for index, sentence in enumerate(sentences)
        ),
        source_lang=SOURCE_LANG,
        target_lang=target_lang,
    )


@beartype
def synthetic_in_domain(
    size: int,
    lang: str,
    label: FormalityLabel,
    seed: int,
) -> list[str]:
    "In-domain sentences of one formality"

    rng = np.random.default_rng(seed)
    return [render(sample_sentence(rng, label), lang) for _ in range(size)]


@beartype
def synthetic_nbest(
    samples: int,
    lang: str,
    k: int,
    seed: int,
    dominant: FormalityLabel = FormalityLabel.FORMAL,
) -> tuple[
    list[NBestList],
    list[AnnotatedReference],
    list[AnnotatedReference],
    list[FormalityLabel],
]:
    """
    n-best lists that always hold a hypothesis of the requested formality.

    Contexts alternate between formal and informal. The top hypothesis has the
    dominant formality, one random rank has the requested formality, and the other
    ranks are formal, informal or unmarked at random. Base scores decrease by 0.02
    per rank.

    Returns:
        tuple: The lists, formal references, informal references and contexts.
    """

    rng = np.random.default_rng(seed)
    classes = (FormalityLabel.FORMAL, FormalityLabel.INFORMAL, FormalityLabel.NONE)

    lists, formal_refs, informal_refs, contexts = [], [], [], []
    for sample in range(samples):
        sentence = sample_sentence(rng, FormalityLabel.FORMAL)
        context = FormalityLabel.FORMAL if sample % 2 == 0 else FormalityLabel.INFORMAL
        desired_rank = int(rng.integers(0, k))

        hypotheses = []
        for rank in range(k):
            if rank == desired_rank:
                label = context
            elif rank == 0:
                label = dominant
            else:
                label = classes[int(rng.integers(0, 3))]

            hypotheses.append(
                Hypothesis(
                    text=render(sentence, lang, label=label),
                    base_score=round(BASE_SCORE - BASE_SCORE_STEP * rank, 4),
                    rank=rank,
                    quality_score=round(float(rng.uniform(0.2, 0.8)), 4),
                )
            )

        lists.append(NBestList(sample_id=f"s{sample}", hypotheses=tuple(hypotheses)))
        formal_refs.append(
            parse_annotated(
                render(sentence, lang, FormalityLabel.FORMAL, annotate=True),
                FormalityLabel.FORMAL,
            )
        )
        informal_refs.append(
            parse_annotated(
                render(sentence, lang, FormalityLabel.INFORMAL, annotate=True),
                FormalityLabel.INFORMAL,
            )
        )
        contexts.append(context)

    return lists, formal_refs, informal_refs, contexts


def _write_corpus(
    directory: Path,
    name: str,
    corpus: ParallelCorpus,
) -> tuple[str, str]:
    source = f"{name}.{corpus.source_lang}"
    target = f"{name}.{corpus.target_lang}"
    write_lines(directory / source, corpus.sources())
    write_lines(directory / target, corpus.targets())

    return source, target


def _write_evaluation(
    directory: Path,
    lang: str,
    seed: int,
    samples: int,
    k: int,
    dominant: FormalityLabel,
) -> EvaluationData:
    lists, formal_refs, informal_refs, contexts = synthetic_nbest(
        samples, lang, k, seed, dominant=dominant
    )

    save_nbest(lists, directory / f"test.{lang}.nbest")

    for name, refs, label in (
        ("formal", formal_refs, FormalityLabel.FORMAL),
        ("informal", informal_refs, FormalityLabel.INFORMAL),
    ):
        write_lines(
            directory / f"test.{name}.{lang}",
            [
                " ".join(
                    f"[{label}]{token}[/{label}]" if token in ref.phrases else token
                    for token in ref.plain_text.split()
                )
                for ref in refs
            ],
        )
    write_lines(
        directory / f"test.contexts.{lang}", [str(context) for context in contexts]
    )

    return EvaluationData(
        NBest=f"test.{lang}.nbest",
        FormalRefs=f"test.formal.{lang}",
        InformalRefs=f"test.informal.{lang}",
        Contexts=f"test.contexts.{lang}",
    )


@beartype
def generate_dataset(
    directory: Path | str,
    seed: int = 13,
    size: int = 2000,
    in_domain_size: int = 300,
    samples: int = 40,
    k: int = 20,
) -> Path:
    """
    Write the synthetic dataset and its pipeline configuration: supervised en-de
    and en-fr pairs sharing most English sources, and a zero-shot en-es pair mined
    through them.

    Parameters:
        directory (Path | str): Destination directory.
        seed (int, optional): Seed of the data and of the run. Defaults to 13.
        size (int, optional): Pairs per corpus. Defaults to 2000.
        in_domain_size (int, optional): Sentences per in-domain set. Defaults to 300.
        samples (int, optional): Evaluation samples per pair. Defaults to 40.
        k (int, optional): Hypotheses per n-best list. Defaults to 20.

    Returns:
        Path: The pipeline configuration file.
    """

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    shared = synthetic_sentences(size, seed)
    extra = synthetic_sentences(size - int(0.8 * size), seed + 1)
    zero_shot = synthetic_sentences(size, seed + 2)

    pairs = []
    for offset, (lang, sentences, dominant) in enumerate(
        (
            ("de", shared, FormalityLabel.FORMAL),
            ("fr", shared[: int(0.8 * size)] + extra, FormalityLabel.INFORMAL),
        )
    ):
        source, target = _write_corpus(
            directory, f"train.en-{lang}", synthetic_corpus(sentences, lang)
        )

        in_domain = {}
        for position, label in enumerate(
            (FormalityLabel.FORMAL, FormalityLabel.INFORMAL)
        ):
            in_domain[label] = f"indomain.{label}.{lang}"
            write_lines(
                directory / in_domain[label],
                synthetic_in_domain(
                    in_domain_size, lang, label, seed + 10 + 2 * offset + position
                ),
            )

        pairs.append(
            LanguagePairConfig(
                Name=f"en-{lang}",
                SourceLang=SOURCE_LANG,
                TargetLang=lang,
                Source=source,
                Target=target,
                FormalInDomain=in_domain[FormalityLabel.FORMAL],
                InformalInDomain=in_domain[FormalityLabel.INFORMAL],
                Evaluation=_write_evaluation(
                    directory, lang, seed + 20 + offset, samples, k, dominant
                ),
            )
        )

    source, target = _write_corpus(
        directory, "train.en-es", synthetic_corpus(zero_shot, "es")
    )
    config = PipelineConfig(
        Name="synthetic",
        Seed=seed,
        Pairs=pairs,
        ZeroShot=[
            ZeroShotConfig(
                Name="en-es",
                Pivots=["en-de", "en-fr"],
                SourceLang=SOURCE_LANG,
                TargetLang="es",
                Source=source,
                Target=target,
                Evaluation=_write_evaluation(
                    directory, "es", seed + 30, samples, k, FormalityLabel.FORMAL
                ),
            )
        ],
    )
    config.Rerank.Ks = [1, 5, 10, k]

    config_path = directory / "pipeline.yaml"
    container = OmegaConf.to_container(OmegaConf.structured(config))
    container.pop("BaseDir")
    OmegaConf.save(OmegaConf.create(container), config_path)

    logger.info(f"Synthetic dataset of {3 * size} pairs written")

    return config_path
