from pathlib import Path

import numpy as np
import pytest

from formalia.corpus.corpus import write_lines
from formalia.corpus.models import ParallelCorpus, SentencePair
from formalia.rerank.lexicon import build_lexicon
from formalia.rerank.models import FormalityLexicon, Hypothesis, NBestList
from formalia.selection.models import RankedCorpus


def make_corpus(
    pairs: list[tuple[str, str]],
    scores: list[float] | None = None,
) -> ParallelCorpus:
    return ParallelCorpus(
        pairs=tuple(
            SentencePair(
                source=source,
                target=target,
                index=index,
                aux_score=None if scores is None else scores[index],
            )
            for index, (source, target) in enumerate(pairs)
        ),
        source_lang="en",
        target_lang="de",
    )


def make_ranks(f_pos: list[int], i_pos: list[int]) -> RankedCorpus:
    corpus = make_corpus([(f"s{index}", f"t{index}") for index in range(len(f_pos))])
    return RankedCorpus(
        corpus=corpus,
        f_pos=np.asarray(f_pos, dtype=np.int64),
        i_pos=np.asarray(i_pos, dtype=np.int64),
    )


def make_nbest(sample_id: str, texts: list[str], step: float = 0.1) -> NBestList:
    return NBestList(
        sample_id=sample_id,
        hypotheses=tuple(
            Hypothesis(text=text, base_score=-1.0 - step * rank, rank=rank)
            for rank, text in enumerate(texts)
        ),
    )


def write_file(path: Path, lines: list[str]) -> Path:
    write_lines(path, lines)
    return path


@pytest.fixture
def sie_du_lexicon() -> FormalityLexicon:
    "f(Sie)=3, f(sind)=f(kommen)=1, i(du)=i(kommst)=1"

    return build_lexicon(
        ["Sie sind", "Sie kommen", "Sie"],
        ["du kommst"],
    )
