import hashlib
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from beartype import beartype
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from formalia import __version__
from formalia.corpus.corpus import (
    load_parallel,
    read_lines,
    read_tsv,
    save_labeled,
    save_parallel,
    write_lines,
)
from formalia.corpus.models import FormalityLabel, LabeledCorpus, ParallelCorpus
from formalia.lm.lm import (
    build_selection_models,
    perplexity_difference_rank,
    save_model,
    save_ranking,
)
from formalia.lm.models import PerplexityScore
from formalia.log.log import Logger
from formalia.pipeline.models import (
    AUTO,
    DEFAULT_WINDOW,
    WINDOW_TOLERANCE,
    SERIES_COLUMNS,
    EvaluationData,
    LanguagePairConfig,
    LexiconSource,
    PipelineConfig,
    ScoreSeries,
    Stage,
    ZeroShotConfig,
)
from formalia.pivot.pivot import (
    combination_stats,
    intersect_on_source,
    pivot_in_domain_sets,
    render_stats,
    save_stats,
    zero_shot_mine,
)
from formalia.prep.models import AsciiMode, FilterConfig
from formalia.prep.prep import clean_corpus
from formalia.prep.prep import render_stats as render_filter_stats
from formalia.rerank.lexicon import build_lexicon, save_lexicon
from formalia.rerank.models import FormalityLexicon
from formalia.rerank.rerank import (
    load_nbest,
    oracle_experiment,
    render_oracle_report,
    rerank_nbest,
    save_nbest,
    save_oracle_report,
)
from formalia.scorer.scorer import (
    corpus_accuracy,
    load_annotated,
    load_contexts,
    render_score_report,
    save_judgments,
)
from formalia.selection.models import SelectionMode, SelectionReport
from formalia.selection.selection import (
    assign_easy,
    assign_full,
    calibrate_alpha,
    choose_theta,
    ranked_corpus,
    save_report,
    selection_report,
)
from formalia.utils.exceptions import (
    ArgumentError,
    ConfigValidationError,
    DataError,
    EmptyPivotSeedsError,
    FormaliaError,
    StageError,
)
from formalia.utils.utils import round_half_up

logger = Logger(module_name="pipeline", package_name="pipeline")

TRAIL_FILENAME: str = "trail.jsonl"
MANIFEST_FILENAME: str = "manifest.yaml"


def _accuracies(series: ScoreSeries | Sequence[float]) -> np.ndarray:
    if isinstance(series, ScoreSeries):
        return series.accuracies.astype(float)
    return np.asarray(series, dtype=float)


@beartype
def best_window(
    series: ScoreSeries | Sequence[float],
    window: int = DEFAULT_WINDOW,
) -> tuple[int, float]:
    """
    Find the window of consecutive checkpoints with the highest mean accuracy.

    Parameters:
        series (ScoreSeries | Sequence[float]): Accuracies in checkpoint order.
        window (int, optional): Number of consecutive checkpoints. Defaults to 10.

    Returns:
        tuple[int, float]: 0-based start of the window and its mean accuracy; ties
            go to the smallest start.

    Raises:
        ArgumentError: If the window is not within 1 and the series length.
    """

    accuracies = _accuracies(series)
    if not 1 <= window <= len(accuracies):
        raise ArgumentError(
            f"The window must lie in [1, {len(accuracies)}], got {window}"
        )

    sums = np.convolve(accuracies, np.ones(window), mode="valid")
    start = int(np.flatnonzero(sums >= sums.max() - WINDOW_TOLERANCE * window)[0])

    return start, float(np.mean(accuracies[start : start + window]))


@beartype
def last_window(
    series: ScoreSeries | Sequence[float],
    window: int = DEFAULT_WINDOW,
) -> tuple[int, float]:
    """
    The window of the last checkpoints, the baseline `best_window` is compared
    against.

    Raises:
        ArgumentError: If the window is not within 1 and the series length.
    """

    accuracies = _accuracies(series)
    if not 1 <= window <= len(accuracies):
        raise ArgumentError(
            f"The window must lie in [1, {len(accuracies)}], got {window}"
        )

    start = len(accuracies) - window

    return start, float(np.mean(accuracies[start:]))


@beartype
def load_series(path: Path | str) -> ScoreSeries:
    """
    Read a score series TSV with columns `checkpoint` and `accuracy`.

    Raises:
        DataError: If a column is missing, an accuracy is not a real in [0, 1], or
            the series is empty or repeats a checkpoint.
    """

    table = read_tsv(path)

    missing = set(SERIES_COLUMNS).difference(table.columns)
    if missing:
        raise DataError(f"{path} is missing the columns {sorted(missing)}")

    try:
        return ScoreSeries(
            checkpoints=tuple(table["checkpoint"]),
            accuracies=table["accuracy"].astype(float).to_numpy(),
        )
    except ValueError as error:
        raise DataError(f"{path}: {error}") from error


@beartype
def load_pipeline_config(path: Path | str) -> PipelineConfig:
    """
    Read a pipeline configuration YAML file.

    Parameters:
        path (Path | str): The configuration file.

    Returns:
        PipelineConfig: The configuration; relative paths refer to the directory of
            the file.

    Raises:
        ConfigValidationError: If the file is missing or does not match the schema.
    """

    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError(f"Pipeline configuration {path} does not exist")

    try:
        config: PipelineConfig = OmegaConf.to_object(
            OmegaConf.merge(
                OmegaConf.structured(PipelineConfig),
                OmegaConf.load(path),
            )
        )
    except OmegaConfBaseException as error:
        raise ConfigValidationError(f"{path}: {error}") from error

    config.BaseDir = str(path.absolute().parent)

    return config


def resolve_path(config: PipelineConfig, value: str) -> Path:
    "A configured path, relative to the directory of the configuration"

    path = Path(value)
    return path if path.is_absolute() else Path(config.BaseDir) / path


def config_hash(config: PipelineConfig) -> str:
    """
    sha256 of the resolved configuration YAML. The output and base directories are
    left out, so moving a run does not change its hash.
    """

    container = OmegaConf.to_container(OmegaConf.structured(config))
    container.pop("OutputDir")
    container.pop("BaseDir")

    return hashlib.sha256(
        OmegaConf.to_yaml(OmegaConf.create(container), sort_keys=True).encode("utf-8")
    ).hexdigest()


def _evaluation_problems(
    config: PipelineConfig,
    owner: str,
    evaluation: EvaluationData,
) -> list[str]:
    problems = []
    for name in ("NBest", "FormalRefs", "InformalRefs"):
        value = getattr(evaluation, name)
        if value and not resolve_path(config, value).is_file():
            problems.append(f"{owner}: {name} file {value} does not exist")

    if bool(evaluation.FormalRefs) != bool(evaluation.InformalRefs):
        problems.append(f"{owner}: formal and informal references go together")
    if evaluation.FormalRefs and not evaluation.NBest:
        problems.append(f"{owner}: references are given without an n-best file")

    contexts = evaluation.Contexts
    if (
        contexts
        and contexts not in (FormalityLabel.FORMAL, FormalityLabel.INFORMAL)
        and not resolve_path(config, contexts).is_file()
    ):
        problems.append(f"{owner}: Contexts must be F, I or an existing file")

    return problems


@beartype
def validate_config(config: PipelineConfig) -> None:
    """
    Check a configuration before any stage runs.

    Parameters:
        config (PipelineConfig): The configuration.

    Raises:
        ConfigValidationError: Listing every referenced input that does not exist
            and every inconsistency between pairs and stages.
    """

    problems = []

    if not config.Pairs and not config.ZeroShot:
        problems.append("no language pair is configured")
    if not SelectionMode.has(config.Selection.Mode):
        problems.append(f"unknown selection mode '{config.Selection.Mode}'")
    if not LexiconSource.has(config.Rerank.LexiconSource):
        problems.append(f"unknown lexicon source '{config.Rerank.LexiconSource}'")
    if not AsciiMode.has(config.Filtering.AsciiMode):
        problems.append(f"unknown ASCII mode '{config.Filtering.AsciiMode}'")

    for name, value, parse in (
        ("Theta", config.Selection.Theta, float),
        ("Alpha", config.Selection.Alpha, int),
    ):
        if value != AUTO:
            try:
                parse(value)
            except ValueError:
                problems.append(f"Selection.{name} must be '{AUTO}' or a number")

    names = [pair.Name for pair in config.Pairs]
    names += [pair.Name for pair in config.ZeroShot]
    if len(set(names)) != len(names) or not all(names):
        problems.append(f"pair names must be non-empty and unique, got {names}")

    for pair in config.Pairs:
        for field_name in ("Source", "Target", "FormalInDomain", "InformalInDomain"):
            value = getattr(pair, field_name)
            if not value or not resolve_path(config, value).is_file():
                problems.append(
                    f"{pair.Name}: {field_name} file '{value}' does not exist"
                )
        if pair.Aux and not resolve_path(config, pair.Aux).is_file():
            problems.append(f"{pair.Name}: Aux file {pair.Aux} does not exist")
        problems.extend(_evaluation_problems(config, pair.Name, pair.Evaluation))

    supervised = {pair.Name: pair for pair in config.Pairs}
    for pair in config.ZeroShot:
        for field_name in ("Source", "Target"):
            value = getattr(pair, field_name)
            if not value or not resolve_path(config, value).is_file():
                problems.append(
                    f"{pair.Name}: {field_name} file '{value}' does not exist"
                )
        if pair.Aux and not resolve_path(config, pair.Aux).is_file():
            problems.append(f"{pair.Name}: Aux file {pair.Aux} does not exist")

        if len(pair.Pivots) != 2 or len(set(pair.Pivots)) != 2:
            problems.append(f"{pair.Name}: exactly two distinct pivot pairs are needed")
        for pivot in pair.Pivots:
            if pivot not in supervised:
                problems.append(
                    f"{pair.Name}: pivot '{pivot}' is not a supervised pair"
                )
            elif supervised[pivot].SourceLang != pair.SourceLang:
                problems.append(
                    f"{pair.Name}: pivot '{pivot}' has source language"
                    f" {supervised[pivot].SourceLang}, expected {pair.SourceLang}"
                )
        problems.extend(_evaluation_problems(config, pair.Name, pair.Evaluation))

    if problems:
        raise ConfigValidationError(
            "Invalid pipeline configuration: " + "; ".join(problems)
        )


@dataclass
class MinedPair:
    """
    Data class representing the outcome of mining one language pair.

    Attributes:
        labeled (LabeledCorpus): Every pair of the cleaned corpus with its label.
        lexicon (FormalityLexicon): The lexicon of the pair.
    """

    labeled: LabeledCorpus
    lexicon: FormalityLexicon


class PipelineRun:
    """
    One execution of the supervised and zero-shot flows of a configuration.
    Stages run sequentially; every stage writes its artifacts and a manifest under
    `<output>/<pair>/<stage>/`.
    """

    def __init__(
        self,
        config: PipelineConfig,
        output_dir: Path,
        workers: int | None = None,
    ) -> None:
        self.config = config
        self.output_dir = output_dir
        self.workers = workers
        self.hash = config_hash(config)
        self.mined: dict[str, MinedPair] = {}

    @contextmanager
    def stage(self, stage: Stage, pair: str) -> Iterator[Path]:
        directory = self.output_dir / pair / str(stage)
        directory.mkdir(parents=True, exist_ok=True)

        logger.info(f"{pair}: {stage}")
        try:
            yield directory
        except StageError:
            raise
        except Exception as error:
            logger.error(f"{pair}: stage {stage} failed: {error}")
            raise StageError(f"{pair}/{stage}", error) from error

    def manifest(
        self,
        directory: Path,
        stage: Stage,
        pair: str,
        parameters: dict,
    ) -> None:
        OmegaConf.save(
            OmegaConf.create(
                {
                    "Stage": str(stage),
                    "Pair": pair,
                    "ConfigHash": self.hash,
                    "Version": __version__,
                    "Seed": self.config.Seed,
                    "Parameters": parameters,
                    "Artifacts": sorted(
                        path.name
                        for path in directory.iterdir()
                        if path.name != MANIFEST_FILENAME
                    ),
                }
            ),
            directory / MANIFEST_FILENAME,
        )

    def filter_config(self) -> FilterConfig:
        filtering = self.config.Filtering
        return FilterConfig(
            max_tokens=filtering.MaxTokens,
            max_ratio=filtering.MaxRatio,
            confidence_threshold=filtering.ConfidenceThreshold,
            ascii_mode=AsciiMode(filtering.AsciiMode),
        )

    def prep(self, pair: LanguagePairConfig | ZeroShotConfig) -> ParallelCorpus:
        with self.stage(Stage.PREP, pair.Name) as directory:
            corpus = load_parallel(
                resolve_path(self.config, pair.Source),
                resolve_path(self.config, pair.Target),
                source_lang=pair.SourceLang,
                target_lang=pair.TargetLang,
                aux_path=resolve_path(self.config, pair.Aux) if pair.Aux else None,
            )

            if self.config.Filtering.Enabled:
                corpus, stats = clean_corpus(corpus, self.filter_config(), self.workers)
                (directory / "filter_stats.txt").write_text(
                    render_filter_stats(stats), encoding="utf-8"
                )

            save_parallel(
                corpus,
                directory / f"clean.{pair.SourceLang}",
                directory / f"clean.{pair.TargetLang}",
            )
            self.manifest(
                directory,
                Stage.PREP,
                pair.Name,
                {"Enabled": self.config.Filtering.Enabled, "Size": len(corpus)},
            )

        return corpus

    def rank(
        self,
        pair: LanguagePairConfig,
        corpus: ParallelCorpus,
        formal_in: list[str],
        informal_in: list[str],
    ) -> tuple[list[PerplexityScore], list[PerplexityScore]]:
        settings = self.config.LanguageModel
        rankings = []

        with self.stage(Stage.LM, pair.Name) as directory:
            for label, in_domain in (("formal", formal_in), ("informal", informal_in)):
                lm_in, lm_gen = build_selection_models(
                    in_domain,
                    corpus.targets(),
                    order=settings.Order,
                    k=settings.K,
                    min_count=settings.MinCount,
                    sample_size=settings.GeneralSample,
                    seed=self.config.Seed,
                )
                metadata = {"config_hash": self.hash}
                save_model(lm_in, directory / f"{label}.in.lm", metadata)
                save_model(lm_gen, directory / f"{label}.gen.lm", metadata)

                ranking = perplexity_difference_rank(
                    corpus.targets(), lm_in, lm_gen, workers=self.workers
                )
                save_ranking(ranking, directory / f"{label}.ranking.tsv")
                rankings.append(ranking)

            self.manifest(
                directory,
                Stage.LM,
                pair.Name,
                {
                    "Order": settings.Order,
                    "K": settings.K,
                    "MinCount": settings.MinCount,
                    "GeneralSample": settings.GeneralSample,
                },
            )

        return rankings[0], rankings[1]

    def mine(
        self,
        pair: LanguagePairConfig,
        corpus: ParallelCorpus,
        rankings: tuple[list[PerplexityScore], list[PerplexityScore]],
        in_domain: list[str],
    ) -> LabeledCorpus:
        selection = self.config.Selection
        settings = self.config.LanguageModel

        with self.stage(Stage.MINE, pair.Name) as directory:
            ranks = ranked_corpus(corpus, *rankings)
            trace: list = []

            if selection.Mode == SelectionMode.EASY:
                if selection.Theta == AUTO:
                    threshold = choose_theta(ranks, selection.ThetaGrid, trace=trace)
                else:
                    threshold = min(
                        round_half_up(float(selection.Theta) * ranks.size),
                        ranks.size - 1,
                    )
                labeled = assign_easy(ranks, threshold)
            else:
                if selection.Alpha == AUTO:
                    threshold = calibrate_alpha(
                        ranks,
                        corpus,
                        in_domain,
                        lower=selection.AlphaLower,
                        upper=selection.AlphaUpper,
                        steps=selection.AlphaSteps,
                        order=settings.Order,
                        k=settings.K,
                        min_count=settings.MinCount,
                        trace=trace,
                        workers=self.workers,
                    )
                else:
                    threshold = int(selection.Alpha)
                labeled = assign_full(ranks, threshold)

            self.save_mined(
                directory,
                pair.Name,
                labeled,
                selection_report(
                    labeled,
                    SelectionMode(selection.Mode),
                    threshold,
                    trace=trace,
                    metadata={"config_hash": self.hash, "seed": str(self.config.Seed)},
                ),
                {"Mode": selection.Mode, "Threshold": threshold},
            )

        return labeled

    def save_mined(
        self,
        directory: Path,
        name: str,
        labeled: LabeledCorpus,
        report: SelectionReport,
        parameters: dict,
    ) -> None:
        save_labeled(labeled, directory / "labeled.tsv")
        save_report(report, directory / "report.txt")
        self.manifest(directory, Stage.MINE, name, parameters)

    def lexicon(
        self,
        name: str,
        formal_targets: list[str],
        informal_targets: list[str],
        source: LexiconSource,
    ) -> FormalityLexicon:
        with self.stage(Stage.LEXICON, name) as directory:
            lexicon = build_lexicon(
                formal_targets,
                informal_targets,
                kappa_threshold=self.config.Rerank.KappaThreshold,
            )
            save_lexicon(lexicon, directory / "lexicon.tsv")
            self.manifest(
                directory,
                Stage.LEXICON,
                name,
                {
                    "KappaThreshold": self.config.Rerank.KappaThreshold,
                    "Source": str(source),
                    "Terms": len(lexicon),
                },
            )

        return lexicon

    def evaluate(
        self,
        name: str,
        evaluation: EvaluationData,
        lexicon: FormalityLexicon,
    ) -> None:
        if not evaluation.NBest:
            return

        weight = self.config.Rerank.Weight

        with self.stage(Stage.RERANK, name) as directory:
            lists = load_nbest(resolve_path(self.config, evaluation.NBest))
            contexts_value = evaluation.Contexts or str(FormalityLabel.FORMAL)
            if contexts_value not in (FormalityLabel.FORMAL, FormalityLabel.INFORMAL):
                contexts_value = str(resolve_path(self.config, contexts_value))
            contexts = load_contexts(contexts_value, len(lists))

            reranked = [
                rerank_nbest(lexicon, nbest, context, weight)
                for nbest, context in zip(lists, contexts)
            ]
            save_nbest(reranked, directory / "reranked.nbest")
            write_lines(
                directory / "reranked.top1",
                [nbest.hypotheses[0].text for nbest in reranked],
            )
            self.manifest(
                directory, Stage.RERANK, name, {"Weight": weight, "Samples": len(lists)}
            )

        if not evaluation.FormalRefs:
            return

        with self.stage(Stage.SCORE, name) as directory:
            formal_refs = load_annotated(
                resolve_path(self.config, evaluation.FormalRefs), FormalityLabel.FORMAL
            )
            informal_refs = load_annotated(
                resolve_path(self.config, evaluation.InformalRefs),
                FormalityLabel.INFORMAL,
            )

            accuracies = {}
            for system, selected in (("beam", lists), ("reranked", reranked)):
                report = corpus_accuracy(
                    [nbest.hypotheses[0].text for nbest in selected],
                    formal_refs,
                    informal_refs,
                    contexts,
                    workers=self.workers,
                )
                (directory / f"{system}.txt").write_text(
                    render_score_report(report), encoding="utf-8"
                )
                save_judgments(report, directory / f"{system}.judgments.tsv")
                accuracies[system] = (
                    "n/a" if report.accuracy is None else report.accuracy
                )

            self.manifest(directory, Stage.SCORE, name, {"Accuracy": accuracies})

        with self.stage(Stage.ORACLE, name) as directory:
            oracle = oracle_experiment(
                lists,
                formal_refs,
                informal_refs,
                contexts,
                self.config.Rerank.Ks,
                lexicon=lexicon,
                weight=weight,
                workers=self.workers,
            )
            save_oracle_report(oracle, directory / "oracle.tsv")
            (directory / "oracle.txt").write_text(
                render_oracle_report(oracle), encoding="utf-8"
            )
            self.manifest(
                directory,
                Stage.ORACLE,
                name,
                {"Ks": list(self.config.Rerank.Ks), "Truncated": oracle.truncated},
            )

    def supervised(self, pair: LanguagePairConfig) -> None:
        corpus = self.prep(pair)

        formal_in = read_lines(resolve_path(self.config, pair.FormalInDomain))
        informal_in = read_lines(resolve_path(self.config, pair.InformalInDomain))

        rankings = self.rank(pair, corpus, formal_in, informal_in)
        labeled = self.mine(pair, corpus, rankings, formal_in + informal_in)

        source = LexiconSource(self.config.Rerank.LexiconSource)
        if source == LexiconSource.IN_DOMAIN:
            lexicon = self.lexicon(pair.Name, formal_in, informal_in, source)
        else:
            lexicon = self.lexicon(
                pair.Name,
                [item.target for item in labeled.formal()],
                [item.target for item in labeled.informal()],
                source,
            )

        self.mined[pair.Name] = MinedPair(labeled=labeled, lexicon=lexicon)
        self.evaluate(pair.Name, pair.Evaluation, lexicon)

    def zero_shot(self, pair: ZeroShotConfig) -> None:
        first, second = (self.mined[pivot] for pivot in pair.Pivots)

        with self.stage(Stage.PIVOT, pair.Name) as directory:
            triplets = intersect_on_source(first.labeled, second.labeled)
            stats = combination_stats(triplets)
            save_stats(stats, directory / "stats.tsv")
            (directory / "stats.txt").write_text(
                render_stats(stats, coverage=triplets), encoding="utf-8"
            )

            formal_sources, informal_sources = pivot_in_domain_sets(triplets)
            write_lines(directory / "formal.seeds", formal_sources)
            write_lines(directory / "informal.seeds", informal_sources)
            self.manifest(
                directory,
                Stage.PIVOT,
                pair.Name,
                {
                    "Pivots": list(pair.Pivots),
                    "Triplets": len(triplets),
                    "FormalSeeds": len(formal_sources),
                    "InformalSeeds": len(informal_sources),
                },
            )

            if not formal_sources or not informal_sources:
                raise EmptyPivotSeedsError(
                    f"The pivots {pair.Pivots} share {len(triplets)} sources, of which"
                    f" {len(formal_sources)} are formal and {len(informal_sources)}"
                    " informal in both pairs; zero-shot mining needs both seed sets"
                )

        corpus = self.prep(pair)

        target_count = round_half_up(
            (first.labeled.labeled_count() + second.labeled.labeled_count()) / 2
        )
        settings = self.config.LanguageModel

        with self.stage(Stage.MINE, pair.Name) as directory:
            labeled, alpha, reached = zero_shot_mine(
                corpus,
                formal_sources,
                informal_sources,
                target_count,
                order=settings.Order,
                k=settings.K,
                min_count=settings.MinCount,
                sample_size=settings.GeneralSample,
                seed=self.config.Seed,
                workers=self.workers,
            )
            self.save_mined(
                directory,
                pair.Name,
                labeled,
                selection_report(
                    labeled,
                    SelectionMode.FULL,
                    alpha,
                    metadata={
                        "config_hash": self.hash,
                        "seed": str(self.config.Seed),
                        "target_count": str(target_count),
                        "target_reached": str(reached).lower(),
                    },
                ),
                {
                    "Mode": str(SelectionMode.FULL),
                    "Threshold": alpha,
                    "TargetCount": target_count,
                },
            )

        lexicon = self.lexicon(
            pair.Name,
            [item.target for item in labeled.formal()],
            [item.target for item in labeled.informal()],
            LexiconSource.MINED,
        )
        self.mined[pair.Name] = MinedPair(labeled=labeled, lexicon=lexicon)
        self.evaluate(pair.Name, pair.Evaluation, lexicon)


@beartype
def run_pipeline(
    config: PipelineConfig,
    output_dir: Path | str | None = None,
    workers: int | None = None,
) -> int:
    """
    Run the supervised flow of every configured pair, then the zero-shot flow of
    every zero-shot pair.

    Supervised: prep, selection models and rankings, mining, lexicon, then
    reranking, scoring and the oracle experiment when evaluation inputs are given.
    Zero-shot: pivot seeds from the two supervised pairs, prep, source-side mining
    at the quantity-matched α, lexicon from the mined data, evaluation.

    Parameters:
        config (PipelineConfig): A configuration.
        output_dir (Path | str | None, optional): Overrides `OutputDir`.
        workers (int | None, optional): Worker processes; outputs do not depend on
            it.

    Returns:
        int: 0.

    Raises:
        ConfigValidationError: Before any stage runs, if the configuration is invalid.
        StageError: Naming the failed stage; the artifacts and the run trail written
            so far are kept.
    """

    validate_config(config)

    output_dir = (
        Path(output_dir) if output_dir else resolve_path(config, config.OutputDir)
    )
    output_dir.mkdir(parents=True, exist_ok=True)

    run = PipelineRun(config, output_dir, workers)

    Logger.attach_trail(output_dir / TRAIL_FILENAME)
    try:
        logger.info(f"Run {config.Name}, configuration {run.hash}")
        OmegaConf.save(
            OmegaConf.create({"ConfigHash": run.hash, "Version": __version__}),
            output_dir / MANIFEST_FILENAME,
        )

        for pair in config.Pairs:
            run.supervised(pair)
        for pair in config.ZeroShot:
            run.zero_shot(pair)

        logger.info(f"Run {config.Name} completed")
    except FormaliaError as error:
        if not isinstance(error, StageError):
            error = StageError("pipeline", error)
        logger.critical(str(error))
        raise error
    finally:
        Logger.detach_trail()

    return 0
