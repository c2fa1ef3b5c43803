import argparse
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from formalia import __version__
from formalia.corpus.corpus import (
    attach_labels,
    load_labeled,
    load_parallel,
    read_lines,
    save_labeled,
    save_parallel,
    write_lines,
)
from formalia.corpus.models import (
    FormalityLabel,
    LabeledCorpus,
    ParallelCorpus,
    SentencePair,
)
from formalia.lm.lm import (
    build_selection_models,
    load_model,
    load_ranking,
    perplexity_difference_rank,
    save_model,
    save_ranking,
)
from formalia.log.log import Logger
from formalia.pipeline.pipeline import (
    best_window,
    last_window,
    load_pipeline_config,
    load_series,
    run_pipeline,
)
from formalia.pipeline.synthetic import generate_dataset
from formalia.pivot.pivot import (
    combination_stats,
    intersect_on_source,
    pivot_in_domain_sets,
    render_stats,
    save_stats,
)
from formalia.prep.models import AsciiMode, FilterConfig
from formalia.prep.prep import clean_corpus, load_filter_config, truncate_by_domain
from formalia.prep.prep import render_stats as render_filter_stats
from formalia.rerank.lexicon import build_lexicon, load_lexicon, save_lexicon
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
from formalia.selection.models import SelectionMode
from formalia.selection.selection import (
    assign_easy,
    assign_full,
    calibrate_alpha,
    choose_theta,
    ranked_corpus,
    render_report,
    save_report,
    selection_report,
)
from formalia.utils import settings
from formalia.utils.exceptions import (
    DATA_EXIT_CODE,
    USAGE_EXIT_CODE,
    ArgumentError,
    FormaliaError,
)
from formalia.utils.utils import round_half_up

logger = Logger(module_name="cli", package_name="pipeline")


class ArgumentParser(argparse.ArgumentParser):
    "Argument parser whose usage errors exit with the usage exit code"

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


GLOBAL_OPTIONS: tuple[str, ...] = ("--config", "--seed", "--threads")


def _run_arguments(parser: argparse.ArgumentParser, default: object = None) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=default,
        help="seed of every random step (default: LanguageModel.Seed)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=default,
        help="worker processes (default: Runtime.Threads)",
    )


def apply_settings_file(path: str | None) -> None:
    """
    Point the settings at another config.yaml and drop the cached values.
    """

    if not path:
        return

    os.environ["FORMALIA_CONFIG"] = path
    for getter in (
        settings.get_environmental_settings,
        settings.get_settings,
        settings.get_logging_settings,
        settings.get_language_model_settings,
        settings.get_selection_settings,
        settings.get_lexicon_settings,
        settings.get_filtering_settings,
        settings.get_oracle_settings,
        settings.get_runtime_settings,
    ):
        getter.cache_clear()


def _load_corpus(source: str, target: str, aux: str | None = None) -> ParallelCorpus:
    return load_parallel(source, target, aux_path=aux)


def _prefix_paths(prefix: str, corpus: ParallelCorpus) -> tuple[str, str]:
    return f"{prefix}.{corpus.source_lang}", f"{prefix}.{corpus.target_lang}"


def command_prep_clean(args: argparse.Namespace) -> int:
    filtering = settings.get_filtering_settings()
    defaults = FilterConfig(
        max_tokens=filtering.MaxTokens,
        max_ratio=filtering.MaxRatio,
        confidence_threshold=filtering.ConfidenceThreshold,
        ascii_mode=AsciiMode(args.ascii or filtering.AsciiMode),
    )
    config = defaults
    if args.filter_config:
        config = load_filter_config(args.filter_config, defaults)

    if args.src and args.tgt:
        corpus = _load_corpus(args.src, args.tgt, args.aux)
    else:
        pairs = []
        for index, line in enumerate(sys.stdin.read().splitlines()):
            fields = line.split("\t")
            pairs.append(
                SentencePair(
                    source=fields[0],
                    target=fields[1] if len(fields) > 1 else "",
                    index=index,
                    aux_score=float(fields[2]) if len(fields) > 2 else None,
                )
            )
        corpus = ParallelCorpus(pairs=tuple(pairs))

    cleaned, stats = clean_corpus(corpus, config, workers=args.threads)

    if args.out_prefix:
        save_parallel(cleaned, *_prefix_paths(args.out_prefix, cleaned))
    else:
        sys.stdout.write("".join(f"{pair.source}\t{pair.target}\n" for pair in cleaned))

    if args.stats:
        Path(args.stats).write_text(render_filter_stats(stats), encoding="utf-8")
    else:
        sys.stderr.write(render_filter_stats(stats))

    return 0


def command_prep_truncate(args: argparse.Namespace) -> int:
    lm_settings = settings.get_language_model_settings()
    corpus = _load_corpus(args.src, args.tgt)

    lm_in, lm_gen = build_selection_models(
        read_lines(args.in_domain),
        corpus.targets(),
        order=args.order or lm_settings.Order,
        k=args.k or lm_settings.K,
        min_count=lm_settings.MinCount,
        sample_size=lm_settings.GeneralSample,
        seed=args.seed,
    )
    ranking = perplexity_difference_rank(
        corpus.targets(), lm_in, lm_gen, workers=args.threads
    )

    truncated = truncate_by_domain(corpus, ranking, args.count)
    save_parallel(truncated, *_prefix_paths(args.out_prefix, truncated))

    return 0


def command_lm_train(args: argparse.Namespace) -> int:
    lm_in, lm_gen = build_selection_models(
        read_lines(args.in_domain),
        read_lines(args.general),
        order=args.order,
        k=args.k,
        min_count=args.min_count,
        sample_size=args.sample,
        seed=args.seed,
    )
    save_model(lm_in, args.out_in)
    save_model(lm_gen, args.out_gen)

    return 0


def command_lm_rank(args: argparse.Namespace) -> int:
    ranking = perplexity_difference_rank(
        read_lines(args.targets),
        load_model(args.in_model),
        load_model(args.gen_model),
        workers=args.threads,
    )
    save_ranking(ranking, args.out)

    return 0


def command_mine(args: argparse.Namespace) -> int:
    selection = settings.get_selection_settings()
    lm_settings = settings.get_language_model_settings()

    corpus = _load_corpus(args.src, args.tgt)
    ranks = ranked_corpus(
        corpus, load_ranking(args.formal_ranking), load_ranking(args.informal_ranking)
    )
    trace: list = []

    if args.mode == SelectionMode.EASY:
        if args.theta == "auto":
            threshold = choose_theta(ranks, selection.ThetaGrid, trace=trace)
        else:
            threshold = min(
                round_half_up(float(args.theta) * ranks.size), ranks.size - 1
            )
        labeled = assign_easy(ranks, threshold)
    else:
        if args.alpha == "auto":
            if not args.in_domain:
                raise ArgumentError("--alpha auto needs --in-domain files")
            threshold = calibrate_alpha(
                ranks,
                corpus,
                [line for path in args.in_domain for line in read_lines(path)],
                lower=selection.AlphaLower,
                upper=selection.AlphaUpper,
                steps=selection.AlphaSteps,
                order=lm_settings.Order,
                k=lm_settings.K,
                min_count=lm_settings.MinCount,
                trace=trace,
                workers=args.threads,
            )
        else:
            threshold = int(args.alpha)
        labeled = assign_full(ranks, threshold)

    save_labeled(labeled, args.out)
    report = selection_report(
        labeled,
        SelectionMode(args.mode),
        threshold,
        trace=trace,
        metadata={"seed": str(args.seed), "version": __version__},
    )
    if args.report:
        save_report(report, args.report)
    else:
        sys.stdout.write(render_report(report))

    return 0


def _labeled_pair(source: str, target: str, labeled: str) -> LabeledCorpus:
    return attach_labels(_load_corpus(source, target), load_labeled(labeled))


def command_pivot(args: argparse.Namespace) -> int:
    triplets = intersect_on_source(
        _labeled_pair(args.first_src, args.first_tgt, args.first_labeled),
        _labeled_pair(args.second_src, args.second_tgt, args.second_labeled),
    )

    match args.pivot_command:
        case "intersect":
            write_lines(
                args.out,
                [
                    "\t".join(
                        (
                            triplet.source,
                            triplet.target_a,
                            triplet.target_b,
                            triplet.label_a.symbol,
                            triplet.label_b.symbol,
                        )
                    )
                    for triplet in triplets
                ],
            )
            sys.stdout.write(
                f"coverage {100 * triplets.coverage_a:.2f}%"
                f" / {100 * triplets.coverage_b:.2f}%\n"
            )
        case "stats":
            stats = combination_stats(triplets)
            if args.tsv:
                save_stats(stats, args.tsv)
            sys.stdout.write(render_stats(stats, coverage=triplets))
        case "emit-seeds":
            formal, informal = pivot_in_domain_sets(triplets)
            write_lines(args.formal_out, formal)
            write_lines(args.informal_out, informal)

    return 0


def command_lexicon(args: argparse.Namespace) -> int:
    save_lexicon(
        build_lexicon(
            read_lines(args.formal),
            read_lines(args.informal),
            kappa_threshold=args.kappa,
        ),
        args.out,
    )

    return 0


def command_rerank(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon, kappa_threshold=args.kappa)
    lists = load_nbest(args.nbest)
    contexts = load_contexts(args.context, len(lists))

    save_nbest(
        [
            rerank_nbest(lexicon, nbest, context, args.weight)
            for nbest, context in zip(lists, contexts)
        ],
        args.out,
    )

    return 0


def command_score(args: argparse.Namespace) -> int:
    hypotheses = read_lines(args.hyp)
    report = corpus_accuracy(
        hypotheses,
        load_annotated(args.ref_formal, FormalityLabel.FORMAL),
        load_annotated(args.ref_informal, FormalityLabel.INFORMAL),
        load_contexts(args.context, len(hypotheses)),
        workers=args.threads,
    )

    sys.stdout.write(render_score_report(report))
    if args.judgments:
        save_judgments(report, args.judgments)

    return 0


def command_oracle(args: argparse.Namespace) -> int:
    lists = load_nbest(args.nbest)
    report = oracle_experiment(
        lists,
        load_annotated(args.ref_formal, FormalityLabel.FORMAL),
        load_annotated(args.ref_informal, FormalityLabel.INFORMAL),
        load_contexts(args.context, len(lists)),
        args.ks,
        lexicon=(
            load_lexicon(args.lexicon, kappa_threshold=args.kappa)
            if args.lexicon
            else None
        ),
        weight=args.weight,
        workers=args.threads,
    )

    sys.stdout.write(render_oracle_report(report))
    if args.out:
        save_oracle_report(report, args.out)

    return 0


def command_best_window(args: argparse.Namespace) -> int:
    series = load_series(args.series)
    start, mean = best_window(series, args.window)
    last_start, last_mean = last_window(series, args.window)

    sys.stdout.write(
        f"start={start}\n"
        f"first={series.checkpoints[start]}\n"
        f"last={series.checkpoints[start + args.window - 1]}\n"
        f"mean={mean:.6f}\n"
        f"last_window_start={last_start}\n"
        f"last_window_mean={last_mean:.6f}\n"
    )

    return 0


def command_run(args: argparse.Namespace) -> int:
    config = load_pipeline_config(args.pipeline)
    if args.seed is not None:
        config.Seed = args.seed

    return run_pipeline(config, output_dir=args.output_dir, workers=args.threads)


def command_synth(args: argparse.Namespace) -> int:
    path = generate_dataset(args.out, seed=args.seed, size=args.size)
    sys.stdout.write(f"{path}\n")

    return 0


def build_parser() -> ArgumentParser:
    """
    The command-line interface, with defaults taken from the settings.
    """

    lm_settings = settings.get_language_model_settings()
    selection = settings.get_selection_settings()
    lexicon = settings.get_lexicon_settings()
    oracle = settings.get_oracle_settings()

    parser = ArgumentParser(
        prog="formalia",
        description="mine, propagate and evaluate formality-labeled parallel data",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="settings file replacing the repository config.yaml",
    )
    _run_arguments(parser)

    common = argparse.ArgumentParser(add_help=False)
    _run_arguments(common, default=argparse.SUPPRESS)

    commands = parser.add_subparsers(
        dest="command", required=True, parser_class=ArgumentParser
    )

    prep = commands.add_parser("prep", help="clean or truncate a raw corpus")
    prep_commands = prep.add_subparsers(dest="prep_command", required=True)

    clean = prep_commands.add_parser(
        "clean",
        help="run the cleaning cascade",
        parents=[common],
    )
    clean.add_argument("--src", help="source side (default: TSV pairs on stdin)")
    clean.add_argument("--tgt", help="target side")
    clean.add_argument("--aux", help="auxiliary confidence scores")
    clean.add_argument(
        "--config", dest="filter_config", help="key=value filter configuration"
    )
    clean.add_argument(
        "--ascii", choices=AsciiMode.list(), help="non-ASCII source handling"
    )
    clean.add_argument("--out-prefix", help="output prefix (default: TSV on stdout)")
    clean.add_argument("--stats", help="statistics report (default: stderr)")
    clean.set_defaults(handler=command_prep_clean)

    truncate = prep_commands.add_parser(
        "truncate",
        help="keep the N most in-domain-like pairs",
        parents=[common],
    )
    truncate.add_argument("--src", required=True)
    truncate.add_argument("--tgt", required=True)
    truncate.add_argument(
        "--in-domain", required=True, help="in-domain target sentences"
    )
    truncate.add_argument("--count", type=int, required=True, help="pairs to keep")
    truncate.add_argument("--order", type=int, default=None)
    truncate.add_argument("--k", type=float, default=None)
    truncate.add_argument("--out-prefix", required=True)
    truncate.set_defaults(handler=command_prep_truncate)

    lm = commands.add_parser("lm", help="train selection models or rank a corpus")
    lm_commands = lm.add_subparsers(dest="lm_command", required=True)

    train = lm_commands.add_parser(
        "train",
        help="train the in-domain and general models",
        parents=[common],
    )
    train.add_argument("--in-domain", required=True)
    train.add_argument("--general", required=True)
    train.add_argument("--order", type=int, default=lm_settings.Order)
    train.add_argument("--k", type=float, default=lm_settings.K)
    train.add_argument("--min-count", type=int, default=lm_settings.MinCount)
    train.add_argument("--sample", type=int, default=lm_settings.GeneralSample)
    train.add_argument("--out-in", required=True)
    train.add_argument("--out-gen", required=True)
    train.set_defaults(handler=command_lm_train)

    rank = lm_commands.add_parser(
        "rank",
        help="rank sentences by perplexity difference",
        parents=[common],
    )
    rank.add_argument("--in-model", required=True)
    rank.add_argument("--gen-model", required=True)
    rank.add_argument("--targets", required=True)
    rank.add_argument("--out", required=True)
    rank.set_defaults(handler=command_lm_rank)

    mine = commands.add_parser(
        "mine",
        help="label a ranked corpus",
        parents=[common],
    )
    mine.add_argument("--src", required=True)
    mine.add_argument("--tgt", required=True)
    mine.add_argument("--formal-ranking", required=True)
    mine.add_argument("--informal-ranking", required=True)
    mine.add_argument("--mode", choices=SelectionMode.list(), default=selection.Mode)
    mine.add_argument(
        "--theta", default="auto", help="fraction of the corpus size or auto"
    )
    mine.add_argument("--alpha", default="auto", help="integer or auto")
    mine.add_argument(
        "--in-domain", nargs="*", default=[], help="calibration sentences"
    )
    mine.add_argument("--out", required=True)
    mine.add_argument("--report", help="selection report (default: stdout)")
    mine.set_defaults(handler=command_mine)

    pivot = commands.add_parser(
        "pivot",
        help="intersect two labeled pairs on their source",
        parents=[common],
    )
    pivot.add_argument("pivot_command", choices=["intersect", "stats", "emit-seeds"])
    for side in ("first", "second"):
        pivot.add_argument(f"--{side}-src", required=True)
        pivot.add_argument(f"--{side}-tgt", required=True)
        pivot.add_argument(f"--{side}-labeled", required=True)
    pivot.add_argument("--out", default="triplets.tsv", help="triplets (intersect)")
    pivot.add_argument("--tsv", help="combination counts (stats)")
    pivot.add_argument("--formal-out", default="formal.seeds")
    pivot.add_argument("--informal-out", default="informal.seeds")
    pivot.set_defaults(handler=command_pivot)

    lexicon_parser = commands.add_parser(
        "lexicon",
        help="build a formality lexicon",
        parents=[common],
    )
    lexicon_parser.add_argument("--formal", required=True)
    lexicon_parser.add_argument("--informal", required=True)
    lexicon_parser.add_argument("--kappa", type=float, default=lexicon.KappaThreshold)
    lexicon_parser.add_argument("--out", required=True)
    lexicon_parser.set_defaults(handler=command_lexicon)

    rerank = commands.add_parser(
        "rerank",
        help="rerank n-best lists towards a formality",
        parents=[common],
    )
    rerank.add_argument("--nbest", required=True)
    rerank.add_argument("--lexicon", required=True)
    rerank.add_argument("--context", required=True, help="F, I or a file of contexts")
    rerank.add_argument("--kappa", type=float, default=lexicon.KappaThreshold)
    rerank.add_argument("--weight", type=float, default=lexicon.Weight)
    rerank.add_argument("--out", required=True)
    rerank.set_defaults(handler=command_rerank)

    score = commands.add_parser(
        "score",
        help="formality accuracy of hypotheses",
        parents=[common],
    )
    score.add_argument("--hyp", required=True)
    score.add_argument("--ref-formal", required=True)
    score.add_argument("--ref-informal", required=True)
    score.add_argument("--context", required=True, help="F, I or a file of contexts")
    score.add_argument("--judgments", help="per-sample judgments TSV")
    score.set_defaults(handler=command_score)

    oracle_parser = commands.add_parser(
        "oracle",
        help="oracle experiment over n-best lists",
        parents=[common],
    )
    oracle_parser.add_argument("--nbest", required=True)
    oracle_parser.add_argument("--ref-formal", required=True)
    oracle_parser.add_argument("--ref-informal", required=True)
    oracle_parser.add_argument("--context", required=True)
    oracle_parser.add_argument("--ks", type=int, nargs="+", default=list(oracle.Ks))
    oracle_parser.add_argument("--lexicon", help="adds the reranked row")
    oracle_parser.add_argument("--kappa", type=float, default=lexicon.KappaThreshold)
    oracle_parser.add_argument("--weight", type=float, default=lexicon.Weight)
    oracle_parser.add_argument("--out", help="report TSV")
    oracle_parser.set_defaults(handler=command_oracle)

    window = commands.add_parser(
        "best-window",
        help="best window of checkpoint accuracies",
        parents=[common],
    )
    window.add_argument(
        "--series", required=True, help="TSV with checkpoint and accuracy"
    )
    window.add_argument("--window", type=int, default=oracle.Window)
    window.set_defaults(handler=command_best_window)

    run = commands.add_parser(
        "run",
        help="run a pipeline configuration",
        parents=[common],
    )
    run.add_argument("pipeline", help="pipeline configuration YAML")
    run.add_argument("--output-dir", default=None)
    run.set_defaults(handler=command_run)

    synth = commands.add_parser(
        "synth",
        help="write the synthetic dataset",
        parents=[common],
    )
    synth.add_argument("--out", required=True)
    synth.add_argument("--size", type=int, default=2000)
    synth.set_defaults(handler=command_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the `formalia` command.

    Parameters:
        argv (Sequence[str] | None, optional): Arguments; `sys.argv[1:]` when None.

    Returns:
        int: 0 on success, 1 on usage errors, 2 on data and I/O errors,
            3 on stage failures.
    """

    argv = list(sys.argv[1:] if argv is None else argv)

    apply_settings_file(_leading_config(argv))

    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = settings.get_language_model_settings().Seed

    try:
        return args.handler(args)
    except FormaliaError as error:
        logger.critical(str(error))
        return error.exit_code
    except OSError as error:
        logger.critical(str(error))
        return DATA_EXIT_CODE


def _leading_config(argv: list[str]) -> str | None:
    "Value of a --config option given before the subcommand"

    tokens = iter(argv)
    for token in tokens:
        if not token.startswith("-"):
            return None
        if token == "--config":
            return next(tokens, None)
        if token.startswith("--config="):
            return token.partition("=")[2]
        if token in GLOBAL_OPTIONS:
            next(tokens, None)

    return None


if __name__ == "__main__":
    sys.exit(main())
