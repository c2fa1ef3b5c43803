import re
import unicodedata
from collections.abc import Sequence
from functools import partial
from pathlib import Path

from beartype import beartype

from formalia.corpus.corpus import read_lines
from formalia.corpus.models import ParallelCorpus, SentencePair
from formalia.lm.models import PerplexityScore
from formalia.log.log import Logger
from formalia.prep.models import (
    LINK_PATTERN,
    PAIR_RULES,
    PUNCTUATION_TABLE,
    AsciiMode,
    DropReason,
    FilterConfig,
    FilterStats,
    PairDecision,
)
from formalia.utils.exceptions import ArgumentError, DataError, MissingScoreError
from formalia.utils.parallel import ordered_map

logger = Logger(module_name="prep", package_name="prep")

_TRANSLATION = str.maketrans(PUNCTUATION_TABLE)


def normalize_punctuation(sentence: str) -> str:
    """
    Replace typographic punctuation and spaces with their ASCII counterparts and
    collapse runs of spaces.

    Parameters:
        sentence (str): The sentence.

    Returns:
        str: The normalized sentence; normalizing it again changes nothing.
    """

    return re.sub(" {2,}", " ", sentence.translate(_TRANSLATION))


def strip_non_ascii(sentence: str) -> str:
    "Remove non-ASCII characters, collapsing the whitespace left behind"

    return " ".join(sentence.encode("ascii", errors="ignore").decode("ascii").split())


def case_class(sentence: str) -> str:
    "Case class of the first character: upper, lower or uncased"

    if not sentence:
        return "uncased"
    first = sentence[0]
    if first.isupper():
        return "upper"
    if first.islower():
        return "lower"
    return "uncased"


def is_punctuation(character: str) -> bool:
    return unicodedata.category(character).startswith("P")


def has_link(sentence: str) -> bool:
    return re.search(LINK_PATTERN, sentence) is not None


def _rule_fails(
    rule: DropReason,
    source: str,
    target: str,
    config: FilterConfig,
) -> bool:
    source_tokens, target_tokens = len(source.split()), len(target.split())

    match rule:
        case DropReason.LENGTH:
            return max(source_tokens, target_tokens) > config.max_tokens
        case DropReason.RATIO:
            if not source_tokens or not target_tokens:
                return False
            return (
                max(source_tokens, target_tokens) / min(source_tokens, target_tokens)
                > config.max_ratio
            )
        case DropReason.EMPTY:
            return not source.strip() or not target.strip()
        case DropReason.IDENTICAL:
            return source == target
        case DropReason.CASE:
            return case_class(source) != case_class(target)
        case DropReason.PUNCTUATION:
            last_source, last_target = source.rstrip()[-1:], target.rstrip()[-1:]
            ends_in_punctuation = any(
                character and is_punctuation(character)
                for character in (last_source, last_target)
            )
            return ends_in_punctuation and last_source != last_target
        case DropReason.LINK:
            return has_link(source) or has_link(target)

    return False


@beartype
def clean_pair(
    pair: SentencePair,
    config: FilterConfig,
) -> PairDecision:
    """
    Apply the per-pair rules in their fixed order: length, ratio, empty, identical,
    case, punctuation, non-ASCII source, link.

    Parameters:
        pair (SentencePair): The pair, punctuation already normalized.
        config (FilterConfig): The filter parameters.

    Returns:
        PairDecision: The first failing rule, or a kept pair. In strip mode the
            kept pair has its non-ASCII source characters removed.

    Note:
        The ratio is the larger token count over the smaller one, so it does not
        depend on the direction of the pair.
    """

    source, target = pair.source, pair.target

    for rule in PAIR_RULES:
        if rule not in config.rules:
            continue

        if rule == DropReason.NON_ASCII:
            if source.isascii():
                continue
            if config.ascii_mode == AsciiMode.DROP:
                return PairDecision(pair=pair, reason=rule)

            source = strip_non_ascii(source)
            if not source:
                return PairDecision(pair=pair, reason=rule)

            pair = SentencePair(
                source=source,
                target=target,
                index=pair.index,
                aux_score=pair.aux_score,
            )
            continue

        if _rule_fails(rule, source, target, config):
            return PairDecision(pair=pair, reason=rule)

    return PairDecision(pair=pair)


def _normalize_and_clean(config: FilterConfig, pair: SentencePair) -> PairDecision:
    return clean_pair(
        SentencePair(
            source=normalize_punctuation(pair.source),
            target=normalize_punctuation(pair.target),
            index=pair.index,
            aux_score=pair.aux_score,
        ),
        config,
    )


def near_duplicate_key(sentence: str) -> str:
    "Lowercased sentence without terminal punctuation and surrounding whitespace"

    key = sentence.strip().lower()
    while key and is_punctuation(key[-1]):
        key = key[:-1].rstrip()

    return key


def deduplicate(
    corpus: ParallelCorpus,
) -> tuple[ParallelCorpus, int, int]:
    """
    Remove exact and near-duplicate pairs, keeping first occurrences in order.

    Returns:
        tuple[ParallelCorpus, int, int]: The corpus, exact duplicates dropped and
            near duplicates dropped.
    """

    exact_seen: set[tuple[str, str]] = set()
    near_seen: set[tuple[str, str]] = set()
    survivors = []
    exact, near = 0, 0

    for pair in corpus:
        exact_key = (pair.source, pair.target)
        if exact_key in exact_seen:
            exact += 1
            continue
        exact_seen.add(exact_key)

        near_key = (near_duplicate_key(pair.source), near_duplicate_key(pair.target))
        if near_key in near_seen:
            near += 1
            continue
        near_seen.add(near_key)

        survivors.append(pair)

    return corpus.replace_pairs(survivors), exact, near


@beartype
def dedup(corpus: ParallelCorpus) -> ParallelCorpus:
    """
    Remove exact duplicate pairs, then pairs equal up to case and terminal
    punctuation on both sides. First occurrences survive in their order.

    Parameters:
        corpus (ParallelCorpus): The corpus.

    Returns:
        ParallelCorpus: The deduplicated corpus.
    """

    return deduplicate(corpus)[0]


@beartype
def confidence_filter(
    corpus: ParallelCorpus,
    threshold: float,
) -> ParallelCorpus:
    """
    Keep the pairs whose auxiliary score is at least the threshold.

    Parameters:
        corpus (ParallelCorpus): A corpus with an auxiliary score per pair.
        threshold (float): The smallest accepted score.

    Returns:
        ParallelCorpus: The surviving pairs in order.

    Raises:
        MissingScoreError: If a pair has no score.
    """

    for pair in corpus:
        if pair.aux_score is None:
            raise MissingScoreError(
                f"Sentence pair {pair.index} has no confidence score"
            )

    return corpus.replace_pairs(
        [pair for pair in corpus if pair.aux_score >= threshold]
    )


@beartype
def clean_corpus(
    corpus: ParallelCorpus,
    config: FilterConfig,
    workers: int | None = None,
) -> tuple[ParallelCorpus, FilterStats]:
    """
    Run the cleaning cascade: punctuation normalization, per-pair rules,
    deduplication and confidence filtering.

    Parameters:
        corpus (ParallelCorpus): The raw corpus.
        config (FilterConfig): The filter parameters.
        workers (int | None, optional): Worker processes of the per-pair stage.

    Returns:
        tuple[ParallelCorpus, FilterStats]: Surviving pairs, with their original
            indexes and in input order, and the drop counts.

    Note:
        The confidence stage is skipped when no pair carries an auxiliary score.
    """

    stats = FilterStats(input_size=len(corpus))

    decisions = ordered_map(
        partial(_normalize_and_clean, config),
        corpus.pairs,
        workers=workers,
        description="Cleaning",
    )
    for decision in decisions:
        if not decision.keep:
            stats.drops[decision.reason] += 1

    cleaned, exact, near = deduplicate(
        corpus.replace_pairs([decision.pair for decision in decisions if decision.keep])
    )
    stats.drops[DropReason.DUPLICATE] += exact
    stats.drops[DropReason.NEAR_DUPLICATE] += near

    if any(pair.aux_score is not None for pair in cleaned):
        before = len(cleaned)
        cleaned = confidence_filter(cleaned, config.confidence_threshold)
        stats.drops[DropReason.CONFIDENCE] += before - len(cleaned)
    else:
        logger.info("No confidence scores, the confidence stage is skipped")

    stats.output_size = len(cleaned)

    logger.info(
        f"Kept {stats.output_size} of {stats.input_size} pairs: "
        + ", ".join(
            f"{reason}={count}" for reason, count in stats.drops.items() if count
        )
    )

    return cleaned, stats


@beartype
def truncate_by_domain(
    corpus: ParallelCorpus,
    ranking: Sequence[PerplexityScore],
    count: int,
) -> ParallelCorpus:
    """
    Keep the `count` pairs ranked most in-domain-like.

    Parameters:
        corpus (ParallelCorpus): The corpus; ranking indexes are corpus positions.
        ranking (Sequence[PerplexityScore]): The corpus ranked by perplexity
            difference.
        count (int): Pairs to keep.

    Returns:
        ParallelCorpus: The kept pairs in corpus order.

    Raises:
        ArgumentError: If `count` is negative.
    """

    if count < 0:
        raise ArgumentError(f"count must be non-negative, got {count}")

    kept = {score.pair_index for score in ranking[:count]}

    return corpus.replace_pairs(
        [pair for position, pair in enumerate(corpus) if position in kept]
    )


def render_stats(stats: FilterStats) -> str:
    "Render filter statistics as `key=value` lines"

    lines = [f"input={stats.input_size}", f"output={stats.output_size}"]
    lines.extend(f"drop.{reason}={count}" for reason, count in stats.drops.items())

    return "\n".join(lines) + "\n"


def _parse_bool(key: str, value: str) -> bool:
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise DataError(f"{key}: '{value}' is not a boolean")


@beartype
def load_filter_config(
    path: Path | str,
    defaults: FilterConfig | None = None,
) -> FilterConfig:
    """
    Read a filter configuration of `key=value` lines. Blank lines and lines
    starting with `#` are ignored.

    Keys: `max_tokens`, `max_ratio`, `confidence_threshold`, `ascii` (drop or
    strip) and one boolean per rule, e.g. `link=false`.

    Parameters:
        path (Path | str): The configuration file.
        defaults (FilterConfig | None, optional): Values of absent keys.

    Returns:
        FilterConfig: The configuration.

    Raises:
        DataError: On unknown keys or malformed values.
    """

    defaults = defaults or FilterConfig()
    values = dict(
        max_tokens=defaults.max_tokens,
        max_ratio=defaults.max_ratio,
        confidence_threshold=defaults.confidence_threshold,
        ascii_mode=defaults.ascii_mode,
    )
    rules = set(defaults.rules)

    for number, line in enumerate(read_lines(path), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue

        key, separator, value = (part.strip() for part in line.partition("="))
        if not separator:
            raise DataError(f"{path}:{number}: expected key=value, got '{line}'")

        try:
            match key:
                case "max_tokens":
                    values["max_tokens"] = int(value)
                case "max_ratio" | "confidence_threshold":
                    values[key] = float(value)
                case "ascii":
                    values["ascii_mode"] = AsciiMode(value)
                case _ if DropReason.has(key) and key in PAIR_RULES:
                    if _parse_bool(key, value):
                        rules.add(DropReason(key))
                    else:
                        rules.discard(DropReason(key))
                case _:
                    raise DataError(f"{path}:{number}: unknown key '{key}'")
        except ValueError as error:
            raise DataError(f"{path}:{number}: {error}") from error

    return FilterConfig(**values, rules=frozenset(rules))
