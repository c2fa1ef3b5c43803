from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import List, Optional

from omegaconf import OmegaConf
from pydantic_settings import BaseSettings, SettingsConfigDict


class EnvSettings(BaseSettings):
    """
    Settings read from the environment (or a `.env` file).

    Settings:
        CONFIG (str | None): Alternative path of the `config.yaml` file.
        THREADS (int | None): Worker count overriding `Runtime.Threads`.
        LOG_LEVEL (str | None): Log level overriding `Logging.Level`.
        PROGRESS (bool | None): Progress bars overriding `Runtime.Progress`.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="FORMALIA_",
        case_sensitive=False,
    )

    CONFIG: str | None = None
    THREADS: int | None = None
    LOG_LEVEL: str | None = None
    PROGRESS: bool | None = None


@dataclass
class LoggingSettings:
    """
    Data class representing the logging configuration.

    Attributes:
        Level (str): Name of the log level.
        Filename (str | None): Log file, None to log on the console only.
        Format (str): Format of every log line.
    """

    Level: str = "INFO"
    Filename: Optional[str] = None
    Format: str = "[%(asctime)s\t %(levelname)s\t %(name)s] %(message)s"


@dataclass
class LanguageModelSettings:
    """
    Data class representing the defaults of the selection language models.

    Attributes:
        Order (int): n-gram order.
        K (float): Additive smoothing constant.
        MinCount (int): Minimum count of a token to enter the vocabulary.
        GeneralSample (int): Size of the random sample the general model is trained on.
        Seed (int): Seed of the general-model sample.
    """

    Order: int = 3
    K: float = 0.1
    MinCount: int = 2
    GeneralSample: int = 10000
    Seed: int = 13


@dataclass
class SelectionSettings:
    """
    Data class representing the defaults of label assignment.

    Attributes:
        Mode (str): `easy` (θ threshold) or `full` (α threshold).
        ThetaGrid (list[float]): Fractions of the corpus size tried for θ.
        AlphaLower (float): Lower bound of the α grid, as a fraction of the corpus size.
        AlphaUpper (float): Upper bound of the α grid, as a fraction of the corpus size.
        AlphaSteps (int): Number of α candidates.
    """

    Mode: str = "full"
    ThetaGrid: List[float] = field(
        default_factory=lambda: [round(0.05 * step, 2) for step in range(1, 20)]
    )
    AlphaLower: float = 0.05
    AlphaUpper: float = 0.2
    AlphaSteps: int = 8


@dataclass
class LexiconSettings:
    """
    Data class representing the defaults of the formality lexicon and reranker.

    Attributes:
        KappaThreshold (float): Terms below this count-difference ratio are nullified.
        Weight (float): Weight λ of the formality term in the rerank objective.
    """

    KappaThreshold: float = 0.33
    Weight: float = 1.0


@dataclass
class FilteringSettings:
    """
    Data class representing the defaults of the cleaning cascade.

    Attributes:
        MaxTokens (int): Maximum number of tokens on either side.
        MaxRatio (float): Maximum token-count ratio between the two sides.
        ConfidenceThreshold (float): Minimum auxiliary confidence score.
        AsciiMode (str): `strip` or `drop` for non-ASCII source characters.
    """

    MaxTokens: int = 250
    MaxRatio: float = 1.5
    ConfidenceThreshold: float = 0.7
    AsciiMode: str = "strip"


@dataclass
class OracleSettings:
    """
    Data class representing the defaults of the oracle experiment.

    Attributes:
        Ks (list[int]): List sizes evaluated.
        Window (int): Width of the best-accuracy checkpoint window.
    """

    Ks: List[int] = field(
        default_factory=lambda: [1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
    )
    Window: int = 10


@dataclass
class RuntimeSettings:
    """
    Data class representing runtime options.

    Attributes:
        Threads (int): Number of worker processes.
        ChunkSize (int): Items sent to a worker at a time.
        Progress (bool): Whether progress bars are shown.
    """

    Threads: int = 1
    ChunkSize: int = 256
    Progress: bool = False


@dataclass
class Settings:
    """
    Data class representing system settings.

    Attributes:
        Logging (LoggingSettings): Logging settings.
        LanguageModel (LanguageModelSettings): Language model defaults.
        Selection (SelectionSettings): Label assignment defaults.
        Lexicon (LexiconSettings): Lexicon and reranking defaults.
        Filtering (FilteringSettings): Cleaning cascade defaults.
        Oracle (OracleSettings): Oracle experiment defaults.
        Runtime (RuntimeSettings): Runtime options.
    """

    Logging: LoggingSettings = field(default_factory=LoggingSettings)
    LanguageModel: LanguageModelSettings = field(
        default_factory=LanguageModelSettings
    )
    Selection: SelectionSettings = field(default_factory=SelectionSettings)
    Lexicon: LexiconSettings = field(default_factory=LexiconSettings)
    Filtering: FilteringSettings = field(default_factory=FilteringSettings)
    Oracle: OracleSettings = field(default_factory=OracleSettings)
    Runtime: RuntimeSettings = field(default_factory=RuntimeSettings)


@lru_cache
def get_environmental_settings() -> EnvSettings:
    """
    Function to retrieve environmental settings.

    Returns:
        EnvSettings: An instance of the EnvSettings class representing
            the environmental configuration settings.
    """

    return EnvSettings()


def get_config_path() -> Path:
    """
    Path of the `config.yaml` in use: `FORMALIA_CONFIG` if set, the repository root
    otherwise.

    Returns:
        Path: The configuration file path.
    """

    if get_environmental_settings().CONFIG:
        return Path(get_environmental_settings().CONFIG)

    return (
        Path(__file__)
        .absolute()
        .parent.parent.parent.parent.joinpath(
            "config.yaml",
        )
    )


@lru_cache
def get_settings() -> Settings:
    """
    Function to fetch application settings.

    Returns:
        Settings: An instance of the Settings class representing the overall
            configuration settings for the application. Built-in defaults are used when
            no `config.yaml` can be found.
    """

    schema = OmegaConf.structured(Settings)
    config_path = get_config_path()

    if not config_path.exists():
        return OmegaConf.to_object(schema)

    return OmegaConf.to_object(
        OmegaConf.merge(
            schema,
            OmegaConf.load(config_path),
        )
    )


@lru_cache
def get_logging_settings() -> LoggingSettings:
    """
    Get the logging settings, with `FORMALIA_LOG_LEVEL` applied.

    Returns:
        LoggingSettings: The logging settings.
    """

    logging_settings = get_settings().Logging
    if get_environmental_settings().LOG_LEVEL:
        logging_settings.Level = get_environmental_settings().LOG_LEVEL

    return logging_settings


@lru_cache
def get_language_model_settings() -> LanguageModelSettings:
    """
    Get the language model defaults.

    Returns:
        LanguageModelSettings: The language model settings.
    """

    return get_settings().LanguageModel


@lru_cache
def get_selection_settings() -> SelectionSettings:
    """
    Get the label assignment defaults.

    Returns:
        SelectionSettings: The selection settings.
    """

    return get_settings().Selection


@lru_cache
def get_lexicon_settings() -> LexiconSettings:
    """
    Get the lexicon and reranking defaults.

    Returns:
        LexiconSettings: The lexicon settings.
    """

    return get_settings().Lexicon


@lru_cache
def get_filtering_settings() -> FilteringSettings:
    """
    Get the cleaning cascade defaults.

    Returns:
        FilteringSettings: The filtering settings.
    """

    return get_settings().Filtering


@lru_cache
def get_oracle_settings() -> OracleSettings:
    """
    Get the oracle experiment defaults.

    Returns:
        OracleSettings: The oracle settings.
    """

    return get_settings().Oracle


@lru_cache
def get_runtime_settings() -> RuntimeSettings:
    """
    Get the runtime options, with the `FORMALIA_THREADS` and `FORMALIA_PROGRESS`
    overrides applied.

    Returns:
        RuntimeSettings: The runtime settings.
    """

    runtime = get_settings().Runtime

    if get_environmental_settings().THREADS is not None:
        runtime.Threads = get_environmental_settings().THREADS
    if get_environmental_settings().PROGRESS is not None:
        runtime.Progress = get_environmental_settings().PROGRESS

    return runtime
