USAGE_EXIT_CODE: int = 1
DATA_EXIT_CODE: int = 2
STAGE_EXIT_CODE: int = 3


class FormaliaError(Exception):
    "Base class of every error raised by Formalia"

    exit_code: int = DATA_EXIT_CODE


class ArgumentError(FormaliaError, ValueError):
    "An argument is outside of the range accepted by the operation"

    exit_code: int = USAGE_EXIT_CODE


class ConfigValidationError(FormaliaError):
    "The configuration references missing inputs or inconsistent stages"

    exit_code: int = USAGE_EXIT_CODE


class DataError(FormaliaError):
    "The input data violates the expected format"


class AlignmentError(DataError):
    "Two aligned inputs do not have the same number of records"


class AnnotationParseError(DataError):
    "Unbalanced or nested formality markers in an annotated reference"


class MissingScoreError(DataError):
    "A sentence pair has no auxiliary confidence score"


class NBestFormatError(DataError):
    "Malformed n-best list"


class ModelFormatError(DataError):
    "Malformed or unsupported language model file"


class ModelMismatchError(DataError):
    "Two language models do not share vocabulary and order"


class TrainingError(DataError):
    "Unable to train a language model on the given sentences"


class LexiconError(DataError):
    "Unable to build a formality lexicon from the given sentences"


class CalibrationError(DataError):
    "No threshold candidate produced a labeled corpus"


class EmptyPivotSeedsError(DataError):
    "The pivot seed sets needed for zero-shot mining are empty"


class StageError(FormaliaError):
    "A pipeline stage failed"

    exit_code: int = STAGE_EXIT_CODE

    def __init__(
        self,
        stage: str,
        cause: BaseException,
    ) -> None:
        self.stage = stage
        self.cause = cause

        super().__init__(f"Stage '{stage}' failed: {cause}")
