"""Exception hierarchy.

The three top-level families map onto CLI exit codes: configuration
problems exit with 1, data problems with 2, pipeline stage failures with 3.
"""


class XlstrError(Exception):
    exit_code = 3


class ConfigError(XlstrError, ValueError):
    exit_code = 1


class DataError(XlstrError, ValueError):
    exit_code = 2


class ComputationError(XlstrError, ValueError):
    exit_code = 3


# --- languages / similarity ---------------------------------------------

class UnknownLanguage(ConfigError):
    pass


class UnknownFeature(ConfigError):
    pass


class MalformedMatrixFile(DataError):
    pass


class MismatchedFeatureKind(ComputationError):
    pass


class EmptyOverlap(ComputationError):
    pass


class ZeroNorm(ComputationError):
    pass


class TargetNotCovered(ComputationError):
    pass


# --- corpus ---------------------------------------------------------------

class MalformedRow(DataError):
    pass


class ScoreOutOfRange(DataError):
    pass


class DuplicatePairId(DataError):
    pass


class EncodingError(DataError):
    pass


class MissingDataset(DataError):
    pass


class NoSourcesSelected(ComputationError):
    pass


# --- augmentation ---------------------------------------------------------

class MissingCapability(ComputationError):
    pass


class TranslationFailure(ComputationError):
    def __init__(self, message, pair_id=None):
        super().__init__(message if pair_id is None else f"{message} (pair {pair_id})")
        self.pair_id = pair_id


# --- scorer / evaluation --------------------------------------------------

class EmptySentence(ComputationError):
    pass


class DimensionMismatch(ComputationError):
    pass


class LengthMismatch(ComputationError):
    pass


class EmptyBatch(ComputationError):
    pass


class NonFiniteValue(ComputationError):
    pass


class NonFiniteLoss(ComputationError):
    pass


class DegenerateInput(ComputationError):
    pass


class UnlabeledDataset(DataError):
    pass


# UnlabeledDev is the training-time name for the same condition.
UnlabeledDev = UnlabeledDataset


class StageError(XlstrError):
    """A pipeline stage failed; wraps the underlying error with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
