"""Engine error types.

Every error carries a stable machine ``code`` and a default HTTP status so
the service layer can translate exceptions 1:1 into API error payloads.
4xx codes mark caller faults, 5xx mark provider or internal faults.
"""


class EngineError(Exception):
    code = "engine_error"
    http_status = 500

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- configuration ---

class ConfigError(EngineError):
    code = "config_error"
    http_status = 422


class MissingField(ConfigError):
    code = "missing_field"


class InvalidThreshold(ConfigError):
    code = "invalid_threshold"


class UnknownSplitName(ConfigError):
    code = "unknown_split_name"
    http_status = 404


# --- ingestion ---

class IoError(EngineError):
    code = "io_error"
    http_status = 500


class RowCountMismatch(EngineError):
    code = "row_count_mismatch"
    http_status = 500


class MalformedRow(EngineError):
    code = "malformed_row"
    http_status = 500


# --- prediction analysis ---

class EmptyVector(EngineError):
    code = "empty_vector"
    http_status = 422


class EmptyInput(EngineError):
    code = "empty_input"
    http_status = 422


# --- similarity analysis ---

class MissingEmbeddings(EngineError):
    code = "missing_embeddings"
    http_status = 409


class ZeroVector(EngineError):
    code = "zero_vector"
    http_status = 422


# --- behavioral testing ---

class ProviderUnavailable(EngineError):
    code = "provider_unavailable"
    http_status = 502


class MissingPerturbedPrediction(EngineError):
    code = "missing_perturbed_prediction"
    http_status = 500


# --- uncertainty analysis ---

class TooFewSamples(EngineError):
    code = "too_few_samples"
    http_status = 422


class MissingSaliency(EngineError):
    code = "missing_saliency"
    http_status = 409


# --- tagging and query ---

class InvalidRange(EngineError):
    code = "invalid_range"
    http_status = 422


class UnknownTagName(EngineError):
    code = "unknown_tag_name"
    http_status = 422


class UnknownUtterance(EngineError):
    code = "unknown_utterance"
    http_status = 404


class UnknownAction(EngineError):
    code = "unknown_action"
    http_status = 422


class UnknownSplit(EngineError):
    code = "unknown_split"
    http_status = 404


class UnknownPipeline(EngineError):
    code = "unknown_pipeline"
    http_status = 404


# --- scheduler ---

class ComputationFailed(EngineError):
    code = "computation_failed"
    http_status = 500

    def __init__(self, message: str, cause: BaseException | None = None):
        super().__init__(message)
        self.cause = cause
