"""Custom exception classes for annealtune."""

from typing import Dict, Any, Optional, Iterable, List
from datetime import datetime


class AnnealTuneException(Exception):
    """Base exception class.

    ``exit_code`` is what the CLI returns when the exception escapes a command.
    """

    def __init__(
        self,
        error_code: str,
        message: str,
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None
    ):
        self.error_code = error_code
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        self.timestamp = datetime.now()
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used for the CLI error line."""
        return {
            "error_code": self.error_code,
            "message": self.message,
            "details": self.details,
        }


# Hardware Exceptions
class HardwareException(AnnealTuneException):
    """Base exception for hardware graph errors."""
    pass


class UnknownQubitError(HardwareException):
    """Raised when a qubit id is not a working qubit of the hardware graph."""

    def __init__(self, qubits: Iterable[int]):
        qubits = sorted(qubits)
        super().__init__(
            error_code="HW_001",
            message=f"Unknown or non-working qubit(s): {qubits[:10]}",
            exit_code=2,
            details={
                "qubits": qubits
            }
        )


class InvalidHardwareError(HardwareException):
    """Raised when a hardware description violates the topology rules."""

    def __init__(self, reason: str):
        super().__init__(
            error_code="HW_002",
            message=f"Invalid hardware description: {reason}",
            exit_code=2,
            details={
                "reason": reason
            }
        )


# Embedding Exceptions
class EmbeddingException(AnnealTuneException):
    """Base exception for embedding errors."""
    pass


class EmbeddingCapacityError(EmbeddingException):
    """Raised when the requested clique does not fit on the hardware."""

    def __init__(self, requested: int, capacity: int):
        super().__init__(
            error_code="EMB_001",
            message=f"Cannot embed K_{requested}: hardware capacity is K_{capacity}",
            details={
                "requested": requested,
                "capacity": capacity
            }
        )


class EmbeddingFailureError(EmbeddingException):
    """Raised when an embedding cannot be built on the given hardware."""

    def __init__(self, reason: str, error_details: str = None):
        super().__init__(
            error_code="EMB_002",
            message=f"Embedding construction failed: {reason}",
            details={
                "reason": reason,
                "error_details": error_details
            }
        )


class EmbeddingCoverageError(EmbeddingException):
    """Raised when a logical variable or edge has no physical realisation."""

    def __init__(self, subject: str, reason: str):
        super().__init__(
            error_code="EMB_003",
            message=f"Embedding does not cover {subject}: {reason}",
            details={
                "subject": subject,
                "reason": reason
            }
        )


class SampleCoverageError(EmbeddingException):
    """Raised when a sample set lacks qubits required for unembedding."""

    def __init__(self, missing: Iterable[int]):
        missing = sorted(missing)
        super().__init__(
            error_code="EMB_004",
            message=f"Sample set is missing {len(missing)} chain qubit(s)",
            exit_code=2,
            details={
                "missing": missing[:50]
            }
        )


class InvalidEmbeddingError(EmbeddingException):
    """Raised when stored embeddings fail validation against the hardware."""

    def __init__(self, which: str, failures: Dict[int, List[str]]):
        super().__init__(
            error_code="EMB_005",
            message=f"{len(failures)} {which} embedding(s) failed validation",
            details={
                "which": which,
                "failures": {str(i): kinds for i, kinds in sorted(failures.items())}
            }
        )


# Problem Exceptions
class ProblemException(AnnealTuneException):
    """Base exception for problem generation errors."""
    pass


class InvalidGraphParameterError(ProblemException):
    """Raised when random graph parameters are out of range."""

    def __init__(self, parameter: str, value: Any, reason: str):
        super().__init__(
            error_code="PROB_001",
            message=f"Invalid graph parameter '{parameter}': {reason}",
            exit_code=2,
            details={
                "parameter": parameter,
                "value": str(value),
                "reason": reason
            }
        )


# Transform Exceptions
class TransformException(AnnealTuneException):
    """Base exception for parameter transform errors."""
    pass


class SpinReversalTypeError(TransformException):
    """Raised when spin reversal is applied to a QUBO-typed model."""

    def __init__(self, model_type: str):
        super().__init__(
            error_code="XFORM_001",
            message=f"Spin reversal requires an Ising model, got {model_type}",
            exit_code=2,
            details={
                "model_type": model_type
            }
        )


class MaskCoverageError(TransformException):
    """Raised when a parameter vector does not cover the model it targets."""

    def __init__(self, missing: Iterable[Any]):
        missing = sorted(missing)
        super().__init__(
            error_code="XFORM_002",
            message=f"Parameter vector misses {len(missing)} variable(s)",
            exit_code=2,
            details={
                "missing": [str(v) for v in missing[:50]]
            }
        )


class InvalidChainWeightsError(TransformException):
    """Raised when chain-weight shares violate the simplex constraints."""

    def __init__(self, subject: str, reason: str):
        super().__init__(
            error_code="XFORM_003",
            message=f"Invalid chain weights for {subject}: {reason}",
            exit_code=2,
            details={
                "subject": subject,
                "reason": reason
            }
        )


# Sampler Exceptions
class SamplerException(AnnealTuneException):
    """Base exception for sampler errors."""
    pass


class SamplerInputError(SamplerException):
    """Raised when a model cannot be sampled on the given hardware."""

    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            error_code="SAMPLER_001",
            message=f"Invalid sampler input: {reason}",
            exit_code=2,
            details=details or {"reason": reason}
        )


class OffsetOutOfRangeError(SamplerException):
    """Raised when an anneal offset leaves its qubit's range or step grid."""

    def __init__(self, qubit: int, offset: float, offset_range: Any):
        super().__init__(
            error_code="SAMPLER_002",
            message=f"Anneal offset {offset} for qubit {qubit} is outside {offset_range} or off-grid",
            exit_code=2,
            details={
                "qubit": qubit,
                "offset": offset,
                "offset_range": list(offset_range)
            }
        )


class MissingVariableError(SamplerException):
    """Raised when an assignment does not cover every model variable."""

    def __init__(self, missing: Iterable[Any]):
        missing = sorted(missing)
        super().__init__(
            error_code="SAMPLER_003",
            message=f"Assignment is missing {len(missing)} variable(s)",
            exit_code=2,
            details={
                "missing": [str(v) for v in missing[:50]]
            }
        )


# Optimizer Exceptions
class OptimizerException(AnnealTuneException):
    """Base exception for optimizer errors."""
    pass


class OptimizerConfigError(OptimizerException):
    """Raised when the differential evolution configuration is unusable."""

    def __init__(self, config_key: str, config_value: Any, reason: str = None):
        super().__init__(
            error_code="OPT_001",
            message=f"Invalid optimizer configuration for '{config_key}': {reason or 'Invalid value'}",
            exit_code=2,
            details={
                "config_key": config_key,
                "config_value": str(config_value),
                "reason": reason
            }
        )


# Metrics Exceptions
class MetricException(AnnealTuneException):
    """Base exception for metric errors."""
    pass


class MetricInputError(MetricException):
    """Raised when solve statistics cannot produce a metric."""

    def __init__(self, reason: str):
        super().__init__(
            error_code="METRIC_001",
            message=f"Invalid metric input: {reason}",
            exit_code=2,
            details={
                "reason": reason
            }
        )


# Oracle Exceptions
class OracleException(AnnealTuneException):
    """Base exception for exact solver errors."""
    pass


class OracleLimitError(OracleException):
    """Raised when an instance exceeds the exact solver's size limit."""

    def __init__(self, solver: str, size: int, limit: int):
        super().__init__(
            error_code="ORACLE_001",
            message=f"Oracle '{solver}' refuses {size} variables (limit {limit})",
            details={
                "solver": solver,
                "size": size,
                "limit": limit
            }
        )


# Pipeline Exceptions
class PipelineException(AnnealTuneException):
    """Base exception for pipeline errors."""
    pass


class UnknownTechniqueError(PipelineException):
    """Raised when a technique name is not recognised."""

    def __init__(self, technique: str, available: list):
        super().__init__(
            error_code="PIPE_001",
            message=f"Unknown technique '{technique}'",
            exit_code=2,
            details={
                "technique": technique,
                "available": available
            }
        )


class MissingArtifactError(PipelineException):
    """Raised when a pipeline step needs an artifact that was not produced."""

    def __init__(self, path: str, produced_by: str):
        super().__init__(
            error_code="PIPE_002",
            message=f"Missing artifact '{path}' (run '{produced_by}' first)",
            details={
                "path": path,
                "produced_by": produced_by
            }
        )


class ArtifactMismatchError(PipelineException):
    """Raised when an artifact was produced by a different configuration."""

    def __init__(self, path: str, expected_hash: str, found_hash: str):
        super().__init__(
            error_code="PIPE_003",
            message=f"Artifact '{path}' was produced by a different configuration",
            details={
                "path": path,
                "expected_hash": expected_hash,
                "found_hash": found_hash
            }
        )


class NoValidCandidateError(PipelineException):
    """Raised when embedding selection finds no usable candidate."""

    def __init__(self, candidates: int):
        super().__init__(
            error_code="PIPE_004",
            message=f"None of the {candidates} candidate embeddings could be scored",
            details={
                "candidates": candidates
            }
        )


class ArtifactIOError(PipelineException):
    """Raised when an artifact cannot be read or written."""

    def __init__(self, path: str, error_details: str = None):
        super().__init__(
            error_code="PIPE_005",
            message=f"Failed to access artifact '{path}'",
            details={
                "path": path,
                "error_details": error_details
            }
        )


# Validation Exceptions
class ValidationException(AnnealTuneException):
    """Raised when an input value fails validation."""

    def __init__(self, field: str, value: Any, reason: str):
        super().__init__(
            error_code="VALIDATION_001",
            message=f"Validation failed for field '{field}': {reason}",
            exit_code=2,
            details={
                "field": field,
                "value": str(value),
                "reason": reason
            }
        )


class InternalError(AnnealTuneException):
    """Wraps an unexpected exception that escaped a command."""

    def __init__(self, error: Exception):
        super().__init__(
            error_code="INTERNAL_001",
            message="An unexpected error occurred",
            details={
                "error_type": type(error).__name__,
                "error": str(error)
            }
        )
