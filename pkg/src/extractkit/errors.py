"""Exception hierarchy.

Every error carries a ``clause`` anchor naming the violated property so that
CLI failure records are machine readable.
"""

from __future__ import annotations


class ExtractKitError(Exception):
    clause = "generic"

    def __init__(self, message: str, clause: str | None = None, stage: str | None = None):
        super().__init__(message)
        if clause is not None:
            self.clause = clause
        self.stage = stage

    def record(self) -> dict:
        return {
            "error": type(self).__name__,
            "clause": self.clause,
            "stage": self.stage,
            "message": str(self),
        }


class TruncationError(ExtractKitError):
    clause = "seqspace.truncation"


class EquatorProximityError(ExtractKitError):
    clause = "seqspace.chart-margin"


class DomainError(ExtractKitError):
    clause = "domain"


class SingularPointError(ExtractKitError):
    clause = "gauge.smooth-off-origin"


class BoundViolationError(ExtractKitError):
    clause = "smoothstep.derivative-bound"


class BracketError(ExtractKitError):
    clause = "fixed-point.sign-change"


class ContractViolationError(ExtractKitError):
    clause = "fixed-point.semi-contraction"


class ExcludedSetError(ExtractKitError):
    clause = "scheme.excluded-set"


class CertificationError(ExtractKitError):
    clause = "staircase.approximant-bound"


class ScheduleError(ExtractKitError):
    clause = "twin.constant-schedule"


class ContractionError(ExtractKitError):
    clause = "flatten.picard-contraction"


class WindowConsistencyError(ExtractKitError):
    clause = "tube.inside-window"


class InvalidGaugeError(ExtractKitError):
    clause = "convex-body.gauge"


class BudgetError(ExtractKitError):
    clause = "patch.displacement-budget"


class CoverError(ExtractKitError):
    clause = "cover.oscillation-sixteenth"


class CoverageError(ExtractKitError):
    clause = "partition.coverage"


class CapacityError(ExtractKitError):
    clause = "operators.reserved-block-capacity"


class OptimizationError(ExtractKitError):
    clause = "section.argmin-convergence"


class OracleError(ExtractKitError):
    clause = "upgrade.oracle-contract"


class StageError(ExtractKitError):
    clause = "pipeline.stage"
