"""Exception hierarchy.  Every error carries a short machine-readable ``code``."""
from __future__ import annotations


class SlopewrightError(Exception):
    code = "error"

    def __init__(self, message: str = "", *, stage: str | None = None, witness=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness

    def tagged(self, stage: str) -> "SlopewrightError":
        self.stage = stage
        return self

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {self.code}: {msg}"
        return f"{self.code}: {msg}"


class InvalidMap(SlopewrightError):
    code = "InvalidMap"


class InvalidPartition(SlopewrightError):
    code = "InvalidPartition"


class OutOfDomain(SlopewrightError):
    code = "OutOfDomain"


class NotTransverse(SlopewrightError):
    code = "NotTransverse"


class NotPiecewiseMonotone(SlopewrightError):
    code = "NotPiecewiseMonotone"


class UnrepresentableCriticalStructure(SlopewrightError):
    code = "UnrepresentableCriticalStructure"


class PatternMismatch(SlopewrightError):
    code = "PatternMismatch"


class IndexMismatch(SlopewrightError):
    code = "IndexMismatch"


class HitsAccumulation(SlopewrightError):
    code = "HitsAccumulation"


class BrokenPath(SlopewrightError):
    code = "BrokenPath"


class Diverging(SlopewrightError):
    code = "Diverging"


class NoRomeCertificate(SlopewrightError):
    code = "NoRomeCertificate"


class NotRecurrent(SlopewrightError):
    code = "NotRecurrent"


class ResidualTooLarge(SlopewrightError):
    code = "ResidualTooLarge"


class NotEigenvector(SlopewrightError):
    code = "NotEigenvector"


class NotNormalized(SlopewrightError):
    code = "NotNormalized"


class TilingMismatch(SlopewrightError):
    code = "TilingMismatch"


class WindowImageMismatch(SlopewrightError):
    code = "WindowImageMismatch"


class EndpointMismatch(SlopewrightError):
    code = "EndpointMismatch"


class NotPAffine(SlopewrightError):
    code = "NotPAffine"


class InconsistencyAlarm(SlopewrightError):
    code = "InconsistencyAlarm"


class SpecFormatError(SlopewrightError):
    code = "SpecFormatError"
