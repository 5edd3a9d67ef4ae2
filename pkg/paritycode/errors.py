"""
Exception hierarchy shared by the library, the CLI and the HTTP server.

Every exception carries the process exit code the CLI reports for it:
0 success, 1 verification failure, 2 usage/parse, 3 guard exceeded,
4 protocol violation.
"""
from typing import Iterable, Tuple


class ParityCodeError(Exception):
    exit_code = 1


class DimensionError(ParityCodeError, ValueError):
    exit_code = 2


class CodeFormatError(ParityCodeError, ValueError):
    exit_code = 2


class SeedError(ParityCodeError, ValueError):
    exit_code = 2


class LabelError(ParityCodeError):
    exit_code = 1


class InconsistentLabelsError(LabelError):
    def __init__(self, message: str, offending: Iterable[int] = ()):
        super().__init__(message)
        self.offending: Tuple[int, ...] = tuple(offending)


class UnderdeterminedLabelsError(LabelError):
    def __init__(self, message: str, qubits: Iterable[int] = ()):
        super().__init__(message)
        self.qubits: Tuple[int, ...] = tuple(sorted(qubits))


class EncoderError(ParityCodeError):
    exit_code = 1


class UnsupportedGateError(ParityCodeError, ValueError):
    exit_code = 2


class BackendError(ParityCodeError):
    exit_code = 2


class GuardExceededError(ParityCodeError):
    exit_code = 3


class MeasurementError(ParityCodeError):
    exit_code = 4


class NormUnderflowError(MeasurementError):
    pass


class DeformationError(ParityCodeError):
    exit_code = 4


class ProtocolOrderError(ParityCodeError):
    exit_code = 4


class GeneratorError(ParityCodeError):
    exit_code = 1


class VerificationFailure(ParityCodeError):
    exit_code = 1
