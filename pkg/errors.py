"""Error kinds raised across the workbench."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple


class SessionForgeError(Exception):
    """Base class for every error the library raises."""


@dataclass(frozen=True)
class SourceSpan:
    """Location of a parse failure; positions are 1-based (line, column) pairs."""
    file: Optional[str]
    start: Tuple[int, int]
    end: Tuple[int, int]

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError("span end precedes its start")

    def __str__(self):
        where = self.file or "<input>"
        return f"{where}:{self.start[0]}:{self.start[1]}"


class SyntaxFault(SessionForgeError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


class MalformedDerivation(SessionForgeError):
    """A derivation failed validation where a valid one was required."""

    def __init__(self, message: str, path: Tuple[int, ...] = ()):
        self.message = message
        self.path = path
        super().__init__(message)


class NotFound(SessionForgeError):
    """Proof search gave up; `trace` holds the deepest failure frontier."""

    def __init__(self, message: str, trace: Sequence[str] = ()):
        self.message = message
        self.trace = list(trace)
        super().__init__(message)


class AnnotationRequired(NotFound):
    """An unannotated restriction could not be typed from the type universe."""


class BudgetOverflow(SessionForgeError):
    pass


class FuelExhausted(SessionForgeError):
    def __init__(self, steps: int, trace: Sequence[dict]):
        self.steps = steps
        self.trace = list(trace)
        super().__init__(f"no normal form within {steps} steps")


class TypePreservationFailure(SessionForgeError):
    """A reduct could not be re-typed at the judgment of its source."""

    def __init__(self, step: int, process):
        self.step = step
        self.process = process
        super().__init__(f"reduct at step {step} lost its type: {process}")


class NotInFragment(SessionForgeError):
    def __init__(self, report):
        self.report = report
        where = ".".join(map(str, report.witness)) if report.witness else "root"
        super().__init__(
            f"derivation is outside the intuitionistic fragment "
            f"(max r-degree {report.max_r_degree}, first offending node at {where})"
        )
