"""Exception hierarchy.

Every concrete error class carries the process exit code the CLI returns
when it escapes a subcommand. Codes are stable and documented in the README.
"""

from __future__ import annotations


class DeaResearchError(Exception):
    exit_code = 1


# -- lp_core ---------------------------------------------------------------
class MalformedProblem(DeaResearchError, ValueError):
    exit_code = 10


# -- dea_engine ------------------------------------------------------------
class PanelError(DeaResearchError):
    exit_code = 20


class PanelEmpty(PanelError):
    exit_code = 21


class MalformedPanel(PanelError, ValueError):
    exit_code = 22


class DegenerateZeroOutput(PanelError):
    exit_code = 23


class NotEligible(PanelError):
    """Target DMU is excluded by the staff threshold."""

    exit_code = 24


class NonpositiveActualCost(PanelError):
    exit_code = 25


class DomainError(PanelError, ValueError):
    exit_code = 26


class SolverFailure(PanelError):
    """An envelopment LP did not reach Optimal or failed its post-solve check."""

    exit_code = 27


# -- bibliometrics ---------------------------------------------------------
class BibliometricsError(DeaResearchError):
    exit_code = 30


class InvalidPolicy(BibliometricsError, ValueError):
    exit_code = 31


class MalformedRecord(BibliometricsError, ValueError):
    exit_code = 32


class ZeroCategoryMean(BibliometricsError):
    exit_code = 33


class MissingJournal(BibliometricsError, KeyError):
    exit_code = 34

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return Exception.__str__(self)


class MissingAuthorCount(BibliometricsError):
    exit_code = 35


class EmptyPeriod(BibliometricsError, ValueError):
    exit_code = 36


# -- reporting -------------------------------------------------------------
class ReportingError(DeaResearchError):
    exit_code = 40


class ZeroStaff(ReportingError):
    exit_code = 41


class ZeroCost(ReportingError):
    exit_code = 42


class KeyMismatch(ReportingError, KeyError):
    exit_code = 43

    def __str__(self) -> str:
        return Exception.__str__(self)


# -- cli_pipeline / ingestion ----------------------------------------------
class IngestError(DeaResearchError):
    """Base for file validation failures; carries file and line when known."""

    exit_code = 50

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.message = message
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if path is not None:
            where = f"{self.path}:{line}: " if line is not None else f"{self.path}: "
        super().__init__(where + message)


class ParseError(IngestError):
    exit_code = 51


class SchemaError(IngestError):
    exit_code = 52


class ReferentialError(IngestError):
    exit_code = 53


class ConfigError(DeaResearchError, ValueError):
    exit_code = 60
