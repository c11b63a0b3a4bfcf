"""Exception hierarchy shared across the library.

Every operational failure raises a subclass of :class:`CausalTsError` so
callers (and the CLI) can distinguish expected domain errors from bugs.
"""

from __future__ import annotations


class CausalTsError(Exception):
    """Base class for all domain errors raised by this package."""


# -- series / spectral -------------------------------------------------------

class EmptyInput(CausalTsError):
    """A series or sequence was empty where samples are required."""


class TooShort(CausalTsError):
    """The series is too short for spectral period detection."""


class NoDominantFrequency(CausalTsError):
    """No spectral peak stands out (constant or near-constant input)."""


class EmptyDataset(CausalTsError):
    """An operation over a dataset received no series at all."""


class WindowTooLong(CausalTsError):
    """A window length exceeds the series it should slide over."""


# -- snippet mining ----------------------------------------------------------

class SeriesTooShort(CausalTsError):
    """The series cannot host even two non-overlapping windows."""


class KTooLarge(CausalTsError):
    """More snippets requested than non-overlapping candidates exist."""


# -- clustering --------------------------------------------------------------

class LengthMismatch(CausalTsError):
    """Two sequences that must share a length do not."""


class EmptyCluster(CausalTsError):
    """Shape extraction was asked to summarize zero members."""


class TooFewSnippets(CausalTsError):
    """Fewer pooled snippets than requested clusters."""


# -- encoding ----------------------------------------------------------------

class MissingSnippets(CausalTsError):
    """A series in the dataset has no mined snippets to encode."""


# -- strength estimation -----------------------------------------------------

class DegenerateTreatment(CausalTsError):
    """A treatment column is constant, so no effect is estimable."""


class NoMatches(CausalTsError):
    """Propensity matching excluded every row (caliper too tight)."""


# -- applications ------------------------------------------------------------

class NoLabel(CausalTsError):
    """The operation needs a labeled structure or dataset."""


class NoOverlap(CausalTsError):
    """Two masked representations share no valid positions at all."""


class PipelineError(CausalTsError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str = ""):
        self.stage = stage
        text = f"stage {stage!r} failed"
        if message:
            text = f"{text}: {message}"
        super().__init__(text)


# -- file I/O ----------------------------------------------------------------

class ParseError(CausalTsError):
    """A data file contains an unparseable token; carries the line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class RaggedRows(ParseError):
    """Rows in a delimited file disagree on field count."""


class EmptyFile(CausalTsError):
    """The input file holds no data rows."""
