"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class CepError(Exception):
    """Base class for all toolkit errors."""


class ModelError(CepError):
    """A rule model could not be built or normalized."""


class InvalidIdentifierError(ModelError):
    """An identifier contains characters outside ``[A-Za-z_][A-Za-z0-9_]*``."""


class AliasCollisionError(ModelError):
    """Two targets ended up with the same alias after defaulting."""


class UnknownAliasError(ModelError, LookupError):
    """A reference names an alias that no target provides."""


class UnknownAttributeError(ModelError, LookupError):
    """A reference names an attribute the bound event does not declare."""


class InvalidModelError(CepError):
    """An operation requiring a clean model was given one with diagnostics.

    Carries the diagnostics that blocked the operation.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        codes = ", ".join(d.code for d in self.diagnostics)
        super().__init__(f"model has validation findings: {codes}")


class UnsupportedConstructError(CepError):
    """A model uses a construct outside the subset an operation supports.

    ``path`` addresses the offending model location.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class DocumentFormatError(CepError):
    """A rule document could not be parsed; carries the collected issues.

    Each issue is a ``ParseIssue`` from :mod:`cepkit.serialization`.
    """

    def __init__(self, issues):
        self.issues = tuple(issues)
        super().__init__("; ".join(str(i) for i in self.issues) or "empty document")


class StreamError(CepError):
    """An event stream violates the engine's input contract."""


class StreamFormatError(StreamError):
    """A stream file line could not be parsed; carries the line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
