"""Typed CEP rules: build them, check them, translate them, run them.

The pieces compose left to right: :mod:`cepkit.model` holds the rule
structure, :mod:`cepkit.validation` diagnoses it, :mod:`cepkit.codegen`
renders engine source, :mod:`cepkit.engine` executes rules over pushed
event streams, and :mod:`cepkit.serialization` / :mod:`cepkit.streams`
read and write the on-disk forms. ``cep`` on the command line and
:func:`cepkit.service.create_app` over HTTP wrap the same calls.
"""

from .codegen import GeneratedSource, generate_drl, generate_epl, generate_pattern_fragment
from .engine import OutputRow, Session, TimedEvent, open_session, oracle, run_stream
from .errors import (
    CepError,
    DocumentFormatError,
    InvalidModelError,
    ModelError,
    StreamError,
    StreamFormatError,
    UnsupportedConstructError,
)
from .model import RuleModel, canonicalize, new_model
from .serialization import parse_model, serialize_model
from .validation import Diagnostic, typecheck, validate

__version__ = "0.1.0"

__all__ = [
    "CepError",
    "Diagnostic",
    "DocumentFormatError",
    "GeneratedSource",
    "InvalidModelError",
    "ModelError",
    "OutputRow",
    "RuleModel",
    "Session",
    "StreamError",
    "StreamFormatError",
    "TimedEvent",
    "UnsupportedConstructError",
    "canonicalize",
    "generate_drl",
    "generate_epl",
    "generate_pattern_fragment",
    "new_model",
    "open_session",
    "oracle",
    "parse_model",
    "run_stream",
    "serialize_model",
    "typecheck",
    "validate",
]
