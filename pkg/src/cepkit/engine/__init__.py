"""Stream interpreter: session, reference oracle, shared records."""

from .oracle import oracle
from .patterns import Arrival, PatternMatcher, ensure_pattern_supported
from .session import (
    OutputRow,
    Session,
    TimedEvent,
    check_event,
    ensure_supported,
    open_session,
    run_stream,
)

__all__ = [
    "Arrival",
    "OutputRow",
    "PatternMatcher",
    "Session",
    "TimedEvent",
    "check_event",
    "ensure_pattern_supported",
    "ensure_supported",
    "open_session",
    "oracle",
    "run_stream",
]
