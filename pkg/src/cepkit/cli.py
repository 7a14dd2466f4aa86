"""The ``cep`` command.

Subcommands: ``validate`` (diagnose a rule file), ``gen`` (emit EPL or
DRL source), ``run`` (execute a rule over a recorded stream, optionally
rendering a report figure), ``serve`` (start the HTTP service).

Exit codes partition by outcome: 0 success, 1 validation diagnostics,
2 unreadable or unparseable input, 3 construct outside the requested
subset, 4 stream content rejected by the engine.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .codegen import generate_drl, generate_epl
from .engine import open_session
from .errors import (
    DocumentFormatError,
    InvalidModelError,
    StreamError,
    StreamFormatError,
    UnsupportedConstructError,
)
from .model import RuleModel
from .serialization import parse_model
from .streams import read_events, write_rows
from .validation import validate

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_STREAM = 4


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _error(code: str, message: str) -> None:
    flat = " ".join(str(message).split())
    print(f"error[{code}]: {flat}", file=sys.stderr)


def _diagnostic_line(d) -> str:
    return f"{d.code} {d.path}: {d.message}"


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        _error("io", f"{path}: {err.strerror or err}")
        raise _Exit(EXIT_INPUT) from None


def _load_model(path: str) -> RuleModel:
    try:
        model, _ = parse_model(_read_file(path))
        return model
    except DocumentFormatError as err:
        for issue in err.issues:
            _error("parse", f"{path}: {issue}")
        raise _Exit(EXIT_INPUT) from None


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _cmd_validate(args) -> int:
    diagnostics = validate(_load_model(args.model))
    for d in diagnostics:
        print(_diagnostic_line(d))
    return EXIT_DIAGNOSTICS if diagnostics else EXIT_OK


def _cmd_gen(args) -> int:
    model = _load_model(args.model)
    generator = generate_epl if args.target == "epl" else generate_drl
    try:
        source = generator(model)
    except InvalidModelError as err:
        for d in err.diagnostics:
            _error("diagnostic", _diagnostic_line(d))
        return EXIT_DIAGNOSTICS
    except UnsupportedConstructError as err:
        _error("unsupported", str(err))
        return EXIT_UNSUPPORTED
    _write_output(source.text + "\n", args.out)
    return EXIT_OK


def _cmd_run(args) -> int:
    model = _load_model(args.model)
    try:
        events = read_events(_read_file(args.events))
    except StreamFormatError as err:
        _error("parse", f"{args.events}: {err}")
        return EXIT_INPUT

    try:
        session = open_session(model)
    except InvalidModelError as err:
        for d in err.diagnostics:
            _error("diagnostic", _diagnostic_line(d))
        return EXIT_DIAGNOSTICS
    except UnsupportedConstructError as err:
        _error("unsupported", str(err))
        return EXIT_UNSUPPORTED

    rows = []
    try:
        for event in events:
            rows.extend(session.push(event))
    except StreamError as err:
        _error("stream", str(err))
        return EXIT_STREAM

    _write_output(write_rows(rows), args.out)
    if args.report is not None:
        from .report import write_report

        write_report(model, events, rows, args.report)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cep", description="Validate, translate, and execute CEP rule files."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report diagnostics for a rule file")
    p.add_argument("model", help="rule document (.ceprule.json)")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("gen", help="generate engine source from a rule file")
    p.add_argument("model")
    p.add_argument("--target", required=True, choices=("epl", "drl"))
    p.add_argument("-o", "--out", default=None, help="write to file instead of stdout")
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("run", help="execute a rule over a recorded event stream")
    p.add_argument("model")
    p.add_argument("--events", required=True, help="newline-delimited event records")
    p.add_argument("--out", default=None, help="write rows to file instead of stdout")
    p.add_argument("--report", default=None, metavar="DIR",
                   help="also render a timeline figure into DIR")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=_cmd_serve)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _Exit as stop:
        return stop.code


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
