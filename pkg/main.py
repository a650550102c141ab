"""
shadowstein - command-line entry point

Reads shadows (`.bsh`) and fronts (`.fr`), runs one verb and prints a JSON
report (or a plain-text table with --text) to stdout. Logs go to stderr.
Exit codes: 0 success, 1 clean negative, 2 UNKNOWN, 64 input error,
70 internal assertion.
"""

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, TextIO

from config import CUSP_CONVENTIONS, Settings
from errors import InternalModelError, ShadowsteinError
from front import (
    cusp_signs,
    front_embedding,
    load_polyak_table,
    mapping_cylinder_shadow,
    parse_front,
    polyak_gleams,
    tb,
)
from ilp import FEASIBLE, INFEASIBLE, UNKNOWN
from invariants import invariants_report
from shadow_core import generate_pn, parse_shadow, serialize_shadow, validate_shadow
from stein import (
    check_genfo,
    check_mainteo,
    emit_surgery_certificate,
    enumerate_stein_classes,
    minimal_genus_check,
    pn_report,
    spine_report,
)

logger = logging.getLogger("shadowstein")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 64
EXIT_INTERNAL = 70

NEGATIVE_VERDICTS = {INFEASIBLE, "CONDITION_NOT_MET", "NOT_SPINE", "NOT_TIGHT", "HYPOTHESIS_UNMET"}
HALF_KEYS = {"gleam2", "ud2", "u2"}
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "WARNING"):
    """Install a single stderr handler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_shadowstein", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.setLevel(level)
    handler._shadowstein = True
    root.addHandler(handler)
    # warnings always reach the report collector
    root.setLevel(min(logging.getLevelName(level), logging.WARNING))


class _WarningCollector(logging.Handler):
    """Copies WARNING records into the report."""

    def __init__(self):
        super().__init__(logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record):
        self.messages.append(f"{record.name}: {record.getMessage()}")


# -- report helpers ---------------------------------------------------------


def _half(v: int) -> str:
    q, r = divmod(abs(v), 2)
    sign = "-" if v < 0 else ""
    return f"{sign}{q}.5" if r else f"{sign}{q}"


def add_halves(data):
    """Next to every doubled `*2` entry add its exact decimal rendering without the suffix."""
    if isinstance(data, list):
        return [add_halves(x) for x in data]
    if not isinstance(data, dict):
        return data
    out = {}
    for key, value in data.items():
        out[key] = add_halves(value)
        if key in HALF_KEYS:
            if isinstance(value, int):
                out[key[:-1]] = _half(value)
            elif isinstance(value, list) and all(isinstance(v, int) for v in value):
                out[key[:-1]] = [_half(v) for v in value]
    return out


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, rows)
    elif isinstance(value, list):
        rows.append((prefix, " ".join(str(v) for v in value)))
    elif isinstance(value, str) and "\n" in value:
        for i, line in enumerate(value.rstrip("\n").splitlines()):
            rows.append((f"{prefix}[{i}]", line))
    else:
        rows.append((prefix, "-" if value is None else str(value)))


def render_text(report: dict) -> str:
    rows: list = []
    _flatten("", report, rows)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def exit_code(verdict: str) -> int:
    if verdict == UNKNOWN:
        return EXIT_UNKNOWN
    if verdict in NEGATIVE_VERDICTS:
        return EXIT_NEGATIVE
    return EXIT_OK


# -- verbs ------------------------------------------------------------------


def _parse_ints(raw: Optional[str], what: str) -> Optional[list[int]]:
    if raw is None:
        return None
    try:
        return [int(x) for x in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ValueError(f"{what} must be a comma-separated list of integers, got {raw!r}") from exc


def _parse_splits(raw: Optional[str]) -> Optional[list[tuple[int, int]]]:
    if raw is None:
        return None
    splits = []
    for part in raw.replace(",", " ").split():
        plus, _, minus = part.partition(":")
        try:
            splits.append((int(plus), int(minus)))
        except ValueError as exc:
            raise ValueError(f"splits are written h+:h-, got {part!r}") from exc
    return splits


def cmd_validate(args, text, settings):
    shadow = parse_shadow(text)
    return "VALID", validate_shadow(shadow)


def cmd_invariants(args, text, settings):
    shadow = parse_shadow(text)
    return "OK", invariants_report(shadow, _parse_ints(args.choice, "--choice"))


def cmd_stein_check(args, text, settings):
    shadow = parse_shadow(text)
    check = check_mainteo(shadow, settings)
    data = check.to_dict()
    if check.verdict == FEASIBLE:
        data["certificate"] = emit_surgery_certificate(shadow, check.ud2).to_dict()
    return check.verdict, data


def cmd_stein_embed_check(args, text, settings):
    shadow = parse_shadow(text)
    report = check_genfo(shadow, settings=settings)
    report.pop("warnings", None)
    return report["verdict"], report


def _lift_or_check(shadow, args, settings):
    ud2 = _parse_ints(args.ud2, "--ud2")
    if ud2 is not None:
        return ud2, None
    check = check_mainteo(shadow, settings)
    return check.ud2, check


def cmd_enumerate_classes(args, text, settings):
    shadow = parse_shadow(text)
    ud2, check = _lift_or_check(shadow, args, settings)
    if ud2 is None:
        return check.verdict, {"stein": check.to_dict()}
    data = enumerate_stein_classes(shadow, ud2, settings)
    data["ud2"] = list(ud2)
    return "OK", data


def cmd_certificate(args, text, settings):
    shadow = parse_shadow(text)
    ud2, check = _lift_or_check(shadow, args, settings)
    if ud2 is None:
        return check.verdict, {"stein": check.to_dict()}
    cert = emit_surgery_certificate(shadow, ud2, _parse_splits(args.splits))
    return "OK", cert.to_dict()


def cmd_spine_report(args, text, settings):
    report = spine_report(parse_shadow(text))
    verdict = {"certificates emitted": "CERTIFIED", "condition not met": "CONDITION_NOT_MET"}.get(
        report["status"], "NOT_SPINE"
    )
    return verdict, report


def cmd_genus_check(args, text, settings):
    shadow = parse_shadow(text)
    report = minimal_genus_check(shadow, _parse_ints(args.cycle, "--cycle"), settings)
    if report["status"] == "hypothesis unmet":
        verdict = UNKNOWN if report["stein"] == UNKNOWN else "HYPOTHESIS_UNMET"
    else:
        verdict = "TIGHT" if report["tight"] else "NOT_TIGHT"
    return verdict, report


def cmd_front_to_shadow(args, text, settings):
    front = parse_front(text)
    table = load_polyak_table(settings.polyak_table)
    shadow = mapping_cylinder_shadow(front, table)
    gleams = polyak_gleams(front, table)
    if args.embedding:
        shadow = shadow.with_embedding(front_embedding(front, shadow, settings.cusp_convention))
    data = {
        "front": front.name,
        "cusp_signs": cusp_signs(front),
        "tb": {c.id: tb(front, c.id) for c in front.curves},
        "gleams": {
            "faces": [{"face": k, "gleam2": v} for k, v in gleams["faces"].items()],
            "curves": [{"curve": k, "gleam2": v} for k, v in gleams["curves"].items()],
        },
        "cusp_convention": settings.cusp_convention,
        "validation": validate_shadow(shadow),
        "shadow": serialize_shadow(shadow),
    }
    return "VALID", data


def cmd_generate_pn(args, text, settings):
    shadow = generate_pn(args.n, settings)
    data = {"shadow": serialize_shadow(shadow), "transfer_log": list(shadow.transfer_log)}
    if args.report:
        data["report"] = pn_report(args.n, settings)
    return "OK", data


COMMANDS = {
    "validate": (cmd_validate, "validate a shadow and print its branching data"),
    "invariants": (cmd_invariants, "Euler, gleam, Up&Down cochains and (co)homology"),
    "stein-check": (cmd_stein_check, "decide Eul + gl + delta(UD) <= 0"),
    "stein-embed-check": (cmd_stein_embed_check, "decide the embedded-shadow condition"),
    "enumerate-classes": (cmd_enumerate_classes, "enumerate Stein classes in H^2"),
    "certificate": (cmd_certificate, "emit a Legendrian surgery certificate"),
    "spine-report": (cmd_spine_report, "branched spine corollary"),
    "genus-check": (cmd_genus_check, "adjunction check for a carried cycle"),
    "front-to-shadow": (cmd_front_to_shadow, "mapping cylinder shadow of a front"),
    "generate-pn": (cmd_generate_pn, "one-region shadow with n vertices"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--text", action="store_true", help="print a plain-text table instead of JSON")
    common.add_argument("--halves", action="store_true", help="add exact decimal halves next to doubled values")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    common.add_argument("--cap", type=int, help="initial ILP variable cap")
    common.add_argument("--cap-ceiling", type=int, help="hard ceiling for cap doubling")
    common.add_argument("--enum-limit", type=int, help="guard on the number of zig-zag splits")
    common.add_argument("--cusp-convention", choices=CUSP_CONVENTIONS, default="proof")
    common.add_argument("--polyak-table", help="local gleam contribution table")
    common.add_argument("--fixtures", help="fixture directory")
    common.add_argument("--log-level", help="logging level (default WARNING)")

    parser = argparse.ArgumentParser(prog="shadowstein", description="Stein structures from branched shadows")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "generate-pn":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--json", action="store_true", help="wrap the shadow in the JSON report")
            p.add_argument("--report", action="store_true", help="add Stein checks and class counts (implies --json)")
            continue
        p.add_argument("input", help="input file, fixture name or - for stdin")
        if name == "invariants":
            p.add_argument("--choice", help="Up&Down choice bits, one per vertex")
        if name in ("enumerate-classes", "certificate"):
            p.add_argument("--ud2", help="doubled lift per edge (default: solver witness)")
        if name == "certificate":
            p.add_argument("--splits", help="per-region zig-zag splits h+:h-")
        if name == "genus-check":
            p.add_argument("--cycle", required=True, help="region coefficients of the carried cycle")
        if name == "front-to-shadow":
            p.add_argument("--embedding", action="store_true", help="attach complex-point data")
    return parser


def _read_input(source: str, settings: Settings, stdin: Optional[TextIO]) -> bytes:
    if source == "-":
        stream = stdin or sys.stdin
        data = stream.read()
        return data.encode("utf-8") if isinstance(data, str) else data
    path = Path(source)
    if not path.is_file():
        path = settings.fixture_path(source)
    return path.read_bytes()


def run(argv: Optional[list[str]] = None, stdout: Optional[TextIO] = None, stdin: Optional[TextIO] = None) -> int:
    """
    Run one command.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])
        stdout: Report stream (defaults to sys.stdout)
        stdin: Stream read for input "-" (defaults to sys.stdin)

    Returns:
        Process exit code
    """
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 2 in argparse, which is the UNKNOWN code here
        return EXIT_INPUT if exc.code else EXIT_OK
    collector = _WarningCollector()
    logging.getLogger().addHandler(collector)
    started = time.perf_counter()
    report = {"command": args.command, "input_digest": None}
    try:
        settings = Settings(
            fixtures_dir=args.fixtures,
            cap=args.cap,
            cap_ceiling=args.cap_ceiling,
            enum_limit=args.enum_limit,
            polyak_table=args.polyak_table,
            cusp_convention=args.cusp_convention,
            log_level=args.log_level,
        )
        configure_logging(settings.log_level)
        text = ""
        if args.command != "generate-pn":
            raw = _read_input(args.input, settings, stdin)
            report["input_digest"] = hashlib.sha256(raw).hexdigest()
            text = raw.decode("utf-8")
        handler, _ = COMMANDS[args.command]
        verdict, data = handler(args, text, settings)
        code = exit_code(verdict)
    except InternalModelError as exc:
        logger.error("internal assertion failed: %s", exc)
        verdict, data, code = "ERROR", {"error": type(exc).__name__, "message": str(exc)}, EXIT_INTERNAL
    except (ShadowsteinError, ValueError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        detail = exc.to_dict() if hasattr(exc, "to_dict") else {"error": type(exc).__name__, "message": str(exc)}
        verdict, data, code = "ERROR", detail, EXIT_INPUT
    finally:
        logging.getLogger().removeHandler(collector)

    if args.command == "generate-pn" and code == EXIT_OK and not (args.json or args.report or args.text):
        stdout.write(data["shadow"])
        return code

    report.update({"verdict": verdict, "data": data, "warnings": collector.messages})
    if args.halves:
        report = add_halves(report)
    if args.timing:
        report["timing"] = {"seconds": f"{time.perf_counter() - started:.6f}"}
    if args.text:
        stdout.write(render_text(report))
    else:
        stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return code


def main():
    """Main entry point with CLI argument handling."""
    sys.exit(run())


if __name__ == "__main__":
    main()
