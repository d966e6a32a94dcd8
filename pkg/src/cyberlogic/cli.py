"""Command-line entry point.

Exit codes are a stable contract::

    0  success / no alert / chain Ok
    1  bad input (unreadable file, malformed fixture, failed replay step)
    2  formula syntax error
    3  alert raised by a suspect step
    4  demand fails validation
    5  ledger audit found a broken link
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

from . import __version__, fixture, report
from .formula import FormulaSyntaxError, parse, to_text
from .ledger import LedgerFormatError, audit_bytes
from .scenario import Scenario, ScenarioError, StepFailure, build_jon_snow, run
from .schengen import Modes, SchengenError, validate_demand

EXIT_OK, EXIT_INPUT, EXIT_SYNTAX, EXIT_ALERT, EXIT_INVALID, EXIT_BROKEN = 0, 1, 2, 3, 4, 5

MODE_ENV = "CYBERLOGIC_MODE"
_MODE_KEYS = {"passport_rule": ("prose", "paper"), "itinerary_rule": ("strict", "relaxed"), "record_controls": ("true", "false")}


def env_modes(value: Optional[str]) -> Dict[str, object]:
    """Parse ``passport_rule=paper,itinerary_rule=strict,record_controls=false``."""
    out: Dict[str, object] = {}
    if not value:
        return out
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, val = item.partition("=")
        key, val = key.strip().replace("-", "_"), val.strip().lower()
        if not sep or key not in _MODE_KEYS or val not in _MODE_KEYS[key]:
            raise ValueError(f"{MODE_ENV}: cannot read {item!r}")
        out[key] = (val == "true") if key == "record_controls" else val
    return out


def resolve_modes(base: Modes, args: argparse.Namespace, environ=os.environ) -> Modes:
    """Fixture modes, then the environment preset, then explicit flags."""
    modes = replace(base, **env_modes(environ.get(MODE_ENV)))
    flags = {k: getattr(args, k) for k in _MODE_KEYS if getattr(args, k, None) is not None}
    return replace(modes, **flags)


def _err(msg: str) -> None:
    print(f"cyberlogic: {msg}", file=sys.stderr)


def _emit(args: argparse.Namespace, obj: dict, text: str) -> None:
    sys.stdout.write(report.dumps(obj) if args.format == "json" else text)


def _load_scenario(ref: str) -> Scenario:
    if ref == "jon-snow":
        return build_jon_snow()
    return fixture.load(ref)


def cmd_parse_formula(args: argparse.Namespace) -> int:
    try:
        f = parse(args.text)
    except FormulaSyntaxError as exc:
        _err(f"syntax error at offset {exc.offset}: {exc.reason}")
        print(f"offset={exc.offset}", file=sys.stderr)
        return EXIT_SYNTAX
    _emit(args, report.formula_report(f), to_text(f) + "\n")
    return EXIT_OK


def cmd_run_scenario(args: argparse.Namespace) -> int:
    try:
        s = _load_scenario(args.scenario)
        s = replace(s, modes=resolve_modes(s.modes, args))
        if args.without:
            s = s.without_step(args.without)
        rep = run(s)
    except OSError as exc:
        _err(f"cannot read {args.scenario}: {exc.strerror or exc}")
        return EXIT_INPUT
    except (fixture.FixtureError, ScenarioError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except StepFailure as exc:
        _err(str(exc))
        return EXIT_INPUT
    _emit(args, report.scenario_json(rep), report.scenario_table(rep))
    if args.ledger_out:
        rep.ledger.save(args.ledger_out)
    if args.figures:
        from .figures import render

        for p in render(rep, args.figures):
            _err(f"wrote {p}")
    return EXIT_ALERT if rep.alerts else EXIT_OK


def cmd_check_demand(args: argparse.Namespace) -> int:
    try:
        s = fixture.load(args.path)
        modes = resolve_modes(s.modes, args)
        if not s.demands:
            raise fixture.FixtureError("fixture declares no demand")
        name = args.demand or next(iter(s.demands))
        if name not in s.demands:
            raise fixture.FixtureError(f"no demand named {name!r}")
        d = s.demands[name]
        rep = validate_demand(d.form.requester, d, s.registry, s.initial_kb(), modes)
    except OSError as exc:
        _err(f"cannot read {args.path}: {exc.strerror or exc}")
        return EXIT_INPUT
    except (fixture.FixtureError, SchengenError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    _emit(args, report.validation_json(rep), report.validation_table(rep))
    return EXIT_OK if rep.passed else EXIT_INVALID


def cmd_ledger_audit(args: argparse.Namespace) -> int:
    try:
        with open(args.path, "rb") as fh:
            data = fh.read()
        rep = audit_bytes(data)
    except OSError as exc:
        _err(f"cannot read {args.path}: {exc.strerror or exc}")
        return EXIT_INPUT
    except LedgerFormatError as exc:
        _err(f"{args.path}: {exc}")
        return EXIT_INPUT
    _emit(args, {"kind": "audit-report", "version": report.SCHEMA_VERSION, **report.audit_json(rep)}, f"{rep}\n")
    return EXIT_OK if rep.ok else EXIT_BROKEN


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")

    modes = argparse.ArgumentParser(add_help=False)
    modes.add_argument("--passport-rule", dest="passport_rule", choices=("prose", "paper"), default=None)
    modes.add_argument("--itinerary-rule", dest="itinerary_rule", choices=("strict", "relaxed"), default=None)
    modes.add_argument(
        "--record-controls", dest="record_controls", action=argparse.BooleanOptionalAction, default=None
    )

    p = argparse.ArgumentParser(prog="cyberlogic", description="Attestation logic, ledger and Schengen-visa protocol.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse-formula", parents=[common], help="parse and re-print a formula")
    sp.add_argument("text")
    sp.set_defaults(func=cmd_parse_formula)

    sp = sub.add_parser("run-scenario", parents=[common, modes], help="replay a scenario fixture")
    sp.add_argument("scenario", help="fixture path, or 'jon-snow' for the built-in scenario")
    sp.add_argument("--ledger-out", metavar="PATH", help="save the resulting ledger")
    sp.add_argument("--figures", metavar="DIR", help="render timeline and accountability PNGs")
    sp.add_argument("--without", metavar="LABEL", help="drop the fact steps carrying this label")
    sp.set_defaults(func=cmd_run_scenario)

    sp = sub.add_parser("check-demand", parents=[common, modes], help="validate a demand against the seven requirements")
    sp.add_argument("path")
    sp.add_argument("--demand", metavar="NAME", help="demand to check (default: the first one)")
    sp.set_defaults(func=cmd_check_demand)

    sp = sub.add_parser("ledger-audit", parents=[common], help="check a ledger file's hash chain")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_ledger_audit)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # a bad CYBERLOGIC_MODE preset
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
