"""Report envelopes: the published schema for every CLI command's JSON output."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any

_WITNESS_SCHEMA = {
    "chain": list,
    "state": int,
    "class_lhs": int,
    "class_rhs": int,
}

#: Required fields (beyond the common envelope) per command.  A value is a
#: type, a tuple of admissible types, or a dict for a nested object that may
#: also be null.
SCHEMAS: dict[str, dict[str, Any]] = {
    "closure": {"size": int, "elements": (list, type(None))},
    "orbit": {"state": int, "orbit": list},
    "commute": {"holds": bool, "witness": (dict, type(None))},
    "secrecy": {"holds": bool, "mode": str, "witness": (_WITNESS_SCHEMA, type(None))},
    "extended-secrecy": {
        "holds": bool,
        "mode": str,
        "witness": (_WITNESS_SCHEMA, type(None)),
    },
    "robustness": {"holds": bool, "mode": str, "chains_checked": (int, type(None))},
    "terminality": {
        "holds": bool,
        "mode": str,
        "witness": (_WITNESS_SCHEMA, type(None)),
    },
    "derive": {
        "method": str,
        "partitions": dict,
        "verified": bool,
        "mutually_secret": (bool, type(None)),
    },
    "perceived-commute": {
        "holds": bool,
        "mode": str,
        "globally_commute": bool,
        "witness": (list, type(None)),
    },
    "gpt-check": {
        "holds": bool,
        "traditional_ns": bool,
        "max_distance": float,
        "eps": float,
    },
    "ns-equivalence": {"total": int, "agreements": int, "entries": list},
    "signal-time": {"first_signalling_time": (int, type(None)), "t_max": int},
    "localize": {
        "coordinates": list,
        "stress": float,
        "method": str,
        "rmse": (float, type(None)),
    },
}

_COMMON = {"command": str, "exit_code": int}


class ReportInvalid(ValueError):
    pass


def _check(value, expected, where: str) -> None:
    if isinstance(expected, tuple):
        for alt in expected:
            try:
                _check(value, alt, where)
                return
            except ReportInvalid:
                continue
        raise ReportInvalid(f"{where}: {value!r} matches none of {expected}")
    if isinstance(expected, dict):
        if not isinstance(value, dict):
            raise ReportInvalid(f"{where}: expected object, got {type(value).__name__}")
        for key, sub in expected.items():
            if key not in value:
                raise ReportInvalid(f"{where}.{key}: missing")
            _check(value[key], sub, f"{where}.{key}")
        return
    if expected is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ReportInvalid(f"{where}: expected number, got {type(value).__name__}")
        return
    if expected is int and isinstance(value, bool):
        raise ReportInvalid(f"{where}: expected int, got bool")
    if not isinstance(value, expected):
        raise ReportInvalid(
            f"{where}: expected {expected.__name__}, got {type(value).__name__}"
        )


def validate_report(report: dict) -> None:
    """Raise ReportInvalid unless the report matches the published schema."""
    for key, expected in _COMMON.items():
        if key not in report:
            raise ReportInvalid(f"missing common field {key!r}")
        _check(report[key], expected, key)
    command = report["command"]
    if command not in SCHEMAS:
        raise ReportInvalid(f"unknown command {command!r}")
    for key, expected in SCHEMAS[command].items():
        if key not in report:
            raise ReportInvalid(f"{command} report missing field {key!r}")
        _check(report[key], expected, key)


def make_report(
    command: str,
    exit_code: int,
    fields: dict,
    timestamp: bool = True,
) -> dict:
    report = {"command": command, "exit_code": exit_code, **fields}
    if timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    return report


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
