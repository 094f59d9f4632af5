"""The published report schema and its validator."""

import pytest

from oplocal.report import ReportInvalid, dump_report, make_report, validate_report


def test_valid_secrecy_report():
    report = make_report(
        "secrecy",
        0,
        {"holds": True, "mode": "exhaustive", "witness": None},
        timestamp=False,
    )
    validate_report(report)


def test_witness_shape_is_checked():
    good = {
        "holds": False,
        "mode": "exhaustive",
        "witness": {"chain": ["g", "id"], "state": 0, "class_lhs": 1, "class_rhs": 0},
    }
    validate_report(make_report("secrecy", 1, good, timestamp=False))
    bad = dict(good, witness={"chain": ["g"], "state": 0})
    with pytest.raises(ReportInvalid):
        validate_report(make_report("secrecy", 1, bad, timestamp=False))


def test_missing_fields_rejected():
    with pytest.raises(ReportInvalid):
        validate_report({"command": "secrecy", "exit_code": 0})
    with pytest.raises(ReportInvalid):
        validate_report({"command": "unheard-of", "exit_code": 0})
    with pytest.raises(ReportInvalid):
        validate_report({"exit_code": 0})


def test_type_mismatches_rejected():
    report = make_report(
        "secrecy", 0, {"holds": "yes", "mode": "exhaustive", "witness": None},
        timestamp=False,
    )
    with pytest.raises(ReportInvalid):
        validate_report(report)
    report = make_report("orbit", 0, {"state": True, "orbit": []}, timestamp=False)
    with pytest.raises(ReportInvalid):
        validate_report(report)


def test_dump_is_stable():
    report = make_report("orbit", 0, {"state": 1, "orbit": [1, 2]}, timestamp=False)
    assert dump_report(report) == dump_report(dict(reversed(list(report.items()))))
