"""Command line surface: exit codes, report schema, determinism, renderers."""

import json
from pathlib import Path

import pytest

from oplocal.cli import main
from oplocal.report import validate_report

FIXTURE = str(Path(__file__).parent / "fixtures" / "threebit.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    report = json.loads(out) if out.strip() else None
    if report is not None:
        validate_report(report)
    return code, report


def test_closure_command(capsys):
    code, report = run(
        capsys, "closure", "--ops", "not1,not2", "--elements", "--no-timestamp", FIXTURE
    )
    assert code == 0
    assert report["size"] == 4
    assert "id" in report["elements"]


def test_closure_cap_exceeded_exit_code(capsys):
    code, report = run(
        capsys, "closure", "--ops", "not1,not2", "--cap", "3", FIXTURE
    )
    assert code == 3
    assert report is None


def test_orbit_command(capsys):
    code, report = run(
        capsys, "orbit", "--state", "0", "--ops", "a", "--no-timestamp", FIXTURE
    )
    assert code == 0
    assert report["orbit"] == [0, 4]


def test_commute_failure_carries_witness(capsys):
    code, report = run(capsys, "commute", "--ta", "a", "--tb", "b", FIXTURE)
    assert code == 1
    w = report["witness"]
    assert w["state"] == 0
    assert (w["fg_state"], w["gf_state"]) == (6, 7)


def test_secrecy_holds_and_fails(capsys):
    code, report = run(
        capsys, "secrecy", "--secret", "not1", "--agent", "bob", FIXTURE
    )
    assert code == 0 and report["holds"]
    code, report = run(
        capsys, "secrecy", "--secret", "not2", "--agent", "bob", FIXTURE
    )
    assert code == 1
    assert report["witness"]["state"] == 0


def test_extended_secrecy_command(capsys):
    code, report = run(
        capsys,
        "extended-secrecy", "--secret", "not1", "--agent", "bob", "--f", "swap12",
        FIXTURE,
    )
    assert code == 1 and not report["holds"]
    code, report = run(
        capsys,
        "extended-secrecy", "--secret", "not1", "--agent", "bob", "--f", "not3",
        FIXTURE,
    )
    assert code == 0 and report["holds"]


def test_robustness_command(capsys):
    code, report = run(
        capsys,
        "robustness", "--secret", "not1", "--agent", "bob", "--n", "3",
        "--no-timestamp", FIXTURE,
    )
    assert code == 0
    assert report["mode"] == "exhaustive"
    assert report["chains_checked"] > 0


def test_robustness_requires_base(capsys):
    code, report = run(
        capsys, "robustness", "--secret", "not2", "--agent", "bob", FIXTURE
    )
    assert code == 2
    assert report is None


def test_terminality_command(capsys):
    code, report = run(
        capsys,
        "terminality", "--ops", "not3", "--perspective", "bits:1,2", FIXTURE,
    )
    assert code == 0 and report["holds"]
    code, report = run(
        capsys, "terminality", "--ops", "not1", "--perspective", "bits:1", FIXTURE
    )
    assert code == 1 and report["witness"]["state"] == 0


def test_derive_command(capsys, tmp_path):
    dot = tmp_path / "gen.dot"
    code, report = run(
        capsys,
        "derive", "--ta", "not1", "--tb", "not2", "--dot", str(dot), FIXTURE,
    )
    assert code == 0
    assert report["mutually_secret"] is True
    assert report["partitions"]["A"]["num_classes"] == 4
    text = dot.read_text()
    assert text.startswith("digraph") and "fillcolor" in text


def test_derive_noncommuting_exit(capsys):
    code, report = run(capsys, "derive", "--ta", "a", "--tb", "b", FIXTURE)
    assert code == 1
    assert report["mutually_secret"] is False


def test_derive_general_command(capsys):
    code, report = run(
        capsys,
        "derive", "--general", "--secret", "not1", "--tb", "swap12", FIXTURE,
    )
    assert code == 0
    assert report["method"] == "fixpoint_general"
    assert report["partitions"]["result"]["num_classes"] == 2


def test_perceived_commute_command(capsys):
    code, report = run(
        capsys,
        "perceived-commute", "--ta", "a", "--tb", "b",
        "--perspective", "bits:1,2", FIXTURE,
    )
    assert code == 0
    assert report["holds"] and not report["globally_commute"]


def test_gpt_check_named_boxes(capsys):
    code, report = run(capsys, "gpt-check", "--box", "pr_box")
    assert code == 0 and report["holds"] and report["traditional_ns"]
    code, report = run(capsys, "gpt-check", "--box", "swap")
    assert code == 1 and not report["holds"] and not report["traditional_ns"]
    code, report = run(capsys, "gpt-check", "--box", "xor_leak")
    assert code == 1


def test_ns_equivalence_command(capsys):
    code, report = run(
        capsys, "ns-equivalence", "--trials", "20", "--seed", "42", "--no-timestamp"
    )
    assert code == 0
    assert report["agreements"] == report["total"] == 23


def test_signal_time_command(capsys, tmp_path):
    spec = {
        "space": {"bits": 9},
        "transforms": {
            "flip2": "xor_mask:128",
            "step": "ca_rule150",
        },
        "agents": {"a5": {"perspective": "bits:5", "ops": ["xor16"]}},
        "dynamics": {"evo": "step"},
    }
    spec["transforms"]["xor16"] = "xor_mask:16"
    path = tmp_path / "nine.json"
    path.write_text(json.dumps(spec))
    code, report = run(
        capsys,
        "signal-time", "--ops", "flip2", "--agent", "a5", "--dynamics", "evo",
        "--t-max", "8", str(path),
    )
    assert code == 0
    assert report["first_signalling_time"] == 3


def test_localize_graph_with_svg(capsys, tmp_path):
    graph = tmp_path / "graph.json"
    graph.write_text(json.dumps({"nodes": 3, "edges": [[0, 1], [1, 2]]}))
    truth = tmp_path / "truth.json"
    truth.write_text(json.dumps([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    svg = tmp_path / "out.svg"
    code, report = run(
        capsys,
        "localize", "--graph", str(graph), "--dim", "1",
        "--truth", str(truth), "--svg", str(svg), "--no-timestamp",
    )
    assert code == 0
    assert report["rmse"] < 1e-6
    assert svg.exists() and svg.read_text().lstrip().startswith("<?xml")


def test_robustness_with_global_transform(capsys):
    code, report = run(
        capsys,
        "robustness", "--secret", "not1", "--agent", "bob", "--f", "not3",
        "--n", "2", "--no-timestamp", FIXTURE,
    )
    assert code == 0 and report["holds"]


def test_localize_from_theory_file(capsys, tmp_path):
    spec = {
        "space": {"bits": 9},
        "transforms": {
            "flip1": "xor_mask:256",
            "flip3": "xor_mask:64",
            "flip6": "xor_mask:8",
            "step": "ca_rule150",
        },
        "agents": {
            "n1": {"perspective": "bits:1", "ops": ["flip1"]},
            "n3": {"perspective": "bits:3", "ops": ["flip3"]},
            "n6": {"perspective": "bits:6", "ops": ["flip6"]},
        },
        "dynamics": {"evo": "step"},
    }
    path = tmp_path / "line.json"
    path.write_text(json.dumps(spec))
    truth = tmp_path / "truth.json"
    truth.write_text(json.dumps([[1.0], [3.0], [6.0]]))
    code, report = run(
        capsys,
        "localize", "--agents", "n1,n3,n6", "--dynamics", "evo", "--t-max", "8",
        "--dim", "1", "--truth", str(truth), "--no-timestamp", str(path),
    )
    assert code == 0
    assert report["units"] == "ticks"
    assert report["rmse"] < 1e-6
    assert [c["node"] for c in report["coordinates"]] == ["n1", "n3", "n6"]


def test_gpt_check_box_from_theory_file(capsys, tmp_path):
    spec = {
        "space": {"bits": 2},
        "boxes": {"mine": "pr_box"},
    }
    path = tmp_path / "boxes.json"
    path.write_text(json.dumps(spec))
    code, report = run(capsys, "gpt-check", "--box", "mine", str(path))
    assert code == 0 and report["holds"]


def test_derive_general_quotient_dot(capsys, tmp_path):
    dot = tmp_path / "quotient.dot"
    code, report = run(
        capsys,
        "derive", "--general", "--secret", "not1", "--tb", "swap12",
        "--dot", str(dot), FIXTURE,
    )
    assert code == 0
    text = dot.read_text()
    assert text.startswith("digraph quotient") and "->" in text


def test_localize_excludes_disconnected(capsys, tmp_path):
    graph = tmp_path / "graph.json"
    graph.write_text(json.dumps({"nodes": 4, "edges": [[0, 1], [0, 2]]}))
    code, report = run(
        capsys, "localize", "--graph", str(graph), "--dim", "1", "--no-timestamp"
    )
    assert code == 0
    assert report["excluded"] == ["3"]
    assert len(report["coordinates"]) == 3


def test_reports_are_deterministic(capsys):
    code1 = main(
        ["secrecy", "--secret", "not1", "--agent", "bob", "--no-timestamp", FIXTURE]
    )
    out1 = capsys.readouterr().out
    code2 = main(
        ["secrecy", "--secret", "not1", "--agent", "bob", "--no-timestamp", FIXTURE]
    )
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical


def test_timestamp_present_by_default(capsys):
    main(["secrecy", "--secret", "not1", "--agent", "bob", FIXTURE])
    report = json.loads(capsys.readouterr().out)
    assert "timestamp" in report


def test_usage_errors_exit_2(capsys):
    code, report = run(capsys, "secrecy", "--secret", "nope", "--agent", "bob", FIXTURE)
    assert code == 2 and report is None
    code, report = run(capsys, "secrecy", "--secret", "not1", "--agent", "bob",
                       "/nonexistent.json")
    assert code == 2


def test_malformed_graph_exits_2(capsys, tmp_path):
    graph = tmp_path / "bad.json"
    graph.write_text(json.dumps({"nodes": 2, "edges": [[0, 9]]}))
    code, report = run(capsys, "localize", "--graph", str(graph), "--dim", "1")
    assert code == 2 and report is None
    graph.write_text(json.dumps({"nodes": 2, "edges": [[0, 1]]}))
    code, report = run(capsys, "localize", "--graph", str(graph), "--dim", "2")
    assert code == 2  # k must stay below the point count


def test_argparse_usage_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["secrecy"])  # missing required flags
    assert err.value.code == 2
