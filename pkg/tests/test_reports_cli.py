import csv
import json

import numpy as np
import pytest

from cclab import cli
from cclab.reports import VerificationReport, emit_csv, reports_to_json


def _report(**kw):
    base = dict(claim="c", anchor="an anchor", passed=True, min_value=0.0, max_value=1.0)
    base.update(kw)
    return VerificationReport(**base)


def test_report_requires_anchor():
    with pytest.raises(ValueError):
        _report(anchor="")


def test_report_json_shape(tmp_path):
    r = _report(worst={"x": np.arange(3.0)}, details={"flag": np.bool_(True), "n": np.int64(3)})
    path = tmp_path / "r.json"
    reports_to_json([r], path)
    data = json.loads(path.read_text())
    assert data[0]["pass"] is True and "passed" not in data[0]
    assert data[0]["worst"]["x"] == [0.0, 1.0, 2.0]
    assert {"claim", "anchor", "tolerance", "polarity", "n_samples", "elapsed_ms"} <= set(data[0])


def test_non_finite_values_serialize():
    data = json.loads(reports_to_json([_report(min_value=float("nan"))]))
    assert data[0]["min_value"] == "nan"


def test_summary_line():
    assert _report().summary().startswith("PASS c:")
    assert _report(passed=False).summary().startswith("FAIL c:")


def test_emit_csv_header_only_and_precision(tmp_path):
    path = tmp_path / "e.csv"
    emit_csv([], ["a", "b"], path)
    assert path.read_text() == "a,b\n"
    emit_csv([{"a": 0.1, "b": 1 / 3}], ["a", "b"], path)
    row = list(csv.reader(path.open()))[1]
    assert [float(v) for v in row] == [0.1, 1 / 3]
    assert row[1] == format(1 / 3, ".17g")


def _config(argv):
    return cli.config_from_args(cli.build_parser().parse_args(argv))


def test_seed_defaults_and_env(monkeypatch):
    monkeypatch.delenv("CCLAB_SEED", raising=False)
    assert _config(["verify", "sphere"]).seed == 42
    monkeypatch.setenv("CCLAB_SEED", "11")
    assert _config(["verify", "sphere"]).seed == 11
    assert _config(["verify", "sphere", "--seed", "3"]).seed == 3
    monkeypatch.setenv("CCLAB_SEED", "eleven")
    assert cli.main(["verify", "sphere", "--quick"]) == 2


def test_config_parsing():
    cfg = _config(["verify", "sphere", "--grid", "4x3x2", "--threads", "2"])
    assert cfg.grid == (4, 3, 2) and cfg.threads == 2
    assert _config(["verify", "cross", "--claim", "a3s"]).claim == "A3s"
    assert _config(["verify", "product", "--factors", "S2, R1"]).factors == ("S2", "R1")
    assert _config(["verify", "dasm", "--scenarios", "7"]).samples == 7
    assert _config(["counterexample", "log-product", "--dim", "2"]).dim == 2


@pytest.mark.parametrize("argv", [
    ["verify", "cross", "--manifold", "T2"],
    ["verify", "cross", "--cost", "log"],
    ["verify", "sphere", "--grid", "4x4"],
    ["verify", "product", "--factors", "S2"],
    ["verify", "submersion", "--total", "S3", "--base", "CP2"],
    ["verify", "bogus"],
    ["counterexample", "log-product", "--dim", "0"],
    ["verify", "sphere", "--quick", "--csv", "/nonexistent/dir/out.csv"],
])
def test_configuration_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0


def test_sphere_quick_json(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert cli.main(["verify", "sphere", "--quick", "--json", str(path)]) == 0
    claims = {r["claim"] for r in json.loads(path.read_text())}
    assert {"a_nonneg", "D_negative", "P_positive", "closedform_vs_fd", "equality_cases"} <= claims
    assert all(r["anchor"] for r in json.loads(path.read_text()))


def test_sphere_csv_columns_and_order(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert cli.main(["verify", "sphere", "--grid", "3x2x2", "--samples", "5", "--csv", str(path)]) == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["rho", "theta", "psi", "w_perp", "negHddot", "P", "D", "fd", "abs_err"]
    assert len(rows) == 1 + 3 * 2 * 2 * 2
    keys = [tuple(float(v) for v in r[:4]) for r in rows[1:]]
    assert keys == sorted(keys)


def test_csv_determinism_across_threads(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["verify", "dasm", "--scenarios", "3", "--threads", "1", "--csv", str(a)])
    cli.main(["verify", "dasm", "--scenarios", "3", "--threads", "3", "--csv", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_failing_claim_exits_1(capsys):
    assert cli.main(["verify", "cross", "--manifold", "S2xS2", "--claim", "a3s", "--quick",
                     "--samples", "3"]) == 1
    assert "FAIL A3s:S2xS2" in capsys.readouterr().out


def test_counterexample_exit_0_with_violation_polarity(tmp_path, capsys):
    path = tmp_path / "c.json"
    assert cli.main(["counterexample", "log-product", "--dim", "2", "--samples", "3",
                     "--json", str(path)]) == 0
    data = {r["claim"].split(":")[0]: r for r in json.loads(path.read_text())}
    assert data["negative_null_pair"]["pass"] is True
    assert data["negative_null_pair"]["polarity"] == "violation"
    assert data["negative_null_pair"]["max_value"] <= -1e-3


def test_product_and_submersion_quick(capsys):
    assert cli.main(["verify", "product", "--quick", "--samples", "5"]) == 0
    assert cli.main(["verify", "submersion", "--quick", "--samples", "4"]) == 0
