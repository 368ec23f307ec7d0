import csv
import io
import json

import pytest
from click.testing import CliRunner

from christoffel.cli import main

ALPHA_DOMAIN = '{"kind": "alpha_ball", "alpha": 1.5}'
SQUARE_DOMAIN = '{"kind": "polygon", "vertices": [[-1,-1],[1,-1],[1,1],[-1,1]]}'


def run(*args):
    return CliRunner().invoke(main, list(args))


def parse_csv(text):
    rows = [r for r in text.splitlines() if not r.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(rows))))


def test_eval_degree_zero_is_area_to_17_digits():
    res = run("eval", "--n", "0", "--point", "0.1,0.2")
    assert res.exit_code == 0
    rows = parse_csv(res.stdout)
    assert rows[0]["lambda"] == "3.1415926535897932e0"


def test_eval_degree_one_half_point():
    res = run("eval", "--n", "1", "--point", "0.5,0")
    assert res.exit_code == 0
    assert parse_csv(res.stdout)[0]["lambda"] == "1.5707963267948966e0"


def test_eval_digits_flag():
    res = run("eval", "--n", "0", "--point", "0,0", "--digits", "30")
    assert res.exit_code == 0
    lam = parse_csv(res.stdout)[0]["lambda"]
    assert lam.startswith("3.1415926535897932384626433832")


def test_eval_degree_range_and_grid_rows():
    res = run("eval", "--n", "1..3", "--domain", SQUARE_DOMAIN,
              "--grid", "box:4")
    assert res.exit_code == 0
    rows = parse_csv(res.stdout)
    assert len(rows) == 3 * 16  # every grid point of the square is a member


def test_eval_warns_for_outside_point():
    res = run("eval", "--n", "0", "--point", "1.5,0")
    assert res.exit_code == 0
    assert "outside" in res.stderr


def test_eval_json_format():
    res = run("eval", "--n", "0", "--point", "0,0", "--format", "json")
    data = json.loads(res.stdout)
    assert data[0]["n"] == 0


def test_config_errors_exit_2():
    assert run("eval", "--n", "40", "--point", "0,0").exit_code == 2
    assert run("eval", "--n", "2", "--domain", '{"kind": "bogus"}',
               "--point", "0,0").exit_code == 2
    assert run("eval", "--n", "2").exit_code == 2  # no points
    assert run("eval", "--n", "2", "--point", "zzz").exit_code == 2
    assert run("predict", "--n", "2", "--point", "0,0").exit_code == 2


def test_sections_disk_symmetric_profile(tmp_path):
    out = tmp_path / "prof.csv"
    res = run("sections", "--point", "0.5,0", "--grid-size", "32",
              "--out", str(out))
    assert res.exit_code == 0
    text = out.read_text()
    assert text.startswith("# delta=0.5")
    assert "# beta=1" in text
    rows = parse_csv(text)
    for row in rows:
        assert float(row["l1"]) == pytest.approx(float(row["l2"]), abs=1e-8)


def test_on_boundary_points_exit_3():
    assert run("bounds", "--point", "1,0", "--n", "5").exit_code == 3
    assert run("sections", "--point", "1,0").exit_code == 3


def test_sections_thresholds_diagnostics():
    res = run("sections", "--point", "0.58,0", "--beta", "0.9",
              "--grid-size", "32", "--thresholds", "2,2")
    assert res.exit_code == 0
    assert "ratio_l1_l2_max=" in res.stdout
    assert "conditions_pass=True" in res.stdout


def test_predict_pole_row():
    res = run("predict", "--domain", ALPHA_DOMAIN, "--n", "6",
              "--point", "0,0.8")
    assert res.exit_code == 0
    row = parse_csv(res.stdout)[0]
    delta = float(row["delta"])
    assert float(row["prediction"]) == pytest.approx(
        6**-2 * delta ** (1 / 1.5), rel=1e-12
    )


def test_bounds_row_schema():
    res = run("bounds", "--point", "0.6,0", "--n", "5")
    assert res.exit_code == 0
    rows = parse_csv(res.stdout)
    assert list(rows[0].keys()) == [
        "alpha", "x", "y", "x0", "y0", "delta", "n", "lambda",
        "lower_shape", "upper_shape", "prediction",
        "ratio_lower", "ratio_upper", "ratio_prediction",
    ]
    assert float(rows[0]["delta"]) == pytest.approx(0.4, abs=1e-8)


def test_sweep_deterministic_and_sorted():
    args = ("sweep", "--n", "4..5", "--rays", "2", "--deltas", "2",
            "--grid-size", "32")
    a, b = run(*args), run(*args)
    assert a.exit_code == 0
    assert a.stdout == b.stdout
    rows = parse_csv(a.stdout)
    keys = [(int(r["n"]), float(r["x"]), float(r["y"])) for r in rows]
    assert keys == sorted(keys)


def test_sweep_alpha_prediction_column():
    res = run("sweep", "--domain", ALPHA_DOMAIN, "--n", "8", "--rays", "2",
              "--deltas", "2", "--grid-size", "32")
    assert res.exit_code == 0
    for row in parse_csv(res.stdout):
        assert row["alpha"] == "1.5"
        assert float(row["ratio_prediction"]) > 0


def test_verify_square_passes_and_corruption_fails(tmp_path):
    out = tmp_path / "report.json"
    res = run("verify", "--domain", SQUARE_DOMAIN, "--out", str(out))
    assert res.exit_code == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert {c["name"] for c in report["checks"]} >= {
        "moment_oracle_agreement", "gram_cholesky_residual",
        "degree_monotonicity", "extremal_property", "ellipse_containment",
    }

    res = run("verify", "--domain", SQUARE_DOMAIN, "--corrupt-moments")
    assert res.exit_code == 1
    report = json.loads(res.stdout)
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "moment_oracle_agreement" in failed


def test_verify_disk_default_passes():
    res = run("verify")
    assert res.exit_code == 0
    report = json.loads(res.stdout)
    assert report["passed"] is True
    assert report["domain"] == "disk"
    assert report["precision_bits"] >= 256
