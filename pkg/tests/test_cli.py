import json
import math

import pytest

from varest.cli import main

TOY_CSV = "y,x\n1,2\n2,4\n3,7\n4,8\n"
PROPORTIONAL_CSV = "y,x\n1,2\n2,4\n3,6\n4,8\n"
SIX_UNITS_CSV = "y,x\n2,1\n4,3\n5,4\n7,6\n8,7\n10,9\n"


@pytest.fixture
def toy_csv(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text(TOY_CSV)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


def test_theory_table_from_bundled_params(capsys):
    rows = run_json(capsys, "theory-table", "--params", "apple104")
    assert [r["estimator"] for r in rows] == ["S2_y", "S2_R", "S2_Reg", "t_k", "t_s", "t"]
    assert rows[0]["pre"] == 100.0
    assert rows[1]["pre"] == pytest.approx(296.071, rel=1e-3)
    assert all(r["source"] == "theory" for r in rows)


def test_theory_table_from_csv(capsys, toy_csv):
    rows = run_json(capsys, "theory-table", "--data", toy_csv, "--n", "2")
    assert len(rows) == 6
    assert rows[0]["pre"] == 100.0
    assert rows[0]["mse"] == pytest.approx(0.888889, rel=1e-5)
    assert all(math.isfinite(r["mse"]) and r["mse"] > 0 for r in rows)


def test_theory_table_options(capsys, toy_csv):
    base = run_json(capsys, "theory-table", "--data", toy_csv, "--n", "2")
    fpc = run_json(capsys, "theory-table", "--data", toy_csv, "--n", "2", "--fpc")
    assert fpc[0]["mse"] == pytest.approx(base[0]["mse"] / 2)

    rows = run_json(
        capsys,
        "theory-table",
        "--params",
        "apple104",
        "--estimators",
        "unbiased,generalized",
        "--preset",
        "paper-t-bx",
    )
    assert [r["estimator"] for r in rows] == ["S2_y", "t"]
    assert rows[1]["pre"] < 300


def test_table_output(capsys):
    code, out, _ = run(capsys, "theory-table", "--params", "apple104")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["estimator", "bias", "mse", "pre", "theta", "source"]
    assert lines[3].split()[0] == "S2_R"


def test_input_source_is_required(capsys, toy_csv):
    code, _, err = run(capsys, "theory-table", "--n", "2")
    assert code == 2
    assert "exactly one of --data and --params" in err

    code, _, _ = run(capsys, "theory-table", "--data", toy_csv, "--params", "apple104")
    assert code == 2


def test_input_errors(capsys, tmp_path, toy_csv):
    code, _, err = run(capsys, "theory-table", "--data", str(tmp_path / "nope.csv"), "--n", "2")
    assert code == 2
    assert err.startswith("varest: error:")

    code, _, err = run(capsys, "theory-table", "--data", toy_csv)
    assert code == 2
    assert "--n is required" in err

    code, _, err = run(capsys, "simulate", "--params", "apple104", "--n", "20")
    assert code == 2

    code, _, _ = run(capsys, "theory-table", "--data", toy_csv, "--n", "9")
    assert code == 2

    code, _, _ = run(capsys, "frobnicate")
    assert code == 2

    latin1 = tmp_path / "latin1.params"
    latin1.write_bytes(b"N = 4\n\xff = 3\n")
    code, _, err = run(capsys, "theory-table", "--params", str(latin1))
    assert code == 2
    assert "line 2" in err


def test_numeric_error_exit_code(capsys, tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text("y,x\n5,1\n5,2\n5,3\n")
    code, _, err = run(capsys, "theory-table", "--data", str(path), "--n", "2")
    assert code == 3
    assert "zero variance" in err


def test_simulation_is_deterministic_across_jobs(capsys, toy_csv):
    args = ["simulate", "--data", toy_csv, "--n", "3", "--reps", "500", "--seed", "5"]
    serial = run_json(capsys, *args, "--jobs", "1")
    parallel = run_json(capsys, *args, "--jobs", "2")
    assert serial == parallel
    sources = [r["source"] for r in serial]
    assert sources.count("theory") == 12
    assert sources.count("simulation") == 6


def test_enumerate(capsys, tmp_path):
    path = tmp_path / "six.csv"
    path.write_text(SIX_UNITS_CSV)
    rows = run_json(
        capsys, "enumerate", "--data", str(path), "--n", "3", "--estimators", "unbiased,product"
    )
    exact = [r for r in rows if r["source"] == "enumeration"]
    assert [r["sample_space_size"] for r in exact] == [20, 20]
    assert exact[0]["bias"] == pytest.approx(0, abs=1e-9)
    assert exact[0]["pre"] == 100.0

    code, _, err = run(
        capsys, "enumerate", "--data", str(path), "--n", "3", "--limit", "10"
    )
    assert code == 2
    assert "enumeration limit" in err

    same = run_json(
        capsys,
        "simulate",
        "--exact",
        "--data",
        str(path),
        "--n",
        "3",
        "--estimators",
        "unbiased,product",
    )
    assert same == rows


def test_estimate(capsys, toy_csv):
    rows = run_json(capsys, "estimate", "--data", toy_csv, "--indices", "1,4")
    values = {r["estimator"]: r["estimate"] for r in rows}
    assert values["S2_y"] == 4.5
    assert values["S2_R"] == pytest.approx(4.5 * 22.75 / 3 / 18)
    # the sample regression coefficient is undefined for two units
    assert values["S2_Reg"] is None

    rows = run_json(capsys, "estimate", "--data", toy_csv, "--n", "3", "--seed", "1")
    assert len(rows) == 6

    code, _, _ = run(capsys, "estimate", "--params", "apple104")
    assert code == 2


def test_moments(capsys):
    rows = run_json(capsys, "moments", "--params", "apple104")
    values = {r["quantity"]: r["value"] for r in rows}
    assert values["N"] == 104
    assert values["theta"] == 0.05
    assert values["mean_y"] is None
    assert values["beta2y_star"] == pytest.approx(15.523)


def test_zero_first_order_mse_leaves_pre_empty(capsys, tmp_path):
    path = tmp_path / "proportional.csv"
    path.write_text(PROPORTIONAL_CSV)

    rows = run_json(capsys, "theory-table", "--data", str(path), "--n", "2")
    assert len(rows) == 6
    assert rows[0]["pre"] == 100.0
    ratio = rows[1]
    assert ratio["estimator"] == "S2_R"
    assert ratio["mse"] == 0.0
    assert ratio["pre"] is None

    rows = run_json(
        capsys,
        "simulate",
        "--data",
        str(path),
        "--n",
        "2",
        "--reps",
        "1000",
        "--estimators",
        "unbiased,ratio",
    )
    simulated = [r for r in rows if r["source"] == "simulation"]
    assert [r["estimator"] for r in simulated] == ["S2_y", "S2_R"]
    # y and x are proportional, so every sample reproduces S2_y exactly
    assert simulated[1]["mse"] == pytest.approx(0, abs=1e-20)


def test_simulate_reports_both_thetas(capsys, toy_csv):
    rows = run_json(
        capsys,
        "enumerate",
        "--data",
        toy_csv,
        "--n",
        "3",
        "--estimators",
        "unbiased,ratio",
    )
    theory = [r for r in rows if r["source"] == "theory"]
    assert [r["estimator"] for r in theory] == ["S2_y", "S2_R", "S2_y", "S2_R"]
    assert [r["theta"] for r in theory] == pytest.approx([1 / 3, 1 / 3, 1 / 12, 1 / 12])
    assert theory[2]["mse"] == pytest.approx(theory[0]["mse"] / 4)
    assert all(r["pre"] == 100.0 for r in theory[::2])

    fpc = run_json(
        capsys,
        "enumerate",
        "--data",
        toy_csv,
        "--n",
        "3",
        "--estimators",
        "unbiased,ratio",
        "--fpc",
    )
    assert fpc == rows


def test_simulate_at_census_has_no_fpc_rows(capsys, toy_csv):
    rows = run_json(
        capsys, "enumerate", "--data", toy_csv, "--n", "4", "--estimators", "unbiased"
    )
    assert [(r["source"], r["theta"]) for r in rows] == [
        ("theory", 0.25),
        ("enumeration", None),
    ]
