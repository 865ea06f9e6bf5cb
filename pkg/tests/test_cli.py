import json
import math

import pytest

from quasispec.cli import main
from quasispec.subordinacy import JL_LOWER, JL_UPPER


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestHolderCommand:
    def test_spec_example_invocation(self, tmp_path):
        out = tmp_path / "h.csv"
        rc = main(["holder", "--potential", "amo", "--lambda", "0.5",
                   "--alpha", "golden", "--theta", "0", "--e", "0.0",
                   "--eps-min", "1e-4", "--eps-max", "1e-1", "--points", "16",
                   "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["E", "eps", "w", "im_M"]
        assert len(rows) == 16
        manifest = json.loads((tmp_path / "h.csv.manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert manifest["params"]["points"] == 16
        assert "fitted_slope" in manifest["params"]
        assert manifest["precision_mode"] in ("extended", "double")


class TestSubordinacyCommand:
    def test_bracket_rows(self, tmp_path):
        out = tmp_path / "s.csv"
        rc = main(["subordinacy", "--potential", "amo", "--lambda", "0.5",
                   "--alpha", "golden", "--e", "0.0", "--k-max", "300",
                   "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["k", "norm_P", "det_P", "eps_k", "psi_mplus",
                          "ratio_jl", "ratio_blabl"]
        for row in rows:
            rj = float(row[5])
            assert JL_LOWER * 0.95 < rj < JL_UPPER * 1.05


class TestTxOracleCommand:
    def test_oracle_agreement(self, tmp_path):
        out = tmp_path / "tx.csv"
        rc = main(["tx-oracle", "--k", "200", "--r", "3", "--t-hat", "0.7",
                   "--theta", "0.11", "--alpha", "golden", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert float(rows[0][-1]) < 1e-9


class TestOtherCommands:
    def test_lyapunov_free(self, tmp_path):
        out = tmp_path / "l.csv"
        rc = main(["lyapunov", "--potential", "zero", "--e", "2.5",
                   "--n", "2000", "--x-grid", "4", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert abs(float(rows[0][1]) - math.log(2)) < 0.01

    def test_ids_json_format(self, tmp_path):
        out = tmp_path / "ids.json"
        rc = main(["ids", "--potential", "zero", "--e-min", "-3", "--e-max", "3",
                   "--e-points", "5", "--size", "1000", "--format", "json",
                   "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert len(data) == 5
        assert data[0]["N"] == 0.0 and data[-1]["N"] == 1.0

    def test_resonances(self, tmp_path):
        out = tmp_path / "r.csv"
        rc = main(["resonances", "--alpha", "golden", "--theta", "0",
                   "--eps0", "1.0", "--k-max", "100", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert rows[0][1] == "0"

    def test_reduce(self, tmp_path):
        out = tmp_path / "red.csv"
        rc = main(["reduce", "--potential", "trigpoly",
                   "--coeffs", "0:3:0,1:-0.5:0,-1:-0.5:0", "--band", "0.05",
                   "--w-norm", "1e-3", "--seed", "5", "--out", str(out)])
        assert rc == 0
        manifest = json.loads((tmp_path / "red.csv.manifest.json").read_text())
        assert manifest["params"]["residual"] < 1e-9

    def test_gaps(self, tmp_path):
        out = tmp_path / "g.csv"
        rc = main(["gaps", "--potential", "amo", "--lambda", "0.5",
                   "--e-min", "-3.2", "--e-max", "3.2", "--e-points", "3201",
                   "--size", "2000", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) >= 2

    def test_mfunction_ladder(self, tmp_path):
        out = tmp_path / "m.csv"
        rc = main(["mfunction", "--potential", "amo", "--lambda", "0.5",
                   "--e", "0.0", "--eps-min", "1e-3", "--eps-max", "1e-1",
                   "--points", "5", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert all(float(r[2]) > 0 and float(r[4]) > 0 for r in rows)

    def test_gnuplot_stub(self, tmp_path):
        out = tmp_path / "l.csv"
        rc = main(["lyapunov", "--potential", "zero", "--e", "2.0", "--n", "200",
                   "--x-grid", "2", "--out", str(out), "--gnuplot-stub"])
        assert rc == 0
        stub = (tmp_path / "l.csv.gp").read_text()
        assert "plot" in stub and "l.csv" in stub

    def test_threads_flag_same_output(self, tmp_path):
        args = ["lyapunov", "--potential", "amo", "--lambda", "0.5",
                "--e-min", "-1", "--e-max", "1", "--e-points", "5",
                "--n", "500", "--x-grid", "4"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a), "--threads", "1"]) == 0
        assert main(args + ["--out", str(b), "--threads", "4"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_validation_error_is_2(self, tmp_path):
        rc = main(["holder", "--alpha", "0.5", "--e", "0.0",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_deep_eps_needs_override(self, tmp_path):
        rc = main(["mfunction", "--potential", "amo", "--lambda", "0.5",
                   "--e", "0.0", "--eps-min", "1e-8", "--eps-max", "1e-7",
                   "--points", "3", "--out", str(tmp_path / "m.csv")])
        assert rc == 2

    def test_numerical_failure_is_3(self, tmp_path):
        out = tmp_path / "m.csv"
        rc = main(["mfunction", "--potential", "amo", "--lambda", "0.5",
                   "--e", "0.0", "--eps-min", "1e-8", "--eps-max", "1e-7",
                   "--points", "3", "--depth-cap", "1000", "--allow-deep",
                   "--out", str(out)])
        assert rc == 3
        manifest = json.loads((tmp_path / "m.csv.manifest.json").read_text())
        assert manifest["status"] == "error"
        assert manifest["error"]["code"] == "NoConvergence"


class TestDeterminism:
    def test_byte_identical_repeat(self, tmp_path):
        args = ["subordinacy", "--potential", "amo", "--lambda", "0.5",
                "--e", "0.0", "--k-max", "100"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
