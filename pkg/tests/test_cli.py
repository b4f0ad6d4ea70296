import csv
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from spt_decomp.cli import main
from spt_decomp.market import ingest_caps_csv

FAST = "[portfolio]\ngenerator = entropy\n[experiment]\nrefinements = 32,64,128\n"


def write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestSimulate:
    def test_default_demo(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path)]) == 0
        with open(tmp_path / "market_seed0.csv", "rb") as fh:
            m = ingest_caps_csv(fh)
        assert m.caps.shape == (5, 253)
        assert (tmp_path / "config.ini").exists()

    def test_zero_vol_is_constant(self, tmp_path):
        cfg = write_config(tmp_path, "[market]\nn = 3\nvariance = 0\ninitial_caps = 3,2,1\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        with open(tmp_path / "o" / "market_seed0.csv", "rb") as fh:
            m = ingest_caps_csv(fh)
        assert np.all(m.caps == np.array([[3.0], [2.0], [1.0]]))

    def test_reruns_are_identical(self, tmp_path):
        for d in ("a", "b"):
            assert main(["simulate", "--out", str(tmp_path / d), "--seed", "0,5"]) == 0
        assert files(tmp_path / "a") == files(tmp_path / "b")

    def test_seeds_differ(self, tmp_path):
        main(["simulate", "--out", str(tmp_path), "--seed", "0,1"])
        assert (tmp_path / "market_seed0.csv").read_bytes() != (tmp_path / "market_seed1.csv").read_bytes()

    def test_demo_runtime(self, tmp_path):
        start = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "spt_decomp.cli", "simulate", "--out", str(tmp_path)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert time.perf_counter() - start < 1.0


class TestDecompose:
    def test_entropy_schema(self, tmp_path):
        assert main(["decompose", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "decomposition_seed0.json").read_text())
        assert set(doc) == {"meta", "paths", "grid", "diagnostics"}
        assert {"drift", "generator_log_change"} <= set(doc["paths"])
        header = next(csv.reader(open(tmp_path / "decomposition_seed0.csv")))
        assert header == ["time", "rel", "structural", "trading", "drift", "generator_log_change"]

    def test_market_portfolio_trading_is_small(self, tmp_path):
        cfg = write_config(tmp_path, "[portfolio]\nrule = market\n")
        assert main(["decompose", "--config", cfg, "--out", str(tmp_path / "o"), "--format", "json"]) == 0
        doc = json.loads((tmp_path / "o" / "decomposition_seed0.json").read_text())
        assert doc["diagnostics"]["sup_abs_trading"] < 1e-3
        assert not (tmp_path / "o" / "decomposition_seed0.csv").exists()

    def test_csv_input_has_same_schema(self, tmp_path):
        main(["simulate", "--out", str(tmp_path / "sim")])
        cfg = write_config(
            tmp_path,
            "[market]\nsource = csv\ncsv = sim/market_seed0.csv\n[portfolio]\ngenerator = entropy\n",
        )
        assert main(["decompose", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
        assert main(["decompose", "--out", str(tmp_path / "b")]) == 0
        ingested = json.loads((tmp_path / "a" / "decomposition.json").read_text())
        simulated = json.loads((tmp_path / "b" / "decomposition_seed0.json").read_text())
        assert set(ingested["paths"]) == set(simulated["paths"])
        assert set(ingested["diagnostics"]) == set(simulated["diagnostics"])
        np.testing.assert_allclose(
            ingested["paths"]["trading"], simulated["paths"]["trading"], rtol=1e-9, atol=1e-15
        )

    def test_missing_csv_is_invalid(self, tmp_path):
        cfg = write_config(tmp_path, "[market]\nsource = csv\ncsv = nope.csv\n[portfolio]\nrule = equal\n")
        assert main(["decompose", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_bad_csv_is_invalid(self, tmp_path):
        (tmp_path / "caps.csv").write_text("date,ticker,cap\n2000-01-03,A,-1\n")
        cfg = write_config(tmp_path, "[market]\nsource = csv\ncsv = caps.csv\n[portfolio]\nrule = equal\n")
        assert main(["decompose", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_bankrupt_portfolio_is_numerical_failure(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "[market]\nn = 2\nvariance = 4\ninitial_caps = 1,1\n[portfolio]\nrule = constant:-30,31\n",
        )
        assert main(["decompose", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


class TestConvergence:
    def test_entropy_checks_pass(self, tmp_path):
        cfg = write_config(tmp_path, FAST + "seeds = 0,1,2,3,4,5,6,7\n")
        assert main(["convergence", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        summary = json.loads((tmp_path / "o" / "convergence_summary.json").read_text())
        assert summary["checks"]["r1_median"] == "decreasing"
        assert summary["checks"]["r2_median"] == "decreasing"
        rows = list(csv.reader(open(tmp_path / "o" / "convergence_prop2.csv")))
        assert rows[0] == ["seed", "steps", "r1", "r2"] and len(rows) == 1 + 8 * 3

    def test_geometric_mean_structural_is_exact(self, tmp_path):
        cfg = write_config(tmp_path, "[portfolio]\ngenerator = geom\n[experiment]\nrefinements = 32,64,128\nseeds = 0,1,2\n")
        main(["convergence", "--config", cfg, "--out", str(tmp_path / "o")])
        summary = json.loads((tmp_path / "o" / "convergence_summary.json").read_text())
        assert summary["checks"]["r1_median"] == "exact"

    def test_non_generator_rule_writes_trading_table(self, tmp_path):
        cfg = write_config(tmp_path, "[portfolio]\nrule = market\n[experiment]\nrefinements = 32,64,128\nseeds = 0,1\n")
        main(["convergence", "--config", cfg, "--out", str(tmp_path / "o")])
        assert (tmp_path / "o" / "convergence_trading.csv").exists()

    def test_thread_count_does_not_change_output(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, FAST + "seeds = 0,1,2,3\n")
        for d, threads in (("one", "1"), ("four", "4")):
            monkeypatch.setenv("SPT_DECOMP_THREADS", threads)
            main(["convergence", "--config", cfg, "--out", str(tmp_path / d)])
        assert files(tmp_path / "one") == files(tmp_path / "four")

    def test_simulate_only_market_required(self, tmp_path):
        cfg = write_config(tmp_path, "[market]\nsource = csv\ncsv = x.csv\n[portfolio]\nrule = equal\n")
        assert main(["convergence", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


class TestLeapfrog:
    def test_default(self, tmp_path, capsys):
        assert main(["leapfrog", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "leapfrog.json").read_text())
        assert doc["diagnostics"]["trading_share"] >= 0.95
        assert abs(doc["diagnostics"]["structural_share"]) <= 0.05
        assert "top-2 index" in capsys.readouterr().out

    @pytest.mark.parametrize("m", [0, 4, 7])
    def test_index_size_checked(self, tmp_path, m):
        cfg = write_config(tmp_path, f"[leapfrog]\ncaps = 400,300,270,100\nm = {m}\n")
        assert main(["leapfrog", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


@pytest.mark.parametrize("command", ["simulate", "decompose", "leapfrog"])
def test_byte_identical_reruns(tmp_path, command):
    for d in ("a", "b"):
        assert main([command, "--out", str(tmp_path / d), "--seed", "3"]) == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_invalid_config_exit_code(tmp_path):
    cfg = write_config(tmp_path, "[experiment]\nrefinements = 10,5\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "none.ini")]) == 2


def test_bad_flag_exits_with_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--seed", "x"])
    assert info.value.code == 2
