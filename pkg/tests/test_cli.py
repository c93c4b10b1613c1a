from __future__ import annotations

import subprocess
import sys

import pytest

from covmap.cli import main

SIM_YAML = """\
# small deterministic dataset for CLI tests
devices_per_site: 2
period_start: 2021-02-01T00:00:00Z
period_end: 2021-02-03T00:00:00Z
seed: 3
"""


def run_cli(*argv: str):
    return subprocess.run(
        [sys.executable, "-m", "covmap.cli", *argv],
        capture_output=True,
        text=True,
        timeout=120,
    )


@pytest.fixture
def sim_config(tmp_path):
    path = tmp_path / "sim.yaml"
    path.write_text(SIM_YAML, encoding="utf-8")
    return path


class TestSimulateCommand:
    def test_same_seed_byte_identical_files(self, tmp_path, sim_config):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        ra = run_cli("simulate", "--config", str(sim_config), "--seed", "1", "--out", str(a))
        rb = run_cli("simulate", "--config", str(sim_config), "--seed", "1", "--out", str(b))
        assert ra.returncode == 0 and rb.returncode == 0
        assert a.read_bytes() == b.read_bytes()
        assert "wrote" in ra.stdout

    def test_missing_config_named_in_error(self, tmp_path):
        r = run_cli("simulate", "--config", str(tmp_path / "absent.yaml"),
                    "--out", str(tmp_path / "x.jsonl"))
        assert r.returncode != 0
        assert "absent.yaml" in r.stderr


class TestServeCommand:
    def test_missing_config_exits_nonzero(self, tmp_path):
        r = run_cli("serve", "--config", str(tmp_path / "missing.yaml"),
                    "--data", str(tmp_path / "d.jsonl"))
        assert r.returncode != 0
        assert "missing.yaml" in r.stderr


class TestAggregateCommand:
    def test_oracle_check_passes_on_simulator_output(self, tmp_path, sim_config):
        data = tmp_path / "d.jsonl"
        assert run_cli("simulate", "--config", str(sim_config), "--out", str(data)).returncode == 0
        r = run_cli("aggregate", "--data", str(data), "--oracle-check", "--grids", "10")
        assert r.returncode == 0, r.stderr
        assert "oracle check passed" in r.stdout

    def test_summary_without_oracle_flag(self, tmp_path, sim_config):
        data = tmp_path / "d.jsonl"
        run_cli("simulate", "--config", str(sim_config), "--out", str(data))
        r = run_cli("aggregate", "--data", str(data))
        assert r.returncode == 0
        assert "measurements" in r.stdout

    def test_missing_data_file_exits_nonzero(self, tmp_path):
        # aggregate on a missing dataset: the store would create an empty log,
        # but the oracle check must fail loudly on an empty snapshot
        r = run_cli("aggregate", "--data", str(tmp_path / "nope.jsonl"), "--oracle-check")
        assert r.returncode != 0


class TestMainEntry:
    def test_in_process_invocation(self, tmp_path, sim_config):
        out = tmp_path / "out.jsonl"
        assert main(["simulate", "--config", str(sim_config), "--out", str(out)]) == 0
        assert out.exists()
