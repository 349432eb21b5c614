import io
import subprocess
import sys

import pytest

from resilience_lab.adversary import ATTACKS
from resilience_lab.cli import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, SEED_ENV, main
from resilience_lab.harness import SweepResult, read_trace


def write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def call(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_run_safe_and_live(tmp_path):
    cfg = write(tmp_path, "protocol=ds\nn=4\nf=3\nseed=1\n")
    code, text = call("run", "--config", cfg)
    assert code == EXIT_OK and "SAFE" in text


def test_run_reports_violation(tmp_path):
    cfg = write(tmp_path, "protocol=frz\nn=6\nq=4\nf=6\nseed=7\n")
    code, text = call("run", "--config", cfg)
    assert code == EXIT_MISMATCH and "VIOLATION" in text


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "protocol=internal\nn=4\nf=5\n")
    code, _ = call("run", "--config", cfg)
    assert code == EXIT_CONFIG
    assert "config error: f:" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    code, _ = call("run", "--config", str(tmp_path / "absent.cfg"))
    assert code == EXIT_CONFIG


def test_attack_matches_expectation(tmp_path):
    cfg = write(tmp_path, "protocol=internal\nn=6\nf=4\n")
    code, text = call("attack", "--name", "split_brain", "--config", cfg)
    assert code == EXIT_OK and "as expected" in text


def test_attacks_listing():
    code, text = call("attacks")
    assert code == EXIT_OK
    assert {line.split()[0] for line in text.splitlines()} == set(ATTACKS)


def test_seed_override(tmp_path, monkeypatch):
    cfg = write(tmp_path, "protocol=internal\nn=6\nf=2\nseed=0\n")
    traces = {}
    for seed in ("0", "5"):
        monkeypatch.setenv(SEED_ENV, seed)
        path = tmp_path / f"s{seed}.trace"
        call("run", "--config", cfg, "--trace-out", str(path))
        traces[seed] = read_trace(path)
    assert traces["0"].config["seed"] == "0" and traces["5"].config["seed"] == "5"
    monkeypatch.setenv(SEED_ENV, "x")
    assert call("run", "--config", cfg)[0] == EXIT_CONFIG


def test_sweep_writes_csv(tmp_path):
    cfg = write(tmp_path, "protocol=internal\nn=4\nhorizon=40\n")
    dest = tmp_path / "out.csv"
    code, _ = call("sweep", "--config", cfg, "--f", "0..1", "--seeds", "2", "--out", str(dest))
    result = SweepResult.from_csv(dest.read_text())
    assert code == EXIT_OK and [c.seeds for c in result.cells] == [2, 2]


def test_check_saved_trace(tmp_path):
    cfg = write(tmp_path, "protocol=internal\nn=6\nf=1\n")
    path = str(tmp_path / "run.trace.gz")
    call("run", "--config", cfg, "--trace-out", path)
    assert call("check", "--trace", path, "--u", "16")[0] == EXIT_OK
    # a zero-latency claim cannot be met
    code, text = call("check", "--trace", path, "--u", "0")
    assert code == EXIT_MISMATCH and "VIOLATION" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "resilience_lab", "attacks"], capture_output=True, text=True)
    assert proc.returncode == 0 and "split_brain" in proc.stdout


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["explode"])
