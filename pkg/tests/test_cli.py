import json
import subprocess
import sys

import pytest

from svcompose.cli import main

from conftest import spawn_host_process, write_csv


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    store = tmp_path_factory.mktemp("cli-store")
    proc, base = spawn_host_process(store)
    yield base
    proc.terminate()
    proc.wait(timeout=10)


@pytest.fixture(scope="module")
def dataset_csv(tmp_path_factory):
    import random

    rng = random.Random(1)
    rows = [[round(rng.gauss(0, 0.3), 4), round(rng.gauss(0, 0.3), 4), "x"] for _ in range(16)]
    rows += [[round(rng.gauss(2, 0.3), 4), round(rng.gauss(2, 0.3), 4), "y"] for _ in range(12)]
    return str(write_csv(tmp_path_factory.mktemp("data") / "d.csv", rows))


def test_run_finds_solution(served, dataset_csv, tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    code = main([
        "run", "--dataset", dataset_csv, "--endpoint", served, "--portfolio", "a",
        "--timeout", "60", "--eval-timeout", "20", "--seed", "0", "--trace", str(trace),
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "validation 0-1 loss" in out
    assert trace.exists() and trace.read_text().strip()


def test_run_no_solution_exit_3(served, dataset_csv, capsys):
    code = main([
        "run", "--dataset", dataset_csv, "--endpoint", served, "--portfolio", "b",
        "--timeout", "10", "--eval-timeout", "5",
    ])
    assert code == 3
    assert "no solution" in capsys.readouterr().out


def test_run_config_error_exit_4_on_dead_endpoint(dataset_csv, capsys):
    code = main([
        "run", "--dataset", dataset_csv, "--endpoint", "http://127.0.0.1:9",
    ])
    assert code == 4


def test_run_config_error_exit_4_on_bad_dataset(served, tmp_path):
    code = main([
        "run", "--dataset", str(tmp_path / "nope.csv"), "--endpoint", served,
    ])
    assert code == 4


def test_run_config_error_without_endpoints(dataset_csv):
    assert main(["run", "--dataset", dataset_csv]) == 4


def test_report_prints_improving_curve(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    records = [
        {"ts": 10.0, "plan": ["a()"], "score": 0.5, "duration_s": 0.1},
        {"ts": 11.0, "plan": ["b()"], "score": 0.3, "duration_s": 0.1},
        {"ts": 12.0, "plan": ["c()"], "score": 0.8, "duration_s": 0.1},
        {"ts": 13.0, "plan": ["d()"], "score": None, "duration_s": 0.1, "error": "x"},
    ]
    trace.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    assert main(["report", "--trace", str(trace)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("t=")]
    assert len(lines) == 2  # 0.5 then 0.8; 0.3 is not an improvement
    assert "c()" in lines[1]

    assert main(["report", "--trace", str(trace), "--direction", "min"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("t=")]
    assert len(lines) == 2  # 0.5 then 0.3 under minimize


def test_report_missing_trace_is_config_error(tmp_path):
    assert main(["report", "--trace", str(tmp_path / "no-such.jsonl")]) == 4


def test_serve_subprocess_is_probe_reachable(served):
    from svcompose.runtime.client import ServiceClient

    assert ServiceClient(timeout_s=2.0).reachable(served)


def test_console_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "svcompose", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "serve" in out.stdout and "run" in out.stdout and "report" in out.stdout
