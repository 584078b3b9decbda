import csv
import random
import socket
import subprocess
import sys
import time

import pytest

from svcompose.automl.learners import build_registry
from svcompose.runtime.client import ServiceClient
from svcompose.runtime.server import ServiceHost


@pytest.fixture
def client():
    return ServiceClient(timeout_s=20.0)


@pytest.fixture
def host(tmp_path):
    """In-thread service host with the toy portfolio and a fresh store."""
    h = ServiceHost(build_registry(), tmp_path / "store", port=0)
    h.start()
    yield h
    h.stop()


@pytest.fixture
def second_host(tmp_path):
    h = ServiceHost(build_registry(), tmp_path / "store2", port=0)
    h.start()
    yield h
    h.stop()


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def spawn_host_process(store, port=None, disable=()):
    """A real `svcompose serve` subprocess; caller terminates it."""
    port = port or free_port()
    cmd = [sys.executable, "-m", "svcompose", "serve", "--port", str(port), "--store", str(store)]
    for name in disable:
        cmd += ["--disable", name]
    proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    base = f"http://127.0.0.1:{port}"
    probe = ServiceClient(timeout_s=2.0)
    for _ in range(100):
        if probe.reachable(base):
            return proc, base
        if proc.poll() is not None:
            raise RuntimeError("serve process exited early")
        time.sleep(0.05)
    proc.terminate()
    raise RuntimeError("serve process did not become reachable")


def write_csv(path, rows, header=("f1", "f2", "label")):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@pytest.fixture
def two_blob_csv(tmp_path):
    """Two well-separated Gaussian blobs, 20 'x' vs 14 'y' instances."""
    rng = random.Random(0)
    rows = [[round(rng.gauss(0, 0.4), 4), round(rng.gauss(0, 0.4), 4), "x"] for _ in range(20)]
    rows += [[round(rng.gauss(2, 0.4), 4), round(rng.gauss(2, 0.4), 4), "y"] for _ in range(14)]
    return write_csv(tmp_path / "blobs.csv", rows)
