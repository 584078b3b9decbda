"""Regenerate the golden request/response corpus for host conformance.

The corpus is recorded from the primary (Python) host and replayed against any
other host implementation; a conforming host returns identical status codes
and semantically equal bodies (result payloads deep-equal after substituting
the host base URL; error bodies carry a message, with equal step indices).

Entries run in order against a fresh store with `echo` disabled, so instance
ids are deterministic. `$HOST` marks the host's own base URL.
"""

import json
import tempfile
from pathlib import Path

from svcompose.automl.learners import build_registry
from svcompose.runtime.client import ServiceClient
from svcompose.runtime.server import ServiceHost

OUT = Path(__file__).resolve().parent.parent / "frontend" / "conformance" / "corpus.json"

FEATURES = [[0.0, 0.1], [0.2, 0.0], [3.0, 3.2], [3.1, 2.9]]
LABELS = ["lo", "lo", "hi", "hi"]
QUERIES = [[0.1, 0.1], [3.0, 3.0], [-0.4, 0.2]]


def matrix(v):
    return {"type": "matrix", "value": v}


def labels(v):
    return {"type": "labels", "value": v}


def choreography_doc(host):
    steps = [
        {"service": "gnb", "operation": "new", "endpoint": host, "inputs": {}, "output": "handle"},
        {"service": "gnb", "operation": "train", "endpoint": host,
         "inputs": {"handle": {"from": 0, "output": "handle"},
                    "features": {"input": "features"}, "labels": {"input": "labels"}},
         "output": None},
        {"service": "gnb", "operation": "predict", "endpoint": host,
         "inputs": {"handle": {"from": 0, "output": "handle"},
                    "features": {"input": "queries"}},
         "output": "predictions"},
    ]
    return {
        "arguments": {"features": matrix(FEATURES), "labels": labels(LABELS),
                      "queries": matrix(QUERIES)},
        "composition": {"steps": steps},
        "stepIndex": 0,
    }


def unreachable_choreography(host):
    # instance steps route via the handle, so the dead hop must be a
    # constructor step (endpoint-routed) for the forward to fail
    steps = [
        {"service": "gnb", "operation": "new", "endpoint": host, "inputs": {}, "output": "handle"},
        {"service": "knn3", "operation": "new", "endpoint": "http://127.0.0.1:9",
         "inputs": {}, "output": "handle2"},
    ]
    return {"arguments": {}, "composition": {"steps": steps}, "stepIndex": 0}


def request_script(host):
    """(method, path, body) triples; bodies may embed the host base URL."""
    train_args = {"features": matrix(FEATURES), "labels": labels(LABELS)}
    predict_args = {"features": matrix(QUERIES)}
    return [
        ("POST", "/gnb/new", {"arguments": {}}),
        ("POST", "/gnb/0/train", {"arguments": train_args}),
        ("POST", "/gnb/0/predict", {"arguments": predict_args}),
        ("POST", "/knn3/new", {"arguments": {}}),
        ("POST", "/knn3/0/predict", {"arguments": predict_args}),  # 409 before train
        ("POST", "/knn3/0/train", {"arguments": train_args}),
        ("POST", "/knn3/0/predict", {"arguments": predict_args}),
        ("POST", "/gnb/new", {"arguments": {}}),  # sequential id 1
        ("POST", "/unknownclass/new", {"arguments": {}}),  # 404
        ("POST", "/gnb/0/teleport", {"arguments": {}}),  # 404 unknown method
        ("POST", "/gnb/99/predict", {"arguments": predict_args}),  # 404 unknown instance
        ("POST", "/echo/echo", {"arguments": {"value": {"type": "string", "value": "x"}}}),  # 403
        ("POST", "/gnb/new", {"arguments": {"x": {"type": "tensor", "value": 1}}}),  # 400
        ("POST", "/gnb/1/train", {"arguments": {"features": matrix([[1.0], [2.0]])}}),  # 500
        ("GET", "/gnb/new", None),  # 405
        ("POST", "/gnb/2/predict", choreography_doc(host)),  # target/composition mismatch: 400
        ("POST", "/gnb/new", choreography_doc(host)),  # full choreography: 200 labels
        ("POST", "/gnb/new", unreachable_choreography(host)),  # 502 step 1
    ]


def main() -> None:
    with tempfile.TemporaryDirectory() as store:
        server = ServiceHost(build_registry(disabled={"echo"}), store, port=0)
        server.start()
        client = ServiceClient(timeout_s=10.0)
        entries = []
        try:
            for method, path, body in request_script(server.base_url):
                url = server.base_url + path
                if method == "POST":
                    status, doc = client.post(url, body)
                else:
                    import urllib.error
                    import urllib.request

                    try:
                        with urllib.request.urlopen(url) as resp:
                            status, doc = resp.status, json.loads(resp.read())
                    except urllib.error.HTTPError as err:
                        status, doc = err.code, json.loads(err.read())
                entries.append({
                    "method": method,
                    "path": path,
                    "body": body,
                    "expect": {"status": status, "body": doc},
                })
        finally:
            server.stop()

    text = json.dumps({"server": {"disabled": ["echo"]}, "entries": entries}, indent=2)
    text = text.replace(server.base_url, "$HOST")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(text + "\n")
    statuses = [e["expect"]["status"] for e in entries]
    print(f"wrote {OUT} ({len(entries)} entries, statuses {statuses})")


if __name__ == "__main__":
    main()
