"""HTTP client for the service route grammar, plus composition executors.

``execute_choreography`` sends the first step's invocation with the whole
composition attached; the hosts forward data service-to-service and relay the
terminal result back, so the client sees exactly one response per execution.
``execute_orchestrated`` is the reference executor that calls every step
itself and threads outputs forward; for deterministic services both must
produce identical results.
"""

from __future__ import annotations

import json
import socket
import urllib.error
import urllib.request
from typing import Optional

from .errors import ClientError, ServiceError
from .payload import Handle, decode_value, encode_arguments, encode_value

DEFAULT_TIMEOUT_S = 30.0

# Context keys for step outputs inside a composition's value context.
STEP_KEY = "step{index}.{output}"


def step_output_key(index: int, output: str) -> str:
    return STEP_KEY.format(index=index, output=output)


def resolve_source(source: dict, context: dict):
    """Look up a binding source ({"input": name} or {"from": i, "output": o})."""
    if "input" in source:
        key = source["input"]
    elif "from" in source:
        key = step_output_key(source["from"], source.get("output", ""))
    else:
        raise ServiceError(500, f"malformed binding source: {source!r}")
    if key not in context:
        raise ServiceError(500, f"binding source {key!r} has no value")
    return context[key]


def step_target_url(step: dict, context: dict) -> str:
    """Build the invocation URL for a composition step.

    Instance-bound steps (those binding an input named ``handle``) are
    addressed through the resolved handle URL; everything else goes through
    the service's endpoint.
    """
    operation = step["operation"]
    inputs = step.get("inputs", {})
    if "handle" in inputs:
        payload = resolve_source(inputs["handle"], context)
        url = payload.get("value") if isinstance(payload, dict) else None
        if not isinstance(url, str):
            raise ServiceError(500, f"handle binding for step {step['operation']} is not a handle")
        return f"{url.rstrip('/')}/{operation}"
    endpoint = step["endpoint"].rstrip("/")
    if operation == "new":
        return f"{endpoint}/{step['service']}/new"
    return f"{endpoint}/{step['service']}/{operation}"


class ServiceClient:
    """Thin client over the POST route grammar; counts responses received."""

    def __init__(self, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.timeout_s = timeout_s
        self.responses_received = 0

    def post(self, url: str, doc: dict, timeout_s: Optional[float] = None) -> tuple[int, dict]:
        body = json.dumps(doc).encode("utf-8")
        req = urllib.request.Request(url, data=body, headers={"Content-Type": "application/json"},
                                     method="POST")
        try:
            with urllib.request.urlopen(req, timeout=timeout_s or self.timeout_s) as resp:
                raw = resp.read()
                status = resp.status
        except urllib.error.HTTPError as err:
            raw = err.read()
            status = err.code
        except urllib.error.URLError as err:
            retriable = isinstance(err.reason, ConnectionRefusedError)
            raise ClientError(f"POST {url} failed: {err.reason}", retriable=retriable) from err
        except (socket.timeout, TimeoutError) as err:
            raise ClientError(f"POST {url} timed out", retriable=False) from err
        except OSError as err:
            raise ClientError(f"POST {url} failed: {err}", retriable=False) from err
        self.responses_received += 1
        try:
            parsed = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as err:
            raise ClientError(f"POST {url}: response is not JSON ({err})") from err
        return status, parsed

    def _call(self, url: str, arguments: dict, timeout_s: Optional[float] = None):
        status, doc = self.post(url, {"arguments": encode_arguments(arguments)}, timeout_s)
        return _unwrap(status, doc)

    def create(self, endpoint: str, classname: str, arguments: dict | None = None,
               timeout_s: Optional[float] = None) -> Handle:
        value = self._call(f"{endpoint.rstrip('/')}/{classname}/new", arguments or {}, timeout_s)
        if not isinstance(value, Handle):
            raise ServiceError(500, f"constructor of {classname} returned a non-handle")
        return value

    def invoke(self, handle: Handle | str, method: str, arguments: dict | None = None,
               timeout_s: Optional[float] = None):
        url = handle.url if isinstance(handle, Handle) else handle
        return self._call(f"{url.rstrip('/')}/{method}", arguments or {}, timeout_s)

    def invoke_static(self, endpoint: str, classname: str, method: str,
                      arguments: dict | None = None, timeout_s: Optional[float] = None):
        return self._call(f"{endpoint.rstrip('/')}/{classname}/{method}", arguments or {}, timeout_s)

    def reachable(self, endpoint: str) -> bool:
        """Transport-level health probe: any HTTP response counts as healthy."""
        try:
            self.post(f"{endpoint.rstrip('/')}/__probe__/new", {"arguments": {}}, timeout_s=5.0)
            return True
        except ClientError:
            return False


def _unwrap(status: int, doc: dict):
    if status == 200 and isinstance(doc, dict) and "result" in doc:
        return decode_value(doc["result"])
    err = doc.get("error", {}) if isinstance(doc, dict) else {}
    raise ServiceError(status, err.get("message", "unknown error"), err.get("step"))


def execute_choreography(composition: dict, inputs: dict, client: ServiceClient,
                         timeout_s: Optional[float] = None):
    """Execute a (wire-form) composition by handing it to the first step's host."""
    steps = composition.get("steps", [])
    if not steps:
        raise ServiceError(400, "cannot execute an empty composition")
    context = encode_arguments(inputs)
    url = step_target_url(steps[0], context)
    status, doc = client.post(url, {"arguments": context, "composition": composition, "stepIndex": 0},
                              timeout_s)
    return _unwrap(status, doc)


def execute_orchestrated(composition: dict, inputs: dict, client: ServiceClient,
                         timeout_s: Optional[float] = None):
    """Client-side reference executor: one direct invocation per step."""
    steps = composition.get("steps", [])
    if not steps:
        raise ServiceError(400, "cannot execute an empty composition")
    context = encode_arguments(inputs)
    value = None
    for i, step in enumerate(steps):
        url = step_target_url(step, context)
        arguments = {}
        for name, source in step.get("inputs", {}).items():
            if name == "handle":
                continue  # consumed by instance addressing
            arguments[name] = resolve_source(source, context)
        try:
            status, doc = client.post(url, {"arguments": arguments}, timeout_s)
            value = _unwrap(status, doc)
        except ServiceError as err:
            raise ServiceError(err.status, err.message, step=i) from None
        if step.get("output"):
            context[step_output_key(i, step["output"])] = encode_value(value)
    return value
