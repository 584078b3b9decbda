"""The service host: an HTTP server exposing registered classes as services.

Routing follows the fixed POST grammar (create / static / instance); instance
state round-trips through the on-disk store on every call, with per-id
serialization so concurrent calls on one instance never interleave. A request
carrying a composition is a choreography step: the host executes its own step,
then either relays the final result or forwards the growing value context
straight to the next host.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .client import ServiceClient, resolve_source, step_output_key, step_target_url
from .errors import ClientError, ConflictError, PayloadError, ServiceError
from .payload import SELF_HANDLE, Handle, decode_arguments, encode_value
from .registry import Registry
from .store import InstanceStore

_ID_RE = re.compile(r"^[0-9]+$")


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _error_doc(message: str, step: Optional[int] = None) -> dict:
    err: dict = {"message": message}
    if step is not None:
        err["step"] = step
    return {"error": err}


class ServiceHost:
    def __init__(self, registry: Registry, store_dir, port: int = 0, bind: str = "127.0.0.1",
                 advertise_host: Optional[str] = None, forward_timeout_s: float = 60.0):
        self.registry = registry
        self.store = InstanceStore(store_dir)
        self.forward_timeout_s = forward_timeout_s
        handler = type("Handler", (_Handler,), {"host": self})
        self._httpd = ThreadingHTTPServer((bind, port), handler)
        self._httpd.daemon_threads = True
        self.port = self._httpd.server_address[1]
        self.base_url = f"http://{advertise_host or bind}:{self.port}"
        self._thread: Optional[threading.Thread] = None
        self._locks: dict[tuple[str, int], threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._forwarder = ServiceClient(timeout_s=forward_timeout_s)

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05), daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()

    # -- request handling ---------------------------------------------------

    def handle_request(self, path: str, body) -> tuple[int, dict]:
        route = _parse_route(path)
        if route is None:
            return 404, _error_doc(f"no such route: {path}")
        if not isinstance(body, dict):
            return 400, _error_doc("request body must be a JSON object")
        if "composition" in body:
            return self._choreography_step(route, body)
        try:
            value = self._invoke(route, body.get("arguments", {}))
        except _HttpError as err:
            return err.status, _error_doc(err.message)
        return 200, {"result": encode_value(value)}

    def _id_lock(self, classname: str, iid: int) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault((classname, iid), threading.Lock())

    def _instance_url(self, classname: str, iid: int) -> str:
        return f"{self.base_url}/{classname}/{iid}"

    def _invoke(self, route, args_doc):
        kind, classname, iid, method = route
        svc = self.registry.lookup(classname)
        if svc is None:
            raise _HttpError(404, f"unknown class: {classname}")
        if self.registry.is_disabled(classname):
            raise _HttpError(403, f"class is disabled: {classname}")
        try:
            args = decode_arguments(args_doc)
        except PayloadError as err:
            raise _HttpError(400, f"malformed arguments: {err}")

        if kind == "create":
            if svc.factory is None:
                raise _HttpError(404, f"class {classname} has no constructor")
            instance = self._run(classname, "new", lambda: svc.factory(**args))
            iid = self.store.allocate(classname)
            self.store.save(classname, iid, {"class": classname, "state": svc.encode(instance)})
            return Handle(self._instance_url(classname, iid))

        if kind == "static":
            fn = svc.statics.get(method)
            if fn is None:
                raise _HttpError(404, f"unknown static operation: {classname}/{method}")
            return self._run(classname, method, lambda: fn(**args))

        attr = svc.methods.get(method)
        if attr is None:
            raise _HttpError(404, f"unknown operation: {classname}/{method}")
        with self._id_lock(classname, iid):
            doc = self.store.load(classname, iid)
            if doc is None:
                raise _HttpError(404, f"unknown instance: {classname}/{iid}")
            obj = svc.decode(doc["state"])
            value = self._run(classname, method, lambda: getattr(obj, attr)(**args))
            self.store.save(classname, iid, {"class": classname, "state": svc.encode(obj)})
        if value is SELF_HANDLE:
            return Handle(self._instance_url(classname, iid))
        return value

    @staticmethod
    def _run(classname: str, method: str, call):
        try:
            return call()
        except ConflictError as err:
            raise _HttpError(409, f"{classname}/{method}: {err}")
        except PayloadError as err:
            raise _HttpError(400, f"{classname}/{method}: {err}")
        except _HttpError:
            raise
        except Exception as err:  # invocation failure surfaces as a 500 diagnostic
            raise _HttpError(500, f"{classname}/{method} failed: {err!r}")

    # -- choreography --------------------------------------------------------

    def _choreography_step(self, route, body) -> tuple[int, dict]:
        comp = body.get("composition")
        steps = comp.get("steps") if isinstance(comp, dict) else None
        index = body.get("stepIndex", 0)
        context = body.get("arguments", {})
        if not isinstance(steps, list) or not isinstance(index, int) or not isinstance(context, dict):
            return 400, _error_doc("malformed choreography request")
        if not (0 <= index < len(steps)):
            return 400, _error_doc(f"stepIndex {index} out of range")
        step = steps[index]
        kind, classname, _, method = route
        expected_op = "new" if kind == "create" else method
        if step.get("service") != classname or step.get("operation") != expected_op:
            return 400, _error_doc(
                f"target {classname}/{expected_op} does not match composition step {index}")

        try:
            args_doc = {
                name: resolve_source(source, context)
                for name, source in step.get("inputs", {}).items()
                if name != "handle"  # the handle addressed this request
            }
        except ServiceError as err:
            return 500, _error_doc(err.message, step=index)

        try:
            value = self._invoke(route, args_doc)
        except _HttpError as err:
            return err.status, _error_doc(err.message, step=index)

        if step.get("output"):
            context[step_output_key(index, step["output"])] = encode_value(value)
        if index == len(steps) - 1:
            return 200, {"result": encode_value(value)}

        next_step = steps[index + 1]
        try:
            url = step_target_url(next_step, context)
        except ServiceError as err:
            return 502, _error_doc(err.message, step=index + 1)
        try:
            status, doc = self._forwarder.post(
                url, {"arguments": context, "composition": comp, "stepIndex": index + 1})
        except ClientError as err:
            return 502, _error_doc(f"next hop unreachable: {err}", step=index + 1)
        return status, doc  # relay the downstream response verbatim


def _parse_route(path: str):
    segments = [s for s in path.split("?", 1)[0].split("/") if s]
    if len(segments) == 2:
        classname, tail = segments
        if tail == "new":
            return ("create", classname, None, None)
        if _ID_RE.match(tail):
            return None  # /{class}/{id} without a method is not a route
        return ("static", classname, None, tail)
    if len(segments) == 3:
        classname, iid, method = segments
        if _ID_RE.match(iid):
            return ("instance", classname, int(iid), method)
    return None


class _Handler(BaseHTTPRequestHandler):
    host: ServiceHost

    def do_POST(self):
        try:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            body = json.loads(raw.decode("utf-8")) if raw else None
        except (ValueError, UnicodeDecodeError):
            self._respond(400, _error_doc("request body is not valid JSON"))
            return
        if body is None:
            self._respond(400, _error_doc("request body is required"))
            return
        try:
            status, doc = self.host.handle_request(self.path, body)
        except Exception as err:  # last-resort guard: never drop the connection
            status, doc = 500, _error_doc(f"internal error: {err!r}")
        self._respond(status, doc)

    def _respond(self, status: int, doc: dict) -> None:
        payload = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _method_not_allowed(self):
        self._respond(405, _error_doc("only POST is supported"))

    do_GET = _method_not_allowed
    do_PUT = _method_not_allowed
    do_DELETE = _method_not_allowed
    do_PATCH = _method_not_allowed

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass
