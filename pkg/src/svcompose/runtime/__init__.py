"""HTTP service runtime: stateful service hosting, wire payloads, choreography.

The route grammar is fixed:

    POST /{classname}/new             create an instance, returns its handle URL
    POST /{classname}/{method}        invoke a static operation
    POST /{classname}/{id}/{method}   invoke an instance operation ({id} = [0-9]+)

Instances are persisted to an on-disk store (one file per instance plus a
per-class id counter), so handles outlive the server process.
"""

from .errors import ClientError, ConflictError, PayloadError, ServiceError
from .payload import SELF_HANDLE, Handle, decode_value, encode_value
from .registry import Registry, ServiceClass, service_class_for
from .server import ServiceHost
from .store import InstanceStore
from .client import ServiceClient, execute_choreography, execute_orchestrated

__all__ = [
    "ClientError",
    "ConflictError",
    "PayloadError",
    "ServiceError",
    "SELF_HANDLE",
    "Handle",
    "decode_value",
    "encode_value",
    "Registry",
    "ServiceClass",
    "service_class_for",
    "ServiceHost",
    "InstanceStore",
    "ServiceClient",
    "execute_choreography",
    "execute_orchestrated",
]
