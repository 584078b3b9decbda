"""Error types shared by the service runtime."""

from __future__ import annotations

from typing import Optional


class PayloadError(Exception):
    """A wire value does not fit the tagged payload model."""


class ConflictError(Exception):
    """The instance is in the wrong state for this call (e.g. predict before train)."""


class ServiceError(Exception):
    """A non-200 response from a service; carries the failing step index when
    the error happened inside a choreography."""

    def __init__(self, status: int, message: str, step: Optional[int] = None):
        suffix = f" (step {step})" if step is not None else ""
        super().__init__(f"HTTP {status}: {message}{suffix}")
        self.status = status
        self.message = message
        self.step = step


class ClientError(Exception):
    """Transport-level failure before a response was obtained.

    ``retriable`` marks failures that provably did not reach the server
    (connection refused); there is no automatic retry for non-idempotent calls.
    """

    def __init__(self, message: str, retriable: bool = False):
        super().__init__(message)
        self.retriable = retriable
