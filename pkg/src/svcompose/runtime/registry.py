"""Explicit service registry: class name -> factory, method tables, codecs.

The registry replaces runtime reflection: what a host exposes is exactly what
was registered, checkable at startup. Classes provide an explicit state codec
(``encode_state``/``decode_state``) so persisted instances survive restarts
and stay inspectable, independent of any language-native serialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping


@dataclass(frozen=True)
class ServiceClass:
    name: str
    factory: Callable[..., Any] | None = None  # None: static-only, no constructor
    methods: Mapping[str, str] = field(default_factory=dict)  # wire name -> python attr
    statics: Mapping[str, Callable[..., Any]] = field(default_factory=dict)
    encode: Callable[[Any], dict] = lambda obj: obj.encode_state()
    decode: Callable[[dict], Any] = lambda doc: doc

    def __post_init__(self):
        if "new" in self.methods or "new" in self.statics:
            raise ValueError(f"service {self.name}: 'new' is reserved for the constructor")


def service_class_for(cls: type, name: str, methods: Mapping[str, str],
                      statics: Mapping[str, Callable[..., Any]] | None = None) -> ServiceClass:
    """Registry entry for a class with encode_state()/decode_state() methods."""
    return ServiceClass(
        name=name,
        factory=cls,
        methods=dict(methods),
        statics=dict(statics or {}),
        encode=lambda obj: obj.encode_state(),
        decode=cls.decode_state,
    )


class Registry:
    def __init__(self, classes: Mapping[str, ServiceClass] | None = None,
                 disabled: set[str] | None = None):
        self._classes: dict[str, ServiceClass] = dict(classes or {})
        self.disabled: set[str] = set(disabled or ())

    def add(self, svc: ServiceClass) -> None:
        if svc.name in self._classes:
            raise ValueError(f"service {svc.name} already registered")
        self._classes[svc.name] = svc

    def names(self) -> list[str]:
        return sorted(self._classes)

    def lookup(self, name: str) -> ServiceClass | None:
        return self._classes.get(name)

    def is_disabled(self, name: str) -> bool:
        return name in self.disabled
