"""On-disk instance store.

Layout inside the storage directory: one JSON file per instance named
``{classname}.{id}`` plus a per-class counter file ``{classname}.counter``
holding the next id. Ids start at 0, strictly increase, and are never reused
within a store's lifetime. Writes go through a temp file + rename so a killed
process never leaves a torn instance file.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Optional


class InstanceStore:
    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._alloc_lock = threading.Lock()

    def _instance_path(self, classname: str, iid: int) -> Path:
        return self.directory / f"{classname}.{iid}"

    def _counter_path(self, classname: str) -> Path:
        return self.directory / f"{classname}.counter"

    def allocate(self, classname: str) -> int:
        with self._alloc_lock:
            path = self._counter_path(classname)
            next_id = int(path.read_text()) if path.exists() else 0
            self._write_atomic(path, str(next_id + 1))
            return next_id

    def save(self, classname: str, iid: int, doc: dict) -> None:
        self._write_atomic(self._instance_path(classname, iid), json.dumps(doc))

    def load(self, classname: str, iid: int) -> Optional[dict]:
        path = self._instance_path(classname, iid)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def _write_atomic(self, path: Path, text: str) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
