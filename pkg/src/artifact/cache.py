"""Content-addressed result cache.

Entries are canonical JSON files named by the SHA-256 of the canonical task
description.  Writes go to a temporary file in the cache directory and are
renamed into place, so readers never see a partial entry.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

log = logging.getLogger(__name__)


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def task_key(task):
    return hashlib.sha256(canonical(task).encode("utf-8")).hexdigest()


def default_dir():
    env = os.environ.get("PDL_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "pdl"


class Cache:
    def __init__(self, directory=None):
        self.dir = Path(directory) if directory else default_dir()

    def path(self, key):
        return self.dir / f"{key}.json"

    def get(self, task):
        """The cached payload for ``task`` or None; corrupt entries are dropped."""
        p = self.path(task_key(task))
        if not p.exists():
            return None
        try:
            entry = json.loads(p.read_text(encoding="utf-8"))
            if entry.get("task") != json.loads(canonical(task)):
                raise ValueError("task mismatch")
            return entry["payload"]
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("corrupt cache entry %s (%s); recomputing", p.name, exc)
            try:
                p.unlink()
            except OSError:
                pass
            return None

    def put(self, task, payload):
        self.dir.mkdir(parents=True, exist_ok=True)
        text = canonical({"task": task, "payload": payload})
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, self.path(task_key(task)))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return self.path(task_key(task))
