"""Persistent response cache keyed by (client identity, request fingerprint).

The on-disk format is an append-only JSONL log; a hit returns the stored
response value unchanged. Two workers asking for the same fingerprint at the
same time share one underlying call (in-flight deduplication).
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
from concurrent.futures import Future
from typing import Any, Callable, Optional


def fingerprint(payload: dict) -> str:
    """256-bit hex fingerprint of a canonicalized request payload."""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ResponseCache:
    """In-memory map with an optional append-only JSONL log behind it."""

    def __init__(self, path: Optional[str] = None) -> None:
        self.path = path
        self.hits = 0
        self.misses = 0
        self._store: dict[tuple[str, str], Any] = {}
        self._inflight: dict[tuple[str, str], Future] = {}
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            self._load(path)

    def _load(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                self._store[(entry["namespace"], entry["fingerprint"])] = entry["response"]

    def _append(self, namespace: str, fp: str, response: Any) -> None:
        if not self.path:
            return
        entry = {"namespace": namespace, "fingerprint": fp, "response": response}
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def get(self, namespace: str, fp: str) -> Optional[Any]:
        with self._lock:
            return self._store.get((namespace, fp))

    def get_or_call(self, namespace: str, fp: str, producer: Callable[[], Any]) -> Any:
        """Return the cached response or produce it exactly once.

        Concurrent callers for the same key block on the first caller's
        result instead of issuing duplicate calls.
        """
        key = (namespace, fp)
        with self._lock:
            if key in self._store:
                self.hits += 1
                return self._store[key]
            pending = self._inflight.get(key)
            if pending is None:
                pending = Future()
                self._inflight[key] = pending
                owner = True
            else:
                owner = False
        if not owner:
            return pending.result()
        try:
            response = producer()
        except BaseException as exc:
            with self._lock:
                del self._inflight[key]
            pending.set_exception(exc)
            raise
        with self._lock:
            self._store[key] = response
            self.misses += 1
            del self._inflight[key]
            self._append(namespace, fp, response)
        pending.set_result(response)
        return response
