"""Lazy, cached, deduplicated computation of analysis results.

Results are keyed by (module, split, pipeline, config hash).  The cache is
the concurrency boundary of the engine: a thread-safe map with
single-flight per key, backed by an in-memory tier and an on-disk blob
tier.  Failures propagate to every waiter and are never cached, so
transient provider outages retry on the next request.
"""

from __future__ import annotations

import pickle
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import ComputationFailed

CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TaskKey:
    module: str
    split: str
    pipeline_id: str | None
    config_hash: str

    def filename(self) -> str:
        pipeline = self.pipeline_id if self.pipeline_id is not None else "_"
        return f"{self.module}-{self.split}-{pipeline}.bin"


class AnalysisScheduler:
    def __init__(self, cache_dir: str | Path | None = None, workers: int = 4):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._lock = threading.Lock()
        self._memory: dict[TaskKey, object] = {}
        self._inflight: dict[TaskKey, Future] = {}
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="analysis")

    # --- two-tier cache ---

    def _disk_path(self, key: TaskKey) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / key.config_hash / key.filename()

    def _load_disk(self, key: TaskKey):
        path = self._disk_path(key)
        if path is None or not path.exists():
            return None
        try:
            with open(path, "rb") as fh:
                blob = pickle.load(fh)
        except Exception:
            return None
        if not isinstance(blob, dict) or blob.get("version") != CACHE_FORMAT_VERSION:
            return None
        return blob.get("payload")

    def _store_disk(self, key: TaskKey, result: object) -> None:
        path = self._disk_path(key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            pickle.dump({"version": CACHE_FORMAT_VERSION, "payload": result}, fh)
        tmp.replace(path)

    # --- single-flight get-or-compute ---

    def get_or_compute(self, key: TaskKey, compute: Callable[[], object]):
        """Run ``compute`` at most once per key per process.

        Concurrent callers with the same key block on the in-flight
        computation.  On failure every waiter receives ComputationFailed
        and nothing is cached.
        """
        with self._lock:
            if key in self._memory:
                return self._memory[key]
            disk = self._load_disk(key)
            if disk is not None:
                self._memory[key] = disk
                return disk
            inflight = self._inflight.get(key)
            if inflight is None:
                inflight = Future()
                self._inflight[key] = inflight
                owner = True
            else:
                owner = False
        if not owner:
            return inflight.result()
        try:
            result = compute()
        except BaseException as exc:
            with self._lock:
                self._inflight.pop(key, None)
            failure = ComputationFailed(f"{key.module}: {exc}", cause=exc)
            inflight.set_exception(failure)
            raise failure from exc
        with self._lock:
            self._memory[key] = result
            self._inflight.pop(key, None)
        try:
            self._store_disk(key, result)
        finally:
            inflight.set_result(result)
        return result

    # --- startup warm-up ---

    def warm_startup(self, tasks: dict[TaskKey, Callable[[], object]], block: bool = True):
        """Eagerly run a batch of task callables; per-task failures are
        recorded in the returned report, never raised.

        Callables are expected to route their own work through
        get_or_compute (engine methods do), so the key here only labels
        the report entry.
        """
        report = StartupReport({key: "pending" for key in tasks})

        def run(key: TaskKey, compute: Callable[[], object]):
            report.mark(key, "running")
            try:
                compute()
            except Exception as exc:
                report.mark(key, "failed", str(exc))
            else:
                report.mark(key, "done")

        futures = [self._pool.submit(run, key, compute) for key, compute in tasks.items()]
        if block:
            for f in futures:
                f.result()
        return report


class StartupReport:
    def __init__(self, statuses: dict[TaskKey, str]):
        self._lock = threading.Lock()
        self._statuses = dict(statuses)
        self._errors: dict[TaskKey, str] = {}

    def mark(self, key: TaskKey, status: str, error: str | None = None) -> None:
        with self._lock:
            self._statuses[key] = status
            if error:
                self._errors[key] = error

    def snapshot(self) -> list[dict]:
        with self._lock:
            return [
                {
                    "module": key.module,
                    "split": key.split,
                    "pipeline_id": key.pipeline_id,
                    "status": status,
                    "error": self._errors.get(key),
                }
                for key, status in sorted(
                    self._statuses.items(), key=lambda kv: (kv[0].module, kv[0].split, str(kv[0].pipeline_id))
                )
            ]

    @property
    def counts(self) -> dict[str, int]:
        with self._lock:
            out: dict[str, int] = {}
            for status in self._statuses.values():
                out[status] = out.get(status, 0) + 1
            return out

    @property
    def all_done(self) -> bool:
        with self._lock:
            return all(s == "done" for s in self._statuses.values())
