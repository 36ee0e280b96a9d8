import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from errorscope.errors import ComputationFailed
from errorscope.scheduler import AnalysisScheduler, TaskKey

from conftest import minimal_datasets, probs_for


def key(module="m", split="eval", pipeline="p", config_hash="abc123"):
    return TaskKey(module, split, pipeline, config_hash)


def test_sequential_calls_compute_once(tmp_path):
    scheduler = AnalysisScheduler(tmp_path)
    calls = []
    compute = lambda: calls.append(1) or 41 + 1
    assert scheduler.get_or_compute(key(), compute) == 42
    assert scheduler.get_or_compute(key(), compute) == 42
    assert len(calls) == 1


def test_concurrent_single_flight(tmp_path):
    scheduler = AnalysisScheduler(tmp_path)
    barrier = threading.Barrier(16)
    calls = []
    lock = threading.Lock()

    def compute():
        with lock:
            calls.append(1)
        return "result"

    def worker():
        barrier.wait()
        return scheduler.get_or_compute(key(), compute)

    with ThreadPoolExecutor(max_workers=16) as pool:
        results = [f.result() for f in [pool.submit(worker) for _ in range(16)]]
    assert results == ["result"] * 16
    assert len(calls) == 1


def test_config_hash_change_recomputes(tmp_path):
    scheduler = AnalysisScheduler(tmp_path)
    calls = []
    compute = lambda: calls.append(1) or len(calls)
    scheduler.get_or_compute(key(config_hash="aaaa"), compute)
    scheduler.get_or_compute(key(config_hash="aaaa"), compute)
    scheduler.get_or_compute(key(config_hash="bbbb"), compute)
    assert len(calls) == 2


def test_failure_propagates_and_is_not_cached(tmp_path):
    scheduler = AnalysisScheduler(tmp_path)
    attempts = []

    def flaky():
        attempts.append(1)
        if len(attempts) == 1:
            raise ValueError("transient outage")
        return "recovered"

    with pytest.raises(ComputationFailed, match="transient outage"):
        scheduler.get_or_compute(key(), flaky)
    assert scheduler.get_or_compute(key(), flaky) == "recovered"
    assert len(attempts) == 2


def test_concurrent_failure_reaches_all_waiters(tmp_path):
    scheduler = AnalysisScheduler(tmp_path)
    barrier = threading.Barrier(8)
    started = threading.Event()

    def compute():
        started.wait(5)
        raise RuntimeError("boom")

    def worker():
        barrier.wait()
        started.set()
        try:
            scheduler.get_or_compute(key(), compute)
            return None
        except ComputationFailed as exc:
            return str(exc)

    with ThreadPoolExecutor(max_workers=8) as pool:
        outcomes = [f.result() for f in [pool.submit(worker) for _ in range(8)]]
    assert all(o and "boom" in o for o in outcomes)


def test_disk_cache_round_trip_across_processes(tmp_path):
    first = AnalysisScheduler(tmp_path)
    payload = {"report": [1, 2, 3], "matrix": [[0.5, 0.5]]}
    first.get_or_compute(key(), lambda: payload)

    second = AnalysisScheduler(tmp_path)  # fresh instance, same directory
    calls = []
    result = second.get_or_compute(key(), lambda: calls.append(1) or "recomputed")
    assert result == payload
    assert calls == []


def test_version_mismatch_discards_blob(tmp_path):
    import pickle

    scheduler = AnalysisScheduler(tmp_path)
    k = key()
    path = tmp_path / k.config_hash / k.filename()
    path.parent.mkdir(parents=True)
    with open(path, "wb") as fh:
        pickle.dump({"version": -1, "payload": "stale"}, fh)
    assert scheduler.get_or_compute(k, lambda: "fresh") == "fresh"


def test_cached_engine_results_round_trip(tmp_path, builder):
    """Every cached result type compares equal after a disk round trip."""
    datasets = minimal_datasets()
    builder.root = tmp_path / "proj"
    builder.datasets = datasets
    builder.predictions = {
        "main": {
            "train": [probs_for(0, 0.9, 4)] * 8,
            "eval": [probs_for(i % 4, 0.7, 4) for i in range(5)],
        }
    }
    builder.embeddings = {
        "train": np.eye(8, 4) + 0.01,
        "eval": np.eye(5, 4) + 0.01,
    }
    cache_dir = tmp_path / "cache"
    engine_a = builder.engine(cache_dir)
    warnings_a = engine_a.dataset_warnings()
    tags_a = engine_a.tag_map("eval", "main")
    metrics_a = engine_a.dashboard_metrics("eval", "main")
    neighbors_a = engine_a.neighbor_tables("eval")

    engine_b = builder.engine(cache_dir)  # same config hash, cold memory
    assert engine_b.dataset_warnings() == warnings_a
    assert engine_b.tag_map("eval", "main") == tags_a
    assert engine_b.dashboard_metrics("eval", "main") == metrics_a
    assert engine_b.neighbor_tables("eval") == neighbors_a


def test_warm_startup_statuses(builder, tmp_path):
    builder.datasets = minimal_datasets()
    builder.predictions = {
        "main": {
            "train": [probs_for(0, 0.9, 4)] * 8,
            "eval": [probs_for(0, 0.9, 4)] * 5,
        }
    }
    engine = builder.engine(tmp_path / "cache")
    report = engine.warm_startup(block=True)
    assert report.all_done
    snapshot = report.snapshot()
    assert {entry["status"] for entry in snapshot} == {"done"}
    modules = {entry["module"] for entry in snapshot}
    assert "dataset_warnings" in modules
    assert "metrics" in modules
    assert "smart_tags" in modules


def test_warm_startup_isolates_failures(builder, tmp_path):
    builder.datasets = minimal_datasets()
    builder.predictions = {
        "main": {
            "train": [probs_for(0, 0.9, 4)] * 8,
            "eval": [probs_for(0, 0.9, 4)] * 5,
        }
    }
    # perturbed table present but missing most rows: behavioral evaluation
    # inside the eval tag task fails, everything else succeeds
    builder.perturbed = {
        "main": {"eval": [{"id": 0, "test_name": "ending_period_add", "probs": probs_for(0, 0.9, 4)}]}
    }
    engine = builder.engine(tmp_path / "cache")
    report = engine.warm_startup(block=True)
    statuses = {
        (e["module"], e["split"]): e["status"] for e in report.snapshot()
    }
    assert statuses[("smart_tags", "eval")] == "failed"
    done = [s for s in statuses.values() if s == "done"]
    assert len(done) == len(statuses) - 1


def test_second_warm_startup_recomputes_nothing(builder, tmp_path):
    builder.datasets = minimal_datasets()
    builder.predictions = {
        "main": {
            "train": [probs_for(0, 0.9, 4)] * 8,
            "eval": [probs_for(0, 0.9, 4)] * 5,
        }
    }
    cache_dir = tmp_path / "cache"
    engine = builder.engine(cache_dir)
    engine.warm_startup(block=True)

    # fresh engine over the same cache directory: all results come from disk
    engine_b = builder.engine(cache_dir)
    counter = {"runs": 0}
    original = engine_b.scheduler.get_or_compute

    def counting(key, compute):
        def wrapped():
            counter["runs"] += 1
            return compute()

        return original(key, wrapped)

    engine_b.scheduler.get_or_compute = counting
    report = engine_b.warm_startup(block=True)
    assert report.all_done
    assert counter["runs"] == 0
