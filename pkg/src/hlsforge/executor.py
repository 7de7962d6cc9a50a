"""Parallel execution of tool flows over design collections.

Two strategies: fine_grained keeps one shared FIFO queue for every design of
every dataset, so a worker that finishes early immediately pulls the next job
regardless of which dataset it came from; naive runs the datasets one after
another, draining the pool between them (the barrier real batch scripts tend
to have). simulate_schedule replays either policy on given durations without
running anything, for planning and for quantifying the gap.
"""

from __future__ import annotations

import json
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .core import DatasetCollection, design_identity
from .toolflows import FlowOutcome, ToolFlowSpec, run_flow


@dataclass(frozen=True)
class Job:
    design_id: str
    dataset_name: str
    flow_name: str


@dataclass(frozen=True)
class ExecutionRecord:
    job: Job
    worker_index: int
    start_s: float
    end_s: float
    status: str


@dataclass
class Timeline:
    n_workers: int
    records: list[ExecutionRecord] = field(default_factory=list)
    pinning: dict = field(default_factory=dict)  # worker index -> pinned core or None

    def makespan(self) -> float:
        return max((r.end_s for r in self.records), default=0.0)


def _try_pin(worker_index: int) -> int | None:
    """Best-effort affinity of the calling thread to one core."""
    try:
        n_cores = len(os.sched_getaffinity(0))
        core = worker_index % n_cores
        os.sched_setaffinity(0, {core})
        return core
    except (AttributeError, OSError):
        return None


def _run_pool(pairs: list, flow: ToolFlowSpec, n_workers: int, pin_cores: bool,
              origin: float, timeline: Timeline) -> dict:
    """Drain (job, design) pairs with n_workers threads; returns job -> outcome."""
    queue = deque(pairs)
    lock = threading.Lock()
    outcomes: dict[Job, FlowOutcome] = {}

    def worker(index: int) -> None:
        if pin_cores and index not in timeline.pinning:
            timeline.pinning[index] = _try_pin(index)
        while True:
            with lock:
                if not queue:
                    return
                job, design = queue.popleft()
            start = time.monotonic() - origin
            outcome = run_flow(flow, design)
            end = time.monotonic() - origin
            with lock:
                outcomes[job] = outcome
                timeline.records.append(ExecutionRecord(job, index, start, end, outcome.status))

    threads = [threading.Thread(target=worker, args=(i,), name=f"hlsforge-worker-{i}")
               for i in range(n_workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return outcomes


def _jobs_for(collection: DatasetCollection, flow: ToolFlowSpec) -> list:
    pairs = []
    for dataset_name, dataset in collection.items():
        for design in dataset.designs:
            pairs.append((Job(design_identity(design), dataset_name, flow.name), design))
    return pairs


def _finish(pairs: list, outcomes: dict, timeline: Timeline) -> tuple[list, Timeline]:
    timeline.records.sort(key=lambda r: (r.start_s, r.worker_index))
    ordered = [outcomes[job] for job, _ in pairs]
    return ordered, timeline


def execute_parallel_fine_grained(collection: DatasetCollection, flow: ToolFlowSpec,
                                  n_workers: int, pin_cores: bool = False,
                                  origin: float | None = None,
                                  timeline: Timeline | None = None
                                  ) -> tuple[list, Timeline]:
    """One shared queue across all datasets; outcomes come back in job order."""
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1, got {n_workers}")
    timeline = timeline if timeline is not None else Timeline(n_workers)
    origin = origin if origin is not None else time.monotonic()
    pairs = _jobs_for(collection, flow)
    outcomes = _run_pool(pairs, flow, n_workers, pin_cores, origin, timeline)
    return _finish(pairs, outcomes, timeline)


def execute_parallel_naive(collection: DatasetCollection, flow: ToolFlowSpec,
                           n_workers: int, pin_cores: bool = False,
                           origin: float | None = None,
                           timeline: Timeline | None = None) -> tuple[list, Timeline]:
    """Per-dataset pools with a barrier between datasets (the baseline policy)."""
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1, got {n_workers}")
    timeline = timeline if timeline is not None else Timeline(n_workers)
    origin = origin if origin is not None else time.monotonic()
    all_pairs = []
    outcomes: dict = {}
    for dataset_name, dataset in collection.items():
        pairs = _jobs_for({dataset_name: dataset}, flow)
        all_pairs.extend(pairs)
        outcomes.update(_run_pool(pairs, flow, n_workers, pin_cores, origin, timeline))
    return _finish(all_pairs, outcomes, timeline)


def simulate_schedule(durations: list[list[float]], n_workers: int,
                      strategy: str = "fine_grained") -> float:
    """Makespan of greedy FIFO list scheduling; durations are per-dataset lists."""
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1, got {n_workers}")
    if strategy not in ("fine_grained", "naive"):
        raise ValueError(f"unknown strategy {strategy!r}")

    def greedy(jobs: list[float], start: float) -> float:
        avail = [start] * n_workers
        for duration in jobs:
            index = min(range(n_workers), key=avail.__getitem__)
            avail[index] += duration
        return max(avail)

    if strategy == "naive":
        t = 0.0
        for dataset_jobs in durations:
            t = greedy(dataset_jobs, t)
        return t
    return greedy([d for dataset_jobs in durations for d in dataset_jobs], 0.0)


def write_timeline(path: Path, timeline: Timeline) -> Path:
    """Serialize as a flat list of records (stable field order)."""
    payload = [{
        "design_id": r.job.design_id,
        "dataset": r.job.dataset_name,
        "flow": r.job.flow_name,
        "worker": r.worker_index,
        "start_s": r.start_s,
        "end_s": r.end_s,
        "status": r.status,
    } for r in timeline.records]
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def utilization_rows(timeline: Timeline) -> list[dict]:
    """Per-worker busy seconds and job counts (for the CLI's utilization CSV)."""
    rows = []
    for index in range(timeline.n_workers):
        mine = [r for r in timeline.records if r.worker_index == index]
        rows.append({
            "worker": index,
            "n_jobs": len(mine),
            "busy_s": round(sum(r.end_s - r.start_s for r in mine), 6),
            "span_s": round(max((r.end_s for r in mine), default=0.0), 6),
        })
    return rows
