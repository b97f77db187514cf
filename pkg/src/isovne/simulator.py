"""Discrete-event replay of a VNR workload against a substrate."""
from __future__ import annotations

import csv
import enum
import heapq
import io
import json
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .embedding import (
    Embedding,
    IsolationMode,
    commit,
    conservation_violations,
    release,
    verify_report,
)
from .metrics import CSV_COLUMNS, MetricTotals, PricingConfig, cost, revenue, snapshot_row
from .topology import SubstrateNetwork, VirtualNetworkRequest

Embedder = Callable[[SubstrateNetwork, VirtualNetworkRequest], "Embedding | None"]


class EventKind(enum.IntEnum):
    # departures sort first at equal timestamps
    DEPARTURE = 0
    ARRIVAL = 1


@dataclass(frozen=True, order=True)
class Event:
    time: float
    kind: EventKind
    vnr_id: int

    @property
    def is_departure(self) -> bool:
        return self.kind is EventKind.DEPARTURE


class Timeline:
    """Time-ordered arrivals; departures are added as requests get accepted."""

    def __init__(self, workload: Sequence[VirtualNetworkRequest]):
        self._by_id = {v.id: v for v in workload}
        self._heap = [(v.arrival_time, EventKind.ARRIVAL, v.id) for v in workload]
        heapq.heapify(self._heap)

    def request(self, vnr_id: int) -> VirtualNetworkRequest:
        return self._by_id[vnr_id]

    def depart_later(self, vnr: VirtualNetworkRequest) -> None:
        heapq.heappush(self._heap, (vnr.departure_time, EventKind.DEPARTURE, vnr.id))

    def __iter__(self):
        while self._heap:
            t, k, i = heapq.heappop(self._heap)
            yield Event(t, EventKind(k), i)


class InvariantViolation(RuntimeError):
    """The verifier or the ledger conservation check failed during a run."""


@dataclass
class SimulationResult:
    algorithm: str
    samples: list[dict] = field(default_factory=list)
    by_arrival: list[dict] = field(default_factory=list)
    per_vnr: list[dict] = field(default_factory=list)
    final: MetricTotals = field(default_factory=MetricTotals)
    wall_time: float = 0.0
    substrate: SubstrateNetwork | None = field(default=None, repr=False, compare=False)

    def summary(self) -> dict:
        row = snapshot_row(self.samples[-1]["time"] if self.samples else 0.0, self.final)
        return {
            "algorithm": self.algorithm,
            "arrived": row["arrived"],
            "accepted": row["accepted"],
            "acr": row["acr"],
            "lar": row["lar"],
            "lrc": row["lrc"],
            "objective": row["objective"],
            "wall_time": self.wall_time,
        }

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "algorithm": self.algorithm,
            "samples": self.samples,
            "by_arrival": self.by_arrival,
            "per_vnr": self.per_vnr,
            "final": self.final.to_dict(),
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def acr_after(self, n_arrivals: int) -> float | None:
        """Cumulative acceptance ratio after the first ``n_arrivals`` requests."""
        if not self.by_arrival:
            return None
        return self.by_arrival[min(n_arrivals, len(self.by_arrival)) - 1]["acr"]


def run(
    sn_template: SubstrateNetwork,
    workload: Sequence[VirtualNetworkRequest],
    algorithm,
    pricing: PricingConfig = PricingConfig(),
    mode: IsolationMode = IsolationMode.BASIC,
    sample_interval: float = 100.0,
    verify: bool = True,
    name: str | None = None,
) -> SimulationResult:
    """Replay ``workload`` on a copy of ``sn_template``.

    ``algorithm`` is either an embedder callable or an AlgorithmSpec. With
    ``verify`` on, every accepted embedding is checked by the independent
    verifier before commit, rejected attempts must leave the ledger untouched,
    and the conservation identity is checked at every sampling instant; any
    failure raises InvariantViolation.
    """
    if sample_interval <= 0:
        raise ValueError("sample_interval must be > 0")
    if callable(algorithm):
        embed = algorithm
        label = name or getattr(algorithm, "__name__", "custom")
    else:
        from .algorithms import make_embedder

        embed = make_embedder(algorithm, pricing, mode)
        label = name or algorithm.label

    started = _time.perf_counter()
    sn = sn_template.copy()
    result = SimulationResult(label)
    totals = result.final
    active: dict[int, Embedding] = {}
    origin = workload[0].arrival_time if workload else 0.0
    k = 0  # index of the next sampling instant origin + k * interval
    last_time = origin

    def sample(at: float) -> None:
        totals.elapsed = at - origin
        result.samples.append(snapshot_row(at, totals))
        if verify:
            bad = conservation_violations(sn, active.values())
            if bad:
                raise InvariantViolation(f"ledger conservation broken at t={at}: {bad[:5]}")

    timeline = Timeline(workload)
    for ev in timeline:
        while origin + k * sample_interval < ev.time:
            sample(origin + k * sample_interval)
            k += 1
        last_time = ev.time
        if ev.is_departure:
            release(sn, active.pop(ev.vnr_id))
            continue

        vnr = timeline.request(ev.vnr_id)
        before = sn.ledger_state() if verify else None
        emb = embed(sn, vnr)
        if verify and sn.ledger_state() != before:
            raise InvariantViolation(f"VNR {vnr.id}: embedding attempt modified the ledger")
        record = {"vnr_id": vnr.id, "arrival_time": vnr.arrival_time, "accepted": emb is not None}
        if emb is None:
            totals.record_arrival(False)
            record.update(revenue=None, cost=None, node_map=None, link_map=None)
        else:
            if verify:
                violations = verify_report(sn, emb, vnr, mode)
                if violations:
                    raise InvariantViolation(f"VNR {vnr.id}: {[(v.code, v.detail) for v in violations]}")
            commit(sn, emb, vnr, mode)
            active[vnr.id] = emb
            timeline.depart_later(vnr)
            rev, cst = revenue(vnr, pricing), cost(vnr, emb)
            totals.record_arrival(True, rev, cst)
            maps = emb.to_dict()
            record.update(revenue=rev, cost=cst, node_map=maps["node_map"], link_map=maps["link_map"])
        result.per_vnr.append(record)
        totals.elapsed = ev.time - origin
        result.by_arrival.append(snapshot_row(ev.time, totals))

    while origin + k * sample_interval <= last_time:
        sample(origin + k * sample_interval)
        k += 1
    if not result.samples or result.samples[-1]["time"] != last_time:
        sample(last_time)
    totals.elapsed = last_time - origin
    result.substrate = sn
    result.wall_time = _time.perf_counter() - started
    return result


def _run_one(args):
    return run(*args)


def compare(
    sn_template: SubstrateNetwork,
    workload: Sequence[VirtualNetworkRequest],
    algorithms: Sequence,
    pricing: PricingConfig = PricingConfig(),
    mode: IsolationMode = IsolationMode.BASIC,
    sample_interval: float = 100.0,
    verify: bool = True,
    parallel: int = 1,
) -> list[SimulationResult]:
    """Run each algorithm on its own copy of the same substrate and workload.

    ``parallel > 1`` needs picklable AlgorithmSpec entries.
    """
    if not algorithms:
        raise ValueError("compare needs at least one algorithm")
    jobs = [(sn_template, workload, a, pricing, mode, sample_interval, verify) for a in algorithms]
    if parallel > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


# --------------------------------------------------------------------------- export


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def metrics_csv(rows: Sequence[dict], provenance: dict | None = None, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    if provenance is not None:
        buf.write("# provenance: " + json.dumps(provenance, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def trace_jsonl(result: SimulationResult, provenance: dict | None = None) -> str:
    lines = []
    if provenance is not None:
        lines.append(json.dumps({"provenance": provenance}, sort_keys=True))
    lines.extend(json.dumps(r, sort_keys=True) for r in result.per_vnr)
    return "\n".join(lines) + "\n"


SUMMARY_COLUMNS = ("algorithm", "arrived", "accepted", "acr", "lar", "lrc", "objective", "wall_time")


def summary_csv(results: Sequence[SimulationResult], provenance: dict | None = None, include_timing: bool = False) -> str:
    rows = []
    for r in results:
        s = r.summary()
        if not include_timing:
            s["wall_time"] = None
        rows.append(s)
    return metrics_csv(rows, provenance, SUMMARY_COLUMNS)
