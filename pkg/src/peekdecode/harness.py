"""
Latency sweeps and CSV reports.

A sweep decodes one observation sequence with every ``decoder x L x seed``
cell and compares each result with a single exact Viterbi run.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import (
    BoundInapplicable,
    peek_reset_upper_bound,
    peek_search_upper_bound,
    randomized_upper_bound,
)
from .decoders import DECODERS, online_decode, viterbi_trace
from .hmm import _random_graph
from .model import RewardOracle, StateGraph, TableRewards

log = logging.getLogger(__name__)

CSV_HEADER = ("decoder", "L", "gamma", "seed", "opt", "on", "ratio", "agreement", "bound",
              "wall_time_ms")

# decoders whose output does not depend on the seed
_SEEDLESS = {"viterbi", "peek_search", "peek_reset", "greedy"}


@dataclass
class RatioReport:
    decoder: str
    L: int
    gamma: float
    seed: int
    opt: float
    on: float
    ratio: float
    agreement: float
    bound: float | None = None
    wall_time_ms: float | None = None
    offset: float = 0.0
    horizon: int = 0
    error: str | None = None

    @property
    def failed(self):
        return self.error is not None

    @property
    def log_prob(self):
        """ON with the positivizing shift removed."""
        return self.on - self.horizon * self.offset


def decoder_bound(decoder: str, L: int, n: int, delta: int, gamma=None):
    """Proven ratio ceiling for a decoder at ``(L, n, delta)``, or ``None``."""
    try:
        if decoder == "viterbi":
            return 1.0
        if decoder == "peek_search" and gamma is None:
            return peek_search_upper_bound(L, n, delta)
        if decoder == "randomized_peek_search":
            return randomized_upper_bound(L, n, delta)
        if decoder == "peek_reset":
            return peek_reset_upper_bound(L, n, delta)
    except BoundInapplicable:
        pass
    return None


def _agreement(labels, reference):
    if not reference:
        return 1.0
    return sum(a == b for a, b in zip(labels, reference)) / len(reference)


def run_sweep(oracle: RewardOracle, graph: StateGraph, decoders, latencies, seeds=(0,),
              padding: bool = True, gamma: float | None = None, workers: int = 1,
              timing: bool = False, clock=time.perf_counter) -> list:
    """Run every cell and return the reports sorted by ``(decoder, L, seed)``.

    A cell that raises is kept as a failed report instead of stopping the
    sweep. ``timing`` fills ``wall_time_ms`` from ``clock``; it is off by
    default so repeated sweeps give identical reports.
    """
    for name in decoders:
        if name not in DECODERS:
            raise ValueError(f"unknown decoder {name!r}")
    reference = viterbi_trace(oracle, graph)
    opt = reference.total
    ref_labels = reference.labels
    offset = float(getattr(oracle, "offset", 0.0))
    n, delta = oracle.order, graph.diameter

    def cell(name, L, seed):
        start = clock() if timing else None
        try:
            trace = online_decode(name, oracle, graph, L, gamma=gamma, seed=seed, padding=padding)
            if trace.violations:
                raise RuntimeError(f"{trace.violations} latency window violations")
            on = trace.total
            ratio = opt / on if on > 0 else (1.0 if opt == 0 else math.inf)
            report = RatioReport(name, L, trace.gamma, seed, opt, on, ratio,
                                 _agreement(trace.labels, ref_labels),
                                 decoder_bound(name, L, n, delta, gamma), None,
                                 offset, oracle.horizon)
        except Exception as exc:
            log.warning("cell %s L=%s seed=%s failed: %s", name, L, seed, exc)
            report = RatioReport(name, L, math.nan, seed, opt, math.nan, math.nan, math.nan,
                                 None, None, offset, oracle.horizon, error=repr(exc))
        if timing:
            report.wall_time_ms = (clock() - start) * 1000.0
        return report

    jobs = []
    for name in decoders:
        for L in latencies:
            run_seeds = seeds[:1] if name in _SEEDLESS else seeds
            jobs.extend((name, L, s) for s in run_seeds)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(lambda job: cell(*job), jobs))
    else:
        done = [cell(*job) for job in jobs]

    reports = []
    for report in done:
        if report.decoder in _SEEDLESS:
            for s in seeds:
                copy = RatioReport(**vars(report))
                copy.seed = s
                reports.append(copy)
        else:
            reports.append(report)
    reports.sort(key=lambda r: (r.decoder, r.L, r.seed))
    return reports


def sweep_model(model, observations, decoders, latencies, seeds=(0,), offset=None, **kwargs):
    """:func:`run_sweep` on an :class:`~peekdecode.hmm.HMMModel` and token ids."""
    oracle = model.rewards(observations, offset)
    return run_sweep(oracle, model.graph, decoders, latencies, seeds, **kwargs)


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return f"{value:.12f}"


def emit_csv(reports) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in sorted(reports, key=lambda r: (r.decoder, r.L, r.seed)):
        writer.writerow([r.decoder, r.L, _fmt(r.gamma), r.seed, _fmt(r.opt), _fmt(r.on),
                         _fmt(r.ratio), _fmt(r.agreement), _fmt(r.bound), _fmt(r.wall_time_ms)])
    return buf.getvalue().encode("utf-8")


def _num(text, missing=math.nan):
    return missing if text == "n/a" else float(text)


def parse_csv(data) -> list:
    """Inverse of :func:`emit_csv` for the columns the CSV carries."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = list(csv.reader(io.StringIO(data)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("missing or unexpected CSV header")
    out = []
    for row in rows[1:]:
        name, L, gamma, seed, opt, on, ratio, agree, bound, wall = row
        out.append(RatioReport(name, int(L), _num(gamma), int(seed), _num(opt), _num(on),
                               _num(ratio), _num(agree), _num(bound, None), _num(wall, None)))
    return out


def random_instance(rng, num_states: int, order: int, horizon: int, density: float = 1.0,
                    high: float = 1.0):
    """Uniform ``[0, high)`` reward table on a random ergodic graph."""
    rng = np.random.default_rng(rng)
    if density >= 1:
        graph = StateGraph.complete(num_states)
    else:
        graph = _random_graph(num_states, density, rng)
    table = rng.random((horizon,) + (num_states + 1,) * order + (num_states,)) * high
    return TableRewards(table, order), graph
