"""
Offline and latency-bounded decoders.

Every online decoder runs against a fresh :class:`~peekdecode.model.LatencyAudit`
so that reading a reward beyond ``position + L`` fails loudly. The audit is
returned on the trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import default_gamma
from .model import (
    DecodePath,
    LatencyAudit,
    RewardOracle,
    StateGraph,
    ZeroPadded,
    reachable_pairs,
    score_path,
)
from .trellis import best_path, initial_history


@dataclass(frozen=True)
class PeekConfig:
    latency: int
    gamma: float | None = None
    padding: bool = False

    def __post_init__(self):
        if self.latency < 0:
            raise ValueError("latency must be non-negative")
        if self.gamma is not None and not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")


@dataclass
class DecodeTrace:
    path: DecodePath
    latency: int
    gamma: float = 1.0
    choices: list = field(default_factory=list)
    recompute_times: list = field(default_factory=list)
    audit: LatencyAudit | None = None
    reset_point: int | None = None

    @property
    def labels(self):
        return self.path.labels

    @property
    def total(self):
        return self.path.total

    @property
    def violations(self):
        return self.audit.violations if self.audit is not None else 0


def viterbi_trace(oracle: RewardOracle, graph: StateGraph, record: bool = False) -> DecodeTrace:
    """Exact maximum-reward path; it sees the whole horizon (``L = T - 1``)."""
    audit = LatencyAudit(oracle, max(oracle.horizon - 1, 0), record=record)
    plan = best_path(audit, graph, 0, oracle.horizon, initial_history(oracle.order), 1.0)
    audit.commit(*plan.path)
    return DecodeTrace(score_path(plan.path, oracle, graph), audit.latency, 1.0,
                       [plan.path], [0], audit)


def viterbi_decode(oracle: RewardOracle, graph: StateGraph) -> DecodePath:
    return viterbi_trace(oracle, graph).path


def peek_search_step(oracle: RewardOracle, graph: StateGraph, config: PeekConfig, now: int,
                     history: tuple, gamma: float | None = None):
    """One Peek Search decision at time ``now``.

    Returns ``(next_state, lookahead_path, discounted_score)``. The window is
    cut at the horizon.
    """
    if gamma is None:
        gamma = config.gamma if config.gamma is not None else \
            default_gamma(config.latency, oracle.order, graph.diameter)
    steps = min(config.latency + 1, oracle.horizon - now)
    plan = best_path(oracle, graph, now, steps, history, gamma)
    return plan.path[0], plan.path, plan.score


def peek_search_decode(oracle: RewardOracle, graph: StateGraph, config: PeekConfig,
                       record: bool = False) -> DecodeTrace:
    """Re-plan the best discounted ``L+1``-step path at every time, take one step.

    With ``config.padding`` the horizon is extended by ``L+1`` zero-reward
    steps; the decoder already starts from the dummy state, which plays the
    role of the leading zero-reward margin.
    """
    L = config.latency
    gamma = config.gamma if config.gamma is not None else \
        default_gamma(L, oracle.order, graph.diameter)
    source = ZeroPadded(oracle, L + 1) if config.padding else oracle
    audit = LatencyAudit(source, L, record=record)
    history = initial_history(oracle.order)
    choices = []
    for i in range(oracle.horizon):
        audit.advance(i)
        state, lookahead, _ = peek_search_step(audit, graph, config, i, history, gamma)
        audit.commit(state)
        choices.append(lookahead)
        history = history[1:] + (state,)
    path = score_path(audit.committed, oracle, graph)
    return DecodeTrace(path, L, gamma, choices, list(range(oracle.horizon)), audit)


def greedy_decode(oracle: RewardOracle, graph: StateGraph, record: bool = False) -> DecodeTrace:
    """Zero-latency baseline: best immediate reward, lowest state on ties."""
    audit = LatencyAudit(oracle, 0, record=record)
    history = initial_history(oracle.order)
    choices = []
    for i in range(oracle.horizon):
        audit.advance(i)
        best, best_r = None, None
        for y in graph.successors(history[-1]):
            r = audit.reward(i, y, history)
            if best is None or r > best_r:
                best, best_r = y, r
        audit.commit(best)
        choices.append((best,))
        history = history[1:] + (best,)
    path = score_path(audit.committed, oracle, graph)
    return DecodeTrace(path, 0, 1.0, choices, list(range(oracle.horizon)), audit)


def draw_reset_point(latency: int, seed) -> int:
    """Reset offset in ``1 .. L+1`` drawn from ``numpy.random.default_rng(seed)``."""
    return int(np.random.default_rng(seed).integers(1, latency + 2))


def randomized_peek_search_decode(oracle: RewardOracle, graph: StateGraph, latency: int,
                                  seed=None, reset_point: int | None = None,
                                  record: bool = False) -> DecodeTrace:
    """Commit to an undiscounted best ``L+1``-step plan once every ``L+1`` steps.

    The 1-based reset offset ``ell`` is drawn once from ``seed`` (or passed in
    directly). Plans start at 1-based times ``ell, ell + (L+1), ...``; the
    first ``ell - 1`` steps follow the undiscounted best path of that length
    planned at the start.
    """
    if latency < 1:
        raise ValueError("Randomized Peek Search needs L >= 1")
    if reset_point is None:
        reset_point = draw_reset_point(latency, seed)
    if not 1 <= reset_point <= latency + 1:
        raise ValueError("reset point must lie in 1 .. L+1")
    T = oracle.horizon
    audit = LatencyAudit(oracle, latency, record=record)
    history = initial_history(oracle.order)
    choices, recompute = [], []

    segments = []
    if reset_point > 1:
        segments.append((0, min(reset_point - 1, T)))
    start = reset_point - 1
    while start < T:
        segments.append((start, min(latency + 1, T - start)))
        start += latency + 1

    for start, steps in segments:
        if steps <= 0:
            continue
        audit.advance(start)
        plan = best_path(audit, graph, start, steps, history, 1.0)
        audit.commit(*plan.path)
        recompute.append(start)
        choices.append(plan.path)
        for y in plan.path:
            history = history[1:] + (y,)
    path = score_path(audit.committed, oracle, graph)
    trace = DecodeTrace(path, latency, 1.0, choices, recompute, audit, reset_point)
    return trace


def _peak_reward(oracle, graph, t, cache):
    """Largest reward any valid path could collect at time ``t``."""
    if t >= oracle.horizon:
        return 0.0
    if t not in cache:
        cache[t] = max(oracle.reward(t, y, ctx)
                       for ctx, y in reachable_pairs(graph, oracle.order, t))
    return cache[t]


def peek_reset_decode(oracle: RewardOracle, graph: StateGraph, latency: int,
                      order: int | None = None, record: bool = False) -> DecodeTrace:
    """Variable-length phases ending where the best available reward is smallest.

    A phase starting at ``s`` ends at the smallest ``t`` in
    ``s + L//2 + 1 .. s + L`` minimising the peak single-step reward at
    ``t`` (times past the horizon count as zero). The phase commits the
    undiscounted best path over ``s .. t-1``.
    """
    if latency < 1:
        raise ValueError("Peek Reset needs L >= 1")
    if order is not None and order != oracle.order:
        raise ValueError("order does not match the oracle")
    T = oracle.horizon
    audit = LatencyAudit(oracle, latency, record=record)
    history = initial_history(oracle.order)
    choices, recompute = [], []
    peaks = {}
    start = 0
    while start < T:
        audit.advance(start)
        candidates = range(start + latency // 2 + 1, start + latency + 1)
        end = min(candidates, key=lambda t: (_peak_reward(audit, graph, t, peaks), t))
        end = min(end, T)
        plan = best_path(audit, graph, start, end - start, history, 1.0)
        audit.commit(*plan.path)
        recompute.append(start)
        choices.append(plan.path)
        for y in plan.path:
            history = history[1:] + (y,)
        start = end
    path = score_path(audit.committed, oracle, graph)
    return DecodeTrace(path, latency, 1.0, choices, recompute, audit)


def online_decode(name: str, oracle: RewardOracle, graph: StateGraph, latency: int,
                  gamma: float | None = None, seed=None, padding: bool = False,
                  record: bool = False) -> DecodeTrace:
    """Dispatch by decoder name, as used by the harness and the CLI."""
    if name == "viterbi":
        return viterbi_trace(oracle, graph, record=record)
    if name == "peek_search":
        return peek_search_decode(oracle, graph, PeekConfig(latency, gamma, padding), record)
    if name == "greedy":
        return greedy_decode(oracle, graph, record=record)
    if name == "randomized_peek_search":
        return randomized_peek_search_decode(oracle, graph, latency, seed=seed, record=record)
    if name == "peek_reset":
        return peek_reset_decode(oracle, graph, latency, record=record)
    raise ValueError(f"unknown decoder {name!r}")


DECODERS = ("viterbi", "peek_search", "randomized_peek_search", "peek_reset", "greedy")

__all__ = [
    "DECODERS", "DecodeTrace", "PeekConfig", "draw_reset_point", "greedy_decode",
    "online_decode", "peek_reset_decode", "peek_search_decode", "peek_search_step",
    "randomized_peek_search_decode", "viterbi_decode", "viterbi_trace",
]
