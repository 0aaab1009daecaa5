"""
State graphs, reward oracles and the latency audit.

Times are 0-based throughout: a horizon ``T`` covers times ``0 .. T-1``.
A context is a tuple of exactly ``order`` previous states, oldest first.
Before the first ``order`` steps the missing history is filled with the
reserved :data:`DUMMY` state.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.special import logsumexp

# Sentinel for "before the start of the sequence". Context axes of reward
# tables have size K+1 so that index -1 lands on the dummy slot.
DUMMY = -1


class NotErgodic(ValueError):
    pass


class NegativeReward(ValueError):
    pass


class Unbounded(ValueError):
    pass


class EdgeViolation(ValueError):
    pass


class LatencyViolation(RuntimeError):
    """A decoder asked for a reward outside its peek window."""


class StateGraph:
    """Directed transition structure over states ``0 .. num_states-1``.

    ``edges[s]`` lists the allowed successors of ``s``. Self-loops are
    ordinary edges. The dummy start state may move to any state.
    """

    def __init__(self, num_states: int, edges=None):
        if num_states < 1:
            raise ValueError("graph needs at least one state")
        self.num_states = int(num_states)
        if edges is None:
            edges = [range(num_states)] * num_states
        if len(edges) != num_states:
            raise ValueError("need one successor list per state")
        succ = []
        for s, targets in enumerate(edges):
            row = tuple(sorted(set(int(v) for v in targets)))
            if not row:
                raise ValueError(f"state {s} has no outgoing edge")
            if row[0] < 0 or row[-1] >= num_states:
                raise ValueError(f"state {s} has a successor outside the graph")
            succ.append(row)
        self.edges = tuple(succ)
        self._all = tuple(range(num_states))
        # fails early for non-ergodic graphs
        self.diameter

    @classmethod
    def complete(cls, num_states: int) -> "StateGraph":
        return cls(num_states)

    @classmethod
    def from_adjacency(cls, adjacency) -> "StateGraph":
        adjacency = np.asarray(adjacency, dtype=bool)
        return cls(len(adjacency), [np.flatnonzero(row) for row in adjacency])

    def successors(self, state: int) -> tuple[int, ...]:
        if state == DUMMY:
            return self._all
        return self.edges[state]

    def has_edge(self, u: int, v: int) -> bool:
        if u == DUMMY:
            return 0 <= v < self.num_states
        return v in self.edges[u]

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.num_states, self.num_states), dtype=bool)
        for u, row in enumerate(self.edges):
            adj[u, list(row)] = True
        return adj

    def transpose(self) -> "StateGraph":
        return StateGraph.from_adjacency(self.adjacency().T)

    def distances(self) -> np.ndarray:
        """All-pairs directed hop counts (``inf`` where unreachable)."""
        return shortest_path(csr_matrix(self.adjacency()), directed=True, unweighted=True)

    @cached_property
    def diameter(self) -> int:
        return compute_diameter(self)

    @property
    def is_complete(self) -> bool:
        return all(len(row) == self.num_states for row in self.edges)

    def __repr__(self):
        return f"StateGraph(num_states={self.num_states}, diameter={self.diameter})"


def compute_diameter(graph: StateGraph) -> int:
    """Longest shortest directed path over ordered pairs of distinct states.

    A single-state graph reports 1, the smallest admissible diameter.
    """
    dist = graph.distances()
    if np.isinf(dist).any():
        raise NotErgodic("some state cannot reach another")
    if graph.num_states == 1:
        return 1
    return int(dist.max())


def effective_diameter(diameter: int, order: int) -> int:
    return diameter + order - 1


def contexts_at(graph: StateGraph, order: int, t: int):
    """Every context that a valid path can present at time ``t``.

    Contexts at ``t < order`` carry ``order - t`` leading dummies; the rest
    is a walk in ``graph``.
    """
    dummies = max(0, order - t)
    walk_len = order - dummies
    head = (DUMMY,) * dummies
    if walk_len == 0:
        yield head
        return
    stack = [(s,) for s in range(graph.num_states)]
    while stack:
        walk = stack.pop()
        if len(walk) == walk_len:
            yield head + walk
            continue
        for v in graph.successors(walk[-1]):
            stack.append(walk + (v,))


def reachable_pairs(graph: StateGraph, order: int, t: int):
    """``(context, state)`` pairs that some valid path visits at time ``t``."""
    for ctx in contexts_at(graph, order, t):
        for y in graph.successors(ctx[-1]):
            yield ctx, y


class RewardOracle:
    """Time-indexed non-negative reward ``R_t(y | context)``.

    Subclasses implement :meth:`reward`. Oracles whose future rewards depend
    on the decoder's moves override :meth:`on_advance`, which the latency
    audit calls every time the decoder steps forward.
    """

    order: int
    horizon: int
    num_states: int

    def reward(self, t: int, y: int, context: tuple) -> float:
        raise NotImplementedError

    def on_advance(self, position: int, committed: list) -> None:
        pass


class TableRewards(RewardOracle):
    """Dense precomputed reward table.

    ``table`` has shape ``(T,) + (K+1,) * order + (K,)``; slot ``K`` of each
    context axis is the dummy state. This is also the ingestion path for
    rewards produced by external feature models (MEMM, CRF).
    """

    def __init__(self, table, order: int):
        table = np.asarray(table, dtype=float)
        k = table.shape[-1]
        if table.ndim != order + 2 or any(d != k + 1 for d in table.shape[1:-1]):
            raise ValueError(f"table shape {table.shape} does not fit order {order}")
        if np.isnan(table).any():
            raise ValueError("reward table contains NaN")
        if (table < 0).any():
            raise NegativeReward("reward table has negative entries")
        self.table = table
        self.order = order
        self.horizon = table.shape[0]
        self.num_states = k

    @classmethod
    def from_full_contexts(cls, table, order: int, fill: float = 0.0) -> "TableRewards":
        """Build from a ``(T,) + (K,) * (order+1)`` table; dummy slots get ``fill``."""
        table = np.asarray(table, dtype=float)
        k = table.shape[-1]
        full = np.full((table.shape[0],) + (k + 1,) * order + (k,), fill)
        full[(slice(None),) + (slice(0, k),) * order] = table
        return cls(full, order)

    def reward(self, t, y, context):
        return float(self.table[(t,) + tuple(context) + (y,)])


class HMMRewards(RewardOracle):
    """``log P(y | context) + log P(w_t | y) + offset`` for an order-n HMM.

    ``transitions`` is indexed like a :class:`TableRewards` slice, i.e. it
    has shape ``(K+1,) * order + (K,)`` with dummy context slots filled.
    """

    def __init__(self, transitions, emissions, observations, offset: float = 0.0):
        self.transitions = np.asarray(transitions, dtype=float)
        self.emissions = np.asarray(emissions, dtype=float)
        self.observations = np.asarray(observations, dtype=int)
        self.offset = float(offset)
        self.order = self.transitions.ndim - 1
        self.horizon = len(self.observations)
        self.num_states = self.emissions.shape[0]

    def raw(self, t, y, context):
        return float(self.transitions[tuple(context) + (y,)] + self.emissions[y, self.observations[t]])

    def reward(self, t, y, context):
        r = self.raw(t, y, context) + self.offset
        # round-off from a tight offset
        if -1e-9 < r < 0:
            return 0.0
        return r


class ShiftedRewards(RewardOracle):
    def __init__(self, base: RewardOracle, shift: float):
        self.base = base
        self.shift = float(shift)
        self.order = base.order
        self.horizon = base.horizon
        self.num_states = base.num_states

    def reward(self, t, y, context):
        r = self.base.reward(t, y, context) + self.shift
        if -1e-9 < r < 0:
            return 0.0
        return r

    def on_advance(self, position, committed):
        self.base.on_advance(position, committed)


class ZeroPadded(RewardOracle):
    """Appends ``extra`` zero-reward steps after the horizon."""

    def __init__(self, base: RewardOracle, extra: int):
        self.base = base
        self.extra = int(extra)
        self.order = base.order
        self.horizon = base.horizon + self.extra
        self.num_states = base.num_states

    def reward(self, t, y, context):
        if t >= self.base.horizon:
            return 0.0
        return self.base.reward(t, y, context)

    def on_advance(self, position, committed):
        self.base.on_advance(position, committed)


@dataclass
class LatencyAudit(RewardOracle):
    """Wraps an oracle for one decoding run and enforces the peek window.

    While the decoder stands at ``position`` it may read rewards for times up
    to ``position + latency``. Decoders must :meth:`commit` the label for a
    time before advancing past it.
    """

    oracle: RewardOracle
    latency: int
    record: bool = False
    position: int = 0
    committed: list = field(default_factory=list)
    violations: int = 0
    queries: int = 0
    log: list = field(default_factory=list)

    def __post_init__(self):
        if self.latency < 0:
            raise ValueError("latency must be non-negative")
        self.order = self.oracle.order
        self.horizon = self.oracle.horizon
        self.num_states = self.oracle.num_states

    def reward(self, t, y, context):
        if t > self.position + self.latency:
            self.violations += 1
            raise LatencyViolation(
                f"read time {t} from position {self.position} with latency {self.latency}"
            )
        if not 0 <= t < self.horizon:
            raise IndexError(f"time {t} outside horizon {self.horizon}")
        self.queries += 1
        value = self.oracle.reward(t, y, context)
        if self.record:
            self.log.append((self.position, t, y, tuple(context), value))
        return value

    def commit(self, *states):
        self.committed.extend(int(s) for s in states)

    def advance(self, position: int):
        if position < self.position:
            raise ValueError("decoder cannot move backwards")
        if len(self.committed) < position:
            raise RuntimeError(
                f"advancing to {position} with only {len(self.committed)} labels committed"
            )
        while self.position < position:
            self.position += 1
            self.oracle.on_advance(self.position, self.committed)


def commitment_violations(log) -> list:
    """Keys of an audit log whose reward changed after being revealed."""
    seen = {}
    bad = []
    for _, t, y, ctx, value in log:
        key = (t, y, ctx)
        if key in seen and seen[key] != value:
            bad.append(key)
        seen.setdefault(key, value)
    return bad


@dataclass(frozen=True)
class DecodePath:
    labels: tuple
    step_rewards: tuple
    total: float

    def __len__(self):
        return len(self.labels)


def score_path(labels, oracle: RewardOracle, graph: StateGraph) -> DecodePath:
    """Per-step rewards of ``labels`` using the path's own history as context."""
    labels = tuple(int(s) for s in labels)
    if len(labels) != oracle.horizon:
        raise ValueError(f"path has {len(labels)} labels, horizon is {oracle.horizon}")
    ctx = (DUMMY,) * oracle.order
    rewards = []
    for t, y in enumerate(labels):
        if not graph.has_edge(ctx[-1], y):
            raise EdgeViolation(f"no edge {ctx[-1]} -> {y} at time {t}")
        rewards.append(oracle.reward(t, y, ctx))
        ctx = ctx[1:] + (y,)
    return DecodePath(labels, tuple(rewards), math.fsum(rewards))


def total_reward(path, oracle: RewardOracle, graph: StateGraph) -> float:
    labels = path.labels if isinstance(path, DecodePath) else path
    return score_path(labels, oracle, graph).total


def min_reward(oracle: RewardOracle, graph: StateGraph, raw: bool = False) -> float:
    """Smallest reward over every reachable ``(t, state, context)``."""
    get = oracle.raw if raw else oracle.reward
    lowest = math.inf
    pairs_cache = {}
    for t in range(oracle.horizon):
        key = min(t, oracle.order)
        if key not in pairs_cache:
            pairs_cache[key] = list(reachable_pairs(graph, oracle.order, t))
        for ctx, y in pairs_cache[key]:
            lowest = min(lowest, get(t, y, ctx))
    return lowest


def positivize_rewards(raw: RewardOracle, graph: StateGraph):
    """Shift every reward by the same ``p`` so the smallest reachable one is 0.

    Returns ``(oracle, p)``. A uniform per-step shift adds ``T * p`` to every
    path, so the set of optimal paths is unchanged.
    """
    lowest = min_reward(raw, graph)
    if math.isinf(lowest) or math.isnan(lowest):
        raise Unbounded("a reachable transition has reward -inf")
    p = -lowest if lowest < 0 else 0.0
    return ShiftedRewards(raw, p), p


def fill_dummy_contexts(transitions, initial=None) -> np.ndarray:
    """Embed a ``(K,) * (n+1)`` log-transition table into ``(K+1,) * n + (K,)``.

    All-dummy contexts use ``initial`` (uniform if omitted). A context with
    some leading dummies averages the probabilities of all full contexts that
    share its known suffix.
    """
    transitions = np.asarray(transitions, dtype=float)
    n = transitions.ndim - 1
    k = transitions.shape[-1]
    out = np.full((k + 1,) * n + (k,), -np.inf)
    out[(slice(0, k),) * n] = transitions
    for d in range(1, n + 1):
        for suffix in itertools.product(range(k), repeat=n - d):
            ctx = (DUMMY,) * d + suffix
            if d == n:
                if initial is None:
                    row = np.full(k, -math.log(k))
                else:
                    row = np.asarray(initial, dtype=float)
            else:
                block = transitions[(slice(None),) * d + suffix]
                row = logsumexp(block.reshape(-1, k), axis=0) - d * math.log(k)
            out[ctx] = row
    return out


def _build_hmm(transition_logprobs, emission_logprobs, observations, offset, initial_logprobs):
    trans = np.asarray(transition_logprobs, dtype=float)
    emis = np.asarray(emission_logprobs, dtype=float)
    k = emis.shape[0]
    if trans.shape[-1] != k:
        raise ValueError("transition and emission tables disagree on the state count")
    if all(d == k for d in trans.shape):
        trans = fill_dummy_contexts(trans, initial_logprobs)
    elif not all(d == k + 1 for d in trans.shape[:-1]):
        raise ValueError(f"transition table shape {trans.shape} not understood")
    return HMMRewards(trans, emis, observations, offset)


def hmm_rewards(transition_logprobs, emission_logprobs, observations, offset: float = 0.0,
                graph: StateGraph | None = None, initial_logprobs=None) -> HMMRewards:
    """Reward oracle for an order-n HMM, checked non-negative on ``graph``.

    ``transition_logprobs`` is either ``(K,) * (n+1)`` (dummy contexts are
    then derived by :func:`fill_dummy_contexts`) or already
    ``(K+1,) * n + (K,)``.
    """
    oracle = _build_hmm(transition_logprobs, emission_logprobs, observations, offset,
                        initial_logprobs)
    graph = graph or StateGraph.complete(oracle.num_states)
    lowest = min_reward(oracle, graph, raw=True)
    if math.isinf(lowest):
        raise NegativeReward("a reachable transition or emission has probability 0")
    if lowest + offset < -1e-9:
        raise NegativeReward(f"offset {offset} leaves reward {lowest + offset} < 0")
    return oracle


def tight_offset(transition_logprobs, emission_logprobs, observations,
                 graph: StateGraph | None = None, initial_logprobs=None) -> float:
    """Smallest offset that makes the HMM oracle non-negative."""
    oracle = _build_hmm(transition_logprobs, emission_logprobs, observations, 0.0,
                        initial_logprobs)
    lowest = min_reward(oracle, graph or StateGraph.complete(oracle.num_states), raw=True)
    if math.isinf(lowest):
        raise Unbounded("a reachable transition or emission has probability 0")
    return max(0.0, -lowest)
