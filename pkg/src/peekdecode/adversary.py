"""
Lower-bound instances: prismatic polytopes, the adaptive deterministic game
and the hidden-row instance used against randomized decoders.

In both constructions a state only pays out after it has been occupied for
``order`` consecutive steps (a dummy-start prefix counts as occupied).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decoders import online_decode, viterbi_decode
from .model import DUMMY, LatencyViolation, RewardOracle, StateGraph, score_path


class ProtocolViolation(LatencyViolation):
    """Reward read from a column the adversary has not revealed yet."""


def adversary_constant_a(L: int, n: int) -> float:
    """Positive root of ``n a^2 - (n+L-1) a - 1 = 0``.

    At this value staying put and switching states give the decoder the
    same ratio in the deterministic game.
    """
    if L < 1 or n < 1:
        raise ValueError("need L >= 1 and n >= 1")
    m = n + L - 1
    return (m + math.sqrt(m * m + 4 * n)) / (2 * n)


def game_floor(L: int, n: int, delta: int = 1) -> float:
    """``min(r1, r2)`` of the game at ``adversary_constant_a``.

    For ``delta > 1`` the order is replaced by the effective diameter.
    """
    eff = n + delta - 1
    a = adversary_constant_a(L, eff)
    r1 = 1 + eff * a / (1 + (L - 1) * a)
    r2 = 1 + (1 + eff * a) / (L * a)
    return min(r1, r2)


def build_prismatic_polytope(delta: int, base_size: int,
                             strongly_connected_faces: bool = False) -> StateGraph:
    """Iterated prism over a ``base_size``-vertex base, as a state graph.

    Vertex ``b * base_size + v`` is base vertex ``v`` in copy ``b`` of the
    base; copies are the corners of a ``(delta-1)``-cube and rungs join
    copies that differ in one coordinate. Every vertex keeps a self-loop.
    Base faces with more than three vertices are only allowed when
    ``strongly_connected_faces`` is set (they are then complete); a bare
    cycle would push the diameter above ``delta``.
    """
    if delta < 1 or base_size < 1:
        raise ValueError("need delta >= 1 and base_size >= 1")
    if base_size > 3 and not strongly_connected_faces:
        raise ValueError("base faces above 3 vertices must be strongly connected")
    m = base_size
    copies = 2 ** (delta - 1)
    edges = []
    for b in range(copies):
        for v in range(m):
            row = [b * m + w for w in range(m)]
            row += [(b ^ (1 << k)) * m + v for k in range(delta - 1)]
            edges.append(row)
    return StateGraph(m * copies, edges)


class RepeatRewards(RewardOracle):
    """Column matrix where a state pays only after ``order`` consecutive visits.

    ``matrix[t, s]`` is NaN until the adversary reveals column ``t``.
    """

    def __init__(self, matrix, order: int):
        self.matrix = np.array(matrix, dtype=float)
        self.order = order
        self.horizon, self.num_states = self.matrix.shape

    def reward(self, t, y, context):
        value = self.matrix[t, y]
        if math.isnan(value):
            raise ProtocolViolation(f"column {t} has not been revealed")
        if all(c == y or c == DUMMY for c in context):
            return float(value)
        return 0.0

    def frozen(self) -> "RepeatRewards":
        return RepeatRewards(self.matrix.copy(), self.order)


class AdaptiveGame(RepeatRewards):
    """Reward matrix of the deterministic game, revealed column by column.

    Columns ``0 .. L`` are ``0, 1, a, ..., a`` for every state. Once the
    decoder has committed its first state ``s0``, column ``L+1`` pays
    ``(n+d-1) a`` at distance ``d`` from ``s0``. Once it has committed its
    second state ``s1``, the last column is all zero if ``s1 == s0`` and
    otherwise pays ``a`` everywhere except ``s0`` and ``s1``.
    """

    def __init__(self, graph: StateGraph, L: int, n: int, a: float | None = None):
        self.graph = graph
        self.latency = L
        if a is None:
            a = adversary_constant_a(L, n + graph.diameter - 1)
        self.a = float(a)
        matrix = np.full((L + 3, graph.num_states), np.nan)
        matrix[0] = 0.0
        matrix[1] = 1.0
        matrix[2:L + 1] = self.a
        super().__init__(matrix, n)
        self.distances = graph.distances()

    def on_advance(self, position, committed):
        L, n, a = self.latency, self.order, self.a
        if position == 1:
            s0 = committed[0]
            d = self.distances[s0]
            self.matrix[L + 1] = np.where(d > 0, (n + d - 1) * a, 0.0)
        elif position == 2:
            s0, s1 = committed[0], committed[1]
            last = np.zeros(self.num_states)
            if s1 != s0:
                last[:] = a
                last[[s0, s1]] = 0.0
            self.matrix[L + 2] = last


@dataclass
class RatioOutcome:
    opt: float
    on: float
    ratio: float
    matrix: np.ndarray
    online_labels: tuple
    opt_labels: tuple
    trace: object = None


def _run(decoder, oracle, graph, latency, record):
    if isinstance(decoder, str):
        return online_decode(decoder, oracle, graph, latency, record=record)
    return decoder(oracle, graph, latency)


def play_deterministic_game(decoder, L: int, n: int, delta: int = 1, a: float | None = None,
                            record: bool = True) -> RatioOutcome:
    """Play the adaptive lower-bound game against ``decoder``.

    ``decoder`` is a decoder name or a callable ``(oracle, graph, latency)``
    returning a trace with ``.labels``. OPT is the exact best path through
    the final matrix.
    """
    graph = build_prismatic_polytope(delta, 3)
    game = AdaptiveGame(graph, L, n, a)
    trace = _run(decoder, game, graph, L, record)
    final = game.frozen()
    if np.isnan(final.matrix).any():
        raise ProtocolViolation("game ended before every column was revealed")
    best = viterbi_decode(final, graph)
    on = score_path(trace.labels, final, graph).total
    return RatioOutcome(best.total, on, best.total / on if on > 0 else math.inf,
                        final.matrix, tuple(trace.labels), best.labels, trace)


def randomized_adversary_instance(epsilon: float, delta: int, n: int, L: int, seed):
    """Hidden-row instance; returns ``(graph, oracle, OPT)``.

    ``u = 2^(delta-1) * ceil(1/epsilon)`` states; columns are ``0``, then
    ``L`` columns of ones, then a column that pays ``n`` on one secret state
    drawn from ``seed``.
    """
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    base = math.ceil(1 / epsilon)
    graph = build_prismatic_polytope(delta, base, strongly_connected_faces=delta > 1 or base > 3)
    u = graph.num_states
    secret = int(np.random.default_rng(seed).integers(u))
    matrix = np.zeros((L + 2, u))
    matrix[1:L + 1] = 1.0
    matrix[L + 1, secret] = n
    return graph, RepeatRewards(matrix, n), float(L + n)
