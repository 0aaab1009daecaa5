"""
HMM models on disk and synthetic model generation.

Model files are UTF-8 JSON::

    {
      "states": ["A", "B"],
      "order": 1,
      "vocabulary": ["x", "y"],
      "edges": {"A": ["A", "B"], "B": ["A"]},          # optional
      "transition_logprobs": {"*": {"A": -0.69, ...}, "A": {...}, ...},
      "emission_logprobs": {"A": {"x": -0.1, ...}, ...}
    }

Transition contexts are the previous ``order`` state names joined by single
spaces, oldest first; ``*`` stands for the dummy start state. Missing
entries are impossible transitions/emissions. Missing dummy contexts are
derived (uniform start, suffix-averaged partial contexts).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    DUMMY,
    HMMRewards,
    NotErgodic,
    StateGraph,
    Unbounded,
    fill_dummy_contexts,
    hmm_rewards,
    min_reward,
)

DUMMY_NAME = "*"


@dataclass
class HMMModel:
    states: list
    vocabulary: list
    order: int
    graph: StateGraph
    transitions: np.ndarray      # (K+1,)*order + (K,), dummy slot last
    emissions: np.ndarray        # (K, V)
    explicit_edges: bool = True

    @property
    def num_states(self):
        return len(self.states)

    def encode(self, tokens) -> np.ndarray:
        index = {w: i for i, w in enumerate(self.vocabulary)}
        try:
            return np.array([index[w] for w in tokens], dtype=int)
        except KeyError as exc:
            raise ValueError(f"token {exc.args[0]!r} is not in the vocabulary") from None

    def rewards(self, observations, offset: float | None = None) -> HMMRewards:
        """Reward oracle for ``observations``; ``offset=None`` picks the tight shift."""
        obs = np.asarray(observations, dtype=int)
        if offset is None:
            offset = self.tight_offset(obs)
        return hmm_rewards(self.transitions, self.emissions, obs, offset, graph=self.graph)

    def tight_offset(self, observations) -> float:
        """Smallest shift that makes every reachable reward non-negative."""
        raw = HMMRewards(self.transitions, self.emissions, np.asarray(observations, dtype=int))
        lowest = min_reward(raw, self.graph, raw=True)
        if math.isinf(lowest):
            raise Unbounded("observations contain a zero-probability emission or transition")
        return max(0.0, -lowest)

    def to_dict(self) -> dict:
        names = self.states
        k = self.num_states
        out = {"states": list(names), "order": self.order, "vocabulary": list(self.vocabulary)}
        if self.explicit_edges:
            out["edges"] = {names[u]: [names[v] for v in row]
                            for u, row in enumerate(self.graph.edges)}
        trans = {}
        for ctx in _all_contexts(k, self.order):
            row = self.transitions[ctx]
            entries = {names[y]: float(row[y]) for y in range(k) if np.isfinite(row[y])}
            if entries:
                trans[_context_key(ctx, names)] = entries
        out["transition_logprobs"] = trans
        out["emission_logprobs"] = {
            names[s]: {w: float(self.emissions[s, j]) for j, w in enumerate(self.vocabulary)
                       if np.isfinite(self.emissions[s, j])}
            for s in range(k)
        }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    def sample(self, horizon: int, seed=None):
        """Draw ``(states, observations)`` of length ``horizon``."""
        rng = np.random.default_rng(seed)
        ctx = (DUMMY,) * self.order
        states, obs = [], []
        probs_e = np.exp(self.emissions)
        for _ in range(horizon):
            p = np.exp(self.transitions[ctx])
            y = int(rng.choice(self.num_states, p=p / p.sum()))
            w = int(rng.choice(len(self.vocabulary), p=probs_e[y] / probs_e[y].sum()))
            states.append(y)
            obs.append(w)
            ctx = ctx[1:] + (y,)
        return np.array(states), np.array(obs)


def _all_contexts(k, order):
    """Full contexts plus dummy-prefixed ones, dummies written as ``-1``."""
    for d in range(order, -1, -1):
        for suffix in itertools.product(range(k), repeat=order - d):
            yield (DUMMY,) * d + suffix


def _context_key(ctx, names):
    return " ".join(DUMMY_NAME if s == DUMMY else names[s] for s in ctx)


def model_from_dict(data: dict) -> HMMModel:
    try:
        names = list(data["states"])
        order = int(data["order"])
        vocab = list(data["vocabulary"])
        trans_in = data["transition_logprobs"]
        emis_in = data["emission_logprobs"]
    except KeyError as exc:
        raise ValueError(f"model file lacks field {exc.args[0]!r}") from None
    if order < 1:
        raise ValueError("order must be at least 1")
    if len(set(names)) != len(names) or DUMMY_NAME in names:
        raise ValueError("state names must be unique and differ from '*'")
    if any(not s or any(c.isspace() for c in s) for s in names):
        raise ValueError("state names must be non-empty and contain no whitespace")
    k = len(names)
    sidx = {s: i for i, s in enumerate(names)}
    widx = {w: i for i, w in enumerate(vocab)}

    def state(name):
        if name not in sidx:
            raise ValueError(f"unknown state {name!r}")
        return sidx[name]

    if "edges" in data and data["edges"] is not None:
        edges = [[state(v) for v in data["edges"].get(s, [])] for s in names]
        graph = StateGraph(k, edges)
        explicit = True
    else:
        graph = StateGraph.complete(k)
        explicit = False

    full = np.full((k,) * (order + 1), -np.inf)
    partial = {}
    for key, row in trans_in.items():
        parts = key.split()
        if len(parts) != order:
            raise ValueError(f"context {key!r} does not have {order} states")
        ctx = tuple(DUMMY if p == DUMMY_NAME else state(p) for p in parts)
        vec = np.full(k, -np.inf)
        for y, lp in row.items():
            vec[state(y)] = float(lp)
        if DUMMY in ctx:
            d = sum(1 for c in ctx if c == DUMMY)
            if ctx[:d] != (DUMMY,) * d:
                raise ValueError(f"dummies must lead the context {key!r}")
            partial[ctx] = vec
        else:
            full[ctx] = vec

    initial = partial.get((DUMMY,) * order)
    transitions = fill_dummy_contexts(full, initial)
    for ctx, vec in partial.items():
        transitions[ctx] = vec

    emissions = np.full((k, len(vocab)), -np.inf)
    for s, row in emis_in.items():
        for w, lp in row.items():
            if w not in widx:
                raise ValueError(f"emission token {w!r} is not in the vocabulary")
            emissions[state(s), widx[w]] = float(lp)
    return HMMModel(names, vocab, order, graph, transitions, emissions, explicit)


def load_model(path) -> HMMModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def read_observations(path) -> list:
    """One token per line; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


@dataclass(frozen=True)
class SyntheticSpec:
    num_states: int
    order: int = 1
    vocab_size: int = 4
    horizon: int = 100
    transition_concentration: float = 1.0
    emission_concentration: float = 1.0
    edge_density: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_states < 1 or self.order < 1 or self.vocab_size < 1 or self.horizon < 1:
            raise ValueError("sizes must be positive")
        if not 0 < self.edge_density <= 1:
            raise ValueError("edge density must lie in (0, 1]")
        if self.transition_concentration <= 0 or self.emission_concentration <= 0:
            raise ValueError("concentrations must be positive")


def _random_graph(k, density, rng, attempts=100):
    if density >= 1:
        return StateGraph.complete(k)
    for _ in range(attempts):
        adj = rng.random((k, k)) < density
        for u in range(k):
            if not adj[u].any():
                adj[u, rng.integers(k)] = True
        try:
            return StateGraph.from_adjacency(adj)
        except NotErgodic:
            continue
    raise NotErgodic(f"no ergodic graph after {attempts} attempts")


def _dirichlet(rng, concentration, dim, size=None):
    # floor keeps log-probabilities finite for small concentrations
    p = np.maximum(rng.dirichlet(np.full(dim, concentration), size=size), 1e-12)
    return p / p.sum(axis=-1, keepdims=True)


def generate_synthetic_hmm(spec: SyntheticSpec):
    """Random order-n HMM with Dirichlet rows; returns ``(graph, model)``."""
    rng = np.random.default_rng(spec.seed)
    k, n, v = spec.num_states, spec.order, spec.vocab_size
    graph = _random_graph(k, spec.edge_density, rng)
    full = np.full((k,) * (n + 1), -np.inf)
    for ctx in itertools.product(range(k), repeat=n):
        succ = list(graph.successors(ctx[-1]))
        p = _dirichlet(rng, spec.transition_concentration, len(succ))
        full[ctx][succ] = np.log(p)
    initial = np.log(_dirichlet(rng, spec.transition_concentration, k))
    emissions = np.log(_dirichlet(rng, spec.emission_concentration, v, size=k))
    transitions = fill_dummy_contexts(full, initial)
    names = [f"s{i}" for i in range(k)]
    vocab = [f"w{j}" for j in range(v)]
    model = HMMModel(names, vocab, n, graph, transitions, emissions,
                     explicit_edges=spec.edge_density < 1)
    return graph, model

