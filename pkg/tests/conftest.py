"""Shared instance generators and brute-force reference decoders."""
import itertools
import math

import numpy as np
import pytest

from peekdecode.harness import random_instance
from peekdecode.model import DUMMY

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def path_reward(labels, oracle, graph, start=0, history=None, gamma=1.0):
    """Discounted reward of ``labels`` from ``start``, or ``None`` if an edge is missing."""
    ctx = tuple(history) if history is not None else (DUMMY,) * oracle.order
    total = 0.0
    for ell, y in enumerate(labels):
        if not graph.has_edge(ctx[-1], y):
            return None
        total += gamma ** ell * oracle.reward(start + ell, y, ctx)
        ctx = ctx[1:] + (y,)
    return total


def brute_best(oracle, graph, start, steps, history, gamma=1.0):
    """Best ``(score, path)`` by enumerating all ``K ** steps`` label sequences."""
    best = (-math.inf, None)
    for labels in itertools.product(range(oracle.num_states), repeat=steps):
        value = path_reward(labels, oracle, graph, start, history, gamma)
        if value is not None and value > best[0]:
            best = (value, labels)
    return best


def brute_viterbi(oracle, graph):
    return brute_best(oracle, graph, 0, oracle.horizon, (DUMMY,) * oracle.order)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_instance():
    return random_instance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (len(k), k)):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")


def table_brute_best(oracle, graph, start, steps, history, gamma=1.0):
    """Vectorised enumeration over a :class:`TableRewards` oracle.

    Returns the best discounted score of any valid ``steps``-long path.
    """
    k, n = oracle.num_states, oracle.order
    paths = np.array(list(itertools.product(range(k), repeat=steps)), dtype=int).reshape(-1, steps)
    hist = np.tile(np.asarray(history, dtype=int), (len(paths), 1))
    full = np.concatenate([hist, paths], axis=1)
    # row k of the padded adjacency stands for the dummy start state
    adj = np.vstack([graph.adjacency(), np.ones(k, dtype=bool)])
    valid = np.ones(len(paths), dtype=bool)
    total = np.zeros(len(paths))
    for ell in range(steps):
        ctx = full[:, ell:ell + n]
        y = full[:, ell + n]
        valid &= adj[ctx[:, -1], y]
        idx = (np.full(len(paths), start + ell),) + tuple(ctx.T) + (y,)
        total += gamma ** ell * oracle.table[idx]
    return total[valid].max()
