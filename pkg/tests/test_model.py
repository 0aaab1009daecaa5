import math

import numpy as np
import pytest

from peekdecode.model import (
    DUMMY,
    EdgeViolation,
    LatencyAudit,
    LatencyViolation,
    NegativeReward,
    NotErgodic,
    StateGraph,
    TableRewards,
    Unbounded,
    commitment_violations,
    compute_diameter,
    contexts_at,
    effective_diameter,
    fill_dummy_contexts,
    hmm_rewards,
    min_reward,
    positivize_rewards,
    score_path,
    tight_offset,
)


def test_diameter_complete_and_cycle():
    assert compute_diameter(StateGraph.complete(5)) == 1
    cycle = StateGraph(4, [[1], [2], [3], [0]])
    assert cycle.diameter == 3
    assert compute_diameter(StateGraph(1, [[0]])) == 1


def test_diameter_rejects_unreachable_pairs():
    with pytest.raises(NotErgodic):
        compute_diameter(StateGraph(3, [[1], [0], [2]]))


def test_effective_diameter():
    assert effective_diameter(1, 1) == 1
    assert effective_diameter(3, 2) == 4


def test_dummy_reaches_everything():
    g = StateGraph(3, [[1], [2], [0]])
    assert g.successors(DUMMY) == (0, 1, 2)
    assert g.has_edge(DUMMY, 2)
    assert not g.has_edge(0, 2)


def test_contexts_follow_edges():
    g = StateGraph(2, [[1], [0, 1]])
    ctxs = set(contexts_at(g, 2, 2))
    assert ctxs == {(0, 1), (1, 0), (1, 1)}
    assert set(contexts_at(g, 2, 0)) == {(DUMMY, DUMMY)}


def test_table_rejects_negative():
    table = np.zeros((3, 3, 2))
    table[1, 0, 1] = -0.1
    with pytest.raises(NegativeReward):
        TableRewards(table, 1)


def test_table_dummy_slot():
    table = np.arange(2 * 3 * 2, dtype=float).reshape(2, 3, 2)
    oracle = TableRewards(table, 1)
    assert oracle.reward(0, 1, (DUMMY,)) == table[0, 2, 1]
    assert oracle.reward(1, 0, (1,)) == table[1, 1, 0]


def test_audit_blocks_reads_past_window():
    oracle = TableRewards(np.ones((6, 3, 2)), 1)
    audit = LatencyAudit(oracle, 2)
    audit.reward(2, 0, (DUMMY,))
    with pytest.raises(LatencyViolation):
        audit.reward(3, 0, (DUMMY,))
    assert audit.violations == 1


def test_audit_requires_commit_before_advance():
    audit = LatencyAudit(TableRewards(np.ones((4, 3, 2)), 1), 1)
    with pytest.raises(RuntimeError):
        audit.advance(1)
    audit.commit(0)
    audit.advance(1)
    assert audit.position == 1


def test_commitment_violations_detects_changed_values():
    log = [(0, 1, 0, (DUMMY,), 1.0), (1, 1, 0, (DUMMY,), 2.0), (1, 2, 0, (0,), 1.0)]
    assert commitment_violations(log) == [(1, 0, (DUMMY,))]
    assert commitment_violations(log[:1] + log[2:]) == []


def test_score_path_checks_edges():
    g = StateGraph(2, [[1], [0]])
    oracle = TableRewards(np.ones((3, 3, 2)), 1)
    assert score_path((0, 1, 0), oracle, g).total == 3.0
    with pytest.raises(EdgeViolation):
        score_path((0, 0, 1), oracle, g)
    with pytest.raises(ValueError):
        score_path((0, 1), oracle, g)


def test_positivize_shifts_minimum_to_zero():
    raw = TableRewards(np.ones((3, 3, 2)), 1)
    shifted, p = positivize_rewards(_Neg(raw), StateGraph.complete(2))
    assert p == pytest.approx(2.0)
    assert min_reward(shifted, StateGraph.complete(2)) == pytest.approx(0.0)


class _Neg:
    """Negated view of an oracle, for positivization tests."""

    def __init__(self, base):
        self.base = base
        self.order, self.horizon, self.num_states = base.order, base.horizon, base.num_states

    def reward(self, t, y, ctx):
        return -self.base.reward(t, y, ctx) * (1 + t % 2)

    def on_advance(self, position, committed):
        pass


def test_positivize_rejects_minus_infinity():
    class Inf(_Neg):
        def reward(self, t, y, ctx):
            return -math.inf

    with pytest.raises(Unbounded):
        positivize_rewards(Inf(TableRewards(np.ones((2, 3, 2)), 1)), StateGraph.complete(2))


def test_fill_dummy_contexts_rows_normalised(rng):
    k = 3
    p = rng.dirichlet(np.ones(k), size=(k, k))
    full = np.log(p)
    filled = fill_dummy_contexts(full)
    assert filled.shape == (k + 1, k + 1, k)
    for ctx in [(DUMMY, DUMMY), (DUMMY, 0), (DUMMY, 2), (1, 2)]:
        assert np.exp(filled[ctx]).sum() == pytest.approx(1.0)
    np.testing.assert_allclose(filled[:k, :k], full)


def test_hmm_rewards_needs_offset(rng):
    trans = np.log(rng.dirichlet(np.ones(2), size=2))
    emis = np.log(rng.dirichlet(np.ones(3), size=2))
    obs = [0, 2, 1, 1]
    with pytest.raises(NegativeReward):
        hmm_rewards(trans, emis, obs)
    p = tight_offset(trans, emis, obs)
    oracle = hmm_rewards(trans, emis, obs, p)
    assert min_reward(oracle, StateGraph.complete(2)) == pytest.approx(0.0, abs=1e-12)
