import numpy as np
import pytest

from peekdecode.adversary import (
    AdaptiveGame,
    ProtocolViolation,
    RepeatRewards,
    adversary_constant_a,
    build_prismatic_polytope,
    game_floor,
    play_deterministic_game,
    randomized_adversary_instance,
)
from peekdecode.bounds import deterministic_lower_bound
from peekdecode.decoders import greedy_decode, viterbi_decode
from peekdecode.model import DUMMY, LatencyAudit, commitment_violations


@pytest.mark.parametrize("L,n", [(1, 1), (3, 1), (2, 2), (7, 3)])
def test_constant_a_is_positive_root(L, n):
    a = adversary_constant_a(L, n)
    assert a > 0
    assert n * a * a - (n + L - 1) * a - 1 == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("L", range(1, 8))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_game_floor_dominates_closed_form(L, n):
    assert game_floor(L, n) >= deterministic_lower_bound(L, n, 1) - 1e-12


@pytest.mark.parametrize("delta", [1, 2, 3, 4])
def test_polytope_diameter(delta):
    g = build_prismatic_polytope(delta, 3)
    assert g.num_states == 3 * 2 ** (delta - 1)
    assert g.diameter == delta
    assert all(g.has_edge(v, v) for v in range(g.num_states))


def test_polytope_large_faces():
    with pytest.raises(ValueError):
        build_prismatic_polytope(2, 4)
    g = build_prismatic_polytope(2, 5, strongly_connected_faces=True)
    assert g.diameter == 2


def test_repeat_rewards_pay_after_order_visits():
    oracle = RepeatRewards(np.ones((4, 2)), 2)
    assert oracle.reward(0, 1, (DUMMY, DUMMY)) == 1.0
    assert oracle.reward(2, 1, (0, 1)) == 0.0
    assert oracle.reward(2, 1, (1, 1)) == 1.0


def test_unrevealed_column_raises():
    game = AdaptiveGame(build_prismatic_polytope(1, 3), 2, 1)
    assert game.reward(2, 0, (0,)) == game.a
    with pytest.raises(ProtocolViolation):
        game.reward(3, 0, (0,))


def test_columns_revealed_after_commits():
    game = AdaptiveGame(build_prismatic_polytope(2, 3), 2, 1)
    a = game.a
    audit = LatencyAudit(game, 2)
    audit.commit(0)
    audit.advance(1)
    # distance 1 from vertex 0 pays a, distance 2 pays 2a
    np.testing.assert_allclose(game.matrix[3], [0, a, a, a, 2 * a, 2 * a])
    audit.commit(1)
    audit.advance(2)
    np.testing.assert_allclose(game.matrix[4], [0, 0, a, a, a, a])


def test_staying_zeroes_last_column():
    game = AdaptiveGame(build_prismatic_polytope(1, 3), 1, 1)
    audit = LatencyAudit(game, 1)
    audit.commit(2, 2)
    audit.advance(2)
    assert not game.matrix[3].any()


@pytest.mark.parametrize("decoder", ["peek_search", "peek_reset", "randomized_peek_search",
                                     "greedy"])
@pytest.mark.parametrize("delta", [1, 2])
def test_game_ratio_reaches_floor(decoder, delta):
    for n in (1, 2):
        for L in (1, 2, 3):
            outcome = play_deterministic_game(decoder, L, n, delta)
            assert outcome.ratio >= game_floor(L, n, delta) - 1e-9
            assert outcome.trace.violations == 0
            assert commitment_violations(outcome.trace.audit.log) == []


def test_game_accepts_callable():
    def stay(oracle, graph, latency):
        return greedy_decode(oracle, graph)

    outcome = play_deterministic_game(stay, 2, 1)
    assert outcome.ratio >= game_floor(2, 1) - 1e-9


def test_randomized_instance_opt():
    for seed in range(5):
        graph, oracle, opt = randomized_adversary_instance(0.25, 2, 2, 3, seed)
        assert graph.num_states == 8
        assert viterbi_decode(oracle, graph).total == pytest.approx(opt)
        assert opt == 5


def test_randomized_instance_secret_varies():
    secrets = set()
    for seed in range(40):
        _, oracle, _ = randomized_adversary_instance(0.5, 1, 1, 2, seed)
        secrets.add(int(np.argmax(oracle.matrix[-1])))
    assert secrets == {0, 1}
