import json

import numpy as np
import pytest

from peekdecode.hmm import (
    _all_contexts,
    SyntheticSpec,
    generate_synthetic_hmm,
    load_model,
    model_from_dict,
    read_observations,
)
from peekdecode.model import DUMMY, NotErgodic, Unbounded, min_reward


def test_single_state_model():
    graph, model = generate_synthetic_hmm(SyntheticSpec(1, vocab_size=2))
    assert graph.num_states == 1
    assert np.exp(model.transitions[(0,)]) == pytest.approx([1.0])
    assert np.exp(model.transitions[(DUMMY,)]) == pytest.approx([1.0])


def test_complete_graph_has_unit_diameter():
    graph, _ = generate_synthetic_hmm(SyntheticSpec(3, edge_density=1.0))
    assert graph.diameter == 1


def test_generation_is_deterministic(tmp_path):
    spec = SyntheticSpec(4, order=2, vocab_size=3, edge_density=0.6, seed=11)
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    generate_synthetic_hmm(spec)[1].save(a)
    generate_synthetic_hmm(spec)[1].save(b)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("order", [1, 2])
def test_rows_are_stochastic(order):
    graph, model = generate_synthetic_hmm(SyntheticSpec(4, order, 5, edge_density=0.5, seed=2))
    for ctx in _all_contexts(4, order):
        assert np.exp(model.transitions[ctx]).sum() == pytest.approx(1.0)
    np.testing.assert_allclose(np.exp(model.emissions).sum(axis=1), 1.0)
    # no probability on missing edges
    for u in range(4):
        missing = [v for v in range(4) if not graph.has_edge(u, v)]
        assert np.all(np.isneginf(model.transitions[..., u, :][..., missing]))


def test_round_trip(tmp_path):
    _, model = generate_synthetic_hmm(SyntheticSpec(3, order=2, vocab_size=4, edge_density=0.7,
                                                    seed=5))
    path = tmp_path / "m.json"
    model.save(path)
    again = load_model(path)
    np.testing.assert_array_equal(again.transitions, model.transitions)
    np.testing.assert_array_equal(again.emissions, model.emissions)
    assert again.graph.edges == model.graph.edges
    assert again.to_json() == model.to_json()


def test_minimal_file_derives_dummy_contexts():
    data = {
        "states": ["N", "V"], "order": 1, "vocabulary": ["a", "b"],
        "transition_logprobs": {"N": {"N": np.log(0.3), "V": np.log(0.7)},
                                "V": {"N": np.log(0.6), "V": np.log(0.4)}},
        "emission_logprobs": {"N": {"a": np.log(0.9), "b": np.log(0.1)},
                              "V": {"a": np.log(0.2), "b": np.log(0.8)}},
    }
    model = model_from_dict(data)
    assert model.graph.diameter == 1
    np.testing.assert_allclose(np.exp(model.transitions[(DUMMY,)]), [0.5, 0.5])
    assert "edges" not in model.to_dict()


@pytest.mark.parametrize("patch", [
    {"order": 0},
    {"states": ["A", "A"]},
    {"states": ["A B", "C"]},
    {"transition_logprobs": {"A B": {"A": 0.0}}},
    {"transition_logprobs": {"Q": {"A": 0.0}}},
    {"emission_logprobs": {"A": {"zzz": 0.0}}},
])
def test_invalid_files(patch):
    data = {"states": ["A", "C"], "order": 1, "vocabulary": ["x"],
            "transition_logprobs": {"A": {"A": 0.0}, "C": {"A": 0.0}},
            "emission_logprobs": {"A": {"x": 0.0}, "C": {"x": 0.0}}}
    data.update(patch)
    with pytest.raises(ValueError):
        model_from_dict(data)


def test_missing_field():
    with pytest.raises(ValueError, match="lacks"):
        model_from_dict({"states": ["A"]})


def test_encode_and_rewards(tmp_path):
    _, model = generate_synthetic_hmm(SyntheticSpec(3, vocab_size=3, seed=1))
    states, obs = model.sample(30, seed=4)
    assert len(states) == len(obs) == 30
    text = tmp_path / "obs.txt"
    text.write_text("\n".join(model.vocabulary[w] for w in obs) + "\n\n", encoding="utf-8")
    tokens = read_observations(text)
    np.testing.assert_array_equal(model.encode(tokens), obs)
    oracle = model.rewards(obs)
    assert min_reward(oracle, model.graph) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        model.encode(["nope"])


def test_impossible_emission_is_unbounded():
    data = {"states": ["A", "C"], "order": 1, "vocabulary": ["x", "y"],
            "transition_logprobs": {"A": {"A": np.log(.5), "C": np.log(.5)},
                                    "C": {"A": np.log(.5), "C": np.log(.5)}},
            "emission_logprobs": {"A": {"x": 0.0}, "C": {"x": np.log(.5), "y": np.log(.5)}}}
    model = model_from_dict(data)
    with pytest.raises(Unbounded):
        model.rewards([0, 1])


def test_non_ergodic_edges_rejected():
    data = {"states": ["A", "C"], "order": 1, "vocabulary": ["x"],
            "edges": {"A": ["A"], "C": ["A", "C"]},
            "transition_logprobs": {"A": {"A": 0.0}, "C": {"A": 0.0}},
            "emission_logprobs": {"A": {"x": 0.0}, "C": {"x": 0.0}}}
    with pytest.raises(NotErgodic):
        model_from_dict(data)


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(0)
    with pytest.raises(ValueError):
        SyntheticSpec(3, edge_density=0.0)


def test_json_is_utf8(tmp_path):
    data = {"states": ["Ä", "ß"], "order": 1, "vocabulary": ["é"],
            "transition_logprobs": {"Ä": {"ß": 0.0}, "ß": {"Ä": 0.0}},
            "emission_logprobs": {"Ä": {"é": 0.0}, "ß": {"é": 0.0}}}
    model = model_from_dict(data)
    path = tmp_path / "u.json"
    model.save(path)
    assert json.loads(path.read_bytes().decode("utf-8"))["states"] == ["Ä", "ß"]
