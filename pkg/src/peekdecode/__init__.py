"""Latency-bounded online decoding for order-n Markov reward models."""
from .adversary import (
    AdaptiveGame,
    ProtocolViolation,
    RepeatRewards,
    adversary_constant_a,
    build_prismatic_polytope,
    game_floor,
    play_deterministic_game,
    randomized_adversary_instance,
)
from .bounds import BoundInapplicable, all_bounds, optimal_gamma
from .decoders import (
    DECODERS,
    DecodeTrace,
    PeekConfig,
    greedy_decode,
    online_decode,
    peek_reset_decode,
    peek_search_decode,
    randomized_peek_search_decode,
    viterbi_decode,
)
from .harness import RatioReport, emit_csv, parse_csv, run_sweep
from .hmm import HMMModel, SyntheticSpec, generate_synthetic_hmm, load_model
from .model import (
    DUMMY,
    EdgeViolation,
    HMMRewards,
    LatencyAudit,
    LatencyViolation,
    NegativeReward,
    NotErgodic,
    StateGraph,
    TableRewards,
    Unbounded,
    compute_diameter,
    hmm_rewards,
    positivize_rewards,
    score_path,
)

__version__ = "0.1.0"
