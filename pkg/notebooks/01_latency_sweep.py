# %% [markdown]
# # Latency sweep on a synthetic HMM
#
# How much does a little lookahead buy? We sample a 4-state first-order
# HMM, draw a sequence from it and decode it with every decoder at a few
# latencies. Agreement is measured against the Viterbi labels.

# %%
import numpy as np

from peekdecode.harness import emit_csv, sweep_model
from peekdecode.hmm import SyntheticSpec, generate_synthetic_hmm

graph, model = generate_synthetic_hmm(SyntheticSpec(4, vocab_size=4, seed=7))
states, obs = model.sample(300, seed=7)
print(graph, "tokens:", len(obs))

# %%
decoders = ["peek_search", "randomized_peek_search", "peek_reset", "greedy"]
latencies = [1, 2, 4, 8, 12, 16]
reports = sweep_model(model, obs, decoders, latencies, seeds=range(5))

# %% [markdown]
# Randomized Peek Search depends on the seed, so average its rows.

# %%
print(f"{'decoder':24s}" + "".join(f"{'L=' + str(L):>9s}" for L in latencies))
for name in decoders:
    row = []
    for L in latencies:
        cells = [r.agreement for r in reports if r.decoder == name and r.L == L and not r.failed]
        row.append(f"{np.mean(cells):9.3f}" if cells else f"{'-':>9s}")
    print(f"{name:24s}" + "".join(row))

# %% [markdown]
# The log-probability column undoes the positivizing shift, so it can be
# compared with the model log-likelihood of the Viterbi path.

# %%
opt_logp = reports[0].opt - len(obs) * reports[0].offset
for r in reports:
    if r.decoder == "peek_search" and r.seed == 0:
        print(f"L={r.L:2d}  log p = {r.log_prob:10.3f}  (viterbi {opt_logp:10.3f})"
              f"  ratio {r.ratio:.5f}  bound {r.bound:.3f}")

# %%
print(emit_csv([r for r in reports if r.seed == 0]).decode()[:600])
