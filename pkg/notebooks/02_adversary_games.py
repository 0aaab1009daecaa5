# %% [markdown]
# # Adaptive adversary
#
# The adversary reveals the last two columns only after seeing the
# decoder's first two moves. Whatever a deterministic decoder does, the
# final ratio lands on the game floor.

# %%
from peekdecode.adversary import game_floor, play_deterministic_game, randomized_adversary_instance
from peekdecode.bounds import deterministic_lower_bound
from peekdecode.decoders import randomized_peek_search_decode

for n in (1, 2):
    for L in (1, 2, 3, 4):
        out = play_deterministic_game("peek_search", L, n)
        print(f"n={n} L={L}  ratio {out.ratio:.4f}  floor {game_floor(L, n):.4f}"
              f"  closed form {deterministic_lower_bound(L, n, 1):.4f}")

# %% [markdown]
# The final reward matrix for one game (rows are time, columns states).

# %%
out = play_deterministic_game("greedy", 3, 1)
print(out.matrix.round(3))
print("online", out.online_labels, "opt", out.opt_labels)

# %% [markdown]
# Against randomization the adversary hides a large reward in one random
# state. A decoder that cannot see it in time gets it only by luck.

# %%
import numpy as np

L, n, eps = 2, 1, 0.5
totals = []
for trial in range(1000):
    graph, oracle, opt = randomized_adversary_instance(eps, 1, n, L, seed=trial)
    totals.append(randomized_peek_search_decode(oracle, graph, L, seed=trial + 99).total)
print(f"mean reward {np.mean(totals):.3f}, OPT {opt}, ceiling {L + eps * n}")
