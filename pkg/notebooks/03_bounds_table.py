# %% [markdown]
# # Bound landscape
#
# Upper and lower bounds as a function of latency, for a few orders and
# diameters. ``None`` marks a bound outside its domain.

# %%
from peekdecode.bounds import all_bounds, optimal_gamma

for n, delta in [(1, 1), (2, 1), (1, 3)]:
    print(f"\nn={n} delta={delta}")
    print(f"{'L':>4s} {'gamma*':>8s} {'PS up':>8s} {'RPS up':>8s} {'reset':>8s} {'det lo':>8s} {'rnd lo':>8s}")
    for L in (1, 2, 4, 8, 16, 32, 64):
        b = all_bounds(L, n, delta, epsilon=0.1)
        try:
            g = f"{optimal_gamma(L, n, delta):8.4f}"
        except ValueError:
            g = f"{'-':>8s}"
        cells = [b[k] for k in ("peek_search_upper", "randomized_upper", "peek_reset_upper",
                                "deterministic_lower", "randomized_lower")]
        print(f"{L:4d} {g} " + " ".join(f"{c:8.4f}" if c is not None else f"{'-':>8s}" for c in cells))

# %% [markdown]
# Peek Search pays a log factor over the lower bound; the randomized
# decoder and Peek Reset close it, the latter only once L is large.
