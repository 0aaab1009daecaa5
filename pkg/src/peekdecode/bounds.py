"""
Closed-form competitive-ratio bounds and the bound-minimising discount factor.

All functions take latency ``L``, order ``n`` and diameter ``delta`` and work
with the effective diameter ``delta + n - 1``. Outside a formula's domain
they raise :class:`BoundInapplicable`.
"""
from __future__ import annotations

import math


class BoundInapplicable(ValueError):
    pass


def _power(base: float, exponent: float) -> float:
    return math.exp(exponent * math.log(base))


def _check(L, n, delta):
    if L < 0 or n < 1 or delta < 1:
        raise ValueError(f"invalid bound arguments L={L}, n={n}, delta={delta}")
    return delta + n - 1


def optimal_gamma(L: int, n: int, delta: int) -> float:
    """Discount factor that minimises the Peek Search upper bound."""
    eff = _check(L, n, delta)
    if L < eff:
        raise BoundInapplicable(f"Peek Search needs L >= {eff}, got {L}")
    return _power(eff / (L + 1), 1.0 / (L - eff + 1))


def default_gamma(L: int, n: int, delta: int) -> float:
    try:
        return optimal_gamma(L, n, delta)
    except BoundInapplicable:
        return 0.5


def peek_search_upper_bound(L: int, n: int, delta: int) -> float:
    eff = _check(L, n, delta)
    if L < eff:
        raise BoundInapplicable(f"Peek Search bound needs L >= {eff}, got {L}")
    gap = L - eff + 1
    return (L + 1) / gap * _power((L + 1) / eff, eff / gap)


def peek_search_bound_first_order(L: int) -> float:
    """Fully connected first-order form ``(1 + 1/L) (L+1)^(1/L)``."""
    if L < 1:
        raise BoundInapplicable("needs L >= 1")
    return (1 + 1 / L) * _power(L + 1, 1 / L)


def peek_search_bound_unit_diameter(L: int, n: int) -> float:
    """Unit-diameter, order-n form ``(L+1)/(L-n+1) ((L+1)/n)^(n/(L-n+1))``."""
    if L < n:
        raise BoundInapplicable(f"needs L >= {n}")
    return (L + 1) / (L - n + 1) * _power((L + 1) / n, n / (L - n + 1))


def randomized_upper_bound(L: int, n: int, delta: int) -> float:
    eff = _check(L, n, delta)
    if L + 1 <= eff:
        raise BoundInapplicable(f"Randomized Peek Search bound needs L+1 > {eff}")
    return 1 + eff / (L + 1 - eff)


def peek_reset_upper_bound(L: int, n: int, delta: int) -> float:
    eff = _check(L, n, delta)
    denom = L - 8 * eff + 1
    if denom <= 0:
        raise BoundInapplicable(f"Peek Reset bound needs L > {8 * eff - 1}")
    return 1 + 2 * (eff + 1) * eff / denom


def deterministic_lower_bound(L: int, n: int, delta: int) -> float:
    eff = _check(L, n, delta)
    if L < 1:
        raise BoundInapplicable("needs L >= 1")
    value = 1 + eff / L * (1 + (eff + L - 1) / ((eff + L - 1) ** 2 + eff))
    other = deterministic_lower_bound_expanded(L, n, delta)
    assert math.isclose(value, other, rel_tol=1e-12), (value, other)
    return value


def deterministic_lower_bound_expanded(L: int, n: int, delta: int) -> float:
    """Same bound with the denominator written as ``(L-D-1)^2 + 4DL - 3D``."""
    eff = _check(L, n, delta)
    if L < 1:
        raise BoundInapplicable("needs L >= 1")
    return 1 + eff / L * (1 + (eff + L - 1) / ((L - eff - 1) ** 2 + 4 * eff * L - 3 * eff))


def deterministic_lower_bound_first_order(L: int) -> float:
    return 1 + 1 / L + 1 / (L * L + 1)


def randomized_lower_bound_general(L: int, n: int, delta: int, epsilon: float) -> float:
    """Polytope form with ``u = 2^(delta-1) * ceil(1/epsilon)`` states."""
    _check(L, n, delta)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if L < 1:
        raise BoundInapplicable("needs L >= 1")
    u = 2 ** (delta - 1) * math.ceil(1 / epsilon)
    return 1 + (u - 1) * n / (u * L + n)


def randomized_lower_bound(L: int, n: int, delta: int, epsilon: float) -> float:
    """Lower bound for any randomized decoder.

    At unit diameter this is ``1 + (1-eps) n / (L + eps n)``; the polytope
    form is then the same expression at ``eps = 1/ceil(1/eps)``, which the
    function cross-checks.
    """
    _check(L, n, delta)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if L < 1:
        raise BoundInapplicable("needs L >= 1")
    if delta > 1:
        return randomized_lower_bound_general(L, n, delta, epsilon)
    value = 1 + (1 - epsilon) * n / (L + epsilon * n)
    snapped = 1 / math.ceil(1 / epsilon)
    other = randomized_lower_bound_general(L, n, 1, epsilon)
    assert math.isclose(other, 1 + (1 - snapped) * n / (L + snapped * n), rel_tol=1e-12)
    return value


def all_bounds(L: int, n: int, delta: int, epsilon: float = 0.1) -> dict:
    """Every bound at one grid point; inapplicable ones map to ``None``."""
    out = {}
    for name, fn, args in [
        ("peek_search_upper", peek_search_upper_bound, (L, n, delta)),
        ("randomized_upper", randomized_upper_bound, (L, n, delta)),
        ("peek_reset_upper", peek_reset_upper_bound, (L, n, delta)),
        ("deterministic_lower", deterministic_lower_bound, (L, n, delta)),
        ("randomized_lower", randomized_lower_bound, (L, n, delta, epsilon)),
    ]:
        try:
            out[name] = fn(*args)
        except BoundInapplicable:
            out[name] = None
    return out
