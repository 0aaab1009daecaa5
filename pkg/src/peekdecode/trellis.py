"""
Forward dynamic program for the best discounted path over a short window.

The table is keyed by the last ``order`` states of a partial path. Layer
``l`` holds, for every such tail, the best discounted reward of a path of
length ``l+1`` that starts at time ``start`` and ends in that tail, plus a
backpointer to the tail it extended. Each layer is built from the previous
one only, so a window of ``L+1`` steps costs ``O(L * |K|^(n+1))`` reward
lookups.

Ties are broken towards the lexicographically smallest path. To do that
without storing paths, every layer also ranks its cells by the lexicographic
order of their best paths; two candidates for the same cell differ only in
their predecessor, so comparing predecessor ranks is enough.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import DUMMY, RewardOracle, StateGraph


@dataclass
class TrellisTable:
    scores: list
    backpointers: list
    ranks: list

    def best_cell(self, layer: int = -1):
        scores = self.scores[layer]
        ranks = self.ranks[layer]
        best = None
        for cell in sorted(scores, key=ranks.__getitem__):
            if best is None or scores[cell] > scores[best]:
                best = cell
        return best

    def trace(self, cell, layer: int = -1) -> tuple:
        layer = layer % len(self.scores)
        path = []
        while cell is not None:
            path.append(cell[-1])
            cell = self.backpointers[layer][cell]
            layer -= 1
        return tuple(reversed(path))


@dataclass
class Plan:
    path: tuple
    score: float
    table: TrellisTable


def best_path(oracle: RewardOracle, graph: StateGraph, start: int, steps: int,
              history: tuple, gamma: float = 1.0) -> Plan:
    """Best ``gamma``-discounted path of ``steps`` states beginning at ``start``.

    ``history`` holds the ``order`` states preceding ``start`` (dummies
    allowed). Step ``l`` of the window is weighted by ``gamma ** l``.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    history = tuple(history)
    if len(history) != oracle.order:
        raise ValueError(f"history must hold {oracle.order} states")

    first = {}
    back = {}
    for y in graph.successors(history[-1]):
        cell = history[1:] + (y,)
        first[cell] = oracle.reward(start, y, history)
        back[cell] = None
    rank = {cell: k for k, cell in enumerate(sorted(first, key=lambda c: c[-1]))}
    table = TrellisTable([first], [back], [rank])

    for ell in range(1, steps):
        weight = gamma ** ell
        prev = table.scores[-1]
        prev_rank = table.ranks[-1]
        scores = {}
        back = {}
        # predecessors in rank order + strict '>' keeps the smallest path on ties
        for ctx in sorted(prev, key=prev_rank.__getitem__):
            base = prev[ctx]
            for y in graph.successors(ctx[-1]):
                value = base + weight * oracle.reward(start + ell, y, ctx)
                cell = ctx[1:] + (y,)
                if cell not in scores or value > scores[cell]:
                    scores[cell] = value
                    back[cell] = ctx
        order = sorted(scores, key=lambda c: (prev_rank[back[c]], c[-1]))
        table.scores.append(scores)
        table.backpointers.append(back)
        table.ranks.append({cell: k for k, cell in enumerate(order)})

    cell = table.best_cell()
    return Plan(table.trace(cell), table.scores[-1][cell], table)


def initial_history(order: int) -> tuple:
    return (DUMMY,) * order
