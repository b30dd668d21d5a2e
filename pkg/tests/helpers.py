"""Shared fixtures: worked-example patterns and a random feasible-flow builder."""

from __future__ import annotations

import random
from fractions import Fraction

from swenctrl.flow import SINK, SOURCE, FlowAssignment, FlowNetwork
from swenctrl.pattern import SparsityPattern

# 5-state, 2-input example: a chain fed by two inputs.
FIG1 = SparsityPattern(
    5, 2,
    frozenset({(1, 2), (1, 6), (1, 7), (2, 7), (3, 1), (4, 2), (4, 3), (5, 3), (5, 4)}),
)

# 2-state, 1-input example: both states driven by the input, a_1 -> a_2.
FIG2A = SparsityPattern(2, 1, frozenset({(1, 3), (2, 3), (2, 1)}))

# 2-state cycle with one input; the minimal switch count is 0.
TWO_CYCLE = SparsityPattern(2, 1, frozenset({(1, 2), (2, 1), (1, 3)}))

# Single driftless integrator xdot = b u.
INTEGRATOR = SparsityPattern(1, 1, frozenset({(1, 2)}))


def random_feasible_flow(net: FlowNetwork, seed: int, rounds: int = 30) -> FlowAssignment:
    """Random feasible flow: push random fractional amounts along random
    source-to-sink paths, never exceeding residual capacity."""
    rng = random.Random(seed)
    values = {arc: Fraction(0) for arc in net.arcs}
    out_arcs: dict = {}
    for u, v in net.arcs:
        out_arcs.setdefault(u, []).append((u, v))
    for _ in range(rounds):
        path = []
        u = SOURCE
        while u != SINK:
            candidates = [a for a in out_arcs.get(u, []) if values[a] < net.capacity[a]]
            if not candidates:
                path = []
                break
            arc = rng.choice(candidates)
            path.append(arc)
            u = arc[1]
        if not path:
            continue
        room = min(net.capacity[a] - values[a] for a in path)
        push = room * Fraction(rng.randint(1, 6), 6)
        for a in path:
            values[a] += push
    total = sum(values[a] for a in net.arcs if a[0] == SOURCE)
    return FlowAssignment(values, total)
