"""Random graph/field generators and independent oracles shared by the tests.

Oracles here are built straight from the defining formulas (dense matrices,
brute-force enumeration) and never call the code paths they are meant to
check.
"""
from __future__ import annotations

import numpy as np

from rewardcalc import Potential, Reward, Trajectory, Transition, TransitionGraph


def state_names(n):
    return [f"s{i}" for i in range(n)]


def action_names(m):
    return [f"a{i}" for i in range(m)]


def random_graph(
    rng,
    max_states=8,
    max_actions=3,
    gamma=0.9,
    density=0.2,
    weight_range=None,
    state_weight_range=None,
    min_states=1,
):
    """Random valid graph: every state keeps at least one outgoing transition."""
    n = int(rng.integers(min_states, max_states + 1))
    m = int(rng.integers(1, max_actions + 1))
    states = state_names(n)
    actions = action_names(m)
    chosen = set()
    for s in states:
        chosen.add((s, actions[rng.integers(m)], states[rng.integers(n)]))
    for s in states:
        for a in actions:
            for d in states:
                if rng.random() < density:
                    chosen.add((s, a, d))

    def w(r):
        return 1.0 if r is None else float(rng.uniform(*r))

    transitions = [Transition(s, a, d, w(weight_range)) for s, a, d in sorted(chosen)]
    weights = {s: w(state_weight_range) for s in states}
    return TransitionGraph(weights, actions, transitions, gamma)


def random_potential(rng, graph, scale=10.0):
    return Potential({s: float(rng.uniform(-scale, scale)) for s in graph.states})


def random_reward(rng, graph, scale=10.0):
    return Reward({t.key: float(rng.uniform(-scale, scale)) for t in graph.transitions})


def random_trajectory(rng, graph, start=None, length=5):
    if start is None:
        start = graph.states[rng.integers(graph.n_states)]
    steps = []
    here = start
    for _ in range(length):
        outs = graph.out_transitions(here)
        t = outs[rng.integers(len(outs))]
        steps.append(t.key)
        here = t.dst
    return Trajectory(start, tuple(steps))


def cycle_graph(rng, max_states=8, gamma=0.9, extras=0.0, weight_range=None, min_states=2):
    """One global directed cycle (every state on a loop), optional extra edges."""
    n = int(rng.integers(min_states, max_states + 1))
    states = state_names(n)

    def w(r):
        return 1.0 if r is None else float(rng.uniform(*r))

    chosen = {(states[i], "a0", states[(i + 1) % n]) for i in range(n)}
    for s in states:
        for d in states:
            if rng.random() < extras:
                chosen.add((s, "a0", d))
    transitions = [Transition(s, a, d, w(weight_range)) for s, a, d in sorted(chosen)]
    weights = {s: w(weight_range) for s in states}
    return TransitionGraph(weights, ["a0"], transitions, gamma)


def hub_graph(rng, max_states=6, max_actions=2, gamma=0.9, density=0.15, weight_range=None):
    """Diamond-complete by construction: every state has an edge to a hub."""
    base = random_graph(
        rng,
        max_states=max_states,
        max_actions=max_actions,
        gamma=gamma,
        density=density,
        weight_range=weight_range,
        min_states=1,
    )
    hub = base.states[int(rng.integers(base.n_states))]
    chosen = {t.key: t.weight for t in base.transitions}
    for s in base.states:
        chosen.setdefault((s, base.actions[0], hub), 1.0)
    transitions = [Transition(s, a, d, wt) for (s, a, d), wt in sorted(chosen.items())]
    return TransitionGraph(base.state_weights, base.actions, transitions, gamma)


def distinguishing_graph(rng, max_states=4, gamma=0.9):
    """Every successor is reachable under both actions, so distinct successors
    always have distinct actions available."""
    n = int(rng.integers(2, max_states + 1))
    states = state_names(n)
    transitions = []
    for s in states:
        k = int(rng.integers(1, 3))
        succs = rng.choice(states, size=k, replace=False)
        for d in succs:
            for a in ("a0", "a1"):
                transitions.append(Transition(s, a, str(d), 1.0))
    return TransitionGraph(states, ["a0", "a1"], sorted(transitions), gamma)


def selfloop_reachable_graph(rng, max_states=8, max_actions=2, gamma=0.9, density=0.15):
    """s0 has a self-loop and every state is reachable from s0."""
    g = random_graph(
        rng,
        max_states=max_states,
        max_actions=max_actions,
        gamma=gamma,
        density=density,
    )
    chosen = {t.key: t.weight for t in g.transitions}
    chosen.setdefault(("s0", g.actions[0], "s0"), 1.0)
    order = list(g.states)
    for i, s in enumerate(order[1:], start=1):
        anchor = order[int(rng.integers(i))]
        chosen.setdefault((anchor, g.actions[int(rng.integers(len(g.actions)))], s), 1.0)
    transitions = [Transition(s, a, d, wt) for (s, a, d), wt in sorted(chosen.items())]
    return TransitionGraph(g.state_weights, g.actions, transitions, gamma)


def capped_dynamics_graph(
    rng, max_states=4, max_actions=2, gamma=0.9, cap=10 ** 4, min_total=1, density=0.35
):
    """Random valid graph whose deterministic-dynamics count lies in [min_total, cap]."""
    while True:
        g = random_graph(
            rng,
            max_states=max_states,
            max_actions=max_actions,
            gamma=gamma,
            density=density,
            min_states=min(max_states, 2) if min_total > 1 else 1,
        )
        total = 1
        for pair in sorted({(t.src, t.action) for t in g.transitions}):
            total *= len(g.sa_successors(*pair))
        if min_total <= total <= cap:
            return g


# -- independent oracles -------------------------------------------------------


def oracle_trajectory_count(graph, start, length):
    """Row of the length-th power of the successor-multiplicity matrix."""
    n = graph.n_states
    mult = [[0] * n for _ in range(n)]
    for t in graph.transitions:
        mult[graph.state_index(t.src)][graph.state_index(t.dst)] += 1
    row = [0] * n
    row[graph.state_index(start)] = 1
    for _ in range(length):
        row = [sum(row[i] * mult[i][j] for i in range(n)) for j in range(n)]
    return sum(row)


def oracle_gradient_matrix(graph):
    """Dense gradient matrix assembled directly from the defining formula."""
    g = np.zeros((graph.n_transitions, graph.n_states))
    for i, t in enumerate(graph.transitions):
        g[i, graph.state_index(t.dst)] += graph.gamma
        g[i, graph.state_index(t.src)] -= 1.0
    return g


def oracle_divergence_matrix(graph):
    """Dense divergence matrix assembled from the explicit per-state formula."""
    d = np.zeros((graph.n_states, graph.n_transitions))
    for i, t in enumerate(graph.transitions):
        d[graph.state_index(t.src), i] += t.weight
        d[graph.state_index(t.dst), i] -= graph.gamma * t.weight
    lam = np.array([graph.state_weights[s] for s in graph.states])
    return d / lam[:, None]


def oracle_divergence_free(graph, reward_vec):
    """Normal-equations projection of a reward onto the gradient span."""
    g = oracle_gradient_matrix(graph)
    w = np.array([t.weight for t in graph.transitions])
    normal = g.T @ (w[:, None] * g)
    rhs = g.T @ (w * reward_vec)
    coeffs = np.linalg.pinv(normal) @ rhs
    return reward_vec - g @ coeffs


def oracle_weighted_norm(graph, vec):
    w = np.array([t.weight for t in graph.transitions])
    return float(np.sqrt(np.dot(w * vec, vec)))


def oracle_line_integral(graph, reward, trajectory):
    total = 0.0
    for i, step in enumerate(trajectory.steps):
        total += graph.gamma ** i * reward.values[step]
    return total
