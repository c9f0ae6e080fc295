"""Conservativeness and optimality-preservation checkers.

Conservativeness of a reward has an exact certificate on finite graphs: it
holds iff the reward is the gradient of some potential, so a weighted
least-squares solve decides it.  Brute-force trajectory comparison provides
the finite-horizon notion and human-readable witnesses.  Optimality
preservation is checked empirically by enumerating deterministic compatible
dynamics and testing whether Q* is constant across actions everywhere.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import EnumerationCapError, InputError, SolverError
from .fields import Potential, Reward, check_reward_domain, reward_norm
from .graphs import (
    DeterministicDynamics,
    LassoTrajectory,
    Trajectory,
    TransitionGraph,
    TRAJECTORY_CAP,
    DYNAMICS_BUDGET,
    enumerate_deterministic_dynamics,
    enumerate_trajectories,
    successor_table,
)
from .operators import grad, line_integral_lasso
from .tolerance import DEFAULT_TOL, Tolerance

CONSERVATIVE = "conservative"
FINITELY_CONSERVATIVE_ONLY = "finitely_conservative_only"
NOT_FINITELY_CONSERVATIVE = "not_finitely_conservative"

COUNTEREXAMPLE_FOUND = "counterexample_found"
NO_COUNTEREXAMPLE = "no_counterexample_within_budget"

Q_GAP_TOL = 1e-8
VALUE_ITERATION_TOL = 1e-12


@dataclass(frozen=True)
class Policy:
    """Deterministic policy: one available action per state."""

    choice: dict[str, str]

    def violations(self, graph: TransitionGraph) -> list[str]:
        graph.require_valid()
        v = []
        for s in graph.states:
            a = self.choice.get(s)
            if a is None:
                v.append(f"no action chosen for state: {s}")
            elif not graph.sa_successors(s, a):
                v.append(f"chosen action has no transitions: ({s}, {a})")
        return v


@dataclass(frozen=True)
class ActionDependenceWitness:
    first: tuple[str, str, str]
    second: tuple[str, str, str]
    first_value: float
    second_value: float


@dataclass(frozen=True)
class ConservativenessVerdict:
    """Outcome of a conservativeness check.

    ``kind`` is one of the three module constants.  For
    :func:`check_finitely_conservative` the kind
    ``finitely_conservative_only`` asserts only the finite property up to
    ``horizon``; the full check in :func:`check_conservative` additionally
    rules out conservativeness via the residual test before using it.
    """

    kind: str
    witness: tuple | None = None
    witness_integrals: tuple[float, float] | None = None
    potential: Potential | None = None
    residual: float | None = None
    horizon: int | None = None
    coverage_complete: bool = True


@dataclass(frozen=True)
class OptimalityCounterexample:
    dynamics: DeterministicDynamics
    index: int
    state: str
    action_high: str
    action_low: str
    q_gap: float


@dataclass(frozen=True)
class OptimalityVerdict:
    verdict: str
    counterexample: OptimalityCounterexample | None
    dynamics_checked: int
    total_dynamics: int
    max_gap_seen: float


@dataclass(frozen=True)
class ConstructedPotential:
    potential: Potential
    gradient_residual: float
    matches_input: bool


def is_action_independent(
    graph: TransitionGraph, r: Reward, tol: Tolerance = DEFAULT_TOL
) -> tuple[bool, ActionDependenceWitness | None]:
    """True iff the reward never distinguishes coexisting actions.

    Coexisting means two transitions sharing source and destination; the
    witness is the first violating pair in canonical order.
    """
    graph.require_valid()
    check_reward_domain(graph, r)
    by_endpoints: dict[tuple[str, str], tuple[str, str, str]] = {}
    for t in graph.transitions:
        ends = (t.src, t.dst)
        ref = by_endpoints.get(ends)
        if ref is None:
            by_endpoints[ends] = t.key
            continue
        v_ref, v_t = r.values[ref], r.values[t.key]
        if not tol.close(v_ref, v_t):
            return False, ActionDependenceWitness(ref, t.key, v_ref, v_t)
    return True, None


def gradient_matrix(graph: TransitionGraph) -> np.ndarray:
    """Dense matrix of the gradient operator in canonical bases."""
    graph.require_valid()
    src, dst, _, _ = graph.index_arrays
    g = np.zeros((graph.n_transitions, graph.n_states), dtype=np.float64)
    rows = np.arange(graph.n_transitions)
    g[rows, dst] += graph.gamma
    g[rows, src] -= 1.0
    return g


def solve_potential(graph: TransitionGraph, r: Reward) -> tuple[Potential, float]:
    """Weighted least-squares fit of a potential whose gradient matches r.

    Returns the minimum-norm solution and the weighted residual
    ``||grad(phi) - r||``.  On a finite graph the residual vanishing (up to
    tolerance) is an exact certificate of conservativeness, because every
    potential is bounded.
    """
    graph.require_valid()
    rv = r.vector(graph)
    g = gradient_matrix(graph)
    w = graph.index_arrays[2]
    sw = np.sqrt(w)
    try:
        phi_vec, *_ = np.linalg.lstsq(g * sw[:, None], rv * sw, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"least-squares potential solve failed: {exc}") from exc
    resid_vec = g @ phi_vec - rv
    residual = math.sqrt(float(np.dot(w * resid_vec, resid_vec)))
    return Potential.from_vector(graph, phi_vec), residual


def check_finitely_conservative(
    graph: TransitionGraph,
    r: Reward,
    max_len: int = 6,
    tol: Tolerance = DEFAULT_TOL,
    cap: int = TRAJECTORY_CAP,
) -> ConservativenessVerdict:
    """Brute-force comparison of same start/end/length trajectory integrals.

    Exact over the searched horizon.  When the enumeration would exceed
    ``cap`` the verdict reports the partially covered horizon instead of
    failing.  A violation yields the extreme witness pair of the first
    offending (start, end, length) family in canonical scan order.
    """
    graph.require_valid()
    check_reward_domain(graph, r)
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    covered = 0
    enumerated = 0
    for length in range(1, max_len + 1):
        for start in graph.states:
            frontier: list[tuple[str, tuple, float]] = [(start, (), 0.0)]
            for depth in range(length):
                discount = graph.gamma ** depth
                nxt = []
                for here, steps, integral in frontier:
                    for t in graph.out_transitions(here):
                        nxt.append(
                            (t.dst, steps + (t.key,), integral + discount * r.values[t.key])
                        )
                frontier = nxt
            enumerated += len(frontier)
            if enumerated > cap:
                return ConservativenessVerdict(
                    kind=FINITELY_CONSERVATIVE_ONLY,
                    horizon=covered,
                    coverage_complete=False,
                )
            extremes: dict[str, tuple[float, tuple, float, tuple]] = {}
            for end, steps, integral in frontier:
                if end not in extremes:
                    extremes[end] = (integral, steps, integral, steps)
                    continue
                lo, lo_steps, hi, hi_steps = extremes[end]
                if integral < lo:
                    lo, lo_steps = integral, steps
                elif integral > hi:
                    hi, hi_steps = integral, steps
                extremes[end] = (lo, lo_steps, hi, hi_steps)
            for end in sorted(extremes):
                lo, lo_steps, hi, hi_steps = extremes[end]
                if not tol.close(lo, hi):
                    first = Trajectory(start, lo_steps)
                    second = Trajectory(start, hi_steps)
                    if lo_steps > hi_steps:
                        first, second = second, first
                        lo, hi = hi, lo
                    return ConservativenessVerdict(
                        kind=NOT_FINITELY_CONSERVATIVE,
                        witness=(first, second),
                        witness_integrals=(lo, hi),
                        horizon=length,
                    )
        covered = length
    return ConservativenessVerdict(
        kind=FINITELY_CONSERVATIVE_ONLY, horizon=covered, coverage_complete=True
    )


def _lasso_witness(
    graph: TransitionGraph,
    r: Reward,
    tol: Tolerance,
    max_prefix: int,
    max_cycle: int,
) -> tuple[LassoTrajectory, LassoTrajectory, float, float] | None:
    """First pair of same-start lassos with differing integrals, if any."""
    for start in graph.states:
        best: tuple[float, LassoTrajectory, float, LassoTrajectory] | None = None
        for p in range(max_prefix + 1):
            try:
                prefixes = enumerate_trajectories(graph, start, p)
            except EnumerationCapError:
                break
            for prefix in prefixes:
                for c in range(1, max_cycle + 1):
                    try:
                        cycles = enumerate_trajectories(graph, prefix.end, c)
                    except EnumerationCapError:
                        break
                    for cycle in cycles:
                        if cycle.end != cycle.start:
                            continue
                        lasso = LassoTrajectory(prefix, cycle)
                        v = line_integral_lasso(graph, r, lasso)
                        if best is None:
                            best = (v, lasso, v, lasso)
                            continue
                        lo, lo_l, hi, hi_l = best
                        if v < lo:
                            lo, lo_l = v, lasso
                        elif v > hi:
                            hi, hi_l = v, lasso
                        best = (lo, lo_l, hi, hi_l)
        if best is not None:
            lo, lo_l, hi, hi_l = best
            if not tol.close(lo, hi):
                return lo_l, hi_l, lo, hi
    return None


def check_conservative(
    graph: TransitionGraph,
    r: Reward,
    tol: Tolerance = DEFAULT_TOL,
    max_len: int = 6,
    lasso_prefix: int = 4,
    lasso_cycle: int = 4,
) -> ConservativenessVerdict:
    """Decide conservativeness exactly; furnish witnesses when it fails.

    The authority is the least-squares residual of :func:`solve_potential`
    (exact on finite graphs).  For non-conservative rewards the finite
    brute-force check separates the two failure kinds, and a bounded lasso
    search produces a pair of eventually-periodic infinite trajectories with
    differing integrals where possible.
    """
    if graph.gamma >= 1.0:
        raise ValueError("conservativeness requires gamma < 1")
    potential, residual = solve_potential(graph, r)
    if residual <= tol.abs_tol + tol.rel_tol * reward_norm(graph, r):
        return ConservativenessVerdict(
            kind=CONSERVATIVE, potential=potential, residual=residual
        )
    finite = check_finitely_conservative(graph, r, max_len=max_len, tol=tol)
    if finite.kind == NOT_FINITELY_CONSERVATIVE:
        return ConservativenessVerdict(
            kind=NOT_FINITELY_CONSERVATIVE,
            witness=finite.witness,
            witness_integrals=finite.witness_integrals,
            residual=residual,
            horizon=finite.horizon,
            coverage_complete=finite.coverage_complete,
        )
    lasso = _lasso_witness(graph, r, tol, lasso_prefix, lasso_cycle)
    witness = (lasso[0], lasso[1]) if lasso else None
    integrals = (lasso[2], lasso[3]) if lasso else None
    return ConservativenessVerdict(
        kind=FINITELY_CONSERVATIVE_ONLY,
        witness=witness,
        witness_integrals=integrals,
        residual=residual,
        horizon=finite.horizon,
        coverage_complete=finite.coverage_complete,
    )


def construct_potential_shortest_path(
    graph: TransitionGraph, r: Reward, s0: str, tol: Tolerance = DEFAULT_TOL
) -> ConstructedPotential:
    """Explicit potential from discounted integrals along shortest paths.

    Requires 0 < gamma < 1, a self-loop at ``s0``, and every state reachable
    from ``s0``.  For finitely conservative rewards the gradient of the
    result reproduces the input exactly; otherwise the result is still
    deterministic but a warning is raised and ``matches_input`` is False.
    """
    graph.require_valid()
    check_reward_domain(graph, r)
    if not 0.0 < graph.gamma < 1.0:
        raise ValueError("shortest-path potential construction requires 0 < gamma < 1")
    if s0 not in graph.state_weights:
        raise ValueError(f"unknown start state: {s0}")
    loop_actions = sorted(a for a in graph.actions if graph.has_transition((s0, a, s0)))
    if not loop_actions:
        raise ValueError(f"state {s0} has no self-loop")
    base = r.values[(s0, loop_actions[0], s0)] / (graph.gamma - 1.0)

    # Breadth-first shortest paths, expanding states in lexicographic order.
    dist = {s0: 0}
    integral = {s0: 0.0}
    level = [s0]
    while level:
        nxt = []
        for u in level:
            for t in graph.out_transitions(u):
                if t.dst not in dist:
                    dist[t.dst] = dist[u] + 1
                    integral[t.dst] = integral[u] + graph.gamma ** dist[u] * r.values[t.key]
                    nxt.append(t.dst)
        level = sorted(set(nxt))
    unreachable = sorted(set(graph.states) - set(dist))
    if unreachable:
        raise ValueError(f"states not reachable from {s0}: {unreachable}")

    values = {
        s: (integral[s] + base) / graph.gamma ** dist[s] for s in graph.states
    }
    potential = Potential(values)
    diff = np.asarray(grad(graph, potential).vector(graph)) - r.vector(graph)
    w = graph.index_arrays[2]
    residual = math.sqrt(float(np.dot(w * diff, diff)))
    matches = residual <= tol.abs_tol + tol.rel_tol * reward_norm(graph, r)
    if not matches:
        warnings.warn(
            "constructed potential does not reproduce the reward "
            f"(residual {residual:.3g}); the input is not finitely conservative",
            stacklevel=2,
        )
    return ConstructedPotential(potential, residual, matches)


# -- Q* machinery ------------------------------------------------------------


def _vi_tables(graph: TransitionGraph):
    """Canonical (state, action) pair list with state block offsets."""
    pairs, succ_lists = successor_table(graph)
    offsets = [0]
    k = 0
    for s in graph.states:
        while k < len(pairs) and pairs[k][0] == s:
            k += 1
        offsets.append(k)
    return pairs, succ_lists, np.array(offsets, dtype=np.int32)


def _iteration_bound(gamma: float, max_reward: float, stop_tol: float) -> int:
    if gamma <= 0.0 or max_reward <= 0.0:
        return 1
    target = stop_tol * (1.0 - gamma) / max_reward
    if target >= 1.0:
        return 1
    return max(1, math.ceil(math.log(target) / math.log(gamma)))


def q_star(
    graph: TransitionGraph,
    dyn: DeterministicDynamics,
    r: Reward,
    stop_tol: float = VALUE_ITERATION_TOL,
) -> dict[tuple[str, str], float]:
    """Optimal Q-values under one deterministic dynamics, by value iteration.

    Defined on exactly the (state, action) pairs that have outgoing
    transitions.  Iterates until the sup-norm change drops below
    ``stop_tol``, with the analytic geometric iteration bound as a backstop.
    """
    if graph.gamma >= 1.0:
        raise ValueError("q_star requires gamma < 1")
    check_reward_domain(graph, r)
    violations = dyn.compatibility_violations(graph)
    if violations:
        raise InputError("incompatible dynamics: " + "; ".join(violations))
    pairs, _, offsets = _vi_tables(graph)
    succ_row = np.array(
        [graph.state_index(dyn.choice[p]) for p in pairs], dtype=np.int32
    )
    reward_row = np.array(
        [r.values[(p[0], p[1], dyn.choice[p])] for p in pairs], dtype=np.float64
    )
    max_iter = _iteration_bound(graph.gamma, r.max_abs(), stop_tol)
    q, _ = _kernels.value_iteration_batch(
        succ_row[None, :], reward_row[None, :], offsets, graph.gamma, stop_tol, max_iter
    )
    return {p: float(v) for p, v in zip(pairs, q[0])}


def _reachable_states(graph: TransitionGraph, dyn: DeterministicDynamics) -> set[str]:
    seen = set(dyn.initial_support)
    queue = sorted(seen)
    while queue:
        s = queue.pop()
        for a in graph.actions:
            nxt = dyn.choice.get((s, a))
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def all_policies_optimal(
    graph: TransitionGraph,
    dyn: DeterministicDynamics,
    f: Reward,
    q_tol: float = Q_GAP_TOL,
    stop_tol: float = VALUE_ITERATION_TOL,
) -> tuple[bool, float]:
    """Whether Q* under f is constant across actions at every reachable state.

    Returns the flag and the largest Q*-gap over reachable states.
    """
    q = q_star(graph, dyn, f, stop_tol=stop_tol)
    reachable = _reachable_states(graph, dyn)
    by_state: dict[str, list[float]] = {}
    for (s, _), v in q.items():
        by_state.setdefault(s, []).append(v)
    gap = 0.0
    for s in sorted(reachable):
        vals = by_state.get(s)
        if vals:
            gap = max(gap, max(vals) - min(vals))
    return gap <= q_tol, gap


def check_optimality_preserving(
    graph: TransitionGraph,
    f: Reward,
    budget: int = DYNAMICS_BUDGET,
    q_tol: float = Q_GAP_TOL,
    stop_tol: float = VALUE_ITERATION_TOL,
    threads: int = 1,
    chunk_size: int = 1024,
) -> OptimalityVerdict:
    """Search deterministic compatible dynamics for an optimality violation.

    Enumerates dynamics in canonical order (full-support initial
    distribution, so every state counts as reachable) and reports the first
    one under which some state has a Q*-gap above ``q_tol``.  Absence of a
    counterexample is only conclusive when the budget covers the full
    enumeration, hence the verdict naming.
    """
    if graph.gamma >= 1.0:
        raise ValueError("optimality check requires gamma < 1")
    check_reward_domain(graph, f)
    enumeration = enumerate_deterministic_dynamics(graph, budget)
    if graph.n_states == 0:
        return OptimalityVerdict(
            verdict=NO_COUNTEREXAMPLE,
            counterexample=None,
            dynamics_checked=min(budget, enumeration.total_count),
            total_dynamics=enumeration.total_count,
            max_gap_seen=0.0,
        )
    pairs, succ_lists, offsets = _vi_tables(graph)
    n_pairs = len(pairs)
    succ_idx = [
        np.array([graph.state_index(d) for d in lst], dtype=np.int32)
        for lst in succ_lists
    ]
    reward_choices = [
        np.array([f.values[(p[0], p[1], d)] for d in lst], dtype=np.float64)
        for p, lst in zip(pairs, succ_lists)
    ]
    radixes = [len(lst) for lst in succ_lists]
    to_check = min(budget, enumeration.total_count)
    max_iter = _iteration_bound(graph.gamma, f.max_abs(), stop_tol)
    state_starts = offsets[:-1].astype(np.intp)

    def evaluate(start: int, digits: np.ndarray):
        """Per-chunk gap scan; returns (first failing global index or None, ...)."""
        n = digits.shape[0]
        succ_mat = np.empty((n, n_pairs), dtype=np.int32)
        rew_mat = np.empty((n, n_pairs), dtype=np.float64)
        for k in range(n_pairs):
            succ_mat[:, k] = succ_idx[k][digits[:, k]]
            rew_mat[:, k] = reward_choices[k][digits[:, k]]
        q, _ = _kernels.value_iteration_batch(
            succ_mat, rew_mat, offsets, graph.gamma, stop_tol, max_iter
        )
        hi = np.maximum.reduceat(q, state_starts, axis=1)
        lo = np.minimum.reduceat(q, state_starts, axis=1)
        gaps = np.max(hi - lo, axis=1)
        failing = np.nonzero(gaps > q_tol)[0]
        if failing.size == 0:
            return None, float(gaps.max(initial=0.0)), None
        j = int(failing[0])
        seen_gap = float(gaps[: j + 1].max())
        return start + j, seen_gap, q[j].copy()

    def finish(found, max_gap, digits_row, q_row):
        choice = {pairs[k]: succ_lists[k][digits_row[k]] for k in range(n_pairs)}
        dyn = DeterministicDynamics(
            choice=choice, initial_support=frozenset(graph.states)
        )
        hi = np.maximum.reduceat(q_row, state_starts)
        lo = np.minimum.reduceat(q_row, state_starts)
        s_idx = int(np.argmax(hi - lo))
        block = slice(offsets[s_idx], offsets[s_idx + 1])
        a_hi = pairs[offsets[s_idx] + int(np.argmax(q_row[block]))][1]
        a_lo = pairs[offsets[s_idx] + int(np.argmin(q_row[block]))][1]
        return OptimalityVerdict(
            verdict=COUNTEREXAMPLE_FOUND,
            counterexample=OptimalityCounterexample(
                dynamics=dyn,
                index=found,
                state=graph.states[s_idx],
                action_high=a_hi,
                action_low=a_lo,
                q_gap=float(hi[s_idx] - lo[s_idx]),
            ),
            dynamics_checked=found + 1,
            total_dynamics=enumeration.total_count,
            max_gap_seen=max_gap,
        )

    max_gap = 0.0
    if threads > 1:
        # evaluate every chunk, then reconcile to the minimal canonical index
        chunks = list(_digit_chunks(radixes, to_check, chunk_size))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: evaluate(*c), chunks))
        for (start, digits), (found, chunk_gap, detail) in zip(chunks, results):
            max_gap = max(max_gap, chunk_gap)
            if found is not None:
                return finish(found, max_gap, digits[found - start], detail)
    else:
        for start, digits in _digit_chunks(radixes, to_check, chunk_size):
            found, chunk_gap, detail = evaluate(start, digits)
            max_gap = max(max_gap, chunk_gap)
            if found is not None:
                return finish(found, max_gap, digits[found - start], detail)
    return OptimalityVerdict(
        verdict=NO_COUNTEREXAMPLE,
        counterexample=None,
        dynamics_checked=to_check,
        total_dynamics=enumeration.total_count,
        max_gap_seen=max_gap,
    )


def _digit_chunks(
    radixes: list[int], limit: int, chunk_size: int
) -> Iterator[tuple[int, np.ndarray]]:
    """Mixed-radix counter rows in itertools.product order, chunked."""
    n = len(radixes)
    digits = [0] * n
    buf: list[list[int]] = []
    start = 0
    for produced in range(limit):
        buf.append(digits.copy())
        for k in reversed(range(n)):
            digits[k] += 1
            if digits[k] < radixes[k]:
                break
            digits[k] = 0
        if len(buf) == chunk_size:
            yield start, np.array(buf, dtype=np.intp)
            start = produced + 1
            buf = []
    if buf:
        yield start, np.array(buf, dtype=np.intp)
