"""Discounted differential and integral operators on transition graphs.

The gradient sends potentials to rewards via gamma * p(dst) - p(src); the
line integral discounts step rewards geometrically and coincides with RL
returns; curl lives on diamonds; divergence is the negative adjoint of the
gradient under the weighted inner products; the Laplacian composes the two.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainMismatchError, EnumerationCapError, SolverError
from .fields import Potential, Reward, check_reward_domain
from .graphs import (
    Diamond,
    LassoTrajectory,
    Trajectory,
    TransitionGraph,
    count_diamonds,
    enumerate_diamonds,
    enumerate_trajectories,
)

DIAMOND_CAP = 10 ** 6


def grad(graph: TransitionGraph, p: Potential) -> Reward:
    """Discounted gradient: value gamma * p(dst) - p(src) on every transition.

    The value does not depend on the action, only on the endpoints.
    """
    graph.require_valid()
    pv = p.vector(graph)
    src, dst, _, _ = graph.index_arrays
    return Reward.from_vector(graph, graph.gamma * pv[dst] - pv[src])


def line_integral_finite(graph: TransitionGraph, r: Reward, t: Trajectory) -> float:
    """Discounted sum of step rewards along a finite trajectory (the returns)."""
    graph.require_valid()
    check_reward_domain(graph, r)
    total = 0.0
    discount = 1.0
    for step in t.steps:
        if not graph.has_transition(step):
            raise DomainMismatchError(f"trajectory step not in transition set: {step}")
        total += discount * r.values[step]
        discount *= graph.gamma
    return total


def line_integral_lasso(graph: TransitionGraph, r: Reward, t: LassoTrajectory) -> float:
    """Closed form of the infinite integral over prefix + repeated cycle.

    Requires gamma < 1 (the geometric series for the cycle must converge).
    """
    if graph.gamma >= 1.0:
        raise ValueError("lasso line integral requires gamma < 1")
    prefix_part = line_integral_finite(graph, r, t.prefix)
    cycle_part = line_integral_finite(graph, r, t.cycle)
    g = graph.gamma
    return prefix_part + g ** t.prefix.length * cycle_part / (1.0 - g ** t.cycle.length)


@dataclass(frozen=True)
class CurlField:
    """Curl values over the canonical diamond enumeration.

    Antisymmetric under leg swap by construction: the value at (d2, d1) is
    the negation of the value at (d1, d2).
    """

    values: Mapping[Diamond, float]

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)


def curl(graph: TransitionGraph, r: Reward, cap: int = DIAMOND_CAP) -> CurlField:
    """Difference of leg integrals for every diamond, eagerly materialized.

    Refuses beyond ``cap`` diamonds; use :func:`max_abs_curl` to scan larger
    graphs without materializing.
    """
    graph.require_valid()
    check_reward_domain(graph, r)
    n = count_diamonds(graph)
    if n > cap:
        raise EnumerationCapError(
            f"{n} diamonds exceed cap {cap}; use max_abs_curl for a streaming scan"
        )
    values = {}
    for d in enumerate_diamonds(graph):
        values[d] = line_integral_finite(graph, r, d.first) - line_integral_finite(
            graph, r, d.second
        )
    return CurlField(values)


def max_abs_curl(graph: TransitionGraph, r: Reward) -> float:
    """Largest |curl| over all diamonds, computed group-by-group.

    Within each (start, end) family of length-two trajectories the extreme
    curl value is the spread between the largest and smallest leg integral.
    """
    graph.require_valid()
    check_reward_domain(graph, r)
    worst = 0.0
    for s in graph.states:
        spans: dict[str, tuple[float, float]] = {}
        for leg in enumerate_trajectories(graph, s, 2):
            v = r.values[leg.steps[0]] + graph.gamma * r.values[leg.steps[1]]
            lo, hi = spans.get(leg.end, (v, v))
            spans[leg.end] = (min(lo, v), max(hi, v))
        for lo, hi in spans.values():
            worst = max(worst, hi - lo)
    return worst


def divergence(graph: TransitionGraph, r: Reward) -> Potential:
    """Explicit divergence: per-state out-flow minus discounted in-flow.

    A self-loop contributes to both sums, for a net (1 - gamma) * w * r / lambda.
    """
    graph.require_valid()
    rv = r.vector(graph)
    src, dst, w, lam = graph.index_arrays
    flow = w * rv
    out_sum = np.bincount(src, weights=flow, minlength=graph.n_states)
    in_sum = np.bincount(dst, weights=flow, minlength=graph.n_states)
    return Potential.from_vector(graph, (out_sum - graph.gamma * in_sum) / lam)


def laplacian_apply(graph: TransitionGraph, p: Potential) -> Potential:
    """Divergence of the gradient."""
    return divergence(graph, grad(graph, p))


@dataclass(frozen=True)
class LaplacianMatrix:
    """Dense matrix of the Laplacian in the canonical state order.

    Column j is the Laplacian applied to the j-th state indicator.  Singular
    value diagnostics support the rank policy used by the decomposition.
    """

    states: tuple[str, ...]
    entries: np.ndarray
    smallest_singular_value: float
    largest_singular_value: float
    rank: int

    def is_invertible(self, threshold: float = 1e-10) -> bool:
        return self.smallest_singular_value > threshold * self.largest_singular_value

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.entries @ vec


def laplacian_matrix(graph: TransitionGraph) -> LaplacianMatrix:
    """Materialize the Laplacian column-by-column from state indicators."""
    graph.require_valid()
    if graph._laplacian_cache is not None:
        return graph._laplacian_cache
    n = graph.n_states
    entries = np.empty((n, n), dtype=np.float64)
    for j, s in enumerate(graph.states):
        entries[:, j] = laplacian_apply(graph, Potential.indicator(graph, s)).vector(graph)
    try:
        singular = np.linalg.svd(entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"SVD of the Laplacian failed: {exc}") from exc
    largest = float(singular[0]) if n else 0.0
    smallest = float(singular[-1]) if n else 0.0
    rank = int(np.sum(singular > 1e-10 * largest)) if n else 0
    entries.flags.writeable = False
    result = LaplacianMatrix(
        states=graph.states,
        entries=entries,
        smallest_singular_value=smallest,
        largest_singular_value=largest,
        rank=rank,
    )
    graph._laplacian_cache = result
    return result
