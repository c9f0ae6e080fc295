"""Potentials and rewards as finite real-valued assignments.

A potential assigns a real to every state; a reward assigns a real to every
allowed transition (and nothing else).  Both spaces carry weighted inner
products: state weights for potentials, transition weights for rewards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DomainMismatchError
from .graphs import TransitionGraph, TransitionKey


@dataclass(frozen=True)
class Potential:
    """Real-valued assignment on states."""

    values: Mapping[str, float]

    def __post_init__(self):
        copied = {k: float(v) for k, v in self.values.items()}
        if not all(math.isfinite(v) for v in copied.values()):
            raise ValueError("potential values must be finite")
        object.__setattr__(self, "values", copied)

    @classmethod
    def zeros(cls, graph: TransitionGraph) -> "Potential":
        return cls({s: 0.0 for s in graph.states})

    @classmethod
    def constant(cls, graph: TransitionGraph, c: float) -> "Potential":
        return cls({s: float(c) for s in graph.states})

    @classmethod
    def indicator(cls, graph: TransitionGraph, state: str) -> "Potential":
        if state not in graph.state_weights:
            raise DomainMismatchError(f"unknown state: {state}")
        return cls({s: 1.0 if s == state else 0.0 for s in graph.states})

    @classmethod
    def from_vector(cls, graph: TransitionGraph, vec) -> "Potential":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (graph.n_states,):
            raise DomainMismatchError(
                f"potential vector has shape {vec.shape}, expected ({graph.n_states},)"
            )
        return cls({s: float(v) for s, v in zip(graph.states, vec)})

    def vector(self, graph: TransitionGraph) -> np.ndarray:
        check_potential_domain(graph, self)
        return np.array([self.values[s] for s in graph.states], dtype=np.float64)

    def __call__(self, state: str) -> float:
        return self.values[state]

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)


@dataclass(frozen=True)
class Reward:
    """Real-valued assignment on exactly the allowed transitions."""

    values: Mapping[TransitionKey, float]

    def __post_init__(self):
        copied = {(k[0], k[1], k[2]): float(v) for k, v in self.values.items()}
        if not all(math.isfinite(v) for v in copied.values()):
            raise ValueError("reward values must be finite")
        object.__setattr__(self, "values", copied)

    @classmethod
    def zeros(cls, graph: TransitionGraph) -> "Reward":
        return cls({t.key: 0.0 for t in graph.transitions})

    @classmethod
    def from_vector(cls, graph: TransitionGraph, vec) -> "Reward":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (graph.n_transitions,):
            raise DomainMismatchError(
                f"reward vector has shape {vec.shape}, expected ({graph.n_transitions},)"
            )
        return cls({t.key: float(v) for t, v in zip(graph.transitions, vec)})

    def vector(self, graph: TransitionGraph) -> np.ndarray:
        check_reward_domain(graph, self)
        return np.array([self.values[t.key] for t in graph.transitions], dtype=np.float64)

    def __call__(self, src: str, action: str, dst: str) -> float:
        return self.values[(src, action, dst)]

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)


def check_potential_domain(graph: TransitionGraph, p: Potential) -> None:
    keys = set(p.values)
    states = set(graph.states)
    if keys != states:
        missing = sorted(states - keys)
        extra = sorted(keys - states)
        raise DomainMismatchError(
            f"potential domain mismatch: missing states {missing}, extra keys {extra}"
        )


def check_reward_domain(graph: TransitionGraph, r: Reward) -> None:
    keys = set(r.values)
    allowed = {t.key for t in graph.transitions}
    if keys != allowed:
        missing = sorted(allowed - keys)
        extra = sorted(keys - allowed)
        raise DomainMismatchError(
            f"reward domain mismatch: missing transitions {missing}, extra keys {extra}"
        )


def inner_product_potentials(graph: TransitionGraph, p: Potential, q: Potential) -> float:
    """State-weighted inner product sum_s lambda(s) p(s) q(s)."""
    graph.require_valid()
    pv, qv = p.vector(graph), q.vector(graph)
    lam = graph.index_arrays[3]
    return float(np.dot(lam * pv, qv))


def inner_product_rewards(graph: TransitionGraph, r: Reward, q: Reward) -> float:
    """Transition-weighted inner product sum_t w(t) r(t) q(t)."""
    graph.require_valid()
    rv, qv = r.vector(graph), q.vector(graph)
    w = graph.index_arrays[2]
    return float(np.dot(w * rv, qv))


def reward_norm(graph: TransitionGraph, r: Reward) -> float:
    """Weighted L2 norm of a reward."""
    return math.sqrt(max(inner_product_rewards(graph, r, r), 0.0))


def potential_norm(graph: TransitionGraph, p: Potential) -> float:
    """Weighted L2 norm of a potential."""
    return math.sqrt(max(inner_product_potentials(graph, p, p), 0.0))


def reward_combine(a: float, r: Reward, b: float, q: Reward) -> Reward:
    """Pointwise linear combination a*r + b*q on a shared transition set."""
    if set(r.values) != set(q.values):
        raise DomainMismatchError("rewards are defined on different transition sets")
    return Reward({k: a * v + b * q.values[k] for k, v in r.values.items()})


def potential_combine(a: float, p: Potential, b: float, q: Potential) -> Potential:
    if set(p.values) != set(q.values):
        raise DomainMismatchError("potentials are defined on different state sets")
    return Potential({k: a * v + b * q.values[k] for k, v in p.values.items()})
