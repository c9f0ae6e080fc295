"""Vectorized numpy implementation of the value-iteration kernel."""
from __future__ import annotations

import numpy as np


def value_iteration_batch(succ_state, rewards, state_offsets, gamma, stop_tol, max_iter):
    """Optimal Q-values for a batch of deterministic dynamics.

    Arguments
    ---------
    succ_state : int32 (n_dyn, n_sa)
        Successor state index of each (state, action) pair under each dynamics.
    rewards : float64 (n_dyn, n_sa)
        One-step reward of taking the pair under each dynamics.
    state_offsets : int32 (n_states + 1,)
        Block boundaries of the state-sorted (state, action) pair list; every
        state owns at least one pair.
    gamma, stop_tol, max_iter
        Discount, sup-norm stopping change, and iteration bound.

    Returns (Q, iterations) with Q of shape (n_dyn, n_sa).
    """
    succ_state = np.ascontiguousarray(succ_state, dtype=np.int32)
    rewards = np.ascontiguousarray(rewards, dtype=np.float64)
    state_offsets = np.ascontiguousarray(state_offsets, dtype=np.int32)
    n_dyn, n_sa = rewards.shape
    n_states = len(state_offsets) - 1
    v = np.zeros((n_dyn, n_states), dtype=np.float64)
    if n_dyn == 0 or n_sa == 0:
        return rewards.copy(), 0
    starts = state_offsets[:-1].astype(np.intp)
    iterations = 0
    for _ in range(max(int(max_iter), 1)):
        q = rewards + gamma * np.take_along_axis(v, succ_state, axis=1)
        new_v = np.maximum.reduceat(q, starts, axis=1)
        delta = float(np.max(np.abs(new_v - v)))
        v = new_v
        iterations += 1
        if delta <= stop_tol:
            break
    q = rewards + gamma * np.take_along_axis(v, succ_state, axis=1)
    return q, iterations
