# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled value-iteration kernel; mirrors fallback.value_iteration_batch."""

from libc.math cimport fabs

import numpy as np

cimport numpy as cnp

cnp.import_array()


def value_iteration_batch(succ_state, rewards, state_offsets, double gamma,
                          double stop_tol, long max_iter):
    """Optimal Q-values for a batch of deterministic dynamics.

    Same contract and element order as the numpy fallback; see that module
    for the argument documentation.
    """
    cdef cnp.int32_t[:, ::1] succ = np.ascontiguousarray(succ_state, dtype=np.int32)
    cdef cnp.float64_t[:, ::1] rew = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef cnp.int32_t[::1] offsets = np.ascontiguousarray(state_offsets, dtype=np.int32)

    cdef Py_ssize_t n_dyn = rew.shape[0]
    cdef Py_ssize_t n_sa = rew.shape[1]
    cdef Py_ssize_t n_states = offsets.shape[0] - 1

    q_arr = np.array(rewards, dtype=np.float64, copy=True)
    if n_dyn == 0 or n_sa == 0:
        return q_arr, 0

    v_arr = np.zeros((n_dyn, n_states), dtype=np.float64)
    new_v_arr = np.zeros((n_dyn, n_states), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] q = q_arr
    cdef cnp.float64_t[:, ::1] v = v_arr
    cdef cnp.float64_t[:, ::1] new_v = new_v_arr

    cdef Py_ssize_t d, k, s, it
    cdef long iterations = 0
    cdef long bound = max_iter if max_iter > 1 else 1
    cdef double m, val, diff, delta

    with nogil:
        for it in range(bound):
            delta = 0.0
            for d in range(n_dyn):
                for k in range(n_sa):
                    q[d, k] = rew[d, k] + gamma * v[d, succ[d, k]]
                for s in range(n_states):
                    m = q[d, offsets[s]]
                    for k in range(offsets[s] + 1, offsets[s + 1]):
                        val = q[d, k]
                        if val > m:
                            m = val
                    new_v[d, s] = m
                    diff = fabs(m - v[d, s])
                    if diff > delta:
                        delta = diff
            for d in range(n_dyn):
                for s in range(n_states):
                    v[d, s] = new_v[d, s]
            iterations += 1
            if delta <= stop_tol:
                break
        for d in range(n_dyn):
            for k in range(n_sa):
                q[d, k] = rew[d, k] + gamma * v[d, succ[d, k]]

    return q_arr, iterations
