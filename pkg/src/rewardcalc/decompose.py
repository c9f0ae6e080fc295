"""Orthogonal splitting of rewards into divergence-free + gradient parts.

Every reward decomposes uniquely as R = R' + grad(phi) with div(R') = 0, and
R' is orthogonal to every gradient under the weighted inner product.  R' is
the canonical representative of R's potential-shaping equivalence class and
minimizes the weighted L2 norm within the class, which yields a
shaping-invariant distance between rewards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .fields import Potential, Reward, potential_norm, reward_combine, reward_norm
from .graphs import TransitionGraph
from .operators import divergence, grad, laplacian_matrix

RANK_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Decomposition:
    """Result record of the orthogonal reward decomposition.

    ``divergence_free + grad(potential)`` reconstructs the input up to
    ``reconstruction_residual``; ``divergence_residual`` bounds the norm of
    the divergence of the divergence-free part.  Residuals are recomputed
    from the produced fields, not assumed.
    """

    divergence_free: Reward
    potential: Potential
    reconstruction_residual: float
    divergence_residual: float
    laplacian_invertible: bool


def decompose(
    graph: TransitionGraph, r: Reward, rank_threshold: float = RANK_THRESHOLD
) -> Decomposition:
    """Split r into its divergence-free part and a gradient.

    When the Laplacian is numerically nonsingular the potential is the unique
    solution of laplacian(phi) = div(r) by direct solve; otherwise the
    minimum-norm least-squares solution pins a deterministic representative
    (the divergence-free part is unique either way).
    """
    graph.require_valid()
    lap = laplacian_matrix(graph)
    div_vec = divergence(graph, r).vector(graph)
    invertible = lap.is_invertible(rank_threshold)
    try:
        if invertible:
            phi_vec = np.linalg.solve(lap.entries, div_vec)
        else:
            phi_vec, *_ = np.linalg.lstsq(lap.entries, div_vec, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"Laplacian solve failed (smallest singular value "
            f"{lap.smallest_singular_value:g}): {exc}"
        ) from exc
    potential = Potential.from_vector(graph, phi_vec)
    shaping = grad(graph, potential)
    div_free = reward_combine(1.0, r, -1.0, shaping)
    reconstruction = reward_combine(1.0, div_free, 1.0, shaping)
    recon_residual = reward_norm(graph, reward_combine(1.0, reconstruction, -1.0, r))
    div_residual = potential_norm(graph, divergence(graph, div_free))
    return Decomposition(
        divergence_free=div_free,
        potential=potential,
        reconstruction_residual=recon_residual,
        divergence_residual=div_residual,
        laplacian_invertible=invertible,
    )


def canonicalize(graph: TransitionGraph, r: Reward) -> Reward:
    """The unique divergence-free representative of r's shaping class."""
    return decompose(graph, r).divergence_free


def shaping_distance(graph: TransitionGraph, r1: Reward, r2: Reward) -> float:
    """Weighted L2 distance between canonicalized rewards.

    Zero exactly when r1 and r2 differ by a potential shaping term (up to
    numerical tolerance); invariant under shaping either argument.
    """
    c1 = canonicalize(graph, r1)
    c2 = canonicalize(graph, r2)
    return reward_norm(graph, reward_combine(1.0, c1, -1.0, c2))
