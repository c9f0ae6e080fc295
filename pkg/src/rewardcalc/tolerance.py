"""Uniform floating-point comparison policy.

All approximate comparisons in the package go through one rule:
x matches y iff |x - y| <= abs_tol + rel_tol * max(|x|, |y|).
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9

    def close(self, x: float, y: float) -> bool:
        return abs(x - y) <= self.abs_tol + self.rel_tol * max(abs(x), abs(y))

    def is_zero(self, x: float, scale: float = 0.0) -> bool:
        """True if x is negligible, optionally relative to a problem scale."""
        return abs(x) <= self.abs_tol + self.rel_tol * abs(scale)


DEFAULT_TOL = Tolerance()
