"""Closed-form node updates for quadratic and linear costs.

For node ``i`` with owned slot rows ``C_i`` (one row of ``A_ij`` per slot)
the primal update minimises

    f_i(x) + z_i' C_i x + (c/2) ||C_i x - d_i||^2

whose normal equations are ``H x = rhs_static - C_i' z_i`` with
``H = Q + c C_i'C_i`` and ``rhs_static = -q + c C_i' d_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import SingularSystem
from .problem import Node, Quadratic

# smallest admissible pivot of the Cholesky factor, relative to the largest
PIVOT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class NodeSystem:
    node_id: int
    C: np.ndarray
    d: np.ndarray
    c: float
    H: np.ndarray
    rhs_static: np.ndarray
    factor: tuple
    # x = offset - gain @ z_local, precomputed from the factorisation
    offset: np.ndarray
    gain: np.ndarray

    @classmethod
    def build(cls, node_id: int, node: Node, C: np.ndarray, d: np.ndarray, c: float) -> "NodeSystem":
        n = node.dim
        d = np.asarray(d, dtype=float).reshape(-1)
        C = np.asarray(C, dtype=float).reshape(d.size, n)
        obj = node.objective
        H = c * C.T @ C
        if isinstance(obj, Quadratic):
            H = H + obj.Q
            rhs = -obj.q + c * C.T @ d
        else:
            rhs = -obj.g + c * C.T @ d
        if n == 0:
            empty = (np.zeros((0, 0)), False)
            return cls(node_id, C, d, c, H, rhs, empty, np.zeros(0), np.zeros((0, C.shape[0])))
        try:
            factor = cho_factor(H, lower=False, check_finite=True)
        except LinAlgError:
            raise SingularSystem(node_id) from None
        pivots = np.abs(np.diag(factor[0]))
        if pivots.min() <= PIVOT_RTOL * pivots.max():
            raise SingularSystem(node_id)
        offset = cho_solve(factor, rhs)
        gain = cho_solve(factor, C.T) if C.shape[0] else np.zeros((n, 0))
        return cls(node_id, C, d, c, H, rhs, factor, offset, gain)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def solve(self, z_local: np.ndarray) -> np.ndarray:
        """Exact solve through the Cholesky factor."""
        if self.dim == 0:
            return np.zeros(0)
        return cho_solve(self.factor, self.rhs_static - self.C.T @ z_local)

    def affine(self, z_local: np.ndarray) -> np.ndarray:
        """Same minimiser through the precomputed affine map (fast path)."""
        return self.offset - self.gain @ z_local

    def local_objective(self, node: Node, z_local, x) -> float:
        r = self.C @ x - self.d
        return float(node.objective.value(x) + z_local @ (self.C @ x) + 0.5 * self.c * r @ r)


def x_update(system: NodeSystem, z_local: np.ndarray) -> np.ndarray:
    return system.solve(np.asarray(z_local, dtype=float))


def y_update(z, x, A, b, c):
    """``y = z + 2c (A x - b/2)``; ``A`` may have zero columns (dummy node)."""
    z = np.asarray(z, dtype=float)
    A = np.asarray(A, dtype=float).reshape(z.size, -1)
    return z + 2.0 * c * (A @ np.asarray(x, dtype=float).reshape(-1) - 0.5 * np.asarray(b, dtype=float))
