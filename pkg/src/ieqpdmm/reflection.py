"""Projection onto and reflection about the lifted dual set.

For an inequality row the partner pair ``(a, b)`` is projected onto
``{u = v >= 0}``; for an equality row onto ``{u = v}``.  The reflection is
``2 * projection - identity``, which reduces to the following rule:
inequality pairs are exchanged when ``a + b > 0`` and negated otherwise,
equality pairs are always exchanged.
"""

from __future__ import annotations

import numpy as np

from .problem import DirectedEdgeLayout, Kind


def _is_eq(kind) -> bool:
    return Kind(kind) is Kind.EQ


def project_pair(a: float, b: float, kind=Kind.INEQ) -> tuple[float, float]:
    mean = 0.5 * (a + b)
    if not _is_eq(kind):
        mean = max(mean, 0.0)
    return mean, mean


def reflect_pair(a: float, b: float, kind=Kind.INEQ) -> tuple[float, float]:
    # a + b == 0 takes the negate branch; both branches agree there
    if _is_eq(kind) or a + b > 0:
        return b, a
    return -a, -b


def project_all(y: np.ndarray, is_eq: np.ndarray) -> np.ndarray:
    """Projection of a full ``2m`` vector; ``is_eq`` holds one flag per row."""
    y = np.asarray(y, dtype=float)
    m = is_eq.size
    if y.size != 2 * m:
        raise ValueError(f"expected {2 * m} slots, got {y.size}")
    mean = 0.5 * (y[:m] + y[m:])
    mean = np.where(is_eq, mean, np.maximum(mean, 0.0))
    return np.concatenate([mean, mean])


def reflect_all(y: np.ndarray, layout_or_is_eq) -> np.ndarray:
    """Reflection of a full ``2m`` vector, row by row."""
    is_eq = layout_or_is_eq.is_eq if isinstance(layout_or_is_eq, DirectedEdgeLayout) else np.asarray(layout_or_is_eq, dtype=bool)
    y = np.asarray(y, dtype=float)
    m = is_eq.size
    if y.size != 2 * m:
        raise ValueError(f"expected {2 * m} slots, got {y.size}")
    lo, hi = y[:m], y[m:]
    swap = is_eq | (lo + hi > 0)
    return np.concatenate([np.where(swap, hi, -lo), np.where(swap, lo, -hi)])


def permute(y: np.ndarray) -> np.ndarray:
    """The partner exchange ``P y``."""
    m = y.size // 2
    return np.concatenate([y[m:], y[:m]])
