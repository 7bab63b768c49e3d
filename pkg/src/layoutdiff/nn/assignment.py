"""Minimum-cost assignment with deterministic tie-breaking."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["hungarian"]


def _optimal_total(cost: np.ndarray) -> float:
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def hungarian(cost) -> np.ndarray:
    """Assign each row of a square cost matrix to a distinct column.

    Returns the assigned column per row, minimizing total cost.  Among
    equally cheap assignments the lexicographically smallest column
    vector is chosen: row 0 takes the lowest column it can while still
    permitting an optimal completion, then row 1, and so on.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("hungarian: cost matrix must be square")
    if not np.all(np.isfinite(cost)):
        raise ValueError("hungarian: costs must be finite")
    n = cost.shape[0]
    assigned = np.zeros(n, dtype=np.intp)
    if n == 0:
        return assigned

    best_total = _optimal_total(cost)
    tol = 1e-9 * max(1.0, abs(best_total))
    free_cols = list(range(n))
    fixed_cost = 0.0
    for i in range(n):
        tail_rows = np.arange(i + 1, n)
        chosen = -1
        fallback_col, fallback_total = free_cols[0], np.inf
        for j in free_cols:
            candidate = fixed_cost + cost[i, j]
            if tail_rows.size:
                rest = [c for c in free_cols if c != j]
                candidate += _optimal_total(cost[np.ix_(tail_rows, rest)])
            if candidate <= best_total + tol:
                chosen = j
                break
            if candidate < fallback_total:
                fallback_col, fallback_total = j, candidate
        if chosen < 0:
            chosen = fallback_col  # float-noise safety net; nearest-optimal column
        assigned[i] = chosen
        fixed_cost += cost[i, chosen]
        free_cols.remove(chosen)
    return assigned
