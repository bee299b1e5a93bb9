"""Exact solvers for the maximum-total-cost assignment problem.

A cost matrix is any square array of finite reals; an assignment maps each
row to a distinct column.  The production solver runs in O(n^3) via shortest
augmenting paths on dual potentials, and a factorial-time enumerator is kept
alongside as an independent oracle for small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_BRUTE_FORCE_SIZE",
    "Assignment",
    "as_cost_matrix",
    "assignment_value",
    "brute_force_max_assignment",
    "solve_max_assignment",
]

MAX_BRUTE_FORCE_SIZE = 10


@dataclass(frozen=True)
class Assignment:
    """Column assigned to each row, with the total cost of that choice."""

    permutation: tuple[int, ...]
    value: float


def as_cost_matrix(matrix) -> np.ndarray:
    """Coerce ``matrix`` to a validated square float array.

    Raises:
        ValueError: if the input is not square, is empty, or carries
            non-finite entries.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ValueError("cost matrix must have at least one row")
    if not np.all(np.isfinite(m)):
        raise ValueError("cost matrix entries must be finite")
    return m


def assignment_value(matrix, permutation) -> float:
    """Total cost of ``permutation`` on ``matrix``.

    The sum is accumulated in row order, so repeated calls on the same
    arguments return the identical float.
    """
    m = as_cost_matrix(matrix)
    n = m.shape[0]
    pi = [int(j) for j in permutation]
    if sorted(pi) != list(range(n)):
        raise ValueError(f"permutation must list each column 0..{n - 1} exactly once")
    total = 0.0
    for i, j in enumerate(pi):
        total += m[i, j]
    return total


def solve_max_assignment(matrix) -> Assignment:
    """Find a maximum-value assignment in O(n^3) time.

    Internally negates the matrix and runs a shortest-augmenting-path
    search with dual potentials, one augmentation per row.  The returned
    value is recomputed from the permutation with :func:`assignment_value`.
    """
    m = as_cost_matrix(matrix)
    column_of_row = _min_cost_matching(-m)
    permutation = tuple(int(j) for j in column_of_row)
    return Assignment(permutation=permutation, value=assignment_value(m, permutation))


def brute_force_max_assignment(matrix) -> Assignment:
    """Maximize by enumerating all n! permutations (n <= 10 only).

    Ties are broken toward the lexicographically smallest permutation,
    which makes the result deterministic even on crafted inputs.
    """
    m = as_cost_matrix(matrix)
    n = m.shape[0]
    if n > MAX_BRUTE_FORCE_SIZE:
        raise ValueError(
            f"brute force is limited to n <= {MAX_BRUTE_FORCE_SIZE}, got n = {n}"
        )
    rows = m.tolist()
    best_perm: tuple[int, ...] | None = None
    best_value = -math.inf
    # itertools.permutations yields in lexicographic order, so keeping only
    # strict improvements realizes the tie-break.
    for perm in itertools.permutations(range(n)):
        total = 0.0
        for i, j in enumerate(perm):
            total += rows[i][j]
        if total > best_value:
            best_value = total
            best_perm = perm
    assert best_perm is not None
    return Assignment(permutation=best_perm, value=best_value)


def _min_cost_matching(cost: np.ndarray) -> np.ndarray:
    """Column choice per row minimizing total cost, by successive shortest paths.

    Dual feasibility (cost[i, j] - u[i] - v[j] >= 0 over matched rows) is
    maintained after every augmentation, which keeps each Dijkstra sweep
    valid despite the unrestricted sign of the inputs.
    """
    n = cost.shape[0]
    u = np.zeros(n)
    v = np.zeros(n)
    column_of_row = np.full(n, -1, dtype=np.int64)
    row_of_column = np.full(n, -1, dtype=np.int64)
    for start_row in range(n):
        shortest = np.full(n, np.inf)
        parent_row = np.full(n, -1, dtype=np.int64)
        unvisited = np.ones(n, dtype=bool)
        row_in_tree = np.zeros(n, dtype=bool)
        distance = 0.0
        i = start_row
        sink = -1
        while sink < 0:
            row_in_tree[i] = True
            reduced = distance + cost[i] - u[i] - v
            improve = unvisited & (reduced < shortest)
            shortest[improve] = reduced[improve]
            parent_row[improve] = i
            frontier = np.where(unvisited, shortest, np.inf)
            j = int(np.argmin(frontier))
            distance = float(frontier[j])
            if not math.isfinite(distance):
                raise RuntimeError("augmenting path search stalled on a finite matrix")
            unvisited[j] = False
            if row_of_column[j] < 0:
                sink = j
            else:
                i = int(row_of_column[j])
        u[start_row] += distance
        grown = row_in_tree.copy()
        grown[start_row] = False
        tree_rows = np.flatnonzero(grown)
        u[tree_rows] += distance - shortest[column_of_row[tree_rows]]
        seen_columns = ~unvisited
        v[seen_columns] -= distance - shortest[seen_columns]
        j = sink
        while True:
            i = int(parent_row[j])
            row_of_column[j] = i
            column_of_row[i], j = j, int(column_of_row[i])
            if i == start_row:
                break
    return column_of_row
