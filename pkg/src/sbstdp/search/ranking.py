"""Preference sorting, non-dominated fronts and crowding distance (minimisation)."""
from __future__ import annotations

import numpy as np


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row i Pareto-dominates row j."""
    le = (F[:, None, :] <= F[None, :, :]).all(axis=2)
    lt = (F[:, None, :] < F[None, :, :]).any(axis=2)
    return le & lt


def non_dominated_fronts(F: np.ndarray) -> list[list[int]]:
    n = F.shape[0]
    if n == 0:
        return []
    if F.shape[1] == 0:
        return [list(range(n))]
    D = dominance_matrix(F)
    dominated_by = D.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    fronts = []
    while remaining.any():
        front = np.flatnonzero(remaining & (dominated_by == 0))
        fronts.append(front.tolist())
        remaining[front] = False
        dominated_by = dominated_by - D[front].sum(axis=0)
    return fronts


def crowding_distance(F: np.ndarray) -> np.ndarray:
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def preference_sort(F: np.ndarray, sizes, budget: int):
    """Select ``budget`` rows.

    Front 0 holds, for every column, the row with the lowest value (ties: smaller
    ``sizes`` entry, then lower row index). The other rows are split into
    non-dominated fronts. Fronts are admitted in order and the last admitted
    front is truncated by descending crowding distance.

    Returns ``(selected_rows, rank, crowding)`` aligned with each other.
    """
    n, m = F.shape
    idx = np.arange(n)
    sizes = np.asarray(sizes)
    best = set()
    for j in range(m):
        best.add(int(np.lexsort((idx, sizes, F[:, j]))[0]))
    fronts = [sorted(best)] if best else []
    rest = np.array([i for i in range(n) if i not in best], dtype=int)
    if rest.size:
        fronts += [rest[f].tolist() for f in non_dominated_fronts(F[rest])]

    selected, ranks, crowd = [], [], []
    for rank, front in enumerate(fronts):
        room = budget - len(selected)
        if room <= 0:
            break
        cd = crowding_distance(F[front]) if m else np.zeros(len(front))
        if len(front) > room:
            keep = sorted(range(len(front)), key=lambda k: (-cd[k], front[k]))[:room]
            keep.sort()
        else:
            keep = range(len(front))
        for k in keep:
            selected.append(front[k])
            ranks.append(rank)
            crowd.append(float(cd[k]))
    return selected, ranks, crowd
