"""Ground-truth verification, outside the query model.

This module is the referee: it reads densities directly (no ledger) to
compute exact envy matrices and welfare metrics, and provides brute-force
grid oracles for optima and Pareto dominance.  Algorithms must never import
it; tests and the CLI use it to certify advertised guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDivisionError, UnsupportedSizeError
from .oracle import Instance
from .plef import Division
from .ripple import Allocation

_OBJECTIVES = ("sw", "ew", "nsw")


def as_piece_lists(division) -> list[list[tuple[float, float]]]:
    """Normalize an Allocation / Division / raw nested list to per-agent piece lists."""
    if isinstance(division, Allocation):
        return division.piece_lists()
    if isinstance(division, Division):
        return division.piece_lists()
    return [[(float(l), float(r)) for l, r in pieces] for pieces in division]


@dataclass(frozen=True)
class EnvyMatrix:
    """values[i][j] = v_i(pieces of agent j); max_envy = max_ij (v_i(D_j) - v_i(D_i))."""

    values: np.ndarray
    max_envy: float


def _validate_pieces(pieces: list[list[tuple[float, float]]]) -> None:
    flat = []
    for plist in pieces:
        for l, r in plist:
            if not (0.0 <= l <= r <= 1.0):
                raise InvalidDivisionError(f"piece [{l}, {r}] outside the cake")
            if r > l:
                flat.append((l, r))
    flat.sort()
    for (_, r1), (l2, _) in zip(flat, flat[1:]):
        if l2 < r1 - 1e-12:
            raise InvalidDivisionError(f"pieces overlap beyond endpoint contact near {l2}")


def envy_matrix(instance: Instance, division) -> EnvyMatrix:
    """Exact n x n value matrix of the division (audit path, no ledger)."""
    pieces = as_piece_lists(division)
    _validate_pieces(pieces)
    n = instance.n
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            values[i, j] = sum(instance.agents[i].measure(l, r) for l, r in pieces[j])
    envy = values - np.diag(values)[:, None]
    return EnvyMatrix(values, float(envy.max()))


def welfare_metrics(instance: Instance, division) -> tuple[float, float, float]:
    """(social, egalitarian, Nash) welfare of the division."""
    own = np.diag(envy_matrix(instance, division).values)
    nsw = float(np.prod(own) ** (1.0 / len(own))) if own.min() > 0.0 else 0.0
    return float(own.sum()), float(own.min()), nsw


def _prefix_table(instance: Instance, m: int) -> np.ndarray:
    grid = np.linspace(0.0, 1.0, m + 1)
    return np.array([[agent.measure(0.0, g) for g in grid] for agent in instance.agents])


def _objective_grid(prefix: np.ndarray, objective: str):
    """All MLRP-order-conforming cut tuples on the grid, evaluated exhaustively.

    Yields (objective ndarray over cut tuples, per-agent value arrays).  Shapes:
    n=1 scalar; n=2 vector over the single cut; n=3 matrix over (c1, c2);
    n=4 is iterated over c1 with matrix inner blocks.
    """
    n, tt = prefix.shape
    if objective not in _OBJECTIVES:
        raise UnsupportedSizeError(f"unknown objective {objective!r}")

    def combine(values):  # values: list of n broadcastable arrays
        stack = np.broadcast_arrays(*values)
        if objective == "sw":
            return sum(stack)
        if objective == "ew":
            return np.minimum.reduce(stack)
        prod = np.ones_like(stack[0])
        for v in stack:
            prod = prod * np.maximum(v, 0.0)
        return prod ** (1.0 / n)

    if n == 1:
        yield combine([np.array(prefix[0, -1])])
    elif n == 2:
        v1 = prefix[0]
        v2 = prefix[1, -1] - prefix[1]
        yield combine([v1, v2])
    elif n == 3:
        c1 = prefix[0][:, None]
        mid = prefix[1][None, :] - prefix[1][:, None]
        c2 = (prefix[2, -1] - prefix[2])[None, :]
        vals = combine([c1, mid, c2])
        t1, t2 = np.meshgrid(np.arange(tt), np.arange(tt), indexing="ij")
        vals = np.where(t1 <= t2, vals, -np.inf)
        yield vals
    elif n == 4:
        for t1 in range(tt):
            v1 = np.array(prefix[0, t1])
            v2 = (prefix[1][:, None] - prefix[1, t1])
            v3 = prefix[2][None, :] - prefix[2][:, None]
            v4 = (prefix[3, -1] - prefix[3])[None, :]
            vals = combine([v1, v2, v3, v4])
            t2, t3 = np.meshgrid(np.arange(tt), np.arange(tt), indexing="ij")
            vals = np.where((t1 <= t2) & (t2 <= t3), vals, -np.inf)
            yield vals
    else:
        raise UnsupportedSizeError(f"brute force supports n <= 4, got n={n}")


def brute_force_optimum(instance: Instance, objective: str, m: int) -> float:
    """Max SW/EW/NSW over all nondecreasing cut tuples on an m-cell uniform grid.

    Exhaustive by construction (independent of the DP/search paths it audits).
    """
    if instance.n > 4:
        raise UnsupportedSizeError(f"brute force supports n <= 4, got n={instance.n}")
    if m > 2000:
        raise UnsupportedSizeError(f"grid m={m} exceeds the supported 2000")
    prefix = _prefix_table(instance, m)
    return float(max(block.max() for block in _objective_grid(prefix, objective)))


def pareto_dominated_on_grid(instance: Instance, division, m: int) -> bool:
    """True iff some grid allocation (MLRP order) weakly improves everyone,
    and improves someone by more than 1e-9.

    Restricting the candidate dominators to MLRP-order-conforming cut tuples
    is lossless when the instance is in MLRP order: any dominating division
    can be repaired into a conforming allocation without lowering values.
    """
    n = instance.n
    if n > 3:
        raise UnsupportedSizeError(f"pareto falsifier supports n <= 3, got n={n}")
    own = np.diag(envy_matrix(instance, division).values)
    prefix = _prefix_table(instance, m)
    tt = prefix.shape[1]
    if n == 1:
        return False
    if n == 2:
        v = [prefix[0], prefix[1, -1] - prefix[1]]
    else:
        v = [np.broadcast_to(prefix[0][:, None], (tt, tt)),
             prefix[1][None, :] - prefix[1][:, None],
             np.broadcast_to((prefix[2, -1] - prefix[2])[None, :], (tt, tt))]
        t1, t2 = np.meshgrid(np.arange(tt), np.arange(tt), indexing="ij")
        v = [np.where(t1 <= t2, x, -np.inf) for x in v]
    weak = np.ones_like(v[0], dtype=bool)
    strict = np.zeros_like(v[0], dtype=bool)
    for i in range(n):
        weak &= v[i] >= own[i] - 1e-12
        strict |= v[i] > own[i] + 1e-9
    return bool((weak & strict).any())


def is_perfect(instance: Instance, division, tol: float) -> bool:
    """True iff every agent values every bundle at exactly 1/n (within tol)."""
    values = envy_matrix(instance, division).values
    return bool(np.abs(values - 1.0 / instance.n).max() <= tol)
