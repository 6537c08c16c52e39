"""Welfare maximization under MLRP in the Robertson-Webb model.

Social welfare: binary-search each pairwise switching point into a gamma-wide
bracket, then run an interval-partition dynamic program over the bracketed
points.  Egalitarian welfare: binary search over target values of a moving-
knife chain, using feasibility monotonicity.  Nash welfare: product-form DP
over an adaptively generated value grid.  All cut points are assigned left to
right in MLRP order, which is where every Pareto optimum lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedFamilyError
from .oracle import Instance, QueryLedger, cut_query, eval_query
from .ripple import Allocation

#: Grid points closer than this are merged before a DP runs.
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class SwitchingPointSet:
    """Bracket midpoints for all pairwise switching points, plus the cake ends."""

    estimates: tuple[tuple[int, int, float], ...]  # (i, j, estimate) for i < j
    gamma: float
    points: tuple[float, ...]  # sorted, deduplicated, includes 0 and 1


@dataclass(frozen=True)
class DpTable:
    """Interval-partition DP state: values[k][t] plus the chosen split per cell."""

    values: np.ndarray  # shape (n, T+1)
    back: np.ndarray  # back[k][t] = argmax t' (smallest on ties)


@dataclass(frozen=True)
class MovingKnifeRun:
    tau: float
    knives: tuple[float, ...]  # MK_1 .. MK_n
    feasible: bool


def query_lipschitz(instance: Instance) -> float:
    """Instance lambda, falling back to the eval-Lipschitz bound max(U, 1) when infinite."""
    lam = instance.bounds.lipschitz
    if math.isfinite(lam):
        return lam
    return max(instance.bounds.upper, 1.0)


def switching_point(instance: Instance, i: int, j: int, gamma: float,
                    ledger: QueryLedger) -> float:
    """Estimate of p_ij = inf{x : f_j(x) >= f_i(x)} within gamma, for i < j in MLRP order.

    Buckets of width gamma/2 satisfy v_j < v_i strictly left of the bucket
    containing p_ij and v_j >= v_i strictly right of it, so binary search for
    the first bucket with v_j >= v_i brackets p_ij within two buckets.
    """
    if not (0 <= i < j < instance.n):
        raise DomainError(f"need agent indices i < j in range, got ({i}, {j})")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma={gamma} outside (0, 1)")
    half = 0.5 * gamma
    buckets = math.ceil(1.0 / half)

    def dominates(k: int) -> bool:  # v_j(B_k) >= v_i(B_k) for bucket k in [1, buckets]
        lo, hi = min((k - 1) * half, 1.0), min(k * half, 1.0)
        return eval_query(instance, j, lo, hi, ledger) >= eval_query(instance, i, lo, hi, ledger)

    lo, hi = 1, buckets
    if dominates(1):
        first = 1
    else:
        # invariant: not dominates(lo), dominates(hi) would close the bracket
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if dominates(mid):
                hi = mid
            else:
                lo = mid
        first = hi
    bracket_lo = max((first - 2) * half, 0.0)
    bracket_hi = min(first * half, 1.0)
    return 0.5 * (bracket_lo + bracket_hi)


def build_switching_points(instance: Instance, gamma: float,
                           ledger: QueryLedger) -> SwitchingPointSet:
    estimates = []
    points = [0.0, 1.0]
    for i in range(instance.n):
        for j in range(i + 1, instance.n):
            p = switching_point(instance, i, j, gamma, ledger)
            estimates.append((i, j, p))
            points.append(p)
    points.sort()
    merged = [points[0]]
    for p in points[1:]:
        if p - merged[-1] > MERGE_TOL:
            merged.append(p)
    merged[-1] = 1.0
    return SwitchingPointSet(tuple(estimates), gamma, tuple(merged))


def _prefix_values(instance: Instance, points, ledger: QueryLedger) -> np.ndarray:
    """prefix[k][t] = v_k(0, points[t]); n*(T+1) eval queries."""
    return np.array([[eval_query(instance, k, 0.0, p, ledger) for p in points]
                     for k in range(instance.n)])


def _run_partition_dp(prefix: np.ndarray, combine: str) -> DpTable:
    """Left-to-right interval partition DP over grid points.

    values[k][t] = best objective allocating [0, points[t]] to agents 0..k,
    with combine "sum" (social welfare) or "product" (Nash product).  Ties
    break toward the smallest split index, so outputs are deterministic.
    """
    n, tt = prefix.shape
    values = np.zeros((n, tt))
    back = np.zeros((n, tt), dtype=int)
    values[0] = prefix[0]
    for k in range(1, n):
        for t in range(tt):
            seg = prefix[k, t] - prefix[k, : t + 1]  # v_k(points[t'], points[t])
            cand = values[k - 1, : t + 1] + seg if combine == "sum" \
                else values[k - 1, : t + 1] * seg
            best = int(np.argmax(cand))
            values[k, t] = cand[best]
            back[k, t] = best
    return DpTable(values, back)


def _dp_allocation(points, table: DpTable) -> Allocation:
    n, tt = table.values.shape
    cuts = [float(points[-1])]
    t = tt - 1
    for k in range(n - 1, 0, -1):
        t = int(table.back[k, t])
        cuts.append(float(points[t]))
    cuts.append(0.0)
    cuts.reverse()
    cuts[0], cuts[-1] = 0.0, 1.0
    return Allocation(tuple(cuts))


def max_social_welfare(instance: Instance, eta: float,
                       ledger: QueryLedger) -> tuple[Allocation, float]:
    """Allocation with social welfare within eta of the optimum.

    The optimum's cut points are switching points; brackets of width
    eta / (n * lambda) keep every rounded cut's value shift below eta / n.
    """
    if not eta > 0.0:
        raise DomainError(f"eta={eta} must be positive")
    if instance.n == 1:
        return Allocation((0.0, 1.0)), 1.0
    gamma = min(eta / (instance.n * query_lipschitz(instance)), 0.25)
    pset = build_switching_points(instance, gamma, ledger)
    prefix = _prefix_values(instance, pset.points, ledger)
    table = _run_partition_dp(prefix, "sum")
    return _dp_allocation(pset.points, table), float(table.values[-1, -1])


def mk_chain(instance: Instance, tau: float, ledger: QueryLedger) -> MovingKnifeRun:
    """Moving-knife chain MK_i = Cut_i(MK_{i-1}, tau), with MK_0 = 0.

    Feasible iff every agent's interval really has value tau, i.e. no cut was
    truncated at 1 (checked with an eval only when a knife lands on 1).
    """
    if tau < 0.0:
        raise DomainError(f"negative target value tau={tau}")
    knives, prev, feasible = [], 0.0, True
    for i in range(instance.n):
        y = cut_query(instance, i, prev, tau, ledger)
        knives.append(y)
        if y >= 1.0 and tau > 0.0:
            if eval_query(instance, i, prev, 1.0, ledger) < tau - 1e-9:
                feasible = False
        prev = y
    return MovingKnifeRun(tau, tuple(knives), feasible)


def max_egalitarian(instance: Instance, eta: float,
                    ledger: QueryLedger) -> tuple[Allocation, float]:
    """Allocation with egalitarian welfare >= optimum - eta.

    Binary search over target values {k*eta} using feasibility monotonicity:
    once a moving-knife run truncates, all larger targets truncate too.
    """
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta={eta} outside (0, 1)")
    kmax = math.ceil(1.0 / eta)

    def feasible(k: int) -> MovingKnifeRun | None:
        run = mk_chain(instance, k * eta, ledger)
        return run if run.feasible else None

    best = mk_chain(instance, 0.0, ledger)
    top = feasible(kmax)
    if top is not None:
        best, k0 = top, kmax
    else:
        lo, hi = 0, kmax  # feasible(lo) holds, feasible(hi) fails
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            run = feasible(mid)
            if run is not None:
                lo, best = mid, run
            else:
                hi = mid
        k0 = lo
    cuts = (0.0, *best.knives[:-1], 1.0)
    return Allocation(cuts), k0 * eta


def _nash_grid(instance: Instance, epsilon: float, ledger: QueryLedger) -> list[float]:
    """Adaptive grid: every cell is worth at most epsilon/(8n) to every agent."""
    step = epsilon / (8.0 * instance.n)
    points = [0.0]
    cap = math.ceil(8.0 * instance.n * instance.n / epsilon) + instance.n + 2
    while points[-1] < 1.0 and len(points) <= cap:
        nxt = min(cut_query(instance, i, points[-1], step, ledger)
                  for i in range(instance.n))
        if nxt <= points[-1] + MERGE_TOL:
            nxt = 1.0  # no agent has step mass left; close the grid
        points.append(min(nxt, 1.0))
    points[-1] = 1.0
    return points


def max_nash(instance: Instance, epsilon: float,
             ledger: QueryLedger) -> tuple[Allocation, float]:
    """Allocation with Nash social welfare at least (1 - epsilon) times the optimum."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon={epsilon} outside (0, 1)")
    if instance.n == 1:
        return Allocation((0.0, 1.0)), 1.0
    points = _nash_grid(instance, epsilon, ledger)
    prefix = _prefix_values(instance, points, ledger)
    table = _run_partition_dp(prefix, "product")
    nash_product = float(table.values[-1, -1])
    return _dp_allocation(points, table), nash_product ** (1.0 / instance.n)


def reorder_to_mlrp(instance: Instance, pieces, ledger: QueryLedger) -> list[tuple[float, float]]:
    """Repair an interval division into MLRP order without lowering any agent's value.

    ``pieces[i]`` is agent i's single interval; the pieces must tile [0, 1].
    Adjacent intervals assigned against the MLRP order are swapped about the
    point q' at which the right agent's normalized value matches the left
    agent's old share (one cut query per swap).  Leftmost violation first;
    this is a bubble sort of the positional agent sequence, so at most
    n(n-1)/2 swaps occur (a defensive n^2 pass cap reports non-termination).
    """
    assignment = []
    for agent, piece in enumerate(pieces):
        if isinstance(piece, (list, tuple)) and piece and isinstance(piece[0], (list, tuple)):
            if len(piece) != 1:
                raise UnsupportedFamilyError("reorder_to_mlrp needs one interval per agent")
            piece = piece[0]
        l, r = float(piece[0]), float(piece[1])
        if not 0.0 <= l <= r <= 1.0:
            raise DomainError(f"interval [{l}, {r}] outside the cake")
        assignment.append([l, r, agent])
    assignment.sort(key=lambda seg: (seg[0], seg[1]))
    for left, right in zip(assignment, assignment[1:]):
        if abs(left[1] - right[0]) > 1e-9:
            raise DomainError("pieces do not tile the cake")

    for _ in range(instance.n * instance.n):
        swapped = False
        for pos in range(len(assignment) - 1):
            p, q, j = assignment[pos]  # agent j currently holds the left interval
            _, r, i = assignment[pos + 1]  # agent i holds the right interval
            if j <= i or r - p <= 0.0:
                continue
            # agent i precedes j in MLRP order but sits to the right: swap about
            # the q' where j's normalized share matches i's current share.
            beta = eval_query(instance, i, q, r, ledger)
            total_i = eval_query(instance, i, p, r, ledger)
            total_j = eval_query(instance, j, p, r, ledger)
            share = 0.0 if total_i == 0.0 else beta / total_i
            q_prime = cut_query(instance, j, p, share * total_j, ledger)
            q_prime = min(max(q_prime, p), r)
            assignment[pos] = [p, q_prime, i]
            assignment[pos + 1] = [q_prime, r, j]
            swapped = True
            break
        if not swapped:
            out = [(0.0, 0.0)] * instance.n
            for l, r, agent in assignment:
                out[agent] = (l, r)
            return out
    raise RuntimeError("reorder_to_mlrp did not converge within n^2 passes")
