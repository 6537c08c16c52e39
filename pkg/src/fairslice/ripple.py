"""Ripple divisions: the cut/eval chain, binary search, and envy-free allocation.

A delta-ripple division is a set of cut points 0 = x_0 <= x_1 <= ... <= x_n
with x_n >= 1 - delta in which every agent i < n values its interval
[x_{i-1}, x_i] and the next interval [x_i, x_{i+1}] equally (and positively).
Under MLRP such a division induces an envy-free partial allocation; coalescing
the unassigned tail onto the last agent costs at most lambda * delta envy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NotFullSupportError, SearchFailedError
from .oracle import Instance, QueryLedger, cut_query, eval_query

#: Floating-point threshold below 1 at which the chain endpoint counts as "equals 1".
ONE_THRESHOLD = 1.0 - 1e-15


@dataclass(frozen=True)
class RippleDivision:
    cuts: tuple[float, ...]  # x_0 = 0, x_1, ..., x_n
    delta: float
    iterations_used: int


@dataclass(frozen=True)
class Allocation:
    """Contiguous allocation: agent i gets [cuts[i], cuts[i+1]]."""

    cuts: tuple[float, ...]

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cuts)
        object.__setattr__(self, "cuts", cuts)
        if len(cuts) < 2 or cuts[0] != 0.0 or cuts[-1] != 1.0:
            raise DomainError("allocation cuts must start at 0 and end at 1")
        if any(a > b for a, b in zip(cuts, cuts[1:])):
            raise DomainError("allocation cuts must be nondecreasing")

    @property
    def n(self) -> int:
        return len(self.cuts) - 1

    def interval(self, i: int) -> tuple[float, float]:
        return self.cuts[i], self.cuts[i + 1]

    def intervals(self) -> list[tuple[float, float]]:
        return [self.interval(i) for i in range(self.n)]

    def piece_lists(self) -> list[list[tuple[float, float]]]:
        """One-piece-per-agent view for division-level interfaces."""
        return [[iv] for iv in self.intervals()]


def rd_chain(instance: Instance, x: float, ledger: QueryLedger) -> list[float]:
    """Chain points x_2, ..., x_n from first cut x_1 = x (n-1 cuts, n-1 evals).

    x_2 = Cut_1(x, Eval_1(0, x)); thereafter x_{i+1} makes agent i indifferent
    between [x_{i-1}, x_i] and [x_i, x_{i+1}].  Truncation at 1 propagates.
    """
    xs = [0.0, x]
    for agent in range(instance.n - 1):
        target = eval_query(instance, agent, xs[-2], xs[-1], ledger)
        xs.append(cut_query(instance, agent, xs[-1], target, ledger))
    return xs[2:]


def iteration_cap(n: int, lam: float, delta: float) -> int:
    """BinSearch convergence bound: ceil(2(n-1) log2(2*lambda/delta))."""
    if n <= 1:
        return 0
    return math.ceil(2 * (n - 1) * math.log2(2.0 * lam / delta))


def bin_search(instance: Instance, delta: float, ledger: QueryLedger,
               max_iterations: int | None = None) -> RippleDivision | None:
    """Find a delta-ripple division by bisecting on the first cut point.

    Maintains RD_n(l) < 1 - delta and RD_n(r) = 1 and stops at the first
    midpoint whose chain endpoint lands in [1 - delta, 1).  Endpoint values
    >= 1 - 1e-15 are treated as "equals 1" (floating-point convention).

    Returns None if ``max_iterations`` is supplied and exhausted (PL-EF's
    recursion gate); without an explicit cap the theoretical bound
    2(n-1) log2(2*lambda/delta) is used and exhausting it raises.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta={delta} outside (0, 1)")
    n = instance.n
    if n == 1:
        return RippleDivision((0.0, 1.0 - 0.5 * delta), delta, 0)
    if max_iterations is None:
        lam = instance.bounds.lipschitz
        if not math.isfinite(lam):
            raise NotFullSupportError(
                "instance Lipschitz constant is infinite; bin_search needs a density lower bound")
        cap = iteration_cap(n, lam, delta)
    else:
        cap = max_iterations

    left, right = 0.0, 1.0
    for it in range(1, cap + 1):
        mid = 0.5 * (left + right)
        if mid <= left or mid >= right:
            break  # float resolution exhausted
        chain = rd_chain(instance, mid, ledger)
        endpoint = chain[-1]
        if endpoint < 1.0 - delta:
            left = mid
        elif endpoint >= ONE_THRESHOLD:
            right = mid
        else:
            return RippleDivision((0.0, mid, *chain), delta, it)
    if max_iterations is not None:
        return None
    raise SearchFailedError(
        f"bin_search exhausted {cap} iterations without hitting [1-delta, 1)")


def ripple_to_allocation(rd: RippleDivision) -> Allocation:
    """Coalesce the unassigned tail [x_n, 1] onto agent n."""
    return Allocation((*rd.cuts[:-1], 1.0))


def envy_free(instance: Instance, eta: float, ledger: QueryLedger) -> Allocation:
    """Allocation with v_i(I_i) >= v_i(I_j) - eta for all i, j (MLRP instance).

    Runs bin_search at delta = eta / lambda and coalesces the tail; the tail's
    value to any agent is then at most lambda * delta = eta.
    """
    if not eta > 0.0:
        raise DomainError(f"eta={eta} must be positive")
    lam = instance.bounds.lipschitz
    if not math.isfinite(lam):
        raise NotFullSupportError(
            "instance Lipschitz constant is infinite; envy_free needs a density lower bound")
    # The coalesced tail costs each agent at most U * delta, so flooring delta
    # at 1e-13 keeps the eta guarantee whenever U <= eta * 1e13 while staying
    # clear of float resolution near 1.
    delta = min(max(eta / lam, 1e-13), 0.5)
    rd = bin_search(instance, delta, ledger)
    return ripple_to_allocation(rd)
