"""MLRP order detection, verification, and the MLRP-manufacturing perturbation.

Grid-based checks are falsifiers, not provers: monotonicity of a likelihood
ratio over a continuum cannot be decided from finitely many samples for
arbitrary families.  The binomial and Gaussian checks are exact analytic
criteria for those families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .density import Density, PiecewiseConstant
from .errors import DegenerateDensityError, DomainError, NotFullSupportError, OrderingError
from .oracle import Instance, QueryLedger, eval_query

DEFAULT_GRID = 4096
RATIO_SLACK = 1e-12


@dataclass(frozen=True)
class MlrpReport:
    """Outcome of verifying an instance's MLRP order."""

    order: tuple[int, ...]
    verified: tuple[bool, ...]  # one entry per adjacent pair in `order`
    grid_size: int
    violation: tuple[int, int, float, float] | None  # (i, j, x1, x2) first failure

    @property
    def all_verified(self) -> bool:
        return all(self.verified)


def detect_order(instance: Instance, ledger: QueryLedger) -> list[int]:
    """MLRP order of a promised-MLRP instance: sort by Eval_i(1/2, 1), stable ties.

    Uses exactly n eval queries.  On instances that do not actually satisfy
    MLRP the result is just a candidate order for downstream verification.
    """
    tail_values = [eval_query(instance, i, 0.5, 1.0, ledger) for i in range(instance.n)]
    return sorted(range(instance.n), key=lambda i: tail_values[i])


def check_pair_grid(f_i: Density, f_j: Density, m: int = DEFAULT_GRID,
                    slack: float = RATIO_SLACK) -> tuple[bool, tuple[float, float] | None]:
    """True iff f_j/f_i is nondecreasing on m uniform samples; else a witness pair.

    A zero f_i with positive f_j gives an infinite ratio, which participates in
    the comparison like any other value; 0/0 or a negative sample is an error.
    """
    if m < 2:
        raise DomainError(f"grid size m={m} must be at least 2")
    prev_ratio, prev_x = None, 0.0
    for k in range(m):
        x = k / (m - 1)
        num, den = f_j.value_at(x), f_i.value_at(x)
        if num < 0.0 or den < 0.0 or (num == 0.0 and den == 0.0):
            raise NotFullSupportError(f"degenerate density values at x={x}")
        ratio = math.inf if den == 0.0 else num / den
        if prev_ratio is not None and ratio < prev_ratio - slack:
            return False, (prev_x, x)
        if prev_ratio is None or ratio > prev_ratio:
            prev_ratio, prev_x = ratio, x
    return True, None


def check_binomial_pair(a_i: float, b_i: float, a_j: float, b_j: float,
                        s: int, t: int) -> bool:
    """Exact MLRP criterion for binomial polynomials: a_i*b_j - a_j*b_i <= 0."""
    if not s > t:
        raise DomainError(f"binomial exponents need s > t, got s={s}, t={t}")
    return a_i * b_j - a_j * b_i <= 0.0


def check_gaussian_pair(mu_i: float, mu_j: float, sigma: float) -> bool:
    """Exact MLRP criterion for same-variance Gaussians: mu_i <= mu_j."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return mu_i <= mu_j


def check_fosd(f_i: Density, f_j: Density, m: int = DEFAULT_GRID) -> bool:
    """f_j first-order stochastically dominates f_i on an m-point tail grid."""
    for k in range(m):
        t = k / (m - 1)
        if f_j.measure(t, 1.0) < f_i.measure(t, 1.0) - 1e-10:
            return False
    return True


def check_ratio_properties(f_i: Density, f_j: Density, interval_pairs) -> bool:
    """Check both interval-ratio consequences of MLRP on sampled interval pairs.

    ``interval_pairs`` holds ((a, b), (c, d)) with b <= c.  For each pair this
    verifies v_j(a,b)/v_i(a,b) <= v_j(c,d)/v_i(c,d), and on the hull [a, d]
    verifies the normalized-tail comparison v_i(x,d)/v_i(a,d) <= v_j(x,d)/v_j(a,d)
    at x in {b, c, (b+c)/2}.
    """
    for (a, b), (c, d) in interval_pairs:
        if not (a <= b <= c <= d):
            raise DomainError(f"interval pair ({a},{b}),({c},{d}) not ordered")
        vi_ab, vj_ab = f_i.measure(a, b), f_j.measure(a, b)
        vi_cd, vj_cd = f_i.measure(c, d), f_j.measure(c, d)
        if vi_ab > 0 and vi_cd > 0:
            if vj_ab / vi_ab > vj_cd / vi_cd + 1e-10:
                return False
        vi_ad, vj_ad = f_i.measure(a, d), f_j.measure(a, d)
        if vi_ad > 0 and vj_ad > 0:
            for x in (b, 0.5 * (b + c), c):
                if f_i.measure(x, d) / vi_ad > f_j.measure(x, d) / vj_ad + 1e-10:
                    return False
    return True


def verify_instance(instance: Instance, m: int = DEFAULT_GRID,
                    order: list[int] | None = None) -> MlrpReport:
    """Grid-verify every adjacent pair of the (given or identity) order."""
    order = list(range(instance.n)) if order is None else list(order)
    verified, violation = [], None
    for k in range(len(order) - 1):
        i, j = order[k], order[k + 1]
        ok, witness = check_pair_grid(instance.agents[i], instance.agents[j], m)
        verified.append(ok)
        if not ok and violation is None:
            violation = (i, j, witness[0], witness[1])
    return MlrpReport(tuple(order), tuple(verified), m, violation)


# -- structured perturbation (interval instances -> full-support MLRP) -------


@dataclass(frozen=True)
class IntervalInstance:
    """Each agent uniformly values a single interval [l_i, r_i] of the cake."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(l), float(r)) for l, r in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for l, r in ivs:
            if not (0.0 <= l < r <= 1.0):
                raise DegenerateDensityError(f"interval [{l}, {r}] empty or outside the cake")

    @property
    def n(self) -> int:
        return len(self.intervals)

    def sorted_order(self) -> list[int]:
        """Agents sorted by left endpoint (ties by right); raises if OP fails."""
        order = sorted(range(self.n), key=lambda i: self.intervals[i])
        rights = [self.intervals[i][1] for i in order]
        if any(rights[k] > rights[k + 1] for k in range(len(rights) - 1)):
            raise OrderingError("interval instance violates the ordering property (nested intervals)")
        return order

    def heights(self) -> list[float]:
        return [1.0 / (r - l) for l, r in self.intervals]

    def density(self, i: int) -> PiecewiseConstant:
        """Agent i's original (non-full-support) uniform-on-interval density."""
        l, r = self.intervals[i]
        brk = tuple(p for p in (l, r) if 0.0 < p < 1.0)
        h = 1.0 / (r - l)
        heights = tuple(h if l <= 0.5 * (lo + hi) <= r else 0.0
                        for lo, hi in zip((0.0, *brk), (*brk, 1.0)))
        return PiecewiseConstant(brk, heights)


def perturbation_height_factor(interval_instance: IntervalInstance, eta: float) -> float:
    """H = (2/eta) * max_i h_i, the scale-up factor of the perturbation."""
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta={eta} outside (0, 1)")
    return (2.0 / eta) * max(interval_instance.heights())


def perturbation_density(interval_instance: IntervalInstance, rank: int,
                         eta: float) -> PiecewiseConstant:
    """Raw (unnormalized) perturbed density of the rank-th agent in sorted order.

    Heights are h * H^(c(x) - (rank+1) - d(x)) where c counts left endpoints of
    agents up to this one that lie at or before x, and d counts right endpoints
    of agents from this one on.  On the agent's own interval the height equals
    h exactly; elsewhere it is at most h / H.
    """
    order = interval_instance.sorted_order()
    ivs = [interval_instance.intervals[i] for i in order]
    n = len(ivs)
    if not 0 <= rank < n:
        raise DomainError(f"rank {rank} out of range")
    big_h = perturbation_height_factor(interval_instance, eta)
    h = 1.0 / (ivs[rank][1] - ivs[rank][0])
    edges = sorted({p for iv in ivs for p in iv if 0.0 < p < 1.0})
    knots = [0.0, *edges, 1.0]
    heights = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        x = 0.5 * (lo + hi)
        c = sum(1 for k in range(rank + 1) if ivs[k][0] <= x)
        d = sum(1 for k in range(rank, n) if ivs[k][1] <= x)
        heights.append(h * big_h ** (c - (rank + 1) - d))
    return PiecewiseConstant(tuple(edges), tuple(heights))


def perturb(interval_instance: IntervalInstance, eta: float) -> Instance:
    """Full-support MLRP instance from an ordered interval instance.

    Agent k of the result corresponds to the k-th interval in left-endpoint
    order (``interval_instance.sorted_order()``), which is also the MLRP order
    of the perturbed densities.  Any eta-envy-free allocation of the result is
    2*eta-envy-free in the original interval instance.
    """
    n = interval_instance.n
    densities = [perturbation_density(interval_instance, k, eta) for k in range(n)]
    return Instance.from_densities(densities)
