"""Robertson-Webb query layer: per-agent Eval and Cut over an instance.

Algorithms access agents' valuations exclusively through :func:`eval_query`
and :func:`cut_query`, each of which increments the run's :class:`QueryLedger`
so that query-complexity bounds are testable.  The audit module is the only
place allowed to bypass this layer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .density import DEFAULT_CUT_TOL, Density, DensityBounds, lipschitz_constant
from .errors import DomainError

__all__ = ["Instance", "QueryLedger", "eval_query", "cut_query"]


@dataclass
class QueryLedger:
    """Counters of cut/eval queries issued against the oracle."""

    eval_count: int = 0
    cut_count: int = 0

    def total(self) -> int:
        return self.eval_count + self.cut_count

    def as_dict(self) -> dict:
        return {"eval": self.eval_count, "cut": self.cut_count}


@dataclass(frozen=True)
class Instance:
    """A cake-division instance: normalized densities in MLRP index order.

    ``bounds`` aggregates the per-agent density bounds (L = min over agents,
    U = max over agents) and carries the induced query Lipschitz constant
    max{1/L, U, U/L} — infinite when some density touches zero.
    """

    agents: tuple[Density, ...]
    bounds: DensityBounds
    cut_tol: float = DEFAULT_CUT_TOL

    @property
    def n(self) -> int:
        return len(self.agents)

    @classmethod
    def from_densities(cls, densities, normalize: bool = True,
                       cut_tol: float = DEFAULT_CUT_TOL) -> "Instance":
        specs = tuple(d.normalized() if normalize else d for d in densities)
        if not specs:
            raise DomainError("an instance needs at least one agent")
        per_agent = [d.bounds() for d in specs]
        lower = min(b.lower for b in per_agent)
        upper = max(b.upper for b in per_agent)
        return cls(specs, DensityBounds(lower, upper, lipschitz_constant(lower, upper)), cut_tol)

    def reordered(self, order) -> "Instance":
        """Same instance with agents permuted (order[k] = original index of rank k)."""
        if sorted(order) != list(range(self.n)):
            raise DomainError(f"{order} is not a permutation of 0..{self.n - 1}")
        return Instance(tuple(self.agents[i] for i in order), self.bounds, self.cut_tol)


def _check_agent(instance: Instance, i: int) -> None:
    if not 0 <= i < instance.n:
        raise DomainError(f"agent index {i} out of range for n={instance.n}")


def eval_query(instance: Instance, i: int, l: float, r: float, ledger: QueryLedger) -> float:
    """Eval_i(l, r) = v_i([l, r]); one ledger tick."""
    _check_agent(instance, i)
    ledger.eval_count += 1
    return instance.agents[i].measure(l, r)


def cut_query(instance: Instance, i: int, l: float, tau: float, ledger: QueryLedger) -> float:
    """Cut_i(l, tau): leftmost y with v_i(l, y) = tau, truncated to 1; one ledger tick."""
    _check_agent(instance, i)
    ledger.cut_count += 1
    return instance.agents[i].inverse_measure(l, tau, instance.cut_tol)
