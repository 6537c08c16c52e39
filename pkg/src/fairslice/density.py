"""Analytic value densities on the cake [0, 1].

Every family stores its shape parameters plus a positive ``scale`` multiplier
and knows its exact antiderivative, so interval measures are closed-form
differences F(b) - F(a) rather than quadrature.  Inverse measures (the ground
truth behind cut queries) are closed-form wherever the antiderivative inverts
analytically and monotone bisection otherwise.

All densities are immutable; every operation is a pure function of its parameters.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from statistics import NormalDist

from .errors import (
    DegenerateDensityError,
    DomainError,
    NotFullSupportError,
    UnsupportedFamilyError,
)

#: Default value-scale tolerance for bisection-based inverse measures.
DEFAULT_CUT_TOL = 1e-12

#: Bisection iteration cap; 200 halvings resolve any workable magnitude range.
BISECT_MAX_ITER = 200

_SQRT2 = math.sqrt(2.0)


def _std_normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / _SQRT2))


def lipschitz_constant(lower: float, upper: float) -> float:
    """max{1/L, U, U/L} for densities bounded in [L, U]; inf when L == 0."""
    if lower < 0.0:
        raise NotFullSupportError(f"density lower bound {lower} is negative")
    if lower == 0.0:
        return math.inf
    return max(1.0 / lower, upper, upper / lower)


@dataclass(frozen=True)
class DensityBounds:
    """Pointwise density bounds L <= f(x) <= U and the induced query Lipschitz constant."""

    lower: float
    upper: float
    lipschitz: float

    @classmethod
    def from_range(cls, lower: float, upper: float) -> "DensityBounds":
        return cls(lower, upper, lipschitz_constant(lower, upper))


def _check_point(x: float, name: str = "x") -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name}={x} outside [0, 1]")


class Density:
    """Base class for analytic densities; subclasses are frozen dataclasses.

    Subclasses implement the unscaled shape via ``_density``/``_cumulative``
    (antiderivative from 0) and may override ``_inverse_unscaled`` with a
    closed form.  The public methods add the ``scale`` factor, domain checks
    and the cut-query truncation convention.
    """

    scale: float

    # -- family internals -------------------------------------------------

    def _density(self, x: float) -> float:
        raise NotImplementedError

    def _cumulative(self, x: float) -> float:
        raise NotImplementedError

    def _inverse_unscaled(self, l: float, target: float, tol: float) -> float:
        """Leftmost y >= l with cumulative(y) - cumulative(l) = target (no truncation)."""
        lo, hi = l, 1.0
        base = self._cumulative(l)
        for _ in range(BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            if self._cumulative(mid) - base < target:
                lo = mid
            else:
                hi = mid
            if self._cumulative(hi) - base - target <= tol and hi - lo <= 1e-16:
                break
        return hi

    def _range(self) -> tuple[float, float]:
        """(min, max) of the unscaled density over [0, 1]."""
        raise NotImplementedError

    # -- public operations -------------------------------------------------

    def value_at(self, x: float) -> float:
        """Pointwise density f(x)."""
        _check_point(x)
        return self.scale * self._density(x)

    def measure(self, a: float, b: float) -> float:
        """v([a, b]) = F(b) - F(a), exact per-family antiderivative."""
        _check_point(a, "a")
        _check_point(b, "b")
        if a > b:
            raise DomainError(f"reversed interval [{a}, {b}]")
        return self.scale * (self._cumulative(b) - self._cumulative(a))

    def inverse_measure(self, l: float, tau: float, tol: float = DEFAULT_CUT_TOL) -> float:
        """Smallest y in [l, 1] with measure(l, y) = tau; 1 if tau exceeds measure(l, 1)."""
        _check_point(l, "l")
        if tau < 0.0:
            raise DomainError(f"negative target value tau={tau}")
        if tau == 0.0:
            return l
        if self.measure(l, 1.0) < tau:
            return 1.0
        y = self._inverse_unscaled(l, tau / self.scale, tol / self.scale)
        return min(max(y, l), 1.0)

    def normalized(self) -> "Density":
        """Rescaled copy with total measure 1 over [0, 1]."""
        total = self.measure(0.0, 1.0)
        if total <= 0.0:
            raise DegenerateDensityError("density has nonpositive total measure")
        return replace(self, scale=self.scale / total)

    def bounds(self) -> DensityBounds:
        """Pointwise bounds over [0, 1]; lipschitz is inf when the density touches 0."""
        lo, hi = self._range()
        lo, hi = self.scale * lo, self.scale * hi
        if lo < 0.0 or hi <= 0.0:
            raise NotFullSupportError(f"density range [{lo}, {hi}] is not admissible")
        return DensityBounds.from_range(lo, hi)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        raise NotImplementedError


def _positive_scale(scale: float) -> None:
    if not scale > 0.0:
        raise DegenerateDensityError(f"scale must be positive, got {scale}")


@dataclass(frozen=True)
class Uniform(Density):
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)

    def _density(self, x):
        return 1.0

    def _cumulative(self, x):
        return x

    def _inverse_unscaled(self, l, target, tol):
        return l + target

    def _range(self):
        return 1.0, 1.0

    def to_dict(self):
        return {"family": "uniform", "scale": self.scale}


def _linear_root(half_slope: float, intercept: float, rhs: float, lo: float, hi: float) -> float:
    """Solve half_slope*y^2 + intercept*y = rhs for the root in [lo, hi]."""
    if half_slope == 0.0:
        return rhs / intercept
    disc = intercept * intercept + 4.0 * half_slope * rhs
    disc = math.sqrt(max(disc, 0.0))
    roots = ((-intercept + disc) / (2.0 * half_slope), (-intercept - disc) / (2.0 * half_slope))
    best, best_err = None, math.inf
    for r in roots:
        err = max(lo - r, r - hi, 0.0)
        if err < best_err:
            best, best_err = r, err
    return min(max(best, lo), hi)


@dataclass(frozen=True)
class Linear(Density):
    """f(x) = scale * (a*x + b); must be nonnegative on [0, 1]."""

    a: float
    b: float
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)
        if min(self.b, self.a + self.b) < 0.0:
            raise NotFullSupportError(f"linear density {self.a}*x+{self.b} negative on [0,1]")

    def _density(self, x):
        return self.a * x + self.b

    def _cumulative(self, x):
        return 0.5 * self.a * x * x + self.b * x

    def _inverse_unscaled(self, l, target, tol):
        return _linear_root(0.5 * self.a, self.b, target + self._cumulative(l), l, 1.0)

    def _range(self):
        ends = (self.b, self.a + self.b)
        return min(ends), max(ends)

    def to_dict(self):
        return {"family": "linear", "a": self.a, "b": self.b, "scale": self.scale}


@dataclass(frozen=True)
class BinomialPoly(Density):
    """f(x) = scale * (a*x^s + b*x^t) with integer exponents s > t >= 0."""

    a: float
    b: float
    s: int
    t: int
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)
        if not (isinstance(self.s, int) and isinstance(self.t, int) and self.s > self.t >= 0):
            raise DomainError(f"binomial exponents must be integers s > t >= 0, got s={self.s}, t={self.t}")
        if min(v for v, _ in self._candidates()) < 0.0:
            raise NotFullSupportError("binomial polynomial negative on [0,1]")

    def _candidates(self):
        pts = [0.0, 1.0]
        # interior stationary point of a*x^s + b*x^t, when it exists
        if self.a != 0.0 and self.t >= 1:
            ratio = -(self.b * self.t) / (self.a * self.s)
            if ratio > 0.0:
                x = ratio ** (1.0 / (self.s - self.t))
                if 0.0 < x < 1.0:
                    pts.append(x)
        return [(self._density(x), x) for x in pts]

    def _density(self, x):
        return self.a * x**self.s + self.b * x**self.t

    def _cumulative(self, x):
        return self.a * x ** (self.s + 1) / (self.s + 1) + self.b * x ** (self.t + 1) / (self.t + 1)

    def _range(self):
        vals = [v for v, _ in self._candidates()]
        return min(vals), max(vals)

    def to_dict(self):
        return {"family": "binomial_poly", "a": self.a, "b": self.b, "s": self.s, "t": self.t, "scale": self.scale}


def _check_breakpoints(breakpoints: tuple[float, ...]) -> None:
    prev = 0.0
    for p in breakpoints:
        if not 0.0 < p < 1.0:
            raise DomainError(f"breakpoint {p} outside (0, 1)")
        if p <= prev:
            raise DegenerateDensityError(f"breakpoints not strictly increasing at {p}")
        prev = p


@dataclass(frozen=True)
class PiecewiseLinear(Density):
    """Piecewise linear density: segment j is slope[j]*x + intercept[j] on [knot_j, knot_{j+1}].

    Knots are (0, *breakpoints, 1).  Segments need not join continuously and may
    touch zero, but no segment may be negative anywhere.
    """

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)
        object.__setattr__(self, "breakpoints", tuple(float(p) for p in self.breakpoints))
        object.__setattr__(self, "slopes", tuple(float(s) for s in self.slopes))
        object.__setattr__(self, "intercepts", tuple(float(c) for c in self.intercepts))
        _check_breakpoints(self.breakpoints)
        if len(self.slopes) != len(self.breakpoints) + 1 or len(self.slopes) != len(self.intercepts):
            raise DomainError("need exactly len(breakpoints)+1 segments")
        for s, c, lo, hi in zip(self.slopes, self.intercepts, self._knots[:-1], self._knots[1:]):
            if min(s * lo + c, s * hi + c) < -1e-15:
                raise NotFullSupportError(f"segment {s}*x+{c} negative on [{lo}, {hi}]")

    @property
    def _knots(self) -> tuple[float, ...]:
        return (0.0, *self.breakpoints, 1.0)

    @cached_property
    def _cum(self) -> tuple[float, ...]:
        acc, out = 0.0, [0.0]
        for s, c, lo, hi in zip(self.slopes, self.intercepts, self._knots[:-1], self._knots[1:]):
            acc += 0.5 * s * (hi * hi - lo * lo) + c * (hi - lo)
            out.append(acc)
        return tuple(out)

    def _segment(self, x: float) -> int:
        return min(bisect_right(self._knots, x) - 1, len(self.slopes) - 1)

    def _density(self, x):
        j = self._segment(x)
        return self.slopes[j] * x + self.intercepts[j]

    def _cumulative(self, x):
        j = self._segment(x)
        lo = self._knots[j]
        return self._cum[j] + 0.5 * self.slopes[j] * (x * x - lo * lo) + self.intercepts[j] * (x - lo)

    def _inverse_unscaled(self, l, target, tol):
        goal = self._cumulative(l) + target
        knots = self._knots
        for j in range(self._segment(l), len(self.slopes)):
            start = max(knots[j], l)
            f_start = self._cumulative(start)
            if goal <= f_start:
                return start  # leftmost point: mass already reached at segment start
            if goal <= self._cum[j + 1] or j == len(self.slopes) - 1:
                rhs = goal - f_start + 0.5 * self.slopes[j] * start * start + self.intercepts[j] * start
                return _linear_root(0.5 * self.slopes[j], self.intercepts[j], rhs, start, knots[j + 1])
        return 1.0

    def _range(self):
        vals = []
        for s, c, lo, hi in zip(self.slopes, self.intercepts, self._knots[:-1], self._knots[1:]):
            vals += [s * lo + c, s * hi + c]
        return max(min(vals), 0.0), max(vals)

    def to_dict(self):
        return {
            "family": "piecewise_linear",
            "breakpoints": list(self.breakpoints),
            "segments": [{"slope": s, "intercept": c} for s, c in zip(self.slopes, self.intercepts)],
            "scale": self.scale,
        }


@dataclass(frozen=True)
class PiecewiseConstant(Density):
    """Step density: heights[j] on [knot_j, knot_{j+1}] with knots (0, *breakpoints, 1)."""

    breakpoints: tuple[float, ...]
    heights: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)
        object.__setattr__(self, "breakpoints", tuple(float(p) for p in self.breakpoints))
        object.__setattr__(self, "heights", tuple(float(h) for h in self.heights))
        _check_breakpoints(self.breakpoints)
        if len(self.heights) != len(self.breakpoints) + 1:
            raise DomainError("need exactly len(breakpoints)+1 heights")
        if min(self.heights) < 0.0:
            raise NotFullSupportError("negative step height")

    @property
    def _knots(self) -> tuple[float, ...]:
        return (0.0, *self.breakpoints, 1.0)

    @cached_property
    def _cum(self) -> tuple[float, ...]:
        acc, out = 0.0, [0.0]
        for h, lo, hi in zip(self.heights, self._knots[:-1], self._knots[1:]):
            acc += h * (hi - lo)
            out.append(acc)
        return tuple(out)

    def _segment(self, x: float) -> int:
        return min(bisect_right(self._knots, x) - 1, len(self.heights) - 1)

    def _density(self, x):
        return self.heights[self._segment(x)]

    def _cumulative(self, x):
        j = self._segment(x)
        return self._cum[j] + self.heights[j] * (x - self._knots[j])

    def _inverse_unscaled(self, l, target, tol):
        goal = self._cumulative(l) + target
        knots = self._knots
        for j in range(self._segment(l), len(self.heights)):
            start = max(knots[j], l)
            f_start = self._cumulative(start)
            if goal <= f_start:
                return start
            if goal <= self._cum[j + 1] or j == len(self.heights) - 1:
                if self.heights[j] == 0.0:
                    return knots[j + 1]
                return start + (goal - f_start) / self.heights[j]
        return 1.0

    def _range(self):
        return min(self.heights), max(self.heights)

    def to_dict(self):
        return {
            "family": "piecewise_constant",
            "breakpoints": list(self.breakpoints),
            "heights": list(self.heights),
            "scale": self.scale,
        }


@dataclass(frozen=True)
class GaussianRestricted(Density):
    """Gaussian bell with mean mu and deviation sigma, restricted to [0, 1]."""

    mu: float
    sigma: float
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def _density(self, x):
        z = (x - self.mu) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def _cumulative(self, x):
        return _std_normal_cdf((x - self.mu) / self.sigma)

    def _inverse_unscaled(self, l, target, tol):
        p = self._cumulative(l) + target
        hi = self._cumulative(1.0)
        if p >= hi:
            return 1.0
        return NormalDist(self.mu, self.sigma).inv_cdf(p)

    def _range(self):
        far = 0.0 if abs(self.mu - 0.0) >= abs(self.mu - 1.0) else 1.0
        near = min(max(self.mu, 0.0), 1.0)
        return self._density(far), self._density(near)

    def to_dict(self):
        return {"family": "gaussian_restricted", "mu": self.mu, "sigma": self.sigma, "scale": self.scale}


@dataclass(frozen=True)
class ExponentialRestricted(Density):
    """f(x) = scale * rate * exp(-rate*x) on [0, 1], rate > 0."""

    rate: float
    scale: float = 1.0

    def __post_init__(self):
        _positive_scale(self.scale)
        if not self.rate > 0.0:
            raise DomainError(f"rate must be positive, got {self.rate}")

    def _density(self, x):
        return self.rate * math.exp(-self.rate * x)

    def _cumulative(self, x):
        return 1.0 - math.exp(-self.rate * x)

    def _inverse_unscaled(self, l, target, tol):
        arg = math.exp(-self.rate * l) - target
        if arg <= math.exp(-self.rate):
            return 1.0
        return -math.log(arg) / self.rate

    def _range(self):
        return self._density(1.0), self._density(0.0)

    def to_dict(self):
        return {"family": "exponential_restricted", "rate": self.rate, "scale": self.scale}


# -- module-level functional aliases (the operation surface) ----------------


def value_at(spec: Density, x: float) -> float:
    return spec.value_at(x)


def measure(spec: Density, a: float, b: float) -> float:
    return spec.measure(a, b)


def inverse_measure(spec: Density, l: float, tau: float, tol: float = DEFAULT_CUT_TOL) -> float:
    return spec.inverse_measure(l, tau, tol)


def normalize(spec: Density) -> Density:
    return spec.normalized()


def bounds(spec: Density) -> DensityBounds:
    return spec.bounds()


# -- conversion helpers ------------------------------------------------------


def as_piecewise_linear(spec: Density) -> PiecewiseLinear:
    """Represent a uniform/linear/piecewise density as PiecewiseLinear."""
    if isinstance(spec, PiecewiseLinear):
        return spec
    if isinstance(spec, Uniform):
        return PiecewiseLinear((), (0.0,), (1.0,), scale=spec.scale)
    if isinstance(spec, Linear):
        return PiecewiseLinear((), (spec.a,), (spec.b,), scale=spec.scale)
    if isinstance(spec, PiecewiseConstant):
        return PiecewiseLinear(
            spec.breakpoints,
            tuple(0.0 for _ in spec.heights),
            spec.heights,
            scale=spec.scale,
        )
    raise UnsupportedFamilyError(f"{type(spec).__name__} is not piecewise linear")


def restrict_unit(spec: PiecewiseLinear, a: float, b: float) -> PiecewiseLinear:
    """Reparametrize spec's restriction to [a, b] onto the unit cake.

    The result g satisfies g(y) = f(a + y*(b-a)) * (b-a), so the measure of
    [p, q] under g equals the measure of the mapped subinterval under f.
    """
    if not 0.0 <= a < b <= 1.0:
        raise DomainError(f"invalid restriction window [{a}, {b}]")
    w = b - a
    kept: list[tuple[float, float]] = []  # (original knot, mapped knot)
    for t in spec.breakpoints:
        if a < t < b:
            y = (t - a) / w
            if 0.0 < y < 1.0 and (not kept or y > kept[-1][1]):
                kept.append((t, y))
    edges = [a, *(t for t, _ in kept), b]
    slopes, intercepts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        j = spec._segment(0.5 * (lo + hi))
        s, c = spec.slopes[j], spec.intercepts[j]
        slopes.append(s * w * w)
        intercepts.append((s * a + c) * w)
    new_brk = tuple(y for _, y in kept)
    return PiecewiseLinear(new_brk, tuple(slopes), tuple(intercepts), scale=spec.scale)


# -- JSON schema -------------------------------------------------------------


def _num(v) -> float:
    """JSON number or exact-rational string like '1/3', evaluated to float once."""
    if isinstance(v, str):
        return float(Fraction(v))
    return float(v)


def density_from_dict(d: dict) -> Density:
    """Parse the per-family JSON schema into a density."""
    try:
        family = d["family"]
    except (TypeError, KeyError):
        raise DomainError("density object missing 'family'") from None
    scale = _num(d.get("scale", 1.0))
    if family == "uniform":
        return Uniform(scale=scale)
    if family == "linear":
        return Linear(_num(d["a"]), _num(d["b"]), scale=scale)
    if family == "binomial_poly":
        return BinomialPoly(_num(d["a"]), _num(d["b"]), int(d["s"]), int(d["t"]), scale=scale)
    if family == "piecewise_linear":
        segs = d["segments"]
        return PiecewiseLinear(
            tuple(_num(p) for p in d["breakpoints"]),
            tuple(_num(s["slope"]) for s in segs),
            tuple(_num(s["intercept"]) for s in segs),
            scale=scale,
        )
    if family == "piecewise_constant":
        return PiecewiseConstant(
            tuple(_num(p) for p in d["breakpoints"]),
            tuple(_num(h) for h in d["heights"]),
            scale=scale,
        )
    if family == "gaussian_restricted":
        return GaussianRestricted(_num(d["mu"]), _num(d["sigma"]), scale=scale)
    if family == "exponential_restricted":
        return ExponentialRestricted(_num(d["rate"]), scale=scale)
    raise UnsupportedFamilyError(f"unknown density family {family!r}")
