# Irrational cuts and the limits of contiguity
#
# Two fixtures with rational inputs whose exact fair cuts are irrational
# (so any finite-precision algorithm must approximate), plus a two-step
# instance that admits a perfect division only with disconnected pieces.

import math

import numpy as np

import fairslice as fs

# Two identical agents with f(x) = x + 1/2: the unique envy-free cut is the
# inverse golden ratio (sqrt(5) - 1) / 2.
pair = fs.Instance.from_densities([fs.Linear(1.0, 0.5)] * 2)
alloc = fs.envy_free(pair, eta=1e-6, ledger=fs.QueryLedger())
golden = (math.sqrt(5.0) - 1.0) / 2.0
print(f"computed cut {alloc.cuts[1]:.9f}  vs (sqrt5-1)/2 = {golden:.9f}")

# Three identical agents with a value spike near the right end (width 1/10):
# the second equal-thirds cut is 1 - (3 - sqrt 5)/20, again irrational.
lam = 10.0
spike = fs.PiecewiseLinear(
    (1.0 - 1.0 / lam,),
    (0.0, 2.0 * lam * lam / 3.0),
    (lam / (3.0 * (lam - 1.0)), lam - 2.0 * lam * lam / 3.0),
)
trio = fs.Instance.from_densities([spike] * 3)
alloc = fs.envy_free(trio, eta=1e-6, ledger=fs.QueryLedger())
target = 1.0 - (3.0 - math.sqrt(5.0)) / (2.0 * lam)
print(f"spike instance second cut {alloc.cuts[2]:.9f}  vs {target:.9f}")

# Perfect divisions (everyone values every piece at exactly 1/n): the
# two-step pair below has one with two cuts, but none with a single cut.
alpha = 0.4
f1 = fs.PiecewiseConstant((1.0 - alpha,), (1.0 + alpha, alpha))
f2 = fs.PiecewiseConstant((1.0 - alpha,), (1.0 - alpha, 2.0 - alpha))
steps = fs.Instance.from_densities([f1, f2], normalize=False)

lo, hi = 0.5 - alpha / 2.0, 1.0 - alpha / 2.0
d_star = [[(lo, hi)], [(0.0, lo), (hi, 1.0)]]
print("\ntwo-cut division is perfect:", fs.is_perfect(steps, d_star, 1e-9))

devs = [max(abs(f1.measure(0.0, c) - 0.5), abs(f2.measure(0.0, c) - 0.5))
        for c in np.linspace(0.0, 1.0, 10_001)]
print(f"best single-cut deviation from perfection: {min(devs):.3f} (never below 1e-3)")
