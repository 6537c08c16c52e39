# Envy-free division via ripple binary search
#
# Three agents with same-variance Gaussian tastes peaked at different spots
# of the cake.  Same variance means the densities satisfy the monotone
# likelihood ratio property, so a ripple division (each agent indifferent
# between its own interval and the next one) is automatically envy-free.

import numpy as np

import fairslice as fs

instance = fs.Instance.from_densities([
    fs.GaussianRestricted(mu=0.2, sigma=0.25),
    fs.GaussianRestricted(mu=0.5, sigma=0.25),
    fs.GaussianRestricted(mu=0.8, sigma=0.25),
])
print("density bounds:", instance.bounds)

# The chain: fixing the first cut x, every later cut is forced by the
# indifference condition v_i(x_{i-1}, x_i) = v_i(x_i, x_{i+1}).
ledger = fs.QueryLedger()
for x in (0.1, 0.2, 0.3):
    chain = fs.rd_chain(instance, x, ledger)
    print(f"first cut {x:.2f} -> chain endpoint {chain[-1]:.4f}")

# Binary search drives the chain endpoint into [1 - delta, 1).
ledger = fs.QueryLedger()
allocation = fs.envy_free(instance, eta=1e-6, ledger=ledger)
print("\ncuts:", np.round(allocation.cuts, 6))
print("queries:", ledger.as_dict())

matrix = fs.envy_matrix(instance, allocation)
print("value matrix (rows = agents, columns = pieces):")
print(np.round(matrix.values, 6))
print("max envy:", matrix.max_envy)
assert matrix.max_envy <= 1e-6
