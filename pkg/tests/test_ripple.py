import math

import numpy as np
import pytest

from fairslice import (
    Allocation,
    GaussianRestricted,
    Instance,
    Linear,
    PiecewiseLinear,
    QueryLedger,
    Uniform,
    bin_search,
    envy_free,
    envy_matrix,
    iteration_cap,
    rd_chain,
    ripple_to_allocation,
)
from fairslice.errors import DomainError, NotFullSupportError
from fairslice.ripple import RippleDivision
from gen import mlrp_instance

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def right_spike_instance(lam=10.0):
    d = PiecewiseLinear(
        (1.0 - 1.0 / lam,),
        (0.0, 2.0 * lam * lam / 3.0),
        (lam / (3.0 * (lam - 1.0)), lam - 2.0 * lam * lam / 3.0),
    )
    return Instance.from_densities([d, d, d])


class TestRdChain:
    def test_zero_maps_to_zeros(self):
        inst = Instance.from_densities([Uniform()] * 3)
        assert rd_chain(inst, 0.0, QueryLedger()) == [0.0, 0.0]

    def test_one_maps_to_ones(self):
        inst = Instance.from_densities([Uniform()] * 3)
        assert rd_chain(inst, 1.0, QueryLedger()) == [1.0, 1.0]

    def test_two_uniform(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        led = QueryLedger()
        assert rd_chain(inst, 0.4, led) == [pytest.approx(0.8, abs=1e-12)]
        assert led.eval_count == 1 and led.cut_count == 1

    def test_query_cost_per_chain(self):
        inst = Instance.from_densities([Uniform()] * 5)
        led = QueryLedger()
        rd_chain(inst, 0.17, led)
        assert led.eval_count == 4 and led.cut_count == 4

    def test_equal_value_equalities(self):
        rng = np.random.default_rng(2)
        inst = mlrp_instance(4, rng)
        led = QueryLedger()
        chain = rd_chain(inst, 0.2, led)
        xs = [0.0, 0.2, *chain]
        for i in range(3):
            left = inst.agents[i].measure(xs[i], xs[i + 1])
            right = inst.agents[i].measure(xs[i + 1], xs[i + 2])
            assert left == pytest.approx(right, abs=1e-9)


class TestBinSearch:
    def test_two_uniform(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        led = QueryLedger()
        rd = bin_search(inst, 1e-6, led)
        assert rd.cuts[1] == pytest.approx(0.5, abs=1e-6)
        assert rd.cuts[2] >= 1.0 - 1e-6

    def test_three_uniform(self):
        inst = Instance.from_densities([Uniform()] * 3)
        rd = bin_search(inst, 1e-6, QueryLedger())
        assert rd.cuts[1] == pytest.approx(1.0 / 3.0, abs=1e-6)
        assert rd.cuts[2] == pytest.approx(2.0 / 3.0, abs=1e-6)
        assert rd.cuts[3] >= 1.0 - 1e-6

    def test_identical_linear_golden_cut(self):
        inst = Instance.from_densities([Linear(1.0, 0.5), Linear(1.0, 0.5)])
        rd = bin_search(inst, 1e-6, QueryLedger())
        assert rd.cuts[1] == pytest.approx(GOLDEN, abs=1e-5)

    def test_invariants_of_result(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            inst = mlrp_instance(int(rng.integers(2, 6)), rng)
            delta = 10.0 ** -float(rng.integers(4, 8))
            led = QueryLedger()
            rd = bin_search(inst, delta, led)
            assert rd.cuts[-1] >= 1.0 - delta
            tol = max(1e-9, 2.0 * inst.cut_tol)
            for i in range(inst.n - 1):
                a = inst.agents[i].measure(rd.cuts[i], rd.cuts[i + 1])
                b = inst.agents[i].measure(rd.cuts[i + 1], rd.cuts[i + 2])
                assert a == pytest.approx(b, abs=tol)
                assert a > 0.0
            # query accounting: <= 2n * iterations + 2n
            assert led.total() <= 2 * inst.n * rd.iterations_used + 2 * inst.n

    def test_iteration_bound(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            inst = mlrp_instance(int(rng.integers(2, 6)), rng)
            delta = 1e-6
            rd = bin_search(inst, delta, QueryLedger())
            assert rd.iterations_used <= iteration_cap(inst.n, inst.bounds.lipschitz, delta)

    def test_max_iterations_failure_signal(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        assert bin_search(inst, 1e-9, QueryLedger(), max_iterations=2) is None

    def test_immediate_hit_returns_first_midpoint(self):
        # chain endpoint from the very first midpoint already lands in
        # [1 - delta, 1): return right away
        inst = Instance.from_densities([Linear(1.0, 0.5), Linear(1.0, 0.5)])
        led = QueryLedger()
        endpoint = rd_chain(inst, 0.5, QueryLedger())[-1]
        assert 1.0 - 0.2 <= endpoint < 1.0
        rd = bin_search(inst, 0.2, led)
        assert rd.iterations_used == 1
        assert rd.cuts[1] == 0.5

    def test_delta_domain(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        with pytest.raises(DomainError):
            bin_search(inst, 0.0, QueryLedger())
        with pytest.raises(DomainError):
            bin_search(inst, 1.5, QueryLedger())

    def test_infinite_lambda_rejected(self):
        from fairslice import BinomialPoly

        inst = Instance.from_densities([Uniform(), BinomialPoly(3.0, 0.0, 2, 0)])
        with pytest.raises(NotFullSupportError):
            bin_search(inst, 1e-6, QueryLedger())

    def test_rd_chain_lipschitz_invariant(self):
        # composed-chain bound lambda^{2(n-1)}; valid once lambda >= 3
        rng = np.random.default_rng(21)
        checked = 0
        while checked < 5:
            inst = mlrp_instance(3, rng)
            lam = inst.bounds.lipschitz
            if lam < 3.0 or lam ** 4 > 1e8:
                continue
            led = QueryLedger()
            for _ in range(50):
                x1, x2 = rng.uniform(0.0, 1.0, 2)
                c1 = rd_chain(inst, float(x1), led)[-1]
                c2 = rd_chain(inst, float(x2), led)[-1]
                assert abs(c1 - c2) <= lam ** 4 * abs(x1 - x2) + 1e-6
            checked += 1


class TestRippleToAllocation:
    def test_exact_thirds(self):
        rd = RippleDivision((0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0), 0.0, 0)
        alloc = ripple_to_allocation(rd)
        assert alloc.cuts == (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)

    def test_tail_coalesced(self):
        rd = RippleDivision((0.0, 0.4, 0.8, 1.0 - 1e-7), 1e-6, 3)
        alloc = ripple_to_allocation(rd)
        assert alloc.cuts[-1] == 1.0
        assert alloc.cuts[:-1] == (0.0, 0.4, 0.8)

    def test_right_spike_second_cut(self):
        inst = right_spike_instance(10.0)
        led = QueryLedger()
        alloc = envy_free(inst, 1e-6, led)
        assert alloc.cuts[2] == pytest.approx(1.0 - (3.0 - math.sqrt(5.0)) / 20.0, abs=1e-5)


class TestEnvyFree:
    def test_two_uniform(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        alloc = envy_free(inst, 1e-6, QueryLedger())
        assert alloc.cuts[1] == pytest.approx(0.5, abs=1e-6)
        assert envy_matrix(inst, alloc).max_envy <= 1e-6

    def test_three_gaussians(self):
        inst = Instance.from_densities(
            [GaussianRestricted(m, 0.25) for m in (0.2, 0.5, 0.8)])
        alloc = envy_free(inst, 1e-6, QueryLedger())
        assert envy_matrix(inst, alloc).max_envy <= 1e-6

    def test_identical_linear_golden(self):
        inst = Instance.from_densities([Linear(1.0, 0.5), Linear(1.0, 0.5)])
        alloc = envy_free(inst, 1e-6, QueryLedger())
        assert alloc.cuts[1] == pytest.approx(GOLDEN, abs=1e-5)

    def test_single_agent(self):
        inst = Instance.from_densities([Uniform()])
        alloc = envy_free(inst, 1e-6, QueryLedger())
        assert alloc.cuts == (0.0, 1.0)

    def test_monotone_envy_structure(self):
        # for each agent i on the ripple division's own intervals:
        # v_i(I_1) <= ... <= v_i(I_i) >= ... >= v_i(I_n)
        rng = np.random.default_rng(19)
        for _ in range(8):
            inst = mlrp_instance(int(rng.integers(2, 6)), rng)
            rd = bin_search(inst, 1e-7, QueryLedger())
            pieces = [[(rd.cuts[i], rd.cuts[i + 1])] for i in range(inst.n)]
            values = envy_matrix(inst, pieces).values
            for i in range(inst.n):
                row = values[i]
                for j in range(i):
                    assert row[j] <= row[j + 1] + 1e-9
                for j in range(i, inst.n - 1):
                    assert row[j] >= row[j + 1] - 1e-9

    def test_eta_domain(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        with pytest.raises(DomainError):
            envy_free(inst, 0.0, QueryLedger())


def test_allocation_validation():
    with pytest.raises(DomainError):
        Allocation((0.0, 0.6, 0.5, 1.0))
    with pytest.raises(DomainError):
        Allocation((0.1, 1.0))
    a = Allocation((0.0, 0.25, 1.0))
    assert a.intervals() == [(0.0, 0.25), (0.25, 1.0)]
    assert a.piece_lists() == [[(0.0, 0.25)], [(0.25, 1.0)]]
