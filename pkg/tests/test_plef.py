import math

import numpy as np
import pytest

from fairslice import (
    GaussianRestricted,
    Instance,
    Linear,
    PiecewiseLinear,
    QueryLedger,
    Uniform,
    envy_matrix,
    pl_config,
    pl_ef,
)
from fairslice.errors import ParameterRegimeError, UnsupportedFamilyError
from gen import piecewise_linear_instance


class TestPlConfig:
    def test_derived_fields(self):
        cfg = pl_config(1e-3, 4, 2.0)
        assert cfg.eta_hat == pytest.approx((1e-3 / 4) ** 2 / 2.0)
        assert cfg.lambda_pl == pytest.approx(max(2.0, 2.0 / cfg.eta_hat, 1.0 / cfg.eta_hat))
        assert cfg.delta == pytest.approx(cfg.eta_hat / cfg.lambda_pl)
        assert cfg.b_levels == pytest.approx(2.0 * math.log2(4 * 2.0 / cfg.eta_hat))
        assert cfg.min_length == pytest.approx((1e-3) ** 2 / (16 * 4.0))
        assert cfg.cap >= 1

    def test_parameter_regime_gate(self):
        with pytest.raises(ParameterRegimeError):
            pl_config(0.9, 1, 1.0)  # kU/eta = 1.11 < 4


class TestPlEf:
    def test_all_linear_single_node(self):
        inst = Instance.from_densities([Linear(1.0, 0.5), Linear(-0.5, 1.25), Uniform()])
        led = QueryLedger()
        division, stats = pl_ef(inst, 1e-3, led)
        assert stats.node_count == 1
        assert stats.recursed_halves == 0
        assert envy_matrix(inst, division).max_envy <= 1e-3

    def test_shared_breakpoint_two_agents(self):
        tent = PiecewiseLinear((0.5,), (2.0, -2.0), (0.25, 2.25))
        vee = PiecewiseLinear((0.5,), (-2.0, 2.0), (1.75, -0.25))
        inst = Instance.from_densities([tent, vee])
        led = QueryLedger()
        division, stats = pl_ef(inst, 1e-3, led)
        cfg = pl_config(1e-3, 2, inst.bounds.upper)
        assert envy_matrix(inst, division).max_envy <= 1e-3
        assert stats.node_count <= cfg.k * (cfg.b_levels + 1)

    def test_random_instance_bounds(self):
        rng = np.random.default_rng(61)
        inst = piecewise_linear_instance(3, 4, rng)
        eta = 1e-3
        led = QueryLedger()
        division, stats = pl_ef(inst, eta, led)
        assert envy_matrix(inst, division).max_envy <= eta
        cfg = pl_config(eta, 4, inst.bounds.upper)
        assert stats.node_count <= cfg.k * (cfg.b_levels + 1)
        assert division.max_pieces() <= 2 * cfg.k * (cfg.b_levels + 1)

    def test_division_covers_cake(self):
        rng = np.random.default_rng(67)
        inst = piecewise_linear_instance(2, 3, rng)
        division, _ = pl_ef(inst, 1e-3, QueryLedger())
        pieces = sorted(iv for plist in division.pieces for iv in plist)
        assert pieces[0][0] == pytest.approx(0.0, abs=1e-12)
        assert pieces[-1][1] == pytest.approx(1.0, abs=1e-12)
        for (_, r1), (l2, _) in zip(pieces, pieces[1:]):
            assert l2 == pytest.approx(r1, abs=1e-9)

    def test_unsupported_family(self):
        inst = Instance.from_densities([GaussianRestricted(0.5, 0.2), Uniform()])
        with pytest.raises(UnsupportedFamilyError):
            pl_ef(inst, 1e-3, QueryLedger())

    def test_parameter_regime_error(self):
        inst = Instance.from_densities([Uniform(), Uniform()])
        with pytest.raises(ParameterRegimeError):
            pl_ef(inst, 0.5, QueryLedger())

    def test_identical_agents_with_jump(self):
        # discontinuous density with a steep right spike, shared by both agents
        lam = 10.0
        d = PiecewiseLinear(
            (1.0 - 1.0 / lam,),
            (0.0, 2.0 * lam * lam / 3.0),
            (lam / (3.0 * (lam - 1.0)), lam - 2.0 * lam * lam / 3.0),
        )
        inst = Instance.from_densities([d, d])
        division, stats = pl_ef(inst, 1e-2, QueryLedger())
        assert envy_matrix(inst, division).max_envy <= 1e-2
