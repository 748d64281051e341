import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import grid_oracle_min_volume
from lateral_chemostat.design import (G, H, DesignSpec, Kind, alpha, default_d_grid,
                                      design_fixed_d, design_free_d, optimal_diffusion,
                                      s_bar_ref, s_G, single_tank_volume, v1, v2, volume_curve,
                                      volume_opt)
from lateral_chemostat.equilibria import positive_equilibrium
from lateral_chemostat.errors import ConfigError, UndefinedCaseError
from lateral_chemostat.growth import Monod, g, g_prime, s_hat

M = Monod(1.0, 0.5)
S_HAT = s_hat(M, 10.0)


def spec(s_ref=5.9, d=1.0, Q=1.0):
    return DesignSpec(Q, 10.0, s_ref, M, d)


def test_baseline_volume():
    sp = spec()
    assert single_tank_volume(sp) == pytest.approx(1.0847, abs=1e-4)
    assert single_tank_volume(sp) == pytest.approx(
        sp.Q * g(M, 5.9, 10.0) * (10.0 - 5.9), rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(s_ref=0.0), dict(s_ref=10.0), dict(Q=0.0), dict(d=-1)])
def test_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        spec(**kwargs)


class TestAlpha:
    def test_reference(self):
        assert alpha(spec()) == pytest.approx(1.8)

    def test_clamped_at_zero(self):
        assert alpha(spec(d=0.1)) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.5, 9.5), st.floats(1e-3, 1e3))
    def test_below_s_ref(self, s_ref, d):
        assert 0 <= alpha(spec(s_ref, d)) < s_ref

    def test_volumes_vanish_at_the_ends(self):
        sp = spec()
        a = alpha(sp)
        assert v1(sp, 1.0, a) == pytest.approx(0.0, abs=1e-12)
        assert v2(sp, 1.0, sp.s_ref) == 0.0


class TestSG:
    sp = spec(s_ref=8.0)

    def test_stationary_point_of_G(self):
        sg = s_G(self.sp)
        assert g_prime(M, sg, 10.0) == pytest.approx(H(self.sp, sg), rel=1e-9)
        h = 1e-5
        assert (G(self.sp, sg + h) - G(self.sp, sg - h)) / (2 * h) == pytest.approx(0, abs=1e-6)

    def test_location(self):
        sg = s_G(self.sp)
        lo = s_bar_ref(self.sp)
        assert g(M, lo, 10.0) == pytest.approx(g(M, 8.0, 10.0), rel=1e-10)
        assert lo < sg < S_HAT

    def test_grid_argmin(self):
        s = np.linspace(1e-3, 8.0 - 1e-3, 100_000)
        k = int(np.argmin(G(self.sp, s)))
        assert s_G(self.sp) == pytest.approx(s[k], abs=2 * (s[1] - s[0]))
        assert G(self.sp, s_G(self.sp)) < 0

    def test_undefined_below_s_hat(self):
        with pytest.raises(UndefinedCaseError):
            s_G(spec(s_ref=1.0))


class TestFixedD:
    def test_one_tank_when_s_ref_is_low(self):
        res = design_fixed_d(spec(s_ref=1.5))
        assert res.kind is Kind.SINGLE_MIXED_TANK
        assert res.V2 == 0 and res.V1 == pytest.approx(res.baseline_volume)

    def test_zero_diffusion(self):
        res = design_fixed_d(spec(d=0.0))
        assert res.kind is Kind.SINGLE_MIXED_TANK and res.alpha is None

    def test_two_tanks_beat_one(self):
        res = design_fixed_d(spec(s_ref=8.0, d=0.1))
        assert res.kind is Kind.TWO_TANKS
        assert res.s2_opt == pytest.approx(s_G(spec(s_ref=8.0)))
        assert res.total_volume < res.baseline_volume

    def test_lateral_tank_alone(self):
        res = design_fixed_d(spec(s_ref=5.9))
        assert res.kind is Kind.SINGLE_LATERAL_TANK
        assert res.V1 == 0 and res.s2_opt == pytest.approx(1.8)

    @pytest.mark.parametrize("s_ref, d", [(8.0, 1.0), (5.9, 1.0), (7.0, 0.3), (9.0, 20.0)])
    def test_volume_split(self, s_ref, d):
        sp = spec(s_ref, d)
        res = design_fixed_d(sp)
        expected = sp.Q / M.mu(s_ref) + d * G(sp, res.s2_opt)
        assert res.total_volume == pytest.approx(expected, rel=1e-12)
        assert res.total_volume <= res.baseline_volume * (1 + 1e-12)

    @pytest.mark.parametrize("s_ref, d", [(8.0, 1.0), (5.9, 1.0), (7.0, 0.3), (9.0, 20.0),
                                          (6.5, 3.0)])
    def test_design_reaches_s_ref(self, s_ref, d):
        sp = spec(s_ref, d)
        res = design_fixed_d(sp)
        eq = positive_equilibrium(res.config(sp))
        assert eq.s1 == pytest.approx(s_ref, abs=1e-8 * sp.s_in)
        assert eq.s2 == pytest.approx(res.s2_opt, abs=1e-8 * sp.s_in)

    @pytest.mark.parametrize("s_ref", [3.0, 8.0])
    def test_no_grid_point_does_better(self, s_ref):
        sp = spec(s_ref)
        res = design_fixed_d(sp)
        best = grid_oracle_min_volume(M, 1.0, 10.0, s_ref, 1.0, res.baseline_volume)
        assert res.total_volume <= best * (1 + 1e-9)

    def test_improvement_iff_G_negative(self):
        for s_ref in np.linspace(0.5, 9.5, 19):
            for d in (0.1, 1.0, 10.0):
                sp = spec(float(s_ref), d)
                res = design_fixed_d(sp)
                improves = res.total_volume < res.baseline_volume * (1 - 1e-12)
                assert improves == (G(sp, res.s2_opt) < 0)

    def test_shape_switch_location(self):
        """Scan s_ref at d = 1 for the first value that drops the first tank."""
        grid = np.linspace(5.0, 6.5, 1501)
        kinds = [design_fixed_d(spec(float(s))).kind for s in grid]
        first = next(i for i, k in enumerate(kinds) if k is Kind.SINGLE_LATERAL_TANK)
        assert all(k is Kind.TWO_TANKS for k in kinds[:first])
        assert all(k is Kind.SINGLE_LATERAL_TANK for k in kinds[first:])
        assert grid[first] == pytest.approx(5.6103, abs=2e-3)

    def test_alpha_meets_s_hat_at_the_midpoint(self):
        mid = 0.5 * (10.0 + S_HAT)
        assert alpha(spec(mid)) == pytest.approx(S_HAT, rel=1e-12)


class TestFreeD:
    def test_reference(self):
        res = design_free_d(spec(d=None))
        assert res.kind is Kind.SINGLE_LATERAL_TANK
        assert res.V1 == 0.0
        assert res.V2 == pytest.approx(0.639, abs=1e-3)
        assert res.total_volume / res.baseline_volume == pytest.approx(0.59, abs=5e-3)
        assert res.s2_opt == S_HAT

    def test_any_d_when_s_ref_low(self):
        res = design_free_d(spec(s_ref=1.0, d=None))
        assert res.d_any and optimal_diffusion(spec(s_ref=1.0)) is None

    def test_d_star_equals_Q_at_midpoint(self):
        mid = 0.5 * (10.0 + S_HAT)
        assert optimal_diffusion(spec(mid, d=None)) == pytest.approx(1.0, rel=1e-12)
        assert optimal_diffusion(spec(5.8956, d=None)) == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("s_ref", [3.0, 5.9, 8.0])
    def test_dominates_fixed_designs(self, s_ref):
        free = design_free_d(spec(s_ref, d=None))
        for d in np.geomspace(1e-3, 1e3, 121):
            assert free.total_volume <= volume_opt(spec(s_ref), float(d)) * (1 + 1e-12)

    def test_realised_by_a_chemostat(self):
        sp = spec(d=None)
        res = design_free_d(sp)
        eq = positive_equilibrium(res.config(sp))
        assert eq.s1 == pytest.approx(5.9, abs=1e-8 * 10)
        assert eq.s2 == pytest.approx(S_HAT, abs=1e-8 * 10)


class TestVolumeCurve:
    def test_end_behaviour(self):
        sp = spec(s_ref=8.0)
        curve = volume_curve(sp, [0.0, 1e-9, 1.0])
        assert curve.volume[0] == pytest.approx(single_tank_volume(sp))
        assert curve.volume[1] == pytest.approx(curve.volume[0], rel=1e-8)

    def test_continuous_at_d_star(self):
        sp = spec(s_ref=8.0)
        d_opt = optimal_diffusion(sp)
        left, right = volume_opt(sp, d_opt * (1 - 1e-9)), volume_opt(sp, d_opt * (1 + 1e-9))
        assert left == pytest.approx(right, rel=1e-7)
        assert volume_opt(sp, d_opt) == pytest.approx(design_free_d(sp).total_volume, rel=1e-9)

    def test_parallel_and_csv(self):
        sp = spec()
        grid = default_d_grid(sp, n=9)
        serial = volume_curve(sp, grid)
        parallel = volume_curve(sp, grid, jobs=2)
        np.testing.assert_array_equal(serial.volume, parallel.volume)
        buf = io.StringIO(newline="")
        serial.to_csv(buf)
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ["d", "V_opt", "kind"] and len(rows) == 10
        assert float(rows[5][0]) == grid[4] and float(rows[5][1]) == serial.volume[4]
        assert math.isclose(grid[4], optimal_diffusion(sp), rel_tol=1e-12)

    def test_report(self):
        out = design_free_d(spec(d=None)).to_dict(Q=1.0)
        assert out["kind"] == "SingleLateralTank"
        assert out["residence_time"] == out["total_volume"]
        assert set(out) >= {"V1", "V2", "d", "alpha", "s_G", "baseline_volume"}
