"""Acceptance criteria, one test per criterion.

Each test prints (through the ``_report`` hook, shown in the terminal
summary) a single PASS/FAIL line.  Reference setting throughout: Monod with
``mu_max = 1``, ``K = 0.5``, ``s_in = 10``, ``Q = 1``.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from _oracles import (REFERENCE_GROWTH as MONOD, REFERENCE_Q as Q, REFERENCE_S_IN as S_IN,
                      damped_newton, grid_oracle_min_volume, interior_root_count,
                      random_config, random_growth)
from _report import criterion
from lateral_chemostat import dmap
from lateral_chemostat._numerics import golden_min
from lateral_chemostat.design import (DesignSpec, Kind, design_fixed_d, design_free_d,
                                      volume_curve, volume_opt)
from lateral_chemostat.dynamics import ChemostatConfig, simulate_many
from lateral_chemostat.equilibria import (positive_equilibrium, steady_state_substrates,
                                          washout_equilibrium, washout_is_unique,
                                          washout_polynomial)
from lateral_chemostat.growth import beta, beta_prime, g, s_hat


def test_criterion_1_s_hat():
    with criterion(1, "s_hat = 1.79 +- 0.01 for Monod(1, 0.5), s_in = 10"):
        value = s_hat(MONOD, S_IN)
        timings = []
        for _ in range(50):
            t0 = time.perf_counter()
            s_hat(MONOD, S_IN)
            timings.append(time.perf_counter() - t0)
        assert abs(value - 1.79) <= 0.01, value
        assert np.median(timings) < 1e-3


def _kind(s_ref, d=1.0):
    return design_fixed_d(DesignSpec(Q, S_IN, s_ref, MONOD), d).kind


def test_criterion_2_transition_point():
    target = 0.5 * (S_IN + s_hat(MONOD, S_IN))
    with criterion(2, "fixed d = Q: TwoTanks -> SingleLateralTank at (s_in + s_hat)/2 +- 0.01",
                   budget=1.0):
        lo, hi = 2.5, 9.5
        assert _kind(lo) is Kind.TWO_TANKS and _kind(hi) is Kind.SINGLE_LATERAL_TANK
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            if _kind(mid) is Kind.TWO_TANKS:
                lo = mid
            else:
                hi = mid
        switch = 0.5 * (lo + hi)
        assert abs(switch - target) <= 0.01, (
            f"switch found at s_ref={switch:.6f}, expected {target:.6f}")


def test_criterion_3_volume_halving(reference_spec):
    with criterion(3, "free d at s_ref = 5.9: ratio in [0.50, 0.65], grid oracle within 1%",
                   budget=30.0):
        res = design_free_d(reference_spec)
        ratio = res.total_volume / res.baseline_volume
        assert 0.50 <= ratio <= 0.65, ratio
        oracle = grid_oracle_min_volume(MONOD, Q, S_IN, 5.9, res.d, res.baseline_volume)
        assert math.isfinite(oracle)
        assert abs(oracle - res.total_volume) <= 0.01 * res.total_volume, (oracle, res.total_volume)


def _newton_seeds(rng, s_in, n=50):
    uniform = rng.uniform(0.0, s_in, size=(n // 2, 2))
    logs = s_in * np.exp(rng.uniform(math.log(1e-7), 0.0, size=(n - n // 2, 2)))
    return np.vstack([uniform, logs])


def test_criterion_4_equilibrium_vs_newton():
    rng = np.random.default_rng(4)
    with criterion(4, "bisection E* vs damped Newton (1e-8) and flow identity (1e-10), 50 configs",
                   budget=5.0):
        for k in range(50):
            cfg = random_config(rng, case=("I", "II", "III")[k % 3])
            eq = positive_equilibrium(cfg)
            assert eq is not None, cfg
            roots = [r for r in (damped_newton(cfg, s) for s in _newton_seeds(rng, cfg.s_in))
                     if r is not None and 0 < r[1] < r[0] < cfg.s_in * (1 - 1e-9)]
            assert roots, f"Newton found no interior root for {cfg}"
            for r in roots:
                assert abs(r[0] - eq.s1) <= 1e-8 and abs(r[1] - eq.s2) <= 1e-8, (cfg, r, eq)
            mu = cfg.growth.mu
            lhs = (cfg.V1 * mu(eq.s1) - cfg.Q) * (cfg.s_in - eq.s1)
            rhs = -cfg.V2 * mu(eq.s2) * (cfg.s_in - eq.s2)
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs), (cfg, lhs, rhs)


def _with_margin(cfg, eq, lo=30.0, hi=2e5):
    T = 1e3 * cfg.V / cfg.Q
    rates = -eq.eigenvalues.real
    return T if (rates.min() * T >= lo and rates.max() * T <= hi) else None


def _draw_positive(rng):
    while True:
        cfg = random_config(rng)
        cfg = cfg.with_d(min(cfg.d, 3.0 * cfg.Q))
        eq = positive_equilibrium(cfg)
        if eq is not None and (T := _with_margin(cfg, eq)):
            return cfg, eq, T


def _draw_washout(rng):
    while True:
        cfg = random_config(rng, case="I")
        X = cfg.growth.mu(cfg.s_in)
        d_bar = cfg.V2 * X * (cfg.Q - cfg.V1 * X) / (cfg.Q - cfg.V * X)
        cfg = cfg.with_d(d_bar * rng.uniform(1.05, 3.0))
        eq = washout_equilibrium(cfg)
        if washout_is_unique(cfg) and (T := _with_margin(cfg, eq)):
            return cfg, eq, T


def _random_initials(rng, cfg, n=100):
    return rng.uniform(0.0, 1.0, size=(n, 4)) * np.array(
        [2 * cfg.s_in, cfg.s_in, 2 * cfg.s_in, cfg.s_in])


def test_criterion_5_stability_by_simulation():
    rng = np.random.default_rng(5)
    with criterion(5, "20 E* configs x 100 starts -> E*, 20 washout configs -> E0, within 1e-4",
                   budget=120.0):
        for draw in (_draw_positive, _draw_washout):
            for _ in range(20):
                cfg, eq, T = draw(rng)
                final = simulate_many(cfg, _random_initials(rng, cfg), T)
                err = np.max(np.abs(final - np.array(eq.state, float)))
                assert err <= 1e-4, (cfg, eq.kind, err)


def test_criterion_6_derivative_check():
    rng = np.random.default_rng(6)
    with criterion(6, "Gamma-formula ds1*/dd vs central differences (1e-4 rel), sign rule, 100 points",
                   budget=5.0):
        for _ in range(100):
            cfg = random_config(rng)
            eq = positive_equilibrium(cfg)
            ds1, _ = dmap.ds_dd(cfg, eq)
            h = 1e-5 * cfg.d
            fd = (dmap.s_star(cfg, cfg.d + h)[0] - dmap.s_star(cfg, cfg.d - h)[0]) / (2 * h)
            assert abs(ds1 - fd) <= 1e-4 * abs(ds1), (cfg, ds1, fd)
            assert np.sign(ds1) == -np.sign(beta_prime(cfg.growth, eq.s2, cfg.s_in)), cfg


def test_criterion_7_shape_suite():
    with criterion(7, "sweep shapes: (i) min < s_in, (ii) min < s1*_inf, (iii) decreasing > s1*_inf",
                   budget=10.0):
        # (i): mu(s_in) < Q/V
        p = dmap.sweep(ChemostatConfig(0.4, 0.4, Q, S_IN, 1.0, MONOD))
        d, s1, s2, _ = p.arrays()
        k = int(np.argmin(s1))
        assert p.shape == "i" and math.isfinite(p.d_bar)
        assert 0 < k < len(d) - 1 and s1[k] < S_IN and d[-1] < p.d_bar
        assert d[k - 1] <= p.d_star <= d[k + 1]
        # (ii): s1*_inf above s_hat
        p = dmap.sweep(ChemostatConfig(0.6, 0.55, Q, S_IN, 1.0, MONOD))
        d, s1, s2, _ = p.arrays()
        k = int(np.argmin(s1))
        assert p.shape == "ii"
        assert 0 < k < len(d) - 1 and s1[k] < p.s1_star_inf
        # (iii): s1*_inf below s_hat
        p = dmap.sweep(ChemostatConfig(1.5, 2.0, Q, S_IN, 1.0, MONOD))
        d, s1, s2, _ = p.arrays()
        assert p.shape == "iii" and p.d_star == math.inf
        assert np.all(np.diff(s1) < 0) and np.all(s1 > p.s1_star_inf)


@pytest.mark.parametrize("s_ref", [3.0, 5.9, 8.0])
def test_criterion_8_volume_curve(s_ref):
    with criterion(8, "V_opt(d) decreasing then increasing, minimiser within 1e-6 of d*",
                   budget=10.0 / 3):
        spec = DesignSpec(Q, S_IN, s_ref, MONOD)
        d_star = Q * (S_IN - s_ref) / (s_ref - s_hat(MONOD, S_IN))
        grid = np.geomspace(1e-3, 1e3, 601)
        curve = volume_curve(spec, grid)
        k = int(np.argmin(curve.volume))
        assert 0 < k < len(grid) - 1
        assert np.all(np.diff(curve.volume[:k + 1]) <= 0)
        assert np.all(np.diff(curve.volume[k:]) >= 0)
        u = golden_min(lambda u: volume_opt(spec, math.exp(u)),
                       math.log(grid[k - 1]), math.log(grid[k + 1]), 1e-12)
        assert abs(math.exp(u) - d_star) <= 1e-6 * d_star, (math.exp(u), d_star)


# --- criterion 9: property suites, 1000 cases each -------------------------------

def _beta_concavity(rng):
    for _ in range(1000):
        growth, s_in = random_growth(rng), float(rng.uniform(0.5, 30.0))
        a, b, c = np.sort(rng.uniform(0.0, s_in, 3))
        if b - a < 1e-9 * s_in or c - b < 1e-9 * s_in:
            continue
        left = (beta(growth, b, s_in) - beta(growth, a, s_in)) / (b - a)
        right = (beta(growth, c, s_in) - beta(growth, b, s_in)) / (c - b)
        assert left >= right - 1e-12 * abs(left), (growth, s_in, a, b, c)


def _g_convexity(rng):
    for _ in range(1000):
        growth, s_in = random_growth(rng), float(rng.uniform(0.5, 30.0))
        a, b = rng.uniform(0.01 * s_in, 0.99 * s_in, 2)
        if abs(a - b) < 1e-6 * s_in:
            continue
        mid = g(growth, 0.5 * (a + b), s_in)
        assert mid < 0.5 * (g(growth, a, s_in) + g(growth, b, s_in)), (growth, s_in, a, b)


def _s2_monotone(rng):
    # 20 growth laws x 50 (V1, V2, d < d') draws, solved in lock step
    for _ in range(20):
        base = random_config(rng, case="III")
        X = base.growth.mu(base.s_in)
        V1 = base.Q / X * rng.uniform(0.1, 3.0, 50)
        V2 = base.Q / X * rng.uniform(0.1, 3.0, 50)
        V = V1 + V2
        d_bar = np.where(X < base.Q / V,
                         V2 * X * (base.Q - V1 * X) / np.where(X < base.Q / V, base.Q - V * X, 1.0),
                         np.inf)
        top = np.minimum(d_bar, 50.0 * base.Q)
        d_a = top * rng.uniform(0.01, 0.98, 50)
        d_b = d_a + (top - d_a) * rng.uniform(0.01, 0.99, 50)
        _, s2_a = steady_state_substrates(base.growth, V1, V2, base.Q, base.s_in, d_a)
        _, s2_b = steady_state_substrates(base.growth, V1, V2, base.Q, base.s_in, d_b)
        assert not np.any(np.isnan(s2_a) | np.isnan(s2_b))
        assert np.all(s2_b > s2_a - 1e-12 * base.s_in)


def _nonnegativity(rng):
    # 10 configs x 100 starts, every output time checked by the undershoot policy
    for _ in range(10):
        cfg = random_config(rng)
        cfg = cfg.with_d(min(cfg.d, 3.0 * cfg.Q))
        starts = _random_initials(rng, cfg)
        starts[::4, 1] = 0.0  # biomass-free tank 1 in a quarter of the runs
        starts[1::4, 3] = 0.0
        T = 50.0 * cfg.V / cfg.Q
        states = simulate_many(cfg, starts, T, t_eval=np.linspace(0.0, T, 200))
        assert np.all(states >= 0.0)


def _washout_agreement(rng):
    # alternate broad draws with case-I draws whose d straddles d_bar, so that
    # both verdicts are well represented
    checked = washout_only = 0
    while checked < 1000:
        if checked % 2:
            cfg = random_config(rng, case="I")
            X = cfg.growth.mu(cfg.s_in)
            d_bar = cfg.V2 * X * (cfg.Q - cfg.V1 * X) / (cfg.Q - cfg.V * X)
            cfg = cfg.with_d(d_bar * math.exp(rng.uniform(math.log(0.3), math.log(3.0))))
        else:
            growth = random_growth(rng)
            s_in, flow = float(rng.uniform(1.0, 20.0)), float(rng.uniform(0.5, 2.0))
            X = growth.mu(s_in)
            V1, V2 = flow / X * rng.uniform(0.1, 3.0, 2)
            d = flow * math.exp(rng.uniform(math.log(0.01), math.log(30.0)))
            cfg = ChemostatConfig(float(V1), float(V2), flow, s_in, d, growth)
        X = cfg.growth.mu(cfg.s_in)
        scale = cfg.V1 * cfg.V2 * X * X + (cfg.d * cfg.V1 + (cfg.Q + cfg.d) * cfg.V2) * X + cfg.d * cfg.Q
        if abs(washout_polynomial(cfg)) < 1e-6 * scale:
            continue
        roots = interior_root_count(cfg)
        assert roots <= 1, cfg
        assert washout_is_unique(cfg) == (roots == 0), cfg
        assert (positive_equilibrium(cfg) is None) == (roots == 0), cfg
        checked += 1
        washout_only += roots == 0
    assert washout_only >= 150, washout_only


PROPERTIES = {
    "beta concavity": _beta_concavity,
    "g convexity": _g_convexity,
    "s2*(d) increasing": _s2_monotone,
    "trajectory nonnegativity": _nonnegativity,
    "washout condition <-> existence": _washout_agreement,
}


def test_criterion_9_property_suites():
    rng = np.random.default_rng(9)
    with criterion(9, "property suites (1000 cases each): " + ", ".join(PROPERTIES), budget=60.0):
        for name, check in PROPERTIES.items():
            check(rng)
