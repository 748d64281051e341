"""How the positive steady state moves with the diffusion rate ``d``.

For fixed volumes and flow, three regimes are distinguished by the removal
rate ``D = Q / V`` of the fully mixed volume ``V = V1 + V2``:

* case ``I``   ``mu(s_in) < Q/V``: ``E*`` exists only for ``0 < d < d_bar``;
* case ``II``  ``Q/V <= mu(s_in) <= Q/V1``: ``E*`` exists for every ``d > 0``;
* case ``III`` ``mu(s_in) > Q/V1``: ``E*`` exists for every ``d >= 0``.

``s2*(d)`` is always increasing, while ``s1*(d)`` falls as long as
``s2*(d) < s_hat`` and rises afterwards, so its minimiser ``d_star`` solves
``s2*(d) = s_hat``.  In cases II/III ``s2*`` climbs towards
``s1*(inf) = mu^{-1}(Q/V)``, hence an interior minimum exists only when
``s1*(inf) > s_hat``; when ``s1*(inf) <= s_hat`` the map decreases for all
``d`` and ``d_star`` is reported as ``math.inf``.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import enum
import math

import numpy as np

from ._numerics import bisect
from .equilibria import phi1_prime, positive_equilibrium, steady_state_substrates
from .errors import ConfigError, InconsistencyError
from .growth import beta_prime, s_hat

D_RTOL = 1e-12
NEAR_D_BAR = 0.999
DERIV_SINGULAR = 1e-14
MAX_EXPAND = 200


class Case(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"


def _check_two_tanks(config):
    if not (config.V1 > 0 and config.V2 > 0):
        raise ConfigError("the diffusion map needs V1 > 0 and V2 > 0")


def classify_case(config):
    _check_two_tanks(config)
    X = config.growth.mu(config.s_in)
    if X < config.Q / config.V:
        return Case.I
    if X <= config.Q / config.V1:
        return Case.II
    return Case.III


def d_bar(config):
    """Largest diffusion rate sustaining ``E*`` in case I (``inf`` otherwise)."""
    if classify_case(config) is not Case.I:
        return math.inf
    X = config.growth.mu(config.s_in)
    Q, V1 = config.Q, config.V1
    return config.V2 * X * (Q - V1 * X) / (Q - config.V * X)


@dataclass(frozen=True)
class ExistenceRange:
    case: Case
    d_min: float
    d_max: float
    includes_zero: bool

    def __contains__(self, d):
        if d == 0:
            return self.includes_zero
        return self.d_min < d < self.d_max


def existence_range(config):
    """Diffusion rates for which the positive equilibrium exists."""
    case = classify_case(config)
    return ExistenceRange(case, 0.0, d_bar(config), case is Case.III)


def limits(config):
    """``(s1*(0+), s1*(inf))`` as closed forms, ``None`` where undefined.

    ``s1*(0+) = mu^{-1}(Q/V1)`` requires ``mu(s_in) > Q/V1`` (otherwise the
    limit is ``s_in``, reported as ``None``); ``s1*(inf) = mu^{-1}(Q/V)``
    requires ``mu(s_in) >= Q/V``.
    """
    _check_two_tanks(config)
    g, Q = config.growth, config.Q
    X = g.mu(config.s_in)
    s0 = g.mu_inverse(Q / config.V1) if X > Q / config.V1 else None
    if X > Q / config.V:
        s_inf = g.mu_inverse(Q / config.V)
    elif X == Q / config.V:
        s_inf = config.s_in
    else:
        s_inf = None
    return s0, s_inf


def s_star(config, d):
    """``(s1*(d), s2*(d))`` or ``None`` outside the existence range."""
    _check_two_tanks(config)
    if d == 0:
        eq = positive_equilibrium(config.with_d(0.0))
        return None if eq is None else (eq.s1, 0.0)
    s1, s2 = steady_state_substrates(config.growth, config.V1, config.V2,
                                     config.Q, config.s_in, d)
    if math.isnan(s1):
        return None
    return s1, s2


def ds_dd(config, eq=None):
    """Sensitivities ``(ds1*/dd, ds2*/dd)`` of the positive equilibrium.

    Obtained by differentiating the steady-state balances in ``d``::

        [A + d   -d    ] [ds1]               [1]
        [  d   -(B + d)] [ds2] = (s2 - s1) * [1]

    with ``A = d (phi1'(s1) - 1)`` and ``B = V2 beta'(s2)``.
    """
    _check_two_tanks(config)
    d = config.d
    if d <= 0:
        raise ConfigError("ds_dd needs d > 0")
    if eq is None:
        eq = positive_equilibrium(config)
        if eq is None:
            raise ConfigError(f"no positive equilibrium at d={d}")
    s1, s2 = eq.s1, eq.s2
    A = d * (phi1_prime(config, s1) - 1)
    B = config.V2 * beta_prime(config.growth, s2, config.s_in)
    det = -(A + d) * (B + d) + d * d
    if abs(det) < DERIV_SINGULAR * max(d * d, abs(A + d) * abs(B + d)):
        raise InconsistencyError(f"singular sensitivity system at d={d}")
    return (s2 - s1) * (-B) / det, (s2 - s1) * A / det


def find_d_star(config):
    """Diffusion rate minimising ``s1*(d)``.

    Returns ``math.inf`` when ``s1*`` decreases for every ``d`` (its
    infimum ``mu^{-1}(Q/V)`` is approached as ``d -> inf``).
    """
    case = classify_case(config)
    target = s_hat(config.growth, config.s_in)
    if case is not Case.I and limits(config)[1] <= target:
        return math.inf
    top = d_bar(config)

    def s2_of(d):
        if d >= top:
            return config.s_in
        sol = s_star(config, d)
        return config.s_in if sol is None else sol[1]

    # expand/contract geometrically from d = Q until s2* straddles s_hat
    d_lo = d_hi = min(config.Q, 0.5 * top)
    for _ in range(MAX_EXPAND):
        if s2_of(d_lo) < target:
            break
        d_lo *= 0.5
    for _ in range(MAX_EXPAND):
        if s2_of(d_hi) > target:
            break
        d_hi = min(2.0 * d_hi, 0.5 * (d_hi + top)) if math.isfinite(top) else 2.0 * d_hi
    if not s2_of(d_lo) < target < s2_of(d_hi):
        raise InconsistencyError("could not bracket s2*(d) = s_hat")
    if d_lo == d_hi:
        d_lo = 0.5 * d_hi
    # bisect in log d for a relative tolerance
    u = bisect(lambda u: s2_of(math.exp(u)) - target, math.log(d_lo), math.log(d_hi),
               D_RTOL, increasing=True)
    return math.exp(u)


def monotonicity_case(config):
    """Shape of ``d -> s1*(d)``.

    ``"i"``: case I, minimum below ``s_in`` inside ``(0, d_bar)``;
    ``"ii"``: minimum strictly below ``s1*(inf)`` (needs ``s1*(inf) > s_hat``);
    ``"iii"``: decreasing and above ``s1*(inf)`` (``s1*(inf) <= s_hat``).
    """
    if classify_case(config) is Case.I:
        return "i"
    return "ii" if limits(config)[1] > s_hat(config.growth, config.s_in) else "iii"


@dataclass(frozen=True)
class DiffusionSample:
    d: float
    s1_star: float
    s2_star: float
    ds1_dd: float
    valid: bool = True


@dataclass
class DiffusionProfile:
    case: Case
    shape: str
    d_bar: float
    d_star: float
    s1_star_0: float | None
    s1_star_inf: float | None
    samples: list = field(default_factory=list)

    def arrays(self):
        """Valid samples as ``(d, s1, s2, ds1_dd)`` arrays."""
        rows = [(p.d, p.s1_star, p.s2_star, p.ds1_dd) for p in self.samples if p.valid]
        if not rows:
            return tuple(np.empty(0) for _ in range(4))
        return tuple(np.array(col) for col in zip(*rows))

    def sidecar(self):
        """JSON summary; infinite values become ``null``."""
        def num(x):
            return None if x is None or not math.isfinite(x) else x
        return {
            "case": self.case.value,
            "shape": self.shape,
            "d_bar": num(self.d_bar),
            "d_star": num(self.d_star),
            "s1_star_0": num(self.s1_star_0),
            "s1_star_inf": num(self.s1_star_inf),
        }

    def to_csv(self, path_or_file):
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
                self._write(fh)

    def _write(self, fh):
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["d", "s1_star", "s2_star", "ds1_dd"])
        for p in self.samples:
            if p.valid:
                writer.writerow([format(v, ".17g") for v in (p.d, p.s1_star, p.s2_star, p.ds1_dd)])
            else:
                writer.writerow([format(p.d, ".17g"), "", "", ""])


def default_grid(config, n=200, d_min=None, d_max=None, stop=NEAR_D_BAR):
    """Log-spaced diffusion grid inside the existence range."""
    top = d_bar(config)
    if d_max is None:
        d_max = stop * top if math.isfinite(top) else 1e3 * config.Q
    if d_min is None:
        d_min = 1e-4 * min(config.Q, d_max)
    return np.geomspace(d_min, d_max, n)


def _sample(config, d):
    d = float(d)
    if d <= 0:
        return DiffusionSample(d, math.nan, math.nan, math.nan, False)
    at_d = config.with_d(d)
    eq = positive_equilibrium(at_d)
    if eq is None:
        return DiffusionSample(d, math.nan, math.nan, math.nan, False)
    return DiffusionSample(d, eq.s1, eq.s2, ds_dd(at_d, eq)[0])


def sweep(config, d_grid=None, jobs=1):
    """Sample ``d -> (s1*, s2*, ds1*/dd)`` on a grid and annotate the regime.

    Grid points outside the existence range are kept with ``valid=False``.
    """
    if d_grid is None:
        d_grid = default_grid(config)
    s0, s_inf = limits(config)
    profile = DiffusionProfile(
        case=classify_case(config),
        shape=monotonicity_case(config),
        d_bar=d_bar(config),
        d_star=find_d_star(config),
        s1_star_0=s0,
        s1_star_inf=s_inf,
    )
    grid = [float(d) for d in d_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            profile.samples = list(pool.map(_sample, [config] * len(grid), grid))
    else:
        profile.samples = [_sample(config, d) for d in grid]
    return profile
