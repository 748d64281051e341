"""Minimal total volume reaching a prescribed outlet substrate ``s_ref``.

At steady state with ``s1 = s_ref`` both volumes are explicit functions of
the lateral-tank concentration ``s2``::

    V1 = v1(s2) = Q g(s_ref) (s_in - s_ref) + d g(s_ref) (s2 - s_ref)
    V2 = v2(s2) = d g(s2) (s_ref - s2)

so ``V1 + V2 = Q/mu(s_ref) + d G(s2)`` with
``G(s) = (g(s_ref) - g(s)) (s - s_ref)``.  Nonnegative volumes confine
``s2`` to ``[alpha, s_ref]``, ``alpha = max(0, s_ref - Q/d (s_in - s_ref))``.
Because ``g = 1/beta`` is convex with minimiser ``s_hat``, the design is

* one mixed tank when ``s_ref <= s_hat`` (no lateral tank can help);
* otherwise ``s2 = s_G`` (interior minimiser of ``G``) when
  ``alpha <= s_G``, giving two tanks, else ``s2 = alpha`` and ``V1 = 0``:
  a single tank hanging off the pipe by diffusion.

When ``d`` is free, the best choice is always the lateral tank alone with
``s2 = s_hat`` and ``d = Q (s_in - s_ref) / (s_ref - s_hat)``.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass
import enum

import numpy as np

from ._numerics import bisect
from .dynamics import ChemostatConfig
from .errors import ConfigError, UndefinedCaseError
from .growth import GrowthModel, beta, g, g_prime, s_hat

ARG_RTOL = 1e-12
V1_UNDERFLOW = 1e-12


class Kind(str, enum.Enum):
    SINGLE_MIXED_TANK = "SingleMixedTank"
    TWO_TANKS = "TwoTanks"
    SINGLE_LATERAL_TANK = "SingleLateralTank"


@dataclass(frozen=True)
class DesignSpec:
    Q: float
    s_in: float
    s_ref: float
    growth: GrowthModel
    d: float | None = None

    def __post_init__(self):
        if not self.Q > 0:
            raise ConfigError("Q must be positive")
        if not 0 < self.s_ref < self.s_in:
            raise ConfigError(f"need 0 < s_ref < s_in, got s_ref={self.s_ref}, s_in={self.s_in}")
        if self.d is not None and not self.d >= 0:
            raise ConfigError("d must be nonnegative")

    def with_d(self, d):
        return DesignSpec(self.Q, self.s_in, self.s_ref, self.growth,
                          None if d is None else float(d))


@dataclass(frozen=True)
class DesignResult:
    kind: Kind
    V1: float
    V2: float
    d: float
    s2_opt: float
    baseline_volume: float
    alpha: float | None
    s_G: float | None
    d_any: bool = False

    @property
    def total_volume(self):
        return self.V1 + self.V2

    def residence_time(self, Q):
        return self.total_volume / Q

    def config(self, spec):
        """Chemostat realising this design; its steady state has ``s1 = s_ref``."""
        return ChemostatConfig(self.V1, self.V2, spec.Q, spec.s_in, self.d, spec.growth)

    def to_dict(self, Q):
        return {
            "kind": self.kind.value,
            "V1": self.V1,
            "V2": self.V2,
            "d": self.d,
            "d_any": self.d_any,
            "s2_opt": self.s2_opt,
            "total_volume": self.total_volume,
            "baseline_volume": self.baseline_volume,
            "residence_time": self.residence_time(Q),
            "alpha": self.alpha,
            "s_G": self.s_G,
        }


def single_tank_volume(spec):
    """Volume of the single chemostat with outlet ``s_ref``: ``Q / mu(s_ref)``."""
    return spec.Q / spec.growth.mu(spec.s_ref)


def _d(spec, d):
    d = spec.d if d is None else d
    if d is None:
        raise ConfigError("a diffusion rate is required")
    return d


def alpha(spec, d=None):
    """Lower end of the admissible ``s2`` interval."""
    d = _d(spec, d)
    if not d > 0:
        raise ConfigError("alpha needs d > 0")
    return max(0.0, spec.s_ref - spec.Q / d * (spec.s_in - spec.s_ref))


def G(spec, s):
    """Volume change per unit ``d`` brought by the lateral tank at ``s2 = s``."""
    return (g(spec.growth, spec.s_ref, spec.s_in) - g(spec.growth, s, spec.s_in)) * (s - spec.s_ref)


def H(spec, s):
    """Chord slope of ``g`` between ``s`` and ``s_ref``."""
    gr, s_in = spec.growth, spec.s_in
    return (g(gr, spec.s_ref, s_in) - g(gr, s, s_in)) / (s - spec.s_ref)


def G_prime(spec, s):
    gr, s_in = spec.growth, spec.s_in
    return g(gr, spec.s_ref, s_in) - g(gr, s, s_in) - g_prime(gr, s, s_in) * (s - spec.s_ref)


def v1(spec, d, s2):
    gr, s_in, s_ref = spec.growth, spec.s_in, spec.s_ref
    g_ref = g(gr, s_ref, s_in)
    return spec.Q * g_ref * (s_in - s_ref) + d * g_ref * (s2 - s_ref)


def v2(spec, d, s2):
    return d * g(spec.growth, s2, spec.s_in) * (spec.s_ref - s2)


def s_bar_ref(spec):
    """The point left of ``s_hat`` where ``g`` takes the value ``g(s_ref)``."""
    sh = s_hat(spec.growth, spec.s_in)
    if spec.s_ref <= sh:
        raise UndefinedCaseError("s_bar_ref only exists when s_ref > s_hat")
    gr, s_in = spec.growth, spec.s_in
    b_ref = beta(gr, spec.s_ref, s_in)
    return bisect(lambda s: beta(gr, s, s_in) - b_ref, 0.0, sh, ARG_RTOL * s_in)


def s_G(spec):
    """Unique minimiser of ``G`` on ``(s_bar_ref, s_hat)``.

    It solves ``g'(s) = H(s)``; ``g'`` increases and ``H`` decreases on
    that interval.
    """
    sh = s_hat(spec.growth, spec.s_in)
    if spec.s_ref <= sh:
        raise UndefinedCaseError("s_G only exists when s_ref > s_hat")
    lo = s_bar_ref(spec)
    gr, s_in = spec.growth, spec.s_in
    return bisect(lambda s: g_prime(gr, s, s_in) - H(spec, s), lo, sh, ARG_RTOL * s_in,
                  increasing=True)


def design_fixed_d(spec, d=None):
    """Optimal ``(V1, V2)`` for a given diffusion rate.

    ``d = 0`` is accepted and yields the single mixed tank.
    """
    d = float(_d(spec, d))
    base = single_tank_volume(spec)
    sh = s_hat(spec.growth, spec.s_in)
    a = alpha(spec, d) if d > 0 else None
    sg = s_G(spec) if sh < spec.s_ref else None
    if d == 0 or sh >= spec.s_ref:
        return DesignResult(Kind.SINGLE_MIXED_TANK, base, 0.0, d, spec.s_ref, base, a, sg)
    if sh <= a:
        s2 = a
    else:
        s2 = sg if a <= sg else a
    V1 = v1(spec, d, s2)
    V2 = v2(spec, d, s2)
    if V1 < V1_UNDERFLOW * base:
        V1 = 0.0
    kind = Kind.SINGLE_LATERAL_TANK if V1 == 0 else Kind.TWO_TANKS
    return DesignResult(kind, V1, V2, d, s2, base, a, sg)


def design_free_d(spec):
    """Optimal ``(V1, V2, d)`` when the diffusion rate is a design variable too."""
    base = single_tank_volume(spec)
    sh = s_hat(spec.growth, spec.s_in)
    Q, s_in, s_ref = spec.Q, spec.s_in, spec.s_ref
    if sh >= s_ref:
        return DesignResult(Kind.SINGLE_MIXED_TANK, base, 0.0, 0.0, s_ref, base, None, None,
                            d_any=True)
    d_opt = Q * (s_in - s_ref) / (s_ref - sh)
    V2 = Q * (s_in - s_ref) * g(spec.growth, sh, s_in)
    return DesignResult(Kind.SINGLE_LATERAL_TANK, 0.0, V2, d_opt, sh, base,
                        alpha(spec, d_opt), s_G(spec))


def optimal_diffusion(spec):
    """``d*`` of the free design, or ``None`` when any ``d`` is optimal."""
    res = design_free_d(spec)
    return None if res.d_any else res.d


def volume_opt(spec, d):
    """Minimal total volume at diffusion rate ``d``."""
    return design_fixed_d(spec, d).total_volume


@dataclass
class VolumeCurve:
    d: np.ndarray
    volume: np.ndarray
    kinds: list

    def to_csv(self, path_or_file):
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
                self._write(fh)

    def _write(self, fh):
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["d", "V_opt", "kind"])
        for d, v, k in zip(self.d, self.volume, self.kinds):
            writer.writerow([format(d, ".17g"), format(v, ".17g"), k.value])


def _curve_point(spec, d):
    res = design_fixed_d(spec, d)
    return res.total_volume, res.kind


def volume_curve(spec, d_grid, jobs=1):
    """Optimal total volume as a function of the diffusion rate."""
    grid = [float(d) for d in d_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_curve_point, [spec] * len(grid), grid))
    else:
        points = [_curve_point(spec, d) for d in grid]
    return VolumeCurve(np.array(grid), np.array([p[0] for p in points]),
                       [p[1] for p in points])


def default_d_grid(spec, n=200):
    """Log grid over four decades, centred on ``d*`` when it exists."""
    centre = optimal_diffusion(spec) or spec.Q
    return np.geomspace(1e-2 * centre, 1e2 * centre, n)
