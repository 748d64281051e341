"""Specific growth laws and the scalar functions built on them.

A growth law ``mu`` must be increasing and concave with ``mu(0) = 0``.
Two implementations are provided: :class:`Monod` (closed forms wherever
possible) and :class:`Tabulated` (piecewise-linear through validated
samples, used to check that the analysis never relies on Monod specifics).

Every function here accepts a float or a numpy array for the concentration
argument and is pure.
"""

from dataclasses import dataclass
import math
from numbers import Real

import numpy as np

from ._numerics import bisect, golden_min
from .errors import ConfigError, DomainError, NoPreimageError, PoleError

ARG_TOL = 1e-12


def _check_nonnegative(s):
    if isinstance(s, Real):
        if s < 0 or math.isnan(s):
            raise DomainError(f"concentration must be >= 0, got {s!r}")
    elif np.any(~(np.asarray(s) >= 0)):
        raise DomainError("concentration must be >= 0")


class GrowthModel:
    """Interface shared by growth laws."""

    s_in_hint = None

    def mu(self, s):
        raise NotImplementedError

    def mu_prime(self, s):
        raise NotImplementedError

    def mu_inverse(self, r):
        raise NotImplementedError

    @property
    def sup(self):
        """Least upper bound of ``mu`` over its domain."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Monod(GrowthModel):
    """``mu(s) = mu_max * s / (K + s)``."""

    mu_max: float
    K: float
    s_in_hint: float = None

    def __post_init__(self):
        if not (self.mu_max > 0 and self.K > 0):
            raise ConfigError(f"Monod needs mu_max > 0 and K > 0, got {self}")

    def mu(self, s):
        _check_nonnegative(s)
        return self.mu_max * s / (self.K + s)

    def mu_prime(self, s):
        _check_nonnegative(s)
        return self.mu_max * self.K / (self.K + s) ** 2

    def mu_inverse(self, r):
        r_arr = np.asarray(r, float)
        if np.any(~((r_arr > 0) & (r_arr < self.mu_max))):
            raise NoPreimageError(
                f"Monod(mu_max={self.mu_max}) has no preimage for rate {r!r}"
            )
        return self.K * r / (self.mu_max - r)

    @property
    def sup(self):
        return self.mu_max

    def to_dict(self):
        return {"kind": "monod", "mu_max": self.mu_max, "K": self.K}


@dataclass(frozen=True, eq=False)
class Tabulated(GrowthModel):
    """Piecewise-linear growth law through ``(s, mu)`` samples.

    The first sample must be ``(0, 0)``; both coordinates must be strictly
    increasing and the chord slopes strictly decreasing.  The law is not
    defined beyond the last abscissa, and its supremum is the last value.
    """

    s: tuple
    values: tuple
    s_in_hint: float = None

    def __post_init__(self):
        s = np.asarray(self.s, float)
        v = np.asarray(self.values, float)
        if s.ndim != 1 or s.shape != v.shape or s.size < 2:
            raise ConfigError("tabulated growth needs two equal-length 1-D sample arrays")
        if s[0] != 0 or v[0] != 0:
            raise ConfigError("tabulated growth must start at (0, 0)")
        ds, dv = np.diff(s), np.diff(v)
        if np.any(ds <= 0) or np.any(dv <= 0):
            raise ConfigError("tabulated growth samples must be strictly increasing")
        if np.any(np.diff(dv / ds) >= 0):
            raise ConfigError("tabulated growth samples must be strictly concave")
        if self.s_in_hint is not None and self.s_in_hint > s[-1]:
            raise ConfigError("tabulated growth does not cover s_in_hint")
        object.__setattr__(self, "s", tuple(s.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "_s", s)
        object.__setattr__(self, "_v", v)

    def __eq__(self, other):
        return (isinstance(other, Tabulated) and self.s == other.s
                and self.values == other.values)

    def __hash__(self):
        return hash((self.s, self.values))

    @property
    def s_max(self):
        return self.s[-1]

    def _check_domain(self, s):
        _check_nonnegative(s)
        if np.any(np.asarray(s) > self.s_max):
            raise DomainError(f"tabulated growth is undefined beyond s = {self.s_max}")

    def mu(self, s):
        self._check_domain(s)
        out = np.interp(s, self._s, self._v)
        return float(out) if np.ndim(out) == 0 else out

    def mu_prime(self, s):
        self._check_domain(s)
        s_arr = np.asarray(s, float)
        h = 1e-6 * np.maximum(1.0, s_arr)
        lo = np.clip(s_arr - h, 0.0, self.s_max)
        hi = np.clip(s_arr + h, 0.0, self.s_max)
        out = (np.interp(hi, self._s, self._v) - np.interp(lo, self._s, self._v)) / (hi - lo)
        return float(out) if np.ndim(out) == 0 else out

    def mu_inverse(self, r):
        r_arr = np.asarray(r, float)
        if np.any(~((r_arr > 0) & (r_arr < self.sup))):
            raise NoPreimageError(f"tabulated growth has no preimage for rate {r!r}")
        # np.interp on the swapped axes is exact for a piecewise-linear law;
        # bisection keeps the same contract as any other non-Monod law.
        return bisect(lambda x: np.interp(x, self._s, self._v) - r,
                      0.0 * r_arr, self.s_max + 0.0 * r_arr, ARG_TOL)

    @property
    def sup(self):
        return self.values[-1]

    def to_dict(self):
        return {"kind": "tabulated", "s": list(self.s), "mu": list(self.values)}


def from_dict(spec):
    """Build a growth model from its JSON form."""
    kind = spec.get("kind")
    if kind == "monod":
        return Monod(float(spec["mu_max"]), float(spec["K"]))
    if kind == "tabulated":
        return Tabulated(tuple(spec["s"]), tuple(spec["mu"]))
    raise ConfigError(f"unknown growth kind {kind!r}")


def mu(model, s):
    return model.mu(s)


def mu_prime(model, s):
    return model.mu_prime(s)


def mu_inverse(model, r):
    return model.mu_inverse(r)


def _check_interval(s, s_in):
    _check_nonnegative(s)
    if np.any(np.asarray(s) > s_in):
        raise DomainError(f"concentration must lie in [0, s_in={s_in}], got {s!r}")


def beta(model, s, s_in):
    """Substrate consumption rate at steady state, ``mu(s) * (s_in - s)``."""
    _check_interval(s, s_in)
    return model.mu(s) * (s_in - s)


def beta_prime(model, s, s_in):
    _check_interval(s, s_in)
    return model.mu_prime(s) * (s_in - s) - model.mu(s)


def s_hat(model, s_in):
    """Unique maximiser of ``beta`` on ``(0, s_in)``."""
    if not s_in > 0:
        raise DomainError(f"s_in must be positive, got {s_in!r}")
    if isinstance(model, Monod):
        return math.sqrt(model.K * (model.K + s_in)) - model.K
    return golden_min(lambda s: -beta(model, s, s_in), 0.0, s_in, ARG_TOL)


def _check_open(s, s_in):
    s_arr = np.asarray(s)
    if np.any(~((s_arr > 0) & (s_arr < s_in))):
        raise PoleError(f"g has poles at 0 and s_in={s_in}; got s={s!r}")


def g(model, s, s_in):
    """Volume cost density ``1 / beta``; strictly convex, minimal at ``s_hat``."""
    _check_open(s, s_in)
    return 1.0 / beta(model, s, s_in)


def g_prime(model, s, s_in):
    _check_open(s, s_in)
    b = beta(model, s, s_in)
    return -beta_prime(model, s, s_in) / (b * b)
