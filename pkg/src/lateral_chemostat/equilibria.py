"""Steady states of the two-tank model and their stability.

Besides the washout ``E0 = (s_in, 0, s_in, 0)`` there is at most one
positive steady state ``E*``.  Writing the steady-state equations as
``s2 = phi1(s1)`` and ``s1 = phi2(s2)``, ``E*`` is the nontrivial zero of
``gamma(s2) = phi2(s2) - phi1^{-1}(s2)`` on ``(0, lambda1)``, which is found
by nested bisection.  Everything below works on the ``(z, s)`` split of the
system: ``z = s_in - s - x`` relaxes through the Hurwitz matrix ``A`` and
the substrates follow the planar system with Jacobian ``J_a``.
"""

from dataclasses import dataclass
import enum

import numpy as np

from ._numerics import bisect
from .dynamics import effective_flow, outlet_concentrations
from .errors import ConfigError, InconsistencyError

BISECT_RTOL = 1e-15
HYPERBOLIC_TOL = 1e-12


class Kind(str, enum.Enum):
    WASHOUT = "Washout"
    POSITIVE = "Positive"


class Stability(str, enum.Enum):
    STABLE = "LocallyExpStable"
    SADDLE = "Saddle"
    NON_HYPERBOLIC = "NonHyperbolic"


@dataclass(frozen=True)
class Equilibrium:
    """A classified steady state.

    ``s2``/``x2`` are ``None`` when tank 2 is absent (``V2 = 0``) or
    disconnected (``d = 0``).  For the ``V1 = 0`` layout ``s1``/``x1`` hold
    the pipe outlet.
    """

    kind: Kind
    s1: float
    x1: float
    s2: float | None
    x2: float | None
    eigenvalues: np.ndarray
    stability: Stability

    @property
    def state(self):
        return (self.s1, self.x1, self.s2, self.x2)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "s1": self.s1, "x1": self.x1, "s2": self.s2, "x2": self.x2,
            "eigenvalues": [{"re": float(v.real), "im": float(v.imag)}
                            for v in self.eigenvalues],
            "stability": self.stability.value,
        }


# --- washout condition ------------------------------------------------------

def washout_polynomial(config, X=None):
    """``P(X) = V1 V2 X^2 - (d V1 + (Q + d) V2) X + d Q``, by default at ``X = mu(s_in)``."""
    if X is None:
        X = config.growth.mu(config.s_in)
    V1, V2, Q, d = config.V1, config.V2, config.Q, config.d
    return V1 * V2 * X * X - (d * V1 + (Q + d) * V2) * X + d * Q


def _polynomial_scale(config, X):
    V1, V2, Q, d = config.V1, config.V2, config.Q, config.d
    return max(V1 * V2 * X * X, (d * V1 + (Q + d) * V2) * X, d * Q)


def washout_is_unique(config):
    """True when the washout is the only steady state.

    Two tanks with ``d > 0``: ``mu(s_in) <= Q/V1`` and ``P(mu(s_in)) >= 0``.
    Degenerate layouts use the single-chemostat criterion with the relevant
    dilution rate.
    """
    X = config.growth.mu(config.s_in)
    layout = config.layout
    if layout == "lateral_only":
        return effective_flow(config.Q, config.d) / config.V2 >= X
    if layout == "single" or config.d == 0:
        return X <= config.Q / config.V1
    return X <= config.Q / config.V1 and washout_polynomial(config, X) >= 0


# --- the two branch functions -----------------------------------------------

def _require_d(config):
    if config.d <= 0:
        raise ConfigError("phi1/phi2 are only defined for d > 0")


def phi1(config, s1):
    """``s2`` as a function of ``s1`` from the tank-1 balance."""
    _require_d(config)
    mu = config.growth.mu(s1)
    return s1 - (config.Q - config.V1 * mu) / config.d * (config.s_in - s1)


def phi2(config, s2):
    """``s1`` as a function of ``s2`` from the tank-2 balance."""
    _require_d(config)
    return s2 + config.V2 * config.growth.mu(s2) / config.d * (config.s_in - s2)


def phi1_prime(config, s1):
    _require_d(config)
    g, V1, d = config.growth, config.V1, config.d
    return (1 + V1 / d * g.mu_prime(s1) * (config.s_in - s1)
            + (config.Q - V1 * g.mu(s1)) / d)


def phi2_prime(config, s2):
    _require_d(config)
    g = config.growth
    beta_p = g.mu_prime(s2) * (config.s_in - s2) - g.mu(s2)
    return 1 + config.V2 / config.d * beta_p


def lambda1(config):
    """Largest ``s1`` in ``[0, s_in]`` with ``mu(s1) <= Q/V1``."""
    if config.V1 <= 0:
        raise ConfigError("lambda1 needs V1 > 0")
    rate = config.Q / config.V1
    if config.growth.mu(config.s_in) <= rate:
        return config.s_in
    return min(config.s_in, config.growth.mu_inverse(rate))


# --- positive equilibrium ---------------------------------------------------

def steady_state_substrates(growth, V1, V2, Q, s_in, d):
    """Substrate levels ``(s1*, s2*)`` of the positive equilibrium.

    Vectorised over ``V1``, ``V2`` and ``d`` (all positive), which lets
    whole parameter grids be solved in lock step.  Entries where only the
    washout exists are NaN.  Scalar input gives floats.
    """
    scalar = all(np.ndim(v) == 0 for v in (V1, V2, d))
    V1, V2, d = np.broadcast_arrays(*(np.asarray(v, float) for v in (V1, V2, d)))
    X = growth.mu(s_in)
    P = V1 * V2 * X * X - (d * V1 + (Q + d) * V2) * X + d * Q
    exists = ~((X <= Q / V1) & (P >= 0))
    s1 = np.full(V1.shape, np.nan)
    s2 = np.full(V1.shape, np.nan)
    if np.any(exists):
        if scalar:
            r1, r2 = _solve_scalar(growth, float(V1), float(V2), Q, s_in, float(d))
        else:
            r1, r2 = _solve_array(growth, V1[exists], V2[exists], Q, s_in, d[exists])
        s1[exists] = r1
        s2[exists] = r2
    if scalar:
        return float(s1), float(s2)
    return s1, s2


def _make_branches(growth, V1, V2, Q, s_in, d):
    mu = growth.mu

    def phi1_(s):
        return s - (Q - V1 * mu(s)) / d * (s_in - s)

    def phi2_(s):
        return s + V2 * mu(s) / d * (s_in - s)

    return phi1_, phi2_


def _solve_scalar(growth, V1, V2, Q, s_in, d):
    xtol = BISECT_RTOL * s_in
    phi1_, phi2_ = _make_branches(growth, V1, V2, Q, s_in, d)
    rate = Q / V1
    lam = s_in if growth.mu(s_in) <= rate else min(s_in, growth.mu_inverse(rate))

    def phi1_inv(y):
        return bisect(lambda s: phi1_(s) - y, 0.0, lam, xtol, increasing=True)

    def gamma(s2):
        return phi2_(s2) - phi1_inv(s2)

    if lam < s_in:
        hi = lam
    else:
        # gamma(s_in) = 0 and gamma'(s_in) < 0 here: step back until gamma > 0
        delta = 0.1 * s_in
        for _ in range(200):
            if gamma(s_in - delta) > 0:
                break
            delta *= 0.5
        else:
            raise InconsistencyError("no sign change of gamma below s_in")
        hi = s_in - delta
    s2 = bisect(gamma, 0.0, hi, xtol)
    return phi1_inv(s2), s2


def _solve_array(growth, V1, V2, Q, s_in, d):
    xtol = BISECT_RTOL * s_in
    phi1_, phi2_ = _make_branches(growth, V1, V2, Q, s_in, d)
    rate = Q / V1
    X = growth.mu(s_in)
    lam = np.full(V1.shape, float(s_in))
    above = X > rate
    if np.any(above):
        lam[above] = np.minimum(s_in, growth.mu_inverse(rate[above]))
    zero = np.zeros_like(lam)

    def phi1_inv(y):
        return bisect(lambda s: phi1_(s) - y, zero, lam, xtol, increasing=True)

    def gamma(s2):
        return phi2_(s2) - phi1_inv(s2)

    hi = lam.copy()
    pending = lam >= s_in
    delta = np.full(V1.shape, 0.1 * s_in)
    for _ in range(200):
        if not np.any(pending):
            break
        ok = gamma(np.where(pending, s_in - delta, hi)) > 0
        hi = np.where(pending & ok, s_in - delta, hi)
        delta = np.where(pending & ~ok, 0.5 * delta, delta)
        pending &= ~ok
    else:
        raise InconsistencyError("no sign change of gamma below s_in")
    s2 = bisect(gamma, zero, hi, xtol)
    return phi1_inv(s2), s2


def steady_state_residuals(config, s1, s2):
    """Residuals of the two steady-state balances, in flow x concentration units."""
    g, s_in = config.growth, config.s_in
    r1 = (config.Q - config.V1 * g.mu(s1)) * (s_in - s1) + config.d * (s2 - s1)
    r2 = -config.V2 * g.mu(s2) * (s_in - s2) + config.d * (s1 - s2)
    return r1, r2


def positive_equilibrium(config):
    """The positive steady state, or ``None`` when only the washout exists."""
    if washout_is_unique(config):
        return None
    g, s_in = config.growth, config.s_in
    layout = config.layout
    if layout == "lateral_only":
        s2 = g.mu_inverse(effective_flow(config.Q, config.d) / config.V2)
        x2 = s_in - s2
        s1, x1 = outlet_concentrations(config, s2, x2)
    elif layout == "single" or config.d == 0:
        s1 = g.mu_inverse(config.Q / config.V1)
        x1, s2, x2 = s_in - s1, None, None
    else:
        s1, s2 = steady_state_substrates(g, config.V1, config.V2, config.Q, s_in, config.d)
        if not (0 < s2 < s1 < s_in):
            raise InconsistencyError(f"positive equilibrium out of order: s1={s1}, s2={s2}")
        x1, x2 = s_in - s1, s_in - s2
    return _classified(config, Kind.POSITIVE, s1, x1, s2, x2)


def washout_equilibrium(config):
    s_in = config.s_in
    has_tank2 = config.layout != "single" and config.d > 0
    s2, x2 = (s_in, 0.0) if has_tank2 else (None, None)
    return _classified(config, Kind.WASHOUT, s_in, 0.0, s2, x2)


def equilibria(config):
    """All steady states: the washout, then ``E*`` when it exists."""
    found = [washout_equilibrium(config)]
    positive = positive_equilibrium(config)
    if positive is not None:
        found.append(positive)
    return found


def steady_state(config):
    """The steady state reached from almost every initial condition."""
    positive = positive_equilibrium(config)
    return positive if positive is not None else washout_equilibrium(config)


# --- Jacobians and stability -------------------------------------------------

def a_matrix(config):
    """Linear dynamics of ``z = s_in - s - x`` (always Hurwitz)."""
    V1, V2, Q, d = config.V1, config.V2, config.Q, config.d
    return np.array([[-(Q + d) / V1, d / V1], [d / V2, -d / V2]])


def substrate_jacobian(config, s1, s2):
    """``J_a``: Jacobian of the substrate subsystem on ``z = 0``."""
    V1, V2, d = config.V1, config.V2, config.d
    return np.array([
        [-d / V1 * phi1_prime(config, s1), d / V1],
        [d / V2, -d / V2 * phi2_prime(config, s2)],
    ])


def substrate_jacobian_trace_det(config, s1, s2):
    """Closed-form trace and determinant of ``J_a``."""
    V1, V2, d = config.V1, config.V2, config.d
    p1, p2 = phi1_prime(config, s1), phi2_prime(config, s2)
    return -d * (p1 / V1 + p2 / V2), d * d / (V1 * V2) * (p1 * p2 - 1)


def jacobian(config, state):
    """Jacobian of the full 4-D vector field in ``(s1, x1, s2, x2)``."""
    s1, x1, s2, x2 = state
    g = config.growth
    a1, e1, e2 = config.Q / config.V1, config.d / config.V1, config.d / config.V2
    m1, m2 = g.mu(s1), g.mu(s2)
    p1, p2 = g.mu_prime(s1), g.mu_prime(s2)
    return np.array([
        [-p1 * x1 - a1 - e1, -m1, e1, 0.0],
        [p1 * x1, m1 - a1 - e1, 0.0, e1],
        [e2, 0.0, -p2 * x2 - e2, -m2],
        [0.0, e2, p2 * x2, m2 - e2],
    ])


def _chemostat_jacobian(growth, dilution, s, x):
    m, p = growth.mu(s), growth.mu_prime(s)
    return np.array([[-p * x - dilution, -m], [p * x, m - dilution]])


def _spectrum(config, s1, x1, s2, x2):
    layout = config.layout
    if layout == "lateral_only":
        J = _chemostat_jacobian(config.growth, effective_flow(config.Q, config.d) / config.V2,
                                s2, x2)
    elif layout == "single" or config.d == 0:
        J = _chemostat_jacobian(config.growth, config.Q / config.V1, s1, x1)
    else:
        J = jacobian(config, (s1, x1, s2, x2))
    return np.linalg.eigvals(J)


def _classify_by_spectrum(eigenvalues):
    re = eigenvalues.real
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    if np.any(np.abs(re) <= HYPERBOLIC_TOL * scale):
        return Stability.NON_HYPERBOLIC
    return Stability.STABLE if np.all(re < 0) else Stability.SADDLE


def classify_stability(config, eq):
    """Stability verdict and Jacobian eigenvalues of an equilibrium.

    For the washout of the two-tank system the verdict follows the sign of
    ``P(mu(s_in)) = V1 V2 det(J_a(s_in, s_in))``: zero means non-hyperbolic,
    a negative value or ``mu(s_in) > Q/V1`` means unstable (reported as
    ``Saddle``).  Every other case is read off the spectrum.
    """
    eig = _spectrum(config, eq.s1, eq.x1, eq.s2, eq.x2)
    if (eq.kind is Kind.WASHOUT and config.layout == "two_tanks" and config.d > 0):
        X = config.growth.mu(config.s_in)
        P = washout_polynomial(config, X)
        if abs(P) <= HYPERBOLIC_TOL * _polynomial_scale(config, X):
            return Stability.NON_HYPERBOLIC, eig
        if P < 0 or X > config.Q / config.V1:
            return Stability.SADDLE, eig
        return Stability.STABLE, eig
    return _classify_by_spectrum(eig), eig


def _classified(config, kind, s1, x1, s2, x2):
    s1, x1 = float(s1), float(x1)
    s2 = None if s2 is None else float(s2)
    x2 = None if x2 is None else float(x2)
    probe = Equilibrium(kind, s1, x1, s2, x2, np.empty(0), Stability.STABLE)
    stability, eig = classify_stability(config, probe)
    return Equilibrium(kind, s1, x1, s2, x2, eig, stability)
