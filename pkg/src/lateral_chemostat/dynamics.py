"""Two-tank chemostat with a lateral tank coupled by diffusion.

Tank 1 (volume ``V1``) is crossed by the flow ``Q`` carrying substrate at
``s_in``; tank 2 (volume ``V2``) only exchanges matter with tank 1 at the
diffusion rate ``d`` (same for substrate and biomass, unit yield)::

    s1' = -mu(s1) x1 + Q/V1 (s_in - s1) + d/V1 (s2 - s1)
    x1' =  mu(s1) x1 - Q/V1 x1          + d/V1 (x2 - x1)
    s2' = -mu(s2) x2                    + d/V2 (s1 - s2)
    x2' =  mu(s2) x2                    + d/V2 (x1 - x2)

Degenerate layouts are handled by dedicated models:

* ``V1 = 0``: a single tank hanging off the input pipe.  The tank sees the
  effective dilution ``Q d / ((Q + d) V2)`` and the pipe outlet is given by
  :func:`outlet_concentrations`.
* ``V2 = 0``: the ordinary single chemostat of volume ``V1`` (whatever
  ``d``).  ``d = 0`` with ``V2 > 0`` is integrated with the full system, in
  which tank 2 is a closed batch.
"""

import csv
from dataclasses import dataclass, field, replace
import math
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, IntegrationError
from .growth import GrowthModel

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
UNDERSHOOT_FACTOR = 10.0
STEADY_TOL = 1e-9


@dataclass(frozen=True)
class ChemostatConfig:
    """Full parameterisation of the two-tank model."""

    V1: float
    V2: float
    Q: float
    s_in: float
    d: float
    growth: GrowthModel

    def __post_init__(self):
        for name in ("V1", "V2", "Q", "s_in", "d"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{name} must be a finite number, got {value!r}")
        if not (self.Q > 0 and self.s_in > 0):
            raise ConfigError("Q and s_in must be positive")
        if self.V1 < 0 or self.V2 < 0 or self.d < 0:
            raise ConfigError("volumes and diffusion must be nonnegative")
        if self.V1 == 0 and self.V2 == 0:
            raise ConfigError("at least one tank must have positive volume")
        if self.V1 == 0 and self.d == 0:
            raise ConfigError("V1 = 0 requires d > 0 (the tank would be disconnected)")
        hint = getattr(self.growth, "s_max", None)
        if hint is not None and self.s_in > hint:
            raise ConfigError("growth law is not defined up to s_in")

    @property
    def V(self):
        return self.V1 + self.V2

    @property
    def layout(self):
        """One of ``"two_tanks"``, ``"lateral_only"`` (V1 = 0), ``"single"`` (V2 = 0)."""
        if self.V1 == 0:
            return "lateral_only"
        if self.V2 == 0:
            return "single"
        return "two_tanks"

    def with_d(self, d):
        return replace(self, d=float(d))

    def with_volumes(self, V1, V2):
        return replace(self, V1=float(V1), V2=float(V2))


class State(NamedTuple):
    s1: float
    x1: float
    s2: float
    x2: float


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n, 4), columns s1, x1, s2, x2
    config: ChemostatConfig
    converged: bool = False
    info: dict = field(default_factory=dict)

    @property
    def final(self):
        return State(*map(float, self.states[-1]))

    def to_csv(self, path_or_file):
        """Write ``t,s1,x1,s2,x2`` with 17 significant digits."""
        rows = np.column_stack([self.times, self.states])
        if hasattr(path_or_file, "write"):
            _write_csv(path_or_file, rows)
        else:
            with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
                _write_csv(fh, rows)


def _write_csv(fh, rows):
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(["t", "s1", "x1", "s2", "x2"])
    for row in rows:
        writer.writerow([format(v, ".17g") for v in row])


def effective_flow(Q, d):
    """Flow that effectively reaches a lateral tank hanging off the pipe."""
    return Q * d / (Q + d)


def _rhs_array(config, y):
    # y has shape (4, ...) so batches of states can be stacked column-wise
    s1, x1, s2, x2 = y
    mu = config.growth.mu
    a1 = config.Q / config.V1
    e1 = config.d / config.V1
    e2 = config.d / config.V2
    m1 = mu(np.maximum(s1, 0.0))
    m2 = mu(np.maximum(s2, 0.0))
    return np.array([
        -m1 * x1 + a1 * (config.s_in - s1) + e1 * (s2 - s1),
        m1 * x1 - a1 * x1 + e1 * (x2 - x1),
        -m2 * x2 + e2 * (s1 - s2),
        m2 * x2 + e2 * (x1 - x2),
    ])


def rhs(config, state):
    """Time derivative of ``(s1, x1, s2, x2)`` for ``V1, V2 > 0``."""
    if config.V1 == 0 or config.V2 == 0:
        raise ConfigError("rhs needs V1 > 0 and V2 > 0; use the reduced models")
    return _rhs_array(config, np.asarray(state, float))


def rhs_single_tank(config, s1, x1):
    """Single chemostat of volume ``V1`` (the ``V2 = 0`` or ``d = 0`` limit)."""
    dil = config.Q / config.V1
    m = config.growth.mu(np.maximum(s1, 0.0))
    return np.array([-m * x1 + dil * (config.s_in - s1), m * x1 - dil * x1])


def rhs_reduced_v1_zero(config, s2, x2):
    """Dynamics of the lateral tank when ``V1 = 0``."""
    if config.d <= 0 or config.V2 <= 0:
        raise ConfigError("the V1 = 0 model needs d > 0 and V2 > 0")
    dil = effective_flow(config.Q, config.d) / config.V2
    m = config.growth.mu(np.maximum(s2, 0.0))
    return np.array([-m * x2 + dil * (config.s_in - s2), m * x2 - dil * x2])


def outlet_concentrations(config, s2, x2):
    """Pipe outlet ``(s_out, x_out)`` from the mass balance at the junction."""
    Q, d = config.Q, config.d
    if math.isinf(d):
        return s2, x2
    return (Q * config.s_in + d * s2) / (Q + d), d * x2 / (Q + d)


def z_transform(state, s_in):
    """``(s1, x1, s2, x2) -> (z1, s1, z2, s2)`` with ``z_i = s_in - s_i - x_i``."""
    s1, x1, s2, x2 = state
    return (s_in - s1 - x1, s1, s_in - s2 - x2, s2)


def z_inverse(zs, s_in):
    z1, s1, z2, s2 = zs
    return State(s1, s_in - s1 - z1, s2, s_in - s2 - z2)


def derivative(config, state):
    """Derivative in ``(s1, x1, s2, x2)`` for any layout.

    For ``V1 = 0`` the tank-1 slots hold the outlet and have zero derivative;
    for ``V2 = 0`` the tank-2 slots are NaN.
    """
    y = np.asarray(state, float)
    layout = config.layout
    if layout == "two_tanks":
        return _rhs_array(config, y)
    if layout == "single":
        ds1, dx1 = rhs_single_tank(config, y[0], y[1])
        return np.array([ds1, dx1, np.nan, np.nan])
    ds2, dx2 = rhs_reduced_v1_zero(config, y[2], y[3])
    return np.array([0.0, 0.0, ds2, dx2])


def is_steady(config, state, tol=STEADY_TOL):
    """Scale-free steady-state test ``max |rhs| < tol * s_in``."""
    der = derivative(config, state)
    return bool(np.nanmax(np.abs(der)) < tol * config.s_in)


def _system(config):
    """(fun, dimension, to_state) for the layout of ``config``."""
    layout = config.layout
    if layout == "two_tanks":
        def fun(t, y):
            return _rhs_array(config, y.reshape(4, -1)).ravel()
        return fun, 4, lambda Y: Y
    if layout == "single":
        def fun(t, y):
            y = y.reshape(2, -1)
            return rhs_single_tank(config, y[0], y[1]).ravel()

        def to_state(Y):
            nan = np.full_like(Y[:, :1], np.nan)
            return np.hstack([Y, nan, nan])
        return fun, 2, to_state

    def fun(t, y):
        y = y.reshape(2, -1)
        return rhs_reduced_v1_zero(config, y[0], y[1]).ravel()

    def to_state(Y):
        s_out, x_out = outlet_concentrations(config, Y[:, 0], Y[:, 1])
        return np.column_stack([s_out, x_out, Y[:, 0], Y[:, 1]])
    return fun, 2, to_state


def _initial_vector(config, initial):
    y0 = np.asarray(initial, float)
    if y0.shape[-1] != 4:
        raise ConfigError("initial state must have 4 components (s1, x1, s2, x2)")
    if config.layout == "single":
        y0 = y0[..., :2]
    elif config.layout == "lateral_only":
        y0 = y0[..., 2:]
    if np.any(~(y0 >= 0)):
        raise ConfigError("initial state must be nonnegative")
    return y0


def simulate(config, initial, horizon, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
             t_eval=None, first_step=None):
    """Integrate the model from ``initial`` over ``[0, horizon]``.

    Uses the Dormand-Prince embedded Runge-Kutta 4(5) pair with adaptive
    steps.  Small negative excursions (above ``-10 * atol``) are clamped to
    zero; anything lower is reported as an integration failure, as is a
    collapse of the step size.

    Parameters
    ----------
    config : ChemostatConfig
    initial : State or sequence of 4 floats
        ``(s1, x1, s2, x2)``.  Components of tanks that do not exist in the
        layout are ignored.
    horizon : float
        Final time.
    rtol, atol : float
        Integrator tolerances.
    t_eval : array_like, optional
        Output times; defaults to the accepted integrator steps.
    first_step : float, optional
        Initial step, ``1e-3 * V / Q`` by default.

    Returns
    -------
    Trajectory

    Raises
    ------
    IntegrationError
        With the partial trajectory attached.
    """
    if not horizon > 0:
        raise ConfigError("horizon must be positive")
    fun, dim, to_state = _system(config)
    y0 = _initial_vector(config, initial)
    if y0.ndim != 1:
        raise ConfigError("simulate takes a single initial state; see simulate_many")
    h0 = first_step if first_step is not None else 1e-3 * config.V / config.Q
    sol = solve_ivp(fun, (0.0, horizon), y0, method="RK45", rtol=rtol, atol=atol,
                    first_step=min(h0, horizon), t_eval=t_eval)
    states = to_state(sol.y.T)
    times = sol.t
    bad = np.nonzero(np.nanmin(states, axis=1) < -UNDERSHOOT_FACTOR * atol)[0]
    if bad.size:
        k = bad[0]
        partial = Trajectory(times[:k], np.maximum(states[:k], 0.0), config)
        raise IntegrationError(
            f"negative undershoot {np.nanmin(states[k]):.3e} at t={times[k]:.6g}",
            partial)
    states = np.where(states < 0, 0.0, states)
    if sol.status != 0:
        raise IntegrationError(sol.message, Trajectory(times, states, config))
    traj = Trajectory(times, states, config, info={"nfev": sol.nfev})
    traj.converged = is_steady(config, traj.final)
    return traj


def simulate_many(config, initials, horizon, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                  t_eval=None):
    """Many trajectories integrated as one stacked system.

    The tanks of different runs do not interact, so stacking only couples
    them through the shared step size.  Returns the ``(n, 4)`` terminal
    states, or an ``(len(t_eval), n, 4)`` array when ``t_eval`` is given.
    The undershoot policy of :func:`simulate` applies at every output time.
    """
    fun, dim, to_state = _system(config)
    y0 = _initial_vector(config, np.atleast_2d(initials))
    n = y0.shape[0]
    h0 = 1e-3 * config.V / config.Q
    times = [horizon] if t_eval is None else t_eval
    sol = solve_ivp(fun, (0.0, horizon), y0.T.ravel(), method="RK45", rtol=rtol,
                    atol=atol, first_step=min(h0, horizon), t_eval=times)
    if sol.status != 0:
        raise IntegrationError(sol.message)
    states = np.stack([to_state(col.reshape(dim, n).T) for col in sol.y.T])
    low = np.nanmin(states)
    if low < -UNDERSHOOT_FACTOR * atol:
        raise IntegrationError(f"negative undershoot {low:.3e} in batch integration")
    states = np.where(states < 0, 0.0, states)
    return states[-1] if t_eval is None else states
