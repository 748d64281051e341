"""Chemostat with a lateral tank coupled by diffusion.

Submodules
----------
growth
    Growth laws (Monod, tabulated concave) and the derived ``beta``/``g``.
dynamics
    The ODE model, its degenerate layouts and integration.
equilibria
    Steady states, the washout condition and local stability.
dmap
    How the positive steady state moves with the diffusion rate.
design
    Minimal total volume for a prescribed outlet concentration.
cli
    Command-line front end.
"""

from .design import DesignResult, DesignSpec, design_fixed_d, design_free_d, volume_curve
from .dmap import Case, find_d_star, sweep
from .dynamics import ChemostatConfig, State, Trajectory, simulate
from .equilibria import (Equilibrium, Stability, classify_stability, positive_equilibrium,
                         washout_is_unique)
from .errors import (ChemostatError, ConfigError, DomainError, InconsistencyError,
                     IntegrationError, NoPreimageError, PoleError, UndefinedCaseError)
from .growth import Monod, Tabulated, beta, g, s_hat

__version__ = "0.1.0"

__all__ = [
    "Case", "ChemostatConfig", "ChemostatError", "ConfigError", "DesignResult",
    "DesignSpec", "DomainError", "Equilibrium", "InconsistencyError", "IntegrationError",
    "Monod", "NoPreimageError", "PoleError", "Stability", "State", "Tabulated",
    "Trajectory", "UndefinedCaseError", "beta", "classify_stability", "design_fixed_d",
    "design_free_d", "find_d_star", "g", "positive_equilibrium", "s_hat", "simulate",
    "sweep", "volume_curve", "washout_is_unique",
]
