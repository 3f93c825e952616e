"""Heat kernel with a compactly supported potential: oracles and asymptotics.

Two independent oracles for the fundamental solution p(t, x, y) of
dp/dt = (1/2) Laplacian p + v p (a Crank-Nicolson/Strang stepper and a
Brownian-bridge Feynman-Kac sampler) are checked, region by region, against
the cone-separated asymptotic formulas: the eigenvalue formula inside the
cone |x - y| = sqrt(2 lambda0) t, the Gaussian-times-coefficient formula
outside, and the erf-matched formula across it.
"""

__version__ = "0.1.0"

from . import asymptotics, evolution, potentials, spectral, stochastic
from .errors import (
    GridTooSmall,
    HandoverMismatch,
    HeatconeError,
    InvalidParameter,
    KernelTooShort,
    NonConvergence,
    NonPositiveConstant,
    NoPositiveEigenvalue,
    NumericalFailure,
    OmegaTooSmall,
    OutOfRange,
    ThetaTooSmall,
)
from .potentials import Potential, line_integral, make_bump, make_square_well
from .spectral import SpectralData, farfield_constant, ground_state, psi_extended, spectral_gap
from .evolution import KernelField, duhamel_residual, evaluate, evolve, free_kernel
from .stochastic import BridgeEstimate, bridge_estimate, interior_ratio_mc
