"""2D inviscid Boussinesq simulation with Littlewood-Paley diagnostics.

A pseudo-spectral solver for the buoyancy-forced Euler system on the
torus, together with a computational dyadic-analysis engine (Besov
norms, paraproducts, transport commutators) used to monitor
continuation criteria and to test closed-form lifespan lower bounds.
"""

__version__ = "0.1.0"

from .fields import (  # noqa: F401
    Grid,
    RealField,
    SpectralField,
    dealias,
    invert_laplacian,
    lebesgue_norm,
    spectral_derivative,
    to_physical,
    to_spectral,
    velocity_from_vorticity,
)
