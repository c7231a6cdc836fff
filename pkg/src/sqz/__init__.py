"""Squeezed-light generation in nonlinear waveguides under pulsed pumping.

Simulates degenerate squeezing from pulsed downconversion and four-wave
mixing: classical pump mean fields and quantum second moments are propagated
on a wavevector-detuning grid, with dispersion to second order, self/cross
phase modulation, and linear loss.  Analysis tools extract joint spectral
amplitudes, Schmidt decompositions, and homodyne variances.
"""

from .kgrid import KappaGrid, ModeParams, make_grid, omega_of_kappa
from .meanfield import (
    DriveFields,
    MeanField,
    NonlinearCoupling,
    PumpShape,
    PumpSpec,
    gamma_to_zeta3,
    make_pump,
)
from .qprop import (
    BogoliubovBlocks,
    GaussianMoments,
    GeneratorBlocks,
    concatenate,
    exponentiate,
    propagate,
)
from .analysis import (
    JsaMatrix,
    SchmidtData,
    assemble_jsa,
    homodyne_variance,
    photon_density,
    schmidt_from_moment,
    takagi,
)

__version__ = "0.1.0"

__all__ = [
    "KappaGrid",
    "ModeParams",
    "make_grid",
    "omega_of_kappa",
    "PumpShape",
    "PumpSpec",
    "MeanField",
    "NonlinearCoupling",
    "DriveFields",
    "make_pump",
    "gamma_to_zeta3",
    "GeneratorBlocks",
    "BogoliubovBlocks",
    "GaussianMoments",
    "exponentiate",
    "concatenate",
    "propagate",
    "takagi",
    "schmidt_from_moment",
    "assemble_jsa",
    "photon_density",
    "homodyne_variance",
    "SchmidtData",
    "JsaMatrix",
    "__version__",
]
