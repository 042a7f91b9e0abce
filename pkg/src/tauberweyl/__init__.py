"""Numerical laboratory for Tauberian remainder estimates in Weyl's law.

Submodules
----------
spectral_models   exact spectra and length spectra of flat tori and round spheres
half_wave_trace   regularised half-wave traces, peak detection, Sobolev norms
fourier_laplace   causal functions, Fourier-Laplace transforms and boundary values
newman_contour    the contour decomposition I1 + I2 + I3 and its bounds
pole_calculus     principal parts at the origin and polynomial ansaetze
weyl_analysis     Weyl polynomials, remainder envelopes, regulator, mean-to-max
cli               the ``tauberweyl`` command
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccuracyError,
    DomainError,
    IncompleteSpectrumError,
    InvalidLatticeError,
    PreconditionError,
    TauberWeylError,
    UndefinedFitError,
)
from .fourier_laplace import CausalFunction, boundary_value, fl_transform, partial_fl  # noqa: E402
from .half_wave_trace import (  # noqa: E402
    GaussianScale,
    RegularizationSpec,
    SharpCount,
    TauGrid,
    detect_singularities,
    sample_trace,
)
from .newman_contour import ContourParams, verify_identity  # noqa: E402
from .pole_calculus import PoleExpansion, PolynomialAnsatz  # noqa: E402
from .spectral_models import (  # noqa: E402
    Lattice,
    Sphere,
    Torus,
    enumerate_sphere_spectrum,
    enumerate_torus_spectrum,
    geodesic_length_spectrum,
)
from .weyl_analysis import run_weyl_pipeline, weyl_polynomial  # noqa: E402
