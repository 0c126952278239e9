"""Power-2-decaying Gauss-like expansion: exact digit codec, pressure
functions, Birkhoff spectra and Gibbs-measure sampling."""

from .expansion import (
    CylinderInterval,
    DigitSequence,
    DomainError,
    Tail,
    apply_T,
    decode,
    encode,
    first_digit,
    periodic_point,
)
from .gibbs import (
    DigitDistribution,
    SampleReport,
    birkhoff_average,
    digit_distribution,
    empirical_level_set_check,
    local_dimension,
    sample_digits,
)
from .pressure import (
    PotentialKind,
    PressureEval,
    PressurePoint,
    pressure,
    pressure_expdigit,
    pressure_khintchine,
    pressure_logdigit,
    xi0,
    zeta,
)
from .spectrum import (
    NonConvergenceError,
    SpectrumCurve,
    SpectrumSolution,
    boundary_dimension,
    khintchine_inflection,
    khintchine_second_derivative,
    khintchine_spectrum,
    lyapunov_spectrum,
    solve_system,
    spectrum_curve,
)

__version__ = "0.1.0"
