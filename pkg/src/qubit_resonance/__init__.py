"""Second-order resonance theory of qubit decoherence and thermalization.

Resonance energies, timescales and leading-order reduced dynamics of a qubit
linearly coupled to a thermal massless bosonic field, plus a finite-mode
exact-diagonalization oracle that checks them.
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguousClustering,
    BudgetExceeded,
    DegenerateSystem,
    DimensionMismatch,
    EigendecompositionFailure,
    IllConditionedFit,
    NonconformingProfile,
    PreconditionViolation,
    QuadratureFailure,
    RecurrenceViolation,
    TruncationWarning,
    UnsupportedInitialState,
)
from .spectral_density import (
    FormFactor,
    ReservoirSpec,
    g_omega_inverse,
    infrared_exponent,
    pv_energy_integral,
    xi,
    xi_extrapolated,
    xi_lorentzian,
)
from .system_model import (
    BohrSpectrum,
    NLevelSystem,
    QubitSystem,
    SpinBosonParams,
    bohr_spectrum,
    qubit_from_matrices,
    spin_boson_hamiltonian,
    spin_boson_to_qubit,
)
from .resonance import (
    ResonanceSet,
    Timescales,
    fermi_golden_rule_holds,
    lamb_shift_R,
    qubit_resonances,
    rate_difference_D,
    timescales,
)
from .dynamics import (
    CustomDiagonal,
    IllustrationCoherent,
    LogicState,
    ReducedDensityMatrix,
    TimeSeries,
    amplitude_constants,
    evolve_leading,
    gibbs_state,
    initial_matrix,
    time_series,
)
