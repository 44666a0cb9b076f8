"""Quantum transmission through arbitrary 1D potential barriers.

Fix the transmitted plane wave at the far edge of the barrier, integrate the
stationary wave equation backward to the near edge, and read transmission
and reflection off the wavefunction there.  Cross-checked by a
transfer-matrix solver and a WKB estimate; includes energy sweeps, resonance
analysis against harmonic-well levels, and a shooting eigensolver for
wavefunction comparisons.
"""

from .analysis import (
    BoundState,
    ResonancePeak,
    TransmissionCurve,
    compare_to_harmonic,
    default_bracket,
    density_peak_positions,
    density_profile,
    find_resonances,
    harmonic_omega_from_parabola,
    scan_resonances,
    shoot_eigenstate,
    sweep,
)
from .errors import (
    BarrierscopeError,
    BracketingError,
    ClosedChannelError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
    InvalidIncidenceError,
    PotentialParseError,
)
from .integrate import (
    IntegrationSettings,
    Trajectory,
    initial_conditions,
    integrate_backward,
    propagate_backward,
)
from .potential import (
    BUILTINS,
    Constant,
    Expression,
    Polynomial,
    Potential,
    Segment,
    builtin_arbitrary,
    builtin_double_barrier,
    builtin_parabolic,
    builtin_square,
    mirrored,
    parse_potential,
)
from .solvers import (
    ScatteringSolution,
    forbidden_intervals,
    solve,
    solve_backward,
    solve_transfer_matrix,
    solve_wkb,
)
from .units import (
    ELECTRON,
    EVANESCENT,
    HBAR2_OVER_2M_ELECTRON,
    PROPAGATING,
    UnitSystem,
    WaveNumber,
    wavevector,
)

__version__ = "0.1.0"
