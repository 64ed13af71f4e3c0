"""darkstate: spontaneous-emission spectra and dark-state trapping for
driven loop-coupled emitters.

Two scenario families share one four-amplitude chain model: a five-level
loop with three decaying upper states (D2-style) and a single-loss loop with
four ground states (D1-style).  Spectra are available through a closed-form
Laplace-domain path and an independent time-domain oracle.
"""
from .errors import (
    AlignmentOutOfRange,
    DarkstateError,
    DivisionByZeroDrive,
    GridMismatch,
    GridTooCoarse,
    GridTooNarrow,
    NonPositiveRate,
    NotAnalyticAdmissible,
    NotConverged,
    PoleHit,
    SingularSystem,
    StepSizeUnderflow,
    UnknownPreset,
    UnnormalizedInitialState,
)
from .model import (
    D1System,
    D2System,
    DriveField,
    ScenarioPreset,
    ValidationReport,
    analytic_admissible,
    d1_to_chain,
    load_scenario,
    preset,
    preset_names,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_d1_system,
    validate_system,
)
from .spectrum import (
    PoleTerm,
    QuarticPoly,
    SpectrumResult,
    branch_numerator_s,
    characteristic_quartic,
    coupling_matrix,
    d1_spectrum,
    laplace_solve_oracle,
    quartic_roots,
    spectrum_analytic,
    steady_state_amplitudes,
)
from .dynamics import (
    AmplitudeTrajectory,
    branch_amplitude_numeric,
    propagate,
    spectrum_time_domain,
    trapped_fraction,
)
from .trapping import (
    SgcWitness,
    TrappingReport,
    d1_trapping_check,
    fgc_central_numerator,
    fgc_check,
    fgc_solve,
    sgc_constant_term,
    sgc_feasible,
)
from .analysis import (
    ConservationResult,
    Peak,
    PeakAnalysis,
    compare_spectra,
    conservation_check,
    count_spectral_lines,
    default_grid,
    find_peaks,
    integrated_area,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
