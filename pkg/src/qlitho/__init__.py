"""Entangled-state sub-wavelength lithography: simulation and exposure planning."""

from .deposition import (
    DepositionProfile,
    SamplingGrid,
    brute_force_rate,
    brute_force_values,
    closed_form_rate,
    closed_form_values,
    fourier_harmonics,
    profile_2d,
    profile_brute,
    profile_closed,
    profile_closed_mixture,
)
from .exposure import ExposureResult, FilmModel, required_shots, simulate_exposure
from .fock import (
    Geometry,
    MixedState,
    ModePair,
    PureState,
    apply_absorption,
    apply_pair_phase,
    norm_sq,
    propagate,
    reciprocal_binomial,
    tensor,
)
from .imperfections import (
    DegradationReport,
    LossModel,
    degradation_report,
    fwhm,
    lossy_mixture,
    lower_order_profile,
    top_harmonic_index,
)
from .planner import (
    ExposurePlan,
    PixelAddress,
    PixelSpec,
    chain_geometry,
    entry_state,
    negative_plan,
    partition_table,
    phases_for_pixel,
    pixel_center,
    pixel_from_levels,
    pixel_levels,
    plan_mixture,
    plan_pattern,
    plan_profile,
)

__version__ = "0.1.0"
