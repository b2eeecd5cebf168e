"""Simulation of perfect optical vortex storage under atomic diffusion."""

from .analysis import (
    AnalysisReport,
    PhaseGradient,
    RadialProfile,
    Singularity,
    analyze,
    detect_singularities,
    fidelity,
    fwhm,
    peak_radius,
    phase_gradient_map,
    radial_profile,
    winding_on_circle,
)
from .beams import (
    LgSpec,
    MpovSpec,
    PovRingSpec,
    check_fits,
    predict_singularity_angles,
    synth_gaussian,
    synth_lg,
    synth_mpov,
    synth_plane_wave,
    synth_pov,
    tilt_for_period,
)
from .diagnostics import (
    DiffusionFit,
    IntensityImage,
    TiltedLensSpec,
    angular_spectrum_propagate,
    count_dark_stripes,
    demultiplex,
    fit_diffusion_coefficient,
    fringe_count_difference,
    fringe_sideband,
    interferogram,
    measure_gaussian_width,
    tilted_lens_image,
    width_sweep,
)
from .fieldio import read_field, write_field
from .grid import ComplexField, GridSpec, SpectralField, forward_spectrum, inverse_spectrum, make_grid
from .storage import StorageParams, diffuse, diffusion_kernel_spectrum, storage_sweep

__version__ = "0.1.0"
