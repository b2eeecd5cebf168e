"""Measurement toolchain: interferograms, tilted-lens OAM readout, ring de-multiplexing, D fits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage, optimize

from .analysis import RadialProfile, radial_profile, sample_circle
from .beams import MpovSpec
from .errors import (
    BandLimitError,
    CircleThroughZeroError,
    CutInsideRingWarning,
    DegenerateFitError,
    NegativeSlopeWarning,
    NoDominantLobeError,
    ValidationError,
)
from .grid import ComplexField, GridSpec, check_same_grid, forward_spectrum, inverse_spectrum

TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class IntensityImage:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != self.grid.shape:
            raise ValidationError(f"image shape {arr.shape} does not match grid {self.grid.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class TiltedLensSpec:
    """Thin lens tilted about the y axis, seen as an astigmatic lens.

    ``magnification`` is the lateral magnification of the relay that images the
    field onto the lens. ``z`` defaults to the midpoint between the two line
    foci f*cos(tilt) and f/cos(tilt).
    """

    f: float = 0.5
    tilt: float = 0.5
    z: float | None = None
    magnification: float = 1.0

    def __post_init__(self):
        if not self.f > 0:
            raise ValidationError(f"focal length must be positive, got {self.f}")
        if not 0 < self.tilt < np.pi / 4:
            raise ValidationError(f"tilt must lie in (0, pi/4), got {self.tilt}")
        if self.z is not None and not self.z > 0:
            raise ValidationError(f"propagation distance must be positive, got {self.z}")
        if not self.magnification > 0:
            raise ValidationError(f"magnification must be positive, got {self.magnification}")

    @property
    def fx(self) -> float:
        return self.f * np.cos(self.tilt)

    @property
    def fy(self) -> float:
        return self.f / np.cos(self.tilt)

    @property
    def distance(self) -> float:
        return 0.5 * (self.fx + self.fy) if self.z is None else self.z

    def at_fraction(self, fraction: float) -> "TiltedLensSpec":
        """Same lens observed at fx + fraction * (fy - fx)."""
        z = self.fx + fraction * (self.fy - self.fx)
        return TiltedLensSpec(self.f, self.tilt, z, self.magnification)


@dataclass(frozen=True)
class DiffusionFit:
    D: float
    w0: float
    residual: float
    clamped: bool = False

    def to_dict(self) -> dict:
        return {"D_m2_per_s": self.D, "w0_m": self.w0, "residual_m2": self.residual, "clamped": self.clamped}


def interferogram(signal: ComplexField, reference: ComplexField) -> IntensityImage:
    check_same_grid(signal, reference)
    return IntensityImage(signal.grid, np.abs(signal.values + reference.values) ** 2)


def fringe_sideband(image: IntensityImage, fringe_period: float) -> ComplexField:
    """Fourier-transform fringe analysis for a reference tilted along +x.

    |E + P|^2 with P = exp(i k_c x) contains the cross term E P*, centred on
    kx = -k_c in the spectrum. A disc of radius k_c / 2 around that point is
    kept and transformed back, giving a complex map whose phase is the fringe
    phase (the signal phase less the carrier ramp).
    """
    grid = image.grid
    if not fringe_period >= 4 * grid.dx:
        raise ValidationError(f"fringe period {fringe_period:.4g} m is under-sampled on this grid")
    k_c = TWO_PI / fringe_period
    spec = forward_spectrum(ComplexField(grid, image.values - image.values.mean()))
    KX, KY = grid.k_mesh()
    window = np.hypot(KX + k_c, KY) < k_c / 2
    return inverse_spectrum(spec * window)


def fringe_count_difference(
    image: IntensityImage,
    radius: float,
    fringe_period: float,
    center: tuple[float, float] = (0.0, 0.0),
    samples: int | None = None,
) -> int:
    """Fringes crossed along the lower half of a circle minus those along the upper half.

    Both arcs run from phi = pi to phi = 0 (the lower one through 3 pi / 2).
    Fringe counts are the demodulated fringe phase advance over 2 pi, which
    stays well defined where the fringes bend back near the core. For a
    charge-l vortex the difference is -l: the fork opens by |l| fringes.
    """
    sideband = fringe_sideband(image, fringe_period)
    phi, vals = sample_circle(sideband, radius, center, samples)
    if np.abs(vals).min() <= 1e-9 * np.abs(sideband.values).max():
        raise CircleThroughZeroError(f"circle of radius {radius:.4g} m crosses a fringe-free point")
    steps = np.angle(np.roll(vals, -1) * np.conj(vals))
    half = len(vals) // 2
    # samples run counterclockwise from phi = 0; the upper arc is [0, pi], the lower [pi, 2 pi]
    upper = -steps[:half].sum()  # traversed pi -> 0
    lower = steps[half:].sum()  # traversed pi -> 2 pi
    return int(np.rint((lower - upper) / TWO_PI))


def band_limit(grid: GridSpec, z: float) -> tuple[float, float]:
    """Largest |kx|, |ky| for which the transfer-function phase is sampled without aliasing."""
    k = grid.k
    kx_lim = k / np.sqrt(1 + (2 * z / grid.extent_x) ** 2)
    ky_lim = k / np.sqrt(1 + (2 * z / grid.extent_y) ** 2)
    return kx_lim, ky_lim


def angular_spectrum_propagate(field: ComplexField, z: float, tolerance: float = 1e-3) -> ComplexField:
    """Free-space propagation by ``z`` with a band-limited angular-spectrum transfer function.

    Components beyond the sampling band limit of exp(i z kz) are discarded; if
    they carry more than ``tolerance`` of the spectral power the result would be
    distorted and ``BandLimitError`` is raised instead. Evanescent waves are dropped.
    """
    grid = field.grid
    if z == 0:
        return field
    spec = forward_spectrum(field)
    KX, KY = grid.k_mesh()
    kx_lim, ky_lim = band_limit(grid, abs(z))
    k2 = grid.k**2 - KX**2 - KY**2
    passband = (np.abs(KX) <= kx_lim) & (np.abs(KY) <= ky_lim) & (k2 > 0)
    power = np.abs(spec.values) ** 2
    total = power.sum()
    lost = power[~passband].sum() / total if total > 0 else 0.0
    if lost > tolerance:
        raise BandLimitError(
            f"{lost:.2e} of the spectral power lies beyond the band limit for z={z:.4g} m "
            f"(tolerance {tolerance:.1e}); use a larger window or a smaller distance"
        )
    transfer = np.where(passband, np.exp(1j * z * np.sqrt(np.maximum(k2, 0.0))), 0.0)
    return inverse_spectrum(spec * transfer)


def relay(field: ComplexField, magnification: float) -> ComplexField:
    """Image the field with lateral magnification M: E(x) -> E(x / M) / M."""
    if magnification == 1:
        return field
    return ComplexField(field.grid.scaled(magnification), field.values / magnification)


def tilted_lens_image(field: ComplexField, lens: TiltedLensSpec | None = None) -> IntensityImage:
    lens = lens or TiltedLensSpec()
    relayed = relay(field, lens.magnification)
    grid = relayed.grid
    X, Y = grid.mesh()
    lens_phase = np.exp(-1j * grid.k * (X**2 / (2 * lens.fx) + Y**2 / (2 * lens.fy)))
    after = angular_spectrum_propagate(relayed.with_values(relayed.values * lens_phase), lens.distance)
    return IntensityImage(grid, after.intensity)


def principal_axes(image: np.ndarray) -> tuple[tuple[float, float], np.ndarray, np.ndarray]:
    """Intensity centroid (row, col), second-moment eigenvalues and eigenvectors (columns, (x, y))."""
    total = image.sum()
    rows, cols = np.indices(image.shape)
    cy = (image * rows).sum() / total
    cx = (image * cols).sum() / total
    dxs = cols - cx
    dys = rows - cy
    cxx = (image * dxs**2).sum() / total
    cyy = (image * dys**2).sum() / total
    cxy = (image * dxs * dys).sum() / total
    evals, evecs = np.linalg.eigh(np.array([[cxx, cxy], [cxy, cyy]]))
    return (cy, cx), evals, evecs


def count_dark_stripes(image: IntensityImage | np.ndarray, threshold: float = 0.2, axis: str = "major") -> int:
    """Dark stripes crossing the lobe, counted along a principal axis through its centroid.

    The profile is cut at ``threshold`` times its peak; each gap between
    consecutive bright segments is one stripe. Stripes run across the long
    axis of the astigmatic pattern, so the default scans the major axis.
    """
    values = image.values if isinstance(image, IntensityImage) else np.asarray(image, dtype=float)
    if values.size == 0 or not np.all(np.isfinite(values)) or values.max() <= 0:
        raise NoDominantLobeError("image has no positive intensity")
    (cy, cx), evals, evecs = principal_axes(values)
    if axis == "major":
        direction, spread = evecs[:, 1], evals[1]
    elif axis == "minor":
        direction, spread = evecs[:, 0], evals[0]
    else:
        raise ValidationError(f"axis must be 'major' or 'minor', got {axis!r}")
    half_length = 4 * np.sqrt(spread)
    if not half_length > 1:
        raise NoDominantLobeError("intensity is concentrated in a single pixel")
    t = np.linspace(-half_length, half_length, max(512, int(16 * half_length)))
    profile = ndimage.map_coordinates(values, [cy + t * direction[1], cx + t * direction[0]], order=1)
    if profile.max() <= 0:
        raise NoDominantLobeError("scan line misses the lobe")
    bright = profile > threshold * profile.max()
    segments = np.count_nonzero(bright[1:] & ~bright[:-1]) + int(bright[0])
    return max(segments - 1, 0)


def demultiplex(
    field: ComplexField,
    r_cut: float,
    spec: MpovSpec | None = None,
    center: tuple[float, float] = (0.0, 0.0),
) -> tuple[ComplexField, ComplexField]:
    """Split a field with a binary circular mask into r < r_cut and r >= r_cut parts."""
    if not r_cut > 0:
        raise ValidationError(f"cut radius must be positive, got {r_cut}")
    if spec is not None:
        for inner, outer in zip(spec.rings, spec.rings[1:]):
            if inner.R < r_cut < outer.R and not (inner.R + inner.w < r_cut < outer.R - outer.w):
                warnings.warn(
                    f"cut radius {r_cut:.4g} m is within one half-width of a ring "
                    f"(R={inner.R:.4g} m, R={outer.R:.4g} m)",
                    CutInsideRingWarning,
                    stacklevel=2,
                )
        if not any(inner.R < r_cut < outer.R for inner, outer in zip(spec.rings, spec.rings[1:])):
            warnings.warn(f"cut radius {r_cut:.4g} m does not separate any pair of rings", CutInsideRingWarning, stacklevel=2)
    r, _ = field.grid.polar(center)
    inside = r < r_cut
    zero = np.zeros((), dtype=np.complex128)
    inner_field = field.with_values(np.where(inside, field.values, zero))
    outer_field = field.with_values(np.where(inside, zero, field.values))
    return inner_field, outer_field


def gaussian_width(profile: RadialProfile) -> float:
    """1/e^2 intensity radius w from a least-squares fit of A exp(-2 r^2 / w^2)."""
    r, v = profile.compact()
    if len(r) < 3 or v.max() <= 0:
        raise DegenerateFitError("profile is empty")
    # second-moment estimate as the starting point
    weights = v * r
    guess = np.sqrt(2 * (weights * r**2).sum() / weights.sum())
    model = lambda rr, a, w: a * np.exp(-2 * rr**2 / w**2)  # noqa: E731
    (a, w), _ = optimize.curve_fit(model, r, v, p0=(v.max(), guess))
    return float(abs(w))


def measure_gaussian_width(field: ComplexField, nbins: int = 512) -> float:
    return gaussian_width(radial_profile(field, nbins=nbins))


def fit_diffusion_coefficient(samples: Iterable[tuple[float, float]]) -> DiffusionFit:
    """Least-squares line through (t, w^2): slope / 4 gives D, intercept gives w0^2."""
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 3:
        raise DegenerateFitError("need at least three (t, w) samples")
    t, w = data[:, 0], data[:, 1]
    if len(np.unique(t)) != len(t):
        raise DegenerateFitError("sample times must be distinct")
    if np.any(w <= 0) or not np.all(np.isfinite(data)):
        raise ValidationError("widths must be positive and finite")
    design = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(design, w**2, rcond=None)
    residual = float(np.sqrt(np.mean((design @ (slope, intercept) - w**2) ** 2)))
    if intercept <= 0:
        raise DegenerateFitError(f"fit gives a non-positive w0^2 ({intercept:.3g} m^2)")
    clamped = slope < 0
    if clamped:
        warnings.warn(f"w^2 decreases with time (slope {slope:.3g}); reporting D = 0", NegativeSlopeWarning, stacklevel=2)
        slope = 0.0
    return DiffusionFit(float(slope / 4), float(np.sqrt(intercept)), residual, clamped)


def width_sweep(fields: Sequence[ComplexField], times: Sequence[float], nbins: int = 512) -> list[tuple[float, float]]:
    """(t, fitted Gaussian width) for each retrieved field."""
    return [(float(t), measure_gaussian_width(f, nbins)) for t, f in zip(times, fields)]
