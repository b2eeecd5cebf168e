"""Observables extracted from fields: radial profiles, ring metrics, phase structure, overlap."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import ndimage

from .errors import (
    CircleThroughZeroError,
    HalfMaxNotCrossedError,
    NoUniquePeakError,
    ValidationError,
    ZeroPowerError,
)
from .grid import ComplexField, check_same_grid

TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Azimuthally averaged intensity. Empty bins keep ``bin_count == 0`` and a zero mean."""

    bin_centers: np.ndarray
    mean_intensity: np.ndarray
    bin_count: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.bin_centers, dtype=float)
        m = np.asarray(self.mean_intensity, dtype=float)
        n = np.asarray(self.bin_count, dtype=np.int64)
        if not (c.shape == m.shape == n.shape) or c.ndim != 1:
            raise ValidationError("profile arrays must be 1-D and the same length")
        if np.any(np.diff(c) <= 0):
            raise ValidationError("bin centres must increase strictly")
        if np.any(m < 0):
            raise ValidationError("mean intensity must be non-negative")
        object.__setattr__(self, "bin_centers", c)
        object.__setattr__(self, "mean_intensity", m)
        object.__setattr__(self, "bin_count", n)

    @classmethod
    def from_arrays(cls, radii, intensity) -> "RadialProfile":
        radii = np.asarray(radii, dtype=float)
        return cls(radii, np.asarray(intensity, dtype=float), np.ones(radii.shape, dtype=np.int64))

    @property
    def valid(self) -> np.ndarray:
        return self.bin_count > 0

    @property
    def bin_width(self) -> float:
        return float(self.bin_centers[1] - self.bin_centers[0])

    def compact(self) -> tuple[np.ndarray, np.ndarray]:
        """Centres and means of the non-empty bins."""
        ok = self.valid
        return self.bin_centers[ok], self.mean_intensity[ok]


@dataclass(frozen=True)
class Singularity:
    x: float
    y: float
    charge: int

    def __post_init__(self):
        if self.charge == 0:
            raise ValidationError("a singularity must carry non-zero charge")

    @property
    def radius(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def angle(self) -> float:
        return float(np.mod(np.arctan2(self.y, self.x), TWO_PI))


@dataclass
class AnalysisReport:
    profile: RadialProfile
    fwhm: float | None
    peak_radius: float | None
    singularities: list[Singularity] = field(default_factory=list)
    fidelity_vs_reference: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "fwhm_m": self.fwhm,
            "peak_radius_m": self.peak_radius,
            "singularities": [
                {"x_m": s.x, "y_m": s.y, "charge": s.charge} for s in self.singularities
            ],
            "net_charge": int(sum(s.charge for s in self.singularities)),
            "fidelity_vs_reference": self.fidelity_vs_reference,
            "profile_bins": int(len(self.profile.bin_centers)),
        }


def radial_profile(
    field: ComplexField,
    center: tuple[float, float] = (0.0, 0.0),
    nbins: int = 256,
) -> RadialProfile:
    """Mean |E|^2 in equal-width rings from 0 to the largest inscribed radius."""
    if nbins < 16:
        raise ValidationError(f"need at least 16 bins, got {nbins}")
    grid = field.grid
    cx, cy = center
    half_x, half_y = grid.extent_x / 2, grid.extent_y / 2
    if not (abs(cx) < half_x and abs(cy) < half_y):
        raise ValidationError(f"centre {center} lies outside the window")
    r_max = min(half_x - abs(cx), half_y - abs(cy))
    r, _ = grid.polar(center)
    width = r_max / nbins
    idx = np.floor(r / width).astype(np.int64)
    inside = idx < nbins
    counts = np.bincount(idx[inside], minlength=nbins)
    sums = np.bincount(idx[inside], weights=field.intensity[inside], minlength=nbins)
    means = np.divide(sums, counts, out=np.zeros(nbins), where=counts > 0)
    centers = (np.arange(nbins) + 0.5) * width
    return RadialProfile(centers, means, counts)


def _peak_index(profile: RadialProfile) -> tuple[np.ndarray, np.ndarray, int]:
    r, v = profile.compact()
    if len(v) < 3:
        raise NoUniquePeakError("profile has fewer than three populated bins")
    i = int(np.argmax(v))
    if np.count_nonzero(v == v[i]) > 1:
        raise NoUniquePeakError("profile maximum is attained in more than one bin")
    if i == 0 or i == len(v) - 1:
        raise NoUniquePeakError("profile maximum sits at an end of the radial range")
    return r, v, i


def fwhm(profile: RadialProfile) -> float:
    """Width between the half-maximum crossings on either side of the peak."""
    r, v, i = _peak_index(profile)
    half = v[i] / 2
    below = np.nonzero(v[:i] < half)[0]
    if below.size == 0:
        raise HalfMaxNotCrossedError("intensity never drops below half maximum inside the peak")
    j = below[-1]
    left = r[j] + (half - v[j]) * (r[j + 1] - r[j]) / (v[j + 1] - v[j])
    above = np.nonzero(v[i:] < half)[0]
    if above.size == 0:
        raise HalfMaxNotCrossedError("intensity never drops below half maximum outside the peak")
    j = i + above[0]
    right = r[j - 1] + (half - v[j - 1]) * (r[j] - r[j - 1]) / (v[j] - v[j - 1])
    return float(right - left)


def peak_radius(profile: RadialProfile) -> float:
    """Peak location refined by a parabola through the top bin and its neighbours."""
    r, v, i = _peak_index(profile)
    a, b, c = v[i - 1], v[i], v[i + 1]
    denom = a - 2 * b + c
    if denom == 0:
        return float(r[i])
    offset = 0.5 * (a - c) / denom
    # neighbours may be unevenly spaced when a bin is empty
    step = 0.5 * (r[i + 1] - r[i - 1])
    return float(r[i] + offset * step)


@dataclass(frozen=True, eq=False)
class PhaseGradient:
    """Phase gradient in rad/m; NaN marks cells below the amplitude floor."""

    gx: np.ndarray
    gy: np.ndarray

    def azimuthal(self, grid, center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        """Component along the counterclockwise unit vector e_phi."""
        X, Y = grid.mesh()
        X = X - center[0]
        Y = Y - center[1]
        r = np.hypot(X, Y)
        with np.errstate(invalid="ignore", divide="ignore"):
            return (-Y * self.gx + X * self.gy) / r

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.gx, self.gy)


def phase_gradient_map(field: ComplexField, amplitude_floor: float = 0.05) -> PhaseGradient:
    """Centred differences of the local (unwrapped) phase.

    The wrapped phase step between the two neighbours equals the unwrapped
    difference as long as the phase turns by less than pi over two cells.
    """
    if not 0 < amplitude_floor < 1:
        raise ValidationError(f"amplitude_floor must lie in (0, 1), got {amplitude_floor}")
    v = field.values
    dx = field.grid.dx
    gx = np.full(v.shape, np.nan)
    gy = np.full(v.shape, np.nan)
    gx[:, 1:-1] = np.angle(v[:, 2:] * np.conj(v[:, :-2])) / (2 * dx)
    gy[1:-1, :] = np.angle(v[2:, :] * np.conj(v[:-2, :])) / (2 * dx)
    amp = np.abs(v)
    dark = amp < amplitude_floor * amp.max()
    gx[dark] = np.nan
    gy[dark] = np.nan
    return PhaseGradient(gx, gy)


def _wrap(a: np.ndarray) -> np.ndarray:
    return np.angle(np.exp(1j * a))


def plaquette_windings(values: np.ndarray) -> np.ndarray:
    """Winding of every 2x2 plaquette, counterclockwise in the (x, y) plane.

    Shape (ny - 1, nx - 1); entry [i, j] is the plaquette with lower-left
    corner at sample (i, j).
    """
    ph = np.angle(values)
    d_bottom = _wrap(ph[:-1, 1:] - ph[:-1, :-1])
    d_right = _wrap(ph[1:, 1:] - ph[:-1, 1:])
    d_top = _wrap(ph[1:, :-1] - ph[1:, 1:])
    d_left = _wrap(ph[:-1, :-1] - ph[1:, :-1])
    return np.rint((d_bottom + d_right + d_top + d_left) / TWO_PI).astype(np.int64)


def detect_singularities(
    field: ComplexField,
    amplitude_ceiling: float = 0.15,
    noise_floor: float = 0.0,
) -> list[Singularity]:
    """Phase singularities located by plaquette winding.

    Only plaquettes whose four corners are all darker than
    ``amplitude_ceiling * max|E|`` are searched. Plaquettes that touch
    (8-neighbourhood) merge into one singularity at their |charge|-weighted
    centroid carrying the net charge; clusters netting zero are dropped. ``noise_floor`` (relative to max|E|) skips
    plaquettes whose corners are all below it; leave it at zero unless the
    field carries round-off noise in its dark regions.
    """
    if not 0 < amplitude_ceiling < 1:
        raise ValidationError(f"amplitude_ceiling must lie in (0, 1), got {amplitude_ceiling}")
    grid = field.grid
    v = field.values
    amp = np.abs(v)
    peak = amp.max()
    if peak == 0:
        return []
    corner_max = np.maximum.reduce([amp[:-1, :-1], amp[:-1, 1:], amp[1:, :-1], amp[1:, 1:]])
    searched = corner_max < amplitude_ceiling * peak
    if noise_floor > 0:
        searched &= corner_max >= noise_floor * peak
    wind = np.where(searched, plaquette_windings(v), 0)
    if not wind.any():
        return []
    ny, nx = wind.shape
    # a charge |l| > 1 core aliases across neighbouring plaquettes with mixed signs,
    # so touching plaquettes merge regardless of sign and keep their net charge
    labels, count = ndimage.label(wind != 0, structure=np.ones((3, 3), dtype=bool))
    index = np.arange(1, count + 1)
    weight = np.abs(wind).astype(float)
    charges = ndimage.sum_labels(wind, labels, index)
    mass = ndimage.sum_labels(weight, labels, index)
    rows = ndimage.sum_labels(weight * np.arange(ny)[:, None], labels, index) / mass
    cols = ndimage.sum_labels(weight * np.arange(nx)[None, :], labels, index) / mass
    found = []
    for q, i, j in zip(charges, rows, cols):
        if q == 0:
            continue
        # plaquette (i, j) is centred half a cell above/right of sample (i, j)
        x = float(grid.x[0] + (j + 0.5) * grid.dx)
        y = float(grid.y[0] + (i + 0.5) * grid.dx)
        found.append(Singularity(x, y, int(q)))
    found.sort(key=lambda s: (s.y, s.x))
    return found


def sample_circle(
    field: ComplexField,
    radius: float,
    center: tuple[float, float] = (0.0, 0.0),
    samples: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear samples of the field on a circle; returns (angles, values)."""
    grid = field.grid
    if samples is None:
        samples = max(64, int(np.ceil(4 * TWO_PI * radius / grid.dx)))
    reach = max(abs(center[0]) + radius, abs(center[1]) + radius)
    if radius <= 0 or reach > grid.inscribed_radius - grid.dx:
        raise ValidationError(f"circle of radius {radius:.4g} m does not fit inside the window")
    phi = np.linspace(0, TWO_PI, samples, endpoint=False)
    xs = center[0] + radius * np.cos(phi)
    ys = center[1] + radius * np.sin(phi)
    cols = xs / grid.dx + (grid.nx - 1) / 2
    rows = ys / grid.dx + (grid.ny - 1) / 2
    re = ndimage.map_coordinates(field.values.real, [rows, cols], order=1)
    im = ndimage.map_coordinates(field.values.imag, [rows, cols], order=1)
    return phi, re + 1j * im


def winding_on_circle(
    field: ComplexField,
    radius: float,
    center: tuple[float, float] = (0.0, 0.0),
    samples: int | None = None,
) -> int:
    """Net phase winding (counterclockwise) along a circle, in units of 2 pi."""
    _, vals = sample_circle(field, radius, center, samples)
    amp = np.abs(vals)
    if amp.min() <= 1e-9 * np.abs(field.values).max():
        raise CircleThroughZeroError(f"circle of radius {radius:.4g} m passes through a dark point")
    steps = np.angle(np.roll(vals, -1) * np.conj(vals))
    return int(np.rint(steps.sum() / TWO_PI))


def fidelity(a: ComplexField, b: ComplexField) -> float:
    """|<a|b>|^2 / (P_a P_b), clipped to [0, 1]."""
    check_same_grid(a, b)
    dx2 = a.grid.dx**2
    pa = a.power()
    pb = b.power()
    if pa == 0 or pb == 0:
        raise ZeroPowerError("fidelity needs two fields with non-zero power")
    overlap = np.vdot(a.values, b.values) * dx2
    return float(np.clip(abs(overlap) ** 2 / (pa * pb), 0.0, 1.0))


def analyze(
    field: ComplexField,
    nbins: int = 256,
    amplitude_ceiling: float = 0.15,
    reference: ComplexField | None = None,
    center: tuple[float, float] = (0.0, 0.0),
    noise_floor: float = 0.0,
) -> AnalysisReport:
    """Bundle the standard observables. Ring metrics are None when no single peak exists."""
    profile = radial_profile(field, center, nbins)
    try:
        width = fwhm(profile)
    except (NoUniquePeakError, HalfMaxNotCrossedError):
        width = None
    try:
        peak = peak_radius(profile)
    except NoUniquePeakError:
        peak = None
    sings = detect_singularities(field, amplitude_ceiling, noise_floor)
    fid = fidelity(reference, field) if reference is not None else None
    return AnalysisReport(profile, width, peak, sings, fid)
