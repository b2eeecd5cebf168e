"""Beam synthesis: perfect optical vortices, multi-ring stacks, LG and plane waves.

Phase convention: a ring of charge ``l`` carries exp[-i(l*phi + phi0)], so the
phase seen by a detector winds by -l around the ring. ``l`` itself is what we
report as the OAM value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AliasingError, EqualChargeError, RingTooLargeError, SpacingError, ValidationError
from .grid import ComplexField, GridSpec

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class PovRingSpec:
    R: float
    w: float
    l: int = 0
    phi0: float = 0.0
    A0: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValidationError(f"ring radius must be positive, got {self.R}")
        if not self.w > 0:
            raise ValidationError(f"ring half-width must be positive, got {self.w}")
        if not self.A0 >= 0:
            raise ValidationError(f"A0 must be non-negative, got {self.A0}")
        if int(self.l) != self.l:
            raise ValidationError(f"charge must be an integer, got {self.l}")
        object.__setattr__(self, "l", int(self.l))


@dataclass(frozen=True)
class MpovSpec:
    """Concentric rings, innermost first.

    Adjacent rings must satisfy R[m+1] - R[m] > 2 * max(w[m], w[m+1]) unless
    ``waive_spacing`` is set.
    """

    rings: tuple[PovRingSpec, ...]
    waive_spacing: bool = False

    def __post_init__(self):
        rings = tuple(self.rings)
        object.__setattr__(self, "rings", rings)
        if not rings:
            raise ValidationError("an MPOV needs at least one ring")
        for inner, outer in zip(rings, rings[1:]):
            if not outer.R > inner.R:
                raise ValidationError("ring radii must increase strictly from the innermost ring")
            gap = outer.R - inner.R
            limit = 2 * max(inner.w, outer.w)
            if not self.waive_spacing and not gap > limit:
                raise SpacingError(
                    f"rings at R={inner.R:.4g} and R={outer.R:.4g} are {gap:.4g} m apart; "
                    f"need more than {limit:.4g} m (set waive_spacing to allow overlap)"
                )

    @classmethod
    def from_lists(
        cls,
        radii: Sequence[float],
        charges: Sequence[int],
        phases: Sequence[float] | None = None,
        w: float | Sequence[float] = 1.0,
        A0: float | Sequence[float] = 1.0,
        waive_spacing: bool = False,
    ) -> "MpovSpec":
        n = len(radii)
        phases = [0.0] * n if phases is None else list(phases)
        ws = [w] * n if np.isscalar(w) else list(w)
        amps = [A0] * n if np.isscalar(A0) else list(A0)
        if not (len(charges) == len(phases) == len(ws) == len(amps) == n):
            raise ValidationError("ring parameter lists have different lengths")
        rings = tuple(PovRingSpec(R, wm, l, p, a) for R, l, p, wm, a in zip(radii, charges, phases, ws, amps))
        return cls(rings, waive_spacing=waive_spacing)


@dataclass(frozen=True)
class LgSpec:
    """Laguerre-Gaussian mode with p = 0."""

    w0: float
    l: int = 0

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValidationError(f"waist must be positive, got {self.w0}")
        object.__setattr__(self, "l", int(self.l))


def _pov_values(grid: GridSpec, ring: PovRingSpec, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    radial = ring.A0 * np.exp(-((r - ring.R) ** 2) / ring.w**2)
    return radial * np.exp(-1j * (ring.l * phi + ring.phi0))


def _check_ring_fits(grid: GridSpec, ring: PovRingSpec) -> None:
    needed = 2 * (ring.R + 3 * ring.w)
    window = 2 * grid.inscribed_radius
    if window < needed:
        raise RingTooLargeError(
            f"ring R={ring.R:.4g} m, w={ring.w:.4g} m needs a {needed:.4g} m window; grid gives {window:.4g} m"
        )


def synth_pov(grid: GridSpec, ring: PovRingSpec) -> ComplexField:
    _check_ring_fits(grid, ring)
    r, phi = grid.polar()
    return ComplexField(grid, _pov_values(grid, ring, r, phi))


def synth_mpov(grid: GridSpec, spec: MpovSpec) -> ComplexField:
    for ring in spec.rings:
        _check_ring_fits(grid, ring)
    r, phi = grid.polar()
    total = np.zeros(grid.shape, dtype=np.complex128)
    for ring in spec.rings:
        total += _pov_values(grid, ring, r, phi)
    return ComplexField(grid, total)


def _check_lg_fits(grid: GridSpec, spec: LgSpec) -> None:
    reach = 3 * spec.w0 * np.sqrt(1 + abs(spec.l))
    if reach > grid.inscribed_radius:
        raise RingTooLargeError(
            f"LG mode w0={spec.w0:.4g} m, l={spec.l} reaches {reach:.4g} m; "
            f"window half-width is {grid.inscribed_radius:.4g} m"
        )


def _check_gaussian_fits(grid: GridSpec, w0: float) -> None:
    if not w0 > 0:
        raise ValidationError(f"waist must be positive, got {w0}")
    if 3 * w0 > grid.inscribed_radius:
        raise RingTooLargeError(f"Gaussian w0={w0:.4g} m does not fit within the window")


def check_fits(grid: GridSpec, spec: PovRingSpec | MpovSpec | LgSpec | float) -> None:
    """Raise the error synthesis would raise, without building the field. A float is a Gaussian waist."""
    if isinstance(spec, PovRingSpec):
        _check_ring_fits(grid, spec)
    elif isinstance(spec, MpovSpec):
        for ring in spec.rings:
            _check_ring_fits(grid, ring)
    elif isinstance(spec, LgSpec):
        _check_lg_fits(grid, spec)
    else:
        _check_gaussian_fits(grid, float(spec))


def synth_lg(grid: GridSpec, spec: LgSpec) -> ComplexField:
    """(x + i y)^l exp(-r^2/w0^2) scaled to unit power; l < 0 uses (x - i y)^|l|."""
    _check_lg_fits(grid, spec)
    X, Y = grid.mesh()
    sign = 1 if spec.l >= 0 else -1
    # scale by w0 before raising to the power to keep magnitudes near 1
    z = (X + 1j * sign * Y) / spec.w0
    values = z ** abs(spec.l) * np.exp(-(X**2 + Y**2) / spec.w0**2)
    norm = np.sqrt((np.abs(values) ** 2).sum() * grid.dx**2)
    return ComplexField(grid, values / norm)


def synth_gaussian(grid: GridSpec, w0: float, amplitude: float = 1.0) -> ComplexField:
    """amplitude * exp(-r^2/w0^2); ``w0`` is the 1/e^2 intensity radius."""
    _check_gaussian_fits(grid, w0)
    X, Y = grid.mesh()
    return ComplexField(grid, amplitude * np.exp(-(X**2 + Y**2) / w0**2))


def fringe_period(grid: GridSpec, tilt_x: float, tilt_y: float) -> float:
    tilt = np.hypot(tilt_x, tilt_y)
    return np.inf if tilt == 0 else TWO_PI / (grid.k * tilt)


def synth_plane_wave(grid: GridSpec, tilt_x: float = 0.0, tilt_y: float = 0.0, amplitude: complex = 1.0) -> ComplexField:
    period = fringe_period(grid, tilt_x, tilt_y)
    if period < 4 * grid.dx:
        raise AliasingError(
            f"tilt gives a fringe period of {period / grid.dx:.3g} samples; at least 4 are required"
        )
    X, Y = grid.mesh()
    return ComplexField(grid, amplitude * np.exp(1j * grid.k * (X * tilt_x + Y * tilt_y)))


def tilt_for_period(grid: GridSpec, period: float) -> float:
    """Plane-wave tilt (radians) that produces the given fringe period."""
    return TWO_PI / (grid.k * period)


def predict_singularity_angles(ring_a: PovRingSpec, ring_b: PovRingSpec) -> list[float]:
    """Angles on the mid-circle where two rings are exactly out of phase.

    Solves (l_b - l_a) * phi + (phi0_b - phi0_a) = pi (mod 2 pi); the
    singularities sit near radius (R_a + R_b) / 2. Sorted, in [0, 2 pi).
    """
    n = ring_b.l - ring_a.l
    if n == 0:
        raise EqualChargeError(
            "equal charges give no isolated singularities (a pi offset makes a singularity line instead)"
        )
    dphi = ring_b.phi0 - ring_a.phi0
    angles = [np.mod((np.pi - dphi + TWO_PI * m) / n, TWO_PI) for m in range(abs(n))]
    # fold values that round to 2 pi back onto 0
    return sorted(0.0 if np.isclose(a, TWO_PI) else float(a) for a in angles)


def singularity_radius(ring_a: PovRingSpec, ring_b: PovRingSpec) -> float:
    return 0.5 * (ring_a.R + ring_b.R)
