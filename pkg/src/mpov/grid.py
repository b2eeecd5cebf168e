"""Sampling lattice, complex field containers and the unitary spectral transform."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import GridMismatchError, ValidationError

MIN_SAMPLES = 16
DEFAULT_WAVELENGTH = 795e-9


@dataclass(frozen=True)
class GridSpec:
    """Square-pixel lattice with cell-centred coordinates.

    Sample ``i`` along x sits at ``(i - (nx - 1) / 2) * dx`` so the origin is
    the geometric centre of the window (between samples when ``nx`` is even).
    """

    nx: int
    ny: int
    dx: float
    wavelength: float = DEFAULT_WAVELENGTH

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if isinstance(n, bool) or int(n) != n:
                raise ValidationError(f"{name} must be an integer, got {n!r}")
            if n < MIN_SAMPLES:
                raise ValidationError(f"{name} must be >= {MIN_SAMPLES}, got {n}")
            object.__setattr__(self, name, int(n))
        if not np.isfinite(self.dx) or self.dx <= 0:
            raise ValidationError(f"dx must be a positive length, got {self.dx!r}")
        if not np.isfinite(self.wavelength) or self.wavelength <= 0:
            raise ValidationError(f"wavelength must be positive, got {self.wavelength!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def extent_x(self) -> float:
        return self.nx * self.dx

    @property
    def extent_y(self) -> float:
        return self.ny * self.dx

    @property
    def inscribed_radius(self) -> float:
        """Half the shorter window side."""
        return 0.5 * min(self.extent_x, self.extent_y)

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - (self.nx - 1) / 2) * self.dx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - (self.ny - 1) / 2) * self.dx

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of shape (ny, nx); rows run along y."""
        return np.meshgrid(self.x, self.y)

    def polar(self, center: tuple[float, float] = (0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        """(r, phi) with phi counterclockwise from +x, folded into [0, 2*pi)."""
        X, Y = self.mesh()
        X = X - center[0]
        Y = Y - center[1]
        return np.hypot(X, Y), np.mod(np.arctan2(Y, X), 2 * np.pi)

    @property
    def kx(self) -> np.ndarray:
        """Angular spatial frequencies in ascending order, DC at index nx // 2."""
        return 2 * np.pi * (np.arange(self.nx) - self.nx // 2) / (self.nx * self.dx)

    @property
    def ky(self) -> np.ndarray:
        return 2 * np.pi * (np.arange(self.ny) - self.ny // 2) / (self.ny * self.dx)

    def k_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.kx, self.ky)

    def scaled(self, factor: float) -> "GridSpec":
        """Same sample counts with the pitch multiplied by ``factor``."""
        return GridSpec(self.nx, self.ny, self.dx * factor, self.wavelength)


def make_grid(nx: int, ny: int, dx: float, wavelength: float = DEFAULT_WAVELENGTH) -> GridSpec:
    return GridSpec(nx, ny, dx, wavelength)


def _frozen(values: np.ndarray, shape: tuple[int, int], dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim == 1 and arr.size == shape[0] * shape[1]:
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise ValidationError(f"values shape {arr.shape} does not match grid shape {shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("field values must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex scalar field on a grid. Values are copied and frozen."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.shape, np.complex128))

    @cached_property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    def power(self) -> float:
        """Total power, sum |E|^2 dx^2."""
        return float(self.intensity.sum() * self.grid.dx**2)

    def amplitude_integral(self) -> complex:
        return complex(self.values.sum() * self.grid.dx**2)

    def with_values(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        check_same_grid(self, other)
        return ComplexField(self.grid, self.values + other.values)

    def __mul__(self, scalar: complex) -> "ComplexField":
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Spectrum in ascending-frequency order; see ``GridSpec.kx``/``ky``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.shape, np.complex128))

    def power(self) -> float:
        return float((np.abs(self.values) ** 2).sum())

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise GridMismatchError("spectra live on different grids")
            other = other.values
        return SpectralField(self.grid, self.values * other)

    __rmul__ = __mul__


def check_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def _centering_phase(n: int) -> np.ndarray:
    # exp(+i k_n x_c) for the offset x_c = (n - 1) / 2 * dx of sample 0 from the origin
    shifted = np.arange(n) - n // 2
    return np.exp(1j * np.pi * shifted * (n - 1) / n)


def forward_spectrum(field: ComplexField, workers: int | None = None) -> SpectralField:
    """Unitary DFT referred to the cell-centred coordinates.

    F(k) = N^-1/2 sum_j f(x_j) exp(-i k x_j) per axis, so a real input that is
    even about the window centre has a real spectrum, and Parseval holds
    without extra factors.
    """
    grid = field.grid
    spec = scipy.fft.fftshift(scipy.fft.fft2(field.values, norm="ortho", workers=workers))
    spec *= _centering_phase(grid.ny)[:, None]
    spec *= _centering_phase(grid.nx)[None, :]
    return SpectralField(grid, spec)


def inverse_spectrum(spec: SpectralField, workers: int | None = None) -> ComplexField:
    grid = spec.grid
    tmp = spec.values * np.conj(_centering_phase(grid.ny))[:, None]
    tmp *= np.conj(_centering_phase(grid.nx))[None, :]
    return ComplexField(grid, scipy.fft.ifft2(scipy.fft.ifftshift(tmp), norm="ortho", workers=workers))
