"""Retrieval after storage, modelled as diffusion blur of the stored complex field."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError, WrapAroundError
from .grid import ComplexField, GridSpec, SpectralField, forward_spectrum, inverse_spectrum

DEFAULT_D = 2.5e-3  # m^2/s, i.e. 25 cm^2/s


@dataclass(frozen=True)
class StorageParams:
    D: float = DEFAULT_D
    dt: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.D) and self.D >= 0):
            raise ValidationError(f"diffusion coefficient must be >= 0, got {self.D}")
        if not (np.isfinite(self.dt) and self.dt >= 0):
            raise ValidationError(f"storage time must be >= 0, got {self.dt}")

    @property
    def diffusion_length(self) -> float:
        """sqrt(4 D dt): the 1/e radius of the normalised propagator."""
        return float(np.sqrt(4 * self.D * self.dt))


def diffusion_kernel_spectrum(grid: GridSpec, params: StorageParams) -> SpectralField:
    """exp(-D dt |k|^2), the transform of the unit-integral Gaussian propagator."""
    KX, KY = grid.k_mesh()
    return SpectralField(grid, np.exp(-params.D * params.dt * (KX**2 + KY**2)))


def check_wraparound(grid: GridSpec, params: StorageParams) -> None:
    window = min(grid.extent_x, grid.extent_y)
    if params.diffusion_length > window / 4:
        raise WrapAroundError(
            f"diffusion length {params.diffusion_length:.4g} m exceeds a quarter of the "
            f"{window:.4g} m window",
            time=params.dt,
        )


def diffuse(field: ComplexField, params: StorageParams) -> ComplexField:
    check_wraparound(field.grid, params)
    kernel = diffusion_kernel_spectrum(field.grid, params)
    return inverse_spectrum(forward_spectrum(field) * kernel)


def storage_sweep(field: ComplexField, D: float, times: Sequence[float]) -> list[ComplexField]:
    """One retrieved field per storage time, in input order. t = 0 returns the input."""
    out = []
    for t in times:
        params = StorageParams(D, t)
        if t == 0:
            out.append(field)
            continue
        try:
            out.append(diffuse(field, params))
        except WrapAroundError as exc:
            raise WrapAroundError(f"storage time {t:.4g} s: {exc}", time=t) from exc
    return out


def lg_scaling_factor(w0: float, params: StorageParams) -> float:
    """Waist growth s(t) = sqrt(1 + 4 D t / w0^2) of a diffused LG mode."""
    return float(np.sqrt(1 + 4 * params.D * params.dt / w0**2))
