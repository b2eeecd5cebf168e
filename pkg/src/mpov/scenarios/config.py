"""Scenario configuration files (YAML, ``schema_version: 1``).

Every length, time, diffusivity and angle may carry a unit suffix; bare
numbers are SI. Validation runs before any computation so a bad file fails
fast with field paths and line numbers.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import pydantic
import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from .. import units
from ..beams import LgSpec, MpovSpec, PovRingSpec, check_fits
from ..diagnostics import TiltedLensSpec
from ..errors import MpovError, ValidationError
from ..grid import GridSpec
from ..storage import DEFAULT_D, StorageParams, check_wraparound

SCHEMA_VERSION = 1

Length = Annotated[float, BeforeValidator(units.length)]
Duration = Annotated[float, BeforeValidator(units.duration)]
Diffusivity = Annotated[float, BeforeValidator(units.diffusivity)]
Angle = Annotated[float, BeforeValidator(units.angle)]


class ConfigError(ValidationError):
    """Schema or parse problem in a scenario file."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Model):
    nx: int = 1024
    ny: int = 1024
    dx: Length = 4e-6
    wavelength: Length = 795e-9

    def build(self) -> GridSpec:
        return GridSpec(self.nx, self.ny, self.dx, self.wavelength)


class RingConfig(_Model):
    R: Length
    l: int = 0
    phi0: Angle = 0.0
    w: Optional[Length] = None
    A0: Optional[float] = None


class PovBeam(_Model):
    kind: Literal["pov"]
    name: str
    R: Length
    w: Length
    l: int = 0
    phi0: Angle = 0.0
    A0: float = 1.0

    def ring(self) -> PovRingSpec:
        return PovRingSpec(self.R, self.w, self.l, self.phi0, self.A0)


class MpovBeam(_Model):
    kind: Literal["mpov"]
    name: str
    w: Length
    A0: float = 1.0
    rings: list[RingConfig] = Field(min_length=1)
    waive_spacing: bool = False

    def spec(self) -> MpovSpec:
        rings = tuple(
            PovRingSpec(r.R, self.w if r.w is None else r.w, r.l, r.phi0, self.A0 if r.A0 is None else r.A0)
            for r in self.rings
        )
        return MpovSpec(rings, waive_spacing=self.waive_spacing)


class LgBeam(_Model):
    kind: Literal["lg"]
    name: str
    w0: Length
    l: int = 0

    def spec(self) -> LgSpec:
        return LgSpec(self.w0, self.l)


class GaussianBeam(_Model):
    kind: Literal["gaussian"]
    name: str
    w0: Length
    A0: float = 1.0


Beam = Annotated[Union[PovBeam, MpovBeam, LgBeam, GaussianBeam], Field(discriminator="kind")]


class StorageConfig(_Model):
    D: Diffusivity = DEFAULT_D
    times: list[Duration] = Field(default_factory=lambda: [0.0], min_length=1)


class AnalysisConfig(_Model):
    profile_bins: int = Field(256, ge=16)
    singularity_ceiling: float = Field(0.15, gt=0, lt=1)
    noise_floor: float = Field(1e-12, ge=0, lt=1)
    fidelity_reference: Literal["input", "none"] = "input"
    # only singularities with r_min < r < r_max are reported when set
    singularity_annulus: Optional[tuple[Length, Length]] = None
    phase_gradient_edges: bool = False
    gradient_floor: float = Field(0.05, gt=0, lt=1)


class InterferogramConfig(_Model):
    fringe_period: Length
    fork_radii: list[Length] = Field(default_factory=list)


class LensConfig(_Model):
    f: Length = 0.5
    tilt: Angle = 0.5
    z: Optional[Length] = None
    magnification: float = Field(1.0, gt=0)
    inner_magnification: Optional[float] = Field(None, gt=0)
    outer_magnification: Optional[float] = Field(None, gt=0)

    def spec(self, part: str = "whole") -> TiltedLensSpec:
        m = {"inner": self.inner_magnification, "outer": self.outer_magnification}.get(part)
        return TiltedLensSpec(self.f, self.tilt, self.z, self.magnification if m is None else m)


class DemuxConfig(_Model):
    r_cut: Length
    winding_radii: Optional[tuple[Length, Length]] = None


class DfitConfig(_Model):
    profile_bins: int = Field(512, ge=16)


class DiagnosticsConfig(_Model):
    interferogram: Optional[InterferogramConfig] = None
    demux: Optional[DemuxConfig] = None
    oam: Optional[LensConfig] = None
    dfit: Optional[DfitConfig] = None


class ScenarioConfig(_Model):
    schema_version: int
    scenario: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    description: str = ""
    grid: GridConfig = GridConfig()
    beams: list[Beam] = Field(min_length=1)
    storage: StorageConfig = StorageConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    images: bool = True
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}; this build reads {SCHEMA_VERSION}")
        names = [b.name for b in self.beams]
        if len(set(names)) != len(names):
            raise ValueError("beam names must be unique")
        for name in names:
            if not name.replace("_", "").replace("-", "").isalnum():
                raise ValueError(f"beam name {name!r} must be alphanumeric with - or _")
        if self.diagnostics.dfit is not None and len(set(self.storage.times)) < 3:
            raise ValueError("diagnostics.dfit needs at least three distinct storage times")
        if any(t < 0 for t in self.storage.times):
            raise ValueError("storage times must be >= 0")
        return self


def _line_of(node: yaml.Node | None, loc: tuple) -> int | None:
    """Best-effort line number (1-based) of a pydantic error location in the YAML tree."""
    line = None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = v
                    line = k.start_mark.line + 1
                    break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        # discriminator tags and similar synthetic keys keep the current node
    if node is not None:
        line = node.start_mark.line + 1
    return line


def _format_errors(exc: pydantic.ValidationError, root: yaml.Node | None, source: str) -> str:
    lines = []
    for err in exc.errors():
        loc = tuple(err["loc"])
        where = ".".join(str(p) for p in loc) or "<root>"
        line = _line_of(root, loc)
        prefix = f"{source}:{line}: " if line else f"{source}: "
        lines.append(f"{prefix}{where}: {err['msg']}")
    return "\n".join(lines)


def _validate(data: Any, root: yaml.Node | None, source: str) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: scenario file must contain a mapping (got {type(data).__name__})")
    try:
        config = ScenarioConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        raise ConfigError(_format_errors(exc, root, source)) from None
    try:
        build_specs(config)
    except MpovError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return config


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: YAML syntax error: {exc}") from None
    return _validate(data, root, source)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def build_specs(config: ScenarioConfig) -> dict:
    """Run every module validator the scenario will need, without computing fields."""
    grid = config.grid.build()
    specs = {}
    for beam in config.beams:
        if isinstance(beam, PovBeam):
            specs[beam.name] = beam.ring()
        elif isinstance(beam, MpovBeam):
            specs[beam.name] = beam.spec()
        elif isinstance(beam, LgBeam):
            specs[beam.name] = beam.spec()
        else:
            specs[beam.name] = beam.w0
        check_fits(grid, specs[beam.name])
    for t in config.storage.times:
        check_wraparound(grid, StorageParams(config.storage.D, t))
    if config.diagnostics.oam is not None:
        for part in ("whole", "inner", "outer"):
            config.diagnostics.oam.spec(part)
    return {"grid": grid, "beams": specs}
