"""Execute a validated scenario and write its artefacts, report and manifest."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .. import __version__
from ..analysis import RadialProfile, analyze, phase_gradient_map, sample_circle, winding_on_circle
from ..beams import (
    MpovSpec,
    PovRingSpec,
    synth_gaussian,
    synth_lg,
    synth_mpov,
    synth_plane_wave,
    synth_pov,
    tilt_for_period,
)
from ..diagnostics import (
    count_dark_stripes,
    demultiplex,
    fit_diffusion_coefficient,
    fringe_count_difference,
    interferogram,
    tilted_lens_image,
    width_sweep,
)
from ..errors import MpovError
from ..grid import ComplexField, GridSpec
from ..imageio import write_intensity_pgm, write_phase_pgm, write_profile_csv, write_width_csv
from ..storage import storage_sweep
from .config import (
    SCHEMA_VERSION,
    AnalysisConfig,
    GaussianBeam,
    LgBeam,
    MpovBeam,
    PovBeam,
    ScenarioConfig,
    build_specs,
)


class StageError(MpovError):
    """A scenario stage failed; wraps the original error and keeps its exit code."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


def time_label(t: float) -> str:
    """5e-6 -> "t5us"; 4e-7 -> "t0p4us". Safe in file names."""
    return "t" + f"{t * 1e6:.6g}".replace(".", "p").replace("-", "m") + "us"


def beam_rings(beam) -> tuple[PovRingSpec, ...]:
    if isinstance(beam, PovBeam):
        return (beam.ring(),)
    if isinstance(beam, MpovBeam):
        return beam.spec().rings
    return ()


def synthesize(grid: GridSpec, beam) -> ComplexField:
    if isinstance(beam, PovBeam):
        return synth_pov(grid, beam.ring())
    if isinstance(beam, MpovBeam):
        return synth_mpov(grid, beam.spec())
    if isinstance(beam, LgBeam):
        return synth_lg(grid, beam.spec())
    if isinstance(beam, GaussianBeam):
        return synth_gaussian(grid, beam.w0, beam.A0)
    raise TypeError(f"unknown beam type {type(beam).__name__}")


def edge_gradients(field: ComplexField, rings, floor: float) -> list[dict]:
    """Mean azimuthal phase gradient on thin annuli at r = R - w and r = R + w."""
    grad = phase_gradient_map(field, floor)
    g_phi = grad.azimuthal(field.grid)
    r, _ = field.grid.polar()
    out = []
    for ring in rings:
        entry = {"R_m": ring.R, "l": ring.l}
        for side, radius in (("inner", ring.R - ring.w), ("outer", ring.R + ring.w)):
            band = (np.abs(r - radius) < field.grid.dx) & np.isfinite(g_phi)
            measured = float(np.mean(g_phi[band])) if radius > 0 and band.any() else None
            entry[side] = {
                "radius_m": radius,
                "measured_rad_per_m": measured,
                "expected_rad_per_m": -ring.l / radius if radius > 0 else None,
            }
        out.append(entry)
    return out


def gap_phase_jumps(field: ComplexField, rings) -> list[dict]:
    """Phase step across the dark gap between neighbouring rings, sampled on circles
    a quarter of the gap inside and outside its midpoint. A value near pi marks a
    zero circle (singularity line) between rings of equal charge."""
    out = []
    for i, (a, b) in enumerate(zip(rings, rings[1:])):
        mid = 0.5 * (a.R + b.R)
        quarter = 0.25 * (b.R - a.R)
        _, inner = sample_circle(field, mid - quarter)
        _, outer = sample_circle(field, mid + quarter, samples=len(inner))
        jump = np.abs(np.angle(outer * np.conj(inner)))
        out.append({"rings": [i, i + 1], "radius_m": mid, "mean_abs_jump_rad": float(jump.mean())})
    return out


def field_metrics(
    field: ComplexField,
    analysis: AnalysisConfig,
    reference: ComplexField | None = None,
    rings: tuple[PovRingSpec, ...] = (),
) -> tuple[dict, RadialProfile]:
    """Scalar observables of one field plus its radial profile. The CLI ``analyze`` path reuses this."""
    report = analyze(
        field,
        nbins=analysis.profile_bins,
        amplitude_ceiling=analysis.singularity_ceiling,
        reference=reference,
        noise_floor=analysis.noise_floor,
    )
    if analysis.singularity_annulus is not None:
        lo, hi = analysis.singularity_annulus
        report.singularities = [s for s in report.singularities if lo < s.radius < hi]
    metrics = report.to_dict()
    metrics["power"] = field.power()
    if len(rings) > 1:
        metrics["gap_phase_jumps"] = gap_phase_jumps(field, rings)
    if analysis.phase_gradient_edges and rings:
        metrics["phase_gradient_edges"] = edge_gradients(field, rings, analysis.gradient_floor)
    return metrics, report.profile


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def json_safe(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def dump_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(json_safe(data), fh, indent=2, sort_keys=False)
        fh.write("\n")


@dataclass
class _Run:
    out_dir: Path
    reproducible: bool
    files: list[str] = dc_field(default_factory=list)
    normalization: dict[str, float] = dc_field(default_factory=dict)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out_dir / name

    def intensity(self, name: str, values: np.ndarray) -> None:
        self.normalization[name] = write_intensity_pgm(self.path(name), values, self.reproducible)

    def phase(self, name: str, values: np.ndarray) -> None:
        write_phase_pgm(self.path(name), values, self.reproducible)


@dataclass
class RunResult:
    out_dir: Path
    report: dict
    manifest: dict


def _manifest(config, config_path, run: _Run, status: str, error: dict | None) -> dict:
    inputs = {}
    if config_path is not None:
        p = Path(config_path)
        inputs["config"] = {"name": p.name, "sha256": _sha256(p)}
    outputs = []
    for name in run.files:
        p = run.out_dir / name
        if p.exists():
            outputs.append({"path": name, "sha256": _sha256(p)})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "scenario": config.scenario,
        "status": status,
        "package_version": __version__,
        "inputs": inputs,
        "parameters": config.model_dump(mode="json"),
        "outputs": outputs,
        "normalization": {"intensity_peak": dict(run.normalization)},
    }
    if error is not None:
        manifest["error"] = error
    if not run.reproducible:
        manifest["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        manifest["numpy_version"] = np.__version__
    return manifest


def run_scenario(
    config: ScenarioConfig,
    out_dir: str | os.PathLike | None = None,
    reproducible: bool = False,
    config_path: str | os.PathLike | None = None,
) -> RunResult:
    """Run every stage. On failure a partial manifest is written and StageError is raised."""
    specs = build_specs(config)  # fail before touching the disk
    grid: GridSpec = specs["grid"]
    out = Path(out_dir or config.output_dir or Path("out") / config.scenario)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(out, reproducible)
    metrics: dict = {"beams": {}}
    diag = config.diagnostics
    stage = "setup"
    try:
        for beam in config.beams:
            rings = beam_rings(beam)
            stage = f"synth:{beam.name}"
            source = synthesize(grid, beam)
            stage = f"store:{beam.name}"
            retrieved = storage_sweep(source, config.storage.D, config.storage.times)
            reference = source if config.analysis.fidelity_reference == "input" else None
            entries = []
            for t, fld in zip(config.storage.times, retrieved):
                label = f"{beam.name}_{time_label(t)}"
                stage = f"analyze:{label}"
                m, profile = field_metrics(fld, config.analysis, reference, rings)
                entry = {"t_s": t, **m}
                write_profile_csv(run.path(f"{label}_profile.csv"), profile)
                if config.images:
                    run.intensity(f"{label}_intensity.pgm", fld.intensity)
                    run.phase(f"{label}_phase.pgm", fld.phase)
                if diag.interferogram is not None:
                    stage = f"interferogram:{label}"
                    entry["interferogram"] = _interferogram(run, label, fld, rings, diag.interferogram)
                parts = {"whole": fld}
                if diag.demux is not None:
                    stage = f"demux:{label}"
                    entry["demux"], parts = _demux(run, label, fld, beam, diag.demux)
                if diag.oam is not None:
                    stage = f"oam:{label}"
                    entry["oam"] = _oam(run, label, parts, diag.oam)
                entries.append(entry)
            beam_metrics = {"kind": beam.kind, "storage": entries}
            if diag.dfit is not None:
                stage = f"dfit:{beam.name}"
                samples = width_sweep(retrieved, config.storage.times, diag.dfit.profile_bins)
                write_width_csv(run.path(f"{beam.name}_widths.csv"), samples)
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    fit = fit_diffusion_coefficient(samples)
                beam_metrics["dfit"] = {
                    **fit.to_dict(),
                    "D_true_m2_per_s": config.storage.D,
                    "widths": [{"t_s": t, "w_m": w} for t, w in samples],
                    "warnings": [str(c.message) for c in caught],
                }
            metrics["beams"][beam.name] = beam_metrics
    except Exception as exc:
        error = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
        dump_json(out / "run.json", _manifest(config, config_path, run, "failed", error))
        raise StageError(stage, exc) from exc

    report = {
        "schema_version": SCHEMA_VERSION,
        "scenario": config.scenario,
        "parameters": config.model_dump(mode="json"),
        "metrics": metrics,
        "files": sorted(run.files) + ["report.json"],
    }
    dump_json(out / "report.json", report)
    run.files.append("report.json")
    manifest = _manifest(config, config_path, run, "ok", None)
    dump_json(out / "run.json", manifest)
    return RunResult(out, report, manifest)


def _interferogram(run: _Run, label: str, fld: ComplexField, rings, cfg) -> dict:
    grid = fld.grid
    amplitude = float(np.abs(fld.values).max())
    plane = synth_plane_wave(grid, tilt_for_period(grid, cfg.fringe_period), 0.0, amplitude)
    image = interferogram(fld, plane)
    run.intensity(f"{label}_interferogram.pgm", image.values)
    radii = cfg.fork_radii or [ring.R for ring in rings]
    forks = [{"radius_m": r, "fringe_difference": fringe_count_difference(image, r, cfg.fringe_period)} for r in radii]
    return {"fringe_period_m": cfg.fringe_period, "forks": forks}


def _demux(run: _Run, label: str, fld: ComplexField, beam, cfg) -> tuple[dict, dict]:
    spec = beam.spec() if isinstance(beam, MpovBeam) else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        inner, outer = demultiplex(fld, cfg.r_cut, spec)
    result = {"r_cut_m": cfg.r_cut, "warnings": [str(c.message) for c in caught]}
    if cfg.winding_radii is not None:
        r_in, r_out = cfg.winding_radii
    elif isinstance(spec, MpovSpec):
        r_in, r_out = spec.rings[0].R, spec.rings[-1].R
    else:
        r_in = r_out = None
    for name, part, radius in (("inner", inner, r_in), ("outer", outer, r_out)):
        result[name] = {
            "power": part.power(),
            "winding_radius_m": radius,
            "winding": winding_on_circle(part, radius) if radius is not None else None,
        }
    return result, {"inner": inner, "outer": outer}


def _oam(run: _Run, label: str, parts: dict, cfg) -> dict:
    result = {}
    for name, part in parts.items():
        lens = cfg.spec(name)
        image = tilted_lens_image(part, lens)
        suffix = "" if name == "whole" else f"_{name}"
        run.intensity(f"{label}{suffix}_lens.pgm", image.values)
        result[name] = {
            "magnification": lens.magnification,
            "z_m": lens.distance,
            "dark_stripes": count_dark_stripes(image),
        }
    return result
