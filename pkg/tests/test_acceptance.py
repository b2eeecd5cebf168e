"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run alone with ``python tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py -s``.
The lines are also collected into the pytest terminal summary.
"""

from __future__ import annotations

import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from mpov import (
    MpovSpec,
    PovRingSpec,
    StorageParams,
    count_dark_stripes,
    demultiplex,
    detect_singularities,
    diffuse,
    fidelity,
    fit_diffusion_coefficient,
    fwhm,
    make_grid,
    peak_radius,
    predict_singularity_angles,
    radial_profile,
    storage_sweep,
    synth_gaussian,
    synth_lg,
    synth_mpov,
    synth_pov,
    tilted_lens_image,
    winding_on_circle,
)
from mpov.beams import LgSpec
from mpov.diagnostics import TiltedLensSpec, measure_gaussian_width, width_sweep
from mpov.scenarios import bundled_names, load_config, resolve, run_scenario

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

D = 2.5e-3  # 25 cm^2/s
MM, UM, US = 1e-3, 1e-6, 1e-6


def report(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def grid():
    return make_grid(1024, 1024, 4e-6)


@pytest.fixture(scope="module")
def pov_results(grid):
    """Peak shift (units of w) and FWHM growth after 5 us for l = 0..5."""
    R, w = 0.45 * MM, 0.14 * MM
    out = {}
    for l in range(6):
        field = synth_pov(grid, PovRingSpec(R, w, l))
        before = radial_profile(field, nbins=512)
        after = radial_profile(diffuse(field, StorageParams(D, 5 * US)), nbins=512)
        out[l] = (
            (peak_radius(after) - R) / w,
            fwhm(after) / fwhm(before) - 1,
        )
    return out


def test_criterion_01_gaussian_diffusion(grid):
    worst, slowest = 0.0, 0.0
    for w0 in (0.1 * MM, 0.2 * MM, 0.4 * MM):
        for t in (5 * US, 10 * US, 30 * US):
            start = time.perf_counter()
            field = diffuse(synth_gaussian(grid, w0), StorageParams(D, t))
            measured = measure_gaussian_width(field, nbins=512)
            slowest = max(slowest, time.perf_counter() - start)
            expected = np.sqrt(w0**2 + 4 * D * t)
            worst = max(worst, abs(measured / expected - 1))
    report(1, worst < 5e-3 and slowest < 5.0, f"max width error {worst:.2e} (< 5e-3), slowest case {slowest:.2f} s (< 5 s)")


def test_criterion_02_vortex_gaussian_scaling(grid):
    w0 = 0.1 * MM
    X, Y = grid.mesh()
    worst = 0.0
    for l in (1, 2, 3):
        source = synth_lg(grid, LgSpec(w0, l))
        for t in (5 * US, 10 * US):
            out = diffuse(source, StorageParams(D, t)).values
            width2 = w0**2 + 4 * D * t
            analytic = (X + 1j * Y) ** l * np.exp(-(X**2 + Y**2) / width2)
            scale = np.vdot(analytic, out) / np.vdot(analytic, analytic)
            rel = np.linalg.norm(out - scale * analytic) / np.linalg.norm(out)
            worst = max(worst, rel)
    report(2, worst < 1e-6, f"max relative RMS {worst:.2e} (< 1e-6) for l in 1..3")


def test_criterion_03_brute_force_convolution(rng):
    grid = make_grid(64, 64, 10e-6)
    dt = 1 * US
    values = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    from mpov import ComplexField

    field = ComplexField(grid, values)
    spectral = diffuse(field, StorageParams(D, dt)).values

    # periodic direct convolution with the unit-integral Gaussian, images m in -2..2
    n = 64
    offsets = np.arange(n)
    direct = np.zeros_like(values)
    s2 = 4 * D * dt
    for a in offsets:
        for b in offsets:
            weight = 0.0
            for my in range(-2, 3):
                for mx in range(-2, 3):
                    ddx = (b + mx * n) * grid.dx
                    ddy = (a + my * n) * grid.dx
                    weight += np.exp(-(ddx**2 + ddy**2) / s2)
            weight *= grid.dx**2 / (np.pi * s2)
            direct += weight * np.roll(np.roll(values, a, axis=0), b, axis=1)
    rms = np.sqrt(np.mean(np.abs(spectral - direct) ** 2))
    report(3, rms < 1e-8, f"RMS difference {rms:.2e} (< 1e-8) on a 64x64 grid")


def test_criterion_04_ring_profiles(pov_results):
    shift0, growth0 = pov_results[0]
    shift5, growth5 = pov_results[5]
    directions = shift0 < 0 < shift5

    def within(value, target):
        return abs(value / target - 1) <= 0.30

    magnitudes = within(-shift0, 0.26) and within(shift5, 0.51)
    growths = within(growth0, 0.97) and within(growth5, 0.80)
    report(
        4,
        directions and magnitudes and growths,
        f"l=0 shift {shift0:+.3f} w, FWHM +{growth0:.1%}; l=5 shift {shift5:+.3f} w, FWHM +{growth5:.1%} "
        f"(targets -0.26 w / +97%, +0.51 w / +80%, +-30%)",
    )


def test_criterion_05_crossover(pov_results):
    signs = {l: np.sign(pov_results[l][0]) for l in range(6)}
    passed = all(signs[l] < 0 for l in (0, 1, 2)) and all(signs[l] > 0 for l in (3, 4, 5))
    detail = ", ".join(f"l={l}:{pov_results[l][0]:+.3f}w" for l in range(6))
    report(5, passed, f"peak shifts {detail}")


def test_criterion_06_singularity_census(grid):
    R1, R2, w = 0.56 * MM, 0.83 * MM, 0.11 * MM
    configs = [(0, l2) for l2 in range(1, 6)] + [(1, l2) for l2 in range(2, 7)]
    failures = []
    for l1, l2 in configs:
        spec = MpovSpec.from_lists([R1, R2], [l1, l2], w=w)
        field = diffuse(synth_mpov(grid, spec), StorageParams(D, 2 * US))
        found = [s for s in detect_singularities(field, 0.15, 1e-12) if R1 < s.radius < R2]
        predicted = predict_singularity_angles(*spec.rings)
        r_mid = 0.5 * (R1 + R2)
        ok = len(found) == abs(l2 - l1)
        if ok:
            for phi in predicted:
                gaps = [abs((s.angle - phi + np.pi) % (2 * np.pi) - np.pi) * r_mid for s in found]
                ok &= min(gaps) <= 2 * grid.dx
        if not ok:
            failures.append((l1, l2, len(found)))
    report(6, not failures, f"{len(configs) - len(failures)}/{len(configs)} configurations with |l2-l1| singularities at predicted angles (2 cells)")


def test_criterion_07_fidelity_ordering(grid):
    radii = [0.28 * MM, 0.56 * MM, 0.83 * MM]
    w = 0.11 * MM
    variants = {
        "a": MpovSpec.from_lists(radii, [0, 0, 0], [0, 0, 0], w=w),
        "b": MpovSpec.from_lists(radii, [0, 0, 0], [0, np.pi, 0], w=w),
        "c": MpovSpec.from_lists(radii, [1, 1, 1], [0, np.pi, 0], w=w),
    }
    times = [0.4 * US, 1 * US, 3 * US]
    fid = {}
    for key, spec in variants.items():
        source = synth_mpov(grid, spec)
        fid[key] = [fidelity(source, out) for out in storage_sweep(source, D, times)]
    ordered = [fid["b"][i] > fid["a"][i] and fid["c"][i] > fid["a"][i] for i in range(len(times))]
    detail = "; ".join(
        f"t={t / US:g}us a={fid['a'][i]:.4f} b={fid['b'][i]:.4f} c={fid['c'][i]:.4f}" for i, t in enumerate(times)
    )
    report(7, all(ordered), detail)


def test_criterion_08_dfit_round_trip(grid):
    times = [0, 5 * US, 10 * US, 20 * US, 30 * US]
    source = synth_gaussian(grid, 0.2 * MM)
    samples = width_sweep(storage_sweep(source, D, times), times, nbins=512)
    fit = fit_diffusion_coefficient(samples)
    err = abs(fit.D / D - 1)
    report(8, err < 0.01, f"fitted D = {fit.D * 1e4:.4f} cm^2/s, error {err:.2e} (< 1e-2)")


def test_criterion_09_demux_oam(grid):
    R1, R2, w = 0.28 * MM, 0.83 * MM, 0.11 * MM
    results = []
    passed = True
    for l2 in (3, 5):
        spec = MpovSpec.from_lists([R1, R2], [1, l2], w=w)
        stored = diffuse(synth_mpov(grid, spec), StorageParams(D, 2 * US))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            inner, outer = demultiplex(stored, 0.555 * MM, spec)
        w_in, w_out = winding_on_circle(inner, R1), winding_on_circle(outer, R2)
        s_in = count_dark_stripes(tilted_lens_image(inner, TiltedLensSpec(magnification=4)))
        s_out = count_dark_stripes(tilted_lens_image(outer, TiltedLensSpec(magnification=2)))
        passed &= (w_in, w_out, s_in, s_out) == (-1, -l2, 1, l2)
        results.append(f"l1=1,l2={l2}: windings {w_in},{w_out} stripes {s_in},{s_out}")
    report(9, passed, "; ".join(results))


def test_criterion_10_charge_conservation():
    grid = make_grid(256, 256, 4e-6)
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(50):
        n_rings = int(rng.integers(1, 4))
        w = rng.uniform(10, 14) * grid.dx
        radii = [rng.uniform(3, 5) * w]
        for _ in range(n_rings - 1):
            radii.append(radii[-1] + rng.uniform(2.2, 3.0) * w)
        if radii[-1] + 3 * w > grid.inscribed_radius:
            radii = radii[:1]
        charges = rng.integers(-4, 5, size=len(radii))
        phases = rng.uniform(0, 2 * np.pi, size=len(radii))
        spec = MpovSpec(
            tuple(PovRingSpec(R, w, int(l), float(p), float(rng.uniform(0.6, 1.0))) for R, l, p in zip(radii, charges, phases))
        )
        field = synth_mpov(grid, spec)
        circle = spec.rings[int(rng.integers(len(radii)))].R
        inside = sum(s.charge for s in detect_singularities(field) if s.radius < circle)
        failures += inside != winding_on_circle(field, circle)
    report(10, failures == 0, f"{50 - failures}/50 random MPOVs with interior charge = boundary winding")


@pytest.mark.slow
def test_criterion_11_determinism(tmp_path):
    mismatched = []
    for name in bundled_names():
        path = resolve(name)
        config = load_config(path)
        a = run_scenario(config, tmp_path / f"{name}_a", True, path)
        b = run_scenario(config, tmp_path / f"{name}_b", True, path)
        for entry in a.manifest["outputs"]:
            fa = Path(a.out_dir) / entry["path"]
            fb = Path(b.out_dir) / entry["path"]
            if fa.read_bytes() != fb.read_bytes():
                mismatched.append(f"{name}/{entry['path']}")
        if (Path(a.out_dir) / "run.json").read_bytes() != (Path(b.out_dir) / "run.json").read_bytes():
            mismatched.append(f"{name}/run.json")
    report(11, not mismatched, f"{len(bundled_names())} bundled scenarios run twice; mismatched files: {mismatched or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
