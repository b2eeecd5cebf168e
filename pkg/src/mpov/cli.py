"""Command-line interface.

Every subcommand reads and writes MPOVF1 field files; "-" (the default for
field input and output) means stdin/stdout, so stages compose with pipes::

    mpov synth --pov R=0.45mm w=0.14mm l=5 | mpov store --D 25cm2/s --t 5us | mpov analyze

Exit codes: 1 usage, 2 validation, 3 numerical guard, 4 I/O or file format.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__, units
from .beams import LgSpec, MpovSpec, PovRingSpec, synth_gaussian, synth_lg, synth_mpov, synth_plane_wave, synth_pov, tilt_for_period
from .diagnostics import (
    TiltedLensSpec,
    count_dark_stripes,
    demultiplex,
    fit_diffusion_coefficient,
    fringe_count_difference,
    interferogram,
    tilted_lens_image,
)
from .analysis import winding_on_circle
from .errors import FieldFormatError, MpovError, ValidationError
from .fieldio import read_field, write_field
from .grid import GridSpec
from .imageio import read_width_csv, write_intensity_pgm, write_profile_csv
from .storage import DEFAULT_D, diffuse, StorageParams

EXIT_USAGE = 1
EXIT_IO = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---- argument helpers -------------------------------------------------------


def _quantity(kind):
    def convert(text):
        try:
            return units.parse_quantity(text, kind)
        except ValidationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    convert.__name__ = kind
    return convert


LENGTH = _quantity("length")
TIME = _quantity("time")
DIFFUSIVITY = _quantity("diffusivity")
ANGLE = _quantity("angle")


def _pick(fields: dict, key: str, kind: str | None, default=None, cast=float):
    if key not in fields:
        if default is None:
            raise ValidationError(f"missing required parameter {key!r}")
        return default
    value = fields.pop(key)
    if kind is not None:
        return units.parse_quantity(value, kind)
    try:
        return cast(value)
    except ValueError:
        raise ValidationError(f"{key}={value!r} is not a valid {cast.__name__}") from None


def _no_leftovers(fields: dict, what: str) -> None:
    if fields:
        raise ValidationError(f"unknown {what} parameter(s): {', '.join(sorted(fields))}")


def _ring(tokens: list[str], w_default=None, a_default=1.0) -> PovRingSpec:
    f = units.parse_assignments(tokens)
    ring = PovRingSpec(
        R=_pick(f, "R", "length"),
        w=_pick(f, "w", "length", w_default),
        l=_pick(f, "l", None, 0, int),
        phi0=_pick(f, "phi0", "angle", 0.0),
        A0=_pick(f, "A0", None, a_default),
    )
    _no_leftovers(f, "ring")
    return ring


def _grid(tokens: list[str]) -> GridSpec:
    f = units.parse_assignments(tokens)
    n = _pick(f, "n", None, 1024, int)
    grid = GridSpec(
        nx=_pick(f, "nx", None, n, int),
        ny=_pick(f, "ny", None, n, int),
        dx=_pick(f, "dx", "length", 4e-6),
        wavelength=_pick(f, "wavelength", "length", 795e-9),
    )
    _no_leftovers(f, "grid")
    return grid


def _open_in(path: str):
    return sys.stdin.buffer if path == "-" else path


def _read(path: str):
    try:
        return read_field(_open_in(path))
    except OSError as exc:
        raise FieldFormatError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(field, path: str) -> None:
    if path == "-":
        if sys.stdout.isatty():
            raise ValidationError("refusing to write binary field data to a terminal; use -o FILE")
        write_field(field, sys.stdout.buffer)
        sys.stdout.buffer.flush()
    else:
        write_field(field, path)


def _emit_json(data: dict, path: str) -> None:
    from .scenarios.runner import json_safe

    text = json.dumps(json_safe(data), indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _report(command: str, parameters: dict, metrics: dict, files: list[str]) -> dict:
    from .scenarios.config import SCHEMA_VERSION

    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": command,
        "parameters": parameters,
        "metrics": metrics,
        "files": files,
    }


# ---- subcommands ------------------------------------------------------------


def cmd_run(args) -> int:
    from .scenarios import load_config, resolve, run_scenario

    try:
        path = resolve(args.scenario)
    except FileNotFoundError as exc:
        raise FieldFormatError(str(exc)) from None
    config = load_config(path)
    result = run_scenario(config, args.out, args.reproducible, path)
    print(f"{config.scenario}: {len(result.manifest['outputs'])} files in {result.out_dir}", file=sys.stderr)
    return 0


def cmd_scenarios(args) -> int:
    from .scenarios import bundled_names

    for name in bundled_names():
        print(name)
    return 0


def cmd_synth(args) -> int:
    grid = _grid(args.grid)
    chosen = [k for k in ("pov", "mpov", "lg", "gaussian") if getattr(args, k) is not None]
    if len(chosen) != 1:
        raise ValidationError("give exactly one of --pov, --mpov, --lg, --gaussian")
    kind = chosen[0]
    if kind == "pov":
        field = synth_pov(grid, _ring(args.pov))
    elif kind == "mpov":
        shared = units.parse_assignments(args.mpov)
        w = _pick(shared, "w", "length", None) if "w" in shared else None
        a0 = _pick(shared, "A0", None, 1.0)
        _no_leftovers(shared, "mpov")
        if not args.ring:
            raise ValidationError("--mpov needs at least one --ring")
        rings = tuple(_ring(r, w, a0) for r in args.ring)
        field = synth_mpov(grid, MpovSpec(rings, waive_spacing=args.waive_spacing))
    elif kind == "lg":
        f = units.parse_assignments(args.lg)
        spec = LgSpec(_pick(f, "w0", "length"), _pick(f, "l", None, 0, int))
        _no_leftovers(f, "lg")
        field = synth_lg(grid, spec)
    else:
        f = units.parse_assignments(args.gaussian)
        w0 = _pick(f, "w0", "length")
        a0 = _pick(f, "A0", None, 1.0)
        _no_leftovers(f, "gaussian")
        field = synth_gaussian(grid, w0, a0)
    _write(field, args.output)
    return 0


def cmd_store(args) -> int:
    field = _read(args.input)
    if args.t > 0:
        field = diffuse(field, StorageParams(args.D, args.t))
    _write(field, args.output)
    return 0


def _analysis_config(args):
    import pydantic

    from .scenarios.config import AnalysisConfig

    try:
        return AnalysisConfig(
            profile_bins=args.bins,
            singularity_ceiling=args.ceiling,
            noise_floor=args.noise_floor,
            fidelity_reference="input" if args.reference else "none",
            singularity_annulus=tuple(args.annulus) if args.annulus else None,
            phase_gradient_edges=bool(args.ring),
        )
    except pydantic.ValidationError as exc:
        problems = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
        raise ValidationError(problems) from None


def cmd_analyze(args) -> int:
    from .scenarios.runner import field_metrics

    field = _read(args.input)
    reference = _read(args.reference) if args.reference else None
    cfg = _analysis_config(args)
    rings = tuple(_ring(r) for r in args.ring or [])
    metrics, profile = field_metrics(field, cfg, reference, rings)
    files = []
    if args.profile:
        write_profile_csv(args.profile, profile)
        files.append(args.profile)
    params = {"analysis": cfg.model_dump(mode="json"), "grid": _grid_dict(field.grid)}
    _emit_json(_report("analyze", params, metrics, files), args.output)
    return 0


def _grid_dict(grid: GridSpec) -> dict:
    return {"nx": grid.nx, "ny": grid.ny, "dx": grid.dx, "wavelength": grid.wavelength}


def cmd_interfere(args) -> int:
    field = _read(args.input)
    grid = field.grid
    amplitude = float(abs(field.values).max())
    plane = synth_plane_wave(grid, tilt_for_period(grid, args.period), 0.0, amplitude)
    image = interferogram(field, plane)
    files = []
    if args.image:
        write_intensity_pgm(args.image, image.values, args.reproducible)
        files.append(args.image)
    forks = [
        {"radius_m": r, "fringe_difference": fringe_count_difference(image, r, args.period)}
        for r in args.radius
    ]
    params = {"fringe_period_m": args.period, "grid": _grid_dict(grid)}
    _emit_json(_report("interfere", params, {"forks": forks}, files), args.output)
    return 0


def cmd_oam_measure(args) -> int:
    field = _read(args.input)
    lens = TiltedLensSpec(args.f, args.tilt, args.z, args.magnification)
    image = tilted_lens_image(field, lens)
    files = []
    if args.image:
        write_intensity_pgm(args.image, image.values, args.reproducible)
        files.append(args.image)
    params = {"f_m": lens.f, "tilt_rad": lens.tilt, "z_m": lens.distance, "magnification": lens.magnification}
    _emit_json(_report("oam-measure", params, {"dark_stripes": count_dark_stripes(image)}, files), args.output)
    return 0


def cmd_demux(args) -> int:
    field = _read(args.input)
    inner, outer = demultiplex(field, args.r_cut)
    _write(inner, args.inner)
    _write(outer, args.outer)
    metrics = {"inner_power": inner.power(), "outer_power": outer.power()}
    if args.winding_radii:
        r_in, r_out = args.winding_radii
        metrics["inner_winding"] = winding_on_circle(inner, r_in)
        metrics["outer_winding"] = winding_on_circle(outer, r_out)
    params = {"r_cut_m": args.r_cut}
    _emit_json(_report("demux", params, metrics, [args.inner, args.outer]), args.output)
    return 0


def cmd_fit_d(args) -> int:
    source = sys.stdin if args.input == "-" else args.input
    try:
        if source is sys.stdin:
            import csv

            rows = list(csv.DictReader(sys.stdin))
            samples = [(float(r["t_s"]), float(r["w_m"])) for r in rows]
        else:
            samples = read_width_csv(source)
    except (KeyError, ValueError) as exc:
        raise FieldFormatError(f"cannot read width table: {exc}") from None
    except OSError as exc:
        raise FieldFormatError(f"cannot read {args.input}: {exc.strerror or exc}") from None
    fit = fit_diffusion_coefficient(samples)
    _emit_json(_report("fit-d", {"samples": len(samples)}, fit.to_dict(), []), args.output)
    return 0


# ---- parser -----------------------------------------------------------------


def _add_analysis_flags(p) -> None:
    p.add_argument("--bins", type=int, default=256, help="radial profile bins (default 256)")
    p.add_argument("--ceiling", type=float, default=0.15, help="singularity search ceiling, fraction of max|E|")
    p.add_argument("--noise-floor", type=float, default=1e-12, help="ignore plaquettes darker than this fraction of max|E|")
    p.add_argument("--annulus", type=LENGTH, nargs=2, metavar=("RMIN", "RMAX"), help="report singularities only in this annulus")
    p.add_argument("--reference", help="field file to compute fidelity against")
    p.add_argument("--ring", nargs="+", action="append", metavar="K=V", help="ring spec (R=, w=, l=) for edge phase gradients; repeatable")
    p.add_argument("--profile", help="write the radial profile CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpov", description="Perfect optical vortex storage simulator.")
    parser.add_argument("--version", action="version", version=f"mpov {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("run", help="run a scenario file or bundled scenario")
    p.add_argument("scenario", help="YAML file, or the name of a bundled scenario")
    p.add_argument("--out", help="output directory (default: output_dir from the file, else out/<scenario>)")
    p.add_argument("--reproducible", action="store_true", help="omit timestamps so outputs are byte-identical")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scenarios", help="list bundled scenarios")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("synth", help="synthesize a POV, MPOV, LG or Gaussian field")
    p.add_argument("--grid", nargs="+", default=[], metavar="K=V", help="n|nx|ny=1024 dx=4um wavelength=795nm")
    p.add_argument("--pov", nargs="+", metavar="K=V", help="R=0.45mm w=0.14mm l=5 [phi0=0 A0=1]")
    p.add_argument("--mpov", nargs="*", metavar="K=V", help="shared w= and A0= for the --ring entries")
    p.add_argument("--ring", nargs="+", action="append", metavar="K=V", help="one MPOV ring (R=, l=, phi0=, w=, A0=)")
    p.add_argument("--waive-spacing", action="store_true", help="allow rings closer than twice the widest w")
    p.add_argument("--lg", nargs="+", metavar="K=V", help="w0=0.1mm l=2")
    p.add_argument("--gaussian", nargs="+", metavar="K=V", help="w0=0.2mm [A0=1]")
    p.add_argument("-o", "--output", default="-", help="field file (default stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("store", help="apply diffusion blur for a storage time")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--D", type=DIFFUSIVITY, default=DEFAULT_D, help="diffusion coefficient (default 25cm2/s)")
    p.add_argument("--t", type=TIME, required=True, help="storage time, e.g. 5us")
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("analyze", help="radial profile, ring metrics, singularities, fidelity")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-", help="JSON report (default stdout)")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("interfere", help="interfere with a tilted plane wave and count fork fringes")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-", help="JSON report (default stdout)")
    p.add_argument("--period", type=LENGTH, required=True, help="fringe period along x, e.g. 64um")
    p.add_argument("--radius", type=LENGTH, nargs="*", default=[], help="circle radii for fork counts")
    p.add_argument("--image", help="write the interferogram PGM here")
    p.add_argument("--reproducible", action="store_true")
    p.set_defaults(func=cmd_interfere)

    p = sub.add_parser("oam-measure", help="tilted-lens image and dark-stripe count")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-", help="JSON report (default stdout)")
    p.add_argument("--f", type=LENGTH, default=0.5, help="focal length (default 50cm)")
    p.add_argument("--tilt", type=ANGLE, default=0.5, help="lens tilt (default 0.5rad)")
    p.add_argument("--z", type=LENGTH, default=None, help="distance after the lens (default mid-focus)")
    p.add_argument("--magnification", type=float, default=1.0, help="relay magnification before the lens")
    p.add_argument("--image", help="write the lens image PGM here")
    p.add_argument("--reproducible", action="store_true")
    p.set_defaults(func=cmd_oam_measure)

    p = sub.add_parser("demux", help="split a field at a cut radius")
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-", help="JSON report (default stdout)")
    p.add_argument("--r-cut", type=LENGTH, required=True)
    p.add_argument("--inner", required=True, help="field file for r < r_cut")
    p.add_argument("--outer", required=True, help="field file for r >= r_cut")
    p.add_argument("--winding-radii", type=LENGTH, nargs=2, metavar=("R_IN", "R_OUT"))
    p.set_defaults(func=cmd_demux)

    p = sub.add_parser("fit-d", help="fit D from a t_s,w_m width table")
    p.add_argument("input", nargs="?", default="-", help="CSV file (default stdin)")
    p.add_argument("-o", "--output", default="-", help="JSON report (default stdout)")
    p.set_defaults(func=cmd_fit_d)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            return args.func(args)
    except MpovError as exc:
        print(f"mpov {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"mpov {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
