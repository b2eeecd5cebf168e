"""16-bit portable graymaps and profile CSV files."""

from __future__ import annotations

import csv
import datetime as _dt
import os

import numpy as np

from .analysis import RadialProfile

MAXVAL = 65535


def _write_pgm(path: str | os.PathLike, gray: np.ndarray, comments: list[str]) -> None:
    rows, cols = gray.shape
    header = "P5\n" + "".join(f"# {c}\n" for c in comments) + f"{cols} {rows}\n{MAXVAL}\n"
    # PGM stores the top row first; our row 0 is the bottom (most negative y)
    payload = np.flipud(gray).astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def _stamp(comments: list[str], reproducible: bool) -> list[str]:
    if reproducible:
        return comments
    now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return comments + [f"created {now}"]


def write_intensity_pgm(path, intensity: np.ndarray, reproducible: bool = False) -> float:
    """Peak-normalised intensity image. Returns the normalisation constant (the peak)."""
    peak = float(intensity.max())
    scale = MAXVAL / peak if peak > 0 else 0.0
    gray = np.rint(np.clip(intensity * scale, 0, MAXVAL)).astype(np.uint16)
    _write_pgm(path, gray, _stamp([f"intensity peak {peak!r}"], reproducible))
    return peak


def write_phase_pgm(path, phase: np.ndarray, reproducible: bool = False) -> None:
    """Phase in (-pi, pi] mapped linearly onto 0..65535."""
    gray = np.rint((phase + np.pi) / (2 * np.pi) * MAXVAL).astype(np.int64)
    gray = np.clip(gray, 0, MAXVAL).astype(np.uint16)
    _write_pgm(path, gray, _stamp(["phase -pi..pi"], reproducible))


def read_pgm(path) -> np.ndarray:
    """Read a binary 16-bit PGM written by this module (bottom row first in the result)."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    pos += 1
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = ">u2" if maxval > 255 else "u1"
    img = np.frombuffer(data, dtype=dtype, count=rows * cols, offset=pos).reshape(rows, cols)
    return np.flipud(img)


def write_profile_csv(path, profile: RadialProfile) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r_m", "mean_intensity", "bin_count"])
        for r, m, n in zip(profile.bin_centers, profile.mean_intensity, profile.bin_count):
            writer.writerow([repr(float(r)), repr(float(m)), int(n)])


def write_width_csv(path, samples: list[tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_s", "w_m"])
        for t, w in samples:
            writer.writerow([repr(float(t)), repr(float(w))])


def read_width_csv(path) -> list[tuple[float, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t_s", "w_m"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns t_s, w_m")
        return [(float(row["t_s"]), float(row["w_m"])) for row in reader]
