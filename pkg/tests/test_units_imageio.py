import math

import numpy as np
import pytest

from mpov.analysis import RadialProfile
from mpov.errors import ValidationError
from mpov.imageio import read_pgm, read_width_csv, write_intensity_pgm, write_phase_pgm, write_profile_csv, write_width_csv
from mpov.units import parse_assignments, parse_quantity


@pytest.mark.parametrize(
    "text,kind,expected",
    [
        ("0.45mm", "length", 4.5e-4),
        ("4 um", "length", 4e-6),
        ("795nm", "length", 7.95e-7),
        ("5us", "time", 5e-6),
        ("5µs", "time", 5e-6),
        ("25cm2/s", "diffusivity", 2.5e-3),
        ("90deg", "angle", math.pi / 2),
        ("1e-3", "length", 1e-3),
        (0.5, "angle", 0.5),
    ],
)
def test_parse_quantity(text, kind, expected):
    assert parse_quantity(text, kind) == pytest.approx(expected)


@pytest.mark.parametrize("text,kind", [("5us", "length"), ("abc", "length"), ("1e999", "length"), (True, "time")])
def test_parse_quantity_rejects(text, kind):
    with pytest.raises(ValidationError):
        parse_quantity(text, kind)


def test_parse_assignments():
    assert parse_assignments(["R=0.45mm", "w=1,l=3"]) == {"R": "0.45mm", "w": "1", "l": "3"}
    with pytest.raises(ValidationError):
        parse_assignments(["R"])


def test_intensity_pgm_round_trip(tmp_path):
    img = np.zeros((20, 30))
    img[2, 3] = 4.0
    img[10, 10] = 2.0
    peak = write_intensity_pgm(tmp_path / "a.pgm", img, reproducible=True)
    assert peak == 4.0
    back = read_pgm(tmp_path / "a.pgm")
    assert back.shape == (20, 30)
    assert back[2, 3] == 65535 and back[10, 10] == 32768


def test_pgm_timestamp_only_without_reproducible(tmp_path):
    img = np.ones((16, 16))
    write_intensity_pgm(tmp_path / "r.pgm", img, reproducible=True)
    write_intensity_pgm(tmp_path / "t.pgm", img, reproducible=False)
    assert b"created" not in (tmp_path / "r.pgm").read_bytes()
    assert b"created" in (tmp_path / "t.pgm").read_bytes()


def test_phase_pgm_range(tmp_path):
    phase = np.array([[-np.pi + 1e-12, 0.0, np.pi]])
    write_phase_pgm(tmp_path / "p.pgm", np.repeat(phase, 16, axis=0).repeat(6, axis=1), reproducible=True)
    back = read_pgm(tmp_path / "p.pgm")
    assert back.min() == 0 and back.max() == 65535


def test_profile_csv(tmp_path):
    prof = RadialProfile(np.array([0.5, 1.5]), np.array([1.0, 0.25]), np.array([4, 12]))
    write_profile_csv(tmp_path / "p.csv", prof)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "r_m,mean_intensity,bin_count"
    assert lines[2] == "1.5,0.25,12"


def test_width_csv_round_trip(tmp_path):
    samples = [(0.0, 2e-4), (5e-6, 2.3e-4)]
    write_width_csv(tmp_path / "w.csv", samples)
    assert read_width_csv(tmp_path / "w.csv") == samples
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_width_csv(tmp_path / "bad.csv")
