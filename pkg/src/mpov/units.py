"""Quantities with unit suffixes ("0.45mm", "25cm2/s", "5us") converted to SI."""

from __future__ import annotations

import math
import re

from .errors import ValidationError

_SCALES = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "diffusivity": {"m2/s": 1.0, "cm2/s": 1e-4, "mm2/s": 1e-6},
    "angle": {"rad": 1.0, "mrad": 1e-3, "deg": math.pi / 180},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d.+-][^\s]*)?\s*$")


def parse_quantity(text: str | float | int, kind: str) -> float:
    """Parse a number with an optional unit of the given kind; bare numbers are SI."""
    if isinstance(text, bool):
        raise ValidationError(f"expected a {kind}, got {text!r}")
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        match = _QUANTITY.match(str(text))
        if not match:
            raise ValidationError(f"cannot read {text!r} as a {kind}")
        number, unit = match.groups()
        value = float(number)
        if unit:
            scales = _SCALES[kind]
            if unit not in scales:
                raise ValidationError(
                    f"unit {unit!r} is not a {kind} unit (expected one of {', '.join(scales)})"
                )
            value *= scales[unit]
    if not math.isfinite(value):
        raise ValidationError(f"{kind} must be finite, got {text!r}")
    return value


def length(text) -> float:
    return parse_quantity(text, "length")


def duration(text) -> float:
    return parse_quantity(text, "time")


def diffusivity(text) -> float:
    return parse_quantity(text, "diffusivity")


def angle(text) -> float:
    return parse_quantity(text, "angle")


def parse_assignments(tokens: list[str]) -> dict[str, str]:
    """["R=0.45mm", "l=5"] -> {"R": "0.45mm", "l": "5"}; commas also separate pairs."""
    out: dict[str, str] = {}
    for token in tokens:
        for part in filter(None, token.split(",")):
            key, sep, value = part.partition("=")
            if not sep or not key or not value:
                raise ValidationError(f"expected key=value, got {part!r}")
            out[key.strip()] = value.strip()
    return out
