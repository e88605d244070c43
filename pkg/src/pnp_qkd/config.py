"""Flat ``section.key = value`` configuration files.

Example::

    # 50.4 km Monte-Carlo session
    experiment.mode = run
    channel.fiber_length_km = 50.4
    session.num_windows = 1000000
    sweep.lengths_km = 0:100:5

Blank lines and ``#`` comments are ignored. Keys must be known to the schema
passed to :func:`parse_config`; anything else is an error with its line number.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable


class ConfigError(ValueError):
    pass


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def to_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def to_int(text: str) -> int:
    # accept 1e6 style counts as long as they are integral
    try:
        return int(text)
    except ValueError:
        val = float(text)
        if not val.is_integer():
            raise ValueError(f"expected an integer, got {text!r}") from None
        return int(val)


def to_float(text: str) -> float:
    val = float(text)
    if math.isnan(val):
        raise ValueError("NaN is not allowed")
    return val


def to_float_list(text: str) -> list[float]:
    """Comma-separated numbers, or an inclusive ``start:stop:step`` range."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"range must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    values = [to_float(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError("empty list")
    return values


def one_of(*choices: str) -> Callable[[str], str]:
    def convert(text: str) -> str:
        t = text.strip().lower()
        if t not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {text!r}")
        return t
    return convert


Schema = dict[str, dict[str, Callable[[str], object]]]


def parse_text(text: str, schema: Schema, source: str = "<config>") -> dict[str, dict[str, object]]:
    out: dict[str, dict[str, object]] = {section: {} for section in schema}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'section.key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if "." not in key:
            raise ConfigError(f"{where}: key {key!r} has no section")
        section, name = key.split(".", 1)
        if section not in schema:
            raise ConfigError(f"{where}: unknown section {section!r}")
        if name not in schema[section]:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if name in out[section]:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        try:
            out[section][name] = schema[section][name](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    return out


def parse_config(path, schema: Schema) -> dict[str, dict[str, object]]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from None
    return parse_text(text, schema, str(p))
