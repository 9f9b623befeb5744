"""Flat key-value run configuration.

One plain-text file per run: ``key = value`` lines, ``#`` comments,
dotted namespaces (state.beta_C, unitary.theta, sweep.axis1.name).
Values are parsed as int, float, bool or string; command-line overrides
use the same ``key=value`` syntax and take precedence over the file.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed configuration input."""


def _parse_value(raw: str):
    text = raw.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config(text: str) -> dict:
    """Parse config text into a flat {key: value} dict."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = _parse_value(raw)
    return out


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def apply_overrides(cfg: dict, overrides: list[str] | None) -> dict:
    """Apply 'key=value' command-line overrides on top of a config dict."""
    merged = dict(cfg)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"override {item!r} has an empty key")
        merged[key] = _parse_value(raw)
    return merged


def format_config(cfg: dict) -> str:
    """Canonical single-line rendering used in output metadata."""
    return "; ".join(f"{k}={cfg[k]}" for k in sorted(cfg))
