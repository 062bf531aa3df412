"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment, keys are dotted paths.
Values are typed by a fixed schema; anything malformed is reported with
the file name and line number.  ``sweep.<key> = v1 v2 ...`` attaches a
list of values to an otherwise ordinary key; the sweep driver expands the
Cartesian product of all such lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .integrate import IntegratorConfig
from .scenarios import InitialSpec


class ConfigError(Exception):
    pass


_BOOLS = {"true": True, "false": False, "yes": True, "no": False, "on": True, "off": False}

# key -> element type; a tuple marks a whitespace-separated list of that type
SCHEMA: dict[str, object] = {
    "grid.n": int,
    "seed": int,
    "run.dt": float,
    "run.t_end": float,
    "run.projection": bool,
    "run.snapshot_stride": int,
    "run.breaking_eps": float,
    "initial.kind": str,
    "initial.value": float,
    "initial.amplitude": float,
    "initial.wavenumber": int,
    "initial.mean": float,
    "initial.cos_coeffs": (float,),
    "initial.sin_coeffs": (float,),
    "initial.p": float,
    "initial.q1": float,
    "initial.q2": float,
    "initial.mollify_width": float,
    "oracle.dt": float,
    "oracle.slope_cap": float,
    "oracle.dealias": bool,
    "compare.m": int,
    "compare.times": (float,),
    "validate.n": int,
    "validate.seed": int,
    "validate.n_states": int,
}

DEFAULTS: dict[str, object] = {
    "grid.n": 256,
    "seed": 2026,
    "run.t_end": 1.0,
    "run.projection": True,
    "run.snapshot_stride": 100,
    "run.breaking_eps": 1e-6,
    "initial.kind": "sine",
    "initial.value": 0.0,
    "initial.amplitude": 1.0,
    "initial.wavenumber": 1,
    "initial.mean": 0.0,
    "initial.cos_coeffs": (),
    "initial.sin_coeffs": (),
    "initial.p": 1.0,
    "initial.q1": 0.25,
    "initial.q2": 0.75,
    "initial.mollify_width": 0.0,
    "oracle.slope_cap": 1e3,
    "oracle.dealias": True,
    "compare.times": (),
    "validate.n": 128,
    "validate.seed": 2026,
    "validate.n_states": 100,
}


def _parse_scalar(text: str, typ, where: str):
    if typ is bool:
        try:
            return _BOOLS[text.lower()]
        except KeyError:
            raise ConfigError(f"{where}: expected a boolean, got {text!r}") from None
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"{where}: expected {typ.__name__}, got {text!r}") from None
    return text


def _parse_value(text: str, typ, where: str):
    if isinstance(typ, tuple):
        return tuple(_parse_scalar(tok, typ[0], where) for tok in text.split())
    return _parse_scalar(text, typ, where)


@dataclass
class RunConfig:
    """Typed view over a parsed configuration plus any sweep lists."""

    values: dict[str, object] = field(default_factory=dict)
    sweep: dict[str, list] = field(default_factory=dict)
    source: str = "<defaults>"

    def get(self, key: str):
        if key in self.values:
            return self.values[key]
        return DEFAULTS.get(key)

    def set(self, key: str, value) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        self.values[key] = value

    def with_values(self, extra: dict[str, object]) -> "RunConfig":
        merged = dict(self.values)
        merged.update(extra)
        return RunConfig(merged, dict(self.sweep), self.source)

    def initial_spec(self) -> InitialSpec:
        return InitialSpec(
            kind=str(self.get("initial.kind")),
            n=int(self.get("grid.n")),
            value=float(self.get("initial.value")),
            amplitude=float(self.get("initial.amplitude")),
            wavenumber=int(self.get("initial.wavenumber")),
            mean=float(self.get("initial.mean")),
            cos_coeffs=tuple(self.get("initial.cos_coeffs")),
            sin_coeffs=tuple(self.get("initial.sin_coeffs")),
            p=float(self.get("initial.p")),
            q1=float(self.get("initial.q1")),
            q2=float(self.get("initial.q2")),
            mollify_width=float(self.get("initial.mollify_width")),
        )

    def integrator_config(self) -> IntegratorConfig:
        dt = self.get("run.dt")
        return IntegratorConfig(
            dt=None if dt is None else float(dt),
            t_end=float(self.get("run.t_end")),
            projection=bool(self.get("run.projection")),
            snapshot_stride=int(self.get("run.snapshot_stride")),
            breaking_eps=float(self.get("run.breaking_eps")),
        )


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = RunConfig(source=str(path))
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not value:
            raise ConfigError(f"{where}: empty value for {key!r}")
        if key.startswith("sweep."):
            target = key[len("sweep."):]
            typ = SCHEMA.get(target)
            if typ is None:
                raise ConfigError(f"{where}: unknown sweep target {target!r}")
            if isinstance(typ, tuple):
                raise ConfigError(f"{where}: cannot sweep list-valued key {target!r}")
            vals = [_parse_scalar(tok, typ, where) for tok in value.split()]
            if not vals:
                raise ConfigError(f"{where}: sweep for {target!r} has no values")
            cfg.sweep[target] = vals
        else:
            typ = SCHEMA.get(key)
            if typ is None:
                raise ConfigError(f"{where}: unknown configuration key {key!r}")
            cfg.values[key] = _parse_value(value, typ, where)
    return cfg
