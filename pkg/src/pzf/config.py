"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field

from .errors import ConfigError, InvalidValue, MalformedLine, ParameterError, UnknownKey
from .integrator import IntegratorConfig, Method
from .model import DilutionMode, EffectiveParameters, RawParameters, derive_effective

# config key -> RawParameters field
RAW_KEYS = {
    "m1": "m1", "gz": "gZ", "ezo": "eZo", "rzo": "rZo", "rfp": "rFp", "mz": "mZ",
    "ef": "eF", "mf": "mF", "rf": "rF", "hf": "hF", "gf": "gF",
    "kp": "kP", "kz": "kZ", "kf": "kF", "a": "a", "su": "sU", "sd": "sD",
    "gs_override": "gS", "m2_override": "m2", "m3_override": "m3",
}
INTEGRATOR_KEYS = {
    "dt": "dt", "t_end": "t_end", "method": "method",
    "rel_tol": "rel_tol", "abs_tol": "abs_tol", "sample_every": "sample_every",
}
KEY_ORDER = tuple(RAW_KEYS) + ("delta_mode",) + ("dt", "t_end", "transient", "method",
                                                 "rel_tol", "abs_tol", "sample_every")


@dataclass(frozen=True)
class RunConfig:
    raw: RawParameters = field(default_factory=lambda: RawParameters(m3=0.324))
    delta_mode: DilutionMode = DilutionMode.DOWNSTREAM
    integrator: IntegratorConfig = IntegratorConfig()
    transient: float = 500.0

    def effective(self) -> EffectiveParameters:
        return derive_effective(self.raw, self.delta_mode)

    def to_text(self) -> str:
        return format_config(self)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (DilutionMode, Method)):
        return value.value
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def config_values(cfg: RunConfig) -> dict:
    values = {key: getattr(cfg.raw, name) for key, name in RAW_KEYS.items()}
    values["delta_mode"] = cfg.delta_mode
    for key, name in INTEGRATOR_KEYS.items():
        values[key] = getattr(cfg.integrator, name)
    values["transient"] = cfg.transient
    return values


def format_config(cfg: RunConfig) -> str:
    """Canonical text: every key, fixed order, shortest round-trip floats."""
    values = config_values(cfg)
    return "".join(f"{key} = {_fmt(values[key])}\n" for key in KEY_ORDER)


def _parse_float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise InvalidValue(key, text, "not a number") from None
    if not math.isfinite(value):
        raise InvalidValue(key, text, "must be finite")
    return value


def _parse_value(key, text):
    if key in ("gs_override", "m2_override", "m3_override"):
        return None if text.lower() == "none" else _parse_float(key, text)
    if key == "delta_mode":
        try:
            return DilutionMode(text)
        except ValueError:
            raise InvalidValue(key, text, "expected paper, magnitude or downstream") from None
    if key == "method":
        try:
            return Method(text.lower())
        except ValueError:
            raise InvalidValue(key, text, "expected rk4 or rk45") from None
    if key == "sample_every":
        try:
            return int(text)
        except ValueError:
            raise InvalidValue(key, text, "not an integer") from None
    return _parse_float(key, text)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Missing keys take the reference defaults, including ``m3_override =
    0.324``; write ``m3_override = none`` to compose m3 from its parts.
    """
    seen = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise MalformedLine(line_no, line)
        if key not in KEY_ORDER:
            raise UnknownKey(key)
        if key in seen:
            raise InvalidValue(key, value, f"duplicate key (line {line_no})")
        seen[key] = _parse_value(key, value)

    values = config_values(RunConfig())
    values.update(seen)
    raw_kwargs = {name: values[key] for key, name in RAW_KEYS.items()}
    try:
        raw = RawParameters(**raw_kwargs)
    except ParameterError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc
    try:
        integ = IntegratorConfig(**{name: values[key] for key, name in INTEGRATOR_KEYS.items()})
    except ValueError as exc:
        raise ConfigError(f"invalid integrator settings: {exc}") from exc
    if not values["transient"] >= 0:
        raise InvalidValue("transient", values["transient"], "must be nonnegative")
    return RunConfig(raw=raw, delta_mode=values["delta_mode"], integrator=integ,
                     transient=values["transient"])


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_changes(cfg: RunConfig, **raw_changes) -> RunConfig:
    return dataclasses.replace(cfg, raw=dataclasses.replace(cfg.raw, **raw_changes))
