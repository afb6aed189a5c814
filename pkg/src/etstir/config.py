"""Case/sweep configuration files.

Configs are INI-style key/value files::

    [run]
    mode = sweep            # case | sweep
    axis = voltage          # electrode_width | gap | frequency | voltage
    values = 0, 5, 10, 15, 20, 25

    [drive]
    frequency = 1e5
    v_rms = 25

Sections ``geometry``, ``props``, ``reaction``, ``drive`` mirror the
dataclass fields of the same name; ``thermal`` holds ``walls`` and
``convection``; ``solver`` holds tolerances. Everything is SI. The
``reaction`` section also accepts ``k_a_per_molar_s`` and ``a_inlet_molar``,
which are converted (1 M = 1000 mol/m^3).

Overrides use dot paths (``drive.v_rms=25``); bare keys address ``[run]``.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .driver import SWEEP_AXES, CaseConfig
from .errors import ConfigError
from .mesh import Geometry
from .properties import MOLAR, DriveSpec, FluidProps, ReactionParams

MODES = ("case", "sweep")

_RUN_KEYS = ("label", "nx", "ny", "inlet_mean", "steady_fraction", "t_max", "dt",
             "sample_interval")
_SOLVER_KEYS = ("potential_tol", "temperature_tol", "flow_tol", "coupling_tol",
                "coupling_max_iter")
_THERMAL_KEYS = {"walls": "thermal_walls", "convection": "thermal_convection"}
_NESTED = {"geometry": Geometry, "props": FluidProps, "reaction": ReactionParams,
           "drive": DriveSpec}


@dataclass(frozen=True)
class RunSpec:
    case: CaseConfig = CaseConfig()
    mode: str = "case"
    axis: str = "voltage"
    values: tuple = ()
    workers: int = 1


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _convert(raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        return _parse_bool(raw)
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            val = float(raw)
            if not val.is_integer():
                raise ValueError(f"not an integer: {raw!r}") from None
            return int(val)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple) or default is None:
        if raw.lower() in ("", "auto", "none"):
            return None
        parts = [p for p in raw.replace(",", " ").split()]
        vals = tuple(float(p) for p in parts)
        return vals[0] if len(vals) == 1 else vals
    return raw


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def config_to_dict(cfg: CaseConfig) -> dict:
    """Nested plain-dict view of a case, keyed like the config file."""
    out = {"run": {k: getattr(cfg, k) for k in _RUN_KEYS}}
    for name in _NESTED:
        obj = getattr(cfg, name)
        out[name] = {f.name: getattr(obj, f.name) for f in fields(obj)}
    out["thermal"] = {k: getattr(cfg, attr) for k, attr in _THERMAL_KEYS.items()}
    out["solver"] = {k: getattr(cfg, k) for k in _SOLVER_KEYS}
    return out


class _Builder:
    """Collects key/value assignments and produces a :class:`RunSpec`."""

    def __init__(self):
        self.run = {}
        self.nested = {name: {} for name in _NESTED}
        self.top = {}

    def set(self, section: str, key: str, raw: str):
        section = section.strip().lower()
        key = key.strip().lower()
        where = f"[{section}] {key}"
        try:
            if section == "run":
                self._set_run(key, raw)
            elif section in _NESTED:
                self._set_nested(section, key, raw)
            elif section == "thermal":
                if key not in _THERMAL_KEYS:
                    raise KeyError(key)
                attr = _THERMAL_KEYS[key]
                self.top[attr] = _convert(raw, getattr(CaseConfig(), attr))
            elif section == "solver":
                if key not in _SOLVER_KEYS:
                    raise KeyError(key)
                self.top[key] = _convert(raw, getattr(CaseConfig(), key))
            else:
                raise ConfigError(f"unknown section [{section}]")
        except KeyError:
            raise ConfigError(f"unknown key {where}") from None
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {where} = {raw!r}: {exc}") from None

    def _set_run(self, key, raw):
        if key == "mode":
            mode = raw.strip().lower()
            if mode not in MODES:
                raise ValueError(f"mode must be one of {MODES}")
            self.run["mode"] = mode
        elif key == "axis":
            axis = raw.strip().lower()
            if axis not in SWEEP_AXES:
                raise ValueError(f"axis must be one of {sorted(SWEEP_AXES)}")
            self.run["axis"] = axis
        elif key == "values":
            self.run["values"] = tuple(float(v) for v in raw.replace(",", " ").split())
        elif key == "workers":
            self.run["workers"] = int(raw)
        elif key in _RUN_KEYS:
            self.top[key] = _convert(raw, getattr(CaseConfig(), key))
        else:
            raise KeyError(key)

    def _set_nested(self, section, key, raw):
        cls = _NESTED[section]
        if section == "reaction" and key == "k_a_per_molar_s":
            self.nested[section]["k_a"] = float(raw) / MOLAR
            return
        if section == "reaction" and key == "a_inlet_molar":
            self.nested[section]["a_inlet"] = float(raw) * MOLAR
            return
        names = {f.name.lower(): f.name for f in fields(cls)}
        if key not in names:
            raise KeyError(key)
        name = names[key]
        self.nested[section][name] = _convert(raw, getattr(cls(), name))

    def build(self) -> RunSpec:
        case = CaseConfig()
        parts = {name: replace(getattr(case, name), **vals)
                 for name, vals in self.nested.items() if vals}
        try:
            case = replace(case, **parts, **self.top)
            case.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None
        spec = RunSpec(case=case, **self.run)
        if spec.mode == "sweep" and not spec.values:
            raise ConfigError("sweep mode needs [run] values")
        return spec


def _read_parser(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"cannot parse {source}: line {exc.lineno}: "
                          f"{exc.line.strip()!r} is outside any [section]") from None
    except configparser.ParsingError as exc:
        where = "; ".join(f"line {n}: {line.strip()!r}" for n, line in exc.errors)
        raise ConfigError(f"cannot parse {source}: {where}") from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        where = f" line {line}:" if line else ""
        raise ConfigError(f"cannot parse {source}:{where} {exc.message}") from None
    return parser


def split_override(item: str) -> tuple[str, str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not KEY=VALUE")
    key, raw = item.split("=", 1)
    key = key.strip()
    section, _, name = key.rpartition(".")
    return (section or "run"), name, raw


def parse_run(text: str, overrides=(), source: str = "<string>") -> RunSpec:
    parser = _read_parser(text, source)
    builder = _Builder()
    for section in parser.sections():
        for key, raw in parser.items(section):
            builder.set(section, key, raw)
    for item in overrides:
        builder.set(*split_override(item))
    return builder.build()


def load_run(path, overrides=()) -> RunSpec:
    """Read a config file and apply ``KEY=VALUE`` overrides."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_run(text, overrides, source=str(path))


def dump_run(spec: RunSpec) -> str:
    """Fully resolved config text; parsing it back gives an equal :class:`RunSpec`."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    d = config_to_dict(spec.case)
    run = {"mode": spec.mode, "axis": spec.axis, "values": spec.values,
           "workers": spec.workers}
    run.update(d.pop("run"))
    parser["run"] = {k: _fmt(v) for k, v in run.items()}
    for section, vals in d.items():
        parser[section] = {k: _fmt(v) for k, v in vals.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def bundled_configs() -> dict:
    """Names and paths of the configs shipped with the package."""
    root = Path(__file__).parent / "configs"
    return {p.name: p for p in sorted(root.glob("*.cfg"))}


def resolve_config_path(name) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_configs()
    if path.name in bundled:
        return bundled[path.name]
    raise ConfigError(f"config {name!r} not found (bundled: {', '.join(bundled)})")
