"""Scenario configuration: a flat, commented ``section.key = value`` file.

Example::

    # default NREL 5-MW scenario
    grid.nx = 60
    grid.dx = 10.0
    inflow.mode = uniform
    inflow.speed = 8.0
    control.name = btc
    run.dt = 0.02

Values are parsed as int, float, boolean (``true``/``false``), comma
separated float lists, or plain strings. Relative input paths (blade and
inflow files) are resolved against the config file's directory; the output
directory is relative to the working directory. Unknown keys produce warnings rather
than being ignored silently; every violated constraint is reported at once
by :func:`validate_config`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import control, structural
from .blade_data import BladeDataError, load_blade, nrel5mw_blade_path
from .flow_field import KERNEL_SHAPES, InflowFormatError, load_inflow_frames

BUILTIN_BLADE = "nrel5mw"
INFLOW_MODES = ("uniform", "power_law_shear", "file_replay")


class ConfigError(ValueError):
    """Raised with the full list of violated constraints."""

    def __init__(self, errors, warnings=()):
        self.errors = list(errors)
        self.warnings = list(warnings)
        super().__init__("; ".join(self.errors))


@dataclass
class GridSpec:
    nx: int = 60
    ny: int = 40
    nz: int = 30
    dx: float = 10.0
    dy: float = 10.0
    dz: float = 10.0
    x0: float = 0.0
    y0: float = 0.0
    z0: float = -20.0

    @property
    def dims(self):
        return (self.nx, self.ny, self.nz)

    @property
    def spacing(self):
        return (self.dx, self.dy, self.dz)

    @property
    def origin(self):
        return (self.x0, self.y0, self.z0)


@dataclass
class FlowSpec:
    rho: float = 1.225
    projection: bool = True
    kernel: str = "normal"
    kernel_sigma: float = 0.0           # 0 selects the largest grid spacing
    kernel_cutoff_factor: float = 3.0


@dataclass
class InflowSpec:
    mode: str = "uniform"
    speed: float = 8.0
    ref_height: float = 87.5
    exponent: float = 0.14
    file: str = ""


@dataclass
class TurbineSpec:
    blade_file: str = BUILTIN_BLADE
    hub_x: float = 200.0
    hub_y: float = 195.0
    hub_height: float = 87.5
    yaw_deg: float = 0.0
    n_radial: int = 20
    n_azimuthal: int = 36
    initial_tsr: float = control.NREL5MW_LAMBDA_OPT
    fixed_speed: bool = False
    rated_power: float = 5.0e6
    cut_in_speed: float = 3.0
    rated_speed: float = 11.4
    cut_out_speed: float = 25.0

    @property
    def hub_position(self):
        return (self.hub_x, self.hub_y, self.hub_height)


@dataclass
class StructureSpec:
    j_g: float = structural.NREL5MW_GENERATOR_INERTIA
    j_r: float = structural.NREL5MW_ROTOR_INERTIA
    gear_ratio: float = structural.NREL5MW_GEAR_RATIO
    efficiency: float = structural.NREL5MW_GENERATOR_EFFICIENCY
    tower_f1: float = structural.NREL5MW_TOWER_FREQUENCY
    tower_d1: float = structural.NREL5MW_TOWER_DAMPING
    tower_mass: float = structural.nrel5mw_tower_mass()
    tower_method: str = "midpoint"
    frozen_tower: bool = False


@dataclass
class RunSpec:
    dt: float = 0.02
    t_end: float = 180.0
    spin_up: float = 60.0
    cadence: float = 1.0
    output_dir: str = "output"
    snapshot_times: tuple = ()
    checkpoint_interval: float = 0.0    # 0 disables checkpoints


@dataclass
class SimConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    flow: FlowSpec = field(default_factory=FlowSpec)
    inflow: InflowSpec = field(default_factory=InflowSpec)
    turbine: TurbineSpec = field(default_factory=TurbineSpec)
    structure: StructureSpec = field(default_factory=StructureSpec)
    control_name: str = "btc"
    control_params: dict = field(default_factory=dict)
    run: RunSpec = field(default_factory=RunSpec)
    seed: int = 0
    base_dir: Path = field(default_factory=Path.cwd)
    warnings: list = field(default_factory=list)

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def blade_path(self):
        if self.turbine.blade_file == BUILTIN_BLADE:
            return nrel5mw_blade_path()
        return self.resolve(self.turbine.blade_file)

    @property
    def output_dir(self):
        """Output directory; relative paths are taken from the working directory."""
        return Path(self.run.output_dir)

    def to_text(self):
        """Serialise back to the config format (round-trips through parse)."""
        lines = []
        for section in ("grid", "flow", "inflow", "turbine", "structure", "run"):
            spec = getattr(self, section)
            for f in fields(spec):
                lines.append(f"{section}.{f.name} = {_format(getattr(spec, f.name))}")
        lines.append(f"control.name = {self.control_name}")
        for k, v in self.control_params.items():
            lines.append(f"control.{k} = {_format(v)}")
        lines.append(f"seed = {self.seed}")
        return "\n".join(lines) + "\n"


_SECTIONS = {"grid": GridSpec, "flow": FlowSpec, "inflow": InflowSpec,
             "turbine": TurbineSpec, "structure": StructureSpec, "run": RunSpec}


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_value(text):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if "," in text:
        try:
            return tuple(float(x) for x in text.split(",") if x.strip())
        except ValueError:
            return text
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text):
    """Parse config text into ``{key: value}`` plus a list of syntax errors."""
    entries, errors = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        if key in entries:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        entries[key] = parse_value(value)
    return entries, errors


def _coerce(value, default, key, errors):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        errors.append(f"{key}: expected true/false, got {value!r}")
        return default
    if isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        errors.append(f"{key}: expected an integer, got {value!r}")
        return default
    if isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        errors.append(f"{key}: expected a number, got {value!r}")
        return default
    if isinstance(default, tuple):
        if isinstance(value, tuple):
            return value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return (float(value),)
        if value == "":
            return ()
        errors.append(f"{key}: expected a comma separated list, got {value!r}")
        return default
    return str(value)


def build_config(entries, base_dir=None):
    """Turn parsed entries into a :class:`SimConfig`; returns (config, errors)."""
    cfg = SimConfig(base_dir=Path(base_dir) if base_dir is not None else Path.cwd())
    errors = []
    for key, value in entries.items():
        if key == "seed":
            cfg.seed = _coerce(value, 0, key, errors)
            continue
        section, _, name = key.partition(".")
        if section == "control":
            if name == "name":
                cfg.control_name = str(value)
            elif name:
                cfg.control_params[name] = value
            else:
                cfg.warnings.append(f"unknown key {key!r}")
            continue
        cls = _SECTIONS.get(section)
        spec = getattr(cfg, section, None) if cls else None
        if spec is None or name not in {f.name for f in fields(cls)}:
            cfg.warnings.append(f"unknown key {key!r}")
            continue
        setattr(spec, name, _coerce(value, getattr(spec, name), key, errors))
    return cfg, errors


def check_config(cfg: SimConfig):
    """Every violated constraint of ``cfg`` as a list of messages."""
    errors = []
    g, fl, inf, tb, st, run = cfg.grid, cfg.flow, cfg.inflow, cfg.turbine, cfg.structure, cfg.run
    if min(g.dims) < 2:
        errors.append("grid.nx, grid.ny, grid.nz must all be >= 2")
    if min(g.spacing) <= 0.0:
        errors.append("grid.dx, grid.dy, grid.dz must all be > 0")
    if fl.rho <= 0.0:
        errors.append("flow.rho must be > 0")
    if fl.kernel not in KERNEL_SHAPES:
        errors.append(f"flow.kernel must be one of {', '.join(KERNEL_SHAPES)}")
    if fl.kernel_sigma < 0.0:
        errors.append("flow.kernel_sigma must be >= 0")
    if fl.kernel_cutoff_factor < 3.0:
        errors.append("flow.kernel_cutoff_factor must be >= 3")
    if run.dt <= 0.0:
        errors.append("run.dt must be > 0")
    if run.spin_up < 0.0:
        errors.append("run.spin_up must be >= 0")
    if run.t_end < run.spin_up:
        errors.append("run.t_end must be >= run.spin_up")
    if run.dt > 0.0 and run.cadence < run.dt * (1.0 - 1e-9):
        errors.append("run.cadence must be >= run.dt")
    elif run.dt > 0.0:
        ratio = run.cadence / run.dt
        if abs(ratio - round(ratio)) > 1e-6 * ratio:
            errors.append("run.cadence must be a whole number of steps (multiple of run.dt)")
    if run.checkpoint_interval < 0.0:
        errors.append("run.checkpoint_interval must be >= 0")

    if inf.mode not in INFLOW_MODES:
        errors.append(f"inflow.mode must be one of {', '.join(INFLOW_MODES)}")
    elif inf.mode == "file_replay":
        if not inf.file:
            errors.append("inflow.file is required for file_replay")
        else:
            path = cfg.resolve(inf.file)
            try:
                src = load_inflow_frames(path)
                src.check_plane(g.ny, g.nz)
                if not np.allclose((src.dy, src.dz), (g.dy, g.dz), rtol=1e-9):
                    errors.append(f"inflow.file: frame spacing ({src.dy:g}, {src.dz:g}) does "
                                  f"not match grid spacing ({g.dy:g}, {g.dz:g})")
            except FileNotFoundError:
                errors.append(f"inflow.file not found: {path}")
            except (InflowFormatError, ValueError) as exc:
                errors.append(f"inflow.file: {exc}")
    elif inf.speed < 0.0:
        errors.append("inflow.speed must be >= 0")
    if inf.mode == "power_law_shear" and inf.ref_height <= 0.0:
        errors.append("inflow.ref_height must be > 0")

    blade = None
    try:
        blade = load_blade(cfg.blade_path)
    except (BladeDataError, OSError) as exc:
        errors.append(f"turbine.blade_file: {exc}")
    if tb.n_radial < 2 or tb.n_azimuthal < 4:
        errors.append("turbine.n_radial must be >= 2 and turbine.n_azimuthal >= 4")
    if tb.initial_tsr < 0.0:
        errors.append("turbine.initial_tsr must be >= 0")
    if blade is not None and min(g.dims) >= 2 and min(g.spacing) > 0.0:
        sigma = fl.kernel_sigma or max(g.spacing)
        margin = blade.tip_radius + fl.kernel_cutoff_factor * sigma + max(g.spacing)
        hub = np.array(tb.hub_position)
        lo = np.array(g.origin)
        hi = lo + (np.array(g.dims) - 1) * np.array(g.spacing)
        if np.any(hub - margin < lo) or np.any(hub + margin > hi):
            errors.append(
                f"turbine hub {tuple(float(c) for c in hub)} must be at least {margin:g} m (tip radius + kernel "
                f"cutoff + one cell) from every grid boundary")

    try:
        structural.DriveTrain(st.j_g, st.j_r, st.gear_ratio, st.efficiency)
    except ValueError as exc:
        errors.append(f"structure: {exc}")
    if st.tower_method not in structural.TOWER_METHODS:
        errors.append(f"structure.tower_method must be one of {', '.join(structural.TOWER_METHODS)}")
    try:
        structural.build_tower(st.tower_f1, st.tower_d1, st.tower_mass)
    except ValueError as exc:
        errors.append(f"structure: {exc}")
    try:
        R = blade.tip_radius if blade is not None else 63.0
        control.make_controller(cfg.control_name, cfg.control_params, fl.rho, R)
    except control.ControllerConfigError as exc:
        errors.append(f"control: {exc}")
    return errors


def load_config(path) -> SimConfig:
    """Read and validate a config file; raises :class:`ConfigError` on any problem."""
    cfg, errors = _read(path)
    if errors:
        raise ConfigError(errors, cfg.warnings if cfg else ())
    return cfg


def _read(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        return None, [f"cannot read config {path}: {exc}"]
    entries, errors = parse_config_text(text)
    cfg, more = build_config(entries, path.resolve().parent)
    errors += more
    errors += check_config(cfg)
    return cfg, errors


def validate_config(path):
    """Return ``(config_or_None, errors, warnings)`` listing every problem."""
    cfg, errors = _read(path)
    warnings = cfg.warnings if cfg is not None else []
    return (None if errors else cfg), errors, warnings


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "nrel5mw" / "default.cfg"
