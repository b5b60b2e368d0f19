"""Coupled time stepping of flow, actuator disk, structure and controller.

One step of length ``dt`` runs, in order:

1. advect the flow and reimpose the inflow plane at the new time;
2. sample the wind at every actuator point;
3. form relative velocities with the current tower velocity and rotor speed;
4. compute blade-element loads and the rotor aggregates;
5. apply the momentum sources (then the optional pressure projection);
6. step the tower with the rotor thrust;
7. step the drive-train with the rotor torque and the held generator torque;
8. ask the controller for the torque to hold during the next step;
9. emit a record when the step lands on the output cadence after spin-up.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import control, structural
from .actuator_disk import ActuatorDisk, power_coefficient
from .blade_data import load_blade
from .config import SimConfig
from .flow_field import (
    CFLError, FlowField, PowerLawInflow, PressureProjection, SourceKernel, TrilinearSampler,
    UniformInflow, advect, fill_from_inflow, load_inflow_frames, make_spreader,
    spread_forces, write_snapshot,
)

TIME_SERIES_COLUMNS = (
    ("t", "s"), ("V_hub", "m/s"), ("P_r", "W"), ("P_g", "W"), ("T_g", "N*m"),
    ("omega_g", "rad/s"), ("thrust", "N"), ("x_T", "m"), ("V_fa", "m/s"), ("A_fa", "m/s^2"),
)
TIME_SERIES_HEADER = ",".join(f"{n} [{u}]" for n, u in TIME_SERIES_COLUMNS)
DIAGNOSTICS_HEADER = ("step,t [s],cfl [-],momentum_residual [-],kernel_normalization [-],"
                      "max_divergence [1/s],wall_time [s]")
CHECKPOINT_VERSION = 1


class NumericalError(RuntimeError):
    """The run became unstable (CFL violation or non-finite values)."""

    def __init__(self, message, dump_path=None):
        super().__init__(message)
        self.dump_path = dump_path


class TimeSeriesRecord(NamedTuple):
    t: float
    V_hub: float
    P_r: float
    P_g: float
    T_g: float
    omega_g: float
    thrust: float
    x_T: float
    V_fa: float
    A_fa: float


@dataclass(frozen=True)
class StepReport:
    step: int
    t: float
    cfl: float
    momentum_residual: float
    kernel_normalization: float
    max_divergence: float
    wall_time: float


@dataclass(frozen=True)
class StepResult:
    """Everything computed in one coupled step, for tests and demos."""

    record: TimeSeriesRecord
    report: StepReport
    power: float
    torque: float
    thrust: float
    applied_impulse: np.ndarray
    momentum_change: np.ndarray
    mean_axial_wind: float


def make_inflow(cfg: SimConfig):
    inf = cfg.inflow
    if inf.mode == "uniform":
        return UniformInflow(inf.speed)
    if inf.mode == "power_law_shear":
        return PowerLawInflow(inf.speed, inf.ref_height, inf.exponent)
    return load_inflow_frames(cfg.resolve(inf.file))


class Simulation:
    """All run-time objects for one scenario, advanced with :meth:`step`."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        g, fl, tb, st = cfg.grid, cfg.flow, cfg.turbine, cfg.structure
        self.dt = float(cfg.run.dt)
        self.inflow = make_inflow(cfg)
        self.field = FlowField.uniform(g.dims, g.spacing, g.origin, rho=fl.rho)
        fill_from_inflow(self.field, self.inflow, 0.0)
        self.blade = load_blade(cfg.blade_path)
        self.disk = ActuatorDisk(self.blade, tb.hub_position, np.radians(tb.yaw_deg),
                                 tb.n_radial, tb.n_azimuthal)
        self.kernel = SourceKernel.for_grid(
            g.spacing, fl.kernel_sigma or None, fl.kernel_cutoff_factor, fl.kernel)
        self.sampler = TrilinearSampler(self.field, self.disk.geometry.positions)
        self.spreader = make_spreader(self.field, self.disk.geometry, self.kernel)
        probe = np.array([[g.x0, tb.hub_position[1], tb.hub_position[2]]])
        self.probe = TrilinearSampler(self.field, probe)
        self.projection = PressureProjection(g.dims, g.spacing) if fl.projection else None
        self.drivetrain = structural.DriveTrain(st.j_g, st.j_r, st.gear_ratio, st.efficiency)
        self.tower = structural.build_tower(st.tower_f1, st.tower_d1, st.tower_mass)
        self.controller = control.make_controller(
            cfg.control_name, cfg.control_params, fl.rho, self.blade.tip_radius)
        self.frozen_tower = st.frozen_tower
        self.fixed_speed = tb.fixed_speed
        self.n = 0
        v0 = self.hub_wind()
        omega_g = tb.initial_tsr * v0 / self.blade.tip_radius * self.drivetrain.N
        self.state = structural.TurbineState(omega_g=float(omega_g))
        self._command(thrust=0.0)

    # -------------------------------------------------------------- helpers
    @property
    def t(self):
        return self.n * self.dt

    @property
    def omega_r(self):
        return self.state.omega_g / self.drivetrain.N

    def hub_wind(self):
        """Inflow-plane wind at the hub's (y, z) along the disk normal."""
        return float(self.probe(self.field)[0] @ self.disk.geometry.normal)

    def set_rotor_speed(self, omega_r):
        self.state = self.state.evolve(omega_g=float(omega_r * self.drivetrain.N))

    def _command(self, thrust):
        meas = control.Measurements(self.state.omega_g, thrust, self.hub_wind())
        cmd = self.controller(self.state, meas)
        self.state = self.state.evolve(generator_torque=float(cmd.generator_torque),
                                       pitch=float(cmd.blade_pitch))

    # ----------------------------------------------------------------- step
    def step(self) -> StepResult:
        wall0 = time.perf_counter()
        dt, rho = self.dt, self.field.rho
        t_new = (self.n + 1) * dt
        try:
            cfl = advect(self.field, dt, self.inflow, t_new)
        except CFLError as exc:
            raise NumericalError(f"CFL violation at t={t_new:g} s: {exc}") from None

        wind = self.sampler(self.field)
        omega_r = self.omega_r
        loads = self.disk.loads(wind, omega_r, self.state.v_T, self.state.pitch, rho)
        agg = self.disk.aggregate(loads, omega_r)

        w = self.disk.span_weights
        forces = np.stack([loads.fx * w, loads.fy * w, loads.fz * w], axis=1)
        src = spread_forces(self.field, forces, dt, self.spreader)
        max_div = self.projection(self.field) if self.projection is not None else 0.0
        if not self.field.is_finite():
            raise NumericalError(f"non-finite flow values at t={t_new:g} s")

        if self.frozen_tower:
            x, v, a = self.state.x_T, self.state.v_T, self.state.a_T
        else:
            x, v, a = structural.step_tower(dt, self.state, agg.thrust, self.tower,
                                            self.cfg.structure.tower_method)
        T_g = self.state.generator_torque
        if self.fixed_speed:
            omega_g = self.state.omega_g
        else:
            omega_g = structural.step_drivetrain(dt, self.state, agg.torque, T_g, self.drivetrain)
        self.state = self.state.evolve(omega_g=omega_g, x_T=x, v_T=v, a_T=a, t=t_new)
        self.n += 1
        if not np.all(np.isfinite([omega_g, x, v, a])):
            raise NumericalError(f"non-finite turbine state at t={t_new:g} s")
        self._command(agg.thrust)

        record = TimeSeriesRecord(
            t=t_new, V_hub=self.hub_wind(), P_r=agg.power,
            P_g=self.drivetrain.generator_power(T_g, omega_g), T_g=T_g, omega_g=omega_g,
            thrust=agg.thrust, x_T=x, V_fa=v, A_fa=a)
        report = StepReport(
            step=self.n, t=t_new, cfl=cfl, momentum_residual=src.residual,
            kernel_normalization=src.kernel_normalization, max_divergence=max_div,
            wall_time=time.perf_counter() - wall0)
        return StepResult(record, report, agg.power, agg.torque, agg.thrust,
                          src.applied_impulse, src.momentum_change,
                          self.disk.disk_average_axial_wind(loads))

    def advance(self, duration):
        """Step for ``duration`` seconds; returns the last :class:`StepResult`."""
        last = None
        for _ in range(int(round(duration / self.dt))):
            last = self.step()
        return last

    def power_coefficient(self, power, v0=None):
        v0 = self.cfg.inflow.speed if v0 is None else v0
        return power_coefficient(power, self.field.rho, self.blade.tip_radius, v0)

    # ----------------------------------------------------------- checkpoints
    def save_checkpoint(self, path):
        s = self.state
        np.savez(path, version=CHECKPOINT_VERSION, n=self.n, dt=self.dt,
                 u=self.field.u, v=self.field.v, w=self.field.w,
                 origin=np.asarray(self.field.origin), spacing=np.asarray(self.field.spacing),
                 rho=self.field.rho,
                 state=np.array([s.omega_g, s.x_T, s.v_T, s.a_T, s.t,
                                 s.generator_torque, s.pitch]))
        return Path(path)

    def load_checkpoint(self, path):
        with np.load(path) as ck:
            if int(ck["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"{path}: unsupported checkpoint version")
            if ck["u"].shape != self.field.u.shape or float(ck["dt"]) != self.dt:
                raise ValueError(f"{path}: checkpoint does not match this configuration")
            self.field.u, self.field.v, self.field.w = (ck[k].copy() for k in "uvw")
            self.n = int(ck["n"])
            omega_g, x, v, a, t, tg, pitch = (float(q) for q in ck["state"])
        self.state = structural.TurbineState(omega_g, x, v, a, t, tg, pitch)


def load_checkpoint_field(path) -> tuple[FlowField, float]:
    """Flow field and time stored in a checkpoint (for post-hoc snapshots)."""
    with np.load(path) as ck:
        u = ck["u"].copy()
        f = FlowField(u.shape, tuple(ck["spacing"]), tuple(ck["origin"]), u,
                      ck["v"].copy(), ck["w"].copy(), float(ck["rho"]))
        return f, float(ck["state"][4])


# ---------------------------------------------------------------- outputs


def format_record(rec: TimeSeriesRecord):
    return ",".join(repr(float(x)) for x in rec)


def read_time_series(path):
    """Structured array with the time-series columns (names without units)."""
    names = [n for n, _ in TIME_SERIES_COLUMNS]
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != TIME_SERIES_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return np.rec.fromarrays(list(data.T), names=names)


def snapshot_name(component, axis, index, t):
    return f"{component}_{axis}{index}_{t:g}.csv"


def write_standard_snapshots(field: FlowField, cfg: SimConfig, t, out_dir):
    """Hub-height horizontal plane and the vertical plane through the hub."""
    out_dir = Path(out_dir)
    hub = np.asarray(cfg.turbine.hub_position)
    k = int(np.rint((hub[2] - field.origin[2]) / field.spacing[2]))
    i = int(np.rint((hub[0] - field.origin[0]) / field.spacing[0]))
    paths = []
    for axis, index in (("z", k), ("x", i)):
        for comp in ("speed", "u", "v", "w"):
            p = out_dir / snapshot_name(comp, axis, index, t)
            paths.append(write_snapshot(field, axis, index, comp, p))
    return paths


@dataclass
class RunResult:
    time_series: Path
    diagnostics: Path
    snapshots: list = dc_field(default_factory=list)
    checkpoints: list = dc_field(default_factory=list)
    records: list = dc_field(default_factory=list)
    wall_time: float = 0.0


def _steps(duration, dt):
    return int(round(duration / dt))


def run(cfg: SimConfig, output_dir=None, progress=None, restart=None) -> RunResult:
    """Execute a configured run and write the time series, diagnostics and snapshots.

    ``progress`` is an optional callable receiving each emitted record.
    ``restart`` names a checkpoint to resume from; records before its time
    are not rewritten, so concatenating the two outputs reproduces a single
    uninterrupted run.
    """
    wall0 = time.perf_counter()
    out = Path(output_dir) if output_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    sim = Simulation(cfg)
    if restart is not None:
        sim.load_checkpoint(restart)
    dt = sim.dt
    n_end = _steps(cfg.run.t_end, dt)
    n_spin = _steps(cfg.run.spin_up, dt)
    every = max(1, _steps(cfg.run.cadence, dt))
    ck_every = _steps(cfg.run.checkpoint_interval, dt) if cfg.run.checkpoint_interval > 0 else 0
    snap_steps = {_steps(ts, dt): ts for ts in cfg.run.snapshot_times}
    result = RunResult(out / "timeseries.csv", out / "diagnostics.csv")
    suffix = "" if restart is None else f"_from{sim.t:g}"
    result.time_series = out / f"timeseries{suffix}.csv"
    result.diagnostics = out / f"diagnostics{suffix}.csv"
    with open(result.time_series, "w", encoding="utf-8", newline="\n") as ts, \
            open(result.diagnostics, "w", encoding="utf-8", newline="\n") as diag:
        ts.write(TIME_SERIES_HEADER + "\n")
        diag.write(DIAGNOSTICS_HEADER + "\n")
        if 0 in snap_steps and sim.n == 0:
            result.snapshots += write_standard_snapshots(sim.field, cfg, 0.0, out)
        while sim.n < n_end:
            try:
                res = sim.step()
            except NumericalError as exc:
                exc.dump_path = sim.save_checkpoint(out / "crash_state.npz")
                raise
            rep = res.report
            diag.write(f"{rep.step},{rep.t!r},{rep.cfl!r},{rep.momentum_residual!r},"
                       f"{rep.kernel_normalization!r},{rep.max_divergence!r},"
                       f"{rep.wall_time:.6f}\n")
            if sim.n > n_spin and sim.n % every == 0:
                ts.write(format_record(res.record) + "\n")
                result.records.append(res.record)
                if progress is not None:
                    progress(res.record)
            if sim.n in snap_steps:
                result.snapshots += write_standard_snapshots(
                    sim.field, cfg, snap_steps[sim.n], out)
            if ck_every and sim.n % ck_every == 0:
                result.checkpoints.append(
                    sim.save_checkpoint(out / f"checkpoint_{sim.t:g}.npz"))
    result.wall_time = time.perf_counter() - wall0
    return result


# ---------------------------------------------------------------- Cp sweep


class SweepPoint(NamedTuple):
    tsr: float
    cp: float
    ct: float
    induction: float
    thrust: float
    power: float


def cp_sweep(cfg: SimConfig, tsrs, settle=60.0, dt=None, average=10.0):
    """Fixed-speed, frozen-tower power curve over tip-speed ratios.

    The flow is warm-started from one ratio to the next. At each ratio the
    rotor runs ``settle`` seconds and the last ``average`` seconds are
    averaged. Inflow must be uniform so that ``V0`` is unambiguous.
    """
    if cfg.inflow.mode != "uniform":
        raise ValueError("cp_sweep needs uniform inflow")
    cfg = replace(cfg, turbine=replace(cfg.turbine, fixed_speed=True),
                  structure=replace(cfg.structure, frozen_tower=True),
                  run=replace(cfg.run, dt=dt or cfg.run.dt))
    sim = Simulation(cfg)
    v0 = cfg.inflow.speed
    R = sim.blade.tip_radius
    q = 0.5 * sim.field.rho * np.pi * R ** 2 * v0 ** 2
    n_avg = max(1, _steps(average, sim.dt))
    points = []
    for tsr in tsrs:
        sim.set_rotor_speed(tsr * v0 / R)
        sim.advance(settle - average)
        acc = np.zeros(3)
        for _ in range(n_avg):
            res = sim.step()
            acc += (res.power, res.thrust, res.mean_axial_wind)
        power, thrust, axial = acc / n_avg
        points.append(SweepPoint(float(tsr), float(power / (q * v0)), float(thrust / q),
                                 float(1.0 - axial / v0), float(thrust), float(power)))
    return points
