"""Generator torque control: the baseline Kω² law behind a pluggable interface."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .structural import NREL5MW_GEAR_RATIO, TurbineState

NREL5MW_OMEGA_G_MIN = 41.6470       # rad/s
NREL5MW_OMEGA_G_RATED = 122.9096    # rad/s
NREL5MW_OMEGA_G_MAX = 159.7824      # rad/s
NREL5MW_T_G_MAX = 43_094.0          # N m
NREL5MW_CP_MAX = 0.4868
NREL5MW_LAMBDA_OPT = 7.6
NREL5MW_PITCH_OPT = 0.0


class ControllerConfigError(ValueError):
    """Unknown controller name or invalid controller parameters."""


@dataclass(frozen=True)
class BtcParams:
    K_rotor: float
    N: float
    omega_g_min: float
    omega_g_max: float
    T_g_max: float
    pitch: float = NREL5MW_PITCH_OPT

    def __post_init__(self):
        if self.K_rotor <= 0.0:
            raise ControllerConfigError("K_rotor must be positive")
        if self.N < 1.0:
            raise ControllerConfigError("gear ratio N must be >= 1")
        if not self.omega_g_min < self.omega_g_max:
            raise ControllerConfigError("need omega_g_min < omega_g_max")
        if self.T_g_max <= 0.0:
            raise ControllerConfigError("T_g_max must be positive")

    @property
    def K_generator(self):
        """Equivalent gain on generator speed, ``T_g = (K_rotor/N**3) omega_g**2``."""
        return self.K_rotor / self.N ** 3


class ControlCommand(NamedTuple):
    generator_torque: float
    blade_pitch: float


class Measurements(NamedTuple):
    omega_g: float
    thrust: float = 0.0
    wind_estimate: float = 0.0


def compute_k(rho, R, cp_max, lambda_opt):
    """Optimal-mode rotor-side gain ``pi rho R^5 Cp / (2 lambda^3)``."""
    if min(rho, R, cp_max, lambda_opt) <= 0.0:
        raise ValueError("compute_k inputs must all be positive")
    return np.pi * rho * R ** 5 * cp_max / (2.0 * lambda_opt ** 3)


def nrel5mw_btc_params(rho=1.225, R=63.0) -> BtcParams:
    return BtcParams(
        K_rotor=compute_k(rho, R, NREL5MW_CP_MAX, NREL5MW_LAMBDA_OPT),
        N=NREL5MW_GEAR_RATIO,
        omega_g_min=NREL5MW_OMEGA_G_MIN,
        omega_g_max=NREL5MW_OMEGA_G_MAX,
        T_g_max=NREL5MW_T_G_MAX,
    )


def btc_step(params: BtcParams, omega_g) -> ControlCommand:
    """Region 1 (zero torque below cut-in) and region 2 (``K wr^2 / N``), clamped."""
    if omega_g < params.omega_g_min:
        return ControlCommand(0.0, params.pitch)
    omega_r = omega_g / params.N
    torque = params.K_rotor * omega_r ** 2 / params.N
    return ControlCommand(float(min(max(torque, 0.0), params.T_g_max)), params.pitch)


class Controller:
    """Maps the turbine state and measurements to the next command."""

    name = "base"

    def __call__(self, state: TurbineState, measurements: Measurements) -> ControlCommand:
        raise NotImplementedError


class BaselineTorqueController(Controller):
    name = "btc"

    def __init__(self, params: BtcParams):
        self.params = params

    def __call__(self, state, measurements):
        return btc_step(self.params, measurements.omega_g)


class ConstantTorqueController(Controller):
    """Fixed generator torque, for tests and open-loop experiments."""

    name = "constant_torque"

    def __init__(self, torque, pitch=0.0):
        if torque < 0.0:
            raise ControllerConfigError("constant torque must be >= 0")
        self.torque = float(torque)
        self.pitch = float(pitch)

    def __call__(self, state, measurements):
        return ControlCommand(self.torque, self.pitch)


def _make_btc(params: dict, rho, R):
    base = nrel5mw_btc_params(rho, R)
    cp = float(params.pop("cp_max", NREL5MW_CP_MAX))
    lam = float(params.pop("lambda_opt", NREL5MW_LAMBDA_OPT))
    K = float(params.pop("k_rotor", compute_k(rho, R, cp, lam)))
    return BaselineTorqueController(BtcParams(
        K_rotor=K,
        N=float(params.pop("gear_ratio", base.N)),
        omega_g_min=float(params.pop("omega_g_min", base.omega_g_min)),
        omega_g_max=float(params.pop("omega_g_max", base.omega_g_max)),
        T_g_max=float(params.pop("t_g_max", base.T_g_max)),
        pitch=np.radians(float(params.pop("pitch_deg", 0.0))),
    ))


def _make_constant(params: dict, rho, R):
    if "torque" not in params:
        raise ControllerConfigError("constant_torque needs control.torque")
    return ConstantTorqueController(float(params.pop("torque")),
                                    np.radians(float(params.pop("pitch_deg", 0.0))))


CONTROLLERS: dict[str, Callable[..., Controller]] = {
    "btc": _make_btc,
    "constant_torque": _make_constant,
}


def make_controller(name, params=None, rho=1.225, R=63.0) -> Controller:
    """Build a registered controller; unknown names and leftover parameters fail fast."""
    try:
        factory = CONTROLLERS[name]
    except KeyError:
        raise ControllerConfigError(
            f"unknown controller {name!r}; available: {', '.join(sorted(CONTROLLERS))}") from None
    params = dict(params or {})
    try:
        controller = factory(params, rho, R)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ControllerConfigError):
            raise
        raise ControllerConfigError(f"controller {name!r}: {exc}") from None
    if params:
        raise ControllerConfigError(
            f"controller {name!r} does not accept: {', '.join(sorted(params))}")
    return controller
