"""Drive-train and tower fore-aft dynamics.

The drive-train is a single rigid shaft referred to the generator side,
``J dw_g/dt = T_r/N - T_g``, advanced with explicit Euler. The tower top is
a damped oscillator driven by rotor thrust,
``M_T x'' + B_T x' + K_T x = T``, advanced with the implicit midpoint rule
(symplectic, second order). Symplectic Euler is available as an option.

With the midpoint rule, the energy change over a step is exactly
``dt * v_mid * (T - B_T * v_mid)``. The free mode therefore loses energy on
every step at any ``dt``. Symplectic Euler only does so when
``dt < 4 d1 / omega1``, which is about 0.0196 s for the NREL tower.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# NREL 5-MW reference turbine
NREL5MW_ROTOR_INERTIA = 35_444_067.0      # kg m^2
NREL5MW_GENERATOR_INERTIA = 534.116       # kg m^2
NREL5MW_GEAR_RATIO = 97.0
NREL5MW_GENERATOR_EFFICIENCY = 0.9440
NREL5MW_NACELLE_MASS = 240_000.0          # kg
NREL5MW_HUB_MASS = 56_780.0               # kg
NREL5MW_BLADE_MASS = 17_848.77            # kg
NREL5MW_TOWER_FREQUENCY = 0.3240          # Hz, first fore-aft mode
NREL5MW_TOWER_DAMPING = 0.01              # damping ratio of that mode


@dataclass(frozen=True)
class DriveTrain:
    """Rigid shaft with inertia ``J = J_g + J_r/N**2`` seen from the generator."""

    J_g: float
    J_r: float
    N: float
    eta: float = 1.0

    def __post_init__(self):
        if self.J_g <= 0.0 or self.J_r <= 0.0:
            raise ValueError("drive-train inertias must be positive")
        if self.N < 1.0:
            raise ValueError("gear ratio N must be >= 1")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("generator efficiency must satisfy 0 < eta <= 1")

    @property
    def J(self):
        return self.J_g + self.J_r / self.N ** 2

    def generator_power(self, T_g, omega_g):
        """Electrical power ``eta * T_g * omega_g`` (W)."""
        return self.eta * T_g * omega_g


@dataclass(frozen=True)
class TowerModel:
    M_T: float
    B_T: float
    K_T: float
    f1: float
    d1: float

    def __post_init__(self):
        if self.M_T <= 0.0 or self.K_T <= 0.0 or self.B_T < 0.0:
            raise ValueError("tower needs M_T > 0, K_T > 0 and B_T >= 0")

    def acceleration(self, x, v, thrust):
        return (thrust - self.B_T * v - self.K_T * x) / self.M_T

    def energy(self, x, v):
        """Mechanical energy of the mode (J)."""
        return 0.5 * self.M_T * v * v + 0.5 * self.K_T * x * x


def build_tower(f1, d1, M_T) -> TowerModel:
    """Tower mode with ``K_T = M_T (2 pi f1)^2`` and ``B_T = 2 d1 sqrt(K_T M_T)``."""
    if f1 <= 0.0:
        raise ValueError(f"f1 must be positive, got {f1}")
    if not 0.0 <= d1 < 1.0:
        raise ValueError(f"damping ratio must satisfy 0 <= d1 < 1, got {d1}")
    if M_T <= 0.0:
        raise ValueError(f"M_T must be positive, got {M_T}")
    K_T = M_T * (2.0 * np.pi * f1) ** 2
    B_T = 2.0 * d1 * np.sqrt(K_T * M_T)
    return TowerModel(M_T=float(M_T), B_T=float(B_T), K_T=float(K_T), f1=float(f1), d1=float(d1))


def nrel5mw_tower_mass(nacelle=NREL5MW_NACELLE_MASS, hub=NREL5MW_HUB_MASS,
                       blade=NREL5MW_BLADE_MASS, num_blades=3):
    """Tower-top lumped mass: nacelle, hub and blades."""
    return nacelle + hub + num_blades * blade


def nrel5mw_drivetrain() -> DriveTrain:
    return DriveTrain(J_g=NREL5MW_GENERATOR_INERTIA, J_r=NREL5MW_ROTOR_INERTIA,
                      N=NREL5MW_GEAR_RATIO, eta=NREL5MW_GENERATOR_EFFICIENCY)


def nrel5mw_tower() -> TowerModel:
    return build_tower(NREL5MW_TOWER_FREQUENCY, NREL5MW_TOWER_DAMPING, nrel5mw_tower_mass())


@dataclass(frozen=True)
class TurbineState:
    """Dynamic state handed from one coupled step to the next.

    ``generator_torque`` and ``pitch`` hold the controller command applied
    during the next step.
    """

    omega_g: float
    x_T: float = 0.0
    v_T: float = 0.0
    a_T: float = 0.0
    t: float = 0.0
    generator_torque: float = 0.0
    pitch: float = 0.0

    def __post_init__(self):
        vals = (self.omega_g, self.x_T, self.v_T, self.a_T, self.t,
                self.generator_torque, self.pitch)
        if not all(np.isfinite(vals)):
            raise ValueError("turbine state must be finite")
        if self.omega_g < 0.0:
            raise ValueError("omega_g must be >= 0")

    def omega_r(self, N):
        return self.omega_g / N

    def evolve(self, **changes):
        return replace(self, **changes)


def step_drivetrain(dt, state: TurbineState, T_r, T_g, drivetrain: DriveTrain):
    """Explicit Euler step of the shaft speed, clamped at zero (rad/s)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    domega = (T_r / drivetrain.N - T_g) / drivetrain.J
    return max(0.0, state.omega_g + dt * domega)


TOWER_METHODS = ("midpoint", "symplectic_euler")


def step_tower(dt, state: TurbineState, thrust, tower: TowerModel, method="midpoint"):
    """Advance the tower one step; returns ``(x_T, v_T, a_T)`` at the new state.

    ``thrust`` is held constant over the step. The reported acceleration is
    evaluated at the updated state.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    M, B, K = tower.M_T, tower.B_T, tower.K_T
    x0, v0 = state.x_T, state.v_T
    if method == "midpoint":
        # x1 = x0 + dt*(v0 + v1)/2 and M*(v1 - v0) = dt*(T - B*vm - K*xm), solved for v1
        c = 0.5 * dt * B + 0.25 * dt * dt * K
        v = (v0 * (M - c) + dt * (thrust - K * x0)) / (M + c)
        x = x0 + 0.5 * dt * (v0 + v)
    elif method == "symplectic_euler":
        v = v0 + dt * tower.acceleration(x0, v0, thrust)
        x = x0 + dt * v
    else:
        raise ValueError(f"unknown tower integrator {method!r}; use one of {TOWER_METHODS}")
    return x, v, tower.acceleration(x, v, thrust)


def simulate_tower(tower: TowerModel, x0, v0, dt, n_steps, thrust=0.0, method="midpoint"):
    """Integrate the tower mode alone; returns (t, x, v) arrays of length n_steps+1."""
    t = np.arange(n_steps + 1) * dt
    x = np.empty(n_steps + 1)
    v = np.empty(n_steps + 1)
    x[0], v[0] = x0, v0
    state = TurbineState(omega_g=0.0, x_T=x0, v_T=v0)
    for k in range(n_steps):
        xn, vn, an = step_tower(dt, state, thrust, tower, method)
        state = state.evolve(x_T=xn, v_T=vn, a_T=an)
        x[k + 1], v[k + 1] = xn, vn
    return t, x, v


def free_decay_estimate(t, x):
    """Damped frequency (Hz) and damping ratio from a free-decay record.

    The period comes from the mean spacing of upward zero crossings
    (linearly interpolated) and the damping from the log decrement of
    successive positive peaks.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    up = np.nonzero((x[:-1] < 0.0) & (x[1:] >= 0.0))[0]
    if up.size < 2:
        raise ValueError("record holds fewer than two upward zero crossings")
    tc = t[up] - x[up] * (t[up + 1] - t[up]) / (x[up + 1] - x[up])
    period = float(np.mean(np.diff(tc)))
    peaks = [x[a:b].max() for a, b in zip(up[:-1], up[1:])]
    delta = float(np.mean(np.log(np.asarray(peaks[:-1]) / np.asarray(peaks[1:]))))
    zeta = delta / np.sqrt(4.0 * np.pi ** 2 + delta ** 2)
    return 1.0 / period, zeta
