"""Generalized actuator disk: polar point mesh, blade-element loads, aggregates.

Frame conventions (grid coordinates, x streamwise, z up):

* disk normal ``n = (cos yaw, sin yaw, 0)``, positive downwind;
* in-plane horizontal axis ``h = (-sin yaw, cos yaw, 0)``;
* a point at azimuth ``zeta`` sits along ``e_r = cos(zeta) h - sin(zeta) z``
  and the blades move along ``e_t = -sin(zeta) h - cos(zeta) z``.

With these directions the grid-frame force on the blade,
``Fn n + Ft e_t``, is exactly the component form returned by
:func:`project_loads`. The flow receives the opposite force.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blade_data import BladeDefinition, interpolate_station

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class DiskGeometry:
    """Cell-centred polar mesh of actuator points (radial-major ordering)."""

    hub_position: np.ndarray
    yaw: float
    n_radial: int
    n_azimuthal: int
    root_radius: float
    tip_radius: float
    r: np.ndarray
    zeta: np.ndarray
    dr: np.ndarray
    dzeta: np.ndarray
    positions: np.ndarray

    @property
    def n_points(self):
        return self.r.size

    @property
    def normal(self):
        return np.array([np.cos(self.yaw), np.sin(self.yaw), 0.0])

    @property
    def _horizontal(self):
        return np.array([-np.sin(self.yaw), np.cos(self.yaw), 0.0])

    @property
    def radial(self):
        c, s = np.cos(self.zeta)[:, None], np.sin(self.zeta)[:, None]
        return c * self._horizontal - s * np.array([0.0, 0.0, 1.0])

    @property
    def tangential(self):
        c, s = np.cos(self.zeta)[:, None], np.sin(self.zeta)[:, None]
        return -s * self._horizontal - c * np.array([0.0, 0.0, 1.0])

    @property
    def areas(self):
        """Swept area represented by each point (m^2)."""
        return self.r * self.dr * self.dzeta

    def blade_weights(self, num_blades):
        """Span length (m) each point carries once B blades are smeared azimuthally."""
        return num_blades * self.dr * self.dzeta / TWO_PI

    def to_csv(self, path, num_blades=3):
        w = self.blade_weights(num_blades)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("r_m,zeta_rad,x_m,y_m,z_m,dr_m,dzeta_rad,area_m2,span_weight_m\n")
            for i in range(self.n_points):
                x, y, z = self.positions[i]
                row = (self.r[i], self.zeta[i], x, y, z, self.dr[i], self.dzeta[i],
                       self.areas[i], w[i])
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def build_disk(blade: BladeDefinition, hub_position, yaw=0.0, n_radial=20, n_azimuthal=36):
    if n_radial < 2 or n_azimuthal < 4:
        raise ValueError(
            f"disk resolution needs n_radial >= 2 and n_azimuthal >= 4, "
            f"got {n_radial} x {n_azimuthal}")
    hub = np.asarray(hub_position, dtype=float).reshape(3)
    r0, r1 = float(blade.root_radius), float(blade.tip_radius)
    dr = (r1 - r0) / n_radial
    dz = TWO_PI / n_azimuthal
    radii = r0 + (np.arange(n_radial) + 0.5) * dr
    zetas = (np.arange(n_azimuthal) + 0.5) * dz
    r, zeta = (a.ravel() for a in np.meshgrid(radii, zetas, indexing="ij"))
    n = r.size
    geom = DiskGeometry(
        hub_position=hub, yaw=float(yaw), n_radial=n_radial, n_azimuthal=n_azimuthal,
        root_radius=r0, tip_radius=r1, r=r, zeta=zeta,
        dr=np.full(n, dr), dzeta=np.full(n, dz), positions=np.empty((n, 3)))
    object.__setattr__(geom, "positions", hub + r[:, None] * geom.radial)
    return geom


class DiskSections:
    """Blade-section properties evaluated once per actuator point.

    Polar blending between stations is folded into a dense (points x polars)
    weight matrix so that a lookup is one table interpolation per distinct
    polar.
    """

    def __init__(self, blade: BladeDefinition, disk: DiskGeometry):
        self.polars = blade.polars
        index = {id(p): k for k, p in enumerate(self.polars)}
        n = disk.n_points
        self.chord = np.empty(n)
        self.twist = np.empty(n)
        self.weights = np.zeros((n, len(self.polars)))
        cache = {}
        for i, r in enumerate(disk.r):
            if r not in cache:
                cache[r] = interpolate_station(blade, r)
            chord, twist, blend = cache[r]
            self.chord[i] = chord
            self.twist[i] = twist
            self.weights[i, index[id(blend.inner)]] += 1.0 - blend.weight
            self.weights[i, index[id(blend.outer)]] += blend.weight
        self._active = [k for k in range(len(self.polars)) if np.any(self.weights[:, k])]

    def lookup(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        cl = np.zeros_like(alpha)
        cd = np.zeros_like(alpha)
        for k in self._active:
            c, d = self.polars[k].lookup(alpha)
            cl += self.weights[:, k] * c
            cd += self.weights[:, k] * d
        return cl, cd


class ElementLoads(NamedTuple):
    alpha: np.ndarray
    cl: np.ndarray
    cd: np.ndarray
    fl: np.ndarray
    fd: np.ndarray
    fn: np.ndarray
    ft: np.ndarray


@dataclass(frozen=True, eq=False)
class PointLoads:
    """Per-point relative flow and forces per unit span (N/m)."""

    v_rel: np.ndarray
    psi: np.ndarray
    alpha: np.ndarray
    fl: np.ndarray
    fd: np.ndarray
    fn: np.ndarray
    ft: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray
    axial_wind: np.ndarray


class RotorAggregates(NamedTuple):
    power: float
    torque: float
    thrust: float


def relative_velocity(disk: DiskGeometry, wind, omega_r, tower_velocity=0.0):
    """Relative speed and advance angle at every actuator point.

    ``wind`` is (n_points, 3) or broadcastable. The axial component is the
    wind along the disk normal minus the tower-top fore-aft velocity; the
    tangential component is the blade speed minus the wind along the blade
    motion.
    """
    wind = np.broadcast_to(np.asarray(wind, dtype=float), (disk.n_points, 3))
    axial = wind @ disk.normal - tower_velocity
    tangential = omega_r * disk.r - np.einsum("ij,ij->i", wind, disk.tangential)
    return np.hypot(axial, tangential), np.arctan2(axial, tangential)


def element_loads(v_rel, psi, pitch, twist, chord, polar, rho) -> ElementLoads:
    """Blade-element lift/drag and their axial/tangential split.

    ``polar`` is anything with ``lookup(alpha) -> (cl, cd)``.
    """
    alpha = psi - pitch - twist
    cl, cd = polar.lookup(alpha)
    q = 0.5 * rho * np.square(v_rel) * chord
    fl = q * cl
    fd = q * cd
    c, s = np.cos(psi), np.sin(psi)
    fn = fl * c + fd * s
    ft = fl * s - fd * c
    return ElementLoads(alpha, cl, cd, fl, fd, fn, ft)


def project_loads(fn, ft, Phi, zeta):
    """Axial/tangential loads to grid-frame components for disk yaw ``Phi``."""
    sz = np.sin(zeta)
    fx = fn * np.cos(Phi) + ft * sz * np.sin(Phi)
    fy = fn * np.sin(Phi) - ft * sz * np.cos(Phi)
    fz = -ft * np.cos(zeta)
    return fx, fy, fz


def aggregate(loads: PointLoads, disk: DiskGeometry, omega_r, num_blades) -> RotorAggregates:
    w = disk.blade_weights(num_blades)
    thrust = float(np.sum(loads.fn * w))
    if omega_r <= 0.0:
        return RotorAggregates(0.0, 0.0, thrust)
    power = float(np.sum(loads.ft * omega_r * disk.r * w))
    return RotorAggregates(power, power / omega_r, thrust)


class MomentumOracle(NamedTuple):
    v1: float
    v2: float
    thrust: float
    power: float


def momentum_oracle(v0, a_n, rho, R) -> MomentumOracle:
    """Classical one-dimensional momentum theory for an ideal disk of radius R."""
    if not 0.0 <= a_n < 0.5:
        raise ValueError(f"induction factor must satisfy 0 <= a_n < 0.5, got {a_n}")
    area = np.pi * R ** 2
    q = 0.5 * rho * area * v0 ** 2
    return MomentumOracle(
        v1=v0 * (1.0 - a_n),
        v2=v0 * (1.0 - 2.0 * a_n),
        thrust=q * 4.0 * a_n * (1.0 - a_n),
        power=q * v0 * 4.0 * a_n * (1.0 - a_n) ** 2,
    )


def power_coefficient(power, rho, R, v0):
    return power / (0.5 * rho * np.pi * R ** 2 * v0 ** 3)


class ActuatorDisk:
    """A blade definition bound to a disk mesh, ready for repeated load evaluation."""

    def __init__(self, blade: BladeDefinition, hub_position, yaw=0.0, n_radial=20, n_azimuthal=36):
        self.blade = blade
        self.geometry = build_disk(blade, hub_position, yaw, n_radial, n_azimuthal)
        self.sections = DiskSections(blade, self.geometry)
        self.span_weights = self.geometry.blade_weights(blade.num_blades)

    @property
    def num_blades(self):
        return self.blade.num_blades

    @property
    def radius(self):
        return self.blade.tip_radius

    def loads(self, wind, omega_r, tower_velocity=0.0, pitch=0.0, rho=1.225) -> PointLoads:
        g = self.geometry
        wind = np.broadcast_to(np.asarray(wind, dtype=float), (g.n_points, 3))
        v_rel, psi = relative_velocity(g, wind, omega_r, tower_velocity)
        el = element_loads(v_rel, psi, pitch, self.sections.twist, self.sections.chord,
                           self.sections, rho)
        fx, fy, fz = project_loads(el.fn, el.ft, g.yaw, g.zeta)
        return PointLoads(v_rel=v_rel, psi=psi, alpha=el.alpha, fl=el.fl, fd=el.fd,
                          fn=el.fn, ft=el.ft, fx=fx, fy=fy, fz=fz,
                          axial_wind=wind @ g.normal)

    def aggregate(self, loads: PointLoads, omega_r) -> RotorAggregates:
        return aggregate(loads, self.geometry, omega_r, self.num_blades)

    def disk_average_axial_wind(self, loads: PointLoads):
        a = self.geometry.areas
        return float(np.sum(loads.axial_wind * a) / np.sum(a))
