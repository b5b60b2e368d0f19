"""Desk-scale 3D flow grid: inflow replay, upwind advection, momentum sources.

The grid stores u, v, w at nodes ``origin + (i*dx, j*dy, k*dz)``; each node
owns one cell of volume ``dx*dy*dz``. Column ``i = 0`` is the inflow plane
and is always overwritten from the :class:`InflowSource`. The outflow face
and the lateral/top/bottom faces use zero-gradient velocity.

This is not an LES solver. It advects, adds actuator forces through a
truncated Gaussian kernel and, optionally, removes the divergent part of the
velocity with a pressure projection so that the disk sees realistic
induction.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numba
import numpy as np
from scipy import fft, sparse

INFLOW_MAGIC = "GADINFLOW"
INFLOW_VERSION = 1


class CFLError(RuntimeError):
    def __init__(self, cfl, limit=1.0):
        super().__init__(f"CFL number {cfl:.4g} exceeds {limit}; step refused")
        self.cfl = cfl


class InflowFormatError(ValueError):
    pass


class SourcePlacementError(ValueError):
    pass


@dataclass(eq=False)
class FlowField:
    dims: tuple
    spacing: tuple
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    rho: float = 1.225

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.spacing = tuple(float(d) for d in self.spacing)
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        if any(n < 2 for n in self.dims):
            raise ValueError(f"grid dims must all be >= 2, got {self.dims}")
        if any(d <= 0.0 for d in self.spacing):
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        if self.rho <= 0.0:
            raise ValueError("air density must be positive")
        for name in ("u", "v", "w"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            if arr.shape != self.dims:
                raise ValueError(f"{name} has shape {arr.shape}, expected {self.dims}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} holds non-finite values; velocities must be finite")
            setattr(self, name, arr)

    @classmethod
    def uniform(cls, dims, spacing, origin=(0.0, 0.0, 0.0), velocity=(0.0, 0.0, 0.0), rho=1.225):
        dims = tuple(int(n) for n in dims)
        u, v, w = (np.full(dims, float(c)) for c in velocity)
        return cls(dims, spacing, origin, u, v, w, rho)

    @property
    def cell_volume(self):
        dx, dy, dz = self.spacing
        return dx * dy * dz

    def axis(self, k):
        return self.origin[k] + self.spacing[k] * np.arange(self.dims[k])

    @property
    def upper(self):
        return self.origin + self.spacing * (np.array(self.dims) - 1)

    def copy(self):
        return FlowField(self.dims, self.spacing, self.origin.copy(),
                         self.u.copy(), self.v.copy(), self.w.copy(), self.rho)

    def momentum(self):
        """Total momentum (kg m/s) per component."""
        s = self.rho * self.cell_volume
        return np.array([self.u.sum(), self.v.sum(), self.w.sum()]) * s

    def kinetic_energy(self):
        return 0.5 * self.rho * self.cell_volume * float(
            np.sum(self.u ** 2 + self.v ** 2 + self.w ** 2))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))
                    and np.all(np.isfinite(self.w)))

    def contains(self, position, margin=0.0):
        p = np.asarray(position, dtype=float)
        return bool(np.all(p >= self.origin + margin) and np.all(p <= self.upper - margin))


# ---------------------------------------------------------------- inflow


class InflowSource:
    """Velocity on the upstream (i = 0) plane as a function of time."""

    mode = "abstract"

    def plane(self, t, y, z):
        """Return (u, v, w) arrays of shape (len(y), len(z)) at time ``t``."""
        raise NotImplementedError

    def check_plane(self, ny, nz):
        """Raise if this source cannot fill an ny x nz inflow plane."""


@dataclass
class UniformInflow(InflowSource):
    speed: float
    mode = "uniform"

    def plane(self, t, y, z):
        shape = (len(y), len(z))
        return np.full(shape, float(self.speed)), np.zeros(shape), np.zeros(shape)


@dataclass
class PowerLawInflow(InflowSource):
    """``u = speed * ((z - ground) / ref_height) ** exponent``.

    Heights below ``min_height`` above the ground are clamped to it.
    """

    speed: float
    ref_height: float
    exponent: float = 0.14
    ground_level: float = 0.0
    min_height: float = 1.0
    mode = "power_law_shear"

    def plane(self, t, y, z):
        h = np.maximum(np.asarray(z, dtype=float) - self.ground_level, self.min_height)
        profile = self.speed * (h / self.ref_height) ** self.exponent
        shape = (len(y), len(z))
        return np.broadcast_to(profile, shape).copy(), np.zeros(shape), np.zeros(shape)


@dataclass(eq=False)
class FileInflow(InflowSource):
    """Frames replayed with linear interpolation in time, held outside their span."""

    times: np.ndarray
    frames: np.ndarray  # (n_frames, 3, ny, nz)
    dy: float
    dz: float
    path: str = ""
    mode = "file_replay"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 4 or self.frames.shape[1] != 3:
            raise InflowFormatError("frames must have shape (n_frames, 3, ny, nz)")
        if self.times.size != self.frames.shape[0] or self.times.size < 1:
            raise InflowFormatError("need one timestamp per frame and at least one frame")
        if np.any(np.diff(self.times) <= 0.0):
            raise InflowFormatError("non-monotone timestamps")

    @property
    def plane_shape(self):
        return self.frames.shape[2:]

    def check_plane(self, ny, nz):
        if self.plane_shape != (ny, nz):
            raise InflowFormatError(
                f"inflow frame dims {self.plane_shape} do not match the grid inflow plane ({ny}, {nz})")

    def plane(self, t, y, z):
        self.check_plane(len(y), len(z))
        times = self.times
        if times.size == 1 or t <= times[0]:
            f = self.frames[0]
        elif t >= times[-1]:
            f = self.frames[-1]
        else:
            k = int(np.searchsorted(times, t, side="right")) - 1
            s = (t - times[k]) / (times[k + 1] - times[k])
            f = (1.0 - s) * self.frames[k] + s * self.frames[k + 1]
        return f[0].copy(), f[1].copy(), f[2].copy()


def write_inflow_frames(path, times, frames, dy, dz):
    """Write frames of shape (n_frames, 3, ny, nz) in the replay text format."""
    frames = np.asarray(frames, dtype=float)
    n, _, ny, nz = frames.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{INFLOW_MAGIC} {INFLOW_VERSION} {ny} {nz} {float(dy)!r} {float(dz)!r} {n}\n")
        for t, fr in zip(times, frames):
            fh.write(f"{float(t)!r}\n")
            for j in range(ny):
                for k in range(nz):
                    u, v, w = (float(c) for c in fr[:, j, k])
                    fh.write(f"{u!r} {v!r} {w!r}\n")


def load_inflow_frames(path) -> FileInflow:
    """Parse an inflow replay file.

    Header: ``GADINFLOW <version> <ny> <nz> <dy> <dz> <n_frames>``. Each frame
    is a timestamp line followed by ny*nz ``u v w`` rows, j-major.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InflowFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 7 or head[0] != INFLOW_MAGIC:
        raise InflowFormatError(f"{path}: malformed header {lines[0]!r}")
    try:
        version, ny, nz = int(head[1]), int(head[2]), int(head[3])
        dy, dz = float(head[4]), float(head[5])
        n_frames = int(head[6])
    except ValueError:
        raise InflowFormatError(f"{path}: malformed header {lines[0]!r}") from None
    if version != INFLOW_VERSION:
        raise InflowFormatError(f"{path}: unsupported version {version}")
    if ny < 1 or nz < 1 or n_frames < 1:
        raise InflowFormatError(f"{path}: malformed header {lines[0]!r}")
    per_frame = 1 + ny * nz
    if len(lines) - 1 != n_frames * per_frame:
        raise InflowFormatError(
            f"{path}: dimension mismatch, expected {n_frames} frames of {ny}x{nz} rows")
    times = np.empty(n_frames)
    frames = np.empty((n_frames, 3, ny, nz))
    for f in range(n_frames):
        base = 1 + f * per_frame
        try:
            times[f] = float(lines[base])
            rows = np.array([[float(x) for x in ln.split()] for ln in lines[base + 1: base + per_frame]])
        except ValueError as exc:
            raise InflowFormatError(f"{path}: frame {f}: {exc}") from None
        if rows.shape != (ny * nz, 3):
            raise InflowFormatError(f"{path}: frame {f}: dimension mismatch")
        frames[f] = rows.T.reshape(3, ny, nz)
    if np.any(np.diff(times) <= 0.0):
        raise InflowFormatError(f"{path}: non-monotone timestamps")
    return FileInflow(times, frames, dy, dz, str(path))


def impose_inflow(field: FlowField, inflow: InflowSource, t):
    u, v, w = inflow.plane(t, field.axis(1), field.axis(2))
    field.u[0] = u
    field.v[0] = v
    field.w[0] = w


def fill_from_inflow(field: FlowField, inflow: InflowSource, t=0.0):
    """Initialise the whole field by copying the inflow plane along x."""
    u, v, w = inflow.plane(t, field.axis(1), field.axis(2))
    field.u[:] = u
    field.v[:] = v
    field.w[:] = w


# ---------------------------------------------------------------- sampling


def _trilinear_stencil(field: FlowField, positions):
    p = np.atleast_2d(np.asarray(positions, dtype=float))
    lo, hi = field.origin, field.upper
    tol = 1e-9 * np.asarray(field.spacing)
    if np.any(p < lo - tol) or np.any(p > hi + tol):
        raise ValueError("position outside grid bounds")
    s = (p - lo) / np.asarray(field.spacing)
    dims = np.array(field.dims)
    i0 = np.clip(np.floor(s).astype(int), 0, dims - 2)
    f = np.clip(s - i0, 0.0, 1.0)
    idx, wts = [], []
    for di in (0, 1):
        for dj in (0, 1):
            for dk in (0, 1):
                ii, jj, kk = i0[:, 0] + di, i0[:, 1] + dj, i0[:, 2] + dk
                wx = f[:, 0] if di else 1.0 - f[:, 0]
                wy = f[:, 1] if dj else 1.0 - f[:, 1]
                wz = f[:, 2] if dk else 1.0 - f[:, 2]
                idx.append(np.ravel_multi_index((ii, jj, kk), field.dims))
                wts.append(wx * wy * wz)
    return np.stack(idx, axis=1), np.stack(wts, axis=1)


def sample_velocity(field: FlowField, position):
    """Trilinear interpolation of (u, v, w) at one position."""
    idx, wts = _trilinear_stencil(field, position)
    out = np.array([np.dot(wts[0], c.ravel()[idx[0]]) for c in (field.u, field.v, field.w)])
    return out


class TrilinearSampler:
    """Precomputed trilinear interpolation from the grid to fixed points."""

    def __init__(self, field: FlowField, positions):
        idx, wts = _trilinear_stencil(field, positions)
        n = idx.shape[0]
        rows = np.repeat(np.arange(n), 8)
        self.matrix = sparse.csr_matrix((wts.ravel(), (rows, idx.ravel())),
                                        shape=(n, int(np.prod(field.dims))))

    def __call__(self, field: FlowField):
        m = self.matrix
        return np.stack([m @ field.u.ravel(), m @ field.v.ravel(), m @ field.w.ravel()], axis=1)


# ---------------------------------------------------------------- sources


KERNEL_SHAPES = ("isotropic", "normal")


@dataclass(frozen=True)
class SourceKernel:
    """Truncated Gaussian G(dn), renormalised after truncation.

    ``shape="isotropic"`` uses the 3D distance from the cell centre to the
    actuator point. ``shape="normal"`` uses only the distance along the disk
    normal and spreads in-plane with linear (cloud-in-cell) weights over the
    point's polar cell, which keeps the loading inside the rotor footprint.
    """

    sigma: float
    cutoff_radius: float
    shape: str = "isotropic"

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("kernel sigma must be positive")
        if self.cutoff_radius < 3.0 * self.sigma * (1.0 - 1e-12):
            raise ValueError("kernel cutoff_radius must be >= 3 sigma")
        if self.shape not in KERNEL_SHAPES:
            raise ValueError(f"kernel shape must be one of {KERNEL_SHAPES}, got {self.shape!r}")

    @classmethod
    def for_grid(cls, spacing, sigma=None, cutoff_factor=3.0, shape="isotropic"):
        sigma = float(max(spacing)) if sigma is None else float(sigma)
        return cls(sigma, cutoff_factor * sigma, shape)

    def density(self, d):
        """Kernel density (1/m^3 for isotropic, 1/m for normal) at distance ``d``."""
        s2 = self.sigma ** 2
        if self.shape == "normal":
            return np.exp(-0.5 * np.square(d) / s2) / np.sqrt(2.0 * np.pi * s2)
        return np.exp(-0.5 * np.square(d) / s2) / ((2.0 * np.pi * s2) ** 1.5)


def _check_placement(field, positions, margin):
    for pt in positions:
        if not field.contains(pt, margin):
            raise SourcePlacementError(
                f"actuator point {pt} is closer than the kernel cutoff "
                f"({margin:g} m) to the grid boundary")


class KernelSpreader:
    """Sparse map from point forces to per-cell weights G(dn)*volume.

    Column sums are exactly one after renormalisation; ``raw_mass`` keeps the
    truncated integral before renormalisation for diagnostics. Use
    :func:`make_spreader` to honour the kernel shape.
    """

    def __init__(self, field: FlowField, positions, kernel: SourceKernel):
        p = np.atleast_2d(np.asarray(positions, dtype=float))
        _check_placement(field, p, kernel.cutoff_radius)
        spacing = np.asarray(field.spacing)
        ext = np.ceil(kernel.cutoff_radius / spacing).astype(int)
        offs = [np.arange(-e, e + 1) for e in ext]
        rows, cols, vals = [], [], []
        raw = np.empty(len(p))
        vol = field.cell_volume
        dims = np.array(field.dims)
        for n, pt in enumerate(p):
            c = np.rint((pt - field.origin) / spacing).astype(int)
            ii, jj, kk = (np.clip(c[a] + offs[a], 0, dims[a] - 1) for a in range(3))
            ii, jj, kk = np.unique(ii), np.unique(jj), np.unique(kk)
            I, Jj, K = np.meshgrid(ii, jj, kk, indexing="ij")
            xyz = field.origin + spacing * np.stack([I, Jj, K], axis=-1)
            d = np.linalg.norm(xyz - pt, axis=-1)
            inside = d <= kernel.cutoff_radius
            g = kernel.density(d[inside]) * vol
            raw[n] = g.sum()
            rows.append(np.ravel_multi_index((I[inside], Jj[inside], K[inside]), field.dims))
            cols.append(np.full(g.size, n))
            vals.append(g / raw[n])
        self._finish(field, len(p), rows, cols, vals, raw)

    def _finish(self, field, n_points, rows, cols, vals, raw):
        self.raw_mass = raw
        self.matrix = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(int(np.prod(field.dims)), n_points))
        self.normalization = np.asarray(self.matrix.sum(axis=0)).ravel()


class NormalKernelSpreader(KernelSpreader):
    """Disk-aware spreader for ``shape="normal"`` kernels.

    Each actuator point's polar cell is sub-sampled at no more than half a
    grid spacing. Every sub-sample deposits onto the grid with weight
    ``G(dn) * hat(q_h) * hat(q_z)``, where ``dn`` is the cell's distance
    along the disk normal and ``q_h``, ``q_z`` are the in-plane offsets
    (horizontal and vertical) measured in grid spacings.
    """

    def __init__(self, field: FlowField, disk, kernel: SourceKernel):
        spacing = np.asarray(field.spacing)
        h = float(spacing.max())
        n_vec = disk.normal
        h_vec = np.array([-n_vec[1], n_vec[0], 0.0])
        # true support of one sub-sample along each grid axis
        reach = kernel.cutoff_radius * np.abs(n_vec) + h * (np.abs(h_vec) + np.array([0.0, 0.0, 1.0]))
        rows, cols, vals = [], [], []
        raw = np.empty(disk.n_points)
        vol = field.cell_volume
        dims = np.array(field.dims)
        for n in range(disk.n_points):
            r, zeta, dr, dz = disk.r[n], disk.zeta[n], disk.dr[n], disk.dzeta[n]
            nr = max(2, int(np.ceil(2.0 * dr / h)))
            nz = max(2, int(np.ceil(2.0 * r * dz / h)))
            rs = r + ((np.arange(nr) + 0.5) / nr - 0.5) * dr
            zs = zeta + ((np.arange(nz) + 0.5) / nz - 0.5) * dz
            R, Z = (a.ravel() for a in np.meshgrid(rs, zs, indexing="ij"))
            area = R / R.sum()
            e_r = np.cos(Z)[:, None] * h_vec - np.sin(Z)[:, None] * np.array([0.0, 0.0, 1.0])
            sub = disk.hub_position + R[:, None] * e_r
            lo_pt, hi_pt = sub.min(axis=0) - reach, sub.max(axis=0) + reach
            tol = 1e-9 * spacing
            if np.any(lo_pt < field.origin - tol) or np.any(hi_pt > field.upper + tol):
                raise SourcePlacementError(
                    f"actuator point {disk.positions[n]} is closer than the kernel cutoff "
                    f"({kernel.cutoff_radius:g} m) to the grid boundary")
            i_lo = np.ceil((lo_pt - field.origin) / spacing).astype(int)
            i_hi = np.floor((hi_pt - field.origin) / spacing).astype(int)
            i_lo, i_hi = np.maximum(i_lo, 0), np.minimum(i_hi, dims - 1)
            I, Jj, K = (a.ravel() for a in np.meshgrid(
                *(np.arange(i_lo[a], i_hi[a] + 1) for a in range(3)), indexing="ij"))
            xyz = field.origin + spacing * np.stack([I, Jj, K], axis=1)
            d = xyz[:, None, :] - sub[None, :, :]
            dn = d @ n_vec
            qh = (d @ h_vec) / h
            qz = d[..., 2] / h
            g = np.where(np.abs(dn) <= kernel.cutoff_radius, kernel.density(dn), 0.0)
            g *= np.clip(1.0 - np.abs(qh), 0.0, None) * np.clip(1.0 - np.abs(qz), 0.0, None)
            wc = (g @ area) * vol / (h * h)
            keep = wc > 0.0
            raw[n] = wc.sum()
            rows.append(np.ravel_multi_index((I[keep], Jj[keep], K[keep]), field.dims))
            cols.append(np.full(int(keep.sum()), n))
            vals.append(wc[keep] / raw[n])
        self._finish(field, disk.n_points, rows, cols, vals, raw)


def make_spreader(field: FlowField, disk, kernel: SourceKernel) -> KernelSpreader:
    """Spreader for ``disk`` honouring ``kernel.shape``."""
    if kernel.shape == "normal":
        return NormalKernelSpreader(field, disk, kernel)
    return KernelSpreader(field, disk.positions, kernel)


class SourceReport(NamedTuple):
    applied_impulse: np.ndarray   # -sum(F) * dt, what the flow should receive
    momentum_change: np.ndarray   # rho * sum(delta velocity) * cell volume
    kernel_normalization: float   # worst column sum after renormalisation
    raw_kernel_mass: float        # worst truncated integral before renormalisation

    @property
    def residual(self):
        ref = max(float(np.linalg.norm(self.applied_impulse)), 1e-300)
        return float(np.linalg.norm(self.momentum_change - self.applied_impulse)) / ref


def spread_forces(field: FlowField, forces, dt, spreader: KernelSpreader) -> SourceReport:
    """Remove ``forces`` (N, shape (n_points, 3), force on the blades) from the flow.

    Each cell receives ``-dt * F * g / (rho * volume)``.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    forces = np.asarray(forces, dtype=float)
    scale = -dt / (field.rho * field.cell_volume)
    before = np.array([field.u.sum(), field.v.sum(), field.w.sum()])
    m = spreader.matrix
    for comp, arr in enumerate((field.u, field.v, field.w)):
        arr.ravel()[:] += scale * (m @ forces[:, comp])
    after = np.array([field.u.sum(), field.v.sum(), field.w.sum()])
    mass = field.rho * field.cell_volume
    return SourceReport(
        applied_impulse=-dt * forces.sum(axis=0),
        momentum_change=(after - before) * mass,
        kernel_normalization=float(np.max(np.abs(spreader.normalization - 1.0))) + 1.0,
        raw_kernel_mass=float(np.min(spreader.raw_mass)),
    )


def apply_sources(field: FlowField, disk, loads, kernel: SourceKernel, dt, num_blades=3,
                  spreader: KernelSpreader | None = None) -> SourceReport:
    """Add the actuator reaction forces of ``loads`` to ``field`` (in place).

    Per-unit-span loads are scaled by each point's blade-weighted span
    ``B * dr * dzeta / (2 pi)`` before spreading.
    """
    if spreader is None:
        spreader = make_spreader(field, disk, kernel)
    w = disk.blade_weights(num_blades)
    forces = np.stack([loads.fx * w, loads.fy * w, loads.fz * w], axis=1)
    return spread_forces(field, forces, dt, spreader)


# ---------------------------------------------------------------- advection


@numba.njit(cache=True)
def _upwind(u, v, w, nu, nv, nw, cx, cy, cz):
    nx, ny, nz = u.shape
    for i in range(1, nx):
        ip = min(i + 1, nx - 1)
        for j in range(ny):
            jm = max(j - 1, 0)
            jp = min(j + 1, ny - 1)
            for k in range(nz):
                km = max(k - 1, 0)
                kp = min(k + 1, nz - 1)
                a = u[i, j, k] * cx
                b = v[i, j, k] * cy
                c = w[i, j, k] * cz
                for q, out in ((u, nu), (v, nv), (w, nw)):
                    qc = q[i, j, k]
                    gx = qc - q[i - 1, j, k] if a > 0.0 else q[ip, j, k] - qc
                    gy = qc - q[i, jm, k] if b > 0.0 else q[i, jp, k] - qc
                    gz = qc - q[i, j, km] if c > 0.0 else q[i, j, kp] - qc
                    out[i, j, k] = qc - a * gx - b * gy - c * gz


def cfl_number(field: FlowField, dt):
    dx, dy, dz = field.spacing
    c = np.abs(field.u) / dx + np.abs(field.v) / dy + np.abs(field.w) / dz
    return float(c.max()) * dt


def advect(field: FlowField, dt, inflow: InflowSource | None = None, t=0.0):
    """One first-order upwind step of all velocity components (in place).

    The Courant number is the per-cell sum over axes. Steps with CFL > 1 are
    refused before the field is touched. ``t`` is the time at the end of the
    step, used for the inflow plane. Returns the CFL number.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    cfl = cfl_number(field, dt)
    if cfl > 1.0:
        raise CFLError(cfl)
    dx, dy, dz = field.spacing
    nu, nv, nw = field.u.copy(), field.v.copy(), field.w.copy()
    _upwind(field.u, field.v, field.w, nu, nv, nw, dt / dx, dt / dy, dt / dz)
    field.u, field.v, field.w = nu, nv, nw
    if inflow is not None:
        impose_inflow(field, inflow, t)
    return cfl


# ---------------------------------------------------------------- projection


class PressureProjection:
    """Approximate projection of cell-centred velocity onto divergence-free faces.

    Unknowns live on columns ``i >= 1``. Boundary conditions on the pressure
    correction: zero normal gradient on the inflow face, zero value on the
    outflow and lateral/top/bottom faces (open boundaries). The compact
    Laplacian is diagonalised by a DCT-IV along x and DST-II across, so one
    solve is two transforms.
    """

    def __init__(self, dims, spacing):
        nx, ny, nz = dims
        self.shape = (nx - 1, ny, nz)
        dx, dy, dz = spacing
        self.spacing = (dx, dy, dz)
        m = self.shape[0]
        kx = 2.0 - 2.0 * np.cos(np.pi * (np.arange(m) + 0.5) / m)
        ky = 2.0 - 2.0 * np.cos(np.pi * (np.arange(ny) + 1.0) / ny)
        kz = 2.0 - 2.0 * np.cos(np.pi * (np.arange(nz) + 1.0) / nz)
        self.eig = -(kx[:, None, None] / dx ** 2 + ky[None, :, None] / dy ** 2
                     + kz[None, None, :] / dz ** 2)

    def solve(self, rhs):
        r = fft.dct(rhs, type=4, axis=0, norm="ortho")
        r = fft.dstn(r, type=2, axes=(1, 2), norm="ortho")
        r /= self.eig
        r = fft.idstn(r, type=2, axes=(1, 2), norm="ortho")
        return fft.dct(r, type=4, axis=0, norm="ortho")

    def face_velocities(self, field: FlowField):
        u, v, w = field.u, field.v, field.w
        ux = np.empty((u.shape[0], u.shape[1], u.shape[2]))
        ux[0] = u[0]
        ux[1:-1] = 0.5 * (u[1:-1] + u[2:])
        ux[-1] = u[-1]
        vi = v[1:]
        vy = np.empty((vi.shape[0], vi.shape[1] + 1, vi.shape[2]))
        vy[:, 0] = vi[:, 0]
        vy[:, 1:-1] = 0.5 * (vi[:, :-1] + vi[:, 1:])
        vy[:, -1] = vi[:, -1]
        wi = w[1:]
        wz = np.empty((wi.shape[0], wi.shape[1], wi.shape[2] + 1))
        wz[:, :, 0] = wi[:, :, 0]
        wz[:, :, 1:-1] = 0.5 * (wi[:, :, :-1] + wi[:, :, 1:])
        wz[:, :, -1] = wi[:, :, -1]
        return ux, vy, wz

    def divergence(self, field: FlowField):
        ux, vy, wz = self.face_velocities(field)
        dx, dy, dz = self.spacing
        return (np.diff(ux, axis=0) / dx + np.diff(vy, axis=1) / dy
                + np.diff(wz, axis=2) / dz)

    def __call__(self, field: FlowField):
        """Project ``field`` in place; returns the max face divergence before projection."""
        div = self.divergence(field)
        phi = self.solve(div)
        dx, dy, dz = self.spacing
        gx = np.zeros((phi.shape[0] + 1,) + phi.shape[1:])
        gx[1:-1] = np.diff(phi, axis=0) / dx
        gx[-1] = -2.0 * phi[-1] / dx
        gy = np.empty((phi.shape[0], phi.shape[1] + 1, phi.shape[2]))
        gy[:, 1:-1] = np.diff(phi, axis=1) / dy
        gy[:, 0] = 2.0 * phi[:, 0] / dy
        gy[:, -1] = -2.0 * phi[:, -1] / dy
        gz = np.empty((phi.shape[0], phi.shape[1], phi.shape[2] + 1))
        gz[:, :, 1:-1] = np.diff(phi, axis=2) / dz
        gz[:, :, 0] = 2.0 * phi[:, :, 0] / dz
        gz[:, :, -1] = -2.0 * phi[:, :, -1] / dz
        field.u[1:] -= 0.5 * (gx[:-1] + gx[1:])
        field.v[1:] -= 0.5 * (gy[:, :-1] + gy[:, 1:])
        field.w[1:] -= 0.5 * (gz[:, :, :-1] + gz[:, :, 1:])
        return float(np.max(np.abs(div)))


def write_snapshot(field: FlowField, axis, index, component, path):
    """Write one grid plane of ``component`` (u, v, w or speed) as CSV.

    The header row holds the coordinates of the second in-plane axis; each
    following row starts with the coordinate of the first in-plane axis.
    """
    names = "xyz"
    if isinstance(axis, str):
        if axis not in names:
            raise ValueError(f"invalid plane axis {axis!r}")
        axis = names.index(axis)
    if axis not in (0, 1, 2):
        raise ValueError(f"invalid plane axis {axis!r}")
    if not 0 <= index < field.dims[axis]:
        raise ValueError(f"plane index {index} outside 0..{field.dims[axis] - 1}")
    if component == "speed":
        data = np.sqrt(field.u ** 2 + field.v ** 2 + field.w ** 2)
    elif component in ("u", "v", "w"):
        data = getattr(field, component)
    else:
        raise ValueError(f"invalid component {component!r}")
    plane = np.take(data, index, axis=axis)
    a, b = [k for k in range(3) if k != axis]
    ca, cb = field.axis(a), field.axis(b)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{names[a]}\\{names[b]}," + ",".join(repr(float(c)) for c in cb) + "\n")
        for i, c in enumerate(ca):
            fh.write(repr(float(c)) + "," + ",".join(repr(float(x)) for x in plane[i]) + "\n")
    return Path(path)


def read_snapshot(path):
    """Return (row_coords, col_coords, values) from a snapshot CSV."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        cols = np.array([float(x) for x in header[1:]])
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data[:, 0], cols, data[:, 1:]
