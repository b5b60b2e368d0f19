import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gadsim.actuator_disk import ActuatorDisk, build_disk
from gadsim.blade_data import load_nrel5mw_blade
from gadsim.flow_field import (
    CFLError, FileInflow, FlowField, InflowFormatError, KernelSpreader, PowerLawInflow,
    PressureProjection, SourceKernel, SourcePlacementError, TrilinearSampler, UniformInflow,
    advect, apply_sources, cfl_number, fill_from_inflow, impose_inflow, load_inflow_frames,
    make_spreader, read_snapshot, sample_velocity, spread_forces, write_inflow_frames,
    write_snapshot,
)

HUB = (200.0, 195.0, 87.5)


def default_grid(velocity=(8.0, 0.0, 0.0)):
    return FlowField.uniform((60, 40, 30), (10.0, 10.0, 10.0), (0.0, 0.0, -20.0), velocity)


def unit_grid(n=8):
    return FlowField.uniform((n, n, n), (1.0, 1.0, 1.0))


# ---------------------------------------------------------------- field type


@pytest.mark.parametrize("kwargs, msg", [
    (dict(dims=(1, 4, 4)), "dims"),
    (dict(spacing=(1.0, 0.0, 1.0)), "spacing"),
    (dict(rho=0.0), "density"),
])
def test_field_invariants(kwargs, msg):
    args = dict(dims=(4, 4, 4), spacing=(1.0, 1.0, 1.0), origin=(0, 0, 0), rho=1.225)
    args.update(kwargs)
    with pytest.raises(ValueError, match=msg):
        FlowField.uniform(args["dims"], args["spacing"], args["origin"], rho=args["rho"])


def test_field_rejects_nonfinite():
    f = unit_grid(4)
    u = f.u.copy()
    u[1, 1, 1] = np.nan
    with pytest.raises(ValueError, match="finite"):
        FlowField(f.dims, f.spacing, f.origin, u, f.v, f.w)


# ---------------------------------------------------------------- sampling


def test_sample_at_node():
    f = unit_grid(4)
    f.u[:] = np.random.default_rng(1).normal(size=f.u.shape)
    assert sample_velocity(f, (2.0, 1.0, 3.0))[0] == f.u[2, 1, 3]


def test_sample_uniform():
    np.testing.assert_allclose(sample_velocity(default_grid(), (123.4, 56.7, 89.1)), (8, 0, 0))


def test_sample_linear_midpoint():
    f = unit_grid(5)
    f.u[:] = f.axis(0)[:, None, None]
    assert sample_velocity(f, (2.5, 1.2, 3.3))[0] == pytest.approx(2.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 5),
       st.tuples(st.floats(0, 6), st.floats(0, 6), st.floats(0, 6)))
def test_sampling_exact_for_linear_fields(a, b, c, d, pos):
    f = unit_grid(7)
    x, y, z = np.meshgrid(f.axis(0), f.axis(1), f.axis(2), indexing="ij")
    f.w[:] = a * x + b * y + c * z + d
    expected = a * pos[0] + b * pos[1] + c * pos[2] + d
    assert sample_velocity(f, pos)[2] == pytest.approx(expected, abs=1e-9)


def test_sample_out_of_bounds():
    with pytest.raises(ValueError):
        sample_velocity(unit_grid(4), (3.5, 1.0, -0.1))


def test_trilinear_sampler_matches_pointwise():
    f = default_grid()
    f.v[:] = np.random.default_rng(2).normal(size=f.v.shape)
    pts = build_disk(load_nrel5mw_blade(), HUB, 0.2, 4, 8).positions
    batch = TrilinearSampler(f, pts)(f)
    for p, row in zip(pts, batch):
        np.testing.assert_allclose(row, sample_velocity(f, p), rtol=1e-12, atol=1e-14)


# ---------------------------------------------------------------- kernel


def test_kernel_invariants():
    with pytest.raises(ValueError):
        SourceKernel(0.0, 1.0)
    with pytest.raises(ValueError):
        SourceKernel(1.0, 2.9)
    with pytest.raises(ValueError):
        SourceKernel(1.0, 3.0, "cubic")
    k = SourceKernel.for_grid((10.0, 5.0, 8.0))
    assert k.sigma == 10.0 and k.cutoff_radius == 30.0


@pytest.mark.parametrize("shape", ["isotropic", "normal"])
def test_kernel_normalization(shape):
    f = default_grid()
    disk = build_disk(load_nrel5mw_blade(), HUB, 0.0, 20, 36)
    sp = make_spreader(f, disk, SourceKernel.for_grid(f.spacing, shape=shape))
    assert np.all(np.abs(sp.normalization - 1.0) <= 1e-3)


def test_isotropic_raw_mass_is_truncated_gaussian_integral():
    # a Gaussian point source at a node on a grid with h = sigma: the discrete sum over the
    # 3-sigma ball approximates the continuous truncated mass erf(3/sqrt2) - sqrt(2/pi)*3*exp(-4.5)
    from math import erf, exp, pi, sqrt
    f = FlowField.uniform((41, 41, 41), (1.0, 1.0, 1.0))
    k = SourceKernel(2.0, 6.0)
    sp = KernelSpreader(f, [(20.0, 20.0, 20.0)], k)
    continuous = erf(3 / sqrt(2)) - sqrt(2 / pi) * 3 * exp(-4.5)
    assert sp.raw_mass[0] == pytest.approx(continuous, rel=5e-3)


def test_zero_loads_leave_field_unchanged():
    f = default_grid()
    ad = ActuatorDisk(load_nrel5mw_blade(), HUB)
    loads = ad.loads([8.0, 0, 0], 1.0)
    for name in ("fx", "fy", "fz"):
        getattr(loads, name)[:] = 0.0
    before = f.copy()
    apply_sources(f, ad.geometry, loads, SourceKernel.for_grid(f.spacing), 0.02)
    np.testing.assert_array_equal(f.u, before.u)


@pytest.mark.parametrize("shape", ["isotropic", "normal"])
def test_single_point_force_impulse(shape):
    f = default_grid()
    pos = np.array([[200.0, 195.0, 87.5]])
    kernel = SourceKernel.for_grid(f.spacing, shape=shape)
    sp = KernelSpreader(f, pos, kernel)
    before = f.u.copy()
    spread_forces(f, [[100.0, 0.0, 0.0]], 0.1, sp)
    # independent bookkeeping from the raw field difference
    momentum = f.rho * np.sum(f.u - before) * f.cell_volume
    assert momentum == pytest.approx(-10.0, rel=1e-3)


def test_opposite_forces_cancel():
    f = default_grid()
    pos = np.array([[200.0, 190.0, 80.0], [200.0, 200.0, 95.0]])
    sp = KernelSpreader(f, pos, SourceKernel.for_grid(f.spacing))
    before = [c.sum() for c in (f.u, f.v, f.w)]
    spread_forces(f, [[50.0, -20.0, 7.0], [-50.0, 20.0, -7.0]], 0.1, sp)
    for c, b in zip((f.u, f.v, f.w), before):
        assert abs((c.sum() - b) * f.rho * f.cell_volume) < 1e-9


@pytest.mark.parametrize("shape", ["isotropic", "normal"])
@pytest.mark.parametrize("yaw", [0.0, 0.35])
def test_source_momentum_bookkeeping(shape, yaw):
    f = default_grid()
    ad = ActuatorDisk(load_nrel5mw_blade(), HUB, yaw)
    loads = ad.loads([8.0, 0, 0], 7.6 * 8 / 63)
    rep = apply_sources(f, ad.geometry, loads, SourceKernel.for_grid(f.spacing, shape=shape), 0.02)
    assert rep.residual < 1e-9
    thrust = ad.aggregate(loads, 1.0).thrust
    assert -rep.momentum_change @ ad.geometry.normal == pytest.approx(thrust * 0.02, rel=1e-9)


def test_normal_kernel_stays_in_rotor_footprint():
    f = default_grid()
    disk = build_disk(load_nrel5mw_blade(), HUB, 0.0, 20, 36)
    sp = make_spreader(f, disk, SourceKernel.for_grid(f.spacing, shape="normal"))
    cells = np.unique(sp.matrix.nonzero()[0])
    i, j, k = np.unravel_index(cells, f.dims)
    y, z = f.axis(1)[j], f.axis(2)[k]
    radial = np.hypot(y - HUB[1], z - HUB[2])
    assert radial.max() <= 63.0 + np.sqrt(2.0) * 10.0
    assert np.abs(f.axis(0)[i] - HUB[0]).max() <= 30.0


def test_source_too_close_to_boundary():
    f = default_grid()
    for shape in ("isotropic", "normal"):
        disk = build_disk(load_nrel5mw_blade(), (200.0, 70.0, 87.5), 0.0, 4, 8)
        with pytest.raises(SourcePlacementError):
            make_spreader(f, disk, SourceKernel.for_grid(f.spacing, shape=shape))


# ---------------------------------------------------------------- advection


def test_uniform_field_unchanged_by_advection():
    f = default_grid()
    before = f.copy()
    advect(f, 0.5, UniformInflow(8.0), 0.5)
    np.testing.assert_array_equal(f.u, before.u)


def test_step_front_moves_by_speed_dt():
    f = FlowField.uniform((200, 4, 4), (1.0, 1.0, 1.0), velocity=(1.0, 0.0, 0.0))
    # passive step in v carried by u = 1: front at x = 50 should reach x = 50 + 40 * 0.5 = 70
    f.v[:50] = 1.0
    for _ in range(40):
        advect(f, 0.5)
    profile = f.v[:, 1, 1]
    front = np.interp(0.5, profile[::-1], f.axis(0)[::-1])
    assert abs(front - 70.0) <= 1.0


def test_cfl_violation_refused():
    f = default_grid((8.0, 0.0, 0.0))
    dt = 1.5 * 10.0 / 8.0
    before = f.copy()
    with pytest.raises(CFLError) as info:
        advect(f, dt)
    assert info.value.cfl == pytest.approx(1.5)
    np.testing.assert_array_equal(f.u, before.u)


def test_cfl_sums_axes():
    f = FlowField.uniform((4, 4, 4), (1.0, 2.0, 4.0), velocity=(1.0, 2.0, 4.0))
    assert cfl_number(f, 0.1) == pytest.approx(0.3)


def test_outflow_zero_gradient():
    f = FlowField.uniform((20, 4, 4), (1.0, 1.0, 1.0), velocity=(1.0, 0.0, 0.0))
    f.v[-3:] = 2.0
    advect(f, 0.2)
    np.testing.assert_array_equal(f.v[-1], f.v[-2])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.1, 0.9))
def test_kinetic_energy_non_increasing_without_sources(seed, courant):
    rng = np.random.default_rng(seed)
    f = FlowField.uniform((16, 10, 10), (1.0, 1.0, 1.0), velocity=(1.0, 0.0, 0.0))
    f.v[1:] = 0.3 * rng.uniform(-1, 1, size=f.v[1:].shape)
    f.w[1:] = 0.3 * rng.uniform(-1, 1, size=f.w[1:].shape)
    dt = courant / (1.0 + 0.3 + 0.3)
    inflow = UniformInflow(1.0)
    ke = f.kinetic_energy()
    for n in range(30):
        advect(f, dt, inflow, (n + 1) * dt)
        ke_new = f.kinetic_energy()
        assert ke_new <= ke * (1 + 1e-12)
        ke = ke_new


def test_advection_deterministic():
    def trajectory():
        f = default_grid()
        f.v[5:20, 10:20, 5:15] = 1.0
        for n in range(10):
            advect(f, 0.5, UniformInflow(8.0), 0.5 * (n + 1))
        return f
    a, b = trajectory(), trajectory()
    assert a.u.tobytes() == b.u.tobytes() and a.v.tobytes() == b.v.tobytes()


# ---------------------------------------------------------------- projection


def test_projection_keeps_uniform_flow():
    f = default_grid()
    proj = PressureProjection(f.dims, f.spacing)
    assert proj(f) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(f.u, 8.0, rtol=0, atol=1e-12)


def test_projection_reduces_divergence():
    f = default_grid()
    ad = ActuatorDisk(load_nrel5mw_blade(), HUB)
    loads = ad.loads([8.0, 0, 0], 7.6 * 8 / 63)
    apply_sources(f, ad.geometry, loads, SourceKernel.for_grid(f.spacing, shape="normal"), 1.0)
    proj = PressureProjection(f.dims, f.spacing)
    before = np.abs(proj.divergence(f)).max()
    proj(f)
    after = np.abs(proj.divergence(f)).max()
    # approximate (collocated) projection: face divergence drops but is not zeroed
    assert after < 0.5 * before


def test_projection_solver_inverts_discrete_laplacian():
    proj = PressureProjection((9, 6, 5), (1.0, 2.0, 1.5))
    rng = np.random.default_rng(3)
    phi = rng.normal(size=proj.shape)
    # discrete Laplacian with the documented boundary conditions, assembled by hand
    dx, dy, dz = proj.spacing
    p = np.pad(phi, ((1, 1), (1, 1), (1, 1)))
    p[0] = p[1]            # zero gradient on the inflow face
    p[-1] = -p[-2]         # zero value on the outflow face
    p[:, 0], p[:, -1] = -p[:, 1], -p[:, -2]
    p[:, :, 0], p[:, :, -1] = -p[:, :, 1], -p[:, :, -2]
    lap = ((p[2:, 1:-1, 1:-1] - 2 * phi + p[:-2, 1:-1, 1:-1]) / dx ** 2
           + (p[1:-1, 2:, 1:-1] - 2 * phi + p[1:-1, :-2, 1:-1]) / dy ** 2
           + (p[1:-1, 1:-1, 2:] - 2 * phi + p[1:-1, 1:-1, :-2]) / dz ** 2)
    np.testing.assert_allclose(proj.solve(lap), phi, atol=1e-10)


# ---------------------------------------------------------------- inflow


def two_frames(ny=40, nz=30):
    rng = np.random.default_rng(4)
    return np.array([0.0, 120.0]), rng.uniform(4, 12, size=(2, 3, ny, nz))


def test_inflow_file_roundtrip_and_interpolation(tmp_path):
    times, frames = two_frames()
    path = tmp_path / "inflow.txt"
    write_inflow_frames(path, times, frames, 10.0, 10.0)
    src = load_inflow_frames(path)
    np.testing.assert_array_equal(src.frames, frames)
    y, z = np.arange(40) * 10.0, np.arange(30) * 10.0
    u, v, w = src.plane(60.0, y, z)
    np.testing.assert_allclose(u, 0.5 * (frames[0, 0] + frames[1, 0]), rtol=1e-15)
    np.testing.assert_allclose(w, 0.5 * (frames[0, 2] + frames[1, 2]), rtol=1e-15)


def test_single_frame_is_constant(tmp_path):
    times, frames = two_frames(4, 3)
    path = tmp_path / "one.txt"
    write_inflow_frames(path, times[:1], frames[:1], 10.0, 10.0)
    src = load_inflow_frames(path)
    for t in (-5.0, 0.0, 33.0, 1e6):
        np.testing.assert_array_equal(src.plane(t, range(4), range(3))[0], frames[0, 0])


def test_frames_out_of_order(tmp_path):
    times, frames = two_frames(4, 3)
    path = tmp_path / "bad.txt"
    write_inflow_frames(path, times[::-1], frames, 10.0, 10.0)
    with pytest.raises(InflowFormatError, match="non-monotone timestamps"):
        load_inflow_frames(path)


def test_malformed_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("NOTINFLOW 1 2 2 1 1 1\n0\n1 0 0\n1 0 0\n1 0 0\n1 0 0\n")
    with pytest.raises(InflowFormatError, match="header"):
        load_inflow_frames(path)


def test_dimension_mismatch(tmp_path):
    times, frames = two_frames(4, 3)
    path = tmp_path / "bad.txt"
    write_inflow_frames(path, times, frames, 10.0, 10.0)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(InflowFormatError, match="dimension mismatch"):
        load_inflow_frames(path)
    src = FileInflow(times, frames, 10.0, 10.0)
    with pytest.raises(InflowFormatError):
        src.check_plane(5, 3)


def test_impose_inflow_only_touches_first_column():
    f = default_grid()
    f.u[1:] = 3.0
    impose_inflow(f, PowerLawInflow(8.0, 87.5), 0.0)
    assert f.u[0, 0, 0] > 0 and np.all(f.u[1:] == 3.0)
    k = int(np.argmin(np.abs(f.axis(2) - 90.0)))
    assert f.u[0, 5, k] == pytest.approx(8.0 * (90.0 / 87.5) ** 0.14)


def test_fill_from_inflow():
    f = default_grid((0.0, 0.0, 0.0))
    fill_from_inflow(f, UniformInflow(6.5))
    assert np.all(f.u == 6.5)


# ---------------------------------------------------------------- snapshots


def test_snapshot_uniform_u(tmp_path):
    f = default_grid()
    path = write_snapshot(f, "z", 11, "u", tmp_path / "u.csv")
    rows, cols, values = read_snapshot(path)
    assert values.shape == (60, 40)
    assert np.all(values == 8.0)
    np.testing.assert_array_equal(rows, f.axis(0))
    np.testing.assert_array_equal(cols, f.axis(1))


def test_snapshot_vertical_w_near_zero(tmp_path):
    f = default_grid()
    _, _, values = read_snapshot(write_snapshot(f, "x", 20, "w", tmp_path / "w.csv"))
    assert np.all(np.abs(values) < 1e-12)


@pytest.mark.parametrize("axis, index, comp", [("q", 0, "u"), ("z", 30, "u"), ("z", 1, "p")])
def test_snapshot_invalid(tmp_path, axis, index, comp):
    with pytest.raises(ValueError):
        write_snapshot(default_grid(), axis, index, comp, tmp_path / "x.csv")
