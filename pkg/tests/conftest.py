from pathlib import Path

import numpy as np
import pytest

from gadsim.blade_data import AirfoilPolar
from gadsim.config import SimConfig


def flat_plate_rows():
    """alpha_deg, cl, cd rows of the thin-airfoil line cl = 2 pi alpha, cd = 0."""
    alpha_deg = np.arange(-180.0, 181.0, 1.0)
    return alpha_deg, 2.0 * np.pi * np.radians(alpha_deg), np.zeros_like(alpha_deg)


@pytest.fixture
def flat_polar():
    a, cl, cd = flat_plate_rows()
    return AirfoilPolar("flat", np.radians(a), cl, cd)


def write_polar(path, rows=None):
    a, cl, cd = rows if rows is not None else flat_plate_rows()
    lines = ["alpha_deg cl cd"] + [f"{float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in zip(a, cl, cd)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def write_blade(path, stations, meta=None, polar="flat.dat"):
    path = Path(path)
    if not (path.parent / polar).exists():
        write_polar(path.parent / polar)
    lines = [f"# {k} = {v}" for k, v in (meta or {}).items()]
    lines.append("r_m chord_m twist_deg polar_file")
    lines += [f"{r} {c} {t} {polar}" for r, c, t in stations]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def minimal_blade_file(tmp_path):
    return write_blade(tmp_path / "blade.dat", [(1.0, 1.0, 0.0), (10.0, 0.5, 0.0)],
                       {"root_radius": 1.0, "tip_radius": 10.0, "num_blades": 3})


def small_config(**overrides) -> SimConfig:
    """A fast scenario: coarse 20 m grid around the NREL rotor."""
    cfg = SimConfig()
    g = cfg.grid
    g.nx, g.ny, g.nz = 24, 20, 16
    g.dx = g.dy = g.dz = 20.0
    g.x0, g.y0, g.z0 = 0.0, 0.0, -60.0
    t = cfg.turbine
    t.hub_x, t.hub_y, t.hub_height = 160.0, 190.0, 87.5
    t.n_radial, t.n_azimuthal = 8, 16
    cfg.run.dt = 0.1
    cfg.run.t_end = 4.0
    cfg.run.spin_up = 1.0
    for key, value in overrides.items():
        section, name = key.split("__")
        setattr(getattr(cfg, section), name, value)
    return cfg


# ------------------------------------------------------- acceptance report
CRITERION_LINES = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        CRITERION_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERION_LINES):
            terminalreporter.write_line(CRITERION_LINES[number])
