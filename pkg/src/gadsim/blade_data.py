"""Blade geometry and airfoil polar tables.

Blade files are whitespace-separated text::

    # root_radius = 1.5          (optional metadata, '#' comment lines)
    # tip_radius = 63.0
    # num_blades = 3
    r_m  chord_m  twist_deg  polar_file      (one header line)
    2.8667  3.542  13.308  polars/Cylinder1.dat
    ...

Polar files have one header line followed by ``alpha_deg cl cd`` rows.
Polar paths are resolved relative to the blade file. Angles are degrees on
disk and radians everywhere in memory.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi


class BladeDataError(ValueError):
    """Raised for malformed blade or polar files and violated invariants."""


@dataclass(frozen=True, eq=False)
class AirfoilPolar:
    """Lift and drag coefficients tabulated over one period of angle of attack.

    The table is treated as 2*pi periodic. If it covers less than a full
    period, the first row is repeated at ``alpha[0] + 2*pi`` to close it.
    """

    name: str
    alpha: np.ndarray
    cl: np.ndarray
    cd: np.ndarray
    _xp: np.ndarray = field(init=False, repr=False)
    _clp: np.ndarray = field(init=False, repr=False)
    _cdp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        cl = np.asarray(self.cl, dtype=float)
        cd = np.asarray(self.cd, dtype=float)
        if not (alpha.ndim == cl.ndim == cd.ndim == 1):
            raise BladeDataError(f"polar {self.name!r}: alpha, cl, cd must be 1-D")
        if not (alpha.size == cl.size == cd.size) or alpha.size < 2:
            raise BladeDataError(
                f"polar {self.name!r}: alpha, cl, cd must have equal length >= 2")
        if not np.all(np.isfinite(alpha)) or not np.all(np.isfinite(cl)) or not np.all(np.isfinite(cd)):
            raise BladeDataError(f"polar {self.name!r}: non-finite values")
        if np.any(np.diff(alpha) <= 0.0):
            raise BladeDataError(f"polar {self.name!r}: alpha not strictly increasing")
        if np.any(cd < 0.0):
            raise BladeDataError(f"polar {self.name!r}: negative drag coefficient")
        span = alpha[-1] - alpha[0]
        if span > TWO_PI * (1.0 + 1e-9):
            raise BladeDataError(
                f"polar {self.name!r}: alpha spans more than one period (2*pi)")
        for name, arr in (("alpha", alpha), ("cl", cl), ("cd", cd)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

        if span < TWO_PI * (1.0 - 1e-9):
            xp = np.append(alpha, alpha[0] + TWO_PI)
            clp = np.append(cl, cl[0])
            cdp = np.append(cd, cd[0])
        else:
            xp, clp, cdp = alpha.copy(), cl.copy(), cd.copy()
            xp[-1] = alpha[0] + TWO_PI
        object.__setattr__(self, "_xp", xp)
        object.__setattr__(self, "_clp", clp)
        object.__setattr__(self, "_cdp", cdp)

    def wrap(self, alpha):
        """Map angles into the table period ``[alpha[0], alpha[0] + 2*pi)``."""
        a0 = self._xp[0]
        a = np.asarray(alpha, dtype=float)
        inside = (a >= a0) & (a < a0 + TWO_PI)
        # in-range angles pass through untouched so table samples are hit exactly
        return np.where(inside, a, a0 + np.mod(a - a0, TWO_PI))

    def lookup(self, alpha):
        a = self.wrap(alpha)
        return np.interp(a, self._xp, self._clp), np.interp(a, self._xp, self._cdp)


def lookup_cl_cd(polar: AirfoilPolar, alpha):
    """Piecewise-linear (cl, cd) at ``alpha`` (radians), periodic in 2*pi."""
    return polar.lookup(alpha)


@dataclass(frozen=True)
class BladeStation:
    r: float
    chord: float
    twist: float
    polar: AirfoilPolar


@dataclass(frozen=True)
class PolarBlend:
    """Two bracketing polars and the weight of the outer one."""

    inner: AirfoilPolar
    outer: AirfoilPolar
    weight: float

    def lookup(self, alpha):
        cl_a, cd_a = self.inner.lookup(alpha)
        if self.weight == 0.0 or self.outer is self.inner:
            return cl_a, cd_a
        cl_b, cd_b = self.outer.lookup(alpha)
        w = self.weight
        return (1.0 - w) * cl_a + w * cl_b, (1.0 - w) * cd_a + w * cd_b


@dataclass(frozen=True)
class BladeDefinition:
    stations: tuple[BladeStation, ...]
    root_radius: float
    tip_radius: float
    num_blades: int = 3

    def __post_init__(self):
        stations = tuple(self.stations)
        object.__setattr__(self, "stations", stations)
        if len(stations) < 1:
            raise BladeDataError("blade needs at least one station")
        if self.num_blades < 1:
            raise BladeDataError("num_blades must be >= 1")
        if not 0.0 <= self.root_radius < self.tip_radius:
            raise BladeDataError("need 0 <= root_radius < tip_radius")
        r = self.radii
        if np.any(np.diff(r) <= 0.0):
            raise BladeDataError("non-monotonic station radii")
        if r[0] < self.root_radius or r[-1] > self.tip_radius:
            raise BladeDataError("station radii outside [root_radius, tip_radius]")
        if any(s.chord <= 0.0 for s in stations):
            raise BladeDataError("chord must be positive at every station")

    @property
    def radii(self):
        return np.array([s.r for s in self.stations])

    @property
    def polars(self):
        """Distinct polars in station order."""
        seen = {}
        for s in self.stations:
            seen.setdefault(id(s.polar), s.polar)
        return list(seen.values())


def interpolate_station(blade: BladeDefinition, r: float):
    """Chord (m), twist (rad) and polar blend at radius ``r``.

    Values are linear between bracketing stations and held constant between
    the end stations and the root/tip radii.
    """
    if not blade.root_radius <= r <= blade.tip_radius:
        raise ValueError(
            f"r={r} outside [{blade.root_radius}, {blade.tip_radius}]")
    st = blade.stations
    radii = blade.radii
    if r <= radii[0]:
        s = st[0]
        return s.chord, s.twist, PolarBlend(s.polar, s.polar, 0.0)
    if r >= radii[-1]:
        s = st[-1]
        return s.chord, s.twist, PolarBlend(s.polar, s.polar, 0.0)
    i = int(np.searchsorted(radii, r, side="right")) - 1
    a, b = st[i], st[i + 1]
    w = (r - a.r) / (b.r - a.r)
    chord = (1.0 - w) * a.chord + w * b.chord
    twist = (1.0 - w) * a.twist + w * b.twist
    return chord, twist, PolarBlend(a.polar, b.polar, float(w))


def _data_rows(path: Path):
    """Yield (line_number, fields) for non-comment rows after the header."""
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if not header_seen:
                header_seen = True
                continue
            yield lineno, text.split()


def load_polar(path, name=None) -> AirfoilPolar:
    path = Path(path)
    rows = []
    for lineno, fields in _data_rows(path):
        if len(fields) < 3:
            raise BladeDataError(f"{path}:{lineno}: expected 'alpha_deg cl cd'")
        try:
            rows.append([float(x) for x in fields[:3]])
        except ValueError as exc:
            raise BladeDataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise BladeDataError(f"{path}: no data rows")
    data = np.array(rows)
    try:
        return AirfoilPolar(name or path.stem, np.radians(data[:, 0]), data[:, 1], data[:, 2])
    except BladeDataError as exc:
        raise BladeDataError(f"{path}: {exc}") from None


def _read_metadata(path: Path):
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.strip()
            if text.startswith("#") and "=" in text:
                key, _, value = text[1:].partition("=")
                meta[key.strip()] = value.strip()
    return meta


def load_blade(path) -> BladeDefinition:
    """Read a blade definition file and the polar files it references.

    Missing metadata defaults to the first/last station radius and three
    blades.
    """
    path = Path(path)
    if not path.is_file():
        raise BladeDataError(f"{path}: blade file not found")
    polars: dict[Path, AirfoilPolar] = {}
    stations = []
    for lineno, fields in _data_rows(path):
        if len(fields) < 4:
            raise BladeDataError(
                f"{path}:{lineno}: expected 'r_m chord_m twist_deg polar_file'")
        try:
            r, chord, twist = (float(x) for x in fields[:3])
        except ValueError as exc:
            raise BladeDataError(f"{path}:{lineno}: {exc}") from None
        polar_path = (path.parent / fields[3]).resolve()
        if polar_path not in polars:
            if not polar_path.is_file():
                raise BladeDataError(f"{path}:{lineno}: polar file {fields[3]} not found")
            polars[polar_path] = load_polar(polar_path)
        stations.append(BladeStation(r, chord, np.radians(twist), polars[polar_path]))
    if not stations:
        raise BladeDataError(f"{path}: no stations")

    meta = _read_metadata(path)
    try:
        root = float(meta.get("root_radius", stations[0].r))
        tip = float(meta.get("tip_radius", stations[-1].r))
        nb = int(meta.get("num_blades", 3))
    except ValueError as exc:
        raise BladeDataError(f"{path}: bad metadata: {exc}") from None
    try:
        return BladeDefinition(tuple(stations), root, tip, nb)
    except BladeDataError as exc:
        raise BladeDataError(f"{path}: {exc}") from None


def nrel5mw_blade_path() -> Path:
    return Path(__file__).parent / "data" / "nrel5mw" / "blade.dat"


def load_nrel5mw_blade() -> BladeDefinition:
    return load_blade(nrel5mw_blade_path())
