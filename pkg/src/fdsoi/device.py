"""FD-SOI NMOSFET description, doping and tensor-mesh generation.

Coordinates: x runs source -> drain starting at the outer source edge,
y runs upward starting at the bottom of the buried oxide.  Nodes are
numbered row-major, ``k = j * nx + i`` for ``(x_lines[i], y_lines[j])``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Literal

import numpy as np

from .physcore import SILICON, MaterialParams

NM = 1e-7  # cm

MeshDensity = Literal["coarse", "nominal", "fine"]


class Region(IntEnum):
    GATE_METAL = 0
    GATE_OXIDE = 1
    SPACER = 2
    SILICON_FILM = 3
    BOX = 4
    SOURCE = 5
    DRAIN = 6


SEMICONDUCTOR = (Region.SILICON_FILM, Region.SOURCE, Region.DRAIN)
CONTACTS = ("gate", "source", "drain", "substrate")


class SpecError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class DeviceSpec:
    l_gate: float = 25 * NM
    t_si: float = 6 * NM
    t_ox: float = 0.6 * NM
    t_box: float = 20 * NM
    t_spacer: float = 0.7 * NM
    l_sd: float = 20 * NM
    na_channel: float = 1e17
    nd_sd: float = 1e19
    phi_m: float = 4.50
    include_spacer: bool = False
    temp: float = 300.0
    # lateral Gaussian decay length of the S/D profile into the channel; 0 = abrupt
    junction_decay: float = 0.0

    def replace(self, **changes) -> "DeviceSpec":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SpecError([f"unknown device key: {k}" for k in sorted(unknown)])
        return cls(**data)


def default_device() -> DeviceSpec:
    """25 nm gate, 6 nm film, 0.6 nm oxide, 20 nm BOX, Mo-like gate at 4.50 eV."""
    return DeviceSpec()


def validate_spec(spec: DeviceSpec) -> list[str]:
    """Return every violated invariant; an empty list means the spec is valid."""
    errors = []
    for name in ("l_gate", "t_si", "t_ox", "t_box", "t_spacer", "l_sd"):
        val = getattr(spec, name)
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            errors.append(f"{name}={val!r} must be > 0")
    for name in ("na_channel", "nd_sd"):
        val = getattr(spec, name)
        if not 1e12 <= val <= 1e21:
            errors.append(f"{name}={val!r} outside [1e12, 1e21] cm^-3")
    if not spec.nd_sd > spec.na_channel:
        errors.append(
            f"nd_sd={spec.nd_sd!r} must exceed na_channel={spec.na_channel!r}"
        )
    if not 3.5 <= spec.phi_m <= 6.0:
        errors.append(f"phi_m={spec.phi_m!r} outside [3.5, 6.0] eV")
    if not spec.temp > 0:
        errors.append(f"temp={spec.temp!r} must be > 0")
    if spec.junction_decay < 0:
        errors.append(f"junction_decay={spec.junction_decay!r} must be >= 0")
    return errors


@dataclass(frozen=True)
class _Density:
    hx_min: float
    hx_max: float
    hy_min: float
    hy_film: float
    hy_box: float
    growth: float = 0.2


DENSITIES: dict[str, _Density] = {
    "coarse": _Density(0.5 * NM, 1.6 * NM, 0.3 * NM, 0.75 * NM, 4.0 * NM),
    "nominal": _Density(0.25 * NM, 0.6 * NM, 0.2 * NM, 0.4 * NM, 3.0 * NM),
    "fine": _Density(0.15 * NM, 0.4 * NM, 0.12 * NM, 0.25 * NM, 2.0 * NM),
}


def graded_lines(a: float, b: float, h_a: float, h_b: float, h_max: float,
                 growth: float = 0.2) -> np.ndarray:
    """Lines on [a, b] with local spacing ~ min(h_max, h_end + growth*distance).

    Nodes are placed at equal increments of the integral of 1/h, which keeps
    neighbouring spacings within a ratio of about 1 + growth.
    """
    length = b - a
    t = np.linspace(0.0, length, 4001)
    h = np.minimum.reduce([
        np.full_like(t, h_max),
        h_a + growth * t,
        h_b + growth * (length - t),
    ])
    inv = 1.0 / h
    F = np.concatenate([[0.0], np.cumsum(0.5 * (inv[1:] + inv[:-1]) * np.diff(t))])
    n = max(1, int(math.ceil(F[-1] - 1e-9)))
    s = np.interp(np.linspace(0.0, F[-1], n + 1), F, t)
    s[0], s[-1] = 0.0, length
    return a + s


def _join(*segments: np.ndarray) -> np.ndarray:
    out = [segments[0]]
    for seg in segments[1:]:
        out.append(seg[1:])
    return np.concatenate(out)


@dataclass(frozen=True, eq=False)
class Mesh:
    spec: DeviceSpec
    density: str
    x_lines: np.ndarray
    y_lines: np.ndarray
    region: np.ndarray  # (ny-1, nx-1) Region codes per cell
    contact_nodes: dict[str, np.ndarray] = field(repr=False)
    net_doping: np.ndarray = field(repr=False)  # per node, 0 outside silicon
    is_semiconductor: np.ndarray = field(repr=False)  # per node

    @property
    def nx(self) -> int:
        return len(self.x_lines)

    @property
    def ny(self) -> int:
        return len(self.y_lines)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def n_semiconductor(self) -> int:
        return int(self.is_semiconductor.sum())

    def node(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"node ({i}, {j}) outside {self.nx}x{self.ny} mesh")
        return j * self.nx + i

    def coords(self, k: int) -> tuple[float, float]:
        if not 0 <= k < self.n_nodes:
            raise IndexError(f"node {k} out of range")
        return float(self.x_lines[k % self.nx]), float(self.y_lines[k // self.nx])

    def nearest(self, x: float, y: float) -> int:
        i = int(np.argmin(np.abs(self.x_lines - x)))
        j = int(np.argmin(np.abs(self.y_lines - y)))
        return self.node(i, j)

    @property
    def film_rows(self) -> np.ndarray:
        """Row indices j of nodes inside or on the boundary of the silicon film."""
        y0 = self.spec.t_box
        y1 = y0 + self.spec.t_si
        tol = 1e-6 * self.spec.t_si
        return np.nonzero((self.y_lines >= y0 - tol) & (self.y_lines <= y1 + tol))[0]

    @property
    def channel_cols(self) -> np.ndarray:
        x0 = self.spec.l_sd
        x1 = x0 + self.spec.l_gate
        tol = 1e-6 * self.spec.l_gate
        return np.nonzero((self.x_lines >= x0 - tol) & (self.x_lines <= x1 + tol))[0]

    def region_areas(self) -> dict[Region, float]:
        dx = np.diff(self.x_lines)
        dy = np.diff(self.y_lines)
        area = dy[:, None] * dx[None, :]
        return {r: float(area[self.region == r].sum()) for r in Region}

    def total_area(self) -> float:
        return float((self.x_lines[-1] - self.x_lines[0]) * (self.y_lines[-1] - self.y_lines[0]))

    def min_film_dy(self) -> float:
        rows = self.film_rows
        return float(np.diff(self.y_lines[rows]).min())


def _profile(spec: DeviceSpec, x: np.ndarray) -> np.ndarray:
    """Signed net doping along x inside the film."""
    x_js = spec.l_sd
    x_jd = spec.l_sd + spec.l_gate
    in_sd = (x < x_js) | (x > x_jd)
    # source/drain boxes carry the donor level alone; the channel its acceptors
    net = np.where(in_sd, spec.nd_sd, -spec.na_channel)
    if spec.junction_decay > 0:
        d = np.minimum(x - x_js, x_jd - x)
        tail = spec.nd_sd * np.exp(-((d / spec.junction_decay) ** 2))
        net = np.where(in_sd, net, tail - spec.na_channel)
    return net.astype(float)


def generate_mesh(spec: DeviceSpec, density: str = "nominal") -> Mesh:
    errors = validate_spec(spec)
    if errors:
        raise SpecError(errors)
    if density not in DENSITIES:
        raise ValueError(f"unknown mesh density {density!r}; use coarse, nominal or fine")
    d = DENSITIES[density]

    x_mid = spec.l_sd + 0.5 * spec.l_gate
    left = _join(
        graded_lines(0.0, spec.l_sd, 2 * d.hx_min, d.hx_min, d.hx_max, d.growth),
        graded_lines(spec.l_sd, x_mid, d.hx_min, d.hx_max, d.hx_max, d.growth),
    )
    x_total = 2 * spec.l_sd + spec.l_gate
    x_lines = np.concatenate([left, (x_total - left[::-1])[1:]])

    y_film0 = spec.t_box
    y_film1 = y_film0 + spec.t_si
    y_top = y_film1 + spec.t_ox
    y_lines = _join(
        graded_lines(0.0, y_film0, d.hy_box, d.hy_min, d.hy_box, d.growth),
        graded_lines(y_film0, y_film1, d.hy_min, d.hy_min, d.hy_film, d.growth),
        graded_lines(y_film1, y_top, d.hy_min, d.hy_min, d.hy_min, d.growth),
    )

    nx, ny = len(x_lines), len(y_lines)
    xc = 0.5 * (x_lines[1:] + x_lines[:-1])
    yc = 0.5 * (y_lines[1:] + y_lines[:-1])
    x_js, x_jd = spec.l_sd, spec.l_sd + spec.l_gate

    region = np.empty((ny - 1, nx - 1), dtype=np.int8)
    for j, yv in enumerate(yc):
        if yv < y_film0:
            region[j, :] = Region.BOX
        elif yv < y_film1:
            region[j, :] = np.where(
                xc < x_js, Region.SOURCE, np.where(xc > x_jd, Region.DRAIN, Region.SILICON_FILM)
            )
        else:
            row = np.full(nx - 1, Region.GATE_OXIDE, dtype=np.int8)
            if spec.include_spacer:
                near = ((xc < x_js) & (xc > x_js - spec.t_spacer)) | (
                    (xc > x_jd) & (xc < x_jd + spec.t_spacer)
                )
                row[near] = Region.SPACER
            region[j, :] = row

    is_si_cell = np.isin(region, [int(r) for r in SEMICONDUCTOR])
    node_si = np.zeros((ny, nx), dtype=bool)
    node_si[:-1, :-1] |= is_si_cell
    node_si[:-1, 1:] |= is_si_cell
    node_si[1:, :-1] |= is_si_cell
    node_si[1:, 1:] |= is_si_cell

    prof = _profile(spec, x_lines)
    net = np.where(node_si, prof[None, :], 0.0)

    tol = 1e-6 * spec.t_si
    film_j = np.nonzero((y_lines >= y_film0 - tol) & (y_lines <= y_film1 + tol))[0]
    gate_i = np.nonzero((x_lines >= x_js - tol) & (x_lines <= x_jd + tol))[0]
    contacts = {
        "gate": (ny - 1) * nx + gate_i,
        "source": film_j * nx + 0,
        "drain": film_j * nx + (nx - 1),
        "substrate": np.arange(nx),
    }

    for arr in (x_lines, y_lines, region, net, node_si, *contacts.values()):
        arr.setflags(write=False)
    return Mesh(
        spec=spec,
        density=density,
        x_lines=x_lines,
        y_lines=y_lines,
        region=region,
        contact_nodes=contacts,
        net_doping=net.ravel(),
        is_semiconductor=node_si.ravel(),
    )


def doping_at(mesh: Mesh, node) -> float:
    """Signed net doping (+donor, -acceptor) at a silicon node.

    ``node`` is a flat index or an ``(i, j)`` pair.
    """
    if isinstance(node, tuple):
        k = mesh.node(*node)
    else:
        k = int(node)
        if not 0 <= k < mesh.n_nodes:
            raise IndexError(f"node {k} out of range")
    if not mesh.is_semiconductor[k]:
        raise ValueError(f"node {k} lies in a dielectric; doping is undefined there")
    return float(mesh.net_doping[k])


def mesh_grading(mesh: Mesh) -> float:
    """Largest ratio between neighbouring spacings along either axis."""
    worst = 1.0
    for lines in (mesh.x_lines, mesh.y_lines):
        h = np.diff(lines)
        r = h[1:] / h[:-1]
        worst = max(worst, float(np.max(np.maximum(r, 1 / r))))
    return worst


def material_eps(region: np.ndarray, mat: MaterialParams = SILICON) -> np.ndarray:
    """Relative permittivity per cell."""
    eps = np.empty(region.shape)
    eps[np.isin(region, [int(r) for r in SEMICONDUCTOR])] = mat.eps_r_si
    eps[(region == Region.GATE_OXIDE) | (region == Region.BOX)] = mat.eps_r_ox
    eps[region == Region.SPACER] = mat.eps_r_nitride
    eps[region == Region.GATE_METAL] = mat.eps_r_ox
    return eps
