"""Bias sweeps producing I-V curves, and cutline export."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..device import DeviceSpec, Mesh, generate_mesh
from ..extract import IVCurve
from ..physcore import SILICON, MaterialParams
from .solver import ConvergenceError, DeviceSolver, SolutionState, SolverSettings, TransportParams

log = logging.getLogger(__name__)

QUANTITIES = ("v", "n", "p", "E_vertical", "E_lateral")


class SweepFailed(ConvergenceError):
    """A bias point of a sweep failed; ``partial`` holds the rows already solved."""

    def __init__(self, message, cause: ConvergenceError, partial_v, partial_i, states):
        super().__init__(message, cause.residual_history, cause.last_good, cause.failed_bias)
        self.partial_v = list(partial_v)
        self.partial_i = list(partial_i)
        self.states = states


def as_solver(device, density: str = "nominal", mat: MaterialParams = SILICON,
              tp: TransportParams | None = None,
              settings: SolverSettings | None = None) -> DeviceSolver:
    if isinstance(device, DeviceSolver):
        return device
    if isinstance(device, DeviceSpec):
        device = generate_mesh(device, density)
    if isinstance(device, Mesh):
        return DeviceSolver(device, mat, tp, settings)
    raise TypeError(f"cannot build a solver from {type(device).__name__}")


def _ordered(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0 or np.any(np.diff(arr) <= 0):
        raise ValueError("bias list must be non-empty and strictly increasing")
    return arr


def _sweep(solver: DeviceSolver, fixed: dict, swept: str, values: np.ndarray,
           start: SolutionState | None, kind: str, fixed_bias: float, keep_states: bool):
    st = start if start is not None else solver.equilibrium()
    # reach the first point: swept contact first, then the fixed contact
    st = solver.solve_bias(st, {swept: values[0]})
    st = solver.solve_bias(st, fixed)
    out_i, states = [], []
    for k, val in enumerate(values):
        try:
            st = solver.solve_bias(st, {swept: val})
        except ConvergenceError as exc:
            raise SweepFailed(f"{kind} sweep failed at {swept}={val}", exc,
                              values[:k], out_i, states) from exc
        out_i.append(solver.drain_current(st))
        if keep_states:
            states.append(st)
    return IVCurve(kind, fixed_bias, values, np.array(out_i), "simulated", min_points=1), states, st


def sweep_gate(device, vd: float, vg_list: Sequence[float], *, density: str = "nominal",
               start: SolutionState | None = None, return_states: bool = False, **solver_kw):
    """Id-Vg at fixed drain bias with continuation between points.

    ``device`` may be a DeviceSolver, Mesh or DeviceSpec.  On failure a
    :class:`SweepFailed` carrying the rows solved so far is raised.
    """
    solver = as_solver(device, density, **solver_kw)
    vg = _ordered(vg_list)
    curve, states, _ = _sweep(solver, {"drain": vd}, "gate", vg, start, "gate", vd, return_states)
    return (curve, states) if return_states else curve


def sweep_drain(device, vg: float, vd_list: Sequence[float], *, density: str = "nominal",
                start: SolutionState | None = None, return_states: bool = False, **solver_kw):
    """Id-Vd at fixed gate bias."""
    solver = as_solver(device, density, **solver_kw)
    vd = _ordered(vd_list)
    curve, states, _ = _sweep(solver, {"gate": vg}, "drain", vd, start, "drain", vg, return_states)
    return (curve, states) if return_states else curve


@dataclass(frozen=True)
class Cutline:
    direction: str
    coordinate: float  # cm
    position: np.ndarray  # cm, strictly increasing
    values: dict[str, np.ndarray]

    def rows(self, quantity: str):
        return list(zip(self.position, self.values[quantity]))


def _fields(state: SolutionState, mesh: Mesh):
    v = state.v.reshape(mesh.ny, mesh.nx)
    dv_dy, dv_dx = np.gradient(v, mesh.y_lines, mesh.x_lines, edge_order=2)
    return -dv_dy, -dv_dx


def export_cutline(state: SolutionState, mesh: Mesh, direction: str, coordinate: float,
                   quantities: Sequence[str] = QUANTITIES) -> Cutline:
    """Profile along a horizontal (fixed y) or vertical (fixed x) line.

    Values between mesh lines are interpolated linearly (logarithmically for
    carrier densities).  Fields are ``-grad V`` from second-order differences.
    """
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad:
        raise ValueError(f"unknown quantities {bad}; choose from {QUANTITIES}")
    if direction == "horizontal":
        lines, position = mesh.y_lines, mesh.x_lines
    elif direction == "vertical":
        lines, position = mesh.x_lines, mesh.y_lines
    else:
        raise ValueError("direction must be 'horizontal' or 'vertical'")
    if not lines[0] <= coordinate <= lines[-1]:
        raise IndexError(f"coordinate {coordinate:g} cm outside mesh [{lines[0]:g}, {lines[-1]:g}]")

    k = int(np.clip(np.searchsorted(lines, coordinate) - 1, 0, lines.size - 2))
    t = (coordinate - lines[k]) / (lines[k + 1] - lines[k])
    if t <= 0.0:
        t = 0.0
    elif t >= 1.0:
        t = 1.0

    ev, el = _fields(state, mesh)
    grids = {
        "v": state.v.reshape(mesh.ny, mesh.nx),
        "n": state.n.reshape(mesh.ny, mesh.nx),
        "p": state.p.reshape(mesh.ny, mesh.nx),
        "E_vertical": ev,
        "E_lateral": el,
    }
    out = {}
    for q in quantities:
        g = grids[q] if direction == "horizontal" else grids[q].T
        a, b = g[k], g[k + 1]
        if t == 0.0:
            val = a.copy()
        elif t == 1.0:
            val = b.copy()
        elif q in ("n", "p") and np.all(a > 0) and np.all(b > 0):
            val = np.exp((1 - t) * np.log(a) + t * np.log(b))
        else:
            val = (1 - t) * a + t * b
        out[q] = val
    return Cutline(direction, float(coordinate), position.copy(), out)
