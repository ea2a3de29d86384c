from .flux import bernoulli, sg_electron_flux, sg_hole_flux
from .linear import LinearSystem, NumericalError, direct_solve, linear_solve
from .solver import (
    ConvergenceError,
    DeviceSolver,
    SolutionState,
    SolverSettings,
    TransportParams,
    continuity_step,
    drain_current,
    poisson_step,
    solve_bias,
    solve_equilibrium,
    terminal_currents,
)
from .sweeps import QUANTITIES, Cutline, SweepFailed, as_solver, export_cutline, sweep_drain, sweep_gate

__all__ = [
    "as_solver",
    "bernoulli",
    "continuity_step",
    "ConvergenceError",
    "Cutline",
    "DeviceSolver",
    "direct_solve",
    "drain_current",
    "export_cutline",
    "linear_solve",
    "LinearSystem",
    "NumericalError",
    "poisson_step",
    "QUANTITIES",
    "sg_electron_flux",
    "sg_hole_flux",
    "SolutionState",
    "solve_bias",
    "solve_equilibrium",
    "SolverSettings",
    "sweep_drain",
    "sweep_gate",
    "SweepFailed",
    "terminal_currents",
    "TransportParams",
]
