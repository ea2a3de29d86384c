"""Steady-state drift-diffusion solution by Gummel iteration.

Poisson's equation is integrated over box control volumes of the tensor
mesh, oxides included (they carry no carriers).  Carrier continuity uses
Scharfetter-Gummel edge fluxes on the silicon part of each control volume.
Potentials are referenced to the intrinsic level, so with Boltzmann
statistics ``n = ni exp((V - phi_n)/Vt)`` and ``p = ni exp((phi_p - V)/Vt)``.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from ..device import CONTACTS, SEMICONDUCTOR, Mesh, material_eps
from ..physcore import CONST, SILICON, MaterialParams, thermal_voltage
from .flux import bernoulli
from .linear import LinearSystem, NumericalError, direct_solve, linear_solve, mmatrix_band_solve

log = logging.getLogger(__name__)

Carrier = Literal["electron", "hole"]

# A/cm (2D, per unit width) -> A/um
PER_UM = 1e-4


class ConvergenceError(NumericalError):
    """Gummel iteration (or a bias ramp) failed to converge."""

    def __init__(self, message, residual_history=(), last_good=None, failed_bias=None):
        hist = list(residual_history)
        super().__init__(message, residual=hist[-1] if hist else float("nan"))
        self.residual_history = hist
        self.last_good = last_good
        self.failed_bias = failed_bias


@dataclass(frozen=True)
class TransportParams:
    mu_n: float = SILICON.mu_n
    mu_p: float = SILICON.mu_p
    srh_enabled: bool = True
    tau_n: float = SILICON.tau_n
    tau_p: float = SILICON.tau_p
    n_t: float = 0.0
    temp: float = 300.0

    def __post_init__(self):
        for name in ("mu_n", "mu_p", "tau_n", "tau_p", "temp"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_t < 0:
            raise ValueError("n_t must be non-negative")

    # Einstein relation, not free parameters
    @property
    def d_n(self) -> float:
        return self.mu_n * thermal_voltage(self.temp)

    @property
    def d_p(self) -> float:
        return self.mu_p * thermal_voltage(self.temp)


@dataclass(frozen=True)
class SolverSettings:
    gummel_tol: float = 1e-5
    gummel_max_iter: int = 400
    linear_tol: float = 1e-8
    linear_max_iter: int = 200000
    omega: float = 1.3
    damping: float = 0.5
    bias_step_max: float = 0.1
    linear_method: Literal["direct", "sor"] = "direct"
    newton_max_iter: int = 60
    anderson_depth: int = 8

    def __post_init__(self):
        for name in ("gummel_tol", "linear_tol", "damping", "bias_step_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.omega < 2:
            raise ValueError("omega must lie in (0, 2)")
        if self.anderson_depth < 0:
            raise ValueError("anderson_depth must be >= 0")
        if self.linear_method not in ("direct", "sor"):
            raise ValueError(f"unknown linear_method {self.linear_method!r}")


@dataclass
class SolutionState:
    v: np.ndarray
    n: np.ndarray
    p: np.ndarray
    bias: dict[str, float]
    diagnostics: dict = field(default_factory=dict)
    solver: "DeviceSolver | None" = field(default=None, repr=False, compare=False)

    def copy(self) -> "SolutionState":
        return SolutionState(self.v.copy(), self.n.copy(), self.p.copy(), dict(self.bias),
                             dict(self.diagnostics), self.solver)


def _zero_bias() -> dict[str, float]:
    return {c: 0.0 for c in CONTACTS}


class _Geometry:
    """Edge lists, face weights and control volumes of a tensor mesh."""

    def __init__(self, mesh: Mesh, mat: MaterialParams):
        nx, ny = mesh.nx, mesh.ny
        dx = np.diff(mesh.x_lines)
        dy = np.diff(mesh.y_lines)
        eps = material_eps(mesh.region, mat)
        si = np.isin(mesh.region, [int(r) for r in SEMICONDUCTOR]).astype(float)
        idx = np.arange(nx * ny).reshape(ny, nx)

        # horizontal edges (i,j)-(i+1,j): cells below (j-1) and above (j)
        dyp = np.concatenate([[0.0], dy, [0.0]])[:, None]
        epsp = np.vstack([np.zeros((1, nx - 1)), eps, np.zeros((1, nx - 1))])
        sip = np.vstack([np.zeros((1, nx - 1)), si, np.zeros((1, nx - 1))])
        h_eps = 0.5 * (epsp[:-1] * dyp[:-1] + epsp[1:] * dyp[1:])
        h_si = 0.5 * (sip[:-1] * dyp[:-1] + sip[1:] * dyp[1:])
        h_len = np.broadcast_to(dx[None, :], (ny, nx - 1))

        # vertical edges (i,j)-(i,j+1): cells left (i-1) and right (i)
        dxp = np.concatenate([[0.0], dx, [0.0]])[None, :]
        epsq = np.hstack([np.zeros((ny - 1, 1)), eps, np.zeros((ny - 1, 1))])
        siq = np.hstack([np.zeros((ny - 1, 1)), si, np.zeros((ny - 1, 1))])
        v_eps = 0.5 * (epsq[:, :-1] * dxp[:, :-1] + epsq[:, 1:] * dxp[:, 1:])
        v_si = 0.5 * (siq[:, :-1] * dxp[:, :-1] + siq[:, 1:] * dxp[:, 1:])
        v_len = np.broadcast_to(dy[:, None], (ny - 1, nx))

        self.ea = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
        self.eb = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
        self.h = np.concatenate([h_len.ravel(), v_len.ravel()])
        self.w_eps = np.concatenate([h_eps.ravel(), v_eps.ravel()])
        self.w_si = np.concatenate([h_si.ravel(), v_si.ravel()])
        self.n_h_edges = ny * (nx - 1)

        area = dy[:, None] * dx[None, :] * si
        vol = np.zeros((ny, nx))
        vol[:-1, :-1] += area
        vol[:-1, 1:] += area
        vol[1:, :-1] += area
        vol[1:, 1:] += area
        self.vol_si = 0.25 * vol.ravel()

        n_nodes = nx * ny
        c = self.w_eps / self.h
        rows = np.concatenate([self.ea, self.eb, self.ea, self.eb])
        cols = np.concatenate([self.eb, self.ea, self.ea, self.eb])
        vals = np.concatenate([c, c, -c, -c])
        self.laplacian = sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))

        self.si_nodes = np.nonzero(mesh.is_semiconductor)[0]
        keep = self.w_si > 0
        self.ce_a = self.ea[keep]
        self.ce_b = self.eb[keep]
        self.ce_g = self.w_si[keep] / self.h[keep]
        local = -np.ones(n_nodes, dtype=np.int64)
        local[self.si_nodes] = np.arange(self.si_nodes.size)
        self.local = local


class DeviceSolver:
    """Owns the discretization of one mesh; produces :class:`SolutionState` objects."""

    def __init__(self, mesh: Mesh, mat: MaterialParams = SILICON,
                 tp: TransportParams | None = None, settings: SolverSettings | None = None):
        self.mesh = mesh
        self.mat = mat
        self.tp = tp if tp is not None else TransportParams(
            mu_n=mat.mu_n, mu_p=mat.mu_p, tau_n=mat.tau_n, tau_p=mat.tau_p, temp=mesh.spec.temp)
        self.settings = settings or SolverSettings()
        self.vt = thermal_voltage(self.tp.temp)
        self.qe = CONST.q / CONST.eps0
        self.geo = _Geometry(mesh, mat)

        nodes = mesh.n_nodes
        self.dirichlet = np.zeros(nodes, dtype=bool)
        for c in CONTACTS:
            self.dirichlet[mesh.contact_nodes[c]] = True
        self.free = np.nonzero(~self.dirichlet)[0]
        a = self.geo.laplacian
        self._a_ff = a[self.free][:, self.free].tocsr()

        ohmic = np.zeros(nodes, dtype=bool)
        ohmic[mesh.contact_nodes["source"]] = True
        ohmic[mesh.contact_nodes["drain"]] = True
        free_si = self.geo.si_nodes[~ohmic[self.geo.si_nodes]]
        # x-major ordering keeps the continuity matrices banded (one film column wide)
        col, row = free_si % mesh.nx, free_si // mesh.nx
        self.cont_order = free_si[np.lexsort((row, col))]
        self.cont_index = -np.ones(nodes, dtype=np.int64)
        self.cont_index[self.cont_order] = np.arange(self.cont_order.size)

        self.doping = mesh.net_doping.astype(float)
        self.nt = np.where(mesh.is_semiconductor, self.tp.n_t, 0.0)

    # ----------------------------------------------------------------- boundaries
    def _neutral(self, net: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ni = self.mat.ni
        half = 0.5 * net
        root = np.sqrt(half * half + ni * ni)
        big = np.abs(half) + root
        n = np.where(net >= 0, big, ni * ni / big)
        p = np.where(net >= 0, ni * ni / big, big)
        return n, p

    def boundary_values(self, bias: dict[str, float]):
        """Dirichlet potential (all contacts) and carrier densities (ohmic)."""
        mesh = self.mesh
        vt, ni = self.vt, self.mat.ni
        v_bc = {}
        for name in ("source", "drain"):
            k = mesh.contact_nodes[name]
            v_bc[name] = bias[name] + vt * np.arcsinh(self.doping[k] / (2 * ni))
        k = mesh.contact_nodes["substrate"]
        # grounded ideal contact referenced to the intrinsic level
        v_bc["substrate"] = np.full(k.size, float(bias["substrate"]))
        k = mesh.contact_nodes["gate"]
        v_bc["gate"] = np.full(k.size, bias["gate"] - (mesh.spec.phi_m - self.mat.phi_ref))
        return v_bc

    def _apply_bc(self, state: SolutionState) -> None:
        v_bc = self.boundary_values(state.bias)
        for name, vals in v_bc.items():
            state.v[self.mesh.contact_nodes[name]] = vals
        for name in ("source", "drain"):
            k = self.mesh.contact_nodes[name]
            n, p = self._neutral(self.doping[k])
            state.n[k] = n
            state.p[k] = p

    # ------------------------------------------------------------------ poisson
    def space_charge(self, v, n, p) -> np.ndarray:
        """Net charge density / q at each node (zero in dielectrics)."""
        rho = p - n + self.doping + self.nt
        return np.where(self.mesh.is_semiconductor, rho, 0.0)

    def poisson_residual(self, v, n, p) -> np.ndarray:
        f = self.geo.laplacian @ v + self.qe * self.geo.vol_si * self.space_charge(v, n, p)
        return f[self.free]

    def _linear(self, matrix, rhs, x0=None) -> np.ndarray:
        s = self.settings
        system = LinearSystem(matrix, rhs, x0)
        if s.linear_method == "sor":
            x, _ = linear_solve(system, s.linear_tol, s.linear_max_iter, s.omega)
            return x
        return direct_solve(system)

    def poisson_system(self, v, n, p) -> LinearSystem:
        """Newton system for the free nodes: K dv = f with K an M-matrix."""
        free = self.free
        qv = self.qe * self.geo.vol_si
        f = (self.geo.laplacian @ v + qv * self.space_charge(v, n, p))[free]
        jd = (qv * (n + p) / self.vt)[free]
        return LinearSystem((-self._a_ff + sp.diags(jd)).tocsr(), f)

    def poisson_step(self, state: SolutionState, tol: float | None = None):
        """Nonlinear Poisson with quasi-Fermi levels frozen at their input values.

        Returns ``(v, n, p, max_update, residual_norm)``; per-node Newton
        updates are clamped to ``settings.damping`` volts.
        """
        s = self.settings
        tol = s.gummel_tol * 0.1 if tol is None else tol
        vt = self.vt
        v0, n0, p0 = state.v, state.n, state.p
        v = v0.copy()
        free = self.free
        for _ in range(s.newton_max_iter):
            du = np.clip((v - v0) / vt, -700, 700)
            n = n0 * np.exp(du)
            p = p0 * np.exp(-du)
            system = self.poisson_system(v, n, p)
            dv = self._linear(system.matrix, system.rhs)
            if not np.all(np.isfinite(dv)):
                raise NumericalError("singular Poisson linearization")
            dv = np.clip(dv, -s.damping, s.damping)
            v[free] += dv
            if np.max(np.abs(dv)) < tol:
                break
        else:
            raise ConvergenceError("Poisson Newton loop did not converge",
                                   [float(np.max(np.abs(dv)))])
        du = np.clip((v - v0) / vt, -700, 700)
        n = n0 * np.exp(du)
        p = p0 * np.exp(-du)
        res = float(np.linalg.norm(self.poisson_residual(v, n, p)))
        return v, n, p, float(np.max(np.abs(v - v0))), res

    # --------------------------------------------------------------- continuity
    def _srh(self, n, p):
        """Denominator of the SRH rate for a midgap trap."""
        tp, ni = self.tp, self.mat.ni
        return tp.tau_p * (n + ni) + tp.tau_n * (p + ni)

    def continuity_system(self, v, n, p, carrier: Carrier) -> tuple[LinearSystem, np.ndarray]:
        """Assemble the SG continuity system for the free silicon nodes.

        Unknowns are the carrier densities at silicon nodes outside the ohmic
        contacts, in ``self.cont_order`` (x-major, so the matrix is banded).
        Returns the system and its column sums, accumulated term by term.
        """
        g = self.geo
        red = self.cont_index
        old = n if carrier == "electron" else p
        nf = self.cont_order.size
        a, b = g.ce_a, g.ce_b
        ra, rb = red[a], red[b]
        u = (v[b] - v[a]) / self.vt
        if carrier == "electron":
            c = self.tp.d_n * g.ce_g
            da, db = c * bernoulli(-u), c * bernoulli(u)
        else:
            c = self.tp.d_p * g.ce_g
            da, db = c * bernoulli(u), c * bernoulli(-u)
        # row a: da*x_a - db*x_b ; row b: db*x_b - da*x_a
        diag = np.zeros(nf)
        rhs = np.zeros(nf)
        excess = np.zeros(nf)
        af, bf = ra >= 0, rb >= 0
        np.add.at(diag, ra[af], da[af])
        np.add.at(diag, rb[bf], db[bf])
        both = af & bf
        a_only = af & ~bf
        b_only = bf & ~af
        np.add.at(rhs, ra[a_only], db[a_only] * old[b[a_only]])
        np.add.at(excess, ra[a_only], da[a_only])
        np.add.at(rhs, rb[b_only], da[b_only] * old[a[b_only]])
        np.add.at(excess, rb[b_only], db[b_only])
        if self.tp.srh_enabled:
            nodes = self.cont_order
            den = self._srh(n[nodes], p[nodes])
            vol = g.vol_si[nodes]
            other = p[nodes] if carrier == "electron" else n[nodes]
            r_diag = vol * other / den
            diag += r_diag
            excess += r_diag
            rhs += vol * self.mat.ni ** 2 / den
        rows = np.concatenate([ra[both], rb[both], np.arange(nf)])
        cols = np.concatenate([rb[both], ra[both], np.arange(nf)])
        vals = np.concatenate([-db[both], -da[both], diag])
        matrix = sp.csr_matrix((vals, (rows, cols)), shape=(nf, nf))
        return LinearSystem(matrix, rhs, old[self.cont_order]), excess

    def continuity_step(self, state: SolutionState, carrier: Carrier):
        """Solve the linear continuity equation of one carrier for fixed V.

        Returns ``(density, max_relative_change)``.
        """
        system, excess = self.continuity_system(state.v, state.n, state.p, carrier)
        s = self.settings
        if s.linear_method == "sor":
            x, _ = linear_solve(system, s.linear_tol, s.linear_max_iter, s.omega)
        else:
            x = mmatrix_band_solve(system.matrix, excess, system.rhs)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"{carrier} continuity produced non-finite density")
        x = np.maximum(x, np.finfo(float).tiny)
        old = state.n if carrier == "electron" else state.p
        new = old.copy()
        new[self.cont_order] = x
        prev = old[self.cont_order]
        change = float(np.max(np.abs(x - prev) / np.maximum(prev, 1e-300)))
        return new, change

    # ------------------------------------------------------------------ drivers
    def initial_state(self, bias: dict[str, float] | None = None) -> SolutionState:
        vt, ni = self.vt, self.mat.ni
        v = np.where(self.mesh.is_semiconductor,
                     vt * np.arcsinh(self.doping / (2 * ni)), 0.0)
        n, p = self._neutral(self.doping)
        n = np.where(self.mesh.is_semiconductor, n, 0.0)
        p = np.where(self.mesh.is_semiconductor, p, 0.0)
        st = SolutionState(v, n, p, bias or _zero_bias(), {}, self)
        self._apply_bc(st)
        return st

    def equilibrium(self) -> SolutionState:
        t0 = time.perf_counter()
        st = self.initial_state()
        si = self.mesh.is_semiconductor
        ni, vt = self.mat.ni, self.vt
        history = []
        for _ in range(self.settings.gummel_max_iter):
            st.n = np.where(si, ni * np.exp(st.v / vt), 0.0)
            st.p = np.where(si, ni * np.exp(-st.v / vt), 0.0)
            v, n, p, dv, res = self.poisson_step(st)
            st.v = v
            history.append(dv)
            if dv < self.settings.gummel_tol:
                break
        else:
            raise ConvergenceError("equilibrium did not converge", history)
        st.n = np.where(si, ni * np.exp(st.v / vt), 0.0)
        st.p = np.where(si, ni * np.exp(-st.v / vt), 0.0)
        st.diagnostics = {
            "outer_iterations": len(history),
            "residual_history": history,
            "poisson_residual": float(np.linalg.norm(self.poisson_residual(st.v, st.n, st.p))),
            "wall_time": time.perf_counter() - t0,
            "converged": True,
        }
        return st

    def quasi_fermi(self, st: SolutionState) -> np.ndarray:
        """Stacked (phi_n, phi_p) at silicon nodes."""
        si = self.geo.si_nodes
        vt, ni = self.vt, self.mat.ni
        return np.concatenate([st.v[si] - vt * np.log(st.n[si] / ni),
                               st.v[si] + vt * np.log(st.p[si] / ni)])

    def _with_quasi_fermi(self, st: SolutionState, x: np.ndarray) -> SolutionState:
        si = self.geo.si_nodes
        vt, ni = self.vt, self.mat.ni
        k = si.size
        out = st.copy()
        out.n[si] = ni * np.exp(np.clip((st.v[si] - x[:k]) / vt, -700, 700))
        out.p[si] = ni * np.exp(np.clip((x[k:] - st.v[si]) / vt, -700, 700))
        return out

    def gummel_map(self, st: SolutionState) -> tuple[SolutionState, float]:
        """One Gummel pass: nonlinear Poisson, electron then hole continuity."""
        v, n, p, dv, _ = self.poisson_step(st)
        out = st.copy()
        out.v, out.n, out.p = v, n, p
        out.n, _ = self.continuity_step(out, "electron")
        out.p, _ = self.continuity_step(out, "hole")
        return out, dv

    def gummel(self, start: SolutionState, bias: dict[str, float]) -> SolutionState:
        """Converge at a fixed bias starting from ``start``.

        The Gummel map is applied to the quasi-Fermi potentials with Anderson
        mixing of depth ``settings.anderson_depth`` (0 gives plain Gummel).
        Convergence requires both the potential and the quasi-Fermi updates
        of one pass to fall below ``gummel_tol``.
        """
        t0 = time.perf_counter()
        s = self.settings
        cur = start.copy()
        cur.bias = {**_zero_bias(), **bias}
        self._apply_bc(cur)
        history: list[float] = []
        xs: list[np.ndarray] = []
        fs: list[np.ndarray] = []
        best = np.inf
        for it in range(s.gummel_max_iter):
            x = self.quasi_fermi(cur)
            new, dv = self.gummel_map(cur)
            g = self.quasi_fermi(new)
            f = g - x
            r = max(dv, float(np.max(np.abs(f))))
            history.append(r)
            if not np.isfinite(r):
                raise ConvergenceError("Gummel loop diverged", history, start, dict(bias))
            if r < s.gummel_tol and it > 0:
                break
            if r > 10 * best:
                xs.clear()
                fs.clear()
            best = min(best, r)
            xs.append(x)
            fs.append(f)
            del xs[:-(s.anderson_depth + 1)], fs[:-(s.anderson_depth + 1)]
            if s.anderson_depth and len(fs) > 1:
                d_f = np.column_stack([fs[i + 1] - fs[i] for i in range(len(fs) - 1)])
                d_x = np.column_stack([xs[i + 1] - xs[i] for i in range(len(xs) - 1)])
                gamma = np.linalg.lstsq(d_f, f, rcond=None)[0]
                cur = self._with_quasi_fermi(new, g - (d_x + d_f) @ gamma)
            else:
                cur = new
        else:
            raise ConvergenceError(
                f"Gummel loop did not converge in {s.gummel_max_iter} iterations at {bias}",
                history, last_good=start, failed_bias=dict(bias))
        new.diagnostics = {
            "outer_iterations": len(history),
            "residual_history": history,
            "poisson_residual": float(np.linalg.norm(self.poisson_residual(new.v, new.n, new.p))),
            "wall_time": time.perf_counter() - t0,
            "converged": True,
        }
        return new

    def solve_bias(self, prev: SolutionState, target: dict[str, float]) -> SolutionState:
        """Ramp contact biases from ``prev`` to ``target`` by continuation."""
        target = {**prev.bias, **target}
        for k, val in target.items():
            if k not in CONTACTS:
                raise ValueError(f"unknown contact {k!r}")
            if not np.isfinite(val):
                raise ValueError(f"non-finite bias for {k}")
        step_max = self.settings.bias_step_max
        min_step = step_max / 64
        cur = prev
        t0 = time.perf_counter()
        iters = 0
        frac_done = 0.0
        start_bias = dict(prev.bias)
        span = max(abs(target[c] - start_bias[c]) for c in CONTACTS)
        if span == 0.0:
            out = self.gummel(cur, target)
            return out
        step = min(step_max, span) / span  # as a fraction of the full ramp
        while frac_done < 1.0 - 1e-12:
            frac = min(1.0, frac_done + step)
            bias = {c: start_bias[c] + frac * (target[c] - start_bias[c]) for c in CONTACTS}
            if frac >= 1.0 - 1e-12:
                bias = dict(target)
            try:
                cur = self.gummel(cur, bias)
                iters += cur.diagnostics["outer_iterations"]
                frac_done = frac
                step = min(step * 1.5, step_max / span)
            except (ConvergenceError, NumericalError) as exc:
                step *= 0.5
                log.debug("bias step failed at %s (%s); halving", bias, exc)
                if step * span < min_step:
                    hist = getattr(exc, "residual_history", [])
                    raise ConvergenceError(
                        f"bias ramp failed at {bias}", hist, last_good=cur, failed_bias=bias
                    ) from exc
        cur.diagnostics["ramp_iterations"] = iters
        cur.diagnostics["ramp_wall_time"] = time.perf_counter() - t0
        return cur

    # ------------------------------------------------------------------ currents
    def edge_currents(self, state: SolutionState):
        """Electron and hole current per edge (a -> b), A/cm, silicon edges only."""
        g = self.geo
        u = (state.v[g.ce_b] - state.v[g.ce_a]) / self.vt
        bp, bm = bernoulli(u), bernoulli(-u)
        q = CONST.q
        jn = q * self.tp.d_n * g.ce_g * (state.n[g.ce_b] * bp - state.n[g.ce_a] * bm)
        jp = q * self.tp.d_p * g.ce_g * (state.p[g.ce_a] * bp - state.p[g.ce_b] * bm)
        return jn, jp

    def terminal_currents(self, state: SolutionState) -> dict[str, float]:
        """Current flowing from each contact into the device, A/um."""
        g = self.geo
        jn, jp = self.edge_currents(state)
        j = jn + jp
        out = {}
        for name in CONTACTS:
            mask = np.zeros(self.mesh.n_nodes, dtype=bool)
            mask[self.mesh.contact_nodes[name]] = True
            leave = mask[g.ce_a] & ~mask[g.ce_b]
            enter = mask[g.ce_b] & ~mask[g.ce_a]
            out[name] = float((j[leave].sum() - j[enter].sum()) * PER_UM)
        return out

    def drain_current(self, state: SolutionState) -> float:
        """Drain current (A/um) evaluated on a vertical cut at mid-channel.

        By discrete current conservation this equals the drain terminal
        current, but it is free of the cancellation between large opposing
        fluxes at the heavily doped contact, so it stays accurate deep in
        subthreshold.
        """
        g = self.geo
        mesh = self.mesh
        i_mid = mesh.nx // 2 - 1 if mesh.nx % 2 == 0 else mesh.nx // 2
        jn, jp = self.edge_currents(state)
        ia = g.ce_a % mesh.nx
        horiz = g.ce_b == g.ce_a + 1
        cut = horiz & (ia == i_mid)
        return float(-(jn[cut] + jp[cut]).sum() * PER_UM)


# ------------------------------------------------------------------ module API
def solve_equilibrium(mesh: Mesh, mat: MaterialParams = SILICON,
                      tp: TransportParams | None = None,
                      s: SolverSettings | None = None) -> SolutionState:
    return DeviceSolver(mesh, mat, tp, s).equilibrium()


def solve_bias(prev: SolutionState, target_bias: dict[str, float]) -> SolutionState:
    return prev.solver.solve_bias(prev, target_bias)


def poisson_step(state: SolutionState):
    return state.solver.poisson_step(state)


def continuity_step(state: SolutionState, carrier: Carrier):
    return state.solver.continuity_step(state, carrier)


def terminal_currents(state: SolutionState, mesh: Mesh | None = None) -> dict[str, float]:
    if mesh is not None and mesh is not state.solver.mesh:
        raise ValueError("state was not computed on this mesh")
    return state.solver.terminal_currents(state)


def drain_current(state: SolutionState) -> float:
    return state.solver.drain_current(state)


def with_settings(settings: SolverSettings, **changes) -> SolverSettings:
    return dataclasses.replace(settings, **changes)
