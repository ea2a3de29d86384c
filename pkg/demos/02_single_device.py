"""
One device, start to finish
===========================

Mesh the default device, solve equilibrium, sweep the gate at two drain
biases and a drain sweep at Vdd, then extract the usual figures of merit.
Runs on the coarse mesh in well under a minute.
"""

import numpy as np

from fdsoi.ddsolver import DeviceSolver, export_cutline, sweep_drain, sweep_gate, terminal_currents
from fdsoi.device import NM, default_device, generate_mesh
from fdsoi.extract import ExtractionSettings, extract_report

spec = default_device()
mesh = generate_mesh(spec, "coarse")
print(f"mesh: {mesh.nx} x {mesh.ny} lines, {mesh.n_semiconductor} silicon nodes")

solver = DeviceSolver(mesh)
eq = solver.equilibrium()
print("equilibrium iterations:", eq.diagnostics["outer_iterations"])
print("terminal currents at zero bias:",
      {k: f"{v:.1e}" for k, v in terminal_currents(eq).items()})

# %% transfer and output characteristics
vg = np.round(np.arange(-0.4, 1.2001, 0.05), 10)
vd = np.round(np.arange(0.0, 1.0001, 0.05), 10)
lin = sweep_gate(solver, 0.05, vg, start=eq)
sat, states = sweep_gate(solver, 1.0, vg, start=eq, return_states=True)
out = sweep_drain(solver, 1.0, vd, start=eq)

print("\n Vg     Id(50 mV)   Id(1 V)   [A/um]")
for k in range(0, vg.size, 4):
    print(f" {vg[k]:+.2f}  {lin.i[k]:.3e}  {sat.i[k]:.3e}")

# %% figures of merit
rep = extract_report(sat, lin, out, ExtractionSettings())
for name in ("vth_cc", "vth_extrap", "ss", "dibl", "ioff", "ion", "ion_ioff", "gm_max", "gd"):
    print(f"{name:>10s} = {getattr(rep, name):.4g}")
print("extraction errors:", rep.errors or "none")

# %% a look inside: vertical cut through mid-channel at Vg = Vd = 1 V
on = states[-1]
at = spec.l_sd + 0.5 * spec.l_gate
cut = export_cutline(on, mesh, "vertical", at, ["n", "E_vertical"])
film = (cut.position >= spec.t_box) & (cut.position <= spec.t_box + spec.t_si)
print("\n depth_nm   n [cm^-3]   E_y [V/cm]")
for y, n, e in zip(cut.position[film], cut.values["n"][film], cut.values["E_vertical"][film]):
    print(f" {(y - spec.t_box) / NM:6.2f}   {n:.3e}   {e:+.3e}")
