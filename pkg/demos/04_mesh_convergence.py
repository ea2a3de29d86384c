"""
How fine does the mesh need to be?
==================================

On-current at Vg = Vd = 1 V on the three built-in mesh densities.
The fine mesh takes roughly half a minute on one core.
"""

import time

from fdsoi.ddsolver import DeviceSolver, terminal_currents
from fdsoi.device import default_device, generate_mesh, mesh_grading

ids = {}
for density in ("coarse", "nominal", "fine"):
    t0 = time.perf_counter()
    mesh = generate_mesh(default_device(), density)
    s = DeviceSolver(mesh)
    st = s.solve_bias(s.equilibrium(), {"gate": 1.0})
    st = s.solve_bias(st, {"drain": 1.0})
    ids[density] = terminal_currents(st)["drain"]
    print(f"{density:>8s}: {mesh.n_nodes:5d} nodes, grading {mesh_grading(mesh):.2f}, "
          f"Id = {ids[density]:.6f} A/um  ({time.perf_counter() - t0:.1f} s)")

for a, b in (("coarse", "nominal"), ("nominal", "fine")):
    print(f"{a} -> {b}: {100 * (ids[b] / ids[a] - 1):+.2f}%")
