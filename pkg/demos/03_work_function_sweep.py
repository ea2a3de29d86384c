"""
Choosing a gate work function
=============================

Sweep the metal work function, watch threshold voltage climb and leakage
fall, and pick the value that balances the two.  The coarse mesh keeps
this to about a minute; pass "nominal" as the first argument for the
production mesh.
"""

import sys

import numpy as np

from fdsoi.sweep import SweepPlan, run_wf_sweep

density = sys.argv[1] if len(sys.argv) > 1 else "coarse"
plan = SweepPlan(wf_values=(4.4, 4.5, 4.6, 4.7, 4.8, 4.9, 5.0), density=density)
report = run_wf_sweep(plan)

print(" wf    vth_cc   SS     DIBL   Ioff        Ion/Ioff   gm_max")
for r in report.rows:
    m = r.report
    print(f" {r.wf:.2f}  {m.vth_cc:+.3f}  {m.ss:5.1f}  {m.dibl:5.1f}  "
          f"{m.ioff:.2e}  {m.ion_ioff:.2e}  {m.gm_max:.4f}")

# The work function only shifts the gate axis, so vth tracks it one to one
# and the swing and DIBL columns do not move.
f = report.vth_fit
print(f"\nvth_cc   = {f.slope:.4f} * wf {f.intercept:+.4f}   (R2 {f.r2:.6f})")
f = report.log_ioff_fit
print(f"log Ioff = {f.slope:.3f} * wf {f.intercept:+.3f}   (R2 {f.r2:.6f})")
print(f"Ioff drops {10 ** (-0.1 * f.slope):.1f}x per 100 meV")

# %% the trade-off
# Normalizing vth and log Ioff to [0, 1] over the sweep turns the choice
# into a min-max problem; its answer sits where the two curves cross.
vth = report.column("vth_cc")
lg = np.log10(report.column("ioff"))
nv = (vth - vth.min()) / np.ptp(vth)
nl = (lg - lg.min()) / np.ptp(lg)
for w, a, b in zip(report.wf, nv, nl):
    print(f" {w:.2f}  {'#' * int(20 * a):<20s} | {'*' * int(20 * b)}")
print(f"\noptimum work function: {report.optimum_wf:.3f} eV")
